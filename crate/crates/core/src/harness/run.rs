//! Single Prandtl or Navier-Stokes run: time loop, CSV series, snapshots, metadata.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::diagnostics::{decay_fit, DecayFit, E1Sample, E1Tracker, EsSample, EsTracker};
use crate::error::{Error, Result};
use crate::fields::{Field, Grid};
use crate::gevrey::make_gevrey_data;
use crate::hns::{make_hns_data, HnsSolver, HnsState};
use crate::integrator::GrowthGuard;
use crate::paley::DyadicBank;
use crate::prandtl::{
    enforce_compatibility, recover_v, PrandtlOptions, PrandtlSolver, PrandtlState,
};

use super::config::{ExperimentKind, RunConfig};
use super::snapshot::Snapshot;

pub const VERSION: &str = concat!("hyperprandtl ", env!("CARGO_PKG_VERSION"));

/// Formats a float with 17 significant digits.
pub(crate) fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

/// Initial `(u0, u1)` of a config, projected to zero vertical mean.
pub fn initial_data(cfg: &RunConfig, grid: &Grid) -> Result<(Field, Field)> {
    let d = &cfg.data;
    let (u0, u1) = make_gevrey_data(grid, &cfg.gevrey, d.amplitude, d.m_max, &d.profile, d.u1_scale)?;
    Ok(enforce_compatibility(grid, &u0, &u1))
}

/// A solver together with its current state.
#[derive(Clone, Debug)]
pub(crate) enum Machine {
    Prandtl(PrandtlSolver, PrandtlState),
    Hns(HnsSolver, HnsState),
}

impl Machine {
    pub(crate) fn prandtl(cfg: &RunConfig, grid: &Grid, u0: &Field, u1: &Field) -> Self {
        let opts = PrandtlOptions {
            pressure_factor: cfg.solver.pressure_factor,
            nonlinear: cfg.solver.nonlinear,
        };
        Machine::Prandtl(
            PrandtlSolver::new(grid, opts),
            PrandtlState::new(u0.clone(), u1.clone()),
        )
    }

    pub(crate) fn hns(cfg: &RunConfig, grid: &Grid, u0: &Field, u1: &Field, eps: f64) -> Result<Self> {
        Ok(Machine::Hns(
            HnsSolver::new(grid, eps, cfg.solver.nonlinear)?,
            make_hns_data(grid, u0, u1, eps)?,
        ))
    }

    pub(crate) fn t(&self) -> f64 {
        match self {
            Machine::Prandtl(_, s) => s.t,
            Machine::Hns(_, s) => s.t,
        }
    }

    /// Advances one step; the Navier-Stokes state is cleaned every `cleanup_every` steps.
    pub(crate) fn advance(&mut self, dt: f64, step: usize, cleanup_every: usize) -> Result<()> {
        match self {
            Machine::Prandtl(solver, state) => *state = solver.step(state, dt)?,
            Machine::Hns(solver, state) => {
                *state = solver.step(state, dt)?;
                if step % cleanup_every == 0 {
                    *state = solver.divergence_cleanup(state)?.0;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn energy(&self) -> f64 {
        match self {
            Machine::Prandtl(solver, s) => solver.energy(s),
            Machine::Hns(solver, s) => solver.energy(s),
        }
    }

    /// `(u, v, u_t, v_t)`; Prandtl velocities recover `v` from `u`.
    pub(crate) fn velocities(&self) -> (Field, Field, Field, Field) {
        match self {
            Machine::Prandtl(solver, s) => {
                let g = solver.grid();
                (s.u.clone(), recover_v(g, &s.u), s.ut.clone(), recover_v(g, &s.ut))
            }
            Machine::Hns(_, s) => (s.u.clone(), s.v.clone(), s.ut.clone(), s.vt.clone()),
        }
    }

    fn u_ut(&self) -> (&Field, &Field) {
        match self {
            Machine::Prandtl(_, s) => (&s.u, &s.ut),
            Machine::Hns(_, s) => (&s.u, &s.ut),
        }
    }

    fn max_vertical_mean(&self, grid: &Grid) -> f64 {
        let (u, ut) = self.u_ut();
        grid.max_vertical_mean(u).max(grid.max_vertical_mean(ut))
    }

    fn wall_max(&self) -> f64 {
        match self {
            Machine::Prandtl(solver, s) => solver.invariants(s).wall_max,
            Machine::Hns(solver, s) => solver.wall_max(s),
        }
    }

    fn snapshot(&self, lx: f64) -> Snapshot {
        match self {
            Machine::Prandtl(_, s) => Snapshot {
                t: s.t,
                lx,
                eps: 0.0,
                fields: vec![("u".into(), s.u.clone()), ("ut".into(), s.ut.clone())],
            },
            Machine::Hns(_, s) => Snapshot {
                t: s.t,
                lx,
                eps: s.eps,
                fields: vec![
                    ("u".into(), s.u.clone()),
                    ("v".into(), s.v.clone()),
                    ("ut".into(), s.ut.clone()),
                    ("vt".into(), s.vt.clone()),
                ],
            },
        }
    }
}

/// Worst invariant values seen over all checks and samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RunInvariants {
    pub max_vertical_mean: f64,
    pub wall_max: f64,
    pub max_state_divergence: f64,
    pub max_acceleration_divergence: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub version: String,
    pub config: RunConfig,
    pub dt: f64,
    pub steps_planned: usize,
    pub steps_completed: usize,
    pub t_reached: f64,
    pub wall_time_seconds: f64,
    pub success: bool,
    pub abort_reason: Option<String>,
    pub invariants: RunInvariants,
    /// Exponential fit of the `l2_state` column, `sqrt(||u||^2 + ||u_t||^2)`.
    pub decay_fit: Option<DecayFit>,
    /// `max_t e^{Kt} ||u_F(t)||_{B^s} / ||u_F(0)||_{B^s}`.
    pub weighted_besov_growth: Option<f64>,
}

/// Everything a run produced, also kept on disk.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: RunMetadata,
}

impl RunOutcome {
    /// Values of one CSV column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

struct Recorder {
    bank: DyadicBank,
    es: EsTracker,
    e1: Option<E1Tracker>,
}

impl Recorder {
    fn header(kind: ExperimentKind) -> Vec<String> {
        let mut h: Vec<String> = ["t", "l2_u", "l2_state", "max_vertical_mean", "wall_max"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if kind == ExperimentKind::Hns {
            h.push("state_divergence".into());
            h.push("acceleration_divergence".into());
        }
        h.extend(EsSample::csv_header());
        if kind == ExperimentKind::Hns {
            h.extend(E1Sample::csv_header("E1"));
        }
        h
    }

    fn sample(&mut self, m: &Machine, inv: &mut RunInvariants) -> Result<(Vec<f64>, EsSample)> {
        let grid = self.bank.grid().clone();
        let t = m.t();
        let (u, ut) = m.u_ut();
        let mean = m.max_vertical_mean(&grid);
        let wall = m.wall_max();
        inv.max_vertical_mean = inv.max_vertical_mean.max(mean);
        inv.wall_max = inv.wall_max.max(wall);
        let state = (grid.l2_norm(u).powi(2) + grid.l2_norm(ut).powi(2)).sqrt();
        let mut row = vec![t, grid.l2_norm(u), state, mean, wall];
        if let Machine::Hns(solver, s) = m {
            let d = solver.state_divergence(s);
            let a = solver.acceleration_divergence(s)?;
            inv.max_state_divergence = inv.max_state_divergence.max(d);
            inv.max_acceleration_divergence = inv.max_acceleration_divergence.max(a);
            row.push(d);
            row.push(a);
        }
        let es = self.es.update(t, u, ut)?;
        row.extend(es.csv_cells());
        if let (Some(e1), Machine::Hns(_, s)) = (self.e1.as_mut(), m) {
            row.extend(e1.update(t, &s.u, &s.v, &s.ut, &s.vt)?.csv_cells());
        }
        Ok((row, es))
    }
}

fn write_row(w: &mut impl Write, row: &[f64]) -> Result<()> {
    let line: Vec<String> = row.iter().map(|x| cell(*x)).collect();
    writeln!(w, "{}", line.join(","))?;
    Ok(())
}

/// Executes a `prandtl` or `hns` config and writes `series.csv`,
/// `metadata.json` and snapshots into the output directory.
///
/// A solver failure does not return an error: outputs written so far are
/// kept and the metadata records the reason.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    run_into(cfg, &cfg.output_dir())
}

/// [`cmd_run`] with an explicit output directory.
pub fn run_into(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let kind = cfg.experiment.kind;
    if kind == ExperimentKind::Sweep {
        return Err(Error::Config("use the sweep command for sweep configs".into()));
    }
    std::fs::create_dir_all(dir)?;
    let started = Instant::now();
    let grid = cfg.grid()?;
    let bank = DyadicBank::new(&grid);
    let (u0, u1) = initial_data(cfg, &grid)?;
    let mut machine = match kind {
        ExperimentKind::Hns => Machine::hns(cfg, &grid, &u0, &u1, cfg.experiment.eps)?,
        _ => Machine::prandtl(cfg, &grid, &u0, &u1),
    };
    let mut rec = Recorder {
        es: EsTracker::new(&bank, &cfg.gevrey, cfg.experiment.s),
        e1: (kind == ExperimentKind::Hns)
            .then(|| E1Tracker::new(&bank, &cfg.gevrey, cfg.experiment.eps, cfg.gevrey.kappa())),
        bank,
    };

    let header = Recorder::header(kind);
    let mut csv = BufWriter::new(File::create(dir.join("series.csv"))?);
    writeln!(csv, "{}", header.join(","))?;

    let dt = cfg.dt();
    let steps = cfg.steps();
    let mut inv = RunInvariants::default();
    let mut rows = Vec::new();
    let mut besov = Vec::new();
    let mut guard = GrowthGuard::new(cfg.solver.growth_limit);
    let mut completed = 0;

    let mut body = |machine: &mut Machine| -> Result<()> {
        let (row, es) = rec.sample(machine, &mut inv)?;
        write_row(&mut csv, &row)?;
        rows.push(row);
        besov.push(es.weighted_besov);
        guard.check(machine.energy(), 0.0)?;
        for step in 1..=steps {
            machine.advance(dt, step, cfg.solver.cleanup_every)?;
            completed = step;
            if step % cfg.solver.check_every == 0 || step == steps {
                guard.check(machine.energy(), machine.t())?;
                inv.max_vertical_mean = inv.max_vertical_mean.max(machine.max_vertical_mean(&grid));
                inv.wall_max = inv.wall_max.max(machine.wall_max());
            }
            if step % cfg.output.sample_every == 0 || step == steps {
                let (row, es) = rec.sample(machine, &mut inv)?;
                write_row(&mut csv, &row)?;
                rows.push(row);
                besov.push(es.weighted_besov);
            }
            let every = cfg.output.snapshot_every;
            if every > 0 && step % every == 0 {
                machine
                    .snapshot(grid.lx())
                    .save(&dir.join(format!("snapshot_{step:08}.bin")))?;
            }
        }
        Ok(())
    };
    let result = body(&mut machine);
    csv.flush()?;
    machine.snapshot(grid.lx()).save(&dir.join("final.bin"))?;

    let abort_reason = result.err().map(|e| {
        log::error!("run aborted after {completed} steps: {e}");
        e.to_string()
    });
    let norms: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[2])).collect();
    let decay = if norms.len() >= 2 {
        decay_fit(&norms, (0.0, f64::INFINITY)).ok()
    } else {
        None
    };
    let growth = match besov.first() {
        Some(&b0) if b0 > 0.0 => Some(besov.iter().fold(0.0_f64, |m, b| m.max(*b)) / b0),
        _ => None,
    };
    let metadata = RunMetadata {
        version: VERSION.into(),
        config: cfg.clone(),
        dt,
        steps_planned: steps,
        steps_completed: completed,
        t_reached: machine.t(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        success: abort_reason.is_none(),
        abort_reason,
        invariants: inv,
        decay_fit: decay,
        weighted_besov_growth: growth,
    };
    std::fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&metadata)?)?;
    Ok(RunOutcome {
        directory: dir.to_path_buf(),
        header,
        rows,
        metadata,
    })
}
