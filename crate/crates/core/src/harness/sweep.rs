//! Hydrostatic-limit sweep: Navier-Stokes runs at decreasing `eps` against one
//! Prandtl reference started from the same data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::diagnostics::{least_squares, E1Sample, E1Tracker};
use crate::error::{Error, Result};
use crate::fields::{Field, Grid};
use crate::paley::DyadicBank;

use super::config::{ExperimentKind, RunConfig};
use super::run::{cell, initial_data, Machine, VERSION};

/// Velocities and time derivatives at one sample time.
#[derive(Clone, Debug)]
struct Frame {
    t: f64,
    u: Field,
    v: Field,
    ut: Field,
    vt: Field,
}

impl Frame {
    fn of(m: &Machine) -> Self {
        let (u, v, ut, vt) = m.velocities();
        Self { t: m.t(), u, v, ut, vt }
    }

    fn lerp(a: &Frame, b: &Frame, t: f64) -> Frame {
        let w = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
        let mix = |x: &Field, y: &Field| {
            let mut out = x.scaled(1.0 - w);
            out.axpy(w, y);
            out
        };
        Frame {
            t,
            u: mix(&a.u, &b.u),
            v: mix(&a.v, &b.v),
            ut: mix(&a.ut, &b.ut),
            vt: mix(&a.vt, &b.vt),
        }
    }
}

/// Reference trajectory sampled at increasing times.
struct Trajectory(Vec<Frame>);

impl Trajectory {
    /// Linear interpolation; exact at stored times.
    fn at(&self, t: f64) -> Frame {
        let f = &self.0;
        let i = f.partition_point(|x| x.t < t);
        if i == 0 {
            return f[0].clone();
        }
        if i >= f.len() {
            return f[f.len() - 1].clone();
        }
        if f[i].t == t {
            return f[i].clone();
        }
        Frame::lerp(&f[i - 1], &f[i], t)
    }
}

fn integrate(cfg: &RunConfig, mut m: Machine) -> Result<Vec<Frame>> {
    let dt = cfg.dt();
    let steps = cfg.steps();
    let mut frames = vec![Frame::of(&m)];
    for step in 1..=steps {
        m.advance(dt, step, cfg.solver.cleanup_every)?;
        if step % cfg.output.sample_every == 0 || step == steps {
            let e = m.energy();
            if !e.is_finite() {
                return Err(Error::NonFinite { what: "energy", mode: 0, node: 0 });
            }
            frames.push(Frame::of(&m));
        }
    }
    Ok(frames)
}

/// Error history of one member.
#[derive(Clone, Debug, Serialize)]
pub struct MemberResult {
    pub eps: f64,
    /// `sup_t ||u^eps - u||_{L2}` over the sample times.
    pub sup_l2_error: f64,
    pub final_l2_error: f64,
    /// Four-term error functional of `(u^eps - u, v^eps - v)` with rate 0, at the final time.
    pub e1_error: E1Sample,
    pub wall_time_seconds: f64,
    #[serde(skip)]
    pub series: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub version: String,
    pub config: RunConfig,
    pub self_check: bool,
    pub members: Vec<MemberResult>,
    /// Least-squares slope of `ln sup error` against `ln eps`; absent in self-check mode.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// `sup` errors nonincreasing as `eps` decreases.
    pub monotone: bool,
    #[serde(skip)]
    pub directory: PathBuf,
}

fn member(
    cfg: &RunConfig,
    grid: &Grid,
    bank: &DyadicBank,
    reference: &Trajectory,
    data: &(Field, Field),
    eps: f64,
) -> Result<MemberResult> {
    let started = Instant::now();
    let m = if cfg.experiment.self_check {
        Machine::prandtl(cfg, grid, &data.0, &data.1)
    } else {
        Machine::hns(cfg, grid, &data.0, &data.1, eps)?
    };
    let frames = integrate(cfg, m)?;
    let mut e1 = E1Tracker::new(bank, &cfg.gevrey, eps, 0.0);
    let mut series = Vec::with_capacity(frames.len());
    let mut last = None;
    for f in &frames {
        let r = reference.at(f.t);
        let w1 = &f.u - &r.u;
        let w2 = &f.v - &r.v;
        let w1t = &f.ut - &r.ut;
        let w2t = &f.vt - &r.vt;
        series.push((f.t, grid.l2_norm(&w1)));
        last = Some(e1.update(f.t, &w1, &w2, &w1t, &w2t)?);
    }
    let sup = series.iter().fold(0.0_f64, |m, x| m.max(x.1));
    Ok(MemberResult {
        eps,
        sup_l2_error: sup,
        final_l2_error: series.last().map_or(0.0, |x| x.1),
        e1_error: last.expect("at least the initial frame"),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        series,
    })
}

/// Runs the sweep, members in parallel, and writes `sweep.csv`,
/// `sweep.json` and one `member_<i>.csv` error history per `eps`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    sweep_into(cfg, &cfg.output_dir())
}

pub fn sweep_into(cfg: &RunConfig, dir: &Path) -> Result<SweepResult> {
    if cfg.experiment.kind != ExperimentKind::Sweep {
        return Err(Error::Config("experiment.kind must be \"sweep\"".into()));
    }
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let grid = cfg.grid()?;
    let bank = DyadicBank::new(&grid);
    let data = initial_data(cfg, &grid)?;
    log::info!("sweep: reference Prandtl run");
    let reference = Trajectory(integrate(cfg, Machine::prandtl(cfg, &grid, &data.0, &data.1))?);

    let results: Vec<Result<MemberResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .experiment
            .eps_list
            .iter()
            .map(|&eps| {
                let (grid, bank, reference, data) = (&grid, &bank, &reference, &data);
                scope.spawn(move || {
                    log::info!("sweep: member eps = {eps}");
                    member(cfg, grid, bank, reference, data, eps)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep member panicked"))
            .collect()
    });
    let mut members = Vec::with_capacity(results.len());
    for (r, &eps) in results.into_iter().zip(&cfg.experiment.eps_list) {
        members.push(r.map_err(|e| Error::SweepMember { eps, source: Box::new(e) })?);
    }

    let monotone = members.windows(2).all(|w| w[1].sup_l2_error <= w[0].sup_l2_error);
    let (slope, intercept, r2) = if cfg.experiment.self_check {
        (None, None, None)
    } else {
        let pts: Vec<(f64, f64)> = members
            .iter()
            .map(|m| (m.eps.ln(), m.sup_l2_error.ln()))
            .collect();
        let (s, i, r) = least_squares(&pts);
        if s.is_finite() {
            (Some(s), Some(i), Some(r))
        } else {
            (None, None, None)
        }
    };

    let mut csv = BufWriter::new(File::create(dir.join("sweep.csv"))?);
    let mut head = vec!["eps".to_string(), "sup_l2_error".into(), "final_l2_error".into()];
    head.extend(E1Sample::csv_header("E1_error"));
    writeln!(csv, "{}", head.join(","))?;
    for m in &members {
        let mut row = vec![m.eps, m.sup_l2_error, m.final_l2_error];
        row.extend(m.e1_error.csv_cells());
        let cells: Vec<String> = row.iter().map(|x| cell(*x)).collect();
        writeln!(csv, "{}", cells.join(","))?;
    }
    csv.flush()?;
    for (i, m) in members.iter().enumerate() {
        let mut w = BufWriter::new(File::create(dir.join(format!("member_{i}.csv")))?);
        writeln!(w, "t,l2_error")?;
        for (t, e) in &m.series {
            writeln!(w, "{},{}", cell(*t), cell(*e))?;
        }
        w.flush()?;
    }
    let result = SweepResult {
        version: VERSION.into(),
        config: cfg.clone(),
        self_check: cfg.experiment.self_check,
        members,
        slope,
        intercept,
        r2,
        monotone,
        directory: dir.to_path_buf(),
    };
    std::fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&result)?)?;
    Ok(result)
}
