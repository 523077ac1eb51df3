//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Oracles are computed here from closed forms, independently of the crate's
//! own helpers wherever a closed form exists.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hyperprandtl::gevrey::{apply_gevrey, GevreyParams, Sign};
use hyperprandtl::harness::verify::random_band_limited;
use hyperprandtl::harness::{cmd_run, run_into, sweep_into, ExperimentKind, RunConfig};
use hyperprandtl::hns::{make_hns_data, HnsSolver};
use hyperprandtl::paley::{chi, phi, DyadicBank};
use hyperprandtl::prandtl::{PrandtlOptions, PrandtlSolver, PrandtlState};
use hyperprandtl::{Field, Grid};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Eigenvalue of the centred second difference on `sin(n pi y)`.
fn mu_h(dy: f64, n: f64) -> f64 {
    (2.0 / dy * (n * PI * dy / 2.0).sin()).powi(2)
}

/// `A'' + A' + mu A = 0`, `A(0) = 1`, `A'(0) = 0`.
fn oscillator(mu: f64, t: f64) -> f64 {
    let w = (mu - 0.25).sqrt();
    (-t / 2.0).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w))
}

fn c1_dyadic() -> Outcome {
    let mut worst_part = 0.0_f64;
    let mut worst_low = 0.0_f64;
    let mut worst_overlap = 0.0_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for nx in [64, 128] {
        let g = Grid::new(2.0 * PI, nx, 17).unwrap();
        let bank = DyadicBank::new(&g);
        for idx in 1..nx {
            let xi = g.xi(idx).abs();
            // every nonzero frequency: sum over a generous range of scales
            let s: f64 = (-10..=12).map(|k| phi(xi / 2f64.powi(k))).sum();
            worst_part = worst_part.max((s - 1.0).abs());
            for k in bank.blocks() {
                let tau = xi / 2f64.powi(k);
                let low = chi(tau) + (0..40).map(|j| phi(tau / 2f64.powi(j))).sum::<f64>();
                worst_low = worst_low.max((low - 1.0).abs());
            }
        }
        worst_part = worst_part.max(bank.partition_residual());
        let f = random_band_limited(&g, &mut rng);
        let scale = f.max_abs();
        for k in bank.blocks() {
            let dk = bank.delta(&f, k);
            for j in bank.blocks().filter(|j| (j - k).abs() >= 2) {
                worst_overlap = worst_overlap.max(bank.delta(&dk, j).max_abs() / scale);
            }
        }
    }
    outcome(
        worst_part <= 1e-12 && worst_low <= 1e-12 && worst_overlap <= 1e-13,
        format!("partition {worst_part:.2e}, low-frequency {worst_low:.2e}, overlap {worst_overlap:.2e}"),
    )
}

fn c2_bony() -> Outcome {
    let g = Grid::new(2.0 * PI, 128, 33).unwrap();
    let bank = DyadicBank::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let f = random_band_limited(&g, &mut rng);
        let h = random_band_limited(&g, &mut rng);
        // oracle: pointwise product in physical space
        let pf = g.to_physical(&f);
        let ph = g.to_physical(&h);
        let prod: Vec<f64> = pf.iter().zip(&ph).map(|(a, b)| a * b).collect();
        let mut want = g.to_spectral(&prod).unwrap();
        g.dealias(&mut want);
        let got = bank.bony(&f, &h).reconstruct();
        worst = worst.max(g.l2_norm(&(&got - &want)) / g.l2_norm(&want));
    }
    outcome(worst <= 1e-10, format!("max relative L2 error {worst:.2e} over 20 pairs"))
}

fn c3_gevrey() -> Outcome {
    let p = GevreyParams::default();
    let k = p.kappa();
    let sqrt_delta = p.a * k / (4.0 * p.lambda);
    // RK4 on theta' = sqrt(delta) e^{-K t / 2}
    let rate = |t: f64| sqrt_delta * (-0.5 * k * t).exp();
    let (mut t, mut th, h) = (0.0_f64, 0.0_f64, 1e-3);
    let mut ode = 0.0_f64;
    let mut radius = 0.0_f64;
    for step in 1..=20_000 {
        th += h / 6.0 * (rate(t) + 4.0 * rate(t + h / 2.0) + rate(t + h));
        t = step as f64 * h;
        if step % 500 == 0 {
            ode = ode.max((th - p.theta(t).unwrap()).abs());
            let closed = p.a - p.lambda * p.theta(t).unwrap() - 0.5 * p.a * (1.0 + (-0.5 * k * t).exp());
            radius = radius.max(closed.abs());
        }
    }
    let mut sub = 0.0_f64;
    for &t in &[0.0, 2.0, 20.0] {
        for i in 0..100 {
            for j in 0..100 {
                let xi = -64.0 + 128.0 * i as f64 / 99.0;
                let eta = -64.0 + 128.0 * j as f64 / 99.0;
                let lhs = p.phase(t, xi).unwrap();
                let rhs = p.phase(t, xi - eta).unwrap() + p.phase(t, eta).unwrap();
                sub = sub.max(lhs - rhs);
            }
        }
    }
    let g = Grid::new(2.0 * PI, 128, 33).unwrap();
    let f = random_band_limited(&g, &mut ChaCha8Rng::seed_from_u64(3));
    let mut inverse = 0.0_f64;
    for &t in &[0.0, 1.0, 10.0] {
        let w = apply_gevrey(&g, &f, t, &p, Sign::Plus).unwrap().field;
        let back = apply_gevrey(&g, &w, t, &p, Sign::Minus).unwrap().field;
        inverse = inverse.max((&back - &f).max_abs() / f.max_abs());
    }
    outcome(
        ode <= 1e-10 && radius <= 1e-13 && sub <= 1e-12 && inverse <= 1e-10,
        format!("theta vs ODE {ode:.2e}, radius {radius:.2e}, subadditivity excess {sub:.2e}, inverse {inverse:.2e}"),
    )
}

fn prandtl_mode_error(g: &Grid, dt: f64) -> f64 {
    let solver = PrandtlSolver::new(g, PrandtlOptions { nonlinear: false, ..Default::default() });
    let u0 = g.from_fn(|x, y| x.cos() * (2.0 * PI * y).sin());
    let n = (1.0 / dt).round() as usize;
    let mut s = PrandtlState::new(u0.clone(), g.zeros());
    for _ in 0..n {
        s = solver.step(&s, dt).unwrap();
    }
    let want = u0.scaled(oscillator(mu_h(g.spacing(), 2.0), n as f64 * dt));
    (&s.u - &want).max_abs() / u0.max_abs()
}

fn hns_mode_error(g: &Grid, dt: f64) -> f64 {
    let eps = 0.5;
    let solver = HnsSolver::new(g, eps, false).unwrap();
    let u0 = g.from_fn(|_, y| (2.0 * PI * y).sin());
    let n = (1.0 / dt).round() as usize;
    let mut s = make_hns_data(g, &u0, &g.zeros(), eps).unwrap();
    for _ in 0..n {
        s = solver.step(&s, dt).unwrap();
    }
    // x-independent mode: xi = 0, so mu = mu_h + eps^2 * 0
    let want = u0.scaled(oscillator(mu_h(g.spacing(), 2.0), n as f64 * dt));
    (&s.u - &want).max_abs().max(s.v.max_abs()) / u0.max_abs()
}

fn c4_linear_modes() -> Outcome {
    let g = Grid::new(2.0 * PI, 32, 33).unwrap();
    let ep = prandtl_mode_error(&g, 1e-3);
    let eh = hns_mode_error(&g, 1e-3);
    let rp = prandtl_mode_error(&g, 1.0 / 40.0) / prandtl_mode_error(&g, 1.0 / 80.0);
    let rh = hns_mode_error(&g, 1.0 / 40.0) / hns_mode_error(&g, 1.0 / 80.0);
    let ok = ep <= 1e-6 && eh <= 1e-6 && (10.0..=22.0).contains(&rp) && (10.0..=22.0).contains(&rh);
    outcome(
        ok,
        format!("rel error prandtl {ep:.2e}, hns {eh:.2e}; halving ratio prandtl {rp:.2}, hns {rh:.2}"),
    )
}

fn base_config(kind: ExperimentKind, t_final: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.grid.nx = 128;
    cfg.grid.ny = 65;
    cfg.solver.t_final = t_final;
    cfg.experiment.kind = kind;
    cfg
}

fn c5_conservation(tmp: &std::path::Path) -> Outcome {
    let mut cfg = base_config(ExperimentKind::Prandtl, 10.0);
    cfg.solver.check_every = 1;
    cfg.output.sample_every = 1;
    let out = run_into(&cfg, &tmp.join("c5")).unwrap();
    let m = &out.metadata;
    let rows = out.column("max_vertical_mean").unwrap();
    let walls = out.column("wall_max").unwrap();
    let mean = rows.iter().fold(m.invariants.max_vertical_mean, |a, b| a.max(*b));
    let wall = walls.iter().fold(m.invariants.wall_max, |a, b| a.max(*b));
    outcome(
        m.success && mean <= 1e-10 && wall == 0.0,
        format!("max vertical mean {mean:.2e} over {} steps, wall max {wall:e}", m.steps_completed),
    )
}

struct DecayRuns {
    prandtl: hyperprandtl::harness::RunOutcome,
    hns: hyperprandtl::harness::RunOutcome,
}

fn decay_runs(tmp: &std::path::Path) -> DecayRuns {
    let cfg = base_config(ExperimentKind::Prandtl, 20.0);
    let prandtl = run_into(&cfg, &tmp.join("c7_prandtl")).unwrap();
    let mut cfg = base_config(ExperimentKind::Hns, 20.0);
    cfg.experiment.eps = 0.1;
    let hns = run_into(&cfg, &tmp.join("c7_hns")).unwrap();
    DecayRuns { prandtl, hns }
}

fn c6_constraint(runs: &DecayRuns) -> Outcome {
    let h = &runs.hns;
    let state = h.column("state_divergence").unwrap().into_iter().fold(0.0, f64::max);
    let acc = h.column("acceleration_divergence").unwrap().into_iter().fold(0.0, f64::max);
    // every RK stage of a few steps from the final state
    let g = Grid::new(2.0 * PI, 128, 65).unwrap();
    let solver = HnsSolver::new(&g, 0.1, true).unwrap();
    let cfg = base_config(ExperimentKind::Hns, 20.0);
    let (u0, u1) = hyperprandtl::harness::run::initial_data(&cfg, &g).unwrap();
    let mut s = make_hns_data(&g, &u0, &u1, 0.1).unwrap();
    let dt = solver.default_dt();
    let mut stage = 0.0_f64;
    for _ in 0..5 {
        let y: Vec<&Field> = vec![&s.u, &s.v, &s.ut, &s.vt];
        let k1 = solver.rhs(y[0], y[1], y[2], y[3]).unwrap();
        stage = stage.max(solver.relative_divergence(&k1[2], &k1[3]));
        let mid = |f: &Field, k: &Field| {
            let mut o = f.clone();
            o.axpy(0.5 * dt, k);
            o
        };
        let (u, v, ut, vt) = (mid(&s.u, &k1[0]), mid(&s.v, &k1[1]), mid(&s.ut, &k1[2]), mid(&s.vt, &k1[3]));
        let k2 = solver.rhs(&u, &v, &ut, &vt).unwrap();
        stage = stage.max(solver.relative_divergence(&k2[2], &k2[3]));
        s = solver.step(&s, dt).unwrap();
    }
    outcome(
        h.metadata.success && state <= 1e-6 && acc <= 1e-8 && stage <= 1e-8,
        format!("state divergence {state:.2e}, acceleration divergence {acc:.2e} (sampled), {stage:.2e} (stages)"),
    )
}

fn c7_decay(runs: &DecayRuns) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, r) in [("prandtl", &runs.prandtl), ("hns", &runs.hns)] {
        let m = &r.metadata;
        let rate = m.decay_fit.map_or(f64::NAN, |f| f.rate);
        let besov = r.column("weighted_besov").unwrap();
        let growth = besov.iter().fold(0.0_f64, |a, b| a.max(*b)) / besov[0];
        ok &= m.success && rate <= -0.4 && growth <= 10.0;
        parts.push(format!("{name}: rate {rate:.4}, weighted Besov max/initial {growth:.3}"));
    }
    outcome(ok, parts.join("; "))
}

fn c8_sweep(tmp: &std::path::Path) -> Outcome {
    let mut cfg = base_config(ExperimentKind::Sweep, 10.0);
    cfg.experiment.eps_list = vec![0.1, 0.05, 0.025, 0.0125];
    let res = sweep_into(&cfg, &tmp.join("c8")).unwrap();
    let errs: Vec<f64> = res.members.iter().map(|m| m.sup_l2_error).collect();
    let strictly = errs.windows(2).all(|w| w[1] < w[0]);
    // independent log-log least squares
    let pts: Vec<(f64, f64)> = res.members.iter().map(|m| (m.eps.ln(), m.sup_l2_error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let agree = res.slope.is_some_and(|s| (s - slope).abs() <= 1e-12);
    outcome(
        strictly && slope >= 0.9 && agree,
        format!(
            "sup L2 errors {}; slope {slope:.3}",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c9_determinism(tmp: &std::path::Path) -> Outcome {
    let mut same = true;
    let mut sizes = Vec::new();
    for kind in [ExperimentKind::Prandtl, ExperimentKind::Hns] {
        let mut cfg = RunConfig::default();
        cfg.grid.nx = 32;
        cfg.grid.ny = 17;
        cfg.data.m_max = 8;
        cfg.solver.t_final = 1.0;
        cfg.experiment.kind = kind;
        let mut texts = Vec::new();
        for rep in 0..2 {
            cfg.output.directory = tmp.join(format!("c9_{kind:?}_{rep}"));
            let out = cmd_run(&cfg).unwrap();
            texts.push(std::fs::read(out.directory.join("series.csv")).unwrap());
        }
        same &= texts[0] == texts[1];
        sizes.push(texts[0].len());
    }
    outcome(same, format!("series.csv byte-identical across repeats ({sizes:?} bytes)"))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut failed = 0;
    let mut report = |id: &str, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        println!("{tag} {id} {title}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
    };
    report("C1", "dyadic identities", &mut c1_dyadic);
    report("C2", "Bony reconstruction", &mut c2_bony);
    report("C3", "Gevrey machinery", &mut c3_gevrey);
    report("C4", "linear-mode oracle", &mut c4_linear_modes);
    report("C5", "Prandtl conservation invariants", &mut || c5_conservation(dir));
    let start = Instant::now();
    let runs = decay_runs(dir);
    println!("shared decay runs (T = 20) [{:.1}s]", start.elapsed().as_secs_f64());
    report("C6", "Navier-Stokes constraint", &mut || c6_constraint(&runs));
    report("C7", "exponential decay", &mut || c7_decay(&runs));
    report("C8", "hydrostatic convergence", &mut || c8_sweep(dir));
    report("C9", "determinism", &mut || c9_determinism(dir));
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all criteria passed");
        ExitCode::SUCCESS
    }
}
