//! Self-test suite behind the `verify` command.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fields::{Field, Grid, C64};
use crate::gevrey::{apply_gevrey, make_gevrey_data, GevreyParams, Sign, VerticalProfile};
use crate::hns::{make_hns_data, HnsSolver, HnsState};
use crate::paley::{BernsteinReport, DyadicBank};
use crate::prandtl::{
    damped_oscillator, discrete_eigenvalue, enforce_compatibility, PrandtlOptions, PrandtlSolver,
    PrandtlState,
};

/// Deliberate defects used to show the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Perturbs one stored cut-off sample.
    CorruptPhi,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub lx: f64,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            lx: 2.0 * PI,
            nx: 64,
            ny: 33,
            seed: 20_240_901,
            fault: None,
        }
    }
}

impl VerifyOptions {
    /// Smallest supported vertical resolution.
    pub fn tiny() -> Self {
        Self {
            nx: 16,
            ny: 9,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub grid: (f64, usize, usize),
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

fn at_most(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed: value <= bound,
        value,
        bound,
        detail: detail.into(),
    }
}

fn errored(name: &str, e: crate::Error) -> Check {
    Check {
        name: name.into(),
        passed: false,
        value: f64::NAN,
        bound: f64::NAN,
        detail: e.to_string(),
    }
}

/// Random conjugate-symmetric field with every dealiased mode excited.
pub fn random_band_limited(grid: &Grid, rng: &mut impl Rng) -> Field {
    let mut f = grid.zeros();
    let top = ((grid.nx() - 1) / 3) as i64;
    for j in 0..grid.ny() {
        f.set_coeff(0, j, C64::new(rng.gen_range(-1.0..1.0), 0.0));
        for m in 1..=top {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            f.set_coeff(m, j, z);
            f.set_coeff(-m, j, z.conj());
        }
    }
    f
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Relative error of the linear Prandtl stepper against the damped
/// oscillator on `cos(x) sin(2 pi y)` at time `n dt`, `n = round(t_end / dt)`.
pub fn prandtl_linear_mode_error(grid: &Grid, dt: f64, t_end: f64) -> Result<f64> {
    let solver = PrandtlSolver::new(
        grid,
        PrandtlOptions {
            nonlinear: false,
            ..PrandtlOptions::default()
        },
    );
    let u0 = grid.from_fn(|x, y| x.cos() * (2.0 * PI * y).sin());
    let n = (t_end / dt).round() as usize;
    let mut s = PrandtlState::new(u0.clone(), grid.zeros());
    for _ in 0..n {
        s = solver.step(&s, dt)?;
    }
    let want = u0.scaled(damped_oscillator(discrete_eigenvalue(grid.spacing(), 2), n as f64 * dt));
    Ok(rel((&s.u - &want).max_abs(), u0.max_abs()))
}

/// Same oracle for the Navier-Stokes stepper on the `x`-independent mode
/// `sin(2 pi y)`, where `v = 0` and the pressure is uniform.
pub fn hns_linear_mode_error(grid: &Grid, eps: f64, dt: f64, t_end: f64) -> Result<f64> {
    let solver = HnsSolver::new(grid, eps, false)?;
    let u0 = grid.from_fn(|_, y| (2.0 * PI * y).sin());
    let n = (t_end / dt).round() as usize;
    let mut s = make_hns_data(grid, &u0, &grid.zeros(), eps)?;
    for _ in 0..n {
        s = solver.step(&s, dt)?;
    }
    let want = u0.scaled(damped_oscillator(discrete_eigenvalue(grid.spacing(), 2), n as f64 * dt));
    Ok(rel((&s.u - &want).max_abs().max(s.v.max_abs()), u0.max_abs()))
}

fn theta_by_quadrature(p: &GevreyParams, t: f64, steps: usize) -> Result<f64> {
    // RK4 on theta' = thetadot(t), theta(0) = 0
    let h = t / steps as f64;
    let mut theta = 0.0;
    for i in 0..steps {
        let t0 = i as f64 * h;
        let k1 = p.theta_dot(t0)?;
        let k2 = p.theta_dot(t0 + 0.5 * h)?;
        let k4 = p.theta_dot(t0 + h)?;
        theta += h / 6.0 * (k1 + 4.0 * k2 + k4);
    }
    Ok(theta)
}

/// Runs every check on the configured grid.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let grid = Grid::new(opts.lx, opts.nx, opts.ny)?;
    let mut bank = DyadicBank::new(&grid);
    if opts.fault == Some(Fault::CorruptPhi) {
        let k = bank.k_min() + bank.len() as i32 / 2;
        bank.corrupt_phi(k, 1, 1e-3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let params = GevreyParams::default();
    let mut checks = Vec::new();

    checks.push(at_most(
        "partition-of-unity",
        bank.partition_residual(),
        1e-12,
        "max |sum_k phi_k(xi) - 1| over nonzero grid frequencies",
    ));
    checks.push(at_most(
        "low-frequency-identity",
        bank.low_frequency_residual(),
        1e-12,
        "max |chi + sum_j phi_j - 1|",
    ));
    checks.push(at_most(
        "cutoff-support",
        bank.support_violation(),
        0.0,
        "cut-off values outside their annulus or ball",
    ));

    let f = random_band_limited(&grid, &mut rng);
    checks.push(at_most(
        "block-overlap",
        bank.block_overlap(&f),
        1e-13,
        "max |Delta_j Delta_k f| / max |f| for |j - k| >= 2",
    ));

    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let a = random_band_limited(&grid, &mut rng);
        let b = random_band_limited(&grid, &mut rng);
        let want = grid.product(&a, &b);
        let got = bank.bony(&a, &b).reconstruct();
        worst = worst.max(rel(grid.l2_norm(&(&got - &want)), grid.l2_norm(&want)));
    }
    checks.push(at_most("bony-reconstruction", worst, 1e-10, "20 random pairs, relative L2"));

    let mut sum = grid.zeros();
    for k in bank.blocks() {
        sum += &bank.delta(&f, k);
    }
    checks.push(at_most(
        "block-reconstruction",
        rel((&sum - &f).max_abs(), f.max_abs()),
        1e-12,
        "sum_k Delta_k f = f",
    ));

    let s = 0.5;
    let direct: f64 = bank
        .blocks()
        .map(|k| 2.0_f64.powf(k as f64 * s) * grid.l2_norm(&bank.delta(&f, k)))
        .sum();
    checks.push(at_most(
        "besov-direct-sum",
        rel((bank.besov_norm(&f, s) - direct).abs(), direct),
        1e-12,
        "B^{1/2} against explicit block sum",
    ));

    checks.push(bernstein(&grid, &bank, &f));

    let round = grid.to_spectral(&grid.to_physical(&f))?;
    checks.push(at_most(
        "spectral-round-trip",
        rel((&round - &f).max_abs(), f.max_abs()),
        1e-13,
        "to_spectral(to_physical(f))",
    ));

    let mut theta_err = 0.0_f64;
    let mut radius_err = 0.0_f64;
    for &t in &[0.0, 0.5, 1.0, 3.0, 10.0, 20.0] {
        let q = theta_by_quadrature(&params, t, 2000)?;
        theta_err = theta_err.max((q - params.theta(t)?).abs());
        let k = params.kappa();
        let closed = 0.5 * params.a * (1.0 + (-0.5 * k * t).exp());
        radius_err = radius_err.max((params.radius(t)? - closed).abs());
    }
    checks.push(at_most("theta-ode", theta_err, 1e-10, "closed form against quadrature"));
    checks.push(at_most("radius-identity", radius_err, 1e-13, "a - lambda theta = a/2 (1 + e^{-Kt/2})"));

    let top = grid.nyquist_xi();
    let mut violation = 0.0_f64;
    for &t in &[0.0, 1.0, 10.0] {
        for i in 0..100 {
            for j in 0..100 {
                let xi = -top + 2.0 * top * i as f64 / 99.0;
                let eta = -top + 2.0 * top * j as f64 / 99.0;
                let lhs = params.phase(t, xi + eta)?;
                let rhs = params.phase(t, xi)? + params.phase(t, eta)?;
                violation = violation.max(lhs - rhs);
            }
        }
    }
    checks.push(at_most("phase-subadditivity", violation, 1e-12, "100 x 100 frequency pairs"));

    let mut inverse = 0.0_f64;
    for &t in &[0.0, 1.0, 5.0] {
        let w = apply_gevrey(&grid, &f, t, &params, Sign::Plus)?;
        let back = apply_gevrey(&grid, &w.field, t, &params, Sign::Minus)?.field;
        inverse = inverse.max(rel((&back - &f).max_abs(), f.max_abs()));
    }
    checks.push(at_most("gevrey-inverse", inverse, 1e-10, "e^{-Phi} e^{Phi} f = f"));

    match prandtl_linear_mode_error(&grid, 1e-3, 1.0) {
        Ok(e) => checks.push(at_most("prandtl-linear-mode", e, 1e-6, "dt = 1e-3, t = 1")),
        Err(e) => checks.push(errored("prandtl-linear-mode", e)),
    }
    match hns_linear_mode_error(&grid, 0.5, 1e-3, 1.0) {
        Ok(e) => checks.push(at_most("hns-linear-mode", e, 1e-6, "eps = 0.5, dt = 1e-3, t = 1")),
        Err(e) => checks.push(errored("hns-linear-mode", e)),
    }

    match nonlinear_checks(&grid, &params) {
        Ok(mut c) => checks.append(&mut c),
        Err(e) => checks.push(errored("nonlinear-invariants", e)),
    }

    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        grid: (opts.lx, opts.nx, opts.ny),
        checks,
    })
}

fn bernstein(grid: &Grid, bank: &DyadicBank, f: &Field) -> Check {
    let mut worst_low = f64::INFINITY;
    let mut worst_high = 0.0_f64;
    let mut sup_excess = f64::NEG_INFINITY;
    for k in bank.blocks() {
        let part = bank.delta(f, k);
        if let BernsteinReport::Measured {
            derivative_ratio,
            sup_horizontal_ratio,
        } = bank.bernstein_check(&part, k)
        {
            // Cauchy-Schwarz over the modes of the block
            let modes = (0..grid.nx()).filter(|&i| bank.delta_symbol(k, i) != 0.0).count();
            let bound = (modes as f64 / (grid.lx() * 2.0_f64.powi(k))).sqrt();
            worst_low = worst_low.min(derivative_ratio);
            worst_high = worst_high.max(derivative_ratio);
            sup_excess = sup_excess.max(sup_horizontal_ratio - bound);
        }
    }
    let passed = worst_low >= 0.75 - 1e-12 && worst_high <= 8.0 / 3.0 + 1e-12 && sup_excess <= 1e-12;
    Check {
        name: "bernstein".into(),
        passed,
        value: worst_high,
        bound: 8.0 / 3.0,
        detail: format!(
            "||d_x f|| / (2^k ||f||) in [{worst_low:.4}, {worst_high:.4}]; sup-in-x excess {sup_excess:.3e}"
        ),
    }
}

fn nonlinear_checks(grid: &Grid, params: &GevreyParams) -> Result<Vec<Check>> {
    let m_max = 16.min((grid.nx() - 1) / 3);
    let (u0, u1) = make_gevrey_data(grid, params, 0.05, m_max, &VerticalProfile::Sin2Pi, 0.0)?;
    let (u0, u1) = enforce_compatibility(grid, &u0, &u1);
    let solver = PrandtlSolver::new(grid, PrandtlOptions::default());
    let dt = solver.default_dt();
    let mut s = PrandtlState::new(u0.clone(), u1.clone());
    let mut mean = 0.0_f64;
    let mut wall = 0.0_f64;
    for _ in 0..200 {
        s = solver.step(&s, dt)?;
        let inv = solver.invariants(&s);
        mean = mean.max(inv.max_vertical_mean).max(inv.max_vertical_mean_t);
        wall = wall.max(inv.wall_max);
    }
    let hns = HnsSolver::new(grid, 0.1, true)?;
    let mut h: HnsState = make_hns_data(grid, &u0, &u1, 0.1)?;
    let mut acc = hns.acceleration_divergence(&h)?;
    for _ in 0..20 {
        h = hns.step(&h, hns.default_dt())?;
        acc = acc.max(hns.acceleration_divergence(&h)?);
    }
    Ok(vec![
        at_most("mean-conservation", mean, 1e-10, "200 nonlinear Prandtl steps"),
        at_most("wall-rows", wall, 0.0, "boundary rows stay exactly zero"),
        at_most("acceleration-divergence", acc, 1e-8, "eps = 0.1, 20 nonlinear steps"),
    ])
}
