//! Hyperbolic Prandtl system
//!
//! ```text
//! u_tt + u_t + u u_x + v u_y - u_yy + p_x = 0,   p_y = 0,
//! u_x + v_y = 0,   u = v = 0 at y = 0, 1,
//! ```
//!
//! integrated with RK4 on `(u, u_t)`. `v` is slaved to `u` and the pressure
//! gradient comes from the vertical mean of the momentum equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, C64};
use crate::integrator::rk4;

#[derive(Clone, Debug, PartialEq)]
pub struct PrandtlState {
    pub u: Field,
    pub ut: Field,
    pub t: f64,
}

impl PrandtlState {
    pub fn new(u: Field, ut: Field) -> Self {
        Self { u, ut, t: 0.0 }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::new(grid.zeros(), grid.zeros())
    }
}

/// `v = -int_0^y d_x u dy'`.
pub fn recover_v(grid: &Grid, u: &Field) -> Field {
    grid.integrate_y(&grid.dx(u)).scaled(-1.0)
}

/// Largest `|v(x, 1)|` over the physical `x` nodes.
pub fn wall_residual(grid: &Grid, v: &Field) -> f64 {
    let phys = grid.to_physical(v);
    let nx = grid.nx();
    phys[(grid.ny() - 1) * nx..]
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest modulus on the two wall rows.
pub fn wall_max(f: &Field) -> f64 {
    let last = f.rows() - 1;
    f.row(0)
        .iter()
        .chain(f.row(last))
        .fold(0.0, |m, z| m.max(z.norm()))
}

fn default_factor() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrandtlOptions {
    /// Coefficient of the quadratic pressure term; 1 conserves the vertical mean.
    #[serde(default = "default_factor")]
    pub pressure_factor: f64,
    /// `false` drops the advection terms (linear damped wave).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

impl Default for PrandtlOptions {
    fn default() -> Self {
        Self {
            pressure_factor: 1.0,
            nonlinear: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrandtlSolver {
    grid: Grid,
    opts: PrandtlOptions,
}

impl PrandtlSolver {
    pub fn new(grid: &Grid, opts: PrandtlOptions) -> Self {
        Self {
            grid: grid.clone(),
            opts,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn options(&self) -> &PrandtlOptions {
        &self.opts
    }

    /// Largest stable step, `dy`.
    pub fn max_dt(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn default_dt(&self) -> f64 {
        0.25 * self.grid.spacing()
    }

    /// Dealiased `u u_x + v u_y` (zero in linear mode).
    pub fn advection(&self, u: &Field) -> Field {
        if !self.opts.nonlinear {
            return self.grid.zeros();
        }
        let v = recover_v(&self.grid, u);
        self.grid.advection(u, &v, &[u]).pop().unwrap()
    }

    /// `p_x` as a `y`-independent field.
    ///
    /// The value is the discrete counterpart of
    /// `u_y(1) - u_y(0) - factor * int_0^1 (u u_x + v u_y) dy`: it makes the
    /// trapezoid mean of the pinned acceleration obey `f'' = -f'`, so
    /// compatible data keep a zero vertical mean to roundoff.
    pub fn pressure_gradient(&self, u: &Field) -> Field {
        let n = self.advection(u);
        self.pressure_from(u, &n)
    }

    fn pressure_from(&self, u: &Field, n: &Field) -> Field {
        let g = &self.grid;
        let ny = g.ny();
        let dy = g.spacing();
        let interior = 1.0 - dy;
        let mut out = g.zeros();
        for k in 0..g.nx() {
            // interior sum of dy * dyy(u) telescopes to the wall differences
            let wall = (u.at(k, ny - 1) - u.at(k, ny - 2) - u.at(k, 1) + u.at(k, 0)) / dy;
            let mut quad = C64::new(0.0, 0.0);
            for j in 1..ny - 1 {
                quad += n.at(k, j);
            }
            let p = (wall - self.opts.pressure_factor * dy * quad) / interior;
            for j in 0..ny {
                *out.at_mut(k, j) = p;
            }
        }
        out
    }

    /// `(u_t, u_tt)` with the wall rows of `u_tt` pinned to zero.
    pub fn rhs(&self, u: &Field, ut: &Field) -> Result<(Field, Field)> {
        let g = &self.grid;
        let n = self.advection(u);
        let p = self.pressure_from(u, &n);
        let mut acc = g.dyy(u);
        acc -= ut;
        acc -= &n;
        acc -= &p;
        acc.zero_rows(&[0, g.ny() - 1]);
        if let Some((mode, node)) = acc.first_non_finite() {
            return Err(Error::NonFinite {
                what: "prandtl acceleration",
                mode,
                node,
            });
        }
        Ok((ut.clone(), acc))
    }

    pub fn step(&self, state: &PrandtlState, dt: f64) -> Result<PrandtlState> {
        check_dt(dt, self.max_dt())?;
        let y = vec![state.u.clone(), state.ut.clone()];
        let mut out = rk4(&y, dt, |s: &Vec<Field>| {
            let (a, b) = self.rhs(&s[0], &s[1])?;
            Ok(vec![a, b])
        })?;
        let last = self.grid.ny() - 1;
        for f in out.iter_mut() {
            f.zero_rows(&[0, last]);
        }
        let ut = out.pop().unwrap();
        let u = out.pop().unwrap();
        Ok(PrandtlState {
            u,
            ut,
            t: state.t + dt,
        })
    }

    /// Mechanical energy `||u||^2 + ||d_y u||^2 + ||u_t||^2`.
    pub fn energy(&self, state: &PrandtlState) -> f64 {
        let g = &self.grid;
        g.l2_norm(&state.u).powi(2) + g.l2_norm(&g.dy(&state.u)).powi(2) + g.l2_norm(&state.ut).powi(2)
    }

    pub fn invariants(&self, state: &PrandtlState) -> PrandtlInvariants {
        PrandtlInvariants {
            max_vertical_mean: self.grid.max_vertical_mean(&state.u),
            max_vertical_mean_t: self.grid.max_vertical_mean(&state.ut),
            wall_max: wall_max(&state.u).max(wall_max(&state.ut)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrandtlInvariants {
    pub max_vertical_mean: f64,
    pub max_vertical_mean_t: f64,
    pub wall_max: f64,
}

pub(crate) fn check_dt(dt: f64, max: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be > 0, got {dt}")));
    }
    if dt > max {
        return Err(Error::Cfl { dt, max });
    }
    Ok(())
}

/// Removes the vertical mean of every mode by subtracting a multiple of
/// `sin(pi y)` normalised to unit trapezoid mean.
pub fn enforce_compatibility(grid: &Grid, u0: &Field, u1: &Field) -> (Field, Field) {
    let ny = grid.ny();
    let mut shape: Vec<f64> = (0..ny)
        .map(|j| (std::f64::consts::PI * grid.y(j)).sin())
        .collect();
    shape[0] = 0.0;
    shape[ny - 1] = 0.0;
    let mass: f64 = shape.iter().zip(grid.trapezoid_weights()).map(|(a, w)| a * w).sum();
    shape.iter_mut().for_each(|s| *s /= mass);
    let fix = |f: &Field| {
        let mean = grid.mean_y(f);
        let mut out = f.clone();
        for (j, s) in shape.iter().enumerate() {
            for (z, m) in out.row_mut(j).iter_mut().zip(&mean) {
                *z -= m * *s;
            }
        }
        out
    };
    (fix(u0), fix(u1))
}

/// `4 sin^2(n pi dy / 2) / dy^2`: eigenvalue of the centred second difference
/// for `sin(n pi y)` on the nodes.
pub fn discrete_eigenvalue(dy: f64, n: u32) -> f64 {
    let s = (n as f64 * std::f64::consts::PI * dy / 2.0).sin();
    4.0 * s * s / (dy * dy)
}

/// Solution of `A'' + A' + mu A = 0`, `A(0) = 1`, `A'(0) = 0`, for `mu > 1/4`.
pub fn damped_oscillator(mu: f64, t: f64) -> f64 {
    let w = (mu - 0.25).sqrt();
    (-0.5 * t).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w))
}
