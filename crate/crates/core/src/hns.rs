//! Scaled anisotropic hyperbolic Navier-Stokes system
//!
//! ```text
//! u_tt + u_t + u u_x + v u_y - eps^2 u_xx - u_yy + p_x = 0,
//! eps^2 (v_tt + v_t + u v_x + v v_y - eps^2 v_xx - v_yy) + p_y = 0,
//! u_x + v_y = 0,   (u, v) = 0 at y = 0, 1.
//! ```
//!
//! Velocities live on the nodes, the pressure on the `Ny - 1` half nodes
//! `y_{h+1/2}`. The discrete divergence of a node pair `(a, b)` is the box
//! operator
//!
//! ```text
//! D(a, b)_h = i xi (a_h + a_{h+1}) / 2 + (b_{h+1} - b_h) / dy
//! ```
//!
//! which vanishes identically for `(u, recover_v(u))`. The discrete gradient
//! `G = (G_u, G_v)` is its negative adjoint; each stage solves the per-mode
//! tridiagonal problem `D(G_u p, eps^-2 G_v p) = D(A_u, A_v)` so the
//! accelerations are divergence-free to roundoff.

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, C64};
use crate::integrator::rk4;
use crate::prandtl::{check_dt, recover_v, wall_max};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct HnsState {
    pub u: Field,
    pub v: Field,
    pub ut: Field,
    pub vt: Field,
    pub eps: f64,
    pub t: f64,
}

impl HnsState {
    pub fn zeros(grid: &Grid, eps: f64) -> Self {
        Self {
            u: grid.zeros(),
            v: grid.zeros(),
            ut: grid.zeros(),
            vt: grid.zeros(),
            eps,
            t: 0.0,
        }
    }
}

/// Builds the state from a compatible `u0` (and `u1`), with
/// `v = recover_v(u)` for both the data and its time derivative.
pub fn make_hns_data(grid: &Grid, u0: &Field, u1: &Field, eps: f64) -> Result<HnsState> {
    check_eps(eps)?;
    for (name, f) in [("u0", u0), ("u1", u1)] {
        let mean = grid.max_vertical_mean(f);
        let scale = f.max_abs().max(1.0);
        if mean > 1e-10 * scale {
            return Err(Error::Incompatible(format!(
                "{name} has vertical mean {mean:e}; enforce compatibility first"
            )));
        }
    }
    // the top-wall value of v is the (vanishing) vertical mean; drop roundoff
    let walls = [0, grid.ny() - 1];
    let mut state = HnsState {
        u: u0.clone(),
        v: recover_v(grid, u0),
        ut: u1.clone(),
        vt: recover_v(grid, u1),
        eps,
        t: 0.0,
    };
    for f in [&mut state.u, &mut state.v, &mut state.ut, &mut state.vt] {
        f.zero_rows(&walls);
    }
    Ok(state)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Result of one pressure solve.
#[derive(Clone, Debug)]
pub struct PressureSolution {
    /// Pressure on the half nodes, zero mean for the modes without `x`-derivative.
    pub p: Field,
    /// Uniform `x`-gradient of the mean mode that keeps the net flux at zero.
    pub mean_gradient: C64,
    /// Largest relative solvability defect `|sum r dy|` of the singular modes.
    pub defect: f64,
}

#[derive(Clone, Debug)]
pub struct HnsSolver {
    grid: Grid,
    eps: f64,
    nonlinear: bool,
}

impl HnsSolver {
    pub fn new(grid: &Grid, eps: f64, nonlinear: bool) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self {
            grid: grid.clone(),
            eps,
            nonlinear,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Largest stable step, `(dy^-2 + eps^2 xi_N^2 / 4)^{-1/2}` (`dy` as `eps -> 0`).
    pub fn max_dt(&self) -> f64 {
        let dy = self.grid.spacing();
        let xi = self.grid.nyquist_xi();
        1.0 / (1.0 / (dy * dy) + 0.25 * self.eps * self.eps * xi * xi).sqrt()
    }

    pub fn default_dt(&self) -> f64 {
        0.25 * self.grid.spacing()
    }

    /// Box divergence on the half nodes.
    pub fn divergence(&self, a: &Field, b: &Field) -> Field {
        let g = &self.grid;
        let inv = 1.0 / g.spacing();
        let mut out = g.zeros_half();
        for h in 0..g.ny() - 1 {
            for k in 0..g.nx() {
                let ik = g.ik(k);
                *out.at_mut(k, h) =
                    ik * 0.5 * (a.at(k, h) + a.at(k, h + 1)) + (b.at(k, h + 1) - b.at(k, h)) * inv;
            }
        }
        out
    }

    /// `(G_u p, G_v p)` on the nodes, zero on the walls.
    pub fn gradient(&self, p: &Field) -> (Field, Field) {
        let g = &self.grid;
        let inv = 1.0 / g.spacing();
        let mut gu = g.zeros();
        let mut gv = g.zeros();
        for j in 1..g.ny() - 1 {
            for k in 0..g.nx() {
                let (lo, hi) = (p.at(k, j - 1), p.at(k, j));
                *gu.at_mut(k, j) = g.ik(k) * 0.5 * (lo + hi);
                *gv.at_mut(k, j) = (hi - lo) * inv;
            }
        }
        (gu, gv)
    }

    /// Solves `D(G_u p, eps^-2 G_v p) = r` mode by mode.
    ///
    /// Modes with `i xi = 0` reduce to a Neumann problem; their mean
    /// is removed from `r` (the defect is returned) and `p` is gauged to zero mean.
    pub fn solve_poisson(&self, r: &Field) -> Result<(Field, f64)> {
        let g = &self.grid;
        let nh = g.ny() - 1;
        let dy = g.spacing();
        let e = 1.0 / (self.eps * self.eps);
        let c = e / (dy * dy);
        let mut p = g.zeros_half();
        let mut defect = 0.0_f64;
        let mut diag = vec![0.0; nh];
        let mut rhs = vec![ZERO; nh];
        for k in 0..g.nx() {
            let ik = g.ik(k);
            if ik == ZERO {
                let mut sum = ZERO;
                let mut scale = 0.0_f64;
                for h in 0..nh {
                    sum += r.at(k, h);
                    scale += r.at(k, h).norm();
                }
                if scale > 0.0 {
                    defect = defect.max(sum.norm() / scale);
                }
                let mean = sum / nh as f64;
                // integrate the flux upward from G_v = 0 at the bottom wall
                let mut flux = ZERO;
                let mut acc = ZERO;
                let mut total = ZERO;
                for h in 0..nh {
                    if h > 0 {
                        acc += dy * flux;
                    }
                    *p.at_mut(k, h) = acc;
                    total += acc;
                    flux += dy / e * (r.at(k, h) - mean);
                }
                let shift = total / nh as f64;
                for h in 0..nh {
                    *p.at_mut(k, h) -= shift;
                }
                continue;
            }
            let q = 0.25 * ik.norm_sqr();
            let off = -q + c;
            for h in 0..nh {
                diag[h] = if h == 0 || h == nh - 1 {
                    -q - c
                } else {
                    -2.0 * q - 2.0 * c
                };
                rhs[h] = r.at(k, h);
            }
            // Thomas; the matrix is symmetric and diagonally dominant
            for h in 1..nh {
                if diag[h - 1].abs() < 1e-300 {
                    return Err(Error::Tridiagonal { mode: k });
                }
                let w = off / diag[h - 1];
                diag[h] -= w * off;
                let prev = rhs[h - 1];
                rhs[h] -= w * prev;
            }
            if diag[nh - 1].abs() < 1e-300 {
                return Err(Error::Tridiagonal { mode: k });
            }
            let mut x = rhs[nh - 1] / diag[nh - 1];
            *p.at_mut(k, nh - 1) = x;
            for h in (0..nh - 1).rev() {
                x = (rhs[h] - off * x) / diag[h];
                *p.at_mut(k, h) = x;
            }
        }
        Ok((p, defect))
    }

    /// Pressure for the masked accelerations `(A_u, A_v)`.
    pub fn pressure_solve(&self, acc_u: &Field, acc_v: &Field) -> Result<PressureSolution> {
        let r = self.divergence(acc_u, acc_v);
        let (p, defect) = self.solve_poisson(&r)?;
        let g = &self.grid;
        let mut mean = ZERO;
        for j in 1..g.ny() - 1 {
            mean += acc_u.at(0, j);
        }
        let mean_gradient = mean * g.spacing() / (1.0 - g.spacing());
        Ok(PressureSolution {
            p,
            mean_gradient,
            defect,
        })
    }

    /// Masked accelerations without pressure.
    fn raw_accelerations(&self, u: &Field, v: &Field, ut: &Field, vt: &Field) -> (Field, Field) {
        let g = &self.grid;
        let e2 = self.eps * self.eps;
        let mut au = g.dyy(u);
        au.axpy(e2, &g.dxx(u));
        au -= ut;
        let mut av = g.dyy(v);
        av.axpy(e2, &g.dxx(v));
        av -= vt;
        if self.nonlinear {
            let n = g.advection(u, v, &[u, v]);
            au -= &n[0];
            av -= &n[1];
        }
        let last = g.ny() - 1;
        au.zero_rows(&[0, last]);
        av.zero_rows(&[0, last]);
        (au, av)
    }

    /// Accelerations `(u_tt, v_tt)` and the pressure solution behind them.
    pub fn accelerations(
        &self,
        u: &Field,
        v: &Field,
        ut: &Field,
        vt: &Field,
    ) -> Result<(Field, Field, PressureSolution)> {
        let (mut au, mut av) = self.raw_accelerations(u, v, ut, vt);
        let sol = self.pressure_solve(&au, &av)?;
        let (gu, gv) = self.gradient(&sol.p);
        au -= &gu;
        av.axpy(-1.0 / (self.eps * self.eps), &gv);
        for j in 1..self.grid.ny() - 1 {
            *au.at_mut(0, j) -= sol.mean_gradient;
        }
        for (what, f) in [("hns u acceleration", &au), ("hns v acceleration", &av)] {
            if let Some((mode, node)) = f.first_non_finite() {
                return Err(Error::NonFinite { what, mode, node });
            }
        }
        Ok((au, av, sol))
    }

    /// `(u_t, v_t, u_tt, v_tt)`.
    pub fn rhs(&self, u: &Field, v: &Field, ut: &Field, vt: &Field) -> Result<Vec<Field>> {
        let (au, av, _) = self.accelerations(u, v, ut, vt)?;
        Ok(vec![ut.clone(), vt.clone(), au, av])
    }

    pub fn step(&self, state: &HnsState, dt: f64) -> Result<HnsState> {
        check_dt(dt, self.max_dt())?;
        let y = vec![
            state.u.clone(),
            state.v.clone(),
            state.ut.clone(),
            state.vt.clone(),
        ];
        let mut out = rk4(&y, dt, |s: &Vec<Field>| self.rhs(&s[0], &s[1], &s[2], &s[3]))?;
        let last = self.grid.ny() - 1;
        for f in out.iter_mut() {
            f.zero_rows(&[0, last]);
        }
        let vt = out.pop().unwrap();
        let ut = out.pop().unwrap();
        let v = out.pop().unwrap();
        let u = out.pop().unwrap();
        Ok(HnsState {
            u,
            v,
            ut,
            vt,
            eps: state.eps,
            t: state.t + dt,
        })
    }

    /// Removes the discrete divergence of `(a, b)` with the weighted gradient
    /// of a correction potential. Returns the corrected pair and the L2 norm
    /// of the correction.
    pub fn project(&self, a: &Field, b: &Field) -> Result<(Field, Field, f64)> {
        let d = self.divergence(a, b);
        let (phi, _) = self.solve_poisson(&d)?;
        let (gu, gv) = self.gradient(&phi);
        let gv = gv.scaled(1.0 / (self.eps * self.eps));
        let g = &self.grid;
        let size = (g.l2_norm(&gu).powi(2) + g.l2_norm(&gv).powi(2)).sqrt();
        Ok((a - &gu, b - &gv, size))
    }

    /// Projects both `(u, v)` and `(u_t, v_t)`; returns the new state and the
    /// larger of the two correction norms.
    pub fn divergence_cleanup(&self, state: &HnsState) -> Result<(HnsState, f64)> {
        let (u, v, c1) = self.project(&state.u, &state.v)?;
        let (ut, vt, c2) = self.project(&state.ut, &state.vt)?;
        Ok((
            HnsState {
                u,
                v,
                ut,
                vt,
                eps: state.eps,
                t: state.t,
            },
            c1.max(c2),
        ))
    }

    /// `||D(a, b)|| / (||avg(d_x a)|| + ||d_y b||)` on the half nodes.
    pub fn relative_divergence(&self, a: &Field, b: &Field) -> f64 {
        let g = &self.grid;
        let d = g.l2_norm(&self.divergence(a, b));
        let ax = g.l2_norm(&self.divergence(a, &g.zeros()));
        let by = g.l2_norm(&self.divergence(&g.zeros(), b));
        let den = ax + by;
        if den == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / den
        }
    }

    pub fn state_divergence(&self, state: &HnsState) -> f64 {
        self.relative_divergence(&state.u, &state.v)
    }

    /// Relative divergence of the accelerations at the given state.
    pub fn acceleration_divergence(&self, state: &HnsState) -> Result<f64> {
        let (au, av, _) = self.accelerations(&state.u, &state.v, &state.ut, &state.vt)?;
        Ok(self.relative_divergence(&au, &av))
    }

    /// Mechanical energy of `U = (u, eps v)`:
    /// `||U||^2 + ||eps d_x U||^2 + ||d_y U||^2 + ||U_t||^2`.
    pub fn energy(&self, s: &HnsState) -> f64 {
        let g = &self.grid;
        let eps = self.eps;
        let sq = |f: &Field| g.l2_norm(f).powi(2);
        let part = |a: &Field, at: &Field| {
            sq(a) + eps * eps * sq(&g.dx(a)) + sq(&g.dy(a)) + sq(at)
        };
        part(&s.u, &s.ut) + eps * eps * part(&s.v, &s.vt)
    }

    pub fn wall_max(&self, s: &HnsState) -> f64 {
        [&s.u, &s.v, &s.ut, &s.vt]
            .iter()
            .map(|f| wall_max(f))
            .fold(0.0, f64::max)
    }
}
