//! Gevrey-2 phase: radius loss `theta(t)`, phase `Phi(t, xi)`, weighted
//! fields, band-limited Gevrey initial data and the initial-data norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, C64};
use crate::paley::DyadicBank;

/// Relative modulus below which coefficients are dropped before a positive
/// Gevrey weight is applied.
pub const SPECTRAL_FLOOR: f64 = 1e-13;

/// `ln(f64::MAX)`: a larger phase overflows `e^Phi` for O(1) coefficients.
pub const MAX_PHASE: f64 = 709.782712893384;

fn default_a() -> f64 {
    0.5
}

fn default_lambda() -> f64 {
    1.0
}

fn default_poincare() -> f64 {
    1.0 / (std::f64::consts::PI * std::f64::consts::PI)
}

/// Radius `a`, loss multiplier `lambda` and Poincare constant of the strip.
/// The rate `kappa` and `delta` are derived on demand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyParams {
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_poincare")]
    pub poincare: f64,
}

impl Default for GevreyParams {
    fn default() -> Self {
        Self {
            a: default_a(),
            lambda: default_lambda(),
            poincare: default_poincare(),
        }
    }
}

impl GevreyParams {
    pub fn new(a: f64, lambda: f64, poincare: f64) -> Result<Self> {
        let p = Self { a, lambda, poincare };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParameter(format!("a must be > 0, got {}", self.a)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 1, got {}",
                self.lambda
            )));
        }
        if !(self.poincare.is_finite() && self.poincare > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Poincare constant must be > 0, got {}",
                self.poincare
            )));
        }
        Ok(())
    }

    /// Decay rate `min(1/6, 1/(4(1 + K)))`.
    pub fn kappa(&self) -> f64 {
        (1.0 / 6.0_f64).min(1.0 / (4.0 * (1.0 + self.poincare)))
    }

    /// `(a kappa / (4 lambda))^2`.
    pub fn delta(&self) -> f64 {
        (self.a * self.kappa() / (4.0 * self.lambda)).powi(2)
    }

    /// `theta(t) = 2 delta^{1/2} / kappa (1 - e^{-kappa t / 2})`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let k = self.kappa();
        Ok(2.0 * self.delta().sqrt() / k * -(-0.5 * k * t).exp_m1())
    }

    /// `delta^{1/2} e^{-kappa t / 2}`.
    pub fn theta_dot(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.delta().sqrt() * (-0.5 * self.kappa() * t).exp())
    }

    /// Current radius `a - lambda theta(t)`.
    pub fn radius(&self, t: f64) -> Result<f64> {
        Ok(self.a - self.lambda * self.theta(t)?)
    }

    /// `Phi(t, xi) = (a - lambda theta(t)) |xi|^{1/2}`.
    pub fn phase(&self, t: f64, xi: f64) -> Result<f64> {
        Ok(self.radius(t)? * xi.abs().sqrt())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Output of [`apply_gevrey`].
#[derive(Clone, Debug)]
pub struct Weighted {
    pub field: Field,
    /// Largest `|xi|` at which `Phi + ln(|c| / max|c|) > -3`, over retained modes.
    pub trust_horizon: f64,
    /// Number of coefficients zeroed by the spectral floor.
    pub floored: usize,
}

/// Multiplies each mode by `e^{+-Phi(t, xi)}`.
///
/// For [`Sign::Plus`] coefficients below `SPECTRAL_FLOOR` times the largest
/// modulus are zeroed first, and the phase at the Nyquist frequency must not
/// overflow.
pub fn apply_gevrey(
    grid: &Grid,
    f: &Field,
    t: f64,
    p: &GevreyParams,
    sign: Sign,
) -> Result<Weighted> {
    let radius = p.radius(t)?;
    apply_radius(grid, f, radius, sign)
}

/// [`apply_gevrey`] with the radius given directly (`a` for initial data).
pub fn apply_radius(grid: &Grid, f: &Field, radius: f64, sign: Sign) -> Result<Weighted> {
    let phases: Vec<f64> = grid.frequencies().iter().map(|x| radius * x.abs().sqrt()).collect();
    match sign {
        Sign::Minus => {
            let field = grid.multiply_symbol(f, |k| C64::new((-phases[k]).exp(), 0.0));
            Ok(Weighted {
                field,
                trust_horizon: 0.0,
                floored: 0,
            })
        }
        Sign::Plus => {
            let top = radius * grid.nyquist_xi().sqrt();
            if top > MAX_PHASE {
                return Err(Error::GevreyOverflow { phase: top });
            }
            let scale = f.max_abs();
            let mut out = f.clone();
            let mut floored = 0;
            let mut horizon = 0.0_f64;
            if scale > 0.0 {
                let cut = SPECTRAL_FLOOR * scale;
                for j in 0..out.rows() {
                    for (k, z) in out.row_mut(j).iter_mut().enumerate() {
                        let m = z.norm();
                        if m == 0.0 {
                            continue;
                        }
                        if m < cut {
                            *z = C64::new(0.0, 0.0);
                            floored += 1;
                            continue;
                        }
                        if phases[k] + (m / scale).ln() > -3.0 {
                            horizon = horizon.max(grid.xi(k).abs());
                        }
                        *z *= phases[k].exp();
                    }
                }
            }
            Ok(Weighted {
                field: out,
                trust_horizon: horizon,
                floored,
            })
        }
    }
}

/// Vertical shape of generated initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VerticalProfile {
    /// `sin(2 pi y)`.
    #[serde(rename = "sin2pi")]
    Sin2Pi,
    /// `sin(4 pi y)`.
    #[serde(rename = "sin4pi")]
    Sin4Pi,
    /// `y (1 - y) (1 - 2y)`.
    #[serde(rename = "cubic")]
    Cubic,
    /// Node values `P(y_j)`, one per vertical node.
    #[serde(rename = "custom")]
    Custom(Vec<f64>),
}

impl Default for VerticalProfile {
    fn default() -> Self {
        VerticalProfile::Sin2Pi
    }
}

impl VerticalProfile {
    /// Samples the profile and checks the wall values and zero mean.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        use std::f64::consts::PI;
        let ny = grid.ny();
        let values: Vec<f64> = match self {
            VerticalProfile::Sin2Pi => (0..ny).map(|j| (2.0 * PI * grid.y(j)).sin()).collect(),
            VerticalProfile::Sin4Pi => (0..ny).map(|j| (4.0 * PI * grid.y(j)).sin()).collect(),
            VerticalProfile::Cubic => (0..ny)
                .map(|j| {
                    let y = grid.y(j);
                    y * (1.0 - y) * (1.0 - 2.0 * y)
                })
                .collect(),
            VerticalProfile::Custom(v) => {
                if v.len() != ny {
                    return Err(Error::InvalidProfile(format!(
                        "expected {ny} node values, got {}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !values.iter().all(|v| v.is_finite()) || scale == 0.0 {
            return Err(Error::InvalidProfile("profile must be finite and nonzero".into()));
        }
        // sin(k pi) is not exactly zero in floating point
        let tol = 1e-12 * scale;
        if values[0].abs() > tol || values[ny - 1].abs() > tol {
            return Err(Error::InvalidProfile(format!(
                "profile must vanish at the walls, got {} and {}",
                values[0],
                values[ny - 1]
            )));
        }
        let mut values = values;
        values[0] = 0.0;
        values[ny - 1] = 0.0;
        let mean: f64 = values.iter().zip(grid.trapezoid_weights()).map(|(v, w)| v * w).sum();
        if mean.abs() > tol {
            return Err(Error::InvalidProfile(format!(
                "profile must have zero vertical mean, got {mean:e}"
            )));
        }
        Ok(values)
    }
}

/// Band-limited Gevrey data
/// `u0^(xi_m, y) = c e^{-a |xi_m|^{1/2}} P(y)` for `1 <= |m| <= m_max`,
/// and `u1 = u1_scale * u0`.
pub fn make_gevrey_data(
    grid: &Grid,
    p: &GevreyParams,
    amplitude: f64,
    m_max: usize,
    profile: &VerticalProfile,
    u1_scale: f64,
) -> Result<(Field, Field)> {
    p.validate()?;
    if !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude must be finite, got {amplitude}")));
    }
    let resolved = (grid.nx() - 1) / 3;
    if m_max == 0 || m_max > resolved {
        return Err(Error::InvalidParameter(format!(
            "band m_max must lie in 1..={resolved}, got {m_max}"
        )));
    }
    let shape = profile.sample(grid)?;
    let mut u0 = grid.zeros();
    for m in 1..=m_max as i64 {
        let c = amplitude * (-p.a * grid.xi(grid.index_of(m)).abs().sqrt()).exp();
        for (j, s) in shape.iter().enumerate() {
            u0.set_coeff(m, j, C64::new(c * s, 0.0));
            u0.set_coeff(-m, j, C64::new(c * s, 0.0));
        }
    }
    let u1 = u0.scaled(u1_scale);
    Ok((u0, u1))
}

fn weighted(grid: &Grid, f: &Field, a: f64) -> Result<Field> {
    Ok(apply_radius(grid, f, a, Sign::Plus)?.field)
}

/// `||W(u0, u1, d_y u0)||_{B^s} + sqrt(a kappa) ||W u0||_{B^{s+1/4}}
/// + a kappa ||W u0||_{B^{s+1/2}}` with `W = e^{a |D_x|^{1/2}}`.
pub fn initial_norm_h0(
    bank: &DyadicBank,
    u0: &Field,
    u1: &Field,
    s: f64,
    p: &GevreyParams,
) -> Result<f64> {
    let grid = bank.grid();
    let w0 = weighted(grid, u0, p.a)?;
    let w1 = weighted(grid, u1, p.a)?;
    let wy = weighted(grid, &grid.dy(u0), p.a)?;
    let ak = p.a * p.kappa();
    Ok(bank.besov_norm_multi(&[&w0, &w1, &wy], s)
        + ak.sqrt() * bank.besov_norm(&w0, s + 0.25)
        + ak * bank.besov_norm(&w0, s + 0.5))
}

/// `||W(u0, eps v0, eps d_x (u0, eps v0), d_y (u0, eps v0), u1, eps v1)||_{B^{1/2}}
/// + sqrt(a kappa) ||W(u0, eps v0)||_{B^{3/4}} + a kappa ||W(u0, eps v0)||_{B^1}`.
pub fn initial_norm_h1(
    bank: &DyadicBank,
    u0: &Field,
    v0: &Field,
    u1: &Field,
    v1: &Field,
    eps: f64,
    p: &GevreyParams,
) -> Result<f64> {
    let grid = bank.grid();
    let ev0 = v0.scaled(eps);
    let parts = [
        u0.clone(),
        ev0.clone(),
        grid.dx(u0).scaled(eps),
        grid.dx(&ev0).scaled(eps),
        grid.dy(u0),
        grid.dy(&ev0),
        u1.clone(),
        v1.scaled(eps),
    ];
    let w: Vec<Field> = parts
        .iter()
        .map(|f| weighted(grid, f, p.a))
        .collect::<Result<_>>()?;
    let refs: Vec<&Field> = w.iter().collect();
    let pair = [&w[0], &w[1]];
    let ak = p.a * p.kappa();
    Ok(bank.besov_norm_multi(&refs, 0.5)
        + ak.sqrt() * bank.besov_norm_multi(&pair, 0.75)
        + ak * bank.besov_norm_multi(&pair, 1.0))
}
