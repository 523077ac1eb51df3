//! Classical four-stage Runge-Kutta on tuples of fields.

use crate::error::{Error, Result};
use crate::fields::Field;

/// A state that can be combined linearly by the stepper.
pub trait OdeState: Clone {
    /// `self += a * x`.
    fn axpy(&mut self, a: f64, x: &Self);
}

impl OdeState for Vec<Field> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, o) in self.iter_mut().zip(x) {
            s.axpy(a, o);
        }
    }
}

/// One RK4 step of `y' = f(y)`.
pub fn rk4<S, F>(y: &S, dt: f64, mut f: F) -> Result<S>
where
    S: OdeState,
    F: FnMut(&S) -> Result<S>,
{
    let k1 = f(y)?;
    let mut y2 = y.clone();
    y2.axpy(0.5 * dt, &k1);
    let k2 = f(&y2)?;
    let mut y3 = y.clone();
    y3.axpy(0.5 * dt, &k2);
    let k3 = f(&y3)?;
    let mut y4 = y.clone();
    y4.axpy(dt, &k3);
    let k4 = f(&y4)?;

    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// Aborts a run whose energy grows by more than `limit` between checks.
#[derive(Clone, Debug)]
pub struct GrowthGuard {
    limit: f64,
    last: Option<f64>,
}

impl GrowthGuard {
    pub fn new(limit: f64) -> Self {
        Self { limit, last: None }
    }

    pub fn check(&mut self, energy: f64, t: f64) -> Result<()> {
        if !energy.is_finite() {
            return Err(Error::EnergyGrowth { factor: f64::INFINITY, t });
        }
        if let Some(prev) = self.last {
            if prev > 0.0 && energy > self.limit * prev {
                return Err(Error::EnergyGrowth {
                    factor: energy / prev,
                    t,
                });
            }
        }
        self.last = Some(energy);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Scalar(f64);

    impl OdeState for Scalar {
        fn axpy(&mut self, a: f64, x: &Self) {
            self.0 += a * x.0;
        }
    }

    #[test]
    fn fourth_order_on_exponential() {
        let run = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = Scalar(1.0);
            for _ in 0..n {
                y = rk4(&y, dt, |s| Ok(Scalar(-s.0))).unwrap();
            }
            (y.0 - (-1.0_f64).exp()).abs()
        };
        let ratio = run(20) / run(40);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn growth_guard_trips() {
        let mut g = GrowthGuard::new(10.0);
        g.check(0.0, 0.0).unwrap();
        g.check(1.0, 1.0).unwrap();
        g.check(9.0, 2.0).unwrap();
        assert!(matches!(g.check(100.0, 3.0), Err(Error::EnergyGrowth { .. })));
        assert!(GrowthGuard::new(10.0).check(f64::NAN, 0.0).is_err());
    }
}
