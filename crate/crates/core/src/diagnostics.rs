//! Weighted energy functionals along a run and exponential decay fits.
//!
//! [`EsTracker`] assembles the seven terms
//!
//! ```text
//! 1  ||e^{Kt}(u_F, d_y u_F, (d_t u)_F)||_{L~inf(B^s)}
//! 2  sqrt(aK) ||e^{3Kt/4} u_F||_{L~inf(B^{s+1/4})}
//! 3  aK ||e^{Kt/2} u_F||_{L~inf(B^{s+1/2})}
//! 4  sqrt(lambda) ||e^{Kt}(u_F, d_t u_F, d_y u_F)||_{L~2_{thetadot}(B^{s+1/4})}
//! 5  lambda ||e^{Kt} u_F||_{L~2_{thetadot^2}(B^{s+1/2})}
//! 6  lambda^{3/2} ||e^{Kt} u_F||_{L~2_{thetadot^3}(B^{s+3/4})}
//! 7  ||e^{Kt}((d_t u)_F, d_y u_F)||_{L~2(B^s)}
//! ```
//!
//! where `u_F` is the Gevrey-weighted field and `K` the decay rate.
//! `E_s` is the sum of terms 1, 2, 3 and 7; `E_{s,lambda}` adds 4 to 6.
//! Note `d_t (u_F) = (d_t u)_F - lambda thetadot |D_x|^{1/2} u_F`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Field, Grid};
use crate::gevrey::{apply_radius, GevreyParams, Sign};
use crate::paley::{DyadicBank, NormSeries, TimeWeight};

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// One `E_s` evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EsSample {
    pub t: f64,
    pub radius: f64,
    pub trust_horizon: f64,
    /// `e^{Kt} ||u_F(t)||_{B^s}` at this instant.
    pub weighted_besov: f64,
    pub terms: [f64; 7],
    pub e_s: f64,
    pub e_s_lambda: f64,
}

impl EsSample {
    pub fn csv_header() -> Vec<String> {
        let mut h = vec![
            "radius".to_string(),
            "trust_horizon".to_string(),
            "weighted_besov".to_string(),
        ];
        let kinds = ["Linf", "Linf", "Linf", "L2_thetadot", "L2_thetadot2", "L2_thetadot3", "L2"];
        for (i, k) in kinds.iter().enumerate() {
            h.push(format!("E_s.term{}.{}.B_s", i + 1, k));
        }
        h.push("E_s".into());
        h.push("E_s_lambda".into());
        h
    }

    pub fn csv_cells(&self) -> Vec<f64> {
        let mut c = vec![self.radius, self.trust_horizon, self.weighted_besov];
        c.extend_from_slice(&self.terms);
        c.push(self.e_s);
        c.push(self.e_s_lambda);
        c
    }
}

/// Running `E_s` accumulators for a Prandtl-type run.
#[derive(Clone, Debug)]
pub struct EsTracker {
    bank: DyadicBank,
    params: GevreyParams,
    s: f64,
    series: [NormSeries; 7],
}

impl EsTracker {
    pub fn new(bank: &DyadicBank, params: &GevreyParams, s: f64) -> Self {
        let k = params.kappa();
        let mk = |w, r| NormSeries::new(bank, w, r);
        Self {
            bank: bank.clone(),
            params: *params,
            s,
            series: [
                mk(TimeWeight::One, k),
                mk(TimeWeight::One, 0.75 * k),
                mk(TimeWeight::One, 0.5 * k),
                mk(TimeWeight::ThetaDot, k),
                mk(TimeWeight::ThetaDotSquared, k),
                mk(TimeWeight::ThetaDotCubed, k),
                mk(TimeWeight::One, k),
            ],
        }
    }

    pub fn series(&self) -> &[NormSeries; 7] {
        &self.series
    }

    /// Adds the sample `(u, u_t)` at time `t`.
    pub fn update(&mut self, t: f64, u: &Field, ut: &Field) -> Result<EsSample> {
        let grid = self.bank.grid().clone();
        let p = self.params;
        let radius = p.radius(t)?;
        let td = p.theta_dot(t)?;
        let wu = apply_radius(&grid, u, radius, Sign::Plus)?;
        let wt = apply_radius(&grid, ut, radius, Sign::Plus)?;
        let wy = apply_radius(&grid, &grid.dy(u), radius, Sign::Plus)?;
        let mut wdt = wt.field.clone();
        wdt.axpy(-p.lambda * td, &grid.frac_dx(&wu.field, 0.5));

        let b = &self.bank;
        let eu = b.block_energies(&[&wu.field]);
        let et = b.block_energies(&[&wt.field]);
        let ey = b.block_energies(&[&wy.field]);
        let edt = b.block_energies(&[&wdt]);
        let group1 = add(&add(&eu, &ey), &et);
        let group4 = add(&add(&eu, &edt), &ey);
        let group7 = add(&et, &ey);
        let inputs: [(&[f64], f64); 7] = [
            (&group1, 1.0),
            (&eu, 1.0),
            (&eu, 1.0),
            (&group4, td),
            (&eu, td * td),
            (&eu, td * td * td),
            (&group7, 1.0),
        ];
        for (series, (e, w)) in self.series.iter_mut().zip(inputs) {
            series.update_energies(e, t, w)?;
        }

        let s = self.s;
        let ak = p.a * p.kappa();
        let l = p.lambda;
        let se = &self.series;
        let terms = [
            se[0].linf_norm(s),
            ak.sqrt() * se[1].linf_norm(s + 0.25),
            ak * se[2].linf_norm(s + 0.5),
            l.sqrt() * se[3].l2_norm(s + 0.25),
            l * se[4].l2_norm(s + 0.5),
            l.powf(1.5) * se[5].l2_norm(s + 0.75),
            se[6].l2_norm(s),
        ];
        let e_s = terms[0] + terms[1] + terms[2] + terms[6];
        let e_s_lambda = terms.iter().sum();
        let weighted_besov = (p.kappa() * t).exp() * b.besov_from_energies(&eu, s);
        Ok(EsSample {
            t,
            radius,
            trust_horizon: wu.trust_horizon,
            weighted_besov,
            terms,
            e_s,
            e_s_lambda,
        })
    }
}

/// `E_s` along a sequence of `(t, u, u_t)` samples; one report per sample.
pub fn energy_e_s(
    bank: &DyadicBank,
    samples: &[(f64, Field, Field)],
    s: f64,
    params: &GevreyParams,
) -> Result<Vec<EsSample>> {
    let mut tr = EsTracker::new(bank, params, s);
    samples.iter().map(|(t, u, ut)| tr.update(*t, u, ut)).collect()
}

/// One `E^1` evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct E1Sample {
    pub t: f64,
    pub terms: [f64; 4],
    pub total: f64,
}

impl E1Sample {
    pub fn csv_header(prefix: &str) -> Vec<String> {
        let kinds = ["Linf.B_1/2", "Linf.B_3/4", "Linf.B_1", "L2.B_1/2"];
        let mut h: Vec<String> = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| format!("{prefix}.term{}.{k}", i + 1))
            .collect();
        h.push(prefix.to_string());
        h
    }

    pub fn csv_cells(&self) -> Vec<f64> {
        let mut c = self.terms.to_vec();
        c.push(self.total);
        c
    }
}

/// Running accumulators for the four-term functional of a scaled
/// Navier-Stokes run,
///
/// ```text
/// 1  ||e^{rt}(U, eps d_x U, d_y U, (d_t u, eps d_t v))_F||_{L~inf(B^{1/2})}
/// 2  sqrt(aK) ||e^{3rt/4} U_F||_{L~inf(B^{3/4})}
/// 3  aK ||e^{rt/2} U_F||_{L~inf(B^1)}
/// 4  ||e^{rt}(eps d_x U, d_y U, d_t U)_F||_{L~2(B^{1/2})}
/// ```
///
/// with `U = (u, eps v)`. `rate = K` gives the stability functional and
/// `rate = 0` the error functional used for the hydrostatic limit.
#[derive(Clone, Debug)]
pub struct E1Tracker {
    bank: DyadicBank,
    params: GevreyParams,
    eps: f64,
    series: [NormSeries; 4],
}

impl E1Tracker {
    pub fn new(bank: &DyadicBank, params: &GevreyParams, eps: f64, rate: f64) -> Self {
        let mk = |r| NormSeries::new(bank, TimeWeight::One, r);
        Self {
            bank: bank.clone(),
            params: *params,
            eps,
            series: [mk(rate), mk(0.75 * rate), mk(0.5 * rate), mk(rate)],
        }
    }

    pub fn update(&mut self, t: f64, u: &Field, v: &Field, ut: &Field, vt: &Field) -> Result<E1Sample> {
        let grid: Grid = self.bank.grid().clone();
        let p = self.params;
        let eps = self.eps;
        let radius = p.radius(t)?;
        let w = |f: &Field| apply_radius(&grid, f, radius, Sign::Plus).map(|x| x.field);
        let ev = v.scaled(eps);
        let wu = w(u)?;
        let wv = w(&ev)?;
        let wxu = w(&grid.dx(u).scaled(eps))?;
        let wxv = w(&grid.dx(&ev).scaled(eps))?;
        let wyu = w(&grid.dy(u))?;
        let wyv = w(&grid.dy(&ev))?;
        let wtu = w(ut)?;
        let wtv = w(&vt.scaled(eps))?;
        let b = &self.bank;
        let pair = b.block_energies(&[&wu, &wv]);
        let grads = b.block_energies(&[&wxu, &wxv, &wyu, &wyv, &wtu, &wtv]);
        let all = add(&pair, &grads);
        let inputs: [&[f64]; 4] = [&all, &pair, &pair, &grads];
        for (series, e) in self.series.iter_mut().zip(inputs) {
            series.update_energies(e, t, 1.0)?;
        }
        let ak = p.a * p.kappa();
        let se = &self.series;
        let terms = [
            se[0].linf_norm(0.5),
            ak.sqrt() * se[1].linf_norm(0.75),
            ak * se[2].linf_norm(1.0),
            se[3].l2_norm(0.5),
        ];
        Ok(E1Sample {
            t,
            terms,
            total: terms.iter().sum(),
        })
    }
}

/// Fields of one scaled Navier-Stokes sample.
#[derive(Clone, Debug)]
pub struct HnsSample {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub ut: Field,
    pub vt: Field,
}

/// `E^1` along a run with rate `K`.
pub fn energy_e1(
    bank: &DyadicBank,
    samples: &[HnsSample],
    eps: f64,
    params: &GevreyParams,
) -> Result<Vec<E1Sample>> {
    let mut tr = E1Tracker::new(bank, params, eps, params.kappa());
    samples
        .iter()
        .map(|s| tr.update(s.t, &s.u, &s.v, &s.ut, &s.vt))
        .collect()
}

/// Least-squares fit of `ln(value) = intercept + rate * t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
    pub trimmed: usize,
}

/// Fits an exponential rate to the samples with `t` in `window`
/// (inclusive). Nonpositive values are dropped with a warning.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let mut pts = Vec::with_capacity(series.len());
    let mut trimmed = 0;
    for &(t, v) in series {
        if t < window.0 || t > window.1 {
            continue;
        }
        if v > 0.0 && v.is_finite() {
            pts.push((t, v.ln()));
        } else {
            trimmed += 1;
        }
    }
    if trimmed > 0 {
        log::warn!("decay fit: dropped {trimmed} nonpositive samples");
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least 2 positive samples, got {}",
            pts.len()
        )));
    }
    let (slope, intercept, r2) = least_squares(&pts);
    Ok(DecayFit {
        rate: slope,
        intercept,
        r2,
        used: pts.len(),
        trimmed,
    })
}

/// Straight-line least squares; returns `(slope, intercept, r^2)`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fit_synthetic() {
        let s: Vec<(f64, f64)> = (0..50).map(|i| (0.1 * i as f64, (-0.5 * 0.1 * i as f64).exp())).collect();
        let f = decay_fit(&s, (0.0, 10.0)).unwrap();
        assert!((f.rate + 0.5).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let c: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0)).collect();
        assert!(decay_fit(&c, (0.0, 10.0)).unwrap().rate.abs() < 1e-15);
        let mut z = s.clone();
        z[3].1 = 0.0;
        z[7].1 = -1.0;
        let f = decay_fit(&z, (0.0, 10.0)).unwrap();
        assert_eq!(f.trimmed, 2);
        assert!((f.rate + 0.5).abs() < 1e-10);
        assert!(decay_fit(&s[..1], (0.0, 1.0)).is_err());
    }

    #[test]
    fn zero_run_has_zero_energy() {
        let g = Grid::new(2.0 * PI, 16, 9).unwrap();
        let bank = DyadicBank::new(&g);
        let p = GevreyParams::default();
        let z = g.zeros();
        let samples = vec![(0.0, z.clone(), z.clone()), (0.5, z.clone(), z.clone())];
        for r in energy_e_s(&bank, &samples, 0.5, &p).unwrap() {
            assert_eq!(r.e_s_lambda, 0.0);
        }
        let hs = vec![
            HnsSample { t: 0.0, u: z.clone(), v: z.clone(), ut: z.clone(), vt: z.clone() },
            HnsSample { t: 1.0, u: z.clone(), v: z.clone(), ut: z.clone(), vt: z.clone() },
        ];
        for r in energy_e1(&bank, &hs, 0.1, &p).unwrap() {
            assert_eq!(r.total, 0.0);
        }
    }

    #[test]
    fn es_rejects_repeated_time() {
        let g = Grid::new(2.0 * PI, 16, 9).unwrap();
        let bank = DyadicBank::new(&g);
        let mut tr = EsTracker::new(&bank, &GevreyParams::default(), 0.5);
        let z = g.zeros();
        tr.update(0.0, &z, &z).unwrap();
        assert!(tr.update(0.0, &z, &z).is_err());
    }
}
