//! Horizontal Littlewood-Paley machinery.
//!
//! The cut-offs are built from the smooth step
//! `g(t) = h(t) / (h(t) + h(1 - t))`, `h(t) = exp(-1/t)` for `t > 0`:
//!
//! ```text
//! chi(tau) = 1 - g(3 (|tau| - 1))     (= 1 on |tau| <= 1, = 0 on |tau| >= 4/3)
//! phi(tau) = chi(tau / 2) - chi(tau)  (supported in 1 <= |tau| <= 8/3)
//! ```
//!
//! so `sum_k phi(2^-k tau)` telescopes to one. Blocks are
//! `Delta_k = phi(2^-k |D_x|)` and `S_k = chi(2^-k |D_x|)`. The mean mode
//! `m = 0` is assigned to the lowest block `k_min`, and `S_k` contains it
//! exactly when `k > k_min`, which keeps `S_{k-1} = sum_{j <= k-2} Delta_j`
//! true on the whole grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Field, Grid, C64};

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    let b = bump(1.0 - t);
    a / (a + b)
}

/// Low-frequency cut-off: one on `|tau| <= 1`, zero on `|tau| >= 4/3`.
pub fn chi(tau: f64) -> f64 {
    1.0 - smooth_step(3.0 * (tau.abs() - 1.0))
}

/// Dyadic annulus cut-off `chi(tau / 2) - chi(tau)`.
pub fn phi(tau: f64) -> f64 {
    chi(0.5 * tau) - chi(tau)
}

fn pow2(k: i32) -> f64 {
    2.0_f64.powi(k)
}

/// Sampled dyadic cut-offs for one grid.
#[derive(Clone, Debug)]
pub struct DyadicBank {
    grid: Grid,
    k_min: i32,
    k_max: i32,
    /// `phi(2^-k |xi_m|)` for `k = k_min..=k_max`, storage order in `m`.
    phi_samples: Vec<Vec<f64>>,
    /// `chi(2^-k |xi_m|)` for `k = k_min - 1..=k_max + 1`.
    chi_samples: Vec<Vec<f64>>,
}

impl DyadicBank {
    pub fn new(grid: &Grid) -> Self {
        let xi_min = grid.xi(1).abs();
        let xi_max = grid.nyquist_xi();
        // phi(2^-k xi) != 0 needs 1 < 2^-k xi < 8/3.
        let lo = (xi_min * 3.0 / 8.0).log2().floor() as i32 - 1;
        let hi = xi_max.log2().ceil() as i32 + 1;
        let nonzero = |k: i32| {
            (1..grid.nx()).any(|idx| phi(grid.xi(idx).abs() / pow2(k)) != 0.0)
        };
        let k_min = (lo..=hi).find(|&k| nonzero(k)).expect("grid has resolvable modes");
        let k_max = (lo..=hi).rev().find(|&k| nonzero(k)).expect("grid has resolvable modes");
        let sample = |k: i32, f: fn(f64) -> f64| -> Vec<f64> {
            (0..grid.nx()).map(|idx| f(grid.xi(idx).abs() / pow2(k))).collect()
        };
        let phi_samples = (k_min..=k_max).map(|k| sample(k, phi)).collect();
        let chi_samples = (k_min - 1..=k_max + 1).map(|k| sample(k, chi)).collect();
        Self {
            grid: grid.clone(),
            k_min,
            k_max,
            phi_samples,
            chi_samples,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Raw `phi(2^-k |xi|)` at storage index `idx` (zero outside the bank).
    pub fn phi_sample(&self, k: i32, idx: usize) -> f64 {
        if k < self.k_min || k > self.k_max {
            return 0.0;
        }
        self.phi_samples[(k - self.k_min) as usize][idx]
    }

    /// Raw `chi(2^-k |xi|)` at storage index `idx`.
    pub fn chi_sample(&self, k: i32, idx: usize) -> f64 {
        if k < self.k_min - 1 || k > self.k_max + 1 {
            return chi(self.grid.xi(idx).abs() / pow2(k));
        }
        self.chi_samples[(k - self.k_min + 1) as usize][idx]
    }

    /// Symbol of `Delta_k`, with the mean mode folded into `k_min`.
    pub fn delta_symbol(&self, k: i32, idx: usize) -> f64 {
        if idx == 0 {
            return if k == self.k_min { 1.0 } else { 0.0 };
        }
        self.phi_sample(k, idx)
    }

    /// Symbol of `S_k`, consistent with the mean-mode convention.
    pub fn low_symbol(&self, k: i32, idx: usize) -> f64 {
        if idx == 0 {
            return if k > self.k_min { 1.0 } else { 0.0 };
        }
        self.chi_sample(k, idx)
    }

    pub fn delta(&self, f: &Field, k: i32) -> Field {
        self.grid
            .multiply_symbol(f, |idx| C64::new(self.delta_symbol(k, idx), 0.0))
    }

    /// `S_k f`.
    pub fn low(&self, f: &Field, k: i32) -> Field {
        self.grid
            .multiply_symbol(f, |idx| C64::new(self.low_symbol(k, idx), 0.0))
    }

    /// `max |sum_k phi(2^-k |xi|) - 1|` over nonzero grid frequencies.
    pub fn partition_residual(&self) -> f64 {
        (1..self.grid.nx())
            .map(|idx| {
                let s: f64 = self.blocks().map(|k| self.phi_sample(k, idx)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |chi(tau) + sum_{j >= 0} phi(2^-j tau) - 1|` for `tau = 2^-k |xi|`
    /// over every grid frequency and block scale.
    pub fn low_frequency_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for idx in 1..self.grid.nx() {
            for k in self.blocks() {
                let tau = self.grid.xi(idx).abs() / pow2(k);
                let mut s = chi(tau);
                let mut j = 0;
                while tau / pow2(j) > 0.5 {
                    s += phi(tau / pow2(j));
                    j += 1;
                }
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }

    /// Largest cut-off value found outside its admissible support.
    pub fn support_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for idx in 0..self.grid.nx() {
            let xi = self.grid.xi(idx).abs();
            for k in self.blocks() {
                let tau = xi / pow2(k);
                if !(0.75..=8.0 / 3.0).contains(&tau) {
                    worst = worst.max(self.phi_sample(k, idx).abs());
                }
            }
            for k in self.k_min - 1..=self.k_max + 1 {
                if xi / pow2(k) > 4.0 / 3.0 {
                    worst = worst.max(self.chi_sample(k, idx).abs());
                }
            }
        }
        worst
    }

    /// `max |Delta_j Delta_k f|` relative to `max |f|` over pairs with `|j - k| >= 2`.
    pub fn block_overlap(&self, f: &Field) -> f64 {
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for k in self.blocks() {
            let dk = self.delta(f, k);
            for j in self.blocks().filter(|j| (j - k).abs() >= 2) {
                worst = worst.max(self.delta(&dk, j).max_abs() / scale);
            }
        }
        worst
    }

    /// Squared block norms `||Delta_k (f_1, .., f_n)||^2`, components summed.
    pub fn block_energies(&self, fields: &[&Field]) -> Vec<f64> {
        let mut modes = vec![0.0; self.grid.nx()];
        for f in fields {
            for (a, b) in modes.iter_mut().zip(self.grid.mode_energy(f)) {
                *a += b;
            }
        }
        self.blocks()
            .map(|k| {
                modes
                    .iter()
                    .enumerate()
                    .map(|(idx, e)| self.delta_symbol(k, idx).powi(2) * e)
                    .sum()
            })
            .collect()
    }

    /// `sum_k 2^{ks} sqrt(E_k)` for precomputed block energies.
    pub fn besov_from_energies(&self, energies: &[f64], s: f64) -> f64 {
        self.blocks()
            .zip(energies)
            .map(|(k, e)| 2.0_f64.powf(k as f64 * s) * e.sqrt())
            .sum()
    }

    /// `||f||_{B^s} = sum_k 2^{ks} ||Delta_k f||_{L2}`.
    pub fn besov_norm(&self, f: &Field, s: f64) -> f64 {
        self.besov_norm_multi(&[f], s)
    }

    /// Besov norm of a vector of fields; per block the component norms are
    /// combined in the Euclidean sense.
    pub fn besov_norm_multi(&self, fields: &[&Field], s: f64) -> f64 {
        self.besov_from_energies(&self.block_energies(fields), s)
    }

    /// Bony decomposition `fg = T_f g + T_g f + R(f, g)` in `x`, with
    /// dealiased products.
    pub fn bony(&self, f: &Field, g: &Field) -> Bony {
        let grid = &self.grid;
        let n = f.nx() * f.rows();
        let phys = |h: &Field| grid.to_physical(h);
        let df: Vec<Vec<f64>> = self.blocks().map(|k| phys(&self.delta(f, k))).collect();
        let dg: Vec<Vec<f64>> = self.blocks().map(|k| phys(&self.delta(g, k))).collect();
        let mut t_fg = vec![0.0; n];
        let mut t_gf = vec![0.0; n];
        let mut rem = vec![0.0; n];
        let nb = self.len();
        for (b, k) in self.blocks().enumerate() {
            let sf = phys(&self.low(f, k - 1));
            let sg = phys(&self.low(g, k - 1));
            for p in 0..n {
                t_fg[p] += sf[p] * dg[b][p];
                t_gf[p] += sg[p] * df[b][p];
                let mut near = dg[b][p];
                if b > 0 {
                    near += dg[b - 1][p];
                }
                if b + 1 < nb {
                    near += dg[b + 1][p];
                }
                rem[p] += df[b][p] * near;
            }
        }
        let back = |v: Vec<f64>| {
            let mut out = grid
                .to_spectral_rows(&v, f.rows())
                .expect("shape is consistent by construction");
            grid.dealias(&mut out);
            out
        };
        Bony {
            t_fg: back(t_fg),
            t_gf: back(t_gf),
            remainder: back(rem),
        }
    }

    /// Empirical Bernstein ratios for a field spectrally supported in block `k`.
    pub fn bernstein_check(&self, f: &Field, k: i32) -> BernsteinReport {
        let grid = &self.grid;
        let norm = grid.l2_norm(f);
        let scale = pow2(k);
        if norm <= 1e-300 || !norm.is_finite() {
            return BernsteinReport::Skipped;
        }
        let derivative_ratio = grid.l2_norm(&grid.dx(f)) / (scale * norm);
        // ||f||_{L^inf_h(L^2_v)} against 2^{k/2} ||f||_{L^2}
        let v = grid.to_physical(f);
        let w = grid.trapezoid_weights();
        let nx = grid.nx();
        let sup_h = (0..nx)
            .map(|i| {
                (0..f.rows())
                    .map(|j| w[j] * v[j * nx + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        BernsteinReport::Measured {
            derivative_ratio,
            sup_horizontal_ratio: sup_h / (scale.sqrt() * norm),
        }
    }

    /// Perturbs one stored `phi` sample. Fault injection for the verify suite.
    #[doc(hidden)]
    pub fn corrupt_phi(&mut self, k: i32, idx: usize, delta: f64) {
        if let Some(row) = self.phi_samples.get_mut((k - self.k_min) as usize) {
            row[idx] += delta;
        }
    }
}

/// The three pieces of a Bony decomposition.
#[derive(Clone, Debug)]
pub struct Bony {
    pub t_fg: Field,
    pub t_gf: Field,
    pub remainder: Field,
}

impl Bony {
    pub fn reconstruct(&self) -> Field {
        let mut out = &self.t_fg + &self.t_gf;
        out += &self.remainder;
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BernsteinReport {
    /// The field has no energy in the block; ratios are undefined.
    Skipped,
    Measured {
        /// `||d_x f|| / (2^k ||f||)`; lies in `[3/4, 8/3]` for block-supported `f`.
        derivative_ratio: f64,
        /// `||f||_{L^inf_h(L^2_v)} / (2^{k/2} ||f||_{L^2})`.
        sup_horizontal_ratio: f64,
    },
}

/// Time weight `f(t)` of a time-weighted Chemin-Lerner norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeWeight {
    One,
    ThetaDot,
    ThetaDotSquared,
    ThetaDotCubed,
}

impl TimeWeight {
    pub fn power(self) -> i32 {
        match self {
            TimeWeight::One => 0,
            TimeWeight::ThetaDot => 1,
            TimeWeight::ThetaDotSquared => 2,
            TimeWeight::ThetaDotCubed => 3,
        }
    }

    pub fn evaluate(self, theta_dot: f64) -> f64 {
        theta_dot.powi(self.power())
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeWeight::One => "1",
            TimeWeight::ThetaDot => "thetadot",
            TimeWeight::ThetaDotSquared => "thetadot2",
            TimeWeight::ThetaDotCubed => "thetadot3",
        }
    }
}

/// Per-block time accumulators for `L~^inf_t(B^s)` and `L~^2_{t,f}(B^s)`
/// norms of `e^{rate t} a(t)`.
///
/// `integrals[k]` holds the trapezoid approximation of
/// `int_0^t f(t') e^{2 rate t'} ||Delta_k a(t')||^2 dt'` and `maxima[k]` the
/// running maximum of `e^{rate t'} ||Delta_k a(t')||` over the samples seen.
#[derive(Clone, Debug)]
pub struct NormSeries {
    k_min: i32,
    weight: TimeWeight,
    rate: f64,
    integrals: Vec<f64>,
    maxima: Vec<f64>,
    last: Option<(f64, Vec<f64>)>,
}

impl NormSeries {
    pub fn new(bank: &DyadicBank, weight: TimeWeight, rate: f64) -> Self {
        Self {
            k_min: bank.k_min(),
            weight,
            rate,
            integrals: vec![0.0; bank.len()],
            maxima: vec![0.0; bank.len()],
            last: None,
        }
    }

    pub fn weight(&self) -> TimeWeight {
        self.weight
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn integrals(&self) -> &[f64] {
        &self.integrals
    }

    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }

    pub fn last_time(&self) -> Option<f64> {
        self.last.as_ref().map(|(t, _)| *t)
    }

    /// Adds the sample of `(f_1, .., f_n)` at time `t`.
    pub fn update(
        &mut self,
        bank: &DyadicBank,
        fields: &[&Field],
        t: f64,
        weight_value: f64,
    ) -> Result<()> {
        self.update_energies(&bank.block_energies(fields), t, weight_value)
    }

    /// Adds a sample given its squared block norms.
    pub fn update_energies(&mut self, energies: &[f64], t: f64, weight_value: f64) -> Result<()> {
        assert_eq!(energies.len(), self.integrals.len(), "block count mismatch");
        if let Some((prev, _)) = &self.last {
            if !(t > *prev) {
                return Err(Error::NonMonotoneTime { prev: *prev, next: t });
            }
        }
        let growth = (self.rate * t).exp();
        let integrand: Vec<f64> = energies
            .iter()
            .map(|e| weight_value * growth * growth * e)
            .collect();
        if let Some((prev, before)) = &self.last {
            let h = t - prev;
            for ((acc, a), b) in self.integrals.iter_mut().zip(before).zip(&integrand) {
                *acc += 0.5 * h * (a + b);
            }
        }
        for (m, e) in self.maxima.iter_mut().zip(energies) {
            *m = m.max(growth * e.sqrt());
        }
        self.last = Some((t, integrand));
        Ok(())
    }

    /// `sum_k 2^{ks} sup_t e^{rate t} ||Delta_k a||`.
    pub fn linf_norm(&self, s: f64) -> f64 {
        self.weighted_sum(&self.maxima, s, false)
    }

    /// `sum_k 2^{ks} (int f e^{2 rate t} ||Delta_k a||^2)^{1/2}`.
    pub fn l2_norm(&self, s: f64) -> f64 {
        self.weighted_sum(&self.integrals, s, true)
    }

    fn weighted_sum(&self, v: &[f64], s: f64, root: bool) -> f64 {
        v.iter()
            .enumerate()
            .map(|(i, x)| {
                let k = self.k_min + i as i32;
                2.0_f64.powf(k as f64 * s) * if root { x.sqrt() } else { *x }
            })
            .sum()
    }

    /// CSV header cells for [`NormSeries::csv_cells`].
    pub fn csv_header(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::with_capacity(2 * self.integrals.len());
        for i in 0..self.integrals.len() {
            let k = self.k_min + i as i32;
            out.push(format!("{prefix}.k{k}.int"));
            out.push(format!("{prefix}.k{k}.max"));
        }
        out
    }

    pub fn csv_cells(&self) -> Vec<f64> {
        self.integrals
            .iter()
            .zip(&self.maxima)
            .flat_map(|(a, b)| [*a, *b])
            .collect()
    }
}
