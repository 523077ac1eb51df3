//! Grid and field substrate.
//!
//! The strip `0 < y < 1` is periodised in `x` with period `Lx`. A [`Field`]
//! stores, for every vertical node `y_j`, the discrete Fourier coefficients
//! of one scalar unknown, normalised so that
//!
//! ```text
//! v(x_i, y_j) = sum_m c(m, j) exp(i xi_m x_i),   xi_m = 2 pi m / Lx
//! ```
//!
//! (a pure `cos(2 pi x / Lx)` therefore has coefficients `1/2` at `m = +-1`).
//! Coefficients live in FFT storage order: index `k < Nx/2` is mode `m = k`,
//! index `k = Nx/2` is the Nyquist mode `+Nx/2`, and `k > Nx/2` is `k - Nx`.
//!
//! Vertical derivatives are second-order finite differences on the uniform
//! nodes `y_j = j dy`. Fields with `Ny - 1` rows live on the half nodes
//! `y_{j+1/2}` and are used for the staggered pressure of the scaled
//! Navier-Stokes solver.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Spectral-in-x, collocated-in-y coefficients of one scalar unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    nx: usize,
    rows: usize,
    data: Vec<C64>,
}

impl Field {
    pub fn zeros(nx: usize, rows: usize) -> Self {
        Self {
            nx,
            rows,
            data: vec![C64::new(0.0, 0.0); nx * rows],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Coefficient at storage index `k`, row `j`.
    #[inline]
    pub fn at(&self, k: usize, j: usize) -> C64 {
        self.data[j * self.nx + k]
    }

    #[inline]
    pub fn at_mut(&mut self, k: usize, j: usize) -> &mut C64 {
        &mut self.data[j * self.nx + k]
    }

    pub fn row(&self, j: usize) -> &[C64] {
        &self.data[j * self.nx..(j + 1) * self.nx]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.nx..(j + 1) * self.nx]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Storage index of signed mode `m`.
    pub fn index_of(&self, m: i64) -> usize {
        mode_index(self.nx, m)
    }

    /// Coefficient of signed mode `m` at row `j`.
    pub fn coeff(&self, m: i64, j: usize) -> C64 {
        self.at(self.index_of(m), j)
    }

    pub fn set_coeff(&mut self, m: i64, j: usize, value: C64) {
        let k = self.index_of(m);
        *self.at_mut(k, j) = value;
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|z| *z *= c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert_eq!(self.data.len(), other.data.len(), "field shapes differ");
        for (z, w) in self.data.iter_mut().zip(&other.data) {
            *z += a * w;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// First non-finite coefficient, as `(storage index, row)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
            .map(|p| (p % self.nx, p / self.nx))
    }

    /// Largest `|c(-m, j) - conj(c(m, j))|`, relative to the largest modulus.
    /// Zero for fields that represent real functions.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for j in 0..self.rows {
            for k in 0..self.nx {
                let kk = (self.nx - k) % self.nx;
                let d = (self.at(kk, j) - self.at(k, j).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// Zeroes every row in `rows`.
    pub fn zero_rows(&mut self, rows: &[usize]) {
        for &j in rows {
            self.row_mut(j).iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        }
    }
}

impl Add<&Field> for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Field> for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&Field> for Field {
    fn add_assign(&mut self, rhs: &Field) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Field> for Field {
    fn sub_assign(&mut self, rhs: &Field) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scaled(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

fn mode_index(nx: usize, m: i64) -> usize {
    let n = nx as i64;
    assert!(
        m > -n / 2 && m <= n / 2,
        "mode {m} outside the resolved range for Nx = {nx}"
    );
    m.rem_euclid(n) as usize
}

/// Periodic-in-x, bounded-in-y discretisation.
#[derive(Clone)]
pub struct Grid {
    lx: f64,
    nx: usize,
    ny: usize,
    dy: f64,
    xi: Vec<f64>,
    ik: Vec<C64>,
    dealias_mask: Vec<bool>,
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("lx", &self.lx)
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.lx == other.lx && self.nx == other.nx && self.ny == other.ny
    }
}

impl Grid {
    pub fn new(lx: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx.is_finite() && lx > 0.0) {
            return Err(Error::InvalidGrid(format!("Lx must be positive, got {lx}")));
        }
        if nx < 4 || nx % 2 != 0 {
            return Err(Error::InvalidGrid(format!("Nx must be even and >= 4, got {nx}")));
        }
        if ny < 9 {
            return Err(Error::InvalidGrid(format!("Ny must be >= 9, got {ny}")));
        }
        let dy = 1.0 / (ny - 1) as f64;
        let xi: Vec<f64> = (0..nx)
            .map(|k| 2.0 * std::f64::consts::PI * mode_of(nx, k) as f64 / lx)
            .collect();
        // The Nyquist mode has no real odd derivative.
        let ik = (0..nx)
            .map(|k| if k == nx / 2 { C64::new(0.0, 0.0) } else { I * xi[k] })
            .collect();
        let keep = ((nx - 1) / 3) as i64;
        let dealias_mask = (0..nx).map(|k| mode_of(nx, k).abs() <= keep).collect();
        let mut weights = vec![dy; ny];
        weights[0] = 0.5 * dy;
        weights[ny - 1] = 0.5 * dy;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(nx);
        let ifft = planner.plan_fft_inverse(nx);
        Ok(Self {
            lx,
            nx,
            ny,
            dy,
            xi,
            ik,
            dealias_mask,
            weights,
            fft,
            ifft,
        })
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.dy
    }

    /// `y_j`; the last node is exactly 1.
    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny - 1 {
            1.0
        } else {
            j as f64 * self.dy
        }
    }

    /// Half node `y_{j+1/2}`.
    pub fn y_half(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.lx / self.nx as f64
    }

    /// Signed mode number of storage index `k`.
    pub fn mode(&self, k: usize) -> i64 {
        mode_of(self.nx, k)
    }

    pub fn index_of(&self, m: i64) -> usize {
        mode_index(self.nx, m)
    }

    /// Frequency `xi` of storage index `k`.
    pub fn xi(&self, k: usize) -> f64 {
        self.xi[k]
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.xi
    }

    /// Symbol of `d/dx` (zero at the Nyquist index).
    pub fn ik(&self, k: usize) -> C64 {
        self.ik[k]
    }

    pub fn nyquist_xi(&self) -> f64 {
        self.xi[self.nx / 2].abs()
    }

    /// Whether storage index `k` survives 2/3-rule dealiasing.
    pub fn is_resolved(&self, k: usize) -> bool {
        self.dealias_mask[k]
    }

    /// Trapezoid weights on the `Ny` nodes.
    pub fn trapezoid_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.nx, self.ny)
    }

    /// Zero field on the `Ny - 1` half nodes.
    pub fn zeros_half(&self) -> Field {
        Field::zeros(self.nx, self.ny - 1)
    }

    fn check_rows(&self, f: &Field) {
        assert_eq!(f.nx, self.nx, "field Nx does not match grid");
        assert_eq!(f.rows, self.ny, "operation requires a node-centred field");
    }

    /// Forward transform of real values laid out row-major as `[j * Nx + i]`.
    pub fn to_spectral(&self, values: &[f64]) -> Result<Field> {
        self.to_spectral_rows(values, self.ny)
    }

    /// As [`Grid::to_spectral`] for an arbitrary number of rows.
    pub fn to_spectral_rows(&self, values: &[f64], rows: usize) -> Result<Field> {
        let expected = self.nx * rows;
        if values.len() != expected {
            return Err(Error::Shape {
                expected_nx: self.nx,
                expected_rows: rows,
                expected,
                got: values.len(),
            });
        }
        let mut out = Field::zeros(self.nx, rows);
        let norm = 1.0 / self.nx as f64;
        for j in 0..rows {
            let row = out.row_mut(j);
            for (z, &v) in row.iter_mut().zip(&values[j * self.nx..(j + 1) * self.nx]) {
                *z = C64::new(v, 0.0);
            }
            self.fft.process(row);
            row.iter_mut().for_each(|z| *z *= norm);
        }
        Ok(out)
    }

    /// Inverse transform; returns the real part row-major as `[j * Nx + i]`.
    pub fn to_physical(&self, f: &Field) -> Vec<f64> {
        assert_eq!(f.nx, self.nx, "field Nx does not match grid");
        let mut buf = f.data.clone();
        for row in buf.chunks_mut(self.nx) {
            self.ifft.process(row);
        }
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Samples `g(x, y)` on the nodes and transforms.
    pub fn from_fn(&self, g: impl Fn(f64, f64) -> f64) -> Field {
        let mut values = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = self.y(j);
            for i in 0..self.nx {
                values.push(g(self.x(i), y));
            }
        }
        self.to_spectral(&values).expect("shape is consistent by construction")
    }

    /// Applies a per-mode multiplier to every row.
    pub fn multiply_symbol(&self, f: &Field, symbol: impl Fn(usize) -> C64) -> Field {
        assert_eq!(f.nx, self.nx, "field Nx does not match grid");
        let sym: Vec<C64> = (0..self.nx).map(symbol).collect();
        let mut out = f.clone();
        for row in out.data.chunks_mut(self.nx) {
            for (z, s) in row.iter_mut().zip(&sym) {
                *z *= s;
            }
        }
        out
    }

    pub fn dx(&self, f: &Field) -> Field {
        self.multiply_symbol(f, |k| self.ik[k])
    }

    pub fn dxx(&self, f: &Field) -> Field {
        self.multiply_symbol(f, |k| C64::new(-self.xi[k] * self.xi[k], 0.0))
    }

    /// `|D_x|^s`; for `s < 0` the mean mode is set to zero.
    pub fn frac_dx(&self, f: &Field, s: f64) -> Field {
        self.multiply_symbol(f, |k| {
            let a = self.xi[k].abs();
            if a == 0.0 {
                if s == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            } else {
                C64::new(a.powf(s), 0.0)
            }
        })
    }

    /// Second-order `d/dy`: centred inside, one-sided at both walls.
    pub fn dy(&self, f: &Field) -> Field {
        self.check_rows(f);
        let n = self.ny;
        let h2 = 0.5 / self.dy;
        let mut out = Field::zeros(self.nx, n);
        for k in 0..self.nx {
            *out.at_mut(k, 0) = (-3.0 * f.at(k, 0) + 4.0 * f.at(k, 1) - f.at(k, 2)) * h2;
            for j in 1..n - 1 {
                *out.at_mut(k, j) = (f.at(k, j + 1) - f.at(k, j - 1)) * h2;
            }
            *out.at_mut(k, n - 1) =
                (3.0 * f.at(k, n - 1) - 4.0 * f.at(k, n - 2) + f.at(k, n - 3)) * h2;
        }
        out
    }

    /// Second-order `d^2/dy^2`: centred inside, one-sided four-point at walls.
    pub fn dyy(&self, f: &Field) -> Field {
        self.check_rows(f);
        let n = self.ny;
        let inv = 1.0 / (self.dy * self.dy);
        let mut out = Field::zeros(self.nx, n);
        for k in 0..self.nx {
            *out.at_mut(k, 0) = (2.0 * f.at(k, 0) - 5.0 * f.at(k, 1) + 4.0 * f.at(k, 2)
                - f.at(k, 3))
                * inv;
            for j in 1..n - 1 {
                *out.at_mut(k, j) = (f.at(k, j + 1) - 2.0 * f.at(k, j) + f.at(k, j - 1)) * inv;
            }
            *out.at_mut(k, n - 1) = (2.0 * f.at(k, n - 1) - 5.0 * f.at(k, n - 2)
                + 4.0 * f.at(k, n - 3)
                - f.at(k, n - 4))
                * inv;
        }
        out
    }

    /// Cumulative trapezoid integral from `y = 0`.
    pub fn integrate_y(&self, f: &Field) -> Field {
        self.check_rows(f);
        let half = 0.5 * self.dy;
        let mut out = Field::zeros(self.nx, self.ny);
        for j in 1..self.ny {
            for k in 0..self.nx {
                let v = out.at(k, j - 1) + half * (f.at(k, j - 1) + f.at(k, j));
                *out.at_mut(k, j) = v;
            }
        }
        out
    }

    /// Trapezoid integral over `[0, 1]`, one value per mode.
    pub fn mean_y(&self, f: &Field) -> Vec<C64> {
        self.check_rows(f);
        let mut out = vec![C64::new(0.0, 0.0); self.nx];
        for (j, w) in self.weights.iter().enumerate() {
            for (o, z) in out.iter_mut().zip(f.row(j)) {
                *o += w * z;
            }
        }
        out
    }

    /// Largest `|int_0^1 f dy|` over the physical `x` nodes.
    pub fn max_vertical_mean(&self, f: &Field) -> f64 {
        let mut mean = self.mean_y(f);
        self.ifft.process(&mut mean);
        mean.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    fn row_weights(&self, rows: usize) -> Vec<f64> {
        if rows == self.ny {
            self.weights.clone()
        } else if rows + 1 == self.ny {
            vec![self.dy; rows]
        } else {
            panic!("field with {rows} rows does not live on this grid");
        }
    }

    /// Per-mode energy `Lx * sum_j w_j |c(m, j)|^2`; sums to the squared L2 norm.
    pub fn mode_energy(&self, f: &Field) -> Vec<f64> {
        assert_eq!(f.nx, self.nx, "field Nx does not match grid");
        let w = self.row_weights(f.rows);
        let mut out = vec![0.0; self.nx];
        for (j, wj) in w.iter().enumerate() {
            for (o, z) in out.iter_mut().zip(f.row(j)) {
                *o += wj * z.norm_sqr();
            }
        }
        out.iter_mut().for_each(|e| *e *= self.lx);
        out
    }

    /// L2 norm over one period of the strip: Parseval in `x`, trapezoid in
    /// `y` (midpoint rule for half-node fields).
    pub fn l2_norm(&self, f: &Field) -> f64 {
        self.mode_energy(f).iter().sum::<f64>().sqrt()
    }

    /// Real L2 inner product.
    pub fn inner(&self, f: &Field, g: &Field) -> f64 {
        assert_eq!(f.rows, g.rows, "field shapes differ");
        let w = self.row_weights(f.rows);
        let mut acc = 0.0;
        for (j, wj) in w.iter().enumerate() {
            let s: f64 = f
                .row(j)
                .iter()
                .zip(g.row(j))
                .map(|(a, b)| (a * b.conj()).re)
                .sum();
            acc += wj * s;
        }
        acc * self.lx
    }

    /// 2/3-rule: zeroes every mode with `|m| > (Nx - 1) / 3`.
    pub fn dealias(&self, f: &mut Field) {
        for row in f.data.chunks_mut(self.nx) {
            for (z, &keep) in row.iter_mut().zip(&self.dealias_mask) {
                if !keep {
                    *z = C64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Dealiased pointwise product.
    pub fn product(&self, f: &Field, g: &Field) -> Field {
        assert_eq!(f.rows, g.rows, "field shapes differ");
        let a = self.to_physical(f);
        let b = self.to_physical(g);
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = self
            .to_spectral_rows(&ab, f.rows)
            .expect("shape is consistent by construction");
        self.dealias(&mut out);
        out
    }

    /// Dealiased `u d_x f + v d_y f` for every `f` in `targets`.
    pub fn advection(&self, u: &Field, v: &Field, targets: &[&Field]) -> Vec<Field> {
        let pu = self.to_physical(u);
        let pv = self.to_physical(v);
        targets
            .iter()
            .map(|f| {
                let fx = self.to_physical(&self.dx(f));
                let fy = self.to_physical(&self.dy(f));
                let n: Vec<f64> = (0..pu.len())
                    .map(|p| pu[p] * fx[p] + pv[p] * fy[p])
                    .collect();
                let mut out = self
                    .to_spectral(&n)
                    .expect("shape is consistent by construction");
                self.dealias(&mut out);
                out
            })
            .collect()
    }
}

fn mode_of(nx: usize, k: usize) -> i64 {
    if k <= nx / 2 {
        k as i64
    } else {
        k as i64 - nx as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(2.0 * PI, 16, 17).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0.0, 16, 17).is_err());
        assert!(Grid::new(1.0, 15, 17).is_err());
        assert!(Grid::new(1.0, 16, 8).is_err());
        let g = Grid::new(1.0, 16, 9).unwrap();
        assert_eq!(g.y(0), 0.0);
        assert_eq!(g.y(8), 1.0);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = grid();
        let err = g.to_spectral(&[0.0; 10]).unwrap_err();
        assert!(matches!(err, Error::Shape { expected: 272, got: 10, .. }));
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = grid();
        let f = g.from_fn(|_, _| 1.0);
        for j in 0..g.ny() {
            assert!((f.coeff(0, j) - C64::new(1.0, 0.0)).norm() < 1e-15);
            for k in 1..g.nx() {
                assert!(f.at(k, j).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cosine_coefficients_are_one_half() {
        let g = Grid::new(3.0, 16, 9).unwrap();
        let f = g.from_fn(|x, _| (2.0 * PI * x / 3.0).cos());
        for j in 0..g.ny() {
            for k in 0..g.nx() {
                let m = g.mode(k);
                let want = if m.abs() == 1 { 0.5 } else { 0.0 };
                assert!((f.at(k, j) - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dx_of_sine_mode() {
        let g = Grid::new(3.0, 16, 9).unwrap();
        let c = 2.0 * PI / 3.0;
        let f = g.from_fn(|x, y| (c * x).sin() * (1.0 + y * y));
        let want = g.from_fn(|x, y| c * (c * x).cos() * (1.0 + y * y));
        assert!((&g.dx(&f) - &want).max_abs() < 1e-14);
        let cst = g.from_fn(|_, y| y);
        assert!(g.dx(&cst).max_abs() < 1e-15);
    }

    #[test]
    fn dx_matches_fourth_order_differences() {
        // finite-difference oracle on a band-limited field: error shrinks like dx^4
        let err = |nx: usize| {
            let g = Grid::new(2.0 * PI, nx, 9).unwrap();
            let f = g.from_fn(|x, y| (x.sin() + 0.5 * (2.0 * x).cos()) * (1.0 + y));
            let d = g.to_physical(&g.dx(&f));
            let v = g.to_physical(&f);
            let h = g.lx() / nx as f64;
            let mut worst = 0.0_f64;
            for j in 0..g.ny() {
                for i in 0..nx {
                    let at = |o: isize| v[j * nx + ((i as isize + o).rem_euclid(nx as isize)) as usize];
                    let fd = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
                    worst = worst.max((fd - d[j * nx + i]).abs());
                }
            }
            worst
        };
        let ratio = err(32) / err(64);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn frac_dx_identities() {
        let g = grid();
        let f = g.from_fn(|x, y| (3.0 * x).sin() * y + (x).cos());
        assert!((&g.frac_dx(&f, 0.0) - &f).max_abs() < 1e-15);
        let twice = g.frac_dx(&g.frac_dx(&f, 2.0), 2.0);
        let once = g.frac_dx(&f, 4.0);
        assert!((&twice - &once).max_abs() <= 1e-13 * once.max_abs());
        let single = g.from_fn(|x, _| x.cos());
        let half = g.frac_dx(&single, 0.5);
        // xi = 1 on this grid; use Lx = 1 for xi = 2 pi
        assert!((&half - &single).max_abs() < 1e-14);
        let g1 = Grid::new(1.0, 16, 9).unwrap();
        let s1 = g1.from_fn(|x, _| (2.0 * PI * x).cos());
        let h1 = g1.frac_dx(&s1, 0.5);
        assert!((h1.coeff(1, 3).re - 0.5 * (2.0 * PI).sqrt()).abs() < 1e-14);
        let neg = g.frac_dx(&g.from_fn(|_, _| 1.0), -1.0);
        assert!(neg.max_abs() == 0.0);
    }

    #[test]
    fn dx_commutes_with_frac_dx() {
        let g = grid();
        let f = g.from_fn(|x, y| (2.0 * x).sin() * y * y + (5.0 * x).cos());
        let a = g.dx(&g.frac_dx(&f, 0.75));
        let b = g.frac_dx(&g.dx(&f), 0.75);
        assert!((&a - &b).max_abs() < 1e-13);
    }

    #[test]
    fn dyy_exact_on_quadratics() {
        let g = grid();
        let f = g.from_fn(|x, y| y * y * (1.0 + 0.1 * x.cos()));
        let d = g.dyy(&f);
        for j in 1..g.ny() - 1 {
            assert!((d.coeff(0, j).re - 2.0).abs() < 1e-10);
            assert!((d.coeff(1, j).re - 0.1).abs() < 1e-10);
        }
        let c = g.from_fn(|x, _| x.sin());
        assert!(g.dy(&c).max_abs() < 1e-12);
        assert!(g.dyy(&c).max_abs() < 1e-9);
    }

    #[test]
    fn dy_converges_at_second_order() {
        let err = |ny: usize| {
            let g = Grid::new(2.0 * PI, 8, ny).unwrap();
            let f = g.from_fn(|_, y| (2.0 * PI * y).sin());
            let d = g.dy(&f);
            (0..ny)
                .map(|j| (d.coeff(0, j).re - 2.0 * PI * (2.0 * PI * g.y(j)).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(33) / err(65);
        assert!((3.4..4.6).contains(&ratio), "ratio {ratio}");
        let errs = |ny: usize| {
            let g = Grid::new(2.0 * PI, 8, ny).unwrap();
            let f = g.from_fn(|_, y| (2.0 * PI * y).sin());
            let d = g.dyy(&f);
            (1..ny - 1)
                .map(|j| (d.coeff(0, j).re + 4.0 * PI * PI * (2.0 * PI * g.y(j)).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = errs(33) / errs(65);
        assert!((3.4..4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trapezoid_integrals() {
        let g = grid();
        let one = g.from_fn(|_, _| 1.0);
        let c = g.integrate_y(&one);
        for j in 0..g.ny() {
            assert!((c.coeff(0, j).re - g.y(j)).abs() < 1e-15);
        }
        let s = g.from_fn(|_, y| (2.0 * PI * y).sin());
        assert!(g.mean_y(&s)[0].norm() < 1e-15);

        let err = |ny: usize| {
            let g = Grid::new(2.0 * PI, 8, ny).unwrap();
            let f = g.from_fn(|_, y| (PI * y).cos());
            let c = g.integrate_y(&f);
            (0..ny)
                .map(|j| (c.coeff(0, j).re - (PI * g.y(j)).sin() / PI).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(33) / err(65);
        assert!((3.4..4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn l2_norm_matches_physical_quadrature() {
        let g = Grid::new(2.0 * PI, 32, 33).unwrap();
        let f = g.from_fn(|x, y| x.sin() * (PI * y).sin());
        let v = g.to_physical(&f);
        let hx = g.lx() / g.nx() as f64;
        let mut q = 0.0;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                q += g.trapezoid_weights()[j] * hx * v[j * g.nx() + i].powi(2);
            }
        }
        assert!((g.l2_norm(&f) - q.sqrt()).abs() < 1e-13);
        // continuum value sqrt(pi / 2) up to the O(dy^2) trapezoid error
        assert!((g.l2_norm(&f) - (PI / 2.0).sqrt()).abs() < 1e-3);
        assert!((g.l2_norm(&f.scaled(-3.0)) - 3.0 * g.l2_norm(&f)).abs() < 1e-13);
        assert_eq!(g.l2_norm(&g.zeros()), 0.0);
    }

    #[test]
    fn dealiased_product_is_exact_for_resolved_modes() {
        let g = Grid::new(2.0 * PI, 32, 9).unwrap();
        let f = g.from_fn(|x, y| (3.0 * x).cos() * y);
        let h = g.from_fn(|x, _| (4.0 * x).sin());
        let p = g.product(&f, &h);
        let want = g.from_fn(|x, y| (3.0 * x).cos() * y * (4.0 * x).sin());
        assert!((&p - &want).max_abs() < 1e-14);
        assert!(p.conjugate_symmetry_defect() < 1e-12);
    }
}
