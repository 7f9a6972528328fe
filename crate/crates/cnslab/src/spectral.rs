//! Periodic grid, Fourier transform, differentiation, Leray decomposition
//! and norm quadrature.
//!
//! Coefficients follow the convention `f̂(η) = ∫ f(x) e^{iη·x} dx`, realized
//! discretely as `coeffs(η) = dx² Σ_j f(x_j) e^{iη·x_j}` with sample points
//! `x_j = −L/2 + j·dx`, so the box center is the origin. Under this
//! convention `∂_k` acts as multiplication by `−iη_k`.
//!
//! Fourier multipliers use an *effective* wavenumber that vanishes on the
//! Nyquist row. The Nyquist mode is its own mirror image, so any multiplier
//! odd in `η` would break realness there; zeroing it keeps Hermitian
//! symmetry exact.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order accepted by [`MultiIndex`].
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::BoxLength(length));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of grid points (equivalently, Fourier modes).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed lattice index in `−n/2 … n/2−1` for storage index `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Lattice wavenumber `2πs/L`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * self.signed_index(k) as f64 / self.length
    }

    /// Wavenumber used by every Fourier multiplier: zero on the Nyquist row.
    pub fn effective_wavenumber(&self, k: usize) -> f64 {
        if k == self.n / 2 {
            0.0
        } else {
            self.wavenumber(k)
        }
    }

    /// Effective wavevector of the mode stored at flat index `idx`.
    pub fn eta(&self, idx: usize) -> [f64; 2] {
        [
            self.effective_wavenumber(idx / self.n),
            self.effective_wavenumber(idx % self.n),
        ]
    }

    /// Physical coordinate of sample `j` along one axis.
    pub fn coord(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    /// Physical position of the sample stored at flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx / self.n), self.coord(idx % self.n)]
    }

    /// Flat index of the mode `−η`.
    pub fn mirror(&self, idx: usize) -> usize {
        let (k1, k2) = (idx / self.n, idx % self.n);
        ((self.n - k1) % self.n) * self.n + (self.n - k2) % self.n
    }

    /// True on the Nyquist row or column, where no real wavenumber exists.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = self.n / 2;
        idx / self.n == h || idx % self.n == h
    }

    /// True when the mode survives the 2/3-rule truncation.
    pub fn is_resolved(&self, idx: usize) -> bool {
        let cut = (self.n / 3) as i64;
        let (k1, k2) = (idx / self.n, idx % self.n);
        self.signed_index(k1).abs() <= cut && self.signed_index(k2).abs() <= cut
    }
}

/// Derivative multi-index `σ = (σ₁, σ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MultiIndex {
    pub s1: u32,
    pub s2: u32,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { s1: 0, s2: 0 };

    pub fn new(s1: u32, s2: u32) -> Result<Self> {
        if s1 + s2 > MAX_DERIVATIVE_ORDER {
            return Err(Error::MultiIndexOrder(s1 + s2));
        }
        Ok(Self { s1, s2 })
    }

    pub fn order(&self) -> u32 {
        self.s1 + self.s2
    }

    /// Fourier multiplier `(−iη₁)^σ₁ (−iη₂)^σ₂`.
    pub fn symbol(&self, eta: [f64; 2]) -> Complex64 {
        Complex64::new(0.0, -eta[0]).powu(self.s1) * Complex64::new(0.0, -eta[1]).powu(self.s2)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.s1, self.s2)
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft_rows(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    let scratch_len = plan.get_inplace_scratch_len();
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| plan.process_with_scratch(row, scratch),
    );
}

/// Unnormalized 2D FFT; `positive` selects the `e^{+2πi kj/n}` kernel.
fn fft2(data: &mut [Complex64], n: usize, positive: bool) {
    let p = plans(n);
    let plan = if positive { &p.inverse } else { &p.forward };
    fft_rows(data, n, plan);
    transpose(data, n);
    fft_rows(data, n, plan);
    transpose(data, n);
}

fn checkerboard(idx: usize, n: usize) -> f64 {
    if (idx / n + idx % n) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Scalar field stored as Fourier coefficients on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Samples `f` at the grid points and transforms.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let [x1, x2] = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        transform_unchecked(grid, &values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> Vec<f64> {
        inverse_transform(self)
    }

    /// Mode-wise map `c ↦ f(η, c)` with the effective wavevector.
    pub fn map_modes(&self, f: impl Fn(usize, [f64; 2], Complex64) -> Complex64 + Sync) -> Self {
        let grid = self.grid;
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(idx, &c)| f(idx, grid.eta(idx), c))
            .collect();
        Self { grid, coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        ensure_same(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * s)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Zero every mode outside the 2/3-rule band.
    pub fn dealias(&mut self) {
        let grid = self.grid;
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !grid.is_resolved(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn is_dealiased(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(idx, c)| self.grid.is_resolved(idx) || (c.re == 0.0 && c.im == 0.0))
    }

    /// `max_η |c(−η) − conj c(η)|`; zero for an exactly real field.
    pub fn hermitian_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| (self.coeffs[self.grid.mirror(idx)] - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Projects onto exactly Hermitian coefficients.
    pub fn symmetrize(&mut self) {
        let old = self.coeffs.clone();
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            let m = old[self.grid.mirror(idx)];
            *c = 0.5 * (old[idx] + m.conj());
        }
    }

    /// `∫ f dx`, the zero mode.
    pub fn integral(&self) -> f64 {
        self.coeffs[0].re
    }

    /// L² norm from Parseval: `‖f‖₂ = (Σ|c|²)^{1/2} / L`.
    pub fn l2_parseval(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / self.grid.length
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn ensure_same(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn transform_unchecked(grid: Grid, values: &[f64]) -> SpectralField {
    let n = grid.n;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, n, true);
    let w = grid.dx() * grid.dx();
    for (idx, c) in buf.iter_mut().enumerate() {
        *c *= w * checkerboard(idx, n);
    }
    SpectralField { grid, coeffs: buf }
}

/// Physical samples (row-major, first index along `x₁`) to coefficients.
pub fn transform(grid: Grid, values: &[f64]) -> Result<SpectralField> {
    if values.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(transform_unchecked(grid, values))
}

/// Coefficients to physical samples, keeping the real part.
pub fn inverse_transform(f: &SpectralField) -> Vec<f64> {
    inverse_transform_complex(f)
        .into_iter()
        .map(|c| c.re)
        .collect()
}

pub(crate) fn inverse_transform_complex(f: &SpectralField) -> Vec<Complex64> {
    let grid = f.grid;
    let n = grid.n;
    let mut buf: Vec<Complex64> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * checkerboard(idx, n))
        .collect();
    fft2(&mut buf, n, false);
    let w = 1.0 / (grid.length * grid.length);
    buf.iter_mut().for_each(|c| *c *= w);
    buf
}

pub fn derivative(f: &SpectralField, sigma: MultiIndex) -> SpectralField {
    if sigma == MultiIndex::ZERO {
        return f.clone();
    }
    f.map_modes(|_, eta, c| c * sigma.symbol(eta))
}

/// `R̂∥(η) = η ᵗη/|η|²`; the zero wavevector maps to the zero matrix.
pub fn parallel_projector(eta: [f64; 2]) -> [[f64; 2]; 2] {
    let r2 = eta[0] * eta[0] + eta[1] * eta[1];
    if r2 == 0.0 {
        return [[0.0; 2]; 2];
    }
    [
        [eta[0] * eta[0] / r2, eta[0] * eta[1] / r2],
        [eta[0] * eta[1] / r2, eta[1] * eta[1] / r2],
    ]
}

/// Splits `m` into its divergence-free and curl-free parts. The mean of `m`
/// goes entirely to the divergence-free part.
pub fn leray_decompose(m: &[SpectralField; 2]) -> Result<([SpectralField; 2], [SpectralField; 2])> {
    ensure_same(&m[0].grid, &m[1].grid)?;
    let grid = m[0].grid;
    let mut perp = [SpectralField::zeros(grid), SpectralField::zeros(grid)];
    let mut par = [SpectralField::zeros(grid), SpectralField::zeros(grid)];
    for idx in 0..grid.len() {
        let r = parallel_projector(grid.eta(idx));
        let v = [m[0].coeffs[idx], m[1].coeffs[idx]];
        for i in 0..2 {
            let p = v[0] * r[i][0] + v[1] * r[i][1];
            par[i].coeffs[idx] = p;
            perp[i].coeffs[idx] = v[i] - p;
        }
    }
    Ok((perp, par))
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Exponent(p))
    }
}

/// Riemann-sum `L^p` norm of nonnegative samples with cell area `dx²`.
pub fn lp_norm_samples(magnitudes: &[f64], dx: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(magnitudes.iter().fold(0.0, |m, &v| m.max(v.abs())));
    }
    let area = dx * dx;
    if p == 1.0 {
        return Ok(magnitudes.iter().map(|v| v.abs()).sum::<f64>() * area);
    }
    if p == 2.0 {
        return Ok((magnitudes.iter().map(|v| v * v).sum::<f64>() * area).sqrt());
    }
    Ok((magnitudes.iter().map(|v| v.abs().powf(p)).sum::<f64>() * area).powf(1.0 / p))
}

pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    lp_norm_samples(&inverse_transform(f), f.grid.dx(), p)
}

/// Pointwise Euclidean magnitude of a family of fields, in physical space.
pub fn magnitude(fields: &[&SpectralField]) -> Result<Vec<f64>> {
    let Some(first) = fields.first() else {
        return Err(Error::InvalidArgument("no fields given".into()));
    };
    let mut acc = vec![0.0; first.grid.len()];
    for f in fields {
        ensure_same(&first.grid, &f.grid)?;
        for (a, v) in acc.iter_mut().zip(inverse_transform(f)) {
            *a += v * v;
        }
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    Ok(acc)
}

/// `L^p` norm of the pointwise Euclidean magnitude of a vector field.
pub fn lp_norm_vector(fields: &[&SpectralField], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let mags = magnitude(fields)?;
    lp_norm_samples(&mags, fields[0].grid.dx(), p)
}

/// The pair `X = (ρ̃, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub rho: SpectralField,
    pub m: [SpectralField; 2],
}

impl State {
    pub fn new(rho: SpectralField, m: [SpectralField; 2]) -> Result<Self> {
        ensure_same(&rho.grid, &m[0].grid)?;
        ensure_same(&rho.grid, &m[1].grid)?;
        Ok(Self { rho, m })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            rho: SpectralField::zeros(grid),
            m: [SpectralField::zeros(grid), SpectralField::zeros(grid)],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.rho.grid
    }

    pub fn fields(&self) -> [&SpectralField; 3] {
        [&self.rho, &self.m[0], &self.m[1]]
    }

    pub fn fields_mut(&mut self) -> [&mut SpectralField; 3] {
        let [m0, m1] = &mut self.m;
        [&mut self.rho, m0, m1]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rho: self.rho.scale(s),
            m: [self.m[0].scale(s), self.m[1].scale(s)],
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        Ok(Self {
            rho: self.rho.axpy(s, &other.rho)?,
            m: [
                self.m[0].axpy(s, &other.m[0])?,
                self.m[1].axpy(s, &other.m[1])?,
            ],
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn dealias(&mut self) {
        self.fields_mut()
            .into_iter()
            .for_each(SpectralField::dealias);
    }

    pub fn symmetrize(&mut self) {
        self.fields_mut()
            .into_iter()
            .for_each(SpectralField::symmetrize);
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.fields()
            .iter()
            .map(|f| f.hermitian_defect())
            .fold(0.0, f64::max)
    }

    /// Parseval L² norm of the three components together.
    pub fn l2(&self) -> f64 {
        self.fields()
            .iter()
            .map(|f| f.l2_parseval().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.fields()
            .iter()
            .map(|f| f.max_abs_coeff())
            .fold(0.0, f64::max)
    }
}

/// `(Σ_η (1+|η|²)^s |X̂(η)|²)^{1/2} / L`, the discrete `H^s` norm.
pub fn sobolev_norm(x: &State, s: i64) -> Result<f64> {
    if s < 0 {
        return Err(Error::SobolevIndex(s));
    }
    let grid = *x.grid();
    let n = grid.n;
    let sum: f64 = (0..grid.len())
        .map(|idx| {
            let k1 = grid.wavenumber(idx / n);
            let k2 = grid.wavenumber(idx % n);
            let w = (1.0 + k1 * k1 + k2 * k2).powi(s as i32);
            w * x
                .fields()
                .iter()
                .map(|f| f.coeffs[idx].norm_sqr())
                .sum::<f64>()
        })
        .sum();
    Ok(sum.sqrt() / grid.length)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(32, 10.0).unwrap()
    }

    #[test]
    fn grid_validation_and_lattice() {
        assert!(matches!(Grid::new(6, 1.0), Err(Error::GridSize(6))));
        assert!(matches!(Grid::new(16, 0.0), Err(Error::BoxLength(_))));
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let ks: Vec<f64> = (0..8).map(|k| g.wavenumber(k)).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(Grid::new(256, 200.0).unwrap().dx(), 0.78125);
    }

    #[test]
    fn constant_field_has_only_the_zero_mode() {
        let g = grid();
        let f = SpectralField::from_fn(g, |_, _| 3.0);
        assert!((f.coeffs[0].re - 300.0).abs() < 1e-10);
        let rest = f.coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-10);
    }

    #[test]
    fn cosine_hits_two_modes() {
        let g = grid();
        let l = g.length();
        let f = SpectralField::from_fn(g, |x1, _| (2.0 * PI * x1 / l).cos());
        let big: Vec<usize> = (0..g.len())
            .filter(|&i| f.coeffs[i].norm() > 1e-8)
            .collect();
        assert_eq!(big, vec![g.n(), (g.n() - 1) * g.n()]);
        // ∫ cos(2πx/L) e^{iηx} dx over the box equals L²/2 at η = ±2π/L.
        assert!((f.coeffs[g.n()].norm() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid();
        let l = g.length();
        let k = 2.0 * PI / l;
        let f = SpectralField::from_fn(g, |x1, _| (k * x1).sin());
        let d = derivative(&f, MultiIndex::new(1, 0).unwrap());
        for (idx, v) in d.values().iter().enumerate() {
            let x1 = g.point(idx)[0];
            assert!((v - k * (k * x1).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn multi_index_cap() {
        assert!(MultiIndex::new(4, 4).is_ok());
        assert!(matches!(
            MultiIndex::new(5, 4),
            Err(Error::MultiIndexOrder(9))
        ));
    }

    #[test]
    fn lp_norm_rejects_small_p() {
        let f = SpectralField::zeros(grid());
        assert!(matches!(lp_norm(&f, 0.5), Err(Error::Exponent(_))));
    }

    #[test]
    fn sobolev_norm_basics() {
        let g = grid();
        let x = State::zeros(g);
        assert_eq!(sobolev_norm(&x, 2).unwrap(), 0.0);
        assert!(matches!(sobolev_norm(&x, -1), Err(Error::SobolevIndex(-1))));
    }
}
