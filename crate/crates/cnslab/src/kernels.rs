//! Fourier symbols of the linearized Green kernels, the artificial-viscosity
//! approximation, the heat and wave kernels, frequency splitting and the
//! pointwise-bound report.
//!
//! Every symbol used here has the same per-mode structure, captured by
//! [`ModeBlock`]: a scalar density entry, off-diagonal entries proportional
//! to `iη`, and a momentum block `d R̂∥ + e R̂⊥`. Sign conventions follow the
//! derivative multiplier `−iη`, so `∂_t ρ̂ = iη·m̂` for the linear flow.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phi::{exp_divided_difference, COALESCENCE_THRESHOLD};
use crate::profiles::FluidParams;
use crate::spectral::{
    ensure_same, inverse_transform, lp_norm_samples, parallel_projector, Grid, MultiIndex,
    SpectralField, State,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense 3×3 block acting on `(ρ̂, m̂₁, m̂₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block3(pub [[Complex64; 3]; 3]);

impl Block3 {
    pub fn identity() -> Self {
        let mut b = [[ZERO; 3]; 3];
        (0..3).for_each(|i| b[i][i] = ONE);
        Block3(b)
    }

    pub fn zero() -> Self {
        Block3([[ZERO; 3]; 3])
    }

    pub fn mul(&self, other: &Block3) -> Block3 {
        let mut out = [[ZERO; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Block3(out)
    }

    pub fn add(&self, other: &Block3) -> Block3 {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Block3) -> Block3 {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Block3 {
        self.zip(self, |a, _| a * s)
    }

    fn zip(&self, other: &Block3, f: impl Fn(Complex64, Complex64) -> Complex64) -> Block3 {
        let mut out = [[ZERO; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(self.0[i][j], other.0[i][j]);
            }
        }
        Block3(out)
    }

    pub fn apply(&self, v: [Complex64; 3]) -> [Complex64; 3] {
        let b = &self.0;
        [
            b[0][0] * v[0] + b[0][1] * v[1] + b[0][2] * v[2],
            b[1][0] * v[0] + b[1][1] * v[1] + b[1][2] * v[2],
            b[2][0] * v[0] + b[2][1] * v[1] + b[2][2] * v[2],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Block3) -> f64 {
        self.sub(other).max_abs()
    }

    /// Complex eigenvalues of the 3×3 block (characteristic polynomial
    /// roots, refined by Newton steps).
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        let m = &self.0;
        let tr = m[0][0] + m[1][1] + m[2][2];
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        // z³ − tr z² + minors z − det, solved by Durand–Kerner.
        let p = |z: Complex64| ((z - tr) * z + minors) * z - det;
        let mut roots = [
            Complex64::new(0.4, 0.9),
            Complex64::new(0.4, 0.9).powu(2),
            Complex64::new(0.4, 0.9).powu(3),
        ];
        for _ in 0..500 {
            let prev = roots;
            for i in 0..3 {
                let mut denom = ONE;
                for j in 0..3 {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                roots[i] -= p(roots[i]) / denom;
            }
            let change = (0..3)
                .map(|i| (roots[i] - prev[i]).norm())
                .fold(0.0, f64::max);
            if change < 1e-16 {
                break;
            }
        }
        roots
    }
}

/// Compact per-mode symbol:
/// `ρ̂′ = a ρ̂ + i b η·m̂`, `m̂′ = i cb η ρ̂ + (d R̂∥ + e R̂⊥) m̂`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeBlock {
    pub a: f64,
    pub b: f64,
    pub cb: f64,
    pub d: f64,
    pub e: f64,
}

impl ModeBlock {
    pub const IDENTITY: ModeBlock = ModeBlock {
        a: 1.0,
        b: 0.0,
        cb: 0.0,
        d: 1.0,
        e: 1.0,
    };

    pub fn scale(&self, s: f64) -> ModeBlock {
        ModeBlock {
            a: self.a * s,
            b: self.b * s,
            cb: self.cb * s,
            d: self.d * s,
            e: self.e * s,
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &ModeBlock) -> ModeBlock {
        ModeBlock {
            a: self.a + s * other.a,
            b: self.b + s * other.b,
            cb: self.cb + s * other.cb,
            d: self.d + s * other.d,
            e: self.e + s * other.e,
        }
    }

    pub fn to_block3(&self, eta: [f64; 2]) -> Block3 {
        let r = parallel_projector(eta);
        let r2 = eta[0] * eta[0] + eta[1] * eta[1];
        let mut b = [[ZERO; 3]; 3];
        b[0][0] = Complex64::new(self.a, 0.0);
        for j in 0..2 {
            b[0][j + 1] = I * (self.b * eta[j]);
            b[j + 1][0] = I * (self.cb * eta[j]);
            for k in 0..2 {
                let delta = if j == k { 1.0 } else { 0.0 };
                // At η = 0 the whole momentum belongs to the R̂⊥ part.
                let perp = if r2 == 0.0 { delta } else { delta - r[j][k] };
                b[j + 1][k + 1] = Complex64::new(self.d * r[j][k] + self.e * perp, 0.0);
            }
        }
        Block3(b)
    }

    pub fn apply(&self, eta: [f64; 2], v: [Complex64; 3]) -> [Complex64; 3] {
        let r2 = eta[0] * eta[0] + eta[1] * eta[1];
        let dot = eta[0] * v[1] + eta[1] * v[2];
        let rho = self.a * v[0] + I * (self.b * dot);
        if r2 == 0.0 {
            return [rho, v[1] * self.e, v[2] * self.e];
        }
        let q = dot / r2;
        let (p1, p2) = (eta[0] * q, eta[1] * q);
        let src = I * (self.cb * v[0]);
        [
            rho,
            src * eta[0] + p1 * self.d + (v[1] - p1) * self.e,
            src * eta[1] + p2 * self.d + (v[2] - p2) * self.e,
        ]
    }
}

/// `λ± = −½μ∥|η|² ± ½√(μ∥²|η|⁴ − 4c²|η|²)` in kinematic units, from `|η|²`.
pub fn eigenvalues_r2(r2: f64, params: &FluidParams) -> (Complex64, Complex64) {
    if r2 == 0.0 {
        return (ZERO, ZERO);
    }
    let nu = params.nu_par();
    let c2 = params.c().powi(2);
    let disc = nu * nu * r2 * r2 - 4.0 * c2 * r2;
    if disc >= 0.0 {
        let lm = -0.5 * (nu * r2 + disc.sqrt());
        // λ⁺λ⁻ = c²|η|² avoids cancellation in λ⁺.
        (Complex64::new(c2 * r2 / lm, 0.0), Complex64::new(lm, 0.0))
    } else {
        let re = -0.5 * nu * r2;
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

pub fn eigenvalues(eta: [f64; 2], params: &FluidParams) -> (Complex64, Complex64) {
    eigenvalues_r2(eta[0] * eta[0] + eta[1] * eta[1], params)
}

/// The kernel families with closed-form symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    /// `S∥`, Green kernel of the curl-free system, acting on all of `m`.
    Parallel,
    /// `S`, Green kernel of the full linearized system.
    Full,
    /// `S̃∥`, Green kernel of the artificial-viscosity system.
    ArtificialParallel,
    /// `S̃ = S̃∥ ⋆ diag(δ₀, R∥) + diag(0, K_μ ⋆ R⊥)`.
    Artificial,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Time {
            expected: "nonnegative",
            got: t,
        })
    }
}

fn compressible_mode(t: f64, r2: f64, params: &FluidParams) -> ModeBlock {
    let (lp, lm) = eigenvalues_r2(r2, params);
    let c2 = params.c().powi(2);
    let phi = exp_divided_difference(t, lp, lm);
    let (a, d) = if (lp - lm).norm() * t >= COALESCENCE_THRESHOLD {
        let delta = lp - lm;
        let (ep, em) = ((lp * t).exp(), (lm * t).exp());
        ((lp * em - lm * ep) / delta, (lp * ep - lm * em) / delta)
    } else {
        let ep = (lp * t).exp();
        (ep - lp * phi, ep + lm * phi)
    };
    ModeBlock {
        a: a.re,
        b: phi.re,
        cb: c2 * phi.re,
        d: d.re,
        e: (-params.nu_par() * r2 * t).exp(),
    }
}

fn artificial_mode(t: f64, r2: f64, params: &FluidParams) -> ModeBlock {
    let c = params.c();
    let k = c * r2.sqrt();
    let heat = (-0.5 * params.nu_par() * r2 * t).exp();
    let cos = (k * t).cos();
    // sin(c|η|t)/(c|η|) → t as |η| → 0.
    let sinc = if k * t < 1e-6 {
        t * (1.0 - (k * t).powi(2) / 6.0)
    } else {
        (k * t).sin() / k
    };
    ModeBlock {
        a: heat * cos,
        b: heat * sinc,
        cb: c * c * heat * sinc,
        d: heat * cos,
        e: heat,
    }
}

/// Compact symbol of `kind` at time `t` for `|η|² = r2`.
pub fn mode_block(kind: KernelKind, t: f64, r2: f64, params: &FluidParams) -> ModeBlock {
    let heat = (-params.nu() * r2 * t).exp();
    match kind {
        KernelKind::Parallel => compressible_mode(t, r2, params),
        KernelKind::Full => ModeBlock {
            e: heat,
            ..compressible_mode(t, r2, params)
        },
        KernelKind::ArtificialParallel => artificial_mode(t, r2, params),
        KernelKind::Artificial => ModeBlock {
            e: heat,
            ..artificial_mode(t, r2, params)
        },
    }
}

fn symbol_at(kind: KernelKind, t: f64, eta: [f64; 2], params: &FluidParams) -> Result<Block3> {
    check_time(t)?;
    Ok(mode_block(kind, t, eta[0] * eta[0] + eta[1] * eta[1], params).to_block3(eta))
}

/// `Ŝ∥(t,η)`.
pub fn spar_symbol(t: f64, eta: [f64; 2], params: &FluidParams) -> Result<Block3> {
    symbol_at(KernelKind::Parallel, t, eta, params)
}

/// `Ŝ(t,η) = Ŝ∥ diag(1, R̂∥) + diag(0, e^{−ν|η|²t} R̂⊥)`.
pub fn s_symbol(t: f64, eta: [f64; 2], params: &FluidParams) -> Result<Block3> {
    symbol_at(KernelKind::Full, t, eta, params)
}

/// `Ŝ̃∥(t,η) = e^{−½μ∥|η|²t} Ŵ(t,η)`.
pub fn artificial_par_symbol(t: f64, eta: [f64; 2], params: &FluidParams) -> Result<Block3> {
    symbol_at(KernelKind::ArtificialParallel, t, eta, params)
}

/// Composed artificial symbol `Ŝ̃`.
pub fn artificial_symbol(t: f64, eta: [f64; 2], params: &FluidParams) -> Result<Block3> {
    symbol_at(KernelKind::Artificial, t, eta, params)
}

/// Heat symbol `e^{−ν|η|²t}`.
pub fn heat_symbol(t: f64, eta: [f64; 2], nu: f64) -> f64 {
    (-nu * (eta[0] * eta[0] + eta[1] * eta[1]) * t).exp()
}

/// Wave kernel `w(t,x) = 1/(2πc√(c²t² − |x|²))` inside the light cone.
pub fn wave_kernel_w(t: f64, x: [f64; 2], c: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Time {
            expected: "positive",
            got: t,
        });
    }
    let r2 = x[0] * x[0] + x[1] * x[1];
    let ct2 = c * c * t * t;
    if r2 >= ct2 {
        return Ok(0.0);
    }
    Ok(1.0 / (2.0 * std::f64::consts::PI * c * (ct2 - r2).sqrt()))
}

/// Radial cutoff: 1 for `|η| ≤ R0`, 0 for `|η| ≥ R0 + 1`, quintic in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    r0: f64,
}

impl CutoffSpec {
    pub fn new(r0: f64) -> Result<Self> {
        if r0 > 0.0 && r0.is_finite() {
            Ok(Self { r0 })
        } else {
            Err(Error::InvalidArgument(format!(
                "cutoff radius must be positive, got {r0}"
            )))
        }
    }

    /// `R0 = 2c/μ∥ + 1`: the acoustic double root sits inside the low band.
    pub fn default_for(params: &FluidParams) -> Self {
        Self {
            r0: 2.0 * params.c() / params.nu_par() + 1.0,
        }
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }
}

pub fn cutoff(eta: [f64; 2], cut: &CutoffSpec) -> f64 {
    let r = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
    let s = r - cut.r0;
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Symbol sampled on every mode of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSymbol {
    grid: Grid,
    pub entries: Vec<Block3>,
}

impl KernelSymbol {
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Block3 + Sync) -> Self {
        let entries = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.eta(idx)))
            .collect();
        Self { grid, entries }
    }

    pub fn identity(grid: Grid) -> Self {
        Self {
            grid,
            entries: vec![Block3::identity(); grid.len()],
        }
    }

    pub fn new(kind: KernelKind, grid: Grid, t: f64, params: &FluidParams) -> Result<Self> {
        check_time(t)?;
        let p = *params;
        Ok(Self::from_fn(grid, move |eta| {
            mode_block(kind, t, eta[0] * eta[0] + eta[1] * eta[1], &p).to_block3(eta)
        }))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn compose(&self, other: &KernelSymbol) -> Result<KernelSymbol> {
        self.combine(other, |a, b| a.mul(b))
    }

    pub fn add(&self, other: &KernelSymbol) -> Result<KernelSymbol> {
        self.combine(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &KernelSymbol) -> Result<KernelSymbol> {
        self.combine(other, |a, b| a.sub(b))
    }

    fn combine(
        &self,
        other: &KernelSymbol,
        f: impl Fn(&Block3, &Block3) -> Block3 + Sync,
    ) -> Result<KernelSymbol> {
        ensure_same(&self.grid, &other.grid)?;
        Ok(KernelSymbol {
            grid: self.grid,
            entries: self
                .entries
                .par_iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// Multiplies each mode by a real radial weight.
    pub fn weighted(&self, w: impl Fn([f64; 2]) -> f64 + Sync) -> KernelSymbol {
        let grid = self.grid;
        KernelSymbol {
            grid,
            entries: self
                .entries
                .par_iter()
                .enumerate()
                .map(|(idx, b)| b.scale(w(grid.eta(idx))))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &KernelSymbol) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// `max_η |entry(−η) − conj entry(η)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries
            .iter()
            .enumerate()
            .map(|(idx, b)| {
                let m = &self.entries[self.grid.mirror(idx)];
                let mut worst = 0.0_f64;
                for i in 0..3 {
                    for j in 0..3 {
                        worst = worst.max((m.0[i][j] - b.0[i][j].conj()).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }
}

/// `(χŜ, (1−χ)Ŝ)`.
pub fn split(symbol: &KernelSymbol, cut: &CutoffSpec) -> (KernelSymbol, KernelSymbol) {
    let lf = symbol.weighted(|eta| cutoff(eta, cut));
    let hf = symbol.weighted(|eta| 1.0 - cutoff(eta, cut));
    (lf, hf)
}

/// Coefficientwise block product `Ŝ(η) X̂(η)`.
pub fn apply(symbol: &KernelSymbol, x: &State) -> Result<State> {
    ensure_same(&symbol.grid, x.grid())?;
    let grid = symbol.grid;
    let out: Vec<[Complex64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            symbol.entries[idx].apply([x.rho.coeffs[idx], x.m[0].coeffs[idx], x.m[1].coeffs[idx]])
        })
        .collect();
    unpack(grid, out)
}

/// Applies a compact symbol given per mode.
pub fn apply_modes(x: &State, f: impl Fn([f64; 2]) -> ModeBlock + Sync) -> State {
    let grid = *x.grid();
    let out: Vec<[Complex64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let eta = grid.eta(idx);
            f(eta).apply(
                eta,
                [x.rho.coeffs[idx], x.m[0].coeffs[idx], x.m[1].coeffs[idx]],
            )
        })
        .collect();
    unpack(grid, out).expect("grid preserved")
}

/// Applies precomputed compact blocks, one per mode.
pub(crate) fn apply_mode_table(blocks: &[ModeBlock], x: &State) -> State {
    let grid = *x.grid();
    let out: Vec<[Complex64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            blocks[idx].apply(
                grid.eta(idx),
                [x.rho.coeffs[idx], x.m[0].coeffs[idx], x.m[1].coeffs[idx]],
            )
        })
        .collect();
    unpack(grid, out).expect("grid preserved")
}

fn unpack(grid: Grid, out: Vec<[Complex64; 3]>) -> Result<State> {
    let mut fields = [
        Vec::with_capacity(grid.len()),
        Vec::with_capacity(grid.len()),
        Vec::with_capacity(grid.len()),
    ];
    for v in out {
        for (f, c) in fields.iter_mut().zip(v) {
            f.push(c);
        }
    }
    let [r, m1, m2] = fields;
    State::new(
        SpectralField::from_coeffs(grid, r)?,
        [
            SpectralField::from_coeffs(grid, m1)?,
            SpectralField::from_coeffs(grid, m2)?,
        ],
    )
}

/// Physical-space kernel of a symbol. Nyquist modes are dropped: their
/// effective wavenumber is zero, so they would carry undamped symbol values.
fn physical(grid: Grid, f: impl Fn(usize, [f64; 2]) -> Complex64 + Sync) -> Vec<f64> {
    let coeffs = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if grid.is_nyquist(idx) {
                Complex64::new(0.0, 0.0)
            } else {
                f(idx, grid.eta(idx))
            }
        })
        .collect();
    inverse_transform(&SpectralField::from_coeffs(grid, coeffs).expect("sized by grid"))
}

/// Pointwise magnitude of `D^σ` of a compact kernel in physical space.
///
/// The kernel is the image of the all-ones (delta) datum. The magnitude is
/// the Frobenius norm of the 2×2 scalar form `[[k₁₁, k₁₂ᵀ], [k₂₁, k₂₂ I]]`
/// in which the curl-free momentum block is the scalar `d`.
pub fn scalar_form_magnitude(
    grid: Grid,
    sigma: MultiIndex,
    block: impl Fn([f64; 2]) -> ModeBlock + Sync,
) -> Vec<f64> {
    let blocks: Vec<ModeBlock> = (0..grid.len())
        .into_par_iter()
        .map(|idx| block(grid.eta(idx)))
        .collect();
    let s = |_: usize, eta: [f64; 2]| sigma.symbol(eta);
    let k11 = physical(grid, |i, e| s(i, e) * blocks[i].a);
    let k12: Vec<Vec<f64>> = (0..2)
        .map(|j| physical(grid, |i, e| s(i, e) * I * (blocks[i].b * e[j])))
        .collect();
    let k21: Vec<Vec<f64>> = (0..2)
        .map(|j| physical(grid, |i, e| s(i, e) * I * (blocks[i].cb * e[j])))
        .collect();
    let k22 = physical(grid, |i, e| s(i, e) * blocks[i].d);
    (0..grid.len())
        .map(|i| {
            (k11[i].powi(2)
                + k12[0][i].powi(2)
                + k12[1][i].powi(2)
                + k21[0][i].powi(2)
                + k21[1][i].powi(2)
                + 2.0 * k22[i].powi(2))
            .sqrt()
        })
        .collect()
}

/// `‖D^σ K‖_p` of a compact kernel, by quadrature of [`scalar_form_magnitude`].
pub fn scalar_form_norm(
    grid: Grid,
    sigma: MultiIndex,
    p: f64,
    block: impl Fn([f64; 2]) -> ModeBlock + Sync,
) -> Result<f64> {
    lp_norm_samples(&scalar_form_magnitude(grid, sigma, block), grid.dx(), p)
}

/// `‖D^σ(K_μ(t) ⋆ R⊥)‖_p`, pointwise Frobenius norm of the 2×2 kernel.
pub fn heat_leray_kernel_norm(
    grid: Grid,
    t: f64,
    sigma: MultiIndex,
    p: f64,
    params: &FluidParams,
) -> Result<f64> {
    if sigma.order() == 0 {
        return Err(Error::InvalidArgument(
            "the heat-Leray kernel is not integrable for sigma = 0".into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::Time {
            expected: "positive",
            got: t,
        });
    }
    let nu = params.nu();
    let entry = |j: usize, k: usize| {
        physical(grid, move |_, eta| {
            let r = parallel_projector(eta);
            let delta = if j == k { 1.0 } else { 0.0 };
            sigma.symbol(eta) * (heat_symbol(t, eta, nu) * (delta - r[j][k]))
        })
    };
    let (p11, p12, p22) = (entry(0, 0), entry(0, 1), entry(1, 1));
    let mags: Vec<f64> = (0..grid.len())
        .map(|i| (p11[i].powi(2) + 2.0 * p12[i].powi(2) + p22[i].powi(2)).sqrt())
        .collect();
    lp_norm_samples(&mags, grid.dx(), p)
}

/// One time slice of the pointwise-bound report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseSample {
    pub t: f64,
    /// Smallest constant valid where `|x| ≤ c(t − √t)`.
    pub k_inside: f64,
    /// Smallest constant valid outside, where it also sets the Gaussian width.
    pub k_outside: f64,
    pub k: f64,
    pub max_value: f64,
    pub argmax_radius: f64,
    /// Whether the maximum lies within `3√t` of the circle `|x| = ct`.
    pub on_ring: bool,
    /// Largest value beyond `ct + 6√(μ∥t)` relative to the maximum.
    pub far_field_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub sigma: MultiIndex,
    pub samples: Vec<PointwiseSample>,
    /// `max K / min K` across the sampled times.
    pub variation: f64,
}

/// Fits the smallest `K` with
/// `|D^σS̃∥(t,x)| ≤ K t^{−5/4−|σ|/2} · {t^{3/4}s^{−3/2} inside; e^{−s²/(Kt)} outside}`,
/// `s = ||x| − ct|`, for each `t`.
pub fn pointwise_bound_report(
    times: &[f64],
    sigma: MultiIndex,
    params: &FluidParams,
    grid: Grid,
) -> Result<PointwiseReport> {
    let c = params.c();
    let nu_par = params.nu_par();
    let half = 0.5 * grid.length();
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= 1.0) {
            return Err(Error::Time {
                expected: "at least 1",
                got: t,
            });
        }
        let radius = c * t + 3.0 * (nu_par * t).sqrt();
        if radius >= half {
            return Err(Error::RingOutsideBox {
                radius,
                half_width: half,
            });
        }
        let p = *params;
        let mags = scalar_form_magnitude(grid, sigma, move |eta| {
            mode_block(
                KernelKind::ArtificialParallel,
                t,
                eta[0] * eta[0] + eta[1] * eta[1],
                &p,
            )
        });
        samples.push(pointwise_slice(grid, t, sigma, c, nu_par, &mags));
    }
    let ks: Vec<f64> = samples.iter().map(|s| s.k).collect();
    let kmax = ks.iter().cloned().fold(0.0, f64::max);
    let kmin = ks.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PointwiseReport {
        sigma,
        samples,
        variation: kmax / kmin,
    })
}

fn pointwise_slice(
    grid: Grid,
    t: f64,
    sigma: MultiIndex,
    c: f64,
    nu_par: f64,
    mags: &[f64],
) -> PointwiseSample {
    let (imax, max_value) =
        mags.iter().enumerate().fold(
            (0, 0.0),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );
    // Values below this floor are transform noise, not kernel.
    let floor = 1e-10 * max_value;
    let scale = t.powf(1.25 + 0.5 * sigma.order() as f64);
    let inner = c * (t - t.sqrt());
    let far = c * t + 6.0 * (nu_par * t).sqrt();
    let mut k_inside = 0.0_f64;
    let mut outside: Vec<(f64, f64)> = Vec::new();
    let mut far_max = 0.0_f64;
    for (idx, &v) in mags.iter().enumerate() {
        let x = grid.point(idx);
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if r > far {
            far_max = far_max.max(v);
        }
        if v < floor {
            continue;
        }
        let s = (r - c * t).abs();
        let w = v * scale;
        if r <= inner {
            k_inside = k_inside.max(w * s.powf(1.5) / t.powf(0.75));
        } else {
            outside.push((s, w));
        }
    }
    let k_outside = fit_gaussian_constant(t, &outside);
    let xm = grid.point(imax);
    let argmax_radius = (xm[0] * xm[0] + xm[1] * xm[1]).sqrt();
    PointwiseSample {
        t,
        k_inside,
        k_outside,
        k: k_inside.max(k_outside),
        max_value,
        argmax_radius,
        on_ring: (argmax_radius - c * t).abs() <= 3.0 * t.sqrt(),
        far_field_ratio: far_max / max_value,
    }
}

/// Smallest `K` with `K e^{−s²/(Kt)} ≥ w` at every `(s, w)`; the left side is
/// increasing in `K`, so bisection applies.
fn fit_gaussian_constant(t: f64, pts: &[(f64, f64)]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let holds = |k: f64| pts.iter().all(|&(s, w)| k * (-s * s / (k * t)).exp() >= w);
    let mut lo = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut hi = lo.max(1e-300) * 2.0;
    while !holds(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::PressureLaw;

    fn unit_params() -> FluidParams {
        // c = 1, μ∥ = 1.
        FluidParams::new(0.5, 0.0, 1.0, PressureLaw::default()).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        let p = unit_params();
        let (a, b) = eigenvalues([2.0, 0.0], &p);
        assert!((a - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((b - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        let (a, b) = eigenvalues([0.0, 1.0], &p);
        let h = 3f64.sqrt() / 2.0;
        assert!((a - Complex64::new(-0.5, h)).norm() < 1e-14);
        assert!((b - Complex64::new(-0.5, -h)).norm() < 1e-14);
    }

    #[test]
    fn wave_kernel_examples() {
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((wave_kernel_w(1.0, [0.0, 0.0], 1.0).unwrap() - 1.0 / two_pi).abs() < 1e-15);
        assert_eq!(wave_kernel_w(1.0, [1.0, 0.0], 1.0).unwrap(), 0.0);
        let v = wave_kernel_w(2.0, [0.0, 1.0], 1.0).unwrap();
        assert!((v - 1.0 / (two_pi * 3f64.sqrt())).abs() < 1e-15);
        assert!(wave_kernel_w(0.0, [0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn cutoff_profile() {
        let cut = CutoffSpec::new(3.0).unwrap();
        assert_eq!(cutoff([1.5, 0.0], &cut), 1.0);
        assert_eq!(cutoff([0.0, 5.0], &cut), 0.0);
        let mid = cutoff([3.5, 0.0], &cut);
        assert!((mid - 0.5).abs() < 1e-15);
        assert!(CutoffSpec::new(0.0).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        let p = FluidParams::default();
        assert!(spar_symbol(-1.0, [0.1, 0.2], &p).is_err());
    }

    #[test]
    fn gaussian_constant_bisection() {
        let pts = [(0.0, 1.0), (2.0, 0.5)];
        let k = fit_gaussian_constant(1.0, &pts);
        assert!(pts
            .iter()
            .all(|&(s, w)| k * (-s * s / k).exp() >= w * (1.0 - 1e-10)));
        let k2 = k * (1.0 - 1e-6);
        assert!(pts.iter().any(|&(s, w)| k2 * (-s * s / k2).exp() < w));
    }
}
