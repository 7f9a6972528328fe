//! Pseudo-spectral time integration of the isentropic compressible system
//! near equilibrium.
//!
//! The linear part is advanced exactly by the symbol of `S`; the nonlinear
//! fluxes are evaluated pseudo-spectrally with 2/3 dealiasing and integrated
//! by exponential time differencing. Internally the fluxes are built in the
//! scaled variables `r = ρ̃/ρ*`, `M = m/ρ*`, in which `1 + r = ρ/ρ*`; the
//! linear symbol is the same in both sets of variables.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{apply_mode_table, mode_block, KernelKind, ModeBlock};
use crate::phi::{phi, phi_divided_difference};
use crate::profiles::FluidParams;
use crate::spectral::{
    inverse_transform, leray_decompose, lp_norm, lp_norm_vector, sobolev_norm, transform, Grid,
    SpectralField, State,
};

/// Pointwise floor on `ρ/ρ*`.
pub const VACUUM_FLOOR: f64 = 0.5;

/// Growth of the `H^s` energy over its initial value that aborts a run.
pub const ENERGY_BLOWUP: f64 = 10.0;

/// Sobolev index of the energy diagnostic.
pub const ENERGY_INDEX: i64 = 5;

/// Flux content of the nonlinear terms, in physical units.
///
/// The momentum source is `Σ_k ∂_k q1[k] + Σ_{k,k'} ∂_k∂_{k'} q2[k][k']`;
/// the density equation has no nonlinear source.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerms {
    /// `q1[k][i] = −ρ*(M_k M_i/(1+r) + δ_ki (P̃(1+r) − P̃(1) − c²r))`.
    pub q1: [[SpectralField; 2]; 2],
    /// `q2[k][k'][i] = −ρ*(ν δ_kk' g_i + (ν+λ/ρ*) δ_ki g_k')`, `g = M r/(1+r)`.
    pub q2: [[[SpectralField; 2]; 2]; 2],
}

impl NonlinearTerms {
    /// Assembled momentum source.
    pub fn divergence(&self) -> [SpectralField; 2] {
        let grid = *self.q1[0][0].grid();
        let comp = |i: usize| {
            let coeffs = (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let eta = grid.eta(idx);
                    let d = [Complex64::new(0.0, -eta[0]), Complex64::new(0.0, -eta[1])];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..2 {
                        acc += d[k] * self.q1[k][i].coeffs[idx];
                        for kp in 0..2 {
                            acc += d[k] * d[kp] * self.q2[k][kp][i].coeffs[idx];
                        }
                    }
                    acc
                })
                .collect();
            SpectralField::from_coeffs(grid, coeffs).expect("sized by grid")
        };
        [comp(0), comp(1)]
    }
}

/// Physical-space products shared by the flux assembly and the source.
struct Fluxes {
    f11: SpectralField,
    f12: SpectralField,
    f22: SpectralField,
    pnl: SpectralField,
    g: [SpectralField; 2],
}

fn fluxes(x: &State, params: &FluidParams, t: f64) -> Result<Fluxes> {
    let grid = *x.grid();
    let rs = params.rho_star;
    let r: Vec<f64> = inverse_transform(&x.rho)
        .into_iter()
        .map(|v| v / rs)
        .collect();
    let m1: Vec<f64> = inverse_transform(&x.m[0])
        .into_iter()
        .map(|v| v / rs)
        .collect();
    let m2: Vec<f64> = inverse_transform(&x.m[1])
        .into_iter()
        .map(|v| v / rs)
        .collect();
    let min_density = r.iter().fold(f64::INFINITY, |m, &v| m.min(1.0 + v));
    if min_density < VACUUM_FLOOR {
        return Err(Error::Vacuum { min_density, t });
    }
    let c2 = params.c().powi(2);
    let law = params.pressure;
    let scaled = |s: f64| law.pressure(rs * s) / rs;
    let p1 = scaled(1.0);
    let n = grid.len();
    let (mut f11, mut f12, mut f22, mut pnl, mut g1, mut g2) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    for j in 0..n {
        let inv = 1.0 / (1.0 + r[j]);
        f11[j] = m1[j] * m1[j] * inv;
        f12[j] = m1[j] * m2[j] * inv;
        f22[j] = m2[j] * m2[j] * inv;
        pnl[j] = scaled(1.0 + r[j]) - p1 - c2 * r[j];
        g1[j] = m1[j] * r[j] * inv;
        g2[j] = m2[j] * r[j] * inv;
    }
    let tr = |v: &[f64]| -> Result<SpectralField> {
        let mut f = transform(grid, v)?;
        f.dealias();
        Ok(f)
    };
    Ok(Fluxes {
        f11: tr(&f11)?,
        f12: tr(&f12)?,
        f22: tr(&f22)?,
        pnl: tr(&pnl)?,
        g: [tr(&g1)?, tr(&g2)?],
    })
}

/// Flux decomposition of the nonlinear terms at `X`.
pub fn nonlinear_terms(x: &State, params: &FluidParams) -> Result<NonlinearTerms> {
    let fl = fluxes(x, params, f64::NAN)?;
    let grid = *x.grid();
    let rs = params.rho_star;
    let nu = params.nu();
    let nu_l = nu + params.lambda_kin();
    let zero = SpectralField::zeros(grid);
    let q1 = [
        [fl.f11.axpy(1.0, &fl.pnl)?.scale(-rs), fl.f12.scale(-rs)],
        [fl.f12.scale(-rs), fl.f22.axpy(1.0, &fl.pnl)?.scale(-rs)],
    ];
    let q2_entry = |k: usize, kp: usize, i: usize| {
        let mut acc = zero.clone();
        if k == kp {
            acc = acc.axpy(-rs * nu, &fl.g[i]).expect("same grid");
        }
        if k == i {
            acc = acc.axpy(-rs * nu_l, &fl.g[kp]).expect("same grid");
        }
        acc
    };
    let q2 = [
        [
            [q2_entry(0, 0, 0), q2_entry(0, 0, 1)],
            [q2_entry(0, 1, 0), q2_entry(0, 1, 1)],
        ],
        [
            [q2_entry(1, 0, 0), q2_entry(1, 0, 1)],
            [q2_entry(1, 1, 0), q2_entry(1, 1, 1)],
        ],
    ];
    Ok(NonlinearTerms { q1, q2 })
}

/// Nonlinear source `(0, Σ∂_kQ_k)` as a state, dealiased.
pub fn nonlinear_source(x: &State, params: &FluidParams, t: f64) -> Result<State> {
    let fl = fluxes(x, params, t)?;
    let grid = *x.grid();
    let rs = params.rho_star;
    let nu = params.nu();
    let nu_l = nu + params.lambda_kin();
    let comp = |i: usize| {
        let coeffs = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let eta = grid.eta(idx);
                let d = [Complex64::new(0.0, -eta[0]), Complex64::new(0.0, -eta[1])];
                let f = |k: usize| match (k, i) {
                    (0, 0) => fl.f11.coeffs[idx],
                    (1, 1) => fl.f22.coeffs[idx],
                    _ => fl.f12.coeffs[idx],
                };
                let r2 = eta[0] * eta[0] + eta[1] * eta[1];
                let g = [fl.g[0].coeffs[idx], fl.g[1].coeffs[idx]];
                let eg = g[0] * eta[0] + g[1] * eta[1];
                let v = -(d[0] * f(0) + d[1] * f(1)) - d[i] * fl.pnl.coeffs[idx]
                    + g[i] * (nu * r2)
                    + eg * (nu_l * eta[i]);
                v * rs
            })
            .collect();
        let mut out = SpectralField::from_coeffs(grid, coeffs).expect("sized by grid");
        out.dealias();
        out
    };
    State::new(SpectralField::zeros(grid), [comp(0), comp(1)])
}

/// Time-stepping scheme for the nonlinear part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    EtdRk2,
    EtdRk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid,
    pub params: FluidParams,
    pub dt: f64,
    pub t_end: f64,
    /// Output times; `0` and `t_end` are always added.
    pub snapshot_times: Vec<f64>,
    pub scheme: Scheme,
    /// Amplitude of the initial data, recorded for reports.
    pub epsilon: f64,
    /// Switches the nonlinear terms off, leaving the exact linear flow.
    pub nonlinear: bool,
}

/// Largest power of two not above the acoustic CFL bound `dx/(2c)`.
pub fn default_dt(grid: &Grid, params: &FluidParams) -> f64 {
    let bound = cfl_bound(grid, params);
    2f64.powf(bound.log2().floor())
}

pub fn cfl_bound(grid: &Grid, params: &FluidParams) -> f64 {
    0.5 * grid.dx() / params.c()
}

impl SolverConfig {
    pub fn new(grid: Grid, params: FluidParams, t_end: f64) -> Self {
        Self {
            grid,
            params,
            dt: default_dt(&grid, &params),
            t_end,
            snapshot_times: Vec::new(),
            scheme: Scheme::default(),
            epsilon: 0.0,
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bound = cfl_bound(&self.grid, &self.params);
        if !(self.dt > 0.0) || self.dt > bound {
            return Err(Error::Cfl { dt: self.dt, bound });
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Time {
                expected: "nonnegative and finite",
                got: self.t_end,
            });
        }
        for &t in self.snapshot_times.iter().chain([&self.t_end]) {
            if t < 0.0 || t > self.t_end * (1.0 + 1e-12) {
                return Err(Error::Time {
                    expected: "inside [0, T]",
                    got: t,
                });
            }
            let steps = t / self.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "snapshot time {t} is not a multiple of dt = {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }

    /// Sorted distinct step indices at which snapshots are taken.
    fn snapshot_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = self
            .snapshot_times
            .iter()
            .chain([&0.0, &self.t_end])
            .map(|t| (t / self.dt).round() as usize)
            .collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }
}

/// `φ_k(hA)` in compact form, where `A` is the generator of `S`.
pub fn phi_block(k: usize, h: f64, r2: f64, params: &FluidParams) -> ModeBlock {
    if k == 0 {
        return mode_block(KernelKind::Full, h, r2, params);
    }
    let (lp, lm) = crate::kernels::eigenvalues_r2(r2, params);
    let (wp, wm) = (lp * h, lm * h);
    let dd = phi_divided_difference(k, wp, wm);
    let fp = phi(k, wp);
    let c2 = params.c().powi(2);
    ModeBlock {
        a: (fp - wp * dd).re,
        b: h * dd.re,
        cb: c2 * h * dd.re,
        d: (fp + wm * dd).re,
        e: phi(k, Complex64::new(-h * params.nu() * r2, 0.0)).re,
    }
}

fn table(grid: &Grid, f: impl Fn(f64) -> ModeBlock + Sync) -> Vec<ModeBlock> {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let eta = grid.eta(idx);
            f(eta[0] * eta[0] + eta[1] * eta[1])
        })
        .collect()
}

/// Precomputed ETD operators for one `(dt, scheme)`.
pub struct Stepper {
    params: FluidParams,
    nonlinear: bool,
    dt: f64,
    ops: StepOps,
}

enum StepOps {
    Rk2 {
        e: Vec<ModeBlock>,
        p1: Vec<ModeBlock>,
        p2: Vec<ModeBlock>,
    },
    Rk4 {
        e: Vec<ModeBlock>,
        e2: Vec<ModeBlock>,
        q: Vec<ModeBlock>,
        f1: Vec<ModeBlock>,
        f2: Vec<ModeBlock>,
        f3: Vec<ModeBlock>,
    },
}

impl Stepper {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let (h, p, grid) = (config.dt, config.params, config.grid);
        let ops = match config.scheme {
            Scheme::EtdRk2 => StepOps::Rk2 {
                e: table(&grid, |r2| phi_block(0, h, r2, &p)),
                p1: table(&grid, |r2| phi_block(1, h, r2, &p).scale(h)),
                p2: table(&grid, |r2| phi_block(2, h, r2, &p).scale(h)),
            },
            Scheme::EtdRk4 => StepOps::Rk4 {
                e: table(&grid, |r2| phi_block(0, h, r2, &p)),
                e2: table(&grid, |r2| phi_block(0, 0.5 * h, r2, &p)),
                q: table(&grid, |r2| phi_block(1, 0.5 * h, r2, &p).scale(0.5 * h)),
                f1: table(&grid, |r2| {
                    phi_block(1, h, r2, &p)
                        .axpy(-3.0, &phi_block(2, h, r2, &p))
                        .axpy(4.0, &phi_block(3, h, r2, &p))
                        .scale(h)
                }),
                f2: table(&grid, |r2| {
                    phi_block(2, h, r2, &p)
                        .axpy(-2.0, &phi_block(3, h, r2, &p))
                        .scale(h)
                }),
                f3: table(&grid, |r2| {
                    phi_block(2, h, r2, &p)
                        .scale(-1.0)
                        .axpy(4.0, &phi_block(3, h, r2, &p))
                        .scale(h)
                }),
            },
        };
        Ok(Self {
            params: p,
            nonlinear: config.nonlinear,
            dt: h,
            ops,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `x` from time `t` by one step.
    pub fn step(&self, x: &State, t: f64) -> Result<State> {
        let mut out = match &self.ops {
            StepOps::Rk2 { e, p1, p2 } => {
                let lin = apply_mode_table(e, x);
                if !self.nonlinear {
                    lin
                } else {
                    let nx = nonlinear_source(x, &self.params, t)?;
                    let a = lin.axpy(1.0, &apply_mode_table(p1, &nx))?;
                    let na = nonlinear_source(&a, &self.params, t + self.dt)?;
                    a.axpy(1.0, &apply_mode_table(p2, &na.sub(&nx)?))?
                }
            }
            StepOps::Rk4 {
                e,
                e2,
                q,
                f1,
                f2,
                f3,
            } => {
                let lin = apply_mode_table(e, x);
                if !self.nonlinear {
                    lin
                } else {
                    let h = self.dt;
                    let half = apply_mode_table(e2, x);
                    let nu = nonlinear_source(x, &self.params, t)?;
                    let a = half.axpy(1.0, &apply_mode_table(q, &nu))?;
                    let na = nonlinear_source(&a, &self.params, t + 0.5 * h)?;
                    let b = half.axpy(1.0, &apply_mode_table(q, &na))?;
                    let nb = nonlinear_source(&b, &self.params, t + 0.5 * h)?;
                    let c = apply_mode_table(e2, &a)
                        .axpy(1.0, &apply_mode_table(q, &nb.scale(2.0).sub(&nu)?))?;
                    let nc = nonlinear_source(&c, &self.params, t + h)?;
                    lin.axpy(1.0, &apply_mode_table(f1, &nu))?
                        .axpy(2.0, &apply_mode_table(f2, &na.axpy(1.0, &nb)?))?
                        .axpy(1.0, &apply_mode_table(f3, &nc))?
                }
            }
        };
        out.dealias();
        Ok(out)
    }
}

/// One step of size `dt` from time 0 (builds the operators each call).
pub fn step(x: &State, dt: f64, config: &SolverConfig) -> Result<State> {
    let cfg = SolverConfig {
        dt,
        t_end: dt,
        snapshot_times: Vec::new(),
        ..config.clone()
    };
    Stepper::new(&cfg)?.step(x, 0.0)
}

/// Per-snapshot diagnostics; norms are indexed by `p ∈ {1, 2, ∞}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    /// `∫ρ̃ dx`.
    pub mass: f64,
    pub rho_lp: [f64; 3],
    pub m_lp: [f64; 3],
    pub m_perp_lp: [f64; 3],
    pub m_par_lp: [f64; 3],
    /// `H^s` norm of `X` with `s` = [`ENERGY_INDEX`].
    pub energy: f64,
    /// `min ρ/ρ*`.
    pub min_density: f64,
}

pub const DIAGNOSTIC_EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

pub fn diagnostics(x: &State, t: f64, params: &FluidParams) -> Result<Diagnostics> {
    let (perp, par) = leray_decompose(&x.m)?;
    let vec_norms = |f: [&SpectralField; 2]| -> Result<[f64; 3]> {
        Ok([
            lp_norm_vector(&f, 1.0)?,
            lp_norm_vector(&f, 2.0)?,
            lp_norm_vector(&f, f64::INFINITY)?,
        ])
    };
    let min_density = inverse_transform(&x.rho)
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(1.0 + v / params.rho_star));
    Ok(Diagnostics {
        t,
        mass: x.rho.integral(),
        rho_lp: [
            lp_norm(&x.rho, 1.0)?,
            lp_norm(&x.rho, 2.0)?,
            lp_norm(&x.rho, f64::INFINITY)?,
        ],
        m_lp: vec_norms([&x.m[0], &x.m[1]])?,
        m_perp_lp: vec_norms([&perp[0], &perp[1]])?,
        m_par_lp: vec_norms([&par[0], &par[1]])?,
        energy: sobolev_norm(x, ENERGY_INDEX)?,
        min_density,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub diagnostics: Vec<Diagnostics>,
    /// Whether the energy diagnostic stayed below its blow-up threshold.
    pub energy_bounded: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot nearest to `t`.
    pub fn at(&self, t: f64) -> Option<&State> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| &self.states[i])
    }
}

/// Integrates from `X₀` to `T`, storing the requested snapshots.
pub fn simulate(x0: &State, config: &SolverConfig) -> Result<Trajectory> {
    let stepper = Stepper::new(config)?;
    let steps = config.snapshot_steps();
    let last = *steps.last().expect("contains 0");
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps.len()),
        states: Vec::with_capacity(steps.len()),
        diagnostics: Vec::with_capacity(steps.len()),
        energy_bounded: true,
    };
    let mut x = x0.clone();
    x.dealias();
    let mut e0 = None;
    let mut next = 0;
    for k in 0..=last {
        let t = k as f64 * config.dt;
        if steps[next] == k {
            let d = diagnostics(&x, t, &config.params)?;
            let e_init = *e0.get_or_insert(d.energy);
            let blown = e_init > 0.0 && d.energy > ENERGY_BLOWUP * e_init;
            traj.times.push(t);
            traj.states.push(x.clone());
            traj.diagnostics.push(d);
            if blown {
                traj.energy_bounded = false;
                return Err(Error::Aborted {
                    t,
                    reason: "energy exceeded ten times its initial value".into(),
                    partial: Box::new(traj),
                });
            }
            next += 1;
        }
        if k == last {
            break;
        }
        x = match stepper.step(&x, t) {
            Ok(v) => v,
            Err(e @ Error::Vacuum { .. }) => {
                return Err(Error::Aborted {
                    t,
                    reason: e.to_string(),
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(e),
        };
    }
    Ok(traj)
}

/// `S(t)⋆X₀` computed by the exact symbol.
pub fn linear_evolution(x0: &State, t: f64, params: &FluidParams) -> Result<State> {
    if !(t >= 0.0) {
        return Err(Error::Time {
            expected: "nonnegative",
            got: t,
        });
    }
    let grid = *x0.grid();
    let p = *params;
    let blocks = table(&grid, |r2| mode_block(KernelKind::Full, t, r2, &p));
    Ok(apply_mode_table(&blocks, x0))
}

/// `‖X(t) − S(t)⋆X₀‖₂` at every snapshot.
pub fn nonlinear_deviation(traj: &Trajectory, params: &FluidParams) -> Result<Vec<f64>> {
    let x0 = traj
        .states
        .first()
        .ok_or(Error::TooFewSnapshots { needed: 1, got: 0 })?;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| Ok(x.sub(&linear_evolution(x0, t, params)?)?.l2()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelResidual {
    /// `‖X(T) − S(T)X₀ − ∫₀ᵀ S(T−τ)N(X(τ))dτ‖₂` with trapezoidal quadrature.
    pub absolute: f64,
    /// `absolute / ‖X(T)‖₂`.
    pub relative: f64,
}

/// Checks the integral identity at the final snapshot.
pub fn duhamel_residual(traj: &Trajectory, config: &SolverConfig) -> Result<DuhamelResidual> {
    const NEEDED: usize = 8;
    let n = traj.len();
    if n < NEEDED {
        return Err(Error::TooFewSnapshots {
            needed: NEEDED,
            got: n,
        });
    }
    let h = traj.times[1] - traj.times[0];
    let uniform = traj
        .times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    if traj.times[0] != 0.0 || !(h > 0.0) || !uniform {
        return Err(Error::TooFewSnapshots {
            needed: NEEDED,
            got: 0,
        });
    }
    let p = config.params;
    let t_end = traj.times[n - 1];
    let x_end = &traj.states[n - 1];
    let mut resid = x_end.sub(&linear_evolution(&traj.states[0], t_end, &p)?)?;
    if config.nonlinear {
        for (j, (&t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
            let src = nonlinear_source(x, &p, t)?;
            resid = resid.axpy(-w, &linear_evolution(&src, t_end - t, &p)?)?;
        }
    }
    let absolute = resid.l2();
    let norm = x_end.l2();
    Ok(DuhamelResidual {
        absolute,
        relative: if norm > 0.0 {
            absolute / norm
        } else {
            absolute
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dt_at_defaults() {
        let grid = Grid::new(256, 200.0).unwrap();
        let p = FluidParams::default();
        assert_eq!(default_dt(&grid, &p), 0.25);
    }

    #[test]
    fn cfl_violation_rejected() {
        let grid = Grid::new(64, 20.0).unwrap();
        let mut cfg = SolverConfig::new(grid, FluidParams::default(), 1.0);
        cfg.dt = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Cfl { .. })));
    }

    #[test]
    fn phi_blocks_at_zero_mode() {
        let p = FluidParams::default();
        for k in 1..4 {
            let b = phi_block(k, 0.3, 0.0, &p);
            let expect = phi(k, Complex64::new(0.0, 0.0)).re;
            assert!((b.a - expect).abs() < 1e-15);
            assert!((b.e - expect).abs() < 1e-15);
        }
    }
}
