//! Fluid parameters, the Oseen vortex and first-moment dipole profiles,
//! Biot–Savart reconstruction and the moment functionals `α`, `β`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ensure_same, inverse_transform, Grid, SpectralField};

/// Barotropic pressure law `P(ρ) = k ρ^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PressureLaw {
    Power { k: f64, gamma: f64 },
}

impl PressureLaw {
    /// `P(ρ) = ρ^γ / γ`, so that `P′(1) = 1`.
    pub fn isentropic(gamma: f64) -> Self {
        PressureLaw::Power {
            k: 1.0 / gamma,
            gamma,
        }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Power { k, gamma } => k * rho.powf(gamma),
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Power { k, gamma } => k * gamma * rho.powf(gamma - 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PressureLaw::Power { k, gamma } if k > 0.0 && gamma > 0.0 => Ok(()),
            PressureLaw::Power { k, gamma } => Err(Error::Params(format!(
                "pressure law k={k}, gamma={gamma} is not increasing"
            ))),
        }
    }
}

impl Default for PressureLaw {
    fn default() -> Self {
        PressureLaw::isentropic(1.4)
    }
}

/// Viscosities `μ`, `λ`, reference density `ρ*` and pressure law.
///
/// The linearized flow only sees kinematic viscosities, so the kernels use
/// [`nu`](Self::nu) and [`nu_par`](Self::nu_par); at `ρ* = 1` these coincide
/// with `μ` and `μ∥ = λ + 2μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub mu: f64,
    pub lambda: f64,
    pub rho_star: f64,
    pub pressure: PressureLaw,
}

impl FluidParams {
    pub fn new(mu: f64, lambda: f64, rho_star: f64, pressure: PressureLaw) -> Result<Self> {
        let p = Self {
            mu,
            lambda,
            rho_star,
            pressure,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Params(format!("mu = {} must be positive", self.mu)));
        }
        if !(self.lambda + 2.0 * self.mu > 0.0) {
            return Err(Error::Params(format!(
                "lambda + 2 mu = {} must be positive (elliptic viscosity)",
                self.lambda + 2.0 * self.mu
            )));
        }
        if !(self.rho_star > 0.0) {
            return Err(Error::Params(format!(
                "rho_star = {} must be positive",
                self.rho_star
            )));
        }
        self.pressure.validate()?;
        if !(self.pressure.derivative(self.rho_star) > 0.0) {
            return Err(Error::Params("P'(rho_star) must be positive".into()));
        }
        Ok(())
    }

    /// Sound speed `c = √P′(ρ*)`.
    pub fn c(&self) -> f64 {
        self.pressure.derivative(self.rho_star).sqrt()
    }

    pub fn mu_par(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// Kinematic shear viscosity `μ/ρ*`.
    pub fn nu(&self) -> f64 {
        self.mu / self.rho_star
    }

    /// Kinematic bulk viscosity `λ/ρ*`.
    pub fn lambda_kin(&self) -> f64 {
        self.lambda / self.rho_star
    }

    /// Kinematic longitudinal viscosity `(λ+2μ)/ρ*`.
    pub fn nu_par(&self) -> f64 {
        self.mu_par() / self.rho_star
    }
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: 0.0,
            rho_star: 1.0,
            pressure: PressureLaw::default(),
        }
    }
}

/// Circulation `α` and first moments `β`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub alpha: f64,
    pub beta: [f64; 2],
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::Time {
            expected: "positive",
            got: t,
        })
    }
}

/// `G(ξ) = e^{−|ξ|²/4} / 4π`.
pub fn gaussian(xi: [f64; 2]) -> f64 {
    (-(xi[0] * xi[0] + xi[1] * xi[1]) / 4.0).exp() / (4.0 * PI)
}

/// `F_i = ∂_i G = −(ξ_i/2) G`.
pub fn dipole(i: usize, xi: [f64; 2]) -> f64 {
    -0.5 * xi[i] * gaussian(xi)
}

/// `h(q) = (1 − e^{−q/4}) / (2πq)` so that `v^G(ξ) = ξ⊥ h(|ξ|²)`.
fn oseen_radial(q: f64) -> f64 {
    if q < 1e-6 {
        (0.25 - q / 32.0) / (2.0 * PI)
    } else {
        -(-q / 4.0).exp_m1() / (2.0 * PI * q)
    }
}

fn oseen_radial_derivative(q: f64) -> f64 {
    if q < 1e-2 {
        (-1.0 / 32.0 + q / 192.0 - q * q / 2048.0 + q * q * q / 30720.0) / (2.0 * PI)
    } else {
        let e = (-q / 4.0).exp();
        (0.25 * q * e + (-q / 4.0).exp_m1()) / (2.0 * PI * q * q)
    }
}

/// Oseen velocity profile `v^G(ξ) = (1/2π)(ξ⊥/|ξ|²)(1 − e^{−|ξ|²/4})`.
pub fn oseen_profile_velocity(xi: [f64; 2]) -> [f64; 2] {
    let h = oseen_radial(xi[0] * xi[0] + xi[1] * xi[1]);
    [-xi[1] * h, xi[0] * h]
}

/// `v^{F_i} = ∂_i v^G` in closed form.
pub fn dipole_profile_velocity(i: usize, xi: [f64; 2]) -> [f64; 2] {
    let q = xi[0] * xi[0] + xi[1] * xi[1];
    let h = oseen_radial(q);
    let hp = oseen_radial_derivative(q);
    let perp = [-xi[1], xi[0]];
    let dperp = if i == 0 { [0.0, 1.0] } else { [-1.0, 0.0] };
    [
        dperp[0] * h + perp[0] * 2.0 * xi[i] * hp,
        dperp[1] * h + perp[1] * 2.0 * xi[i] * hp,
    ]
}

/// Algebraic leading term of `v^{F_i}` at infinity.
pub fn dipole_farfield(i: usize, xi: [f64; 2]) -> Result<[f64; 2]> {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 < 25.0 {
        return Err(Error::FarField(r2.sqrt()));
    }
    let s = 1.0 / (2.0 * PI * r2 * r2);
    let (a, b) = (xi[0], xi[1]);
    Ok(if i == 0 {
        [s * 2.0 * a * b, s * (b * b - a * a)]
    } else {
        [s * (b * b - a * a), -s * 2.0 * a * b]
    })
}

fn similarity(t: f64, x: [f64; 2], params: &FluidParams) -> [f64; 2] {
    let l = (params.nu() * t).sqrt();
    [x[0] / l, x[1] / l]
}

/// `ω^G(t,x) = (1/t) G(x/√(νt))`.
pub fn oseen_vorticity(t: f64, x: [f64; 2], params: &FluidParams) -> Result<f64> {
    check_time(t)?;
    Ok(gaussian(similarity(t, x, params)) / t)
}

/// `u^G(t,x) = √(ν/t) v^G(x/√(νt))`.
pub fn oseen_velocity(t: f64, x: [f64; 2], params: &FluidParams) -> Result<[f64; 2]> {
    check_time(t)?;
    let s = (params.nu() / t).sqrt();
    let v = oseen_profile_velocity(similarity(t, x, params));
    Ok([s * v[0], s * v[1]])
}

/// `ω^{F_i}(t,x) = ν^{−1/2} t^{−3/2} F_i(x/√(νt))`.
pub fn dipole_vorticity(i: usize, t: f64, x: [f64; 2], params: &FluidParams) -> Result<f64> {
    check_time(t)?;
    Ok(dipole(i, similarity(t, x, params)) / (params.nu().sqrt() * t.powf(1.5)))
}

/// `u^{F_i}(t,x) = (1/t) v^{F_i}(x/√(νt))`.
pub fn dipole_velocity(i: usize, t: f64, x: [f64; 2], params: &FluidParams) -> Result<[f64; 2]> {
    check_time(t)?;
    let v = dipole_profile_velocity(i, similarity(t, x, params));
    Ok([v[0] / t, v[1] / t])
}

/// Scalar curl `∂₁u₂ − ∂₂u₁`.
pub fn curl(u: &[SpectralField; 2]) -> Result<SpectralField> {
    ensure_same(u[0].grid(), u[1].grid())?;
    let grid = *u[0].grid();
    let coeffs = (0..grid.len())
        .map(|idx| {
            let eta = grid.eta(idx);
            let d1 = Complex64::new(0.0, -eta[0]);
            let d2 = Complex64::new(0.0, -eta[1]);
            d1 * u[1].coeffs[idx] - d2 * u[0].coeffs[idx]
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// `û = iη⊥ ω̂ / |η|²` with the zero mode dropped, whatever its value.
pub fn biot_savart_mean_free(omega: &SpectralField) -> [SpectralField; 2] {
    let u1 = omega.map_modes(|_, eta, w| {
        let r2 = eta[0] * eta[0] + eta[1] * eta[1];
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -eta[1]) * w / r2
        }
    });
    let u2 = omega.map_modes(|_, eta, w| {
        let r2 = eta[0] * eta[0] + eta[1] * eta[1];
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, eta[0]) * w / r2
        }
    });
    [u1, u2]
}

/// Divergence-free velocity with curl `ω`; requires zero circulation.
pub fn biot_savart(omega: &SpectralField) -> Result<[SpectralField; 2]> {
    let mean = omega.coeffs[0].norm();
    let l1 = crate::spectral::lp_norm(omega, 1.0)?;
    let tol = 1e-10 * l1.max(f64::MIN_POSITIVE);
    if mean > tol {
        return Err(Error::Circulation { mean, tol });
    }
    Ok(biot_savart_mean_free(omega))
}

/// `α = ω̂₀(0)/ν`.
pub fn circulation_alpha(omega0: &SpectralField, params: &FluidParams) -> f64 {
    omega0.integral() / params.nu()
}

/// `β_i = −(1/ν) ∫ x_i ω₀ dx`, with `x` measured from the box center.
pub fn first_moments_beta(omega0: &SpectralField, params: &FluidParams) -> Result<Moments> {
    let grid = *omega0.grid();
    let values = inverse_transform(omega0);
    let n = grid.n();
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let edge = (0..n)
        .flat_map(|j| [j, (n - 1) * n + j, j * n, j * n + n - 1])
        .map(|idx| values[idx].abs())
        .fold(0.0_f64, f64::max);
    if max > 0.0 && edge > 1e-10 * max {
        return Err(Error::NotLocalized(edge / max));
    }
    let area = grid.dx() * grid.dx();
    let mut m = [0.0; 2];
    for (idx, v) in values.iter().enumerate() {
        let x = grid.point(idx);
        m[0] += x[0] * v;
        m[1] += x[1] * v;
    }
    let nu = params.nu();
    Ok(Moments {
        alpha: circulation_alpha(omega0, params),
        beta: [-m[0] * area / nu, -m[1] * area / nu],
    })
}

/// Moments of the vorticity carried by momentum data, `ω₀ = curl(m₀/ρ*)`.
pub fn momentum_moments(m0: &[SpectralField; 2], params: &FluidParams) -> Result<Moments> {
    let w = curl(m0)?.scale(1.0 / params.rho_star);
    first_moments_beta(&w, params)
}

/// Samples `ω^β = β₁ω^{F₁} + β₂ω^{F₂}` at time `t` and reconstructs `u^β`.
pub fn profile_superposition(
    moments: &Moments,
    t: f64,
    grid: Grid,
    params: &FluidParams,
) -> Result<(SpectralField, [SpectralField; 2])> {
    check_time(t)?;
    let [b1, b2] = moments.beta;
    if b1 == 0.0 && b2 == 0.0 {
        return Ok((
            SpectralField::zeros(grid),
            [SpectralField::zeros(grid), SpectralField::zeros(grid)],
        ));
    }
    let scale = 1.0 / (params.nu().sqrt() * t.powf(1.5));
    let p = *params;
    let omega = SpectralField::from_fn(grid, move |x1, x2| {
        let xi = similarity(t, [x1, x2], &p);
        scale * (b1 * dipole(0, xi) + b2 * dipole(1, xi))
    });
    let u = biot_savart_mean_free(&omega);
    Ok((omega, u))
}

/// Samples `α ω^G(t)`.
pub fn oseen_field(alpha: f64, t: f64, grid: Grid, params: &FluidParams) -> Result<SpectralField> {
    check_time(t)?;
    let p = *params;
    Ok(SpectralField::from_fn(grid, move |x1, x2| {
        alpha * gaussian(similarity(t, [x1, x2], &p)) / t
    }))
}
