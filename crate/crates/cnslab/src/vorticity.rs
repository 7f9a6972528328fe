//! Constant-density vorticity equation `∂_tω + u·∇ω = νΔω`, `u = K_BS⋆ω`,
//! integrated by scalar ETD-RK2. Used as a control for the profile
//! asymptotics.
//!
//! On the torus the mean of `ω` cannot be inverted by Biot–Savart, so the
//! velocity is reconstructed from the mean-free part; the mean itself is
//! carried along unchanged.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phi::phi;
use crate::profiles::{biot_savart_mean_free, oseen_field, oseen_velocity, FluidParams};
use crate::spectral::{inverse_transform, transform, Grid, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityConfig {
    pub grid: Grid,
    /// Kinematic viscosity.
    pub nu: f64,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Output times in `[t_start, t_end]`, multiples of `dt` from `t_start`.
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

/// `−u·∇ω = −div(uω)`, dealiased.
pub fn advection(omega: &SpectralField) -> Result<SpectralField> {
    let grid = *omega.grid();
    let mut w = omega.clone();
    w.dealias();
    let u = biot_savart_mean_free(&w);
    let wv = inverse_transform(&w);
    let u1 = inverse_transform(&u[0]);
    let u2 = inverse_transform(&u[1]);
    let f1: Vec<f64> = u1.iter().zip(&wv).map(|(a, b)| a * b).collect();
    let f2: Vec<f64> = u2.iter().zip(&wv).map(|(a, b)| a * b).collect();
    let (f1, f2) = (transform(grid, &f1)?, transform(grid, &f2)?);
    let mut out = f1.map_modes(|idx, eta, c| {
        Complex64::new(0.0, eta[0]) * c + Complex64::new(0.0, eta[1]) * f2.coeffs[idx]
    });
    out.dealias();
    Ok(out)
}

struct Tables {
    e: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

fn tables(grid: &Grid, nu: f64, h: f64) -> Tables {
    let z: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let eta = grid.eta(idx);
            Complex64::new(-nu * (eta[0] * eta[0] + eta[1] * eta[1]) * h, 0.0)
        })
        .collect();
    Tables {
        e: z.par_iter().map(|&w| w.re.exp()).collect(),
        p1: z.par_iter().map(|&w| h * phi(1, w).re).collect(),
        p2: z.par_iter().map(|&w| h * phi(2, w).re).collect(),
    }
}

fn mul(table: &[f64], f: &SpectralField) -> SpectralField {
    f.map_modes(|idx, _, c| c * table[idx])
}

pub fn simulate_vorticity(
    omega0: &SpectralField,
    config: &VorticityConfig,
) -> Result<VorticityTrajectory> {
    let h = config.dt;
    if !(h > 0.0) || !(config.nu > 0.0) {
        return Err(Error::InvalidArgument(
            "time step and viscosity must be positive".into(),
        ));
    }
    if !(config.t_end >= config.t_start) {
        return Err(Error::Time {
            expected: "after the start time",
            got: config.t_end,
        });
    }
    let index = |t: f64| -> Result<usize> {
        let s = (t - config.t_start) / h;
        if s < -1e-9
            || (s - s.round()).abs() > 1e-9 * s.abs().max(1.0)
            || t > config.t_end + 1e-9 * h
        {
            return Err(Error::InvalidArgument(format!(
                "snapshot time {t} is not on the step lattice"
            )));
        }
        Ok(s.round() as usize)
    };
    let mut steps = vec![0, index(config.t_end)?];
    for &t in &config.snapshot_times {
        steps.push(index(t)?);
    }
    steps.sort_unstable();
    steps.dedup();
    let tab = tables(&config.grid, config.nu, h);
    let mut w = omega0.clone();
    w.dealias();
    let mut out = VorticityTrajectory {
        times: Vec::with_capacity(steps.len()),
        fields: Vec::with_capacity(steps.len()),
    };
    let last = *steps.last().expect("nonempty");
    let mut next = 0;
    for k in 0..=last {
        if steps[next] == k {
            out.times.push(config.t_start + k as f64 * h);
            out.fields.push(w.clone());
            next += 1;
        }
        if k == last {
            break;
        }
        let nw = advection(&w)?;
        let a = mul(&tab.e, &w).add(&mul(&tab.p1, &nw))?;
        let na = advection(&a)?;
        w = a.add(&mul(&tab.p2, &na.sub(&nw)?))?;
        w.dealias();
    }
    Ok(out)
}

/// Relative residual `‖∂_tω − νΔω + u·∇ω‖₂ / ‖νΔω‖₂` of `αω^G` at time `t`,
/// with the time derivative and velocity in closed form and the Laplacian
/// and gradient taken spectrally.
pub fn oseen_residual(alpha: f64, t: f64, grid: Grid, params: &FluidParams) -> Result<f64> {
    let omega = oseen_field(alpha, t, grid, params)?;
    let nu = params.nu();
    let lap = omega.map_modes(|_, eta, c| c * (-nu * (eta[0] * eta[0] + eta[1] * eta[1])));
    let grad: Vec<Vec<f64>> = (0..2)
        .map(|k| inverse_transform(&omega.map_modes(|_, eta, c| c * Complex64::new(0.0, -eta[k]))))
        .collect();
    let w = inverse_transform(&omega);
    let lap = inverse_transform(&lap);
    let mut num = 0.0;
    let mut den = 0.0;
    for idx in 0..grid.len() {
        let x = grid.point(idx);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let dt = w[idx] * (-1.0 / t + r2 / (4.0 * nu * t * t));
        let u = oseen_velocity(t, x, params)?;
        let adv = alpha * (u[0] * grad[0][idx] + u[1] * grad[1][idx]);
        let res = dt - lap[idx] + adv;
        num += res * res;
        den += lap[idx] * lap[idx];
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stays_zero() {
        let grid = Grid::new(32, 20.0).unwrap();
        let cfg = VorticityConfig {
            grid,
            nu: 1.0,
            dt: 0.25,
            t_start: 1.0,
            t_end: 2.0,
            snapshot_times: vec![1.5],
        };
        let traj = simulate_vorticity(&SpectralField::zeros(grid), &cfg).unwrap();
        assert_eq!(traj.times, vec![1.0, 1.5, 2.0]);
        assert!(traj.fields.iter().all(|f| f.max_abs_coeff() == 0.0));
    }
}
