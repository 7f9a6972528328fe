mod common;

use cnslab::harness::{fit_rate, RateSeries};
use cnslab::kernels::*;
use cnslab::profiles::{FluidParams, PressureLaw};
use cnslab::spectral::*;
use cnslab::Error;
use common::{random_state, rng};
use num_complex::Complex64;
use proptest::prelude::*;

/// μ∥ = 1 and c = 1: μ = 1/2, λ = 0, and `P(ρ) = ρ²/2` at ρ* = 1.
fn unit_params() -> FluidParams {
    FluidParams::new(0.5, 0.0, 1.0, PressureLaw::isentropic(2.0)).unwrap()
}

#[test]
fn small_eta_expansion_is_third_order() {
    let p = FluidParams::default();
    let c = p.c();
    let ratios: Vec<f64> = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
        .iter()
        .map(|&r: &f64| {
            let (lp, _) = eigenvalues([r, 0.0], &p);
            let rest = lp + 0.5 * p.nu_par() * r * r - Complex64::new(0.0, c * r);
            rest.norm() / r.powi(3)
        })
        .collect();
    // The cubic coefficient is μ∥²/(8c).
    let expect = p.nu_par().powi(2) / (8.0 * c);
    for q in &ratios {
        assert!((q / expect - 1.0).abs() < 0.01, "{ratios:?}");
    }
}

#[test]
fn symbols_at_zero_time_and_zero_mode() {
    let p = FluidParams::default();
    let id = Block3::identity();
    for eta in [[0.0, 0.0], [0.3, -1.2], [2.0, 2.0]] {
        for b in [
            spar_symbol(0.0, eta, &p).unwrap(),
            s_symbol(0.0, eta, &p).unwrap(),
            artificial_par_symbol(0.0, eta, &p).unwrap(),
            artificial_symbol(0.0, eta, &p).unwrap(),
        ] {
            assert!(b.max_abs_diff(&id) < 1e-15);
        }
    }
    for t in [0.5, 3.0, 40.0] {
        let z = [0.0, 0.0];
        assert_eq!(
            spar_symbol(t, z, &p).unwrap().0[0][0],
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            artificial_par_symbol(t, z, &p).unwrap().0[0][0],
            Complex64::new(1.0, 0.0)
        );
    }
    assert!(matches!(
        spar_symbol(-1.0, [1.0, 0.0], &p),
        Err(Error::Time { .. })
    ));
}

#[test]
fn s_acts_as_heat_on_divergence_free_data() {
    let p = FluidParams::default();
    let t = 1.7;
    for eta in [[0.4, -0.9], [1.5, 0.2]] {
        let s = s_symbol(t, eta, &p).unwrap();
        let v = [
            Complex64::new(0.0, 0.0),
            Complex64::new(-eta[1], 0.0) * 0.8,
            Complex64::new(eta[0], 0.0) * 0.8,
        ];
        let out = s.apply(v);
        let heat = (-p.nu() * (eta[0] * eta[0] + eta[1] * eta[1]) * t).exp();
        assert!(out[0].norm() < 1e-15);
        for i in 1..3 {
            assert!((out[i] - v[i] * heat).norm() < 1e-15);
        }
        // Curl-free data sees S∥.
        let g = [
            Complex64::new(0.2, 0.1),
            Complex64::new(eta[0], 0.0),
            Complex64::new(eta[1], 0.0),
        ];
        let a = s.apply(g);
        let b = spar_symbol(t, eta, &p).unwrap().apply(g);
        for i in 0..3 {
            assert!((a[i] - b[i]).norm() < 1e-15);
        }
    }
}

#[test]
fn artificial_eigenvalues() {
    let p = unit_params();
    let t = 2.5;
    for eta in [[0.3f64, 0.4], [1.0, 0.0], [2.0, 1.0]] {
        let r2 = eta[0] * eta[0] + eta[1] * eta[1];
        let w = f64::sqrt(r2);
        let heat = -0.5 * p.nu_par() * r2;
        let want = [
            (Complex64::new(heat, w) * t).exp(),
            (Complex64::new(heat, -w) * t).exp(),
        ];
        let got = artificial_par_symbol(t, eta, &p).unwrap().eigenvalues();
        for e in want {
            let d = got
                .iter()
                .map(|g| (g - e).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-12, "{eta:?}");
        }
    }
}

#[test]
fn apply_examples() {
    let grid = Grid::new(32, 20.0).unwrap();
    let p = FluidParams::default();
    let x = random_state(grid, 11);
    let same = apply(&KernelSymbol::identity(grid), &x).unwrap();
    assert!(same.max_abs_diff(&x) < 1e-15 * x.max_abs_coeff());
    let s = KernelSymbol::new(KernelKind::Full, grid, 1.0, &p).unwrap();
    assert_eq!(apply(&s, &State::zeros(grid)).unwrap().max_abs_coeff(), 0.0);
    let two = apply(
        &s,
        &apply(
            &KernelSymbol::new(KernelKind::Full, grid, 0.5, &p).unwrap(),
            &x,
        )
        .unwrap(),
    )
    .unwrap();
    let once = apply(
        &KernelSymbol::new(KernelKind::Full, grid, 1.5, &p).unwrap(),
        &x,
    )
    .unwrap();
    assert!(two.max_abs_diff(&once) < 1e-10 * x.max_abs_coeff());
}

#[test]
fn cutoff_partition() {
    let p = FluidParams::default();
    let cut = CutoffSpec::default_for(&p);
    let r0 = cut.r0();
    assert_eq!(cutoff([0.5 * r0, 0.0], &cut), 1.0);
    assert_eq!(cutoff([r0 + 2.0, 0.0], &cut), 0.0);
    let grid = Grid::new(64, 10.0).unwrap();
    let s = KernelSymbol::new(KernelKind::Parallel, grid, 0.7, &p).unwrap();
    let (lf, hf) = split(&s, &cut);
    assert!(lf.add(&hf).unwrap().max_abs_diff(&s) <= 1e-15);
}

#[test]
fn wave_kernel_examples() {
    use std::f64::consts::PI;
    assert!((wave_kernel_w(1.0, [0.0, 0.0], 1.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert_eq!(wave_kernel_w(1.0, [1.0, 0.5], 1.0).unwrap(), 0.0);
    assert!(
        (wave_kernel_w(2.0, [1.0, 0.0], 1.0).unwrap() - 1.0 / (2.0 * PI * 3f64.sqrt())).abs()
            < 1e-15
    );
}

fn slope(ts: &[f64], vs: &[f64]) -> f64 {
    let s = RateSeries::new(ts.iter().cloned().zip(vs.iter().cloned()).collect()).unwrap();
    fit_rate(&s, false).unwrap().slope
}

#[test]
fn heat_leray_slopes() {
    let grid = Grid::new(256, 200.0).unwrap();
    let p = FluidParams::default();
    let sigma = MultiIndex::new(1, 0).unwrap();
    let ts: Vec<f64> = (0..=8).map(|k| 2f64.powf(0.5 * k as f64)).collect();
    for (q, want) in [(2.0, -1.0), (f64::INFINITY, -1.5)] {
        let vs: Vec<f64> = ts
            .iter()
            .map(|&t| heat_leray_kernel_norm(grid, t, sigma, q, &p).unwrap())
            .collect();
        let s = slope(&ts, &vs);
        assert!((s - want).abs() < 0.05, "p={q}: {s}");
    }
    assert!(heat_leray_kernel_norm(grid, 1.0, MultiIndex::ZERO, 2.0, &p).is_err());
}

#[test]
fn artificial_kernel_concentrates_on_the_ring() {
    let grid = Grid::new(256, 100.0).unwrap();
    let p = FluidParams::default();
    let report = pointwise_bound_report(&[1.0, 2.0, 4.0, 8.0], MultiIndex::ZERO, &p, grid).unwrap();
    assert!(report.variation < 2.0 && report.variation.is_finite());
    for s in &report.samples {
        assert!(s.on_ring, "t = {}", s.t);
        assert!(s.k.is_finite() && s.k > 0.0);
    }
    let small = Grid::new(64, 20.0).unwrap();
    assert!(matches!(
        pointwise_bound_report(&[9.0], MultiIndex::ZERO, &p, small),
        Err(Error::RingOutsideBox { .. })
    ));
}

#[test]
fn high_frequencies_decay_exponentially() {
    let grid = Grid::new(64, 40.0).unwrap();
    let p = FluidParams::default();
    let cut = CutoffSpec::default_for(&p);
    let x = random_state(grid, 2);
    let ratio = |t: f64| {
        apply_modes(&x, |eta| {
            mode_block(
                KernelKind::Parallel,
                t,
                eta[0] * eta[0] + eta[1] * eta[1],
                &p,
            )
            .scale(1.0 - cutoff(eta, &cut))
        })
        .l2()
            / x.l2()
    };
    let (a, b) = (ratio(2.0), ratio(6.0));
    assert!(b < a * (-0.4 * 4.0f64).exp(), "{a} {b}");
}

fn random_block_inputs(seed: u64) -> (f64, f64, [f64; 2]) {
    let mut r = rng(seed);
    use rand::Rng;
    (
        r.gen_range(0.0..4.0),
        r.gen_range(0.0..4.0),
        [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn semigroup_property(seed in any::<u64>(), kind in 0usize..4) {
        let p = FluidParams::default();
        let kind = [KernelKind::Parallel, KernelKind::Full, KernelKind::ArtificialParallel, KernelKind::Artificial][kind];
        let (t, s, eta) = random_block_inputs(seed);
        let r2 = eta[0] * eta[0] + eta[1] * eta[1];
        let b = |t: f64| mode_block(kind, t, r2, &p).to_block3(eta);
        let whole = b(t + s);
        prop_assert!(whole.max_abs_diff(&b(t).mul(&b(s))) <= 1e-10 * whole.max_abs().max(1.0));
        let h = |t: f64| heat_symbol(t, eta, p.nu());
        prop_assert!((h(t + s) - h(t) * h(s)).abs() <= 1e-12);
    }

    #[test]
    fn symbols_map_real_to_real(seed in any::<u64>(), kind in 0usize..4, t in 0.0f64..5.0) {
        let p = FluidParams::default();
        let kind = [KernelKind::Parallel, KernelKind::Full, KernelKind::ArtificialParallel, KernelKind::Artificial][kind];
        let grid = Grid::new(16, 9.0).unwrap();
        let s = KernelSymbol::new(kind, grid, t, &p).unwrap();
        prop_assert_eq!(s.hermitian_defect(), 0.0);
        let y = apply(&s, &random_state(grid, seed)).unwrap();
        prop_assert_eq!(y.hermitian_defect(), 0.0);
    }

    #[test]
    fn mode_blocks_agree_with_dense_blocks(seed in any::<u64>()) {
        let p = FluidParams::default();
        let (t, _, eta) = random_block_inputs(seed);
        let m = mode_block(KernelKind::Full, t, eta[0] * eta[0] + eta[1] * eta[1], &p);
        let v = [Complex64::new(0.3, -0.1), Complex64::new(-1.0, 0.4), Complex64::new(0.2, 0.9)];
        let a = m.apply(eta, v);
        let b = m.to_block3(eta).apply(v);
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).norm() < 1e-14);
        }
    }
}
