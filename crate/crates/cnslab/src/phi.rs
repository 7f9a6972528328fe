//! Stable `φ_k` functions and their divided differences.
//!
//! `φ₀(w) = e^w`, `φ_{k+1}(w) = (φ_k(w) − 1/k!)/w`. Divided differences at
//! nearly coincident nodes switch to a midpoint Taylor expansion, which is
//! what keeps the compressible symbols finite at the acoustic double root.

use num_complex::Complex64;

/// Below this node separation divided differences use the series branch.
pub const COALESCENCE_THRESHOLD: f64 = 1e-5;

const TAYLOR_RADIUS: f64 = 5.0;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `φ_0(w) … φ_kmax(w)`.
pub fn phi_all(kmax: usize, w: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(kmax + 1);
    if w.norm() < TAYLOR_RADIUS {
        for k in 0..=kmax {
            // Σ_i w^i/(i+k)!, summed until the terms stop mattering.
            let mut term = Complex64::new(1.0 / factorial(k), 0.0);
            let mut sum = term;
            for i in 1..80 {
                term *= w / (i + k) as f64;
                sum += term;
                if term.norm() < 1e-18 * sum.norm() {
                    break;
                }
            }
            out.push(sum);
        }
    } else {
        let mut p = w.exp();
        out.push(p);
        for k in 0..kmax {
            p = (p - 1.0 / factorial(k)) / w;
            out.push(p);
        }
    }
    out
}

pub fn phi(k: usize, w: Complex64) -> Complex64 {
    phi_all(k, w)[k]
}

fn binomial(j: usize, i: usize) -> f64 {
    factorial(j) / (factorial(i) * factorial(j - i))
}

/// `j`-th derivative of `φ_k` at `w`.
pub fn phi_derivative(k: usize, j: usize, w: Complex64) -> Complex64 {
    if k == 0 {
        return w.exp();
    }
    let all = phi_all(k + j, w);
    (0..=j)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let rising = factorial(k + i - 1) / factorial(k - 1);
            all[k + i] * (sign * binomial(j, i) * rising)
        })
        .sum()
}

/// `φ_k[a, b] = (φ_k(a) − φ_k(b))/(a − b)`, continuous across `a = b`.
pub fn phi_divided_difference(k: usize, a: Complex64, b: Complex64) -> Complex64 {
    let delta = a - b;
    if delta.norm() >= COALESCENCE_THRESHOLD {
        return (phi(k, a) - phi(k, b)) / delta;
    }
    let m = 0.5 * (a + b);
    let z = 0.5 * delta;
    let z2 = z * z;
    phi_derivative(k, 1, m)
        + phi_derivative(k, 3, m) * z2 / 6.0
        + phi_derivative(k, 5, m) * z2 * z2 / 120.0
        + phi_derivative(k, 7, m) * z2 * z2 * z2 / 5040.0
}

/// `(e^{at} − e^{bt})/(a − b)`, with the series branch when `|a−b|t` is tiny.
pub fn exp_divided_difference(t: f64, a: Complex64, b: Complex64) -> Complex64 {
    let delta = a - b;
    if delta.norm() * t >= COALESCENCE_THRESHOLD {
        return ((a * t).exp() - (b * t).exp()) / delta;
    }
    let m = 0.5 * (a + b);
    let z = 0.5 * delta * t;
    let z2 = z * z;
    (m * t).exp() * t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0 + z2 * z2 * z2 / 5040.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_closed_forms() {
        for w in [c(0.3, 0.0), c(-2.0, 1.0), c(-7.0, 0.0), c(6.0, -3.0)] {
            let e = w.exp();
            assert!((phi(1, w) - (e - 1.0) / w).norm() < 1e-13 * (1.0 + e.norm()));
            let p2 = (e - 1.0 - w) / (w * w);
            assert!((phi(2, w) - p2).norm() < 1e-12 * (1.0 + p2.norm()));
        }
        assert!((phi(3, c(0.0, 0.0)) - 1.0 / 6.0).norm() < 1e-16);
    }

    #[test]
    fn branches_match_at_the_switch() {
        // The two probes straddle |w| = 5; their gap is the first-order change.
        let (w_in, w_out) = (c(-4.999_999, 0.0), c(-5.000_001, 0.0));
        for k in 0..6 {
            let inside = phi(k, w_in);
            let outside = phi(k, w_out);
            let predicted = phi_derivative(k, 1, c(-5.0, 0.0)) * (w_out - w_in);
            assert!(
                (outside - inside - predicted).norm() < 1e-10 * inside.norm(),
                "k={k}"
            );
        }
    }

    #[test]
    fn divided_difference_is_continuous() {
        for k in 0..4 {
            let a = c(-0.7, 0.2);
            // φ_k[a, a−δ] = φ_k′(a) − φ_k″(a)δ/2 + O(δ²).
            let expansion = |d: f64| phi_derivative(k, 1, a) - phi_derivative(k, 2, a) * (0.5 * d);
            for d in [1.0001e-5, 0.9999e-5, 1e-9] {
                let dd = phi_divided_difference(k, a, a - d);
                assert!((dd - expansion(d)).norm() < 1e-10, "k={k} d={d}");
            }
            // At a double node the divided difference is the derivative.
            let same = phi_divided_difference(k, a, a);
            assert!((same - phi_derivative(k, 1, a)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn exp_divided_difference_double_root() {
        let l = c(-1.0, 0.0);
        let t = 2.0;
        let v = exp_divided_difference(t, l, l);
        assert!((v - (l * t).exp() * t).norm() < 1e-16);
        let w = exp_divided_difference(t, l + 1e-4, l);
        assert!((w - v).norm() < 1e-3);
    }
}
