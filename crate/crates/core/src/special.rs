//! Small special-function kit: the two Bessel evaluations the correlation
//! models need, plus Gauss-Legendre nodes for the local-scattering quadrature.

use crate::scalar::{real, to_f64, Real};
use num_traits::Float;

/// Zero-order Bessel function of the first kind, J_0.
///
/// Evaluated in double precision (libm's FDLIBM port) and converted back to
/// the working scalar; accuracy is far below the 1e-12 the correlation
/// builders require.
pub fn bessel_j0<T: Real>(x: T) -> T {
    real(libm::j0(to_f64(x)))
}

/// Zero-order spherical Bessel function j_0(x) = sin(x)/x, with a Taylor
/// branch for |x| < 1e-4 to avoid cancellation at small arguments.
pub fn spherical_j0<T: Real>(x: T) -> T {
    let ax = Float::abs(x);
    if ax < real(1e-4) {
        let x2 = x * x;
        T::one() - x2 / real(6.0) + x2 * x2 / real(120.0)
    } else {
        Float::sin(x) / x
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; nodes converge to machine
/// precision in a handful of steps.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power-series oracle for J_0, independent of the libm path.
    fn j0_series(x: f64) -> f64 {
        let base = -x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= base / ((k * k) as f64);
            let prev = sum;
            sum += term;
            if sum == prev {
                break;
            }
        }
        sum
    }

    /// Quadrature oracle: J_0(x) = (1/pi) * \int_0^pi cos(x sin t) dt.
    fn j0_quadrature(x: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(200);
        let half = std::f64::consts::PI / 2.0;
        let mut acc = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            let theta = half * (t + 1.0);
            acc += w * (x * theta.sin()).cos();
        }
        acc * half / std::f64::consts::PI
    }

    #[test]
    fn j0_matches_series_oracle() {
        for &x in &[0.0, 0.3, 1.0, 2.0, std::f64::consts::TAU, 5.5, 9.0] {
            let want = j0_series(x);
            assert!(
                (bessel_j0(x) - want).abs() < 1e-12,
                "J0({x}): {} vs series {want}",
                bessel_j0(x)
            );
        }
    }

    #[test]
    fn j0_matches_quadrature_oracle_at_large_argument() {
        for &x in &[12.0, 20.0, 45.0, 80.0] {
            let want = j0_quadrature(x);
            assert!(
                (bessel_j0(x) - want).abs() < 1e-12,
                "J0({x}): {} vs quadrature {want}",
                bessel_j0(x)
            );
        }
    }

    #[test]
    fn j0_at_two_pi_frozen_value() {
        // Frozen from the power-series oracle above.
        assert!((bessel_j0(std::f64::consts::TAU) - 0.220276908539934).abs() < 1e-12);
    }

    #[test]
    fn spherical_j0_limits_and_zero() {
        assert_eq!(spherical_j0(0.0f64), 1.0);
        assert!(spherical_j0(std::f64::consts::PI).abs() < 1e-15);
        // Taylor branch consistent with sin(x)/x just above the cut.
        let x = 1.0001e-4f64;
        let direct = x.sin() / x;
        assert!((spherical_j0(x) - direct).abs() < 1e-15);
        let y = 0.9999e-4f64;
        assert!((spherical_j0(y) - (y.sin() / y)).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(8);
        // Degree up to 2n-1 = 15 is exact.
        let moment = |p: u32| -> f64 {
            nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(p as i32))
                .sum()
        };
        assert!((moment(0) - 2.0).abs() < 1e-14);
        assert!(moment(7).abs() < 1e-14);
        assert!((moment(8) - 2.0 / 9.0).abs() < 1e-14);
        assert!((moment(14) - 2.0 / 15.0).abs() < 1e-13);
    }
}
