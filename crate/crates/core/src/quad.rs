//! Adaptive Gauss–Kronrod quadrature.

use alloc::vec::Vec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4096;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Sum of the per-interval Kronrod–Gauss differences.
    pub error: f64,
    /// False if the interval budget ran out before the tolerance was met.
    pub converged: bool,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kron += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` by global
/// bisection of the worst interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    }
    let (value, error) = kronrod(&mut f, a, b);
    let mut intervals: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, value, error)];
    let mut total = value;
    let mut total_err = error;
    while total_err > abs_tol {
        if intervals.len() >= MAX_INTERVALS {
            return Estimate { value: total, error: total_err, converged: false };
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, v, e) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval can no longer be split in floating point.
            intervals.push((lo, hi, v, 0.0));
            total_err -= e;
            continue;
        }
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        total += v1 + v2 - v;
        total_err += e1 + e2 - e;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // Re-sum to shed the drift of the running updates.
    let value = intervals.iter().map(|iv| iv.2).sum();
    Estimate { value, error: total_err.max(0.0), converged: true }
}

/// Integrates `f` over `[a, ∞)` through the map `y = a + scale·t/(1 − t)`.
///
/// `scale` should be the natural length of the integrand's decay.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    abs_tol: f64,
) -> Estimate {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let y = a + scale * t / u;
            let jac = scale / (u * u);
            let v = f(y) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14);
        assert_abs_diff_eq!(est.value, 0.0, epsilon = 1e-14);
        assert!(est.converged);
    }

    #[test]
    fn smooth_and_singular_integrands() {
        let est = integrate(crate::math::exp, 0.0, 1.0, 1e-13);
        assert_abs_diff_eq!(est.value, core::f64::consts::E - 1.0, epsilon = 1e-13);
        // ∫₀¹ √x dx = 2/3 with an endpoint singularity in the derivative
        let est = integrate(crate::math::sqrt, 0.0, 1.0, 1e-12);
        assert_abs_diff_eq!(est.value, 2.0 / 3.0, epsilon = 1e-11);
    }

    #[test]
    fn semi_infinite_exponential_moments() {
        // ∫₀^∞ y e^{-2y} dy = 1/4
        let est = integrate_to_infinity(|y| y * crate::math::exp(-2.0 * y), 0.0, 0.5, 1e-13);
        assert_abs_diff_eq!(est.value, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 3.0, 3.0, 1e-10).value, 0.0);
    }
}
