#![allow(dead_code)]

use levy_ats_core::{MaturityGrid, ShortRateModel};

/// Closed-form `(A(v), B(v))` of the square-root model
/// `dR = (aR + b) dt + √(cR) dW`.
pub fn cir_curves(a: f64, b: f64, c: f64, v: f64) -> (f64, f64) {
    let g = (a * a + 2.0 * c).sqrt();
    let e = (g * v).exp_m1();
    let den = (g - a) * e + 2.0 * g;
    let big_b = 2.0 * e / den;
    let big_a = -(2.0 * b / c) * ((2.0 * g).ln() + 0.5 * (g - a) * v - den.ln());
    (big_a, big_b)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

/// The reference stable model `a = -0.5`, `b = 0.1`, `c = 0.2`, `x0 = 0.05`.
pub fn reference_model(alpha: f64) -> ShortRateModel {
    ShortRateModel::stable(-0.5, 0.1, 0.2, alpha, 0.05).unwrap()
}

/// Grid on `[0, 10]` whose nodes include every multiple of `1/64`.
pub fn mc_grid() -> MaturityGrid {
    MaturityGrid::uniform(10.0, 641).unwrap()
}
