use levy_ats_core::curves::solve_stable_riccati;
use levy_ats_core::validate::functional_residual;
use levy_ats_core::{MaturityGrid, ShortRateModel};
use proptest::prelude::*;

fn grid() -> MaturityGrid {
    MaturityGrid::uniform(10.0, 129).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curves_are_increasing(a in -2.0..2.0f64, b in 0.0..1.0f64, c in 1e-3..1.0f64, alpha in 1.01..=2.0f64) {
        let pair = solve_stable_riccati(a, b, c, alpha, &grid()).unwrap();
        for k in 0..pair.b.len() {
            prop_assert!(pair.b_prime[k] > 0.0, "B'({}) = {}", pair.grid.nodes()[k], pair.b_prime[k]);
            prop_assert!(pair.a_prime[k] >= 0.0);
        }
    }

    #[test]
    fn solved_curves_satisfy_functional_equation(
        a in -2.0..2.0f64,
        b in 0.0..1.0f64,
        c in 1e-3..1.0f64,
        alpha in 1.01..=2.0f64,
        x in 0.0..5.0f64,
    ) {
        let model = ShortRateModel::stable(a, b, c, alpha, 0.0).unwrap();
        let pair = model.curves(&grid()).unwrap();
        prop_assert!(pair.max_node_residual() <= 1e-8, "node residual {}", pair.max_node_residual());
        for k in 0..pair.b.len() {
            let (bv, ap, bp) = (pair.b[k], pair.a_prime[k], pair.b_prime[k]);
            let r = functional_residual(&model, x, bv, ap, bp);
            // relative to the size of the terms, which grow without bound for a > 0
            let scale = model.exponent_of_exposure(x, bv).abs() + ap.abs() + ((bp - 1.0) * x).abs()
                + (bv * model.drift(x)).abs();
            prop_assert!(r <= 1e-8 * scale.max(1.0), "residual {r} at scale {scale}");
        }
    }

    #[test]
    fn model_json_round_trips(a in -2.0..2.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, alpha in 1.01..=2.0f64, x0 in 0.0..1.0f64) {
        let model = ShortRateModel::stable(a, b, c, alpha, x0).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: ShortRateModel = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, model);
    }
}
