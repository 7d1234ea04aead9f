//! Golden regression for the corrupted-label schedule pipeline: the boxed
//! 2-d distribution at theta* = 0.05 with a constant 20% attack probability,
//! batch 8, default K and gamma. The JSON was recorded from the first
//! verified computation; recomputation must reproduce it bit-for-bit up to
//! float round-off, guarding the whole moments -> constants -> schedule path
//! (including the deterministic sampler stream).

use tron_core::adversary::BetaFn;
use tron_core::distributions::{estimate_moments, InputDistribution};
use tron_core::relu_tron::{case2_schedule, default_gamma, default_k};
use tron_core::RealVector;

const GOLDEN: &str = include_str!("golden/case2_schedule.json");

#[test]
fn case2_schedule_matches_golden() {
    let m = estimate_moments(
        &InputDistribution::unit_box(2),
        &RealVector::new(vec![-1.0, 1.0]).unwrap(),
        0.05,
        &BetaFn::constant(0.2),
        100_000,
        42,
    )
    .unwrap();
    let k = default_k(m.lambda1_theta).unwrap();
    let b1 = 2.0 * m.lambda1_theta - 1.0 / k;
    let c3 = k * 0.05f64.powi(2) * m.beta1 * m.beta1;
    let eps = (4.0 * c3 / b1 / 0.1).sqrt();
    let gamma = default_gamma(&m, 8, k, 2.0, eps, 0.1).unwrap();
    let s = case2_schedule(&m, 8, k, gamma, 2.0, eps, 0.1).unwrap();

    let recomputed = serde_json::to_value(&s).unwrap();
    let golden: serde_json::Value = serde_json::from_str(GOLDEN).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1e-12);
    for key in [
        "b1p",
        "c1p",
        "c2p",
        "c3p",
        "theorem_c2p",
        "theorem_c3p",
        "gamma",
        "k_const",
        "eta",
        "alpha_rate",
        "predicted_floor",
        "eps",
    ] {
        let a = recomputed[key].as_f64().unwrap_or(f64::NAN);
        let b = golden[key].as_f64().unwrap_or(f64::NAN);
        assert!(close(a, b), "{key}: recomputed {a} vs golden {b}");
    }
    assert_eq!(
        recomputed["predicted_t"].as_u64(),
        golden["predicted_t"].as_u64()
    );
    assert!(s.predicted_floor > 0.0);
    assert!(s.predicted_t < 100_000);
}
