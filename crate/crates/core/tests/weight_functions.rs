use carleman_lab::weight_functions::{
    associated_omega, check_function_condition, lc_minorant_roundtrip, legendre_lower, legendre_lower_fn,
    legendre_upper,
};
use carleman_lab::*;

fn seq(s: &str, j: usize) -> WeightSequence {
    WeightSequence::new(s.parse().unwrap(), j).unwrap()
}

/// Brute-force `sup_j (j log t - log M_j)`.
fn brute_omega(w: &WeightSequence, t: f64) -> f64 {
    w.log_m().iter().enumerate().map(|(j, l)| j as f64 * t.ln() - l).fold(0.0, f64::max)
}

/// `(alpha^{1/(alpha+1)} + alpha^{-alpha/(alpha+1)}) t^{alpha/(alpha+1)}`.
fn power_lower(alpha: f64, t: f64) -> f64 {
    let e = alpha + 1.0;
    (alpha.powf(1.0 / e) + alpha.powf(-alpha / e)) * t.powf(alpha / e)
}

#[test]
fn omega_vanishes_below_first_quotient() {
    let w = seq("factorial", 64);
    assert_eq!(associated_omega(&w, 1.0).unwrap().value, 0.0);
    assert_eq!(associated_omega(&w, 0.0).unwrap().value, 0.0);
    let g = seq("qgevrey:2", 64);
    let mu1 = g.log_mu()[1].exp();
    for t in [0.1, 0.5, 0.99 * mu1] {
        assert_eq!(associated_omega(&g, t).unwrap().value, 0.0);
        assert_eq!(brute_omega(&g, t), 0.0);
    }
}

#[test]
fn factorial_omega_at_e_squared() {
    let w = seq("factorial", 50);
    let t = 2f64.exp();
    let v = associated_omega(&w, t).unwrap();
    assert_eq!(v.maximizer, 7);
    assert!((v.value - (14.0 - 5040f64.ln())).abs() < 1e-12);
    assert!((v.value - brute_omega(&w, t)).abs() < 1e-12);
}

#[test]
fn saturation_is_flagged() {
    let w = seq("factorial", 20);
    assert!(associated_omega(&w, 100.0).unwrap().saturated);
    assert!(!associated_omega(&w, 5.0).unwrap().saturated);
    assert!(associated_omega(&w, -1.0).is_err());
}

#[test]
fn roundtrip_examples() {
    assert!(lc_minorant_roundtrip(&seq("factorial", 64), 0).unwrap().abs() < 1e-9);
    let g = seq("gevrey:2", 64);
    let r = lc_minorant_roundtrip(&g, 10).unwrap();
    assert!((r - 2.0 * 3_628_800f64.ln()).abs() < 1e-6);
    assert!((r - g.log_m()[10]).abs() < 1e-6);
    let l = seq("loglog:1", 64);
    assert!((lc_minorant_roundtrip(&l, 20).unwrap() - l.log_m()[20]).abs() < 1e-6);
    assert!(lc_minorant_roundtrip(&l, 40).is_err());
}

#[test]
fn upper_conjugate_of_identity_weight() {
    let w = WeightFunction::power(1.0).unwrap();
    // raw t^alpha is not normalized, so phi*(0) = -omega(1) = -1
    assert!((legendre_upper(&w, 0.0).unwrap().value + 1.0).abs() < 1e-9);
    let e = std::f64::consts::E;
    assert!(legendre_upper(&w, e).unwrap().value.abs() < 1e-6);
    for x in [1.0, 2.5, 10.0, 100.0] {
        let v = legendre_upper(&w, x).unwrap().value;
        assert!((v - (x * x.ln() - x)).abs() < 1e-6, "x = {x}: {v}");
    }
}

#[test]
fn upper_conjugate_of_normalized_weight_vanishes_at_zero() {
    let w = WeightFunction::associated(seq("gevrey:2", 128));
    assert!(legendre_upper(&w, 0.0).unwrap().value.abs() < 1e-12);
}

#[test]
fn lower_conjugate_power_examples() {
    let p1 = WeightFunction::power(1.0).unwrap();
    assert!((legendre_lower(&p1, 4.0).unwrap().value - 4.0).abs() < 1e-6);
    let p2 = WeightFunction::power(2.0).unwrap();
    let v = legendre_lower(&p2, 8.0).unwrap().value;
    assert!((v - 7.5595).abs() < 1e-4);
    assert!((v - power_lower(2.0, 8.0)).abs() < 1e-6 * v);
}

#[test]
fn lower_conjugate_of_constant() {
    for t in [0.5, 3.0, 1e4] {
        let v = legendre_lower_fn(|_| 2.5, t).unwrap();
        assert!((v.value - 2.5).abs() < 1e-6, "t = {t}: {v:?}");
    }
}

#[test]
fn lower_conjugate_matches_closed_form_over_decades() {
    for alpha in [1.0, 2.0, 3.0] {
        let w = WeightFunction::power(alpha).unwrap();
        for k in 0..=24 {
            let t = 10f64.powf(k as f64 / 4.0);
            let v = legendre_lower(&w, t).unwrap().value;
            let c = power_lower(alpha, t);
            assert!(((v - c) / c).abs() < 1e-6, "alpha {alpha}, t {t}: {v} vs {c}");
        }
    }
}

#[test]
fn power_condition_examples() {
    let grid = LogGrid::from_t(1.0, 1e6, 256).unwrap();
    let p1 = WeightFunction::power(1.0).unwrap();
    let q = check_function_condition(&p1, FunctionCondition::OmegaQ, &grid).unwrap();
    assert_eq!(q.holds, Verdict::Holds);
    let p2 = WeightFunction::power(2.0).unwrap();
    let o2 = check_function_condition(&p2, FunctionCondition::Omega2, &grid).unwrap();
    assert_eq!(o2.holds, Verdict::Fails);
    let m = check_function_condition(&p1, FunctionCondition::MixedOmega7Equ, &grid).unwrap();
    assert_eq!(m.holds, Verdict::Holds, "{m:?}");
}

#[test]
fn omega_q_partial_integral_is_log() {
    // int_1^T t/t^2 dt = log T, so doubling log T doubles the partial integral
    let grid = LogGrid::from_t(1.0, 1e8, 64).unwrap();
    let v = check_function_condition(&WeightFunction::power(1.0).unwrap(), FunctionCondition::OmegaQ, &grid)
        .unwrap();
    assert_eq!(v.holds, Verdict::Holds);
}

#[test]
fn grid_validation() {
    assert!(LogGrid::from_t(0.0, 10.0, 64).is_err());
    assert!(LogGrid::from_t(2.0, 1.0, 64).is_err());
    assert!(LogGrid::from_t(1.0, 10.0, 4).is_err());
}

#[test]
fn power_exponent_domain() {
    assert!(WeightFunction::power(1.0).is_ok());
    for bad in [0.5, 0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(WeightFunction::power(bad).is_err(), "{bad}");
    }
}
