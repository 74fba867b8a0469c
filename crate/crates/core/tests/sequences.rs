use carleman_lab::sequences::{
    check_sequence_condition, compare_sequences, validate_weight_sequence, Relation,
};
use carleman_lab::*;

fn seq(s: &str, j: usize) -> WeightSequence {
    WeightSequence::new(s.parse().unwrap(), j).unwrap()
}

/// Independent log-factorial: plain summation of logs.
fn ln_fact(j: usize) -> f64 {
    (2..=j).map(|i| (i as f64).ln()).sum()
}

#[test]
fn factorial_prefix() {
    let w = seq("factorial", 4);
    let expect = [0.0, 0.0, 2f64.ln(), 6f64.ln(), 24f64.ln()];
    for (a, b) in w.log_m().iter().zip(expect) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn gevrey_two_values() {
    let w = seq("gevrey:2", 3);
    let expect = [1.0, 1.0, 4.0, 36.0];
    for (a, b) in w.log_m().iter().zip(expect) {
        assert!((a.exp() - b).abs() < 1e-12);
    }
}

#[test]
fn qgevrey_closed_form() {
    let w = seq("qgevrey:2", 40);
    for j in 0..=40 {
        let expect = ln_fact(j) + (j * j) as f64 * 2f64.ln();
        assert!((w.log_m()[j] - expect).abs() < 1e-9 * expect.max(1.0));
    }
}

#[test]
fn loglog_row_quotients() {
    let w = seq("loglog:1", 17);
    for j in 1..=15 {
        assert_eq!(w.log_mu()[j], 0.0, "mu_{j} should be 1");
    }
    for j in [16usize, 17] {
        let jf = j as f64;
        let mu = jf * jf.ln().ln();
        assert!((w.log_mu()[j] - mu.ln()).abs() < 1e-13);
    }
    // j0 = 15 is the last index with log log j < 1
    assert!(15f64.ln().ln() < 1.0 && 16f64.ln().ln() >= 1.0);
}

#[test]
fn rejects_out_of_range_parameters() {
    for bad in [
        FamilyDescriptor::Gevrey { s: 0.5 },
        FamilyDescriptor::QGevrey { q: 1.0 },
        FamilyDescriptor::LogLogRow { lambda: 0.0 },
    ] {
        assert!(WeightSequence::new(bad, 16).is_err());
    }
    assert!(WeightSequence::new(FamilyDescriptor::Factorial, 1).is_err());
}

#[test]
fn validation_examples() {
    for f in ["factorial", "gevrey:2"] {
        let r = validate_weight_sequence(&seq(f, 128));
        assert!(r.normalized && r.log_convex && r.valid, "{f}: {r:?}");
    }
    let w = seq("factorial", 64);
    for j in 0..=64 {
        assert!(w.log_small_m(j).abs() < 1e-9);
    }
    let bad = WeightSequence::from_values(&[1.0, 2.0, 2.5]).unwrap();
    let r = validate_weight_sequence(&bad);
    assert!(!r.log_convex);
    assert_eq!(r.first_violation, Some(2));
}

#[test]
fn factorial_strictly_below_gevrey() {
    let c = compare_sequences(&seq("factorial", 512), &seq("gevrey:2", 512));
    assert_eq!(c.relation, Relation::StrictlyBelow);
    // r_j = -(log j!)/j
    for (i, r) in c.rates.iter().enumerate() {
        let j = i + 1;
        assert!((r + ln_fact(j) / j as f64).abs() < 1e-9);
    }
    let back = compare_sequences(&seq("gevrey:2", 512), &seq("factorial", 512));
    assert_ne!(back.below, Verdict::Holds);
}

#[test]
fn comparison_is_reflexive() {
    for f in ["factorial", "gevrey:3", "qgevrey:2", "loglog:2"] {
        let w = seq(f, 256);
        assert_eq!(compare_sequences(&w, &w).relation, Relation::Equivalent, "{f}");
    }
}

#[test]
fn short_comparison_is_inconclusive() {
    let c = compare_sequences(&seq("factorial", 6), &seq("gevrey:2", 6));
    assert_eq!(c.relation, Relation::Inconclusive);
}

#[test]
fn factorial_pointwise_square_certificate() {
    let v = check_sequence_condition(&seq("factorial", 512), SequenceCondition::PointwiseSquare).unwrap();
    assert_eq!(v.holds, Verdict::Holds);
    assert!((v.cert("C").unwrap() - 1.0).abs() < 1e-9);
    assert!((v.cert("h").unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn qgevrey_mixed_two_is_exact() {
    let w = seq("qgevrey:2", 512);
    let v = check_sequence_condition(&w, SequenceCondition::Mixed { c: 2 }).unwrap();
    assert_eq!(v.holds, Verdict::Holds);
    assert!((v.cert("D").unwrap() - 1.0).abs() < 1e-9);
    assert!((v.cert("h").unwrap() - 1.0).abs() < 1e-9);
    for j in 1..=256 {
        assert!((4.0 * w.log_small_m(j) - w.log_small_m(2 * j)).abs() < 1e-6);
    }
}

#[test]
fn gevrey_mixed_two_fails_with_stirling_growth() {
    let w = seq("gevrey:2", 512);
    let v = check_sequence_condition(&w, SequenceCondition::Mixed { c: 2 }).unwrap();
    assert_eq!(v.holds, Verdict::Fails);
    // d_j ~ 2 log j - 2 - 2 log 2
    let j = 256.0_f64;
    let d = (4.0 * ln_fact(256) - ln_fact(512)) / j;
    assert!((d - (2.0 * j.ln() - 2.0 - 2.0 * 2f64.ln())).abs() < 0.05);
}

#[test]
fn destroyer_bound_dominates_tail() {
    let v = check_sequence_condition(&seq("qgevrey:2", 512), SequenceCondition::Destroyer { c: 2, c1: None })
        .unwrap();
    assert_eq!(v.holds, Verdict::Holds);
    assert!(v.cert("geometric_bound").unwrap() >= v.cert("carleman_tail").unwrap());
}

#[test]
fn mixed_range_too_short_is_an_error() {
    assert!(check_sequence_condition(&seq("factorial", 40), SequenceCondition::Mixed { c: 4 }).is_err());
}

#[test]
fn nq_ground_truth() {
    let nq = |f: &str| check_sequence_condition(&seq(f, 512), SequenceCondition::NonQuasianalytic).unwrap().holds;
    assert_eq!(nq("gevrey:2"), Verdict::Holds);
    assert_eq!(nq("qgevrey:2"), Verdict::Holds);
    assert_eq!(nq("loglog:1"), Verdict::Fails);
    assert_eq!(nq("factorial"), Verdict::Fails);
}

#[test]
fn moderate_growth_for_gevrey() {
    let v = check_sequence_condition(&seq("gevrey:2", 256), SequenceCondition::ModerateGrowth).unwrap();
    assert_eq!(v.holds, Verdict::Holds);
    let q = check_sequence_condition(&seq("qgevrey:2", 256), SequenceCondition::ModerateGrowth).unwrap();
    assert_eq!(q.holds, Verdict::Fails);
}
