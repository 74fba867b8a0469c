use carleman_lab::formal_series::{
    cauchy_product, hadamard_product, theta_series, weighted_norm,
};
use carleman_lab::io::{matrix_from_json, matrix_to_json, parse_series_csv, series_csv};
use carleman_lab::matrices::{associated_matrix, build_example_matrix};
use carleman_lab::sequences::{check_sequence_condition, compare_sequences, Relation};
use carleman_lab::weight_functions::{
    associated_omega_log, lc_minorant_roundtrip, legendre_lower, legendre_upper,
};
use carleman_lab::witness::{
    algebra_element_coefficients, build_exponent_basis, build_witness, combinations, ElementMethod, Monomial,
    WitnessVariant, WitnessWeight,
};
use carleman_lab::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn ln_fact(j: usize) -> f64 {
    (2..=j).map(|i| (i as f64).ln()).sum()
}

fn family() -> impl Strategy<Value = FamilyDescriptor> {
    prop_oneof![
        Just(FamilyDescriptor::Factorial),
        (1.0..4.0f64).prop_map(|s| FamilyDescriptor::Gevrey { s }),
        (1.05..3.0f64).prop_map(|q| FamilyDescriptor::QGevrey { q }),
        (0.25..4.0f64).prop_map(|lambda| FamilyDescriptor::LogLogRow { lambda }),
    ]
}

/// Log-convex custom sequence: nondecreasing `log mu_j >= 0`.
fn log_convex(len: usize) -> impl Strategy<Value = WeightSequence> {
    (0.0..2.0f64, prop::collection::vec(0.0..0.6f64, len)).prop_map(|(start, steps)| {
        let mut log_m = vec![0.0];
        let mut mu = start;
        for s in steps {
            log_m.push(log_m.last().unwrap() + mu);
            mu += s;
        }
        WeightSequence::custom(log_m).unwrap()
    })
}

fn complex_series(j_max: usize) -> impl Strategy<Value = WeightedPowerSeries> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, any::<bool>()), j_max + 1).prop_map(|v| {
        let z: Vec<Complex64> = v.into_iter().map(|(a, b, keep)| if keep { Complex64::new(a, b) } else { Complex64::new(0.0, 0.0) }).collect();
        WeightedPowerSeries::from_complex(&z).unwrap()
    })
}

fn close(a: &WeightedPowerSeries, b: &WeightedPowerSeries, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| {
        let (x, y) = (x.to_complex(), y.to_complex());
        (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_m_is_prefix_sum_of_log_mu(f in family(), j in 16usize..300) {
        let w = WeightSequence::new(f, j).unwrap();
        prop_assert_eq!(w.log_m()[0], 0.0);
        let mut acc = 0.0;
        for k in 1..=j {
            acc += w.log_mu()[k];
            prop_assert!((w.log_m()[k] - acc).abs() <= 1e-9 * acc.abs().max(1.0));
        }
    }

    #[test]
    fn log_convexity_consequences(f in family()) {
        let w = WeightSequence::new(f, 200).unwrap();
        let lm = w.log_m();
        for j in 2..=200 {
            prop_assert!(lm[j] / j as f64 >= lm[j - 1] / (j - 1) as f64 - 1e-9);
        }
        for j in 0..=100 {
            for k in 0..=100 {
                prop_assert!(lm[j] + lm[k] <= lm[j + k] + 1e-9 * lm[j + k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn comparison_reflexive(w in log_convex(64)) {
        prop_assert_eq!(compare_sequences(&w, &w).relation, Relation::Equivalent);
    }

    #[test]
    fn strict_order_is_antisymmetric(s in 1.2..3.0f64) {
        let a = WeightSequence::new(FamilyDescriptor::Factorial, 512).unwrap();
        let b = WeightSequence::new(FamilyDescriptor::Gevrey { s }, 512).unwrap();
        let c = compare_sequences(&a, &b);
        if c.strictly_below == Verdict::Holds {
            prop_assert_ne!(compare_sequences(&b, &a).below, Verdict::Holds);
        }
    }

    #[test]
    fn certificates_recheck(f in family(), c in 1usize..4) {
        let w = WeightSequence::new(f, 256).unwrap();
        let v = check_sequence_condition(&w, SequenceCondition::PointwiseSquare).unwrap();
        let (lc, lh) = (v.cert("C").unwrap().ln(), v.cert("h").unwrap().ln());
        for &(j, d) in &v.evidence {
            prop_assert!(j * d <= lc + j * lh + 1e-9 * (1.0 + (j * d).abs()));
        }
        let v = check_sequence_condition(&w, SequenceCondition::Mixed { c }).unwrap();
        let (ld, lh) = (v.cert("D").unwrap().ln(), v.cert("h").unwrap().ln());
        for &(j, d) in &v.evidence {
            prop_assert!(j * d <= ld + j * lh + 1e-9 * (1.0 + (j * d).abs()));
        }
        let v = check_sequence_condition(&w, SequenceCondition::ModerateGrowth).unwrap();
        let lc = v.cert("C").unwrap().ln();
        for &(_, d) in &v.evidence {
            prop_assert!(d <= lc + 1e-12);
        }
    }

    #[test]
    fn loglog_square_defect_is_constant(lambda in 0.25..3.0f64) {
        let a = WeightSequence::new(FamilyDescriptor::LogLogRow { lambda }, 300).unwrap();
        let b = WeightSequence::new(FamilyDescriptor::LogLogRow { lambda: 2.0 * lambda }, 300).unwrap();
        for j in 1..=300 {
            let d = 2.0 * a.log_small_m(j) - b.log_small_m(j);
            prop_assert!((d + ln_fact(j.min(15))).abs() < 1e-9 * (1.0 + b.log_m()[j].abs()));
        }
    }

    #[test]
    fn counting_form_matches_brute_force(f in family(), u in 0.0..1.0f64) {
        let w = WeightSequence::new(f, 256).unwrap();
        let y = u * w.log_mu()[256];
        let fast = associated_omega_log(&w, y);
        prop_assume!(!fast.saturated);
        let brute = w.log_m().iter().enumerate().map(|(j, l)| j as f64 * y - l).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((fast.value - brute).abs() <= 1e-12 * brute.abs().max(1.0));
    }

    #[test]
    fn omega_vanishes_on_unit_interval(f in family(), t in 0.0..1.0f64) {
        let w = WeightSequence::new(f, 64).unwrap();
        prop_assert_eq!(carleman_lab::weight_functions::associated_omega(&w, t).unwrap().value, 0.0);
    }

    #[test]
    fn roundtrip_recovers_log_m(f in family(), j in 0usize..=64) {
        let w = WeightSequence::new(f, 128).unwrap();
        let r = lc_minorant_roundtrip(&w, j).unwrap();
        prop_assert!((r - w.log_m()[j]).abs() <= 1e-6);
    }

    #[test]
    fn lower_conjugate_power_closed_form(alpha in 1.0..4.0f64, lt in 0.0..(1e6f64.ln())) {
        let t = lt.exp();
        let e = alpha + 1.0;
        let exact = (alpha.powf(1.0 / e) + alpha.powf(-alpha / e)) * t.powf(alpha / e);
        let v = legendre_lower(&WeightFunction::power(alpha).unwrap(), t).unwrap().value;
        prop_assert!(((v - exact) / exact).abs() <= 1e-6);
    }

    #[test]
    fn matrix_serialization_roundtrip(l in prop::collection::btree_set(1u32..16, 1..4)) {
        let lambdas: Vec<f64> = l.into_iter().map(|v| v as f64 / 4.0).collect();
        let mx = build_example_matrix(&lambdas, 40).unwrap();
        let back = matrix_from_json(&matrix_to_json(&mx)).unwrap();
        prop_assert_eq!(back.lambdas(), mx.lambdas());
        for (a, b) in back.rows().iter().zip(mx.rows()) {
            prop_assert_eq!(a.log_m(), b.log_m());
        }
    }

    #[test]
    fn series_csv_roundtrip(f in complex_series(24)) {
        prop_assert_eq!(parse_series_csv(&series_csv(&f)).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugates_have_the_right_shape(alpha in 1.0..3.0f64) {
        let w = WeightFunction::power(alpha).unwrap();
        let xs: Vec<f64> = (0..24).map(|i| 0.5 * i as f64).collect();
        let up: Vec<f64> = xs.iter().map(|&x| legendre_upper(&w, x).unwrap().value).collect();
        let ts: Vec<f64> = (0..24).map(|i| 1.0 + 3.0 * i as f64).collect();
        let lo: Vec<f64> = ts.iter().map(|&t| legendre_lower(&w, t).unwrap().value).collect();
        for i in 1..24 {
            prop_assert!(up[i] >= up[i - 1] - 1e-9);
            prop_assert!(lo[i] >= lo[i - 1] - 1e-9);
        }
        for i in 1..23 {
            // equal spacing: second differences
            prop_assert!(up[i + 1] - 2.0 * up[i] + up[i - 1] >= -1e-7);
            prop_assert!(lo[i + 1] - 2.0 * lo[i] + lo[i - 1] <= 1e-7);
        }
    }

    #[test]
    fn associated_matrix_rows_ordered(alpha in 1.0..3.0f64) {
        let mx = associated_matrix(&WeightFunction::power(alpha).unwrap(), &[0.5, 1.0, 2.0], 32).unwrap();
        for pair in mx.rows().windows(2) {
            for j in 0..=32 {
                prop_assert!(pair[0].log_m()[j] <= pair[1].log_m()[j] + 1e-12);
            }
        }
    }

    #[test]
    fn cauchy_ring_laws(f in complex_series(64), g in complex_series(64), h in complex_series(64)) {
        let fg = cauchy_product(&f, &g).unwrap();
        prop_assert!(close(&fg, &cauchy_product(&g, &f).unwrap(), 1e-12));
        let left = cauchy_product(&fg, &h).unwrap();
        let right = cauchy_product(&f, &cauchy_product(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-11));
        let dist = cauchy_product(&f, &g.add(&h).unwrap()).unwrap();
        let sum = fg.add(&cauchy_product(&f, &h).unwrap()).unwrap();
        prop_assert!(close(&dist, &sum, 1e-11));
        prop_assert_eq!(cauchy_product(&f, &WeightedPowerSeries::identity(64)).unwrap(), f);
    }

    #[test]
    fn hadamard_laws(f in complex_series(64), g in complex_series(64), h in complex_series(64)) {
        let fg = hadamard_product(&f, &g).unwrap();
        prop_assert!(close(&fg, &hadamard_product(&g, &f).unwrap(), 1e-15));
        let left = hadamard_product(&fg, &h).unwrap();
        let right = hadamard_product(&f, &hadamard_product(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-14));
        prop_assert_eq!(hadamard_product(&f, &WeightedPowerSeries::ones(64)).unwrap(), f);
    }

    #[test]
    fn norm_decreases_in_h(f in complex_series(48), h in 0.05..5.0f64) {
        let m = WeightSequence::new(FamilyDescriptor::Gevrey { s: 2.0 }, 48).unwrap();
        prop_assert!(weighted_norm(&f, &m, 2.0 * h).unwrap() <= weighted_norm(&f, &m, h).unwrap() + 1e-12);
    }

    #[test]
    fn theta_dominates(f in family()) {
        let m = WeightSequence::new(f, 200).unwrap();
        let th = theta_series(&m, 100, 200).unwrap();
        for j in 0..=100 {
            prop_assert!(th.log_s[j] >= m.log_m()[j] - 1e-12);
        }
    }

    #[test]
    fn combos_are_distinct(count in 1usize..=4, lo in 0.05..0.5f64, width in 0.05..0.45f64, degree in 1u32..=3) {
        let basis = build_exponent_basis(count, lo, lo + width, degree).unwrap();
        prop_assert!(basis.b.iter().all(|b| *b > lo && *b < lo + width));
        let mut c = combinations(&basis.b, degree);
        c.sort_by(f64::total_cmp);
        for w in c.windows(2) {
            prop_assert!(w[1] - w[0] >= 1e-9);
        }
    }

    #[test]
    fn witness_support_is_gap(steps in 1usize..6, b in 0.05..0.95f64, hadamard in any::<bool>()) {
        let variant = if hadamard { WitnessVariant::Hadamard } else { WitnessVariant::Cauchy };
        let gap = GapSequence::minimal(steps, variant);
        let n = WeightSequence::new(FamilyDescriptor::Gevrey { s: 2.0 }, 400).unwrap();
        let f = build_witness(b, &gap, WitnessWeight::Sequence(&n), 400).unwrap();
        prop_assert_eq!(f.support(), gap.k);
    }

    #[test]
    fn trivial_oracle_is_one(j in 0usize..10_000, k in 0usize..10_000) {
        prop_assert_eq!(SummationWeightOracle::Trivial.weight(j, k), 1.0);
    }

    #[test]
    fn closed_form_agrees_with_products(
        gens in 1usize..=2,
        raw in prop::collection::vec((prop::collection::vec(0u32..=3, 2), -2.0..2.0f64, -2.0..2.0f64), 1..=3),
        hadamard in any::<bool>(),
    ) {
        let mut monos: Vec<Monomial> = Vec::new();
        for (e, re, im) in raw {
            let mut e: Vec<u32> = e[..gens].to_vec();
            // cap total degree at 3
            while e.iter().sum::<u32>() > 3 {
                let i = e.iter().position(|v| *v > 0).unwrap();
                e[i] -= 1;
            }
            if e.iter().sum::<u32>() == 0 || monos.iter().any(|m| m.exponents == e) || (re == 0.0 && im == 0.0) {
                continue;
            }
            monos.push(Monomial { alpha: Complex64::new(re, im), exponents: e });
        }
        prop_assume!(!monos.is_empty());
        let elem = AlgebraElement::new(monos).unwrap();
        let basis = build_exponent_basis(2, 0.25, 0.75, 3).unwrap();
        let n = WeightSequence::new(FamilyDescriptor::LogLogRow { lambda: 1.0 }, 400).unwrap();
        let (gap, j_max) = if hadamard {
            (GapSequence::minimal(20, WitnessVariant::Hadamard), 21)
        } else {
            (GapSequence::minimal(4, WitnessVariant::Cauchy), 3 * 65)
        };
        let w = WitnessWeight::Sequence(&n);
        let cf = algebra_element_coefficients(&elem, &basis, &gap, w, j_max, ElementMethod::ClosedForm).unwrap();
        let bp = algebra_element_coefficients(&elem, &basis, &gap, w, j_max, ElementMethod::ByProducts).unwrap();
        for j in 0..=j_max {
            if !cf.determined[j] {
                continue;
            }
            let (a, b) = (cf.series.coeff(j), bp.series.coeff(j));
            if a.is_zero() {
                prop_assert!(b.is_zero(), "j = {}", j);
            } else {
                prop_assert!(!b.is_zero());
                prop_assert!((a.log_mag - b.log_mag).abs() <= 1e-9, "j = {}", j);
            }
        }
        for &(lo, hi) in &cf.gap_ranges {
            for j in lo + 1..hi {
                prop_assert!(bp.series.coeff(j).is_zero(), "gap j = {}", j);
            }
        }
    }
}
