use carleman_lab::matrices::{
    associated_matrix, build_example_matrix, check_matrix_condition, square_defect, verify_dynkin_sandwich,
    verify_good_equivalence,
};
use carleman_lab::sequences::check_sequence_condition;
use carleman_lab::*;

fn seq(s: &str, j: usize) -> WeightSequence {
    WeightSequence::new(s.parse().unwrap(), j).unwrap()
}

fn ln_fact(j: usize) -> f64 {
    (2..=j).map(|i| (i as f64).ln()).sum()
}

#[test]
fn power_one_matrix_is_j_over_e_to_the_j() {
    let mx = associated_matrix(&WeightFunction::power(1.0).unwrap(), &[1.0], 8).unwrap();
    let row = mx.row(1.0).unwrap();
    for j in 1..=8 {
        let jf = j as f64;
        assert!((row.log_m()[j] - (jf * jf.ln() - jf)).abs() < 1e-6, "j = {j}");
    }
}

#[test]
fn associated_rows_start_at_one() {
    let omega = WeightFunction::associated(seq("gevrey:2", 256));
    let mx = associated_matrix(&omega, &[0.5, 1.0, 2.0], 64).unwrap();
    for r in mx.rows() {
        assert_eq!(r.log_m()[0], 0.0);
    }
}

#[test]
fn associated_matrix_of_omega_m_recovers_m() {
    let m = seq("gevrey:2", 256);
    let mx = associated_matrix(&WeightFunction::associated(m.clone()), &[1.0], 64).unwrap();
    for j in 0..=64 {
        assert!((mx.row(1.0).unwrap().log_m()[j] - m.log_m()[j]).abs() < 1e-6, "j = {j}");
    }
}

#[test]
fn associated_rows_are_pointwise_ordered() {
    let mx = associated_matrix(&WeightFunction::power(2.0).unwrap(), &[0.25, 0.5, 1.0, 2.0, 4.0], 64).unwrap();
    for w in mx.rows().windows(2) {
        for j in 0..=64 {
            assert!(w[0].log_m()[j] <= w[1].log_m()[j] + 1e-12);
        }
    }
}

#[test]
fn example_matrix_constant_defect() {
    let mx = build_example_matrix(&[1.0, 2.0], 64).unwrap();
    let d = square_defect(&mx, false, 0, 1);
    for (i, v) in d.iter().enumerate() {
        let j = i + 1;
        // both rows have mu = 1 up to j0 = 15, so the constant only settles there
        assert!((v * j as f64 + ln_fact(j.min(15))).abs() < 1e-9, "j = {j}");
    }
    assert!((ln_fact(15) - 27.8993).abs() < 1e-4);
}

#[test]
fn example_matrix_quotient_ratio_is_loglog() {
    let mx = build_example_matrix(&[1.0, 2.0], 64).unwrap();
    let (a, b) = (&mx.rows()[0], &mx.rows()[1]);
    for j in 16..=64 {
        let jf = j as f64;
        assert!((b.log_mu()[j] - a.log_mu()[j] - jf.ln().ln().ln()).abs() < 1e-12);
    }
}

#[test]
fn example_rows_are_quasianalytic() {
    let mx = build_example_matrix(&[1.0, 2.0, 4.0], 512).unwrap();
    for r in mx.rows() {
        let v = check_sequence_condition(r, SequenceCondition::NonQuasianalytic).unwrap();
        assert_eq!(v.holds, Verdict::Fails);
    }
    assert_eq!(check_matrix_condition(&mx, MatrixCondition::Quasianalytic).unwrap().holds, Verdict::Holds);
}

#[test]
fn example_matrix_roumieu_square_pairs_double_lambda() {
    let mx = build_example_matrix(&[1.0, 2.0, 4.0], 1024).unwrap();
    let v = check_matrix_condition(&mx, MatrixCondition::RoumieuSquare).unwrap();
    assert_eq!(v.holds, Verdict::Holds, "{v:?}");
    assert_eq!(v.cert("kappa@1"), Some(2.0));
    assert_eq!(v.cert("kappa@2"), Some(4.0));
}

#[test]
fn example_matrix_big_square_fails() {
    let mx = build_example_matrix(&[1.0, 2.0, 4.0], 512).unwrap();
    assert_eq!(check_matrix_condition(&mx, MatrixCondition::RoumieuBigSquare).unwrap().holds, Verdict::Fails);
}

#[test]
fn constant_factorial_matrix_squares_with_itself() {
    let rows = vec![seq("factorial", 128), seq("factorial", 128)];
    let mx = WeightMatrix::new(vec![1.0, 2.0], rows).unwrap();
    let v = check_matrix_condition(&mx, MatrixCondition::RoumieuSquare).unwrap();
    assert_eq!(v.holds, Verdict::Holds);
    assert_eq!(v.cert("kappa@1"), Some(1.0));
    assert!((v.cert("C@1").unwrap() - 1.0).abs() < 1e-9);
    assert!((v.cert("h@1").unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn single_row_square_is_an_error() {
    let mx = build_example_matrix(&[1.0], 64).unwrap();
    assert!(check_matrix_condition(&mx, MatrixCondition::RoumieuSquare).is_err());
}

#[test]
fn matrix_rejects_disorder() {
    assert!(WeightMatrix::new(vec![2.0, 1.0], vec![seq("factorial", 32), seq("gevrey:2", 32)]).is_err());
    assert!(WeightMatrix::new(vec![1.0, 2.0], vec![seq("gevrey:2", 32), seq("factorial", 32)]).is_err());
}

#[test]
fn good_equivalence_for_power_and_gevrey() {
    let grid = LogGrid::from_t(1.0, 1e6, 128).unwrap();
    let p = WeightFunction::power(1.0).unwrap();
    let mx = associated_matrix(&p, &[1.0], 512).unwrap();
    let r = verify_good_equivalence(&p, &mx, 1.0, &grid).unwrap();
    assert!(r.lower_defect <= 1e-9 && r.c_lambda.is_finite(), "{r:?}");

    let g = WeightFunction::associated(seq("gevrey:2", 512));
    let mx = associated_matrix(&g, &[1.0], 127).unwrap();
    let grid = LogGrid::from_t(1.0, 1e3, 128).unwrap();
    let r = verify_good_equivalence(&g, &mx, 1.0, &grid).unwrap();
    assert!(r.holds, "{r:?}");
}

#[test]
fn good_equivalence_vanishes_on_unit_interval() {
    let g = WeightFunction::associated(seq("gevrey:2", 256));
    let mx = associated_matrix(&g, &[1.0], 64).unwrap();
    let grid = LogGrid::from_t(0.05, 0.999, 16).unwrap();
    let r = verify_good_equivalence(&g, &mx, 1.0, &grid).unwrap();
    assert_eq!(r.lower_defect, 0.0);
    assert_eq!(r.c_lambda, 0.0);
}

#[test]
fn dynkin_sandwich_for_power_and_gevrey() {
    let p = WeightFunction::power(1.0).unwrap();
    let mx = associated_matrix(&p, &[1.0], 256).unwrap();
    let grid = LogGrid::from_t(1.0, 1e5, 128).unwrap();
    let r = verify_dynkin_sandwich(&mx, 1.0, &grid).unwrap();
    assert!(r.left_defect <= 1e-6 && r.right_defect <= 1e-6, "{r:?}");
    assert!(r.points > 0);

    let g = WeightFunction::associated(seq("gevrey:2", 512));
    let mx = associated_matrix(&g, &[1.0], 127).unwrap();
    let r = verify_dynkin_sandwich(&mx, 1.0, &grid).unwrap();
    assert!(r.left_defect <= 1e-6 && r.right_defect <= 1e-6, "{r:?}");
}
