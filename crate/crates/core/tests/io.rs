use carleman_lab::io::*;
use carleman_lab::matrices::build_example_matrix;
use carleman_lab::report::{emit_report, write_report, Report, TOOL_VERSION};
use carleman_lab::witness::{build_exponent_basis, Monomial, WitnessVariant};
use carleman_lab::*;
use num_complex::Complex64;
use std::fs;

#[test]
fn sequence_csv_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    for f in ["gevrey:3", "qgevrey:2", "loglog:1"] {
        let w = WeightSequence::new(f.parse().unwrap(), 128).unwrap();
        write_sequence_csv(&path, &w).unwrap();
        let back = read_sequence_csv(&path).unwrap();
        assert_eq!(back.log_m(), w.log_m());
    }
}

#[test]
fn sequence_csv_rejects_bad_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "j,logM\n0,0\n2,1\n").unwrap();
    assert!(read_sequence_csv(&path).is_err());
    assert!(read_sequence_csv(&dir.path().join("missing.csv")).is_err());
}

#[test]
fn series_csv_roundtrip_with_zeros() {
    let mut f = WeightedPowerSeries::from_complex(&[
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -2.0),
        Complex64::new(0.3, 0.4),
    ])
    .unwrap();
    f.set(1, ScaledCoefficient::ZERO);
    let back = parse_series_csv(&series_csv(&f)).unwrap();
    assert_eq!(back, f);
}

#[test]
fn tabulated_and_oracle_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("w.csv");
    fs::write(&t, "t,omega\n1,0\n2,0.5\n4,1.5\n8,3\n").unwrap();
    assert!(read_tabulated_csv(&t).is_ok());
    let o = dir.path().join("o.csv");
    fs::write(&o, "j,k,omega\n0,5,0.5\n3,7,2\n").unwrap();
    let oracle = read_oracle_csv(&o).unwrap();
    assert_eq!(oracle.weight(0, 5), 0.5);
    assert_eq!(oracle.weight(3, 7), 2.0);
    assert_eq!(oracle.weight(1, 1), 1.0);
    fs::write(&o, "0.5,5,1\n").unwrap();
    assert!(read_oracle_csv(&o).is_err());
}

#[test]
fn matrix_json_roundtrip() {
    let mx = build_example_matrix(&[0.5, 1.0, 2.0], 64).unwrap();
    let back = matrix_from_json(&matrix_to_json(&mx)).unwrap();
    assert_eq!(back.lambdas(), mx.lambdas());
    for (a, b) in back.rows().iter().zip(mx.rows()) {
        assert_eq!(a.log_m(), b.log_m());
    }
    assert!(matrix_from_json(r#"{"lambdas":[1],"J":3,"rows":[[0,0]]}"#).is_err());
}

#[test]
fn witness_bundle_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bundle.json");
    let bundle = WitnessBundle {
        basis: build_exponent_basis(2, 0.25, 0.75, 3).unwrap(),
        gap: GapSequence::minimal(3, WitnessVariant::Cauchy),
        element: Some(
            AlgebraElement::new(vec![Monomial { alpha: Complex64::new(1.5, -0.5), exponents: vec![1, 2] }]).unwrap(),
        ),
        coefficients_ref: "coeffs.csv".into(),
        diagnostics: serde_json::json!({"note": "x"}),
    };
    write_witness_bundle(&path, &bundle).unwrap();
    assert_eq!(read_witness_bundle(&path).unwrap(), bundle);
}

#[test]
fn config_formats() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("a.toml");
    fs::write(
        &toml_path,
        "family = \"gevrey:2\"\nJ = 256\nconditions = [\"mg\", \"nq\"]\n[grid]\ntmin = 1.0\ntmax = 1e4\npoints = 64\n",
    )
    .unwrap();
    let c = load_config(&toml_path).unwrap();
    assert_eq!(c.family.as_deref(), Some("gevrey:2"));
    assert_eq!(c.j, Some(256));
    assert_eq!(c.conditions, vec!["mg", "nq"]);
    assert_eq!(c.grid.unwrap().points, 64);

    let json_path = dir.path().join("a.json");
    fs::write(&json_path, serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(load_config(&json_path).unwrap(), c);

    fs::write(&toml_path, "family = \"gevrey:2\"\nbogus = 1\n").unwrap();
    assert!(load_config(&toml_path).is_err());
}

#[test]
fn empty_report_is_valid_json() {
    let r = Report::new();
    let text = emit_report(&r);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["verdicts"], serde_json::json!([]));
    assert_eq!(v["tool_version"], TOOL_VERSION);
    assert!(text.ends_with('\n'));
}

#[test]
fn single_verdict_echoes_certificate() {
    let mut r = Report::new();
    r.input("family", "factorial");
    r.push(ConditionVerdict::new("pointwise-square", Verdict::Holds).with_cert("C", 1.0).with_cert("h", 1.0));
    r.artifact("coeffs.csv");
    let v: serde_json::Value = serde_json::from_str(&emit_report(&r)).unwrap();
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 1);
    assert_eq!(v["verdicts"][0]["holds"], "holds");
    assert_eq!(v["verdicts"][0]["certificate"]["C"], 1.0);
    assert_eq!(v["artifacts"][0], "coeffs.csv");
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let build = || {
        let mut r = Report::new();
        r.input("J", 512);
        let w = WeightSequence::new("gevrey:2".parse().unwrap(), 512).unwrap();
        r.push(carleman_lab::sequences::check_sequence_condition(&w, SequenceCondition::NonQuasianalytic).unwrap());
        r
    };
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_report(&a, &build()).unwrap();
    write_report(&b, &build()).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(write_report(&dir.path().join("no/such/dir.json"), &build()).is_err());
}
