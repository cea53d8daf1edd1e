use fracsplit::cli::ProblemSpec;
use fracsplit::mlf::EvalControl;
use fracsplit::rational::{exp, exp_f64, q_f64};
use fracsplit::sdomain::{fde_laplace, inverse_laplace_to_ml};
use fracsplit::solver::closed_form_solve;
use fracsplit::splitter::SplitSystem;
use std::path::PathBuf;
use std::process::Command;

fn fracsplit(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fracsplit")).args(args).env_remove("FRACSPLIT_RTOL").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn problem(name: &str, json: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("fracsplit-{}-{name}.json", std::process::id()));
    std::fs::write(&path, json).unwrap();
    path
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

const TWO_TERM: &str = r#"{"a": ["1", "1", "1"], "alpha": ["1/2", "3/2"], "ics": ["1", "1"]}"#;

#[test]
fn ml1_at_one_is_e() {
    let (code, out, _) = fracsplit(&["ml", "--family", "ml1", "--alpha", "1", "--z", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("2.718281828"), "{out}");
}

#[test]
fn ml2_matches_the_oracle() {
    let (code, out, _) = fracsplit(&["ml", "--family", "ml2", "--alpha", "1/4", "--beta", "3/4", "--z", "1"]);
    assert_eq!(code, 0);
    let v = values(&out)[0];
    assert!((v - 10.370156339821117).abs() < 1e-10 * v);
}

#[test]
fn ml_grid_prints_one_row_per_point() {
    let (code, out, _) = fracsplit(&["ml", "--family", "ml2", "--alpha", "1/2", "--beta", "1", "--z", "-1,0,1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("z,value"));
    assert_eq!(values(&out).len(), 3);
}

#[test]
fn ml_multi_reassembles_the_closed_form() {
    let spec = ProblemSpec::parse(TWO_TERM).unwrap();
    let fde = spec.fde().unwrap();
    let t = 0.5;
    let want = closed_form_solve(&fde, &[t]).unwrap()[0];
    let mut got = 0.0;
    for term in inverse_laplace_to_ml(&fde_laplace(&fde)).unwrap().terms {
        let s = term.spec();
        let join = |v: Vec<String>| v.join(",");
        let (code, out, err) = fracsplit(&[
            "ml",
            "--family",
            "multi",
            "--a",
            &join(term.a.iter().map(ToString::to_string).collect()),
            "--b",
            &term.b.to_string(),
            "--scales",
            &join(s.scales.iter().map(|c| format!("{c:e}")).collect()),
            "--t",
            "0.5",
        ]);
        assert_eq!(code, 0, "{err}");
        got += q_f64(&term.scale) * t.powf(exp_f64(term.b) - 1.0) * values(&out)[0];
    }
    assert!((got - want).abs() < 1e-10 * want.abs(), "{got} vs {want}");
}

#[test]
fn ml_usage_and_convergence_codes() {
    assert_eq!(fracsplit(&["ml", "--family", "ml1", "--alpha", "1/0", "--z", "1"]).0, 2);
    assert_eq!(fracsplit(&["ml", "--family", "ml2", "--alpha", "1/2", "--z", "1"]).0, 2);
    assert_eq!(fracsplit(&["ml", "--family", "ml1", "--alpha", "1/2", "--z", "-5"]).0, 3);
    assert_eq!(fracsplit(&["ml", "--family", "ml1", "--alpha", "1/2", "--z", "1", "--k-max", "3"]).0, 3);
}

#[test]
fn split_two_term_has_the_expected_initial_values() {
    let path = problem("split2", r#"{"a": ["1", "1", "1"], "alpha": ["1/2", "3/2"], "ics": ["1", "-7/3"]}"#);
    let (code, out, err) = fracsplit(&["split", path.to_str().unwrap(), "--kind", "2m1"]);
    assert_eq!(code, 0, "{err}");
    let sys: SplitSystem = serde_json::from_str(&out).unwrap();
    assert_eq!(sys.unknowns(), ["x", "y1", "y2"]);
    assert_eq!(sys.orders(), vec![exp(1, 2), exp(1, 2), exp(1, 2)]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let init = &v["init"];
    assert_eq!(init[1], serde_json::json!(["0"]));
    assert_eq!(init[2], serde_json::json!(["-7/3"]));
}

#[test]
fn split_single_term_gives_two_equations() {
    let path = problem("split1", r#"{"a": ["1", "1"], "alpha": ["3/4"], "ics": ["1"]}"#);
    let (code, out, _) = fracsplit(&["split", path.to_str().unwrap(), "--kind", "2m1"]);
    assert_eq!(code, 0);
    let sys: SplitSystem = serde_json::from_str(&out).unwrap();
    assert_eq!(sys.equations().len(), 2);
}

#[test]
fn split_with_integer_inner_order_is_a_construction_error() {
    let path = problem("deg", r#"{"a": ["1", "1", "1", "1"], "alpha": ["1/2", "2", "5/2"], "ics": ["1", "0", "0"]}"#);
    let (code, _, err) = fracsplit(&["split", path.to_str().unwrap(), "--kind", "2m1"]);
    assert_eq!(code, 4, "{err}");
}

#[test]
fn split_json_round_trips() {
    let path = problem("rt", r#"{"a": ["2", "-1/3", "1", "3"], "alpha": ["1/3", "7/4", "5/2"], "ics": ["1", "0.5", "-2"]}"#);
    let (code, out, _) = fracsplit(&["split", path.to_str().unwrap(), "--kind", "2m1"]);
    assert_eq!(code, 0);
    let sys: SplitSystem = serde_json::from_str(&out).unwrap();
    assert_eq!(serde_json::to_string_pretty(&sys).unwrap().trim(), out.trim());
}

#[test]
fn problem_spec_round_trips() {
    let spec = ProblemSpec::parse(
        r#"{"a": ["1", "3/2"], "alpha": ["5/4"], "ics": ["0.25", "-1"], "split": {"kind": "2m1", "cut": "1/4"}}"#,
    )
    .unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"1/4\""));
    assert_eq!(ProblemSpec::parse(&text).unwrap(), spec);
}

#[test]
fn solve_matches_the_relaxation_closed_form() {
    let path = problem("relax", r#"{"a": ["1", "1"], "alpha": ["1/2"], "ics": ["1"]}"#);
    let (code, out, err) = fracsplit(&["solve", path.to_str().unwrap(), "--steps", "2000"]);
    assert_eq!(code, 0, "{err}");
    let ctrl = EvalControl::default();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,x"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let want = fracsplit::mlf::ml1(exp(1, 2), -cols[0].sqrt(), &ctrl).unwrap();
        assert!((cols[1] - want).abs() < 1e-3, "t = {}: {} vs {want}", cols[0], cols[1]);
    }
}

#[test]
fn solve_step_floor() {
    let path = problem("floor", r#"{"a": ["1", "1"], "alpha": ["1/2"], "ics": ["1"]}"#);
    assert_eq!(fracsplit(&["solve", path.to_str().unwrap(), "--steps", "7"]).0, 2);
    let (code, out, _) = fracsplit(&["solve", path.to_str().unwrap(), "--steps", "8"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 10);
}

#[test]
fn solve_compare_adds_closed_form_and_footer() {
    let path = problem("cmp", TWO_TERM);
    let (code, out, _) = fracsplit(&["solve", path.to_str().unwrap(), "--kind", "2m1", "--steps", "200", "--compare"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("t,x,y1,y2,x_closed_form"));
    let footer = out.lines().last().unwrap();
    let gap: f64 = footer.strip_prefix("# max_rel_gap=").unwrap().parse().unwrap();
    assert!(gap.is_finite() && gap < 1e-1);
}

#[test]
fn solve_writes_lossless_csv() {
    let path = problem("csv", TWO_TERM);
    let file = std::env::temp_dir().join(format!("fracsplit-{}-out.csv", std::process::id()));
    let (code, _, _) = fracsplit(&["solve", path.to_str().unwrap(), "--kind", "chain", "--steps", "16", "--out", file.to_str().unwrap()]);
    // orders 1/2 and 3/2 share no cell
    assert_eq!(code, 4);
    let (code, out, _) = fracsplit(&["solve", path.to_str().unwrap(), "--kind", "2m1", "--steps", "16", "--out", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let csv = std::fs::read_to_string(&file).unwrap();
    for cell in csv.lines().nth(5).unwrap().split(',') {
        let v: f64 = cell.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), cell);
    }
}

#[test]
fn solve_is_deterministic_across_modes() {
    let path = problem("det", TWO_TERM);
    let p = path.to_str().unwrap();
    let a = fracsplit(&["solve", p, "--kind", "2m1", "--steps", "1500"]).1;
    let b = fracsplit(&["solve", p, "--kind", "2m1", "--steps", "1500"]).1;
    let c = fracsplit(&["--sequential", "solve", p, "--kind", "2m1", "--steps", "1500"]).1;
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn verify_exit_codes_follow_the_verdict() {
    let path = problem("verify", TWO_TERM);
    let p = path.to_str().unwrap();
    let (code, out, err) = fracsplit(&["verify", p, "--kind", "2m1"]);
    assert_eq!(code, 0, "{out}{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "equivalent");
    assert_eq!(report["symbolic_equal"], true);

    let (code, out, _) = fracsplit(&["verify", p, "--kind", "naive_pair"]);
    assert_eq!(code, 1);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verdict"], "not_equivalent");

    assert_eq!(fracsplit(&["verify", p]).0, 2);
    assert_eq!(fracsplit(&["verify", "/nonexistent/problem.json", "--kind", "2m1"]).0, 2);
}

#[test]
fn verify_can_be_inconclusive() {
    // an absurd tolerance lets the naive split pass numerically
    let path = problem("inc", TWO_TERM);
    let (code, out, _) = fracsplit(&["verify", path.to_str().unwrap(), "--kind", "naive_pair", "--tol", "1e6"]);
    assert_eq!(code, 5, "{out}");
}

#[test]
fn verify_uses_the_split_block() {
    let path = problem(
        "block",
        r#"{"a": ["1", "1", "1"], "alpha": ["1/2", "3/2"], "ics": ["1", "1"], "split": {"kind": "2m1", "refine": [{"equation": 0, "gamma": "1/4"}]}}"#,
    );
    let (code, out, _) = fracsplit(&["verify", path.to_str().unwrap(), "--steps", "1000"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn composition_counterexamples() {
    for (name, e) in [("ex4.1", "-1/4"), ("ex4.2", "-1/2"), ("ex4.3", "-3/10")] {
        let (code, out, _) = fracsplit(&["counterexample", name]);
        assert_eq!(code, 0);
        assert!(out.contains(&format!("NOT EQUAL: lowest mismatching exponent {e}")), "{out}");
    }
}

#[test]
fn naive_pair_counterexamples() {
    for name in ["case-i", "case-ii", "case-iii"] {
        let (code, out, _) = fracsplit(&["counterexample", name]);
        assert_eq!(code, 0);
        assert!(out.contains("NOT EQUIVALENT"), "{out}");
    }
}

#[test]
fn cut_counterexample_names_the_residual() {
    let (code, out, _) = fracsplit(&["counterexample", "thm-2m2"]);
    assert_eq!(code, 0);
    assert!(out.contains("(6)*s^(-1/2)"), "{out}");
}

#[test]
fn unknown_counterexample() {
    assert_eq!(fracsplit(&["counterexample", "ex9.9"]).0, 2);
}

#[test]
fn transform_prints_the_time_domain_form() {
    let path = problem("tr", r#"{"a": ["1", "1"], "alpha": ["1/2"], "ics": ["1"]}"#);
    let (code, out, _) = fracsplit(&["transform", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["time_domain"].as_array().unwrap().len(), 1);
}

#[test]
fn rtol_override_from_the_environment() {
    let run = |rtol: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_fracsplit"))
            .args(["ml", "--family", "ml1", "--alpha", "1/2", "--z", "1"])
            .env("FRACSPLIT_RTOL", rtol)
            .output()
            .unwrap();
        (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
    };
    let (code, coarse) = run("1e-3");
    assert_eq!(code, 0);
    let fine = fracsplit(&["ml", "--family", "ml1", "--alpha", "1/2", "--z", "1"]).1;
    assert_ne!(coarse, fine);
    assert_eq!(run("abc").0, 2);
}
