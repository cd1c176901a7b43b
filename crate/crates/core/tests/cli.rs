use serde_json::Value;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use superholder::cli::run;
use superholder::tate_colmez::PsiTower;
use superholder::{Prime, PuiseuxSeries};

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn scratch(contents: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::SeqCst);
    let path =
        std::env::temp_dir().join(format!("superholder-cli-{}-{n}.json", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn cli(args: &[&str]) -> (i32, Value, String) {
    let argv = std::iter::once("superholder").chain(args.iter().copied());
    let out = run(argv);
    let body = serde_json::from_str(&out.stdout).unwrap_or(Value::Null);
    (out.code, body, out.stderr)
}

#[test]
fn decomplete_half_plus_cube() {
    let f = scratch(r#"{"p":2,"level":1,"prec_num":10,"terms":[[1,1],[6,1]]}"#);
    let (code, body, _) = cli(&[
        "decomplete",
        "--p",
        "2",
        "--k",
        "2",
        "--in",
        f.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(body["n"], 1);
    assert_eq!(body["classified"]["n"], 1);
}

#[test]
fn commutant_solve_gamma_four() {
    // γ_4(X) = X + X^3 + X^4 mod X^5 over F_3
    let u = scratch(r#"{"p":3,"level":0,"prec_num":5,"terms":[[1,1],[3,1],[4,1]]}"#);
    let (code, body, _) = cli(&[
        "commutant",
        "solve",
        "--p",
        "3",
        "--in",
        u.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(body["b_digits"], serde_json::json!([1, 1]));
    assert_eq!(body["n"], 0);
}

#[test]
fn commutant_rejection_exits_refuted() {
    let u = scratch(r#"{"p":3,"level":0,"prec_num":5,"terms":[[1,1],[2,1]]}"#);
    let (code, body, _) = cli(&["commutant", "solve", "--in", u.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(body["status"], "refuted");
    let (code, body, _) = cli(&["commutant", "check", "--in", u.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(body["verdict"], "refuted");
}

#[test]
fn suite_by_label() {
    let (code, body, _) = cli(&["suite", "--name", "colmtn", "--p", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(body["suite"], "tate-traces");
    assert_eq!(body["passed"], true);
    let props = body["properties"].as_array().unwrap();
    for name in ["identity on E+_n", "equivariance", "val T_n f >= val f - 1"] {
        assert!(props.iter().any(|p| p["name"] == name), "{name}");
    }
}

#[test]
fn reports_are_deterministic() {
    let a = run(["superholder", "suite", "--suite", "gmcom", "--seed", "11"]);
    let b = run(["superholder", "suite", "--suite", "gmcom", "--seed", "11"]);
    assert_eq!(a, b);
    assert_eq!(a.code, 0);
}

#[test]
fn parse_errors_report_the_offset() {
    let f = scratch("X^(1/3) + 2*X^(4/");
    let (code, _, err) = cli(&[
        "series",
        "--p",
        "3",
        "--prec",
        "3",
        "--in",
        f.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("byte 17"), "{err}");
    let g = scratch(r#"{"p":3,"level":0,"prec_num":5,"terms":[[1,1],]}"#);
    let (code, _, err) = cli(&["series", "--in", g.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("parse error at byte"), "{err}");
}

#[test]
fn text_series_round_trip() {
    let f = scratch("X^(1/3) + 2*X^(4/3)");
    let (code, body, _) = cli(&[
        "series",
        "--p",
        "3",
        "--prec",
        "3",
        "--in",
        f.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(body["level"], 1);
    assert_eq!(body["terms"].as_array().unwrap().len(), 2);
    let out = run([
        "superholder",
        "series",
        "--p",
        "3",
        "--prec",
        "3",
        "--format",
        "text",
        "--in",
        f.to_str().unwrap(),
    ]);
    assert_eq!(out.stdout, "X^(1/3) + 2*X^(4/3) + O(X^3)\n");
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&["nonsense"]).0, 1);
    let f = scratch("X");
    assert_eq!(cli(&["series", "--in", f.to_str().unwrap()]).0, 1);
    assert_eq!(cli(&["suite", "--name", "missing"]).0, 1);
    let g = scratch(r#"{"p":3,"level":0,"prec_num":5,"terms":[[1,1]]}"#);
    assert_eq!(
        cli(&["series", "--p", "2", "--in", g.to_str().unwrap()]).0,
        1
    );
}

#[test]
fn censored_profile_is_unresolved() {
    // X^9 is fixed by Γ_1 modulo X^10 for p = 3
    let f = scratch(r#"{"p":3,"level":0,"prec_num":10,"terms":[[9,1]]}"#);
    let (code, body, _) = cli(&["profile", "--k", "1", "--in", f.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(body["status"], "unresolved");
}

#[test]
fn mahler_verdicts() {
    let f = scratch(r#"{"p":2,"level":1,"prec_num":128,"terms":[[1,1]]}"#);
    let path = f.to_str().unwrap();
    let (code, body, _) = cli(&[
        "mahler", "--k", "2", "--level", "2", "--lambda", "1", "--in", path,
    ]);
    assert_eq!((code, body["verdict"].as_str()), (0, Some("certified")));
    let (code, body, _) = cli(&[
        "mahler", "--k", "2", "--level", "2", "--lambda", "2", "--in", path,
    ]);
    assert_eq!((code, body["verdict"].as_str()), (2, Some("refuted")));
    let table = scratch(
        r#"{"p":2,"t":1,"values":[{"p":2,"level":0,"prec_num":4,"terms":[[1,1]]},{"p":2,"level":0,"prec_num":4,"terms":[]}]}"#,
    );
    let (code, body, _) = cli(&["mahler", "--in", table.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(body["n_max"], 1);
}

#[test]
fn trace_and_tower() {
    let f = scratch(r#"{"p":2,"level":1,"prec_num":8,"terms":[[1,1],[2,1]]}"#);
    let (code, body, _) = cli(&["trace", "--level", "0", "--in", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    // X^(1/2) = (1+X)^(1/2) - 1, so T_0(X^(1/2) + X) = 1 + X
    assert_eq!(
        body["traces"][0]["trace"]["terms"],
        serde_json::json!([[0, 1], [1, 1]])
    );

    let g = scratch(r#"{"p":3,"level":0,"prec_num":20,"terms":[[1,1],[2,1]]}"#);
    let tower = run([
        "superholder",
        "psi-tower",
        "embed",
        "--depth",
        "3",
        "--in",
        g.to_str().unwrap(),
    ]);
    assert_eq!(tower.code, 0);
    let t = scratch(&tower.stdout);
    let (code, body, _) = cli(&["psi-tower", "test", "--in", t.to_str().unwrap()]);
    assert_eq!((code, body["verdict"].as_str()), (0, Some("certified")));

    // ψ(m_1) = 1 + 2X != m_0
    let bad = scratch(
        r#"{"depth":1,"entries":[{"p":3,"level":0,"prec_num":4,"terms":[[0,1]]},{"p":3,"level":0,"prec_num":12,"terms":[[0,1],[1,1],[2,2]]}]}"#,
    );
    let (code, body, _) = cli(&["psi-tower", "test", "--in", bad.to_str().unwrap()]);
    assert_eq!((code, body["status"].as_str()), (2, Some("refuted")));

    let f = PuiseuxSeries::from_coeffs(Prime::new(3).unwrap(), &[0, 1, 1], 20);
    let h = PuiseuxSeries::from_coeffs(Prime::new(3).unwrap(), &[0, 1], 20);
    let bent = PsiTower::perturbed(&f, &h, 2, 3).unwrap();
    let t = scratch(&serde_json::to_string(&bent.to_json()).unwrap());
    let (code, body, _) = cli(&["psi-tower", "test", "--in", t.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(body["witness"]["index"], 2);
}

#[test]
fn phigamma_gauge_pipeline() {
    let u = scratch(r#"{"k":1,"U":[[{"p":3,"level":0,"prec_num":12,"terms":[[0,1],[1,1]]}]]}"#);
    let upath = u.to_str().unwrap();
    let module = run(["superholder", "phigamma", "gauge", "--in", upath]);
    assert_eq!(module.code, 0);
    let m = scratch(&module.stdout);
    let mpath = m.to_str().unwrap();
    let (code, body, _) = cli(&["phigamma", "validate", "--in", mpath]);
    assert_eq!((code, body["pass"].as_bool()), (0, Some(true)));
    let (code, body, _) = cli(&["phigamma", "profile", "--in", mpath]);
    assert_eq!(code, 0);
    assert_eq!(body["profile"]["lambda"], 1.0);
    let (code, body, _) = cli(&["phigamma", "fixed-point", "--in", upath]);
    assert_eq!(code, 0);
    assert!(body["residual"].as_str().unwrap().starts_with(">="));
    let x = scratch(r#"[{"p":3,"level":1,"prec_num":36,"terms":[[1,1]]}]"#);
    let (code, body, _) = cli(&[
        "phigamma",
        "vector",
        "--in",
        upath,
        "--x",
        x.to_str().unwrap(),
    ]);
    assert_eq!((code, body["n_hat"].as_u64()), (0, Some(1)));
}

#[test]
fn out_flag_writes_file() {
    let f = scratch("X + X^2");
    let target =
        std::env::temp_dir().join(format!("superholder-cli-out-{}.json", std::process::id()));
    let out = run([
        "superholder",
        "series",
        "--p",
        "5",
        "--prec",
        "4",
        "--in",
        f.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(
        written.trim(),
        r#"{"p":5,"level":0,"prec_num":4,"terms":[[1,1],[2,1]]}"#
    );
}
