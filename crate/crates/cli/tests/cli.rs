use std::io::Write;
use std::process::{Command, Stdio};

use localic::{Rational, Scalar};
use num_traits::{One, Pow, Signed};
use serde_json::{json, Value};

fn run(args: &[&str], stdin: Option<&str>) -> (i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_localic"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("binary runs");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_json(args: &[&str], stdin: Option<&str>) -> (i32, Value) {
    let (code, text) = run(args, stdin);
    (code, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
}

/// Splits `"d ± 2^-n"`.
fn certified(s: &str) -> (Rational, u32) {
    let (d, n) = s.split_once(" ± 2^-").expect("value format");
    (Rational::parse(d).unwrap(), n.parse().unwrap())
}

#[test]
fn real_eval_thirds() {
    let (code, v) = run_json(&["real-eval", "add(1/3, add(1/3, 1/3))", "--precision", "30"], None);
    assert_eq!(code, 0);
    assert_eq!(v, json!({ "value": "1 ± 2^-30" }));
}

#[test]
fn real_eval_matches_rational_arithmetic() {
    let exact = Rational::from_frac(2, 7) * Rational::from_frac(-5, 3) - Rational::from_frac(1, 11);
    for bits in [1u32, 10, 40] {
        let p = bits.to_string();
        let (code, v) = run_json(&["real-eval", "--precision", &p], Some("sub(mul(2/7, -5/3, 2), 1/11)"));
        assert_eq!(code, 0);
        let (d, n) = certified(v["value"].as_str().unwrap());
        assert_eq!(n, bits);
        assert!((d - exact.clone()).abs() < Rational::one() / Rational::from_int(2).pow(bits as i32));
    }
}

#[test]
fn real_eval_errors() {
    let (code, v) = run_json(&["real-eval", "add(1/3"], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    let (code, v) = run_json(&["real-eval", "mul(3, 5, 4)"], None);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "certificate");
    assert!(v["error"]["witness"].is_object());
}

#[test]
fn flags_are_validated() {
    let (code, _) = run(&["--effort", "0", "real-eval", "1"], None);
    assert_eq!(code, 2);
    let (code, _) = run(&["real-eval", "1", "--precision", "0"], None);
    assert_eq!(code, 2);
}

#[test]
fn map_apply_line_and_plane() {
    let (code, v) = run_json(&["map-apply"], Some(r#"{"map": "compose(abs, add(-1/2))", "point": "1/8"}"#));
    assert_eq!(code, 0);
    assert_eq!(v["class"], "Metric");
    let (d, _) = certified(v["value"].as_str().unwrap());
    assert!((d - Rational::from_frac(3, 8)).abs() < Rational::from_frac(1, 1 << 30));

    let (code, v) = run_json(&["map-apply", r#"{"map": "proj2", "point": ["1", "-1/4"]}"#], None);
    assert_eq!(code, 0);
    assert_eq!(v["source"], "L x L");
    assert_eq!(v["value"], "-0.25 ± 2^-30");

    let (code, v) = run_json(&["map-apply", r#"{"map": "proj1", "point": "1"}"#], None);
    assert_eq!(code, 2);
    assert!(v["error"].is_object());
}

#[test]
fn ball_check_queries_and_schema_paths() {
    let req = json!({
        "op": "way_inside", "q": "1/2",
        "u": { "carrier": "line", "balls": [{ "c": "0", "r": "1/2" }] },
        "v": { "carrier": "line", "balls": [{ "c": "0", "r": "1" }] },
    });
    let (code, v) = run_json(&["ball-check", &req.to_string()], None);
    assert_eq!(code, 0);
    assert_eq!(v["answer"], "Yes");

    let req = json!({
        "op": "diameter",
        "u": { "carrier": { "n": 2, "d": [["0", "3"], ["3", "0"]] }, "balls": [{ "c": 0, "r": "4" }] },
    });
    let (code, v) = run_json(&["ball-check", &req.to_string()], None);
    assert_eq!(code, 0);
    assert!(v["diameter_upper"].is_string());

    let req = json!({ "op": "positive", "u": { "carrier": "line", "balls": [{ "c": "0", "r": "-1" }] } });
    let (code, v) = run_json(&["ball-check", &req.to_string()], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["path"], "$.u.balls[0].r");

    let (code, v) = run_json(&["ball-check"], Some("{not json"));
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
}

#[test]
fn mm_check_reports() {
    let req = json!({
        "map": "scale(1/2)",
        "instances": [
            { "axiom": "MM3", "u": [{ "c": "0", "r": "1" }], "q": "1/2" },
            { "axiom": "MM4", "u": [{ "c": "0", "r": "1" }], "v": [{ "c": "0", "r": "1" }] },
        ],
    });
    let (code, v) = run_json(&["mm-check", &req.to_string()], None);
    assert_eq!(code, 0);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    assert_ne!(v["verdict"], "Fail");

    let bad = json!({ "map": "scale(1/2)", "instances": [{ "axiom": "MM9" }] });
    let (code, v) = run_json(&["mm-check", &bad.to_string()], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["path"], "$.instances[0].axiom");
}

#[test]
fn admissible_instances() {
    // f < 0 everywhere and f(a) > 1 cannot both hold
    let req = r#"{"n": 2, "lowers": [{"set": [0, 1], "bound": "0"}], "uppers": [{"set": [0], "bound": "1"}]}"#;
    let (code, v) = run_json(&["admissible", req], None);
    assert_eq!(code, 0);
    assert_eq!(v, json!({ "admissible": false, "point": null }));

    let req = r#"{"n": 2, "lowers": [{"set": [0], "bound": "1"}], "uppers": [{"set": [1], "bound": "1"}]}"#;
    let (code, v) = run_json(&["admissible", req], None);
    assert_eq!(code, 0);
    assert_eq!(v["admissible"], true);
    let f: Vec<Rational> = v["point"].as_array().unwrap().iter().map(|x| Rational::parse(x.as_str().unwrap()).unwrap()).collect();
    assert!(f[0] < Rational::one() && f[1] > Rational::one());

    let (code, v) = run_json(&["admissible", r#"{"n": 2, "lowers": [{"set": [5], "bound": "1"}]}"#], None);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["path"], "$.lowers[0].set[0]");
}

#[test]
fn spec_three_points() {
    let (code, v) = run_json(&["spec", r#"{"n": 3}"#], None);
    assert_eq!(code, 0);
    let chars = v["characters"].as_array().unwrap();
    assert_eq!(chars.len(), 3);
    // the character at x sends the idempotent e_y to [x = y]
    for (x, c) in chars.iter().enumerate() {
        assert_eq!(c["point"], x);
        for (y, z) in c["values"].as_array().unwrap().iter().enumerate() {
            let (re, _) = certified(z[0].as_str().unwrap());
            let (im, _) = certified(z[1].as_str().unwrap());
            assert_eq!(re, Rational::from_int(i64::from(x == y)));
            assert_eq!(im, Rational::from_int(0));
        }
        assert_eq!(c["report"]["verdict"], "Pass");
    }
    assert_eq!(v["duality"]["characters_found"], 3);

    let (code, _) = run_json(&["spec", r#"{"n": 0}"#], None);
    assert_eq!(code, 2);
}

#[test]
fn law_suite_is_deterministic_and_writes_output() {
    let dir = std::env::temp_dir().join(format!("localic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("suite.json");
    let p = path.to_str().unwrap();
    let args = ["law-suite", "--quick", "--law", "ball_calculus", "--seed", "7"];
    let (code, first) = run(&args, None);
    assert_eq!(code, 0);
    let (code, second) = run(&[&args[..], &["--output", p]].concat(), None);
    assert_eq!(code, 0);
    assert!(second.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["verdict"], "Pass");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_documents_grammar() {
    let (code, text) = run(&["real-eval", "--help"], None);
    assert_eq!(code, 0);
    assert!(text.contains("mul(e, e, B)"));
}
