//! Acceptance run: the full law catalog, one line per criterion.

use std::time::{Duration, Instant};

use localic::expr::RealExpr;
use localic::laws::{random_real_expr, run_suite_with, LawConfig, LawOutcome, SuiteReport};
use localic::report::Verdict;
use localic::{Rational, Scalar};
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Criterion {
    id: u32,
    law: &'static str,
    title: &'static str,
    budget: Option<Duration>,
}

const CRITERIA: [Criterion; 7] = [
    Criterion { id: 1, law: "ball_calculus", title: "ball-calculus laws on finite spaces", budget: Some(Duration::from_secs(60)) },
    Criterion { id: 2, law: "completion_metric", title: "completion distance is symmetric and triangular", budget: None },
    Criterion { id: 3, law: "regularization", title: "regularization is idempotent and refines", budget: None },
    Criterion { id: 4, law: "exact_reals", title: "certified reals within 2^-30 of exact values", budget: Some(Duration::from_secs(30)) },
    Criterion { id: 5, law: "extension_uniqueness", title: "density extensions agree to 2^-20", budget: None },
    Criterion { id: 6, law: "function_locale", title: "function-locale axioms and round trip", budget: None },
    Criterion { id: 7, law: "gelfand_finite", title: "finite Gelfand duality", budget: None },
];

fn run(cfg: &LawConfig) -> (SuiteReport, Vec<Duration>) {
    let mut times = Vec::new();
    let mut last = Instant::now();
    let report = run_suite_with::<Rational>(cfg, |_| {
        times.push(last.elapsed());
        last = Instant::now();
    });
    (report, times)
}

fn summary(law: &LawOutcome) -> String {
    let failing: Vec<String> = law
        .items
        .iter()
        .filter(|(_, c)| c.failures > 0)
        .map(|(k, c)| format!("{k} {}/{}", c.failures, c.cases))
        .collect();
    if failing.is_empty() {
        format!("{} checks", law.cases)
    } else {
        format!("{} checks, failing: {}", law.cases, failing.join(", "))
    }
}

/// Plain recursive evaluation, kept apart from the library's own.
fn reference_value(e: &RealExpr<Rational>) -> Rational {
    match e {
        RealExpr::Num(q) => q.clone(),
        RealExpr::Add(a, b) => reference_value(a) + reference_value(b),
        RealExpr::Sub(a, b) => reference_value(a) - reference_value(b),
        RealExpr::Mul(a, b, _) => reference_value(a) * reference_value(b),
        RealExpr::Max(a, b) => reference_value(a).max(reference_value(b)),
        RealExpr::Min(a, b) => reference_value(a).min(reference_value(b)),
        RealExpr::Neg(a) => -reference_value(a),
        RealExpr::Abs(a) => reference_value(a).abs(),
    }
}

/// Criterion 4 again, against the reference evaluator above.
fn reals_against_reference(cfg: &LawConfig) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(404));
    let tol = Rational::from_frac(1, 1 << 30);
    let mut bad = 0;
    for _ in 0..200 {
        let e = random_real_expr::<Rational>(&mut rng, cfg.expression_depth);
        let ok = match e.eval() {
            Ok(x) => (x.approx(30) - reference_value(&e)).abs() < tol,
            Err(_) => false,
        };
        bad += usize::from(!ok);
    }
    (200, bad)
}

fn main() -> std::process::ExitCode {
    let cfg = LawConfig::full(0);
    let (first, times) = run(&cfg);
    let (ref_cases, ref_bad) = reals_against_reference(&cfg);

    let mut all = true;
    for (c, (law, time)) in CRITERIA.iter().zip(first.laws.iter().zip(&times)) {
        assert_eq!(law.law, c.law, "criteria and laws are listed in the same order");
        let mut pass = law.verdict == Verdict::Pass;
        let mut note = summary(law);
        if let Some(b) = c.budget {
            if *time > b {
                pass = false;
                note.push_str(&format!(", over the {}s budget", b.as_secs()));
            }
        }
        if c.id == 4 {
            pass &= ref_bad == 0;
            note.push_str(&format!(", reference evaluator {}/{} agree", ref_cases - ref_bad, ref_cases));
        }
        all &= pass;
        println!(
            "criterion {} [{}] {}: {} ({:.1}s)",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            note,
            time.as_secs_f64()
        );
        if !pass {
            println!("  examples: {}", serde_json::to_string(&law.examples).unwrap());
        }
    }

    let (second, _) = run(&cfg);
    let (a, b) = (serde_json::to_vec(&first).unwrap(), serde_json::to_vec(&second).unwrap());
    let same = a == b && !a.is_empty();
    all &= same;
    println!(
        "criterion 8 [{}] fixed seed gives byte-identical reports: {} bytes",
        if same { "PASS" } else { "FAIL" },
        a.len()
    );
    if all {
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance criteria failed");
        std::process::ExitCode::FAILURE
    }
}
