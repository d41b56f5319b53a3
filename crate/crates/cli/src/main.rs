//! `localic`: batch front end over the localic library.
//!
//! Every subcommand prints one JSON document. Exit status is 0 for values
//! and passing checks, 1 for a certified failure, 2 for malformed input.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use localic::expr::{render_value, DynMap, DynPoint, ExprError, MapExpr, RealExpr};
use localic::gelfand::{
    duality_round_trip, has_point, is_admissible, random_element, spectrum_of_cn, verify_character, BasicOpenXR,
    GelfandError,
};
use localic::laws::{run_law, run_suite, LawConfig, SuiteReport, LAWS};
use localic::maps::MapError;
use localic::reals::RealError;
use localic::report::Verdict;
use localic::schema::{ball_check, mm_check, RequestError, SchemaError};
use localic::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const REAL_GRAMMAR: &str = "\
Real expressions:
  expr := number | ( expr )
        | add(e, e) | sub(e, e) | max(e, e) | min(e, e)
        | neg(e) | abs(e) | mul(e, e, B)
  number := p | p/q | decimal, optionally signed
mul needs a positive integer B bounding both factors strictly in absolute
value. The value is printed as \"d ± 2^-n\" with |d - x| < 2^-n.

Example:
  localic real-eval 'add(1/3, add(1/3, 1/3))'   ->   {\"value\":\"1 ± 2^-30\"}";

const MAP_GRAMMAR: &str = "\
Map expressions over the line L and the plane L x L:
  map := id | neg | abs | const(q) | add(q) | scale(q)    L -> L
       | proj1 | proj2                                    L x L -> L
       | compose(g, f) | pair(f, g)
Points are real expressions, or a pair of them for the plane.

Example payload:
  {\"map\": \"compose(abs, add(-1/2))\", \"point\": \"1/3\"}";

const BALL_HELP: &str = "\
Payload: {\"op\": op, \"u\": open, \"v\": open, \"q\": rational, \"point\": point}
  op: positive | diameter | way_inside | strictly_inside | included_in
      | neighborhood | union | meet | contains
  open: {\"carrier\": c, \"balls\": [{\"c\": center, \"r\": radius}, ..]}
  c: \"line\" | \"gaussian\" | [\"line\", \"line\"] | {\"n\": k, \"d\": [[..], ..]}
Rationals are strings like \"-3/2\" or JSON numbers.";

const MM_HELP: &str = "\
Payload: {\"map\": map on L -> L, \"instances\": [instance, ..]}
  instance: {\"axiom\": \"MM1\" .. \"MM6\", ..opens and rationals..}
  MM1: u_small, u, v_small, v      MM2: u, v, q      MM3: u, q
  MM4: u, v    MM5: w1, w2, tau, q1, q2, v1, v2, v1p, v2p    MM6: u, v, vp
Opens are ball lists [{\"c\": .., \"r\": ..}] on the line.";

const ADMISSIBLE_HELP: &str = "\
Payload: {\"n\": k, \"lowers\": [{\"set\": [i, ..], \"bound\": q}, ..], \"uppers\": [..]}
A function f on {0..k-1} lies in the open when f < bound on every lower set
and f > bound on every upper set.";

#[derive(Parser)]
#[command(name = "localic", version, about = "Exact formal-ball calculus for metric locales")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output precision in bits.
    #[arg(long, global = true, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    precision: u32,
    /// Effort budget for semi-decisions.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    effort: u32,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Indent the JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a real expression with a certified error.
    #[command(after_help = REAL_GRAMMAR)]
    RealEval {
        /// Expression; read from stdin when omitted.
        expr: Option<String>,
    },
    /// Apply a map expression to a point.
    #[command(after_help = MAP_GRAMMAR)]
    MapApply { payload: Option<String> },
    /// Run one ball-calculus query.
    #[command(after_help = BALL_HELP)]
    BallCheck { payload: Option<String> },
    /// Check function-locale axiom instances against a map.
    #[command(after_help = MM_HELP)]
    MmCheck { payload: Option<String> },
    /// Decide admissibility of a basic open of [X, R] for finite discrete X.
    #[command(after_help = ADMISSIBLE_HELP)]
    Admissible { payload: Option<String> },
    /// Characters of C^n with verification and the duality round trip.
    #[command(after_help = "Payload: {\"n\": k} with 1 <= k <= 8.")]
    Spec { payload: Option<String> },
    /// Run the seeded property catalog.
    LawSuite {
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
        /// Run a single law.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(LAWS))]
        law: Option<String>,
    },
}

/// A JSON document and the exit status that goes with it.
struct Outcome {
    body: Value,
    code: u8,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Outcome { body, code: 0 }
    }

    fn verdict(body: Value, v: Verdict) -> Self {
        Outcome { body, code: if v.is_fail() { 1 } else { 0 } }
    }

    fn usage(kind: &str, message: impl ToString, path: Option<&str>) -> Self {
        let mut err = json!({ "kind": kind, "message": message.to_string() });
        if let Some(p) = path {
            err["path"] = json!(p);
        }
        Outcome { body: json!({ "error": err }), code: 2 }
    }

    fn violation(message: impl ToString, witness: Value) -> Self {
        Outcome {
            body: json!({ "error": { "kind": "certificate", "message": message.to_string(), "witness": witness } }),
            code: 1,
        }
    }
}

fn schema_error(e: &SchemaError) -> Outcome {
    let SchemaError::At { path, message } = e;
    Outcome::usage("schema", message, Some(path))
}

fn map_error(e: &MapError) -> Outcome {
    match e {
        MapError::Certificate(w) => Outcome::violation(e, json!(w)),
        _ => Outcome::usage("contract", e, None),
    }
}

fn real_error(e: &RealError) -> Outcome {
    match e {
        RealError::BoundViolation { bound, stage, n } => {
            Outcome::violation(e, json!({ "bound": bound, "stage_value": stage, "stage": n }))
        }
        RealError::Uncertified { .. } => Outcome::usage("contract", e, None),
        RealError::Map(m) => map_error(m),
    }
}

fn expr_error(e: &ExprError) -> Outcome {
    match e {
        ExprError::Parse { pos, message } => {
            let mut out = Outcome::usage("parse", message, None);
            out.body["error"]["position"] = json!(pos);
            out
        }
        ExprError::Type(m) => Outcome::usage("type", m, None),
        ExprError::Real(r) => real_error(r),
        ExprError::Map(m) => map_error(m),
    }
}

fn request_error(e: &RequestError) -> Outcome {
    match e {
        RequestError::Schema(s) => schema_error(s),
        RequestError::Expr(x) => expr_error(x),
        other => Outcome::usage("contract", other, None),
    }
}

fn gelfand_error(e: &GelfandError) -> Outcome {
    match e {
        GelfandError::Schema { path, message } => Outcome::usage("schema", message, Some(path)),
        GelfandError::Bound(r) => real_error(r),
        other => Outcome::usage("contract", other, None),
    }
}

fn read_payload(arg: Option<String>) -> Result<String, Outcome> {
    match arg {
        Some(s) if s != "-" => Ok(s),
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Outcome::usage("io", e, None))?;
            Ok(buf)
        }
    }
}

fn read_json(arg: Option<String>) -> Result<Value, Outcome> {
    let text = read_payload(arg)?;
    serde_json::from_str(&text).map_err(|e| {
        let mut out = Outcome::usage("parse", e.to_string(), Some("$"));
        out.body["error"]["line"] = json!(e.line());
        out.body["error"]["column"] = json!(e.column());
        out
    })
}

fn real_eval(src: &str, precision: u32) -> Outcome {
    let value = RealExpr::<Rational>::parse(src.trim()).and_then(|e| Ok(e.eval()?));
    match value {
        Ok(x) => Outcome::ok(json!({ "value": render_value(&x, precision) })),
        Err(e) => expr_error(&e),
    }
}

fn map_apply(req: &Value, precision: u32) -> Outcome {
    let Some(src) = req.get("map").and_then(Value::as_str) else {
        return Outcome::usage("schema", "expected a map expression", Some("$.map"));
    };
    let Some(point) = req.get("point") else {
        return Outcome::usage("schema", "missing field", Some("$.point"));
    };
    let run = || -> Result<Value, ExprError> {
        let f: DynMap<Rational> = MapExpr::parse(src)?.build()?;
        let p = DynPoint::from_json(point)?;
        let y = f.apply(&p)?;
        Ok(json!({
            "map": f.label(),
            "class": f.class(),
            "source": f.source_dim().to_string(),
            "target": f.target_dim().to_string(),
            "value": y.render(precision),
        }))
    };
    match run() {
        Ok(v) => Outcome::ok(v),
        Err(e) => expr_error(&e),
    }
}

fn admissible(req: &Value) -> Outcome {
    let run = || -> Result<Value, GelfandError> {
        let (x, b) = BasicOpenXR::<Rational>::from_json(req)?;
        let adm = is_admissible(&b, &x)?;
        let point = has_point(&b, &x)?.map(|f| f.iter().map(|q| q.to_string()).collect::<Vec<_>>());
        Ok(json!({ "admissible": adm, "point": point }))
    };
    match run() {
        Ok(v) => Outcome::ok(v),
        Err(e) => gelfand_error(&e),
    }
}

const SPEC_MAX_N: u64 = 8;

fn spec(req: &Value, precision: u32, seed: u64) -> Outcome {
    let n = match req.get("n").and_then(Value::as_u64) {
        Some(n) if (1..=SPEC_MAX_N).contains(&n) => n as usize,
        _ => return Outcome::usage("schema", format!("expected an integer in 1..={SPEC_MAX_N}"), Some("$.n")),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<_> = (0..2).map(|_| random_element::<Rational>(&mut rng, n, 3)).collect();
    let mut verdict = Verdict::Pass;
    let mut characters = Vec::with_capacity(n);
    for (x, chi) in spectrum_of_cn::<Rational>(n).iter().enumerate() {
        let report = match verify_character(chi, &samples, precision) {
            Ok(r) => r,
            Err(e) => return gelfand_error(&e),
        };
        verdict = verdict.worst(report.verdict);
        let values: Vec<Value> = chi
            .values
            .iter()
            .map(|z| json!([render_value(&z.re, precision), render_value(&z.im, precision)]))
            .collect();
        characters.push(json!({ "point": x, "values": values, "report": report }));
    }
    let duality = match duality_round_trip(n, precision, &samples) {
        Ok(r) => r,
        Err(e) => return gelfand_error(&e),
    };
    verdict = verdict.worst(duality.verdict);
    let body = json!({ "n": n, "bits": precision, "characters": characters, "duality": duality, "verdict": verdict });
    Outcome::verdict(body, verdict)
}

fn law_suite(seed: u64, quick: bool, law: Option<&str>) -> Outcome {
    let cfg = if quick { LawConfig::quick(seed) } else { LawConfig::full(seed) };
    let report = match law {
        Some(name) => {
            let out = run_law::<Rational>(name, &cfg).expect("clap restricts law names");
            SuiteReport { seed, verdict: out.verdict, laws: vec![out] }
        }
        None => run_suite::<Rational>(&cfg),
    };
    let verdict = report.verdict;
    Outcome::verdict(serde_json::to_value(report).expect("reports serialize"), verdict)
}

fn run(cli: Cli) -> Outcome {
    let Common { precision, effort, seed, .. } = cli.common;
    let payload = |arg| read_json(arg);
    let result = match cli.command {
        Command::RealEval { expr } => read_payload(expr).map(|s| real_eval(&s, precision)),
        Command::MapApply { payload: p } => payload(p).map(|v| map_apply(&v, precision)),
        Command::BallCheck { payload: p } => payload(p).map(|v| match ball_check::<Rational>(&v, effort) {
            Ok(out) => Outcome::ok(out),
            Err(e) => request_error(&e),
        }),
        Command::MmCheck { payload: p } => payload(p).map(|v| match mm_check::<Rational>(&v, effort) {
            Ok((reports, verdict)) => Outcome::verdict(json!({ "verdict": verdict, "reports": reports }), verdict),
            Err(e) => request_error(&e),
        }),
        Command::Admissible { payload: p } => payload(p).map(|v| admissible(&v)),
        Command::Spec { payload: p } => payload(p).map(|v| spec(&v, precision, seed)),
        Command::LawSuite { quick, law } => Ok(law_suite(seed, quick, law.as_deref())),
    };
    result.unwrap_or_else(|e| e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.common.pretty;
    let output = cli.common.output.clone();
    let out = run(cli);
    let mut text = if pretty {
        serde_json::to_string_pretty(&out.body)
    } else {
        serde_json::to_string(&out.body)
    }
    .expect("JSON values serialize");
    text.push('\n');
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(out.code)
}
