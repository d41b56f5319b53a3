//! JSON decoding of carriers, points and opens, and the request handlers
//! behind the `ball-check` and `mm-check` commands.
//!
//! Every decoding error names the JSON path where it happened.

use serde_json::{json, Value};
use thiserror::Error;

use crate::ball::{BallOpen, FormalBall};
use crate::completion::CompletionPoint;
use crate::expr::{DynMap, ExprError, MapExpr};
use crate::function_locale::{check_axiom, AxiomReport, LocaleError, MmInstance};
use crate::metric::{FiniteSpace, GaussianPlane, MetricCarrier, Product, RationalLine};
use crate::numeric::{Answer, Extended, Scalar};
use crate::report::Verdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("at {path}: {message}")]
    At { path: String, message: String },
}

impl SchemaError {
    pub fn at(path: &str, message: impl Into<String>) -> Self {
        SchemaError::At { path: path.to_string(), message: message.into() }
    }
}

/// Contract failures while handling a request. Certified refutations are
/// not errors; they come back inside reports.
#[derive(Debug, Error)]
pub enum RequestError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Ball(#[from] crate::ball::BallError),
    #[error(transparent)]
    Locale(#[from] LocaleError),
}

fn child(path: &str, key: &str) -> String {
    format!("{path}.{key}")
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

/// A rational from `"p/q"`, a decimal string or a JSON number.
pub fn scalar<S: Scalar>(v: &Value, path: &str) -> Result<S, SchemaError> {
    let parsed = match v {
        Value::String(s) => S::parse(s),
        Value::Number(n) => S::parse(&n.to_string()),
        _ => None,
    };
    parsed.ok_or_else(|| SchemaError::at(path, "expected a rational such as \"-3/2\""))
}

pub fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, SchemaError> {
    v.get(key).ok_or_else(|| SchemaError::at(&child(path, key), "missing field"))
}

/// Carriers whose points can be read from JSON.
pub trait PointCodec: MetricCarrier {
    fn decode_point(&self, v: &Value, path: &str) -> Result<Self::Point, SchemaError>;
}

impl<S: Scalar> PointCodec for RationalLine<S> {
    fn decode_point(&self, v: &Value, path: &str) -> Result<S, SchemaError> {
        scalar(v, path)
    }
}

impl<S: Scalar> PointCodec for GaussianPlane<S> {
    fn decode_point(&self, v: &Value, path: &str) -> Result<(S, S), SchemaError> {
        match v.as_array().map(Vec::as_slice) {
            Some([re, im]) => Ok((scalar(re, &index(path, 0))?, scalar(im, &index(path, 1))?)),
            _ => Err(SchemaError::at(path, "expected [re, im]")),
        }
    }
}

impl<S: Scalar> PointCodec for FiniteSpace<S> {
    fn decode_point(&self, v: &Value, path: &str) -> Result<usize, SchemaError> {
        match v.as_u64() {
            Some(i) if (i as usize) < self.len() => Ok(i as usize),
            Some(i) => Err(SchemaError::at(path, format!("point {i} out of range for {} points", self.len()))),
            None => Err(SchemaError::at(path, "expected a point index")),
        }
    }
}

impl<L, R> PointCodec for Product<L, R>
where
    L: PointCodec,
    R: PointCodec<Scalar = L::Scalar>,
{
    fn decode_point(&self, v: &Value, path: &str) -> Result<Self::Point, SchemaError> {
        match v.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok((self.left.decode_point(a, &index(path, 0))?, self.right.decode_point(b, &index(path, 1))?)),
            _ => Err(SchemaError::at(path, "expected a pair [left, right]")),
        }
    }
}

/// `{"n": 3, "d": [[..], ..]}`.
pub fn finite_space<S: Scalar>(v: &Value, path: &str) -> Result<FiniteSpace<S>, SchemaError> {
    let n = field(v, "n", path)?
        .as_u64()
        .ok_or_else(|| SchemaError::at(&child(path, "n"), "expected a positive integer"))? as usize;
    let dpath = child(path, "d");
    let rows = field(v, "d", path)?
        .as_array()
        .ok_or_else(|| SchemaError::at(&dpath, "expected an n x n array"))?;
    if rows.len() != n {
        return Err(SchemaError::at(&dpath, format!("expected {n} rows, got {}", rows.len())));
    }
    let table = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = index(&dpath, i);
            let row = row.as_array().ok_or_else(|| SchemaError::at(&rp, "expected a row"))?;
            row.iter().enumerate().map(|(j, x)| scalar(x, &index(&rp, j))).collect()
        })
        .collect::<Result<Vec<Vec<S>>, _>>()?;
    FiniteSpace::new(table).map_err(|e| SchemaError::at(&dpath, e.to_string()))
}

/// A ball list `[{"c": .., "r": ..}]` over a known carrier.
pub fn balls<C: PointCodec>(carrier: &C, v: &Value, path: &str) -> Result<BallOpen<C>, SchemaError> {
    let items = v.as_array().ok_or_else(|| SchemaError::at(path, "expected an array of balls"))?;
    let mut out = Vec::with_capacity(items.len());
    for (i, b) in items.iter().enumerate() {
        let bp = index(path, i);
        let center = carrier.decode_point(field(b, "c", &bp)?, &child(&bp, "c"))?;
        let radius: C::Scalar = scalar(field(b, "r", &bp)?, &child(&bp, "r"))?;
        let ball = FormalBall::new(center, radius).map_err(|e| SchemaError::at(&child(&bp, "r"), e.to_string()))?;
        out.push(ball);
    }
    BallOpen::new(carrier.clone(), out).map_err(|e| SchemaError::at(path, e.to_string()))
}

/// A full open `{"carrier": .., "balls": [..]}` or a bare ball list, over
/// a carrier already fixed by context.
pub fn open_on<C: PointCodec>(carrier: &C, v: &Value, path: &str) -> Result<BallOpen<C>, SchemaError> {
    if v.is_array() {
        return balls(carrier, v, path);
    }
    if let Some(id) = v.get("carrier") {
        if *id != carrier.id().to_json() {
            return Err(SchemaError::at(&child(path, "carrier"), "carrier differs from the one in context"));
        }
    }
    balls(carrier, field(v, "balls", path)?, &child(path, "balls"))
}

/// Opens over the carriers the front end accepts.
#[derive(Debug, Clone)]
pub enum DynOpen<S: Scalar> {
    Line(BallOpen<RationalLine<S>>),
    Gaussian(BallOpen<GaussianPlane<S>>),
    Finite(BallOpen<FiniteSpace<S>>),
    Plane(BallOpen<Product<RationalLine<S>, RationalLine<S>>>),
}

/// Decodes `{"carrier": id, "balls": [..]}` where `id` is `"line"`,
/// `"gaussian"`, `["line", "line"]` or a finite table.
pub fn dyn_open<S: Scalar>(v: &Value, path: &str) -> Result<DynOpen<S>, SchemaError> {
    let cpath = child(path, "carrier");
    let id = field(v, "carrier", path)?;
    let bpath = child(path, "balls");
    let bs = field(v, "balls", path)?;
    let line = RationalLine::<S>::new();
    Ok(match id {
        Value::String(s) if s == "line" => DynOpen::Line(balls(&line, bs, &bpath)?),
        Value::String(s) if s == "gaussian" => DynOpen::Gaussian(balls(&GaussianPlane::new(), bs, &bpath)?),
        Value::Array(parts) if parts.len() == 2 && parts.iter().all(|p| p == "line") => {
            DynOpen::Plane(balls(&Product::new(line.clone(), line), bs, &bpath)?)
        }
        Value::Object(_) => DynOpen::Finite(balls(&finite_space(id, &cpath)?, bs, &bpath)?),
        _ => {
            return Err(SchemaError::at(
                &cpath,
                "expected \"line\", \"gaussian\", [\"line\", \"line\"] or {\"n\", \"d\"}",
            ))
        }
    })
}

/// `{"stages": [...], "depth": n, "truncated": true}`.
pub fn point_prefix<C: MetricCarrier>(p: &CompletionPoint<C>, depth: u32) -> Value {
    let stages: Vec<Value> = p.prefix(depth).iter().map(|x| p.carrier().render(x)).collect();
    json!({ "stages": stages, "depth": depth, "truncated": true })
}

fn extended_json<S: Scalar>(e: &Extended<S>) -> Value {
    match e {
        Extended::Finite(q) => json!(q.to_string()),
        Extended::Infinity => json!("inf"),
    }
}

fn answer_json(a: Answer) -> Value {
    json!(a)
}

/// Runs one ball-calculus query.
///
/// `{"op": .., "u": open, "v": open, "q": rational, "point": point}` with
/// `op` one of `positive`, `diameter`, `way_inside`, `strictly_inside`,
/// `included_in`, `neighborhood`, `meet`, `contains`, `union`.
pub fn ball_check<S: Scalar>(req: &Value, effort: u32) -> Result<Value, RequestError> {
    let op = field(req, "op", "$")?
        .as_str()
        .ok_or_else(|| SchemaError::at("$.op", "expected a string"))?;
    let u = dyn_open::<S>(field(req, "u", "$")?, "$.u")?;
    match u {
        DynOpen::Line(u) => ball_op(op, &u, req, effort),
        DynOpen::Gaussian(u) => ball_op(op, &u, req, effort),
        DynOpen::Finite(u) => ball_op(op, &u, req, effort),
        DynOpen::Plane(u) => ball_op(op, &u, req, effort),
    }
}

fn ball_op<C: PointCodec>(op: &str, u: &BallOpen<C>, req: &Value, effort: u32) -> Result<Value, RequestError> {
    let v = || -> Result<BallOpen<C>, RequestError> { Ok(open_on(u.carrier(), field(req, "v", "$")?, "$.v")?) };
    let q = || -> Result<C::Scalar, RequestError> { Ok(scalar(field(req, "q", "$")?, "$.q")?) };
    let out = match op {
        "positive" => json!({ "positive": u.is_positive() }),
        "diameter" => json!({ "diameter_upper": extended_json(&u.diameter_upper().bound(effort)), "effort": effort }),
        "way_inside" => json!({ "answer": answer_json(u.way_inside(&q()?, &v()?, effort)?), "effort": effort }),
        "strictly_inside" => json!({ "answer": answer_json(u.strictly_inside(&v()?, effort)?), "effort": effort }),
        "included_in" => json!({ "answer": answer_json(u.included_in(&v()?, effort)?), "effort": effort }),
        "neighborhood" => json!({ "open": u.neighborhood(&q()?)?.to_json() }),
        "union" => json!({ "open": u.union(&v()?)?.to_json() }),
        "meet" => {
            let w = u.meet_witness(&v()?, effort)?;
            let ball = w.map(|b| json!({ "c": u.carrier().render(&b.center), "r": b.radius.to_string() }));
            json!({ "witness": ball, "effort": effort })
        }
        "contains" => {
            let x = u.carrier().decode_point(field(req, "point", "$")?, "$.point")?;
            json!({ "answer": answer_json(u.contains_point(&x, effort)), "effort": effort })
        }
        other => return Err(SchemaError::at("$.op", format!("unknown op {other:?}")).into()),
    };
    Ok(out)
}

type LineMap<S> = crate::maps::MapRep<RationalLine<S>, RationalLine<S>>;

/// Decodes one axiom instance over the line; opens are ball lists or full
/// opens with carrier `"line"`.
pub fn mm_instance<S: Scalar>(v: &Value, path: &str) -> Result<MmInstance<RationalLine<S>, RationalLine<S>>, SchemaError> {
    let line = RationalLine::<S>::new();
    let open = |key: &str| -> Result<BallOpen<RationalLine<S>>, SchemaError> {
        open_on(&line, field(v, key, path)?, &child(path, key))
    };
    let q = |key: &str| -> Result<S, SchemaError> { scalar(field(v, key, path)?, &child(path, key)) };
    let tag = field(v, "axiom", path)?
        .as_str()
        .ok_or_else(|| SchemaError::at(&child(path, "axiom"), "expected \"MM1\" .. \"MM6\""))?;
    Ok(match tag {
        "MM1" => MmInstance::Mm1 { u_small: open("u_small")?, u: open("u")?, v_small: open("v_small")?, v: open("v")? },
        "MM2" => MmInstance::Mm2 { u: open("u")?, v: open("v")?, q: q("q")? },
        "MM3" => MmInstance::Mm3 { u: open("u")?, q: q("q")? },
        "MM4" => MmInstance::Mm4 { u: open("u")?, v: open("v")? },
        "MM5" => MmInstance::Mm5 {
            w1: open("w1")?,
            w2: open("w2")?,
            tau: open("tau")?,
            q1: q("q1")?,
            q2: q("q2")?,
            v1: open("v1")?,
            v2: open("v2")?,
            v1p: open("v1p")?,
            v2p: open("v2p")?,
        },
        "MM6" => MmInstance::Mm6 { u: open("u")?, v: open("v")?, vp: open("vp")? },
        other => return Err(SchemaError::at(&child(path, "axiom"), format!("unknown axiom {other:?}"))),
    })
}

/// `{"map": "<map expr on L>", "instances": [..]}` checked one by one.
/// Returns the reports and the worst verdict.
pub fn mm_check<S: Scalar>(req: &Value, effort: u32) -> Result<(Vec<AxiomReport>, Verdict), RequestError> {
    let src = field(req, "map", "$")?
        .as_str()
        .ok_or_else(|| SchemaError::at("$.map", "expected a map expression"))?;
    let f: LineMap<S> = match MapExpr::<S>::parse(src)?.build()? {
        DynMap::LineLine(m) => m,
        other => {
            return Err(SchemaError::at(
                "$.map",
                format!("mm-check needs a map L -> L, got {} -> {}", other.source_dim(), other.target_dim()),
            )
            .into())
        }
    };
    let items = field(req, "instances", "$")?
        .as_array()
        .ok_or_else(|| SchemaError::at("$.instances", "expected an array"))?;
    let mut reports = Vec::with_capacity(items.len());
    let mut worst = Verdict::Pass;
    for (i, item) in items.iter().enumerate() {
        let inst = mm_instance::<S>(item, &index("$.instances", i))?;
        let rep = check_axiom(&inst, &f, effort)?;
        worst = worst.worst(rep.result);
        reports.push(rep);
    }
    Ok((reports, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn decodes_each_carrier() {
        for v in [
            json!({ "carrier": "line", "balls": [{ "c": "1/2", "r": "1" }] }),
            json!({ "carrier": "gaussian", "balls": [{ "c": ["0", 1], "r": "1/3" }] }),
            json!({ "carrier": ["line", "line"], "balls": [{ "c": ["0", "1"], "r": "2" }] }),
            json!({ "carrier": { "n": 2, "d": [["0", "1"], ["1", "0"]] }, "balls": [{ "c": 1, "r": "1/2" }] }),
        ] {
            let open = dyn_open::<Rational>(&v, "$").unwrap();
            let back = match open {
                DynOpen::Line(u) => u.to_json(),
                DynOpen::Gaussian(u) => u.to_json(),
                DynOpen::Finite(u) => u.to_json(),
                DynOpen::Plane(u) => u.to_json(),
            };
            assert_eq!(back["carrier"], v["carrier"]);
        }
    }

    #[test]
    fn errors_carry_paths() {
        let cases = [
            (json!({ "carrier": "line", "balls": [{ "c": "x", "r": "1" }] }), "$.balls[0].c"),
            (json!({ "carrier": "line", "balls": [{ "c": "0", "r": "-1" }] }), "$.balls[0].r"),
            (json!({ "carrier": { "n": 2, "d": [["0", "1"], ["2", "0"]] }, "balls": [] }), "$.carrier.d"),
            (json!({ "carrier": { "n": 1, "d": [["0"]] }, "balls": [{ "c": 3, "r": "1" }] }), "$.balls[0].c"),
            (json!({ "carrier": "sphere", "balls": [] }), "$.carrier"),
        ];
        for (v, want) in cases {
            match dyn_open::<Rational>(&v, "$") {
                Err(SchemaError::At { path, .. }) => assert_eq!(path, want),
                other => panic!("{v}: {other:?}"),
            }
        }
    }

    #[test]
    fn ball_queries() {
        let req = json!({
            "op": "way_inside",
            "q": "1/10",
            "u": { "carrier": "line", "balls": [{ "c": "0", "r": "1/2" }] },
            "v": [{ "c": "0", "r": "1" }],
        });
        assert_eq!(ball_check::<Rational>(&req, 8).unwrap()["answer"], json!("Yes"));
        let req = json!({ "op": "diameter", "u": { "carrier": "line", "balls": [{ "c": "0", "r": "1/2" }] } });
        assert_eq!(ball_check::<Rational>(&req, 8).unwrap()["diameter_upper"], json!("1"));
        let req = json!({ "op": "included_in", "u": { "carrier": "line", "balls": [] }, "v": { "carrier": "gaussian", "balls": [] } });
        assert!(ball_check::<Rational>(&req, 8).is_err());
    }

    #[test]
    fn mm_requests() {
        let req = json!({
            "map": "scale(1/2)",
            "instances": [
                { "axiom": "MM4", "u": [{ "c": "0", "r": "1" }], "v": [{ "c": "0", "r": "1" }] },
                { "axiom": "MM6", "u": [{ "c": "0", "r": "1" }], "v": [{ "c": "0", "r": "1" }], "vp": [{ "c": "1/4", "r": "1" }] },
            ],
        });
        let (reports, worst) = mm_check::<Rational>(&req, 64).unwrap();
        assert_eq!(reports.len(), 2);
        assert_ne!(worst, Verdict::Fail);
        let bad = json!({ "map": "proj1", "instances": [] });
        assert!(mm_check::<Rational>(&bad, 64).is_err());
    }
}
