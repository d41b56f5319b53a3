//! Small closed expression languages used by the command-line front end.
//!
//! Real expressions:
//!
//! ```text
//! expr := number | "(" expr ")"
//!       | add(e, e) | sub(e, e) | max(e, e) | min(e, e)
//!       | neg(e) | abs(e) | mul(e, e, B)
//! number := p | p/q | decimal, optionally signed
//! ```
//!
//! `mul` needs a positive integer `B` with both factors certified below it
//! in absolute value.
//!
//! Map expressions over the line `L` and the plane `L x L`:
//!
//! ```text
//! map := id | neg | abs | const(q) | add(q) | scale(q)     L -> L
//!      | proj1 | proj2                                     L x L -> L
//!      | compose(g, f) | pair(f, g)
//! ```

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::completion::{pair_point, CompletionPoint};
use crate::maps::{compose_maps, pair_maps, proj_left_map, proj_right_map, MapClass, MapError, MapRep, Modulus};
use crate::metric::{Product, RationalLine};
use crate::numeric::{pow2_neg, to_decimal, Scalar};
use crate::reals::{Plane, RealError, RealPoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("type error: {0}")]
    Type(String),
    #[error(transparent)]
    Real(#[from] RealError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Open,
    Close,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push((i, Tok::Open));
                i += 1
            }
            ')' => {
                out.push((i, Tok::Close));
                i += 1
            }
            ',' => {
                out.push((i, Tok::Comma));
                i += 1
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '/' | '.') {
                    i += 1;
                }
                out.push((start, Tok::Num(src[start..i].to_string())));
            }
            other => {
                return Err(ExprError::Parse { pos: i, message: format!("unexpected character {other:?}") })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ExprError> {
        Ok(Parser { toks: lex(src)?, at: 0, end: src.len() })
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.pos(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn finish(&self) -> Result<(), ExprError> {
        if self.at < self.toks.len() {
            self.err("trailing input")
        } else {
            Ok(())
        }
    }

    fn number<S: Scalar>(&mut self) -> Result<S, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(text)) => match S::parse(&text) {
                Some(q) => {
                    self.at += 1;
                    Ok(q)
                }
                None => self.err(format!("malformed number {text:?}")),
            },
            _ => self.err("expected a number"),
        }
    }
}

/// A real expression.
#[derive(Debug, Clone, PartialEq)]
pub enum RealExpr<S> {
    Num(S),
    Add(Box<RealExpr<S>>, Box<RealExpr<S>>),
    Sub(Box<RealExpr<S>>, Box<RealExpr<S>>),
    Max(Box<RealExpr<S>>, Box<RealExpr<S>>),
    Min(Box<RealExpr<S>>, Box<RealExpr<S>>),
    Mul(Box<RealExpr<S>>, Box<RealExpr<S>>, u32),
    Neg(Box<RealExpr<S>>),
    Abs(Box<RealExpr<S>>),
}

impl<S: Scalar> RealExpr<S> {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let mut p = Parser::new(src)?;
        let e = Self::parse_in(&mut p)?;
        p.finish()?;
        Ok(e)
    }

    fn parse_in(p: &mut Parser) -> Result<Self, ExprError> {
        match p.peek().cloned() {
            Some(Tok::Num(_)) => Ok(RealExpr::Num(p.number()?)),
            Some(Tok::Open) => {
                p.at += 1;
                let e = Self::parse_in(p)?;
                p.expect(Tok::Close, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let start = p.pos();
                p.at += 1;
                p.expect(Tok::Open, "'(' after operator")?;
                let a = Box::new(Self::parse_in(p)?);
                let e = match name.as_str() {
                    "neg" => RealExpr::Neg(a),
                    "abs" => RealExpr::Abs(a),
                    "add" | "sub" | "max" | "min" | "mul" => {
                        p.expect(Tok::Comma, "','")?;
                        let b = Box::new(Self::parse_in(p)?);
                        match name.as_str() {
                            "add" => RealExpr::Add(a, b),
                            "sub" => RealExpr::Sub(a, b),
                            "max" => RealExpr::Max(a, b),
                            "min" => RealExpr::Min(a, b),
                            _ => {
                                p.expect(Tok::Comma, "',' and a bound for mul")?;
                                let bound = match p.next() {
                                    Some(Tok::Num(t)) => t.parse::<u32>().ok().filter(|b| *b > 0),
                                    _ => None,
                                };
                                let Some(bound) = bound else {
                                    p.at -= 1;
                                    return p.err("mul bound must be a positive integer");
                                };
                                RealExpr::Mul(a, b, bound)
                            }
                        }
                    }
                    _ => return Err(ExprError::Parse { pos: start, message: format!("unknown operator {name:?}") }),
                };
                p.expect(Tok::Close, "')'")?;
                Ok(e)
            }
            _ => p.err("expected an expression"),
        }
    }

    /// Exact rational value, ignoring `mul` bounds.
    pub fn exact(&self) -> S {
        match self {
            RealExpr::Num(q) => q.clone(),
            RealExpr::Add(a, b) => a.exact() + b.exact(),
            RealExpr::Sub(a, b) => a.exact() - b.exact(),
            RealExpr::Max(a, b) => a.exact().max(b.exact()),
            RealExpr::Min(a, b) => a.exact().min(b.exact()),
            RealExpr::Mul(a, b, _) => a.exact() * b.exact(),
            RealExpr::Neg(a) => -a.exact(),
            RealExpr::Abs(a) => a.exact().abs(),
        }
    }

    /// Evaluates to a point of the completed line.
    pub fn eval(&self) -> Result<RealPoint<S>, RealError> {
        Ok(match self {
            RealExpr::Num(q) => RealPoint::constant(q.clone()),
            RealExpr::Add(a, b) => a.eval()?.add(&b.eval()?),
            RealExpr::Sub(a, b) => a.eval()?.sub(&b.eval()?),
            RealExpr::Max(a, b) => a.eval()?.max(&b.eval()?),
            RealExpr::Min(a, b) => a.eval()?.min(&b.eval()?),
            RealExpr::Mul(a, b, bound) => a.eval()?.mul(&b.eval()?, *bound)?,
            RealExpr::Neg(a) => a.eval()?.neg(),
            RealExpr::Abs(a) => a.eval()?.abs(),
        })
    }

    pub fn depth(&self) -> usize {
        match self {
            RealExpr::Num(_) => 0,
            RealExpr::Neg(a) | RealExpr::Abs(a) => 1 + a.depth(),
            RealExpr::Add(a, b)
            | RealExpr::Sub(a, b)
            | RealExpr::Max(a, b)
            | RealExpr::Min(a, b)
            | RealExpr::Mul(a, b, _) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl<S: Scalar> fmt::Display for RealExpr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealExpr::Num(q) => write!(f, "{q}"),
            RealExpr::Add(a, b) => write!(f, "add({a}, {b})"),
            RealExpr::Sub(a, b) => write!(f, "sub({a}, {b})"),
            RealExpr::Max(a, b) => write!(f, "max({a}, {b})"),
            RealExpr::Min(a, b) => write!(f, "min({a}, {b})"),
            RealExpr::Mul(a, b, bound) => write!(f, "mul({a}, {b}, {bound})"),
            RealExpr::Neg(a) => write!(f, "neg({a})"),
            RealExpr::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

/// The shortest decimal `d` with `|d - x| < 2^-n`, found from a readout
/// at precision `n + 1`.
pub fn certified_decimal<S: Scalar>(x: &RealPoint<S>, n: u32) -> S {
    let a = x.approx(n + 1);
    let slack = pow2_neg::<S>(n + 1);
    let mut digits = 0;
    loop {
        let d = S::parse(&to_decimal(&a, digits)).expect("rendered decimals parse");
        if (d.clone() - a.clone()).abs() <= slack {
            return d;
        }
        digits += 1;
    }
}

/// `"d ± 2^-n"` with `d` from [`certified_decimal`].
pub fn render_value<S: Scalar>(x: &RealPoint<S>, n: u32) -> String {
    let d = certified_decimal(x, n);
    format!("{} ± 2^-{n}", to_decimal(&d, decimal_digits(&d)))
}

/// Number of fractional digits a finite decimal needs.
fn decimal_digits<S: Scalar>(d: &S) -> u32 {
    let mut k = 0;
    let mut scaled = d.clone();
    while scaled != scaled.floor() {
        scaled = scaled * S::from_int(10);
        k += 1;
    }
    k
}

/// A closed map expression.
#[derive(Debug, Clone, PartialEq)]
pub enum MapExpr<S> {
    Id,
    Neg,
    Abs,
    Const(S),
    AddConst(S),
    Scale(S),
    Proj1,
    Proj2,
    Compose(Box<MapExpr<S>>, Box<MapExpr<S>>),
    Pair(Box<MapExpr<S>>, Box<MapExpr<S>>),
}

/// Dimension of a carrier in the map grammar: the line or the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Line,
    Plane,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dim::Line => "L",
            Dim::Plane => "L x L",
        })
    }
}

/// A built map with its source and target dimension.
#[derive(Clone, Debug)]
pub enum DynMap<S: Scalar> {
    LineLine(MapRep<RationalLine<S>, RationalLine<S>>),
    LinePlane(MapRep<RationalLine<S>, Plane<S>>),
    PlaneLine(MapRep<Plane<S>, RationalLine<S>>),
    PlanePlane(MapRep<Plane<S>, Plane<S>>),
}

/// A point of the line or the plane.
#[derive(Clone)]
pub enum DynPoint<S: Scalar> {
    Line(CompletionPoint<RationalLine<S>>),
    Plane(CompletionPoint<Plane<S>>),
}

impl<S: Scalar> DynPoint<S> {
    pub fn dim(&self) -> Dim {
        match self {
            DynPoint::Line(_) => Dim::Line,
            DynPoint::Plane(_) => Dim::Plane,
        }
    }

    /// Each coordinate as `"d ± 2^-n"`; the plane gives a pair.
    pub fn render(&self, n: u32) -> Value {
        match self {
            DynPoint::Line(p) => json!(render_value(&RealPoint::from_point(p.clone()), n)),
            DynPoint::Plane(p) => {
                let l = RealPoint::from_point(crate::completion::proj_left(p));
                let r = RealPoint::from_point(crate::completion::proj_right(p));
                json!([render_value(&l, n), render_value(&r, n)])
            }
        }
    }

    /// A real expression string, or a pair of them for the plane.
    pub fn from_json(v: &Value) -> Result<Self, ExprError> {
        let one = |v: &Value| -> Result<CompletionPoint<RationalLine<S>>, ExprError> {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Number(x) => x.to_string(),
                _ => return Err(ExprError::Type("a coordinate must be a string or number".into())),
            };
            Ok(RealExpr::<S>::parse(&text)?.eval()?.point().clone())
        };
        match v {
            Value::Array(items) if items.len() == 2 => Ok(DynPoint::Plane(pair_point(&one(&items[0])?, &one(&items[1])?))),
            Value::Array(_) => Err(ExprError::Type("plane points have exactly two coordinates".into())),
            other => Ok(DynPoint::Line(one(other)?)),
        }
    }
}

fn line<S: Scalar>() -> RationalLine<S> {
    RationalLine::new()
}

fn plane<S: Scalar>() -> Plane<S> {
    Product::new(line(), line())
}

fn line_map<S: Scalar>(
    f: impl Fn(&S) -> S + Send + Sync + 'static,
    modulus: Modulus<S>,
    class: MapClass,
    label: String,
) -> DynMap<S> {
    DynMap::LineLine(MapRep::from_point_map(line(), line(), f, modulus, class).with_label(label))
}

impl<S: Scalar> MapExpr<S> {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let mut p = Parser::new(src)?;
        let e = Self::parse_in(&mut p)?;
        p.finish()?;
        Ok(e)
    }

    fn parse_in(p: &mut Parser) -> Result<Self, ExprError> {
        let start = p.pos();
        let Some(Tok::Ident(name)) = p.next() else {
            p.at -= 1;
            return p.err("expected a map name");
        };
        let e = match name.as_str() {
            "id" => MapExpr::Id,
            "neg" => MapExpr::Neg,
            "abs" => MapExpr::Abs,
            "proj1" => MapExpr::Proj1,
            "proj2" => MapExpr::Proj2,
            "const" | "add" | "scale" => {
                p.expect(Tok::Open, "'('")?;
                let q = p.number()?;
                p.expect(Tok::Close, "')'")?;
                match name.as_str() {
                    "const" => MapExpr::Const(q),
                    "add" => MapExpr::AddConst(q),
                    _ => MapExpr::Scale(q),
                }
            }
            "compose" | "pair" => {
                p.expect(Tok::Open, "'('")?;
                let a = Box::new(Self::parse_in(p)?);
                p.expect(Tok::Comma, "','")?;
                let b = Box::new(Self::parse_in(p)?);
                p.expect(Tok::Close, "')'")?;
                if name == "compose" {
                    MapExpr::Compose(a, b)
                } else {
                    MapExpr::Pair(a, b)
                }
            }
            _ => return Err(ExprError::Parse { pos: start, message: format!("unknown map {name:?}") }),
        };
        Ok(e)
    }

    /// Builds the map with its class and modulus.
    pub fn build(&self) -> Result<DynMap<S>, ExprError> {
        Ok(match self {
            MapExpr::Id => line_map(|x: &S| x.clone(), Modulus::identity(), MapClass::Isometric, "id".into()),
            MapExpr::Neg => line_map(|x: &S| -x.clone(), Modulus::identity(), MapClass::Isometric, "neg".into()),
            MapExpr::Abs => line_map(|x: &S| x.abs(), Modulus::identity(), MapClass::Metric, "abs".into()),
            MapExpr::Const(q) => {
                let c = q.clone();
                line_map(move |_| c.clone(), Modulus::identity(), MapClass::Metric, format!("const({q})"))
            }
            MapExpr::AddConst(q) => {
                let c = q.clone();
                line_map(move |x| x.clone() + c.clone(), Modulus::identity(), MapClass::Isometric, format!("add({q})"))
            }
            MapExpr::Scale(q) => {
                let c = q.clone();
                let size = q.abs();
                let (modulus, class) = if size > S::one() {
                    (Modulus::linear(S::one() / size), MapClass::Uniform)
                } else if size == S::one() {
                    (Modulus::identity(), MapClass::Isometric)
                } else {
                    (Modulus::identity(), MapClass::Metric)
                };
                line_map(move |x| x.clone() * c.clone(), modulus, class, format!("scale({q})"))
            }
            MapExpr::Proj1 => DynMap::PlaneLine(proj_left_map(&plane())),
            MapExpr::Proj2 => DynMap::PlaneLine(proj_right_map(&plane())),
            MapExpr::Compose(g, f) => compose_dyn(&g.build()?, &f.build()?)?,
            MapExpr::Pair(f, g) => match (f.build()?, g.build()?) {
                (DynMap::LineLine(f), DynMap::LineLine(g)) => DynMap::LinePlane(pair_maps(&f, &g)?),
                (DynMap::PlaneLine(f), DynMap::PlaneLine(g)) => DynMap::PlanePlane(pair_maps(&f, &g)?),
                (f, g) => {
                    return Err(ExprError::Type(format!(
                        "pair needs two maps into L with the same source, got {} -> {} and {} -> {}",
                        f.source_dim(),
                        f.target_dim(),
                        g.source_dim(),
                        g.target_dim()
                    )))
                }
            },
        })
    }
}

impl<S: Scalar> fmt::Display for MapExpr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapExpr::Id => f.write_str("id"),
            MapExpr::Neg => f.write_str("neg"),
            MapExpr::Abs => f.write_str("abs"),
            MapExpr::Proj1 => f.write_str("proj1"),
            MapExpr::Proj2 => f.write_str("proj2"),
            MapExpr::Const(q) => write!(f, "const({q})"),
            MapExpr::AddConst(q) => write!(f, "add({q})"),
            MapExpr::Scale(q) => write!(f, "scale({q})"),
            MapExpr::Compose(a, b) => write!(f, "compose({a}, {b})"),
            MapExpr::Pair(a, b) => write!(f, "pair({a}, {b})"),
        }
    }
}

fn compose_dyn<S: Scalar>(g: &DynMap<S>, f: &DynMap<S>) -> Result<DynMap<S>, ExprError> {
    use DynMap::*;
    Ok(match (g, f) {
        (LineLine(g), LineLine(f)) => LineLine(compose_maps(g, f)?),
        (LineLine(g), PlaneLine(f)) => PlaneLine(compose_maps(g, f)?),
        (LinePlane(g), LineLine(f)) => LinePlane(compose_maps(g, f)?),
        (LinePlane(g), PlaneLine(f)) => PlanePlane(compose_maps(g, f)?),
        (PlaneLine(g), LinePlane(f)) => LineLine(compose_maps(g, f)?),
        (PlaneLine(g), PlanePlane(f)) => PlaneLine(compose_maps(g, f)?),
        (PlanePlane(g), LinePlane(f)) => LinePlane(compose_maps(g, f)?),
        (PlanePlane(g), PlanePlane(f)) => PlanePlane(compose_maps(g, f)?),
        (g, f) => {
            return Err(ExprError::Type(format!(
                "cannot compose {} -> {} after {} -> {}",
                g.source_dim(),
                g.target_dim(),
                f.source_dim(),
                f.target_dim()
            )))
        }
    })
}

impl<S: Scalar> DynMap<S> {
    pub fn source_dim(&self) -> Dim {
        match self {
            DynMap::LineLine(_) | DynMap::LinePlane(_) => Dim::Line,
            DynMap::PlaneLine(_) | DynMap::PlanePlane(_) => Dim::Plane,
        }
    }

    pub fn target_dim(&self) -> Dim {
        match self {
            DynMap::LineLine(_) | DynMap::PlaneLine(_) => Dim::Line,
            DynMap::LinePlane(_) | DynMap::PlanePlane(_) => Dim::Plane,
        }
    }

    pub fn class(&self) -> MapClass {
        match self {
            DynMap::LineLine(m) => m.class(),
            DynMap::LinePlane(m) => m.class(),
            DynMap::PlaneLine(m) => m.class(),
            DynMap::PlanePlane(m) => m.class(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            DynMap::LineLine(m) => m.label(),
            DynMap::LinePlane(m) => m.label(),
            DynMap::PlaneLine(m) => m.label(),
            DynMap::PlanePlane(m) => m.label(),
        }
    }

    pub fn apply(&self, p: &DynPoint<S>) -> Result<DynPoint<S>, ExprError> {
        Ok(match (self, p) {
            (DynMap::LineLine(m), DynPoint::Line(x)) => DynPoint::Line(m.apply(x)?),
            (DynMap::LinePlane(m), DynPoint::Line(x)) => DynPoint::Plane(m.apply(x)?),
            (DynMap::PlaneLine(m), DynPoint::Plane(x)) => DynPoint::Line(m.apply(x)?),
            (DynMap::PlanePlane(m), DynPoint::Plane(x)) => DynPoint::Plane(m.apply(x)?),
            (m, p) => {
                return Err(ExprError::Type(format!("map from {} applied to a point of {}", m.source_dim(), p.dim())))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Signed;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn parses_and_prints() {
        let e = RealExpr::<Rational>::parse("add(1/3, (mul(-0.5, 2, 4)))").unwrap();
        assert_eq!(e.to_string(), "add(1/3, mul(-1/2, 2, 4))");
        assert_eq!(e.exact(), r(-2, 3));
        assert_eq!(RealExpr::<Rational>::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn parse_errors_have_positions() {
        for (src, pos) in [("add(1, )", 7), ("mul(1, 2)", 8), ("foo(1)", 0), ("1 2", 2), ("add(1/0, 1)", 4)] {
            match RealExpr::<Rational>::parse(src) {
                Err(ExprError::Parse { pos: p, .. }) => assert_eq!(p, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn thirds_sum_to_one() {
        let e = RealExpr::<Rational>::parse("add(1/3, add(1/3, 1/3))").unwrap();
        assert_eq!(render_value(&e.eval().unwrap(), 30), "1 ± 2^-30");
    }

    #[test]
    fn decimal_is_within_tolerance() {
        let e = RealExpr::<Rational>::parse("sub(mul(1/3, 1/7, 1), 2/9)").unwrap();
        let d = certified_decimal(&e.eval().unwrap(), 20);
        assert!((d - e.exact()).abs() < pow2_neg::<Rational>(20));
    }

    #[test]
    fn mul_bound_is_enforced() {
        let e = RealExpr::<Rational>::parse("mul(3, 1, 2)").unwrap();
        assert!(matches!(e.eval(), Err(RealError::BoundViolation { .. })));
    }

    #[test]
    fn map_grammar_types_and_classes() {
        let m = MapExpr::<Rational>::parse("compose(add(1), scale(1/2))").unwrap().build().unwrap();
        assert_eq!(m.class(), MapClass::Metric);
        let x = DynPoint::from_json(&json!("1/3")).unwrap();
        assert_eq!(m.apply(&x).unwrap().render(20), json!("1.166667 ± 2^-20"));

        let swap = MapExpr::<Rational>::parse("pair(proj2, proj1)").unwrap().build().unwrap();
        assert_eq!((swap.source_dim(), swap.target_dim()), (Dim::Plane, Dim::Plane));
        let p = DynPoint::from_json(&json!(["1", "-2"])).unwrap();
        assert_eq!(swap.apply(&p).unwrap().render(10), json!(["-2 ± 2^-10", "1 ± 2^-10"]));

        assert_eq!(MapExpr::<Rational>::parse("scale(3)").unwrap().build().unwrap().class(), MapClass::Uniform);
        assert!(matches!(
            MapExpr::<Rational>::parse("compose(proj1, id)").unwrap().build(),
            Err(ExprError::Type(_))
        ));
        assert!(matches!(
            MapExpr::<Rational>::parse("pair(id, proj1)").unwrap().build(),
            Err(ExprError::Type(_))
        ));
    }
}
