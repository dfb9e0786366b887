//! Expression trees over the kernel primitive set.
//!
//! JSON literal schema (one node per JSON value):
//!
//! ```text
//! 1.5                                  constant
//! {"const": 1.5}                       constant (explicit form)
//! "t"                                  identity t
//! {"sin": {"a": 2}}                    sin(a π t / T)
//! {"cos": {"a": 2}}                    cos(a π t / T)
//! {"ind": [c, d]}                      indicator of [c, d)
//! {"haar": n}                          n-th Haar function on [0, T], n >= 1
//! {"op": "add" | "mul", "args": [..]}  n-ary sum / product
//! {"op": "sub", "args": [a, b]}        a - b
//! {"op": "neg" | "sqrt", "args": [a]}  -a, nonnegative square root
//! ```
//!
//! Jumps follow a right-continuous convention: an indicator of `[c, d)` is 1 at
//! `c` and 0 at `d`, except at the right end `t = T` where the left limit is taken.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<S> {
    Const(S),
    Time,
    Sin { freq: S },
    Cos { freq: S },
    Indicator { lo: S, hi: S },
    Haar { index: usize },
    Add(Vec<Expr<S>>),
    Mul(Vec<Expr<S>>),
    Sub(Box<Expr<S>>, Box<Expr<S>>),
    Neg(Box<Expr<S>>),
    Sqrt(Box<Expr<S>>),
}

/// Indicator of `[lo, hi)` with the left limit taken at `t = horizon`.
#[inline]
pub fn indicator<S: Scalar>(t: S, lo: S, hi: S, horizon: S) -> S {
    let inside = (lo <= t && t < hi) || (t == horizon && lo < horizon && hi >= horizon);
    if inside {
        S::one()
    } else {
        S::zero()
    }
}

/// Dyadic placement of Haar function `h_n`, `n >= 2`: level `j` and shift `k`
/// with `n - 1 = 2^j + k`. Its support is `[k, k + 1] T / 2^j`.
pub fn haar_level(index: usize) -> Option<(u32, usize)> {
    if index < 2 {
        return None;
    }
    let m = index - 1;
    let level = usize::BITS - 1 - m.leading_zeros();
    Some((level, m - (1usize << level)))
}

/// Breakpoints and amplitude of `h_n` for `n >= 2`: `(left, mid, right, amplitude)`.
pub fn haar_geometry<S: Scalar>(index: usize, horizon: S) -> Option<(S, S, S, S)> {
    let (level, shift) = haar_level(index)?;
    let cells = S::from_usize_lossy(1usize << level);
    let left = horizon * (S::from_usize_lossy(shift) / cells);
    let mid = horizon * ((S::from_usize_lossy(2 * shift + 1)) / (cells + cells));
    let right = horizon * (S::from_usize_lossy(shift + 1) / cells);
    let amplitude = (cells / horizon).sqrt();
    Some((left, mid, right, amplitude))
}

impl<S: Scalar> Expr<S> {
    pub fn constant(c: f64) -> Self {
        Expr::Const(S::lit(c))
    }

    pub fn sin(freq: f64) -> Self {
        Expr::Sin { freq: S::lit(freq) }
    }

    pub fn cos(freq: f64) -> Self {
        Expr::Cos { freq: S::lit(freq) }
    }

    pub fn indicator(lo: S, hi: S) -> Self {
        Expr::Indicator { lo, hi }
    }

    pub fn haar(index: usize) -> Self {
        Expr::Haar { index }
    }

    pub fn scaled(self, c: S) -> Self {
        Expr::Mul(vec![Expr::Const(c), self])
    }

    pub fn times(self, other: Expr<S>) -> Self {
        Expr::Mul(vec![self, other])
    }

    pub fn plus(self, other: Expr<S>) -> Self {
        Expr::Add(vec![self, other])
    }

    pub fn minus(self, other: Expr<S>) -> Self {
        Expr::Sub(Box::new(self), Box::new(other))
    }

    pub fn negated(self) -> Self {
        Expr::Neg(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Box::new(self))
    }

    pub fn eval(&self, t: S, horizon: S) -> S {
        let phase = |freq: S| freq * S::PI() * t / horizon;
        match self {
            Expr::Const(c) => *c,
            Expr::Time => t,
            Expr::Sin { freq } => phase(*freq).sin(),
            Expr::Cos { freq } => phase(*freq).cos(),
            Expr::Indicator { lo, hi } => indicator(t, *lo, *hi, horizon),
            Expr::Haar { index } => match haar_geometry(*index, horizon) {
                None => S::one() / horizon.sqrt(),
                Some((left, mid, right, amp)) => {
                    amp * (indicator(t, left, mid, horizon) - indicator(t, mid, right, horizon))
                }
            },
            Expr::Add(args) => args.iter().fold(S::zero(), |acc, e| acc + e.eval(t, horizon)),
            Expr::Mul(args) => args.iter().fold(S::one(), |acc, e| acc * e.eval(t, horizon)),
            Expr::Sub(a, b) => a.eval(t, horizon) - b.eval(t, horizon),
            Expr::Neg(a) => -a.eval(t, horizon),
            Expr::Sqrt(a) => a.eval(t, horizon).max(S::zero()).sqrt(),
        }
    }

    /// Largest Haar index appearing in the tree.
    pub fn max_haar_index(&self) -> usize {
        match self {
            Expr::Haar { index } => *index,
            Expr::Add(args) | Expr::Mul(args) => {
                args.iter().map(Expr::max_haar_index).max().unwrap_or(0)
            }
            Expr::Sub(a, b) => a.max_haar_index().max(b.max_haar_index()),
            Expr::Neg(a) | Expr::Sqrt(a) => a.max_haar_index(),
            _ => 0,
        }
    }

    pub fn to_json(&self) -> Value {
        let num = |x: S| json!(x.to_f64_lossy());
        let op = |name: &str, args: Vec<Value>| json!({ "op": name, "args": args });
        match self {
            Expr::Const(c) => num(*c),
            Expr::Time => json!("t"),
            Expr::Sin { freq } => json!({ "sin": { "a": freq.to_f64_lossy() } }),
            Expr::Cos { freq } => json!({ "cos": { "a": freq.to_f64_lossy() } }),
            Expr::Indicator { lo, hi } => json!({ "ind": [lo.to_f64_lossy(), hi.to_f64_lossy()] }),
            Expr::Haar { index } => json!({ "haar": index }),
            Expr::Add(args) => op("add", args.iter().map(Expr::to_json).collect()),
            Expr::Mul(args) => op("mul", args.iter().map(Expr::to_json).collect()),
            Expr::Sub(a, b) => op("sub", vec![a.to_json(), b.to_json()]),
            Expr::Neg(a) => op("neg", vec![a.to_json()]),
            Expr::Sqrt(a) => op("sqrt", vec![a.to_json()]),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(n) => Ok(Expr::Const(S::lit(number(n)?))),
            Value::String(s) if s == "t" => Ok(Expr::Time),
            Value::String(s) => Err(Error::Literal(format!("unknown symbol `{s}`"))),
            Value::Object(map) => {
                if let Some(name) = map.get("op") {
                    let name = name
                        .as_str()
                        .ok_or_else(|| Error::Literal("`op` must be a string".into()))?;
                    expect_keys(map, &["op", "args"])?;
                    let args = map
                        .get("args")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::Literal(format!("`{name}` needs an `args` array")))?
                        .iter()
                        .map(Expr::from_json)
                        .collect::<Result<Vec<_>>>()?;
                    return build_op(name, args);
                }
                if map.len() != 1 {
                    return Err(Error::Literal(format!(
                        "primitive node must have exactly one key, got {:?}",
                        map.keys().collect::<Vec<_>>()
                    )));
                }
                let (key, body) = map.iter().next().expect("one entry");
                match key.as_str() {
                    "const" => Ok(Expr::Const(S::lit(as_f64(body)?))),
                    "sin" | "cos" => {
                        let obj = body
                            .as_object()
                            .ok_or_else(|| Error::Literal(format!("`{key}` expects {{\"a\": x}}")))?;
                        expect_keys(obj, &["a"])?;
                        let freq = S::lit(as_f64(
                            obj.get("a")
                                .ok_or_else(|| Error::Literal(format!("`{key}` missing `a`")))?,
                        )?);
                        Ok(if key == "sin" { Expr::Sin { freq } } else { Expr::Cos { freq } })
                    }
                    "ind" => {
                        let pair = body
                            .as_array()
                            .filter(|a| a.len() == 2)
                            .ok_or_else(|| Error::Literal("`ind` expects [c, d]".into()))?;
                        let lo = S::lit(as_f64(&pair[0])?);
                        let hi = S::lit(as_f64(&pair[1])?);
                        Ok(Expr::Indicator { lo, hi })
                    }
                    "haar" => {
                        let index = body
                            .as_u64()
                            .filter(|&n| n >= 1)
                            .ok_or_else(|| Error::Literal("`haar` expects an index >= 1".into()))?;
                        Ok(Expr::Haar { index: index as usize })
                    }
                    other => Err(Error::Literal(format!("unknown primitive `{other}`"))),
                }
            }
            other => Err(Error::Literal(format!("unexpected kernel node {other}"))),
        }
    }
}

fn build_op<S: Scalar>(name: &str, mut args: Vec<Expr<S>>) -> Result<Expr<S>> {
    let arity = |n: usize, args: &Vec<Expr<S>>| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Literal(format!("`{name}` takes {n} argument(s), got {}", args.len())))
        }
    };
    match name {
        "add" => Ok(Expr::Add(args)),
        "mul" => Ok(Expr::Mul(args)),
        "sub" => {
            arity(2, &args)?;
            let b = args.pop().expect("two args");
            let a = args.pop().expect("two args");
            Ok(Expr::Sub(Box::new(a), Box::new(b)))
        }
        "neg" => {
            arity(1, &args)?;
            Ok(Expr::Neg(Box::new(args.pop().expect("one arg"))))
        }
        "sqrt" => {
            arity(1, &args)?;
            Ok(Expr::Sqrt(Box::new(args.pop().expect("one arg"))))
        }
        other => Err(Error::Literal(format!("unknown op `{other}`"))),
    }
}

fn number(n: &serde_json::Number) -> Result<f64> {
    n.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Literal(format!("non-finite number {n}")))
}

pub(crate) fn as_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => number(n),
        other => Err(Error::Literal(format!("expected a number, got {other}"))),
    }
}

pub(crate) fn expect_keys(map: &serde_json::Map<String, Value>, allowed: &[&str]) -> Result<()> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Literal(format!("unknown field `{k}`"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_right_continuous_with_closed_end() {
        assert_eq!(indicator(0.5, 0.0, 0.5, 1.0), 0.0);
        assert_eq!(indicator(0.5, 0.5, 1.0, 1.0), 1.0);
        assert_eq!(indicator(1.0, 0.5, 1.0, 1.0), 1.0);
        assert_eq!(indicator(1.0, 0.0, 0.5, 1.0), 0.0);
    }

    #[test]
    fn haar_levels() {
        assert_eq!(haar_level(1), None);
        assert_eq!(haar_level(2), Some((0, 0)));
        assert_eq!(haar_level(3), Some((1, 0)));
        assert_eq!(haar_level(4), Some((1, 1)));
        assert_eq!(haar_level(5), Some((2, 0)));
        assert_eq!(haar_level(8), Some((2, 3)));
    }

    #[test]
    fn parses_the_documented_example() {
        let v: Value =
            serde_json::from_str(r#"{"op":"mul","args":[{"sin":{"a":2}},{"ind":[0,0.5]}]}"#)
                .unwrap();
        let e = Expr::<f64>::from_json(&v).unwrap();
        assert_eq!(
            e,
            Expr::Mul(vec![Expr::Sin { freq: 2.0 }, Expr::Indicator { lo: 0.0, hi: 0.5 }])
        );
        assert_eq!(Expr::<f64>::from_json(&e.to_json()).unwrap(), e);
        assert!((e.eval(0.25, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(e.eval(0.75, 1.0), 0.0);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            r#""x""#,
            r#"{"sin":{"b":1}}"#,
            r#"{"ind":[1]}"#,
            r#"{"op":"sub","args":[1]}"#,
            r#"{"op":"pow","args":[1,2]}"#,
            r#"{"haar":0}"#,
            r#"{"sin":{"a":1},"cos":{"a":1}}"#,
            r#"{"op":"add","args":[],"extra":1}"#,
        ] {
            let v: Value = serde_json::from_str(bad).unwrap();
            assert!(Expr::<f64>::from_json(&v).is_err(), "{bad} accepted");
        }
    }
}
