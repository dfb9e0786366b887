//! Kernels: real functions on `[0, T]` carried both as an expression tree and
//! as samples on the shared uniform grid.

mod expr;
mod haar;
mod piecewise;
mod support;

use std::sync::{Arc, OnceLock};

use serde_json::{json, Value};

pub(crate) use expr::expect_keys;
pub use expr::{haar_level, indicator, Expr};
pub use haar::{haar_basis, haar_subbasis, HalfInterval};
pub use piecewise::Piecewise;
pub use support::SupportSet;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Default tolerance separating exact zeros from roundoff.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Default grid resolution.
pub const DEFAULT_STEPS: usize = 4096;

/// A kernel `v ∈ BV[0,T] ∩ L₂[0,T]`.
///
/// Symbolic kernels keep their expression tree and `grid[i] == expr(t_i)`.
/// Grid-only kernels carry samples alone; the caller asserts bounded variation.
#[derive(Debug, Clone)]
pub struct Kernel<S: Scalar> {
    grid: Grid<S>,
    samples: Arc<[S]>,
    expr: Option<Arc<Expr<S>>>,
    exact: Arc<OnceLock<Option<Piecewise<S>>>>,
}

impl<S: Scalar> Kernel<S> {
    pub fn from_expr(expr: Expr<S>, grid: Grid<S>) -> Self {
        let horizon = grid.horizon();
        let samples: Arc<[S]> = grid.times().map(|t| expr.eval(t, horizon)).collect();
        Self { grid, samples, expr: Some(Arc::new(expr)), exact: Arc::default() }
    }

    pub fn from_samples(samples: Vec<S>, grid: Grid<S>) -> Result<Self> {
        if samples.len() != grid.nodes() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.nodes(),
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("kernel samples must be finite".into()));
        }
        Ok(Self { grid, samples: samples.into(), expr: None, exact: Arc::default() })
    }

    pub fn constant(c: S, grid: Grid<S>) -> Self {
        Self::from_expr(Expr::Const(c), grid)
    }

    pub fn zero(grid: Grid<S>) -> Self {
        Self::constant(S::zero(), grid)
    }

    pub fn one(grid: Grid<S>) -> Self {
        Self::constant(S::one(), grid)
    }

    pub fn sin(freq: f64, grid: Grid<S>) -> Self {
        Self::from_expr(Expr::sin(freq), grid)
    }

    pub fn cos(freq: f64, grid: Grid<S>) -> Self {
        Self::from_expr(Expr::cos(freq), grid)
    }

    /// Indicator of `[lo, hi)` (closed at `T`).
    pub fn indicator(lo: S, hi: S, grid: Grid<S>) -> Self {
        Self::from_expr(Expr::indicator(lo, hi), grid)
    }

    pub fn haar(index: usize, grid: Grid<S>) -> Result<Self> {
        haar::ensure_resolvable(index, &grid)?;
        Ok(Self::from_expr(Expr::haar(index), grid))
    }

    #[inline]
    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn expr(&self) -> Option<&Expr<S>> {
        self.expr.as_deref()
    }

    pub fn is_symbolic(&self) -> bool {
        self.expr.is_some()
    }

    pub fn eval(&self, t: S) -> Option<S> {
        self.expr().map(|e| e.eval(t, self.grid.horizon()))
    }

    /// Exact piecewise form, when the tree stays inside the closed primitive set.
    pub fn exact(&self) -> Option<&Piecewise<S>> {
        self.exact
            .get_or_init(|| self.expr().and_then(|e| Piecewise::from_expr(e, self.grid.horizon())))
            .as_ref()
    }

    pub fn max_abs(&self) -> S {
        self.samples.iter().fold(S::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == S::zero()
    }

    /// Fails with [`Error::ZeroKernel`] when every grid sample vanishes.
    pub fn ensure_nonzero(&self, name: &str) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroKernel(name.to_string()))
        } else {
            Ok(())
        }
    }

    fn combine(
        &self,
        other: &Self,
        sym: impl FnOnce(Expr<S>, Expr<S>) -> Expr<S>,
        num: impl Fn(S, S) -> S,
    ) -> Self {
        match (&self.expr, &other.expr) {
            (Some(a), Some(b)) => Self::from_expr(sym((**a).clone(), (**b).clone()), self.grid),
            _ => {
                let samples: Arc<[S]> =
                    self.samples.iter().zip(other.samples.iter()).map(|(&a, &b)| num(a, b)).collect();
                Self { grid: self.grid, samples, expr: None, exact: Arc::default() }
            }
        }
    }

    fn map(&self, sym: impl FnOnce(Expr<S>) -> Expr<S>, num: impl Fn(S) -> S) -> Self {
        match &self.expr {
            Some(a) => Self::from_expr(sym((**a).clone()), self.grid),
            None => {
                let samples: Arc<[S]> = self.samples.iter().map(|&a| num(a)).collect();
                Self { grid: self.grid, samples, expr: None, exact: Arc::default() }
            }
        }
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid, "kernel operands")
    }

    /// Pointwise product `a · b`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.combine(other, |a, b| a.times(b), |a, b| a * b))
    }

    /// Pointwise `c1 · a + c2 · b`.
    pub fn lincomb(c1: S, a: &Self, c2: S, b: &Self) -> Result<Self> {
        a.check_grid(b)?;
        Ok(a.combine(b, |x, y| x.scaled(c1).plus(y.scaled(c2)), |x, y| c1 * x + c2 * y))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.combine(other, |a, b| a.plus(b), |a, b| a + b))
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.combine(other, |a, b| a.minus(b), |a, b| a - b))
    }

    pub fn scaled(&self, c: S) -> Self {
        self.map(|a| a.scaled(c), |a| c * a)
    }

    pub fn negated(&self) -> Self {
        self.map(|a| a.negated(), |a| -a)
    }

    pub fn squared(&self) -> Self {
        self.map(|a| a.clone().times(a), |a| a * a)
    }

    /// Restriction `v · χ_[lo,hi)`.
    pub fn restricted(&self, lo: S, hi: S) -> Self {
        self.combine(&Self::indicator(lo, hi, self.grid), |a, b| a.times(b), |a, b| a * b)
    }

    /// Restriction to a support set, `v · χ_A`.
    pub fn restricted_to(&self, set: &SupportSet<S>) -> Self {
        let chi = Self::from_expr(set.indicator_expr(), self.grid);
        self.combine(&chi, |a, b| a.times(b), |a, b| a * b)
    }

    /// Largest gridwise `|a - b|`.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.samples
            .iter()
            .zip(other.samples.iter())
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Gridwise equality within `tol` (relative to the larger magnitude, floored at 1).
    pub fn grid_eq(&self, other: &Self, tol: S) -> bool {
        if self.grid != other.grid {
            return false;
        }
        let scale = self.max_abs().max(other.max_abs()).max(S::one());
        self.max_abs_diff(other) <= tol * scale
    }

    pub fn to_literal(&self) -> Value {
        let mut lit = json!({
            "T": self.grid.horizon().to_f64_lossy(),
            "M": self.grid.steps(),
        });
        match self.expr() {
            Some(e) => lit["expr"] = e.to_json(),
            None => {
                lit["grid"] = Value::Array(self.samples.iter().map(|x| json!(x.to_f64_lossy())).collect())
            }
        }
        lit
    }

    /// Parses `{"T": .., "M": .., "expr": tree}` or `{"T": .., "M": .., "grid": [..]}`.
    pub fn from_literal(value: &Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Literal("kernel literal must be an object".into()))?;
        expr::expect_keys(map, &["T", "M", "expr", "grid"])?;
        let horizon = expr::as_f64(map.get("T").ok_or_else(|| Error::Literal("missing `T`".into()))?)?;
        let steps = map
            .get("M")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Literal("missing integer `M`".into()))? as usize;
        let grid = Grid::new(S::lit(horizon), steps)?;
        match (map.get("expr"), map.get("grid")) {
            (Some(e), None) => Self::from_tree(e, grid),
            (None, Some(Value::Array(xs))) => {
                let samples = xs.iter().map(|x| expr::as_f64(x).map(S::lit)).collect::<Result<_>>()?;
                Self::from_samples(samples, grid)
            }
            _ => Err(Error::Literal("kernel literal needs exactly one of `expr`, `grid`".into())),
        }
    }

    /// Either a full literal (which must sit on `grid`) or a bare tree placed on `grid`.
    pub fn from_value(value: &Value, grid: Grid<S>) -> Result<Self> {
        let is_literal = value.as_object().is_some_and(|m| m.contains_key("T") || m.contains_key("M"));
        if is_literal {
            let k = Self::from_literal(value)?;
            k.grid.ensure_same(&grid, "kernel literal")?;
            Ok(k)
        } else {
            Self::from_tree(value, grid)
        }
    }

    /// Parses a bare expression tree onto a known grid.
    pub fn from_tree(value: &Value, grid: Grid<S>) -> Result<Self> {
        let e = Expr::from_json(value)?;
        let needed = e.max_haar_index();
        if needed > 0 {
            haar::ensure_resolvable(needed, &grid)?;
        }
        Ok(Self::from_expr(e, grid))
    }
}

/// `∫₀ᵀ v(t)² dt`: exact when the tree admits closed-form quadrature, else the
/// composite trapezoid rule on the grid.
pub fn l2_norm_sq<S: Scalar>(v: &Kernel<S>) -> S {
    if let Some(e) = v.expr() {
        if let Some(p) = Piecewise::square_of(e, v.grid().horizon()) {
            return p.integrate().max(S::zero());
        }
    }
    l2_norm_sq_grid(v)
}

/// Composite trapezoid estimate of `∫ v²` from the grid samples.
pub fn l2_norm_sq_grid<S: Scalar>(v: &Kernel<S>) -> S {
    trapezoid(v.samples().iter().map(|&x| x * x), v.grid())
}

/// `∫₀ᵀ a(t) b(t) dt`, exact when both operands admit it.
pub fn inner<S: Scalar>(a: &Kernel<S>, b: &Kernel<S>) -> Result<S> {
    a.check_grid(b)?;
    if let (Some(pa), Some(pb)) = (a.exact(), b.exact()) {
        return Ok(pa.mul(pb).integrate());
    }
    Ok(trapezoid(a.samples().iter().zip(b.samples()).map(|(&x, &y)| x * y), a.grid()))
}

/// `∫₀ᵀ v(t) dt`, exact when available.
pub fn integral<S: Scalar>(v: &Kernel<S>) -> S {
    match v.exact() {
        Some(p) => p.integrate(),
        None => trapezoid(v.samples().iter().copied(), v.grid()),
    }
}

fn trapezoid<S: Scalar>(values: impl Iterator<Item = S>, grid: &Grid<S>) -> S {
    let last = grid.steps();
    let half = S::lit(0.5);
    let total: S = values
        .enumerate()
        .map(|(i, x)| if i == 0 || i == last { x * half } else { x })
        .sum();
    total * grid.dt()
}

/// The nonnegative root `s(h1,h2) = √(h1² + h2²)`.
pub fn combine_s<S: Scalar>(h1: &Kernel<S>, h2: &Kernel<S>) -> Result<Kernel<S>> {
    h1.check_grid(h2)?;
    match (h1.expr(), h2.expr()) {
        (Some(a), Some(b)) => {
            let radicand = a.clone().times(a.clone()).plus(b.clone().times(b.clone()));
            Ok(Kernel::from_expr(radicand.sqrt(), *h1.grid()))
        }
        _ => {
            let samples = h1
                .samples()
                .iter()
                .zip(h2.samples())
                .map(|(&a, &b)| (a * a + b * b).sqrt())
                .collect();
            Kernel::from_samples(samples, *h1.grid())
        }
    }
}

/// Grid support of `v`: union of cells `[t_i, t_{i+1}]` over nodes with `|v(t_i)| > tol`.
pub fn support<S: Scalar>(v: &Kernel<S>, tol: S) -> SupportSet<S> {
    SupportSet::from_grid_mask(v.grid(), v.samples().iter().map(|x| x.abs() > tol))
}
