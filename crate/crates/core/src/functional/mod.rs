//! The algebra `Span ℰ` of exponential functionals `Ψ_u(x) = e^{⟨u,x⟩}` and
//! closed forms of the transform and convolution-type operation on it.

mod mc;
mod transform;

pub use mc::{
    mc_cto, mc_fft, mc_thm52_lhs, mc_thm52_rhs, mc_thm54_lhs, mc_thm54_rhs, FnFunctional, PathFunctional,
};
pub use transform::{
    analytic_feynman_exp, compare_termwise, compose_gaussian, cto_exp, cto_of_ffts_exp, fft_exp, fft_of_cto_exp,
    supports_overlap, thm52_residual, thm52_rhs, thm54_rhs, verify_thm52, verify_thm54, CrossDiagnostic,
    IdentityReport, PhaseDiagnostic, TermwiseReport, TERMWISE_TOL,
};

use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{l2_norm_sq, Kernel};
use crate::path::{pwz_integral, pwz_sum, WienerPath};
use crate::scalar::Scalar;

/// Kernels closer than this (relative, gridwise) are the same exponent.
pub const MERGE_TOL: f64 = 1e-12;

/// `coeff · Ψ_u`.
#[derive(Debug, Clone)]
pub struct ExpTerm<S: Scalar> {
    pub coeff: Complex<S>,
    pub u: Kernel<S>,
}

impl<S: Scalar> ExpTerm<S> {
    pub fn new(coeff: Complex<S>, u: Kernel<S>) -> Self {
        Self { coeff, u }
    }

    /// `coeff · Ψ_u^{q,v,k} = coeff · e^{(i/2q)‖vk‖²} · Ψ_u`, with the phase folded in.
    pub fn weighted(coeff: Complex<S>, u: Kernel<S>, q: S, v: &Kernel<S>, k: &Kernel<S>) -> Result<Self> {
        if q == S::zero() {
            return Err(Error::InvalidParameter("Feynman parameter q must be nonzero".into()));
        }
        let phase = l2_norm_sq(&v.product(k)?) / (q + q);
        Ok(Self { coeff: coeff * Complex::new(S::zero(), phase).exp(), u })
    }
}

/// Finite complex-linear combination of exponential functionals; empty is zero.
#[derive(Debug, Clone)]
pub struct ExpCombo<S: Scalar> {
    grid: Grid<S>,
    terms: Vec<ExpTerm<S>>,
}

impl<S: Scalar> ExpCombo<S> {
    pub fn zero(grid: Grid<S>) -> Self {
        Self { grid, terms: Vec::new() }
    }

    /// The constant functional `c = c · Ψ_0`.
    pub fn constant(c: Complex<S>, grid: Grid<S>) -> Self {
        Self::from_terms(vec![ExpTerm::new(c, Kernel::zero(grid))], grid).expect("shared grid")
    }

    pub fn one(grid: Grid<S>) -> Self {
        Self::constant(Complex::new(S::one(), S::zero()), grid)
    }

    pub fn single(coeff: Complex<S>, u: Kernel<S>) -> Self {
        let grid = *u.grid();
        Self::from_terms(vec![ExpTerm::new(coeff, u)], grid).expect("shared grid")
    }

    /// `Ψ_u` with unit coefficient.
    pub fn psi(u: Kernel<S>) -> Self {
        Self::single(Complex::new(S::one(), S::zero()), u)
    }

    /// Normalizes: merges gridwise-equal exponents, drops zero coefficients.
    pub fn from_terms(terms: Vec<ExpTerm<S>>, grid: Grid<S>) -> Result<Self> {
        let mut out: Vec<ExpTerm<S>> = Vec::with_capacity(terms.len());
        let tol = S::lit(MERGE_TOL);
        for t in terms {
            t.u.grid().ensure_same(&grid, "exponential term")?;
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::InvalidParameter("term coefficients must be finite".into()));
            }
            match out.iter_mut().find(|o| o.u.grid_eq(&t.u, tol)) {
                Some(o) => o.coeff = o.coeff + t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff != Complex::new(S::zero(), S::zero()));
        Ok(Self { grid, terms: out })
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn terms(&self) -> &[ExpTerm<S>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "functional sum")?;
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned().collect(), self.grid)
    }

    pub fn scaled(&self, c: Complex<S>) -> Self {
        let terms = self.terms.iter().map(|t| ExpTerm::new(t.coeff * c, t.u.clone())).collect();
        Self::from_terms(terms, self.grid).expect("same grid")
    }

    /// Pointwise product; `Ψ_a Ψ_b = Ψ_{a+b}`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "functional product")?;
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(ExpTerm::new(a.coeff * b.coeff, a.u.sum(&b.u)?));
            }
        }
        Self::from_terms(terms, self.grid)
    }

    /// `Σ_j c_j exp(⟨u_j, x⟩)`.
    pub fn eval(&self, x: &WienerPath<S>) -> Result<Complex<S>> {
        let mut total = Complex::new(S::zero(), S::zero());
        for (j, t) in self.terms.iter().enumerate() {
            let e = pwz_integral(&t.u, x)?.exp();
            if !e.is_finite() {
                return Err(Error::Overflow(j));
            }
            total = total + t.coeff * e;
        }
        Ok(total)
    }

    /// Same as [`eval`](Self::eval) from the increments of a path (no overflow check).
    #[inline]
    pub fn eval_increments(&self, dx: &[S]) -> Complex<S> {
        self.terms
            .iter()
            .fold(Complex::new(S::zero(), S::zero()), |acc, t| acc + t.coeff * pwz_sum(t.u.samples(), dx).exp())
    }

    /// `[{"coeff": [re, im], "u": kernel}, …]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|t| {
                    json!({
                        "coeff": [t.coeff.re.to_f64_lossy(), t.coeff.im.to_f64_lossy()],
                        "u": t.u.to_literal(),
                    })
                })
                .collect(),
        )
    }

    /// Accepts `u` as a full kernel literal or a bare tree; `coeff` as `[re, im]` or a real.
    pub fn from_json(value: &Value, grid: Grid<S>) -> Result<Self> {
        let list = value
            .as_array()
            .ok_or_else(|| Error::Literal("functional must be a list of terms".into()))?;
        let terms = list
            .iter()
            .map(|term| {
                let obj = term
                    .as_object()
                    .ok_or_else(|| Error::Literal("term must be an object".into()))?;
                crate::kernel::expect_keys(obj, &["coeff", "u"])?;
                let coeff = match obj.get("coeff") {
                    None => Complex::new(S::one(), S::zero()),
                    Some(c) => parse_complex(c)?,
                };
                let u = obj.get("u").ok_or_else(|| Error::Literal("term missing `u`".into()))?;
                Ok(ExpTerm::new(coeff, Kernel::from_value(u, grid)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(terms, grid)
    }
}

pub(crate) fn parse_complex<S: Scalar>(v: &Value) -> Result<Complex<S>> {
    let num = |x: &Value| {
        x.as_f64()
            .map(S::lit)
            .ok_or_else(|| Error::Literal(format!("expected a number, got {x}")))
    };
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex::new(num(&pair[0])?, num(&pair[1])?)),
        Value::Number(_) => Ok(Complex::new(num(v)?, S::zero())),
        other => Err(Error::Literal(format!("expected a number or [re, im], got {other}"))),
    }
}

/// `λ ∈ ℂ₊` or the Feynman boundary value `λ = −iq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformParam<S> {
    Analytic(Complex<S>),
    Feynman(S),
}

impl<S: Scalar> TransformParam<S> {
    pub fn analytic(lambda: Complex<S>) -> Result<Self> {
        if !(lambda.re > S::zero()) || !lambda.im.is_finite() {
            return Err(Error::InvalidParameter(format!("need Re λ > 0, got {lambda}")));
        }
        Ok(Self::Analytic(lambda))
    }

    pub fn real(lambda: S) -> Result<Self> {
        Self::analytic(Complex::new(lambda, S::zero()))
    }

    pub fn feynman(q: S) -> Result<Self> {
        if q == S::zero() || !q.is_finite() {
            return Err(Error::InvalidParameter("Feynman parameter q must be nonzero".into()));
        }
        Ok(Self::Feynman(q))
    }

    /// `1/(2λ)`, or `i/(2q)` at `λ = −iq`.
    pub fn inv_two_lambda(&self) -> Complex<S> {
        match *self {
            Self::Analytic(l) => (l + l).inv(),
            Self::Feynman(q) => Complex::new(S::zero(), (q + q).recip()),
        }
    }

    /// Principal root `λ^{1/2}` (positive real part).
    pub fn sqrt_lambda(&self) -> Complex<S> {
        match *self {
            Self::Analytic(l) => l.sqrt(),
            Self::Feynman(q) => Complex::new(S::zero(), -q).sqrt(),
        }
    }

    /// `λ` when it is a positive real.
    pub fn real_lambda(&self) -> Option<S> {
        match *self {
            Self::Analytic(l) if l.im == S::zero() => Some(l.re),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match *self {
            Self::Analytic(l) => json!({ "lambda": [l.re.to_f64_lossy(), l.im.to_f64_lossy()] }),
            Self::Feynman(q) => json!({ "q": q.to_f64_lossy() }),
        }
    }

    /// `{"lambda": x | [re, im]}` or `{"q": x}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::Literal("parameter must be {\"lambda\": ..} or {\"q\": ..}".into()))?;
        match (obj.get("lambda"), obj.get("q")) {
            (Some(l), None) => Self::analytic(parse_complex(l)?),
            (None, Some(q)) => Self::feynman(S::lit(
                q.as_f64().ok_or_else(|| Error::Literal("`q` must be a number".into()))?,
            )),
            _ => Err(Error::Literal("parameter must be {\"lambda\": ..} or {\"q\": ..}".into())),
        }
    }
}

/// The kernel quadruple `(g₁, g₂; h₁, h₂)` of a convolution-type operation.
#[derive(Debug, Clone)]
pub struct CtoSpec<S: Scalar> {
    pub g1: Kernel<S>,
    pub g2: Kernel<S>,
    pub h1: Kernel<S>,
    pub h2: Kernel<S>,
}

impl<S: Scalar> CtoSpec<S> {
    /// Validates a shared grid and nonzero kernels.
    pub fn new(g1: Kernel<S>, g2: Kernel<S>, h1: Kernel<S>, h2: Kernel<S>) -> Result<Self> {
        for (k, name) in [(&g2, "g2"), (&h1, "h1"), (&h2, "h2")] {
            g1.grid().ensure_same(k.grid(), name)?;
        }
        for (k, name) in [(&g1, "g1"), (&g2, "g2"), (&h1, "h1"), (&h2, "h2")] {
            k.ensure_nonzero(name)?;
        }
        Ok(Self { g1, g2, h1, h2 })
    }

    pub fn grid(&self) -> &Grid<S> {
        self.g1.grid()
    }
}

#[cfg(test)]
mod tests;
