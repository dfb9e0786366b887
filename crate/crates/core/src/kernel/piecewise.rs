//! Exact quadrature for the closed primitive set.
//!
//! Every kernel built from constants, `t`, `sin(aπt/T)`, `cos(aπt/T)`,
//! indicators and Haar functions by sums and products is a piecewise
//! trigonometric polynomial: on each piece of a partition of `[0, T]` it is a
//! finite sum of `c · t^p · cos(aπt/T)` and `c · t^p · sin(aπt/T)`. That class is
//! closed under `+` and `×` (product-to-sum) and integrates in closed form.

use num_complex::Complex;

use super::expr::{haar_geometry, Expr};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wave {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term<S> {
    coeff: S,
    power: u32,
    /// Multiple `a` of `π/T`; always `>= 0` after normalization.
    freq: S,
    wave: Wave,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigPoly<S> {
    terms: Vec<Term<S>>,
}

impl<S: Scalar> TrigPoly<S> {
    fn constant(c: S) -> Self {
        let mut p = Self::default();
        p.push(Term { coeff: c, power: 0, freq: S::zero(), wave: Wave::Cos });
        p
    }

    fn push(&mut self, mut term: Term<S>) {
        if term.freq < S::zero() {
            term.freq = -term.freq;
            if term.wave == Wave::Sin {
                term.coeff = -term.coeff;
            }
        }
        if term.freq == S::zero() && term.wave == Wave::Sin {
            return;
        }
        if term.coeff == S::zero() {
            return;
        }
        match self.terms.iter_mut().find(|t| {
            t.power == term.power && t.freq == term.freq && t.wave == term.wave
        }) {
            Some(existing) => existing.coeff += term.coeff,
            None => self.terms.push(term),
        }
    }

    fn compact(mut self) -> Self {
        self.terms.retain(|t| t.coeff != S::zero());
        self
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out.compact()
    }

    fn scale(&self, c: S) -> Self {
        let mut out = Self::default();
        for t in &self.terms {
            out.push(Term { coeff: t.coeff * c, ..*t });
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let half = S::lit(0.5);
        let mut out = Self::default();
        for a in &self.terms {
            for b in &other.terms {
                let c = a.coeff * b.coeff * half;
                let power = a.power + b.power;
                let (diff, sum) = (a.freq - b.freq, a.freq + b.freq);
                let mk = |coeff, freq, wave| Term { coeff, power, freq, wave };
                match (a.wave, b.wave) {
                    (Wave::Cos, Wave::Cos) => {
                        out.push(mk(c, diff, Wave::Cos));
                        out.push(mk(c, sum, Wave::Cos));
                    }
                    (Wave::Sin, Wave::Sin) => {
                        out.push(mk(c, diff, Wave::Cos));
                        out.push(mk(-c, sum, Wave::Cos));
                    }
                    (Wave::Sin, Wave::Cos) => {
                        out.push(mk(c, sum, Wave::Sin));
                        out.push(mk(c, diff, Wave::Sin));
                    }
                    (Wave::Cos, Wave::Sin) => {
                        out.push(mk(c, sum, Wave::Sin));
                        out.push(mk(-c, diff, Wave::Sin));
                    }
                }
            }
        }
        out.compact()
    }

    fn eval(&self, t: S, horizon: S) -> S {
        self.terms
            .iter()
            .map(|term| {
                let phase = term.freq * S::PI() * t / horizon;
                let w = match term.wave {
                    Wave::Cos => phase.cos(),
                    Wave::Sin => phase.sin(),
                };
                term.coeff * t.powi(term.power as i32) * w
            })
            .sum()
    }

    fn integrate(&self, lo: S, hi: S, horizon: S) -> S {
        self.terms
            .iter()
            .map(|term| term.coeff * integrate_monomial(term, lo, hi, horizon))
            .sum()
    }

    /// The constant value when every oscillating or polynomial term is negligible.
    fn as_constant(&self) -> Option<S> {
        let scale: S = self.terms.iter().map(|t| t.coeff.abs()).sum();
        let tol = S::lit(64.0) * S::epsilon() * scale;
        let mut value = S::zero();
        for t in &self.terms {
            if t.power == 0 && t.freq == S::zero() {
                value += t.coeff;
            } else if t.coeff.abs() > tol {
                return None;
            }
        }
        Some(value)
    }
}

/// `∫_lo^hi t^p w(aπt/T) dt` for `w ∈ {cos, sin}`.
fn integrate_monomial<S: Scalar>(term: &Term<S>, lo: S, hi: S, horizon: S) -> S {
    let p = term.power;
    if term.freq == S::zero() {
        if term.wave == Wave::Sin {
            return S::zero();
        }
        let n = S::from_usize_lossy(p as usize + 1);
        return (hi.powi(p as i32 + 1) - lo.powi(p as i32 + 1)) / n;
    }
    let omega = term.freq * S::PI() / horizon;
    // Antiderivative of t^p e^{iωt}: e^{iωt} Σ_k (-1)^k p!/(p-k)! t^{p-k} / (iω)^{k+1}.
    let antiderivative = |t: S| {
        let i_omega = Complex::new(S::zero(), omega);
        let mut sum = Complex::new(S::zero(), S::zero());
        let mut falling = S::one();
        let mut denom = i_omega;
        for k in 0..=p {
            let sign = if k % 2 == 0 { S::one() } else { -S::one() };
            let mono = t.powi((p - k) as i32);
            sum = sum + Complex::new(sign * falling * mono, S::zero()) / denom;
            falling = falling * S::from_usize_lossy((p - k) as usize);
            denom = denom * i_omega;
        }
        Complex::new(S::zero(), omega * t).exp() * sum
    };
    let value = antiderivative(hi) - antiderivative(lo);
    match term.wave {
        Wave::Cos => value.re,
        Wave::Sin => value.im,
    }
}

/// Piecewise trigonometric polynomial on `[0, T]`; piece `j` covers
/// `[breaks[j], breaks[j+1])`, the last one closed at `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise<S> {
    horizon: S,
    breaks: Vec<S>,
    pieces: Vec<TrigPoly<S>>,
}

impl<S: Scalar> Piecewise<S> {
    fn uniform(horizon: S, poly: TrigPoly<S>) -> Self {
        Self { horizon, breaks: vec![S::zero(), horizon], pieces: vec![poly] }
    }

    pub fn constant(horizon: S, c: S) -> Self {
        Self::uniform(horizon, TrigPoly::constant(c))
    }

    fn term(horizon: S, power: u32, freq: S, wave: Wave) -> Self {
        let mut p = TrigPoly::default();
        p.push(Term { coeff: S::one(), power, freq, wave });
        Self::uniform(horizon, p)
    }

    pub fn indicator(horizon: S, lo: S, hi: S) -> Self {
        let lo = lo.max(S::zero());
        let hi = hi.min(horizon);
        if !(lo < hi) {
            return Self::constant(horizon, S::zero());
        }
        let mut breaks = vec![S::zero()];
        let mut pieces = Vec::new();
        if lo > S::zero() {
            breaks.push(lo);
            pieces.push(TrigPoly::default());
        }
        pieces.push(TrigPoly::constant(S::one()));
        breaks.push(hi);
        if hi < horizon {
            pieces.push(TrigPoly::default());
            breaks.push(horizon);
        }
        Self { horizon, breaks, pieces }
    }

    pub fn from_expr(expr: &Expr<S>, horizon: S) -> Option<Self> {
        Some(match expr {
            Expr::Const(c) => Self::constant(horizon, *c),
            Expr::Time => Self::term(horizon, 1, S::zero(), Wave::Cos),
            Expr::Sin { freq } => Self::term(horizon, 0, *freq, Wave::Sin),
            Expr::Cos { freq } => Self::term(horizon, 0, *freq, Wave::Cos),
            Expr::Indicator { lo, hi } => Self::indicator(horizon, *lo, *hi),
            Expr::Haar { index } => match haar_geometry(*index, horizon) {
                None => Self::constant(horizon, S::one() / horizon.sqrt()),
                Some((left, mid, right, amp)) => Self::indicator(horizon, left, mid)
                    .sub(&Self::indicator(horizon, mid, right))
                    .scale(amp),
            },
            Expr::Add(args) => {
                let mut acc = Self::constant(horizon, S::zero());
                for a in args {
                    acc = acc.add(&Self::from_expr(a, horizon)?);
                }
                acc
            }
            Expr::Mul(args) => {
                let mut acc = Self::constant(horizon, S::one());
                for a in args {
                    acc = acc.mul(&Self::from_expr(a, horizon)?);
                }
                acc
            }
            Expr::Sub(a, b) => Self::from_expr(a, horizon)?.sub(&Self::from_expr(b, horizon)?),
            Expr::Neg(a) => Self::from_expr(a, horizon)?.scale(-S::one()),
            Expr::Sqrt(a) => Self::from_expr(a, horizon)?.sqrt()?,
        })
    }

    /// Exact form of `expr²`, using `sqrt(e)² = e` for the nonnegative root.
    pub fn square_of(expr: &Expr<S>, horizon: S) -> Option<Self> {
        match expr {
            Expr::Sqrt(inner) => Self::from_expr(inner, horizon),
            Expr::Neg(inner) => Self::square_of(inner, horizon),
            Expr::Const(c) => Some(Self::constant(horizon, *c * *c)),
            Expr::Mul(args) => {
                let mut acc = Self::constant(horizon, S::one());
                for a in args {
                    acc = acc.mul(&Self::square_of(a, horizon)?);
                }
                Some(acc)
            }
            other => {
                let p = Self::from_expr(other, horizon)?;
                Some(p.mul(&p))
            }
        }
    }

    fn merged_breaks(&self, other: &Self) -> Vec<S> {
        let mut all: Vec<S> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        all.dedup();
        all
    }

    fn refine(&self, breaks: &[S]) -> Vec<TrigPoly<S>> {
        let mut src = 0;
        breaks[..breaks.len() - 1]
            .iter()
            .map(|&left| {
                while src + 1 < self.pieces.len() && self.breaks[src + 1] <= left {
                    src += 1;
                }
                self.pieces[src].clone()
            })
            .collect()
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&TrigPoly<S>, &TrigPoly<S>) -> TrigPoly<S>) -> Self {
        let breaks = self.merged_breaks(other);
        let a = self.refine(&breaks);
        let b = other.refine(&breaks);
        let pieces = a.iter().zip(&b).map(|(x, y)| op(x, y)).collect();
        Self { horizon: self.horizon, breaks, pieces }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, TrigPoly::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(&b.scale(-S::one())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, TrigPoly::mul)
    }

    pub fn scale(&self, c: S) -> Self {
        Self {
            horizon: self.horizon,
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Pointwise nonnegative root; only defined when every piece is a constant.
    pub fn sqrt(&self) -> Option<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let c = p.as_constant()?;
                let tol = S::lit(64.0) * S::epsilon() * c.abs().max(S::one());
                if c < -tol {
                    return None;
                }
                Some(TrigPoly::constant(c.max(S::zero()).sqrt()))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self { horizon: self.horizon, breaks: self.breaks.clone(), pieces })
    }

    pub fn eval(&self, t: S) -> S {
        let j = self.breaks[1..self.breaks.len() - 1].partition_point(|&b| b <= t);
        self.pieces[j].eval(t, self.horizon)
    }

    pub fn integrate(&self) -> S {
        self.pieces
            .iter()
            .enumerate()
            .map(|(j, p)| p.integrate(self.breaks[j], self.breaks[j + 1], self.horizon))
            .sum()
    }

    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }
}
