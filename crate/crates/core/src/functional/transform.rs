use num_complex::Complex;
use serde_json::{json, Value};

use super::{CtoSpec, ExpCombo, ExpTerm, TransformParam};
use crate::error::{Error, Result};
use crate::kernel::{combine_s, integral, l2_norm_sq, support, Kernel, SUPPORT_TOL};
use crate::scalar::Scalar;

/// Termwise agreement required of the closed-form identities.
pub const TERMWISE_TOL: f64 = 1e-10;

fn gain<S: Scalar>(norm_sq: S, p: &TransformParam<S>, index: usize) -> Result<Complex<S>> {
    let g = (p.inv_two_lambda() * norm_sq).exp();
    if g.re.is_finite() && g.im.is_finite() {
        Ok(g)
    } else {
        Err(Error::Overflow(index))
    }
}

/// `E^{anf}[F(Z_h)] = Σ_j c_j exp(‖u_j h‖² / 2λ)`.
pub fn analytic_feynman_exp<S: Scalar>(f: &ExpCombo<S>, h: &Kernel<S>, p: &TransformParam<S>) -> Result<Complex<S>> {
    h.ensure_nonzero("h")?;
    let mut total = Complex::new(S::zero(), S::zero());
    for (j, t) in f.terms().iter().enumerate() {
        total = total + t.coeff * gain(l2_norm_sq(&t.u.product(h)?), p, j)?;
    }
    Ok(total)
}

/// `T_{λ,k}(F)`: each coefficient gains `exp(‖u_j k‖² / 2λ)`, exponents unchanged.
pub fn fft_exp<S: Scalar>(f: &ExpCombo<S>, k: &Kernel<S>, p: &TransformParam<S>) -> Result<ExpCombo<S>> {
    k.ensure_nonzero("k")?;
    let terms = f
        .terms()
        .iter()
        .enumerate()
        .map(|(j, t)| Ok(ExpTerm::new(t.coeff * gain(l2_norm_sq(&t.u.product(k)?), p, j)?, t.u.clone())))
        .collect::<Result<Vec<_>>>()?;
    ExpCombo::from_terms(terms, *f.grid())
}

/// `(F * G)_λ^{(g₁,g₂;h₁,h₂)}`: the pair `(u, v)` maps to exponent `u g₁ + v g₂`
/// with coefficient gain `exp(‖u h₁ + v h₂‖² / 2λ)`.
pub fn cto_exp<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    spec: &CtoSpec<S>,
    p: &TransformParam<S>,
) -> Result<ExpCombo<S>> {
    f.grid().ensure_same(g.grid(), "CTO operands")?;
    f.grid().ensure_same(spec.grid(), "CTO kernels")?;
    let mut terms = Vec::with_capacity(f.len() * g.len());
    for (a, ta) in f.terms().iter().enumerate() {
        for tb in g.terms() {
            let exponent = ta.u.product(&spec.g1)?.sum(&tb.u.product(&spec.g2)?)?;
            let mixed = ta.u.product(&spec.h1)?.sum(&tb.u.product(&spec.h2)?)?;
            terms.push(ExpTerm::new(ta.coeff * tb.coeff * gain(l2_norm_sq(&mixed), p, a)?, exponent));
        }
    }
    ExpCombo::from_terms(terms, *f.grid())
}

/// Phase pieces of `T_k((Ψ_u * Ψ_v)^{(g₁,g₂;h₁,h₂)})`: its coefficient gain is
/// `exp((square_u + square_v + 2·cross) / 2λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiagnostic<S> {
    pub term_f: usize,
    pub term_g: usize,
    /// `∫ u v (h₁h₂ + g₁g₂k²)`
    pub cross: S,
    /// `∫ u² (h₁² + g₁²k²)`
    pub square_u: S,
    /// `∫ v² (h₂² + g₂²k²)`
    pub square_v: S,
}

/// `∫ u v h₃ h₄` for each term pair of the convolution of two transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossDiagnostic<S> {
    pub term_f: usize,
    pub term_g: usize,
    pub cross: S,
}

/// `T_{λ,k}((F * G)^{(g₁,g₂;h₁,h₂)})` with its phase decomposition.
pub fn fft_of_cto_exp<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    spec: &CtoSpec<S>,
    k: &Kernel<S>,
    p: &TransformParam<S>,
) -> Result<(ExpCombo<S>, Vec<PhaseDiagnostic<S>>)> {
    let combo = fft_exp(&cto_exp(f, g, spec, p)?, k, p)?;
    let k2 = k.squared();
    let mix = spec.h1.product(&spec.h2)?.sum(&spec.g1.product(&spec.g2)?.product(&k2)?)?;
    let wu = spec.h1.squared().sum(&spec.g1.squared().product(&k2)?)?;
    let wv = spec.h2.squared().sum(&spec.g2.squared().product(&k2)?)?;
    let mut diags = Vec::with_capacity(f.len() * g.len());
    for (a, ta) in f.terms().iter().enumerate() {
        for (b, tb) in g.terms().iter().enumerate() {
            diags.push(PhaseDiagnostic {
                term_f: a,
                term_g: b,
                cross: integral(&ta.u.product(&tb.u)?.product(&mix)?),
                square_u: integral(&ta.u.squared().product(&wu)?),
                square_v: integral(&tb.u.squared().product(&wv)?),
            });
        }
    }
    Ok((combo, diags))
}

/// `(T_{λ,k₁}(F) * T_{λ,k₂}(G))^{(g₁,g₂;h₃,h₄)}` with its cross terms.
pub fn cto_of_ffts_exp<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    k1: &Kernel<S>,
    k2: &Kernel<S>,
    spec34: &CtoSpec<S>,
    p: &TransformParam<S>,
) -> Result<(ExpCombo<S>, Vec<CrossDiagnostic<S>>)> {
    let combo = cto_exp(&fft_exp(f, k1, p)?, &fft_exp(g, k2, p)?, spec34, p)?;
    let h34 = spec34.h1.product(&spec34.h2)?;
    let mut diags = Vec::with_capacity(f.len() * g.len());
    for (a, ta) in f.terms().iter().enumerate() {
        for (b, tb) in g.terms().iter().enumerate() {
            let cross = integral(&ta.u.product(&tb.u)?.product(&h34)?);
            diags.push(CrossDiagnostic { term_f: a, term_g: b, cross });
        }
    }
    Ok((combo, diags))
}

/// `y ↦ F(Z_g(y, ·))`, again in `Span ℰ` since `⟨u, Z_g(y)⟩ = ⟨ug, y⟩`.
pub fn compose_gaussian<S: Scalar>(f: &ExpCombo<S>, g: &Kernel<S>) -> Result<ExpCombo<S>> {
    let terms = f
        .terms()
        .iter()
        .map(|t| Ok(ExpTerm::new(t.coeff, t.u.product(g)?)))
        .collect::<Result<Vec<_>>>()?;
    ExpCombo::from_terms(terms, *f.grid())
}

/// `g₁g₂k² + h₁h₂`, which must vanish for the transform to factor.
pub fn thm52_residual<S: Scalar>(spec: &CtoSpec<S>, k: &Kernel<S>) -> Result<Kernel<S>> {
    spec.g1.product(&spec.g2)?.product(&k.squared())?.sum(&spec.h1.product(&spec.h2)?)
}

/// `T_{s(g₁k,h₁)}(F)(Z_{g₁}(y)) · T_{s(g₂k,h₂)}(G)(Z_{g₂}(y))`.
pub fn thm52_rhs<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    spec: &CtoSpec<S>,
    k: &Kernel<S>,
    p: &TransformParam<S>,
) -> Result<ExpCombo<S>> {
    let s1 = combine_s(&spec.g1.product(k)?, &spec.h1)?;
    let s2 = combine_s(&spec.g2.product(k)?, &spec.h2)?;
    let left = compose_gaussian(&fft_exp(f, &s1, p)?, &spec.g1)?;
    let right = compose_gaussian(&fft_exp(g, &s2, p)?, &spec.g2)?;
    left.multiply(&right)
}

/// `T_{s(h₃,k₁)}(F)(Z_{g₁}(y)) · T_{s(h₄,k₂)}(G)(Z_{g₂}(y))`.
pub fn thm54_rhs<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    k1: &Kernel<S>,
    k2: &Kernel<S>,
    spec34: &CtoSpec<S>,
    p: &TransformParam<S>,
) -> Result<ExpCombo<S>> {
    let s3 = combine_s(&spec34.h1, k1)?;
    let s4 = combine_s(&spec34.h2, k2)?;
    let left = compose_gaussian(&fft_exp(f, &s3, p)?, &spec34.g1)?;
    let right = compose_gaussian(&fft_exp(g, &s4, p)?, &spec34.g2)?;
    left.multiply(&right)
}

/// Lebesgue measure of the overlap of the grid supports.
pub fn supports_overlap<S: Scalar>(a: &Kernel<S>, b: &Kernel<S>) -> Result<S> {
    a.grid().ensure_same(b.grid(), "support overlap")?;
    let tol = S::lit(SUPPORT_TOL);
    Ok(support(a, tol).intersection_measure(&support(b, tol)))
}

/// Result of matching two combinations term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermwiseReport<S> {
    pub terms: usize,
    pub unmatched: usize,
    /// Largest `|c_a − c_b| / max(|c_a|, |c_b|)` over matched exponents.
    pub max_coeff_rel_err: S,
}

impl<S: Scalar> TermwiseReport<S> {
    pub fn passes(&self, tol: S) -> bool {
        self.unmatched == 0 && self.max_coeff_rel_err <= tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self.terms,
            "unmatched": self.unmatched,
            "max_coeff_rel_err": self.max_coeff_rel_err.to_f64_lossy(),
        })
    }
}

/// Pairs terms whose exponent kernels agree gridwise and compares coefficients.
pub fn compare_termwise<S: Scalar>(a: &ExpCombo<S>, b: &ExpCombo<S>) -> Result<TermwiseReport<S>> {
    a.grid().ensure_same(b.grid(), "termwise comparison")?;
    let tol = S::lit(TERMWISE_TOL);
    let mut used = vec![false; b.len()];
    let mut unmatched = 0;
    let mut worst = S::zero();
    for ta in a.terms() {
        let hit = b.terms().iter().enumerate().find(|(j, tb)| !used[*j] && ta.u.grid_eq(&tb.u, tol));
        match hit {
            Some((j, tb)) => {
                used[j] = true;
                let scale = ta.coeff.norm().max(tb.coeff.norm());
                worst = worst.max((ta.coeff - tb.coeff).norm() / scale);
            }
            None => unmatched += 1,
        }
    }
    unmatched += used.iter().filter(|u| !**u).count();
    Ok(TermwiseReport { terms: a.len().max(b.len()), unmatched, max_coeff_rel_err: worst })
}

/// Both sides of a closed-form identity with the hypothesis residual.
#[derive(Debug, Clone)]
pub struct IdentityReport<S: Scalar> {
    pub name: &'static str,
    pub lhs: ExpCombo<S>,
    pub rhs: ExpCombo<S>,
    pub termwise: TermwiseReport<S>,
    /// Size of the hypothesis violation (zero when exactly satisfied).
    pub condition: S,
}

impl<S: Scalar> IdentityReport<S> {
    pub fn pass(&self) -> bool {
        self.termwise.passes(S::lit(TERMWISE_TOL))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "identity": self.name,
            "condition_residual": self.condition.to_f64_lossy(),
            "termwise": self.termwise.to_json(),
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "pass": self.pass(),
        })
    }
}

/// Transform of a convolution equals the product of transforms under `g₁g₂k² + h₁h₂ = 0`.
pub fn verify_thm52<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    spec: &CtoSpec<S>,
    k: &Kernel<S>,
    p: &TransformParam<S>,
) -> Result<IdentityReport<S>> {
    k.ensure_nonzero("k")?;
    let condition = thm52_residual(spec, k)?.max_abs();
    if condition > S::lit(TERMWISE_TOL) {
        return Err(Error::Hypothesis(format!("g1 g2 k^2 + h1 h2 reaches {condition} on the grid")));
    }
    let (lhs, _) = fft_of_cto_exp(f, g, spec, k, p)?;
    let rhs = thm52_rhs(f, g, spec, k, p)?;
    let termwise = compare_termwise(&lhs, &rhs)?;
    Ok(IdentityReport { name: "thm52", lhs, rhs, termwise, condition })
}

/// Convolution of transforms equals the product of transforms when `supp h₃ ∩ supp h₄` is null.
pub fn verify_thm54<S: Scalar>(
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    k1: &Kernel<S>,
    k2: &Kernel<S>,
    spec34: &CtoSpec<S>,
    p: &TransformParam<S>,
) -> Result<IdentityReport<S>> {
    k1.ensure_nonzero("k1")?;
    k2.ensure_nonzero("k2")?;
    let overlap = supports_overlap(&spec34.h1, &spec34.h2)?;
    if overlap > spec34.grid().dt() * S::lit(1.0 + 1e-9) {
        return Err(Error::Hypothesis(format!("supp h3 and supp h4 overlap on a set of measure {overlap}")));
    }
    let (lhs, _) = cto_of_ffts_exp(f, g, k1, k2, spec34, p)?;
    let rhs = thm54_rhs(f, g, k1, k2, spec34, p)?;
    let termwise = compare_termwise(&lhs, &rhs)?;
    Ok(IdentityReport { name: "thm54", lhs, rhs, termwise, condition: overlap })
}
