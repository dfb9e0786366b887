//! Haar-series systems: `√2 g_j k` expanded in orthonormal bases of `L₂(A)` and
//! `L₂(B)`, `A = [0,T/2]`, `B = [T/2,T]`. Conditions (iii)/(iv) hold only in
//! the L₂ limit, so a truncation comes with residuals rather than a verdict.

use serde_json::{json, Value};

use super::{check_system, KernelSystem, SystemReport};
use crate::error::{Error, Result};
use crate::kernel::{haar_subbasis, inner, l2_norm_sq, Expr, HalfInterval, Kernel};
use crate::scalar::Scalar;

/// Expansion of `√2 g₁k` and `√2 g₂k` on one half.
#[derive(Debug, Clone)]
pub struct HaarSide<S: Scalar> {
    /// Coefficients per `j`, in basis order.
    pub coeffs: [Vec<S>; 2],
    /// Truncated series per `j`.
    pub series: [Kernel<S>; 2],
    /// `‖√2 g_j k χ_side − series_j‖₂`.
    pub residuals: [S; 2],
}

#[derive(Debug, Clone)]
pub struct HaarFamily<S: Scalar> {
    pub n_terms: usize,
    pub a: HaarSide<S>,
    pub b: HaarSide<S>,
    /// `h₁ = g₁k`, `h₂ = −g₂k`, `h₃ = Σα⁽¹⁾h^A`, `k₁ = Σβ⁽¹⁾h^B`, `h₄ = Σβ⁽²⁾h^B`, `k₂ = Σα⁽²⁾h^A`.
    pub system: KernelSystem<S>,
    /// `√(res_A² + res_B²)` per `j`.
    pub residual: [S; 2],
    /// `‖√2 g_j k‖² − Σα⁽ʲ⁾² − Σβ⁽ʲ⁾²` per `j`.
    pub parseval_gap: [S; 2],
    /// The truncated system against (i)–(iv) at its default tolerance.
    pub check: SystemReport<S>,
}

impl<S: Scalar> HaarFamily<S> {
    pub fn to_json(&self) -> Value {
        let f = |x: &[S; 2]| [x[0].to_f64_lossy(), x[1].to_f64_lossy()];
        let coeffs = |s: &HaarSide<S>| {
            s.coeffs.iter().map(|c| c.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>()).collect::<Vec<_>>()
        };
        json!({
            "n_terms": self.n_terms,
            "residual": f(&self.residual),
            "residual_A": f(&self.a.residuals),
            "residual_B": f(&self.b.residuals),
            "parseval_gap": f(&self.parseval_gap),
            "alpha": coeffs(&self.a),
            "beta": coeffs(&self.b),
            "check": self.check.to_json(),
        })
    }

    pub const CSV_HEADER: [&'static str; 7] =
        ["n_terms", "residual_1", "residual_2", "residual_A_1", "residual_B_1", "parseval_gap_1", "parseval_gap_2"];

    pub fn csv_row(&self) -> [f64; 7] {
        [
            self.n_terms as f64,
            self.residual[0].to_f64_lossy(),
            self.residual[1].to_f64_lossy(),
            self.a.residuals[0].to_f64_lossy(),
            self.b.residuals[0].to_f64_lossy(),
            self.parseval_gap[0].to_f64_lossy(),
            self.parseval_gap[1].to_f64_lossy(),
        ]
    }
}

fn series<S: Scalar>(coeffs: &[S], basis: &[Kernel<S>]) -> Kernel<S> {
    let grid = *basis[0].grid();
    let terms = coeffs
        .iter()
        .zip(basis)
        .map(|(&c, h)| h.expr().expect("Haar basis is symbolic").clone().scaled(c))
        .collect();
    Kernel::from_expr(Expr::Add(terms), grid)
}

fn expand<S: Scalar>(side: HalfInterval, targets: &[Kernel<S>; 2], n_terms: usize) -> Result<HaarSide<S>> {
    let grid = *targets[0].grid();
    let basis = haar_subbasis(side, n_terms, grid)?;
    let (lo, hi) = side.bounds(grid.horizon());
    let mut coeffs: [Vec<S>; 2] = Default::default();
    let mut out_series = Vec::with_capacity(2);
    let mut residuals = [S::zero(); 2];
    for j in 0..2 {
        let target = targets[j].restricted(lo, hi);
        coeffs[j] = basis.iter().map(|h| inner(&target, h)).collect::<Result<_>>()?;
        let s = series(&coeffs[j], &basis);
        residuals[j] = l2_norm_sq(&target.difference(&s)?).max(S::zero()).sqrt();
        out_series.push(s);
    }
    let series: [Kernel<S>; 2] = out_series.try_into().expect("two series");
    Ok(HaarSide { coeffs, series, residuals })
}

/// Truncated Haar system with `n_terms` basis functions per half
/// (`n_terms = 2^p` exhausts Haar levels `1..=p`).
pub fn generate_family_haar<S: Scalar>(
    g1: &Kernel<S>,
    g2: &Kernel<S>,
    k: &Kernel<S>,
    n_terms: usize,
) -> Result<HaarFamily<S>> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
    }
    g1.grid().ensure_same(g2.grid(), "g2")?;
    g1.grid().ensure_same(k.grid(), "k")?;
    let r2 = S::lit(std::f64::consts::SQRT_2);
    let (g1k, g2k) = (g1.product(k)?, g2.product(k)?);
    let targets = [g1k.scaled(r2), g2k.scaled(r2)];
    let a = expand(HalfInterval::A, &targets, n_terms)?;
    let b = expand(HalfInterval::B, &targets, n_terms)?;
    let mut residual = [S::zero(); 2];
    let mut parseval_gap = [S::zero(); 2];
    for j in 0..2 {
        residual[j] = a.residuals[j].hypot(b.residuals[j]);
        let captured: S = a.coeffs[j].iter().chain(&b.coeffs[j]).map(|&c| c * c).sum();
        parseval_gap[j] = l2_norm_sq(&targets[j]) - captured;
    }
    let system = KernelSystem::from_array([
        g1.clone(),
        g2.clone(),
        k.clone(),
        b.series[0].clone(),
        a.series[1].clone(),
        g1k,
        g2k.negated(),
        a.series[0].clone(),
        b.series[1].clone(),
    ])?;
    let check = check_system(&system, system.default_tolerance());
    Ok(HaarFamily { n_terms, a, b, system, residual, parseval_gap, check })
}

/// [`generate_family_haar`] at `n_terms = 2^p` for each depth `p`.
pub fn haar_depth_sweep<S: Scalar>(
    g1: &Kernel<S>,
    g2: &Kernel<S>,
    k: &Kernel<S>,
    depths: std::ops::RangeInclusive<u32>,
) -> Result<Vec<HaarFamily<S>>> {
    depths.map(|p| generate_family_haar(g1, g2, k, 1usize << p)).collect()
}
