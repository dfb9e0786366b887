//! Kernel systems `{g₁, g₂, k, k₁, k₂, h₁, h₂, h₃, h₄}` under which the transform
//! of a convolution equals the convolution of transforms:
//!
//! ```text
//! (i)   g₁g₂k² + h₁h₂ = 0
//! (ii)  m(supp h₃ ∩ supp h₄) = 0
//! (iii) g₁²k² + h₁² = h₃² + k₁²
//! (iv)  g₂²k² + h₂² = h₄² + k₂²
//! ```

mod haar_family;

pub use haar_family::{generate_family_haar, haar_depth_sweep, HaarFamily, HaarSide};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::functional::{
    cto_of_ffts_exp, fft_of_cto_exp, supports_overlap, compare_termwise, CtoSpec, ExpCombo, TermwiseReport,
    TransformParam, TERMWISE_TOL,
};
use crate::grid::Grid;
use crate::kernel::{expect_keys, l2_norm_sq, Expr, Kernel, SupportSet};
use crate::scalar::Scalar;

/// Check tolerance when every kernel has an exact form.
pub const SYMBOLIC_TOL: f64 = 1e-10;
/// Check tolerance when some kernel is grid-only.
pub const GRID_TOL: f64 = 1e-6;

pub const NAMES: [&str; 9] = ["g1", "g2", "k", "k1", "k2", "h1", "h2", "h3", "h4"];

#[derive(Debug, Clone)]
pub struct KernelSystem<S: Scalar> {
    pub g1: Kernel<S>,
    pub g2: Kernel<S>,
    pub k: Kernel<S>,
    pub k1: Kernel<S>,
    pub k2: Kernel<S>,
    pub h1: Kernel<S>,
    pub h2: Kernel<S>,
    pub h3: Kernel<S>,
    pub h4: Kernel<S>,
}

impl<S: Scalar> KernelSystem<S> {
    /// Kernels in [`NAMES`] order.
    pub fn from_array(ks: [Kernel<S>; 9]) -> Result<Self> {
        for (k, name) in ks.iter().zip(NAMES).skip(1) {
            ks[0].grid().ensure_same(k.grid(), name)?;
        }
        let [g1, g2, k, k1, k2, h1, h2, h3, h4] = ks;
        Ok(Self { g1, g2, k, k1, k2, h1, h2, h3, h4 })
    }

    pub fn kernels(&self) -> [(&'static str, &Kernel<S>); 9] {
        [
            ("g1", &self.g1),
            ("g2", &self.g2),
            ("k", &self.k),
            ("k1", &self.k1),
            ("k2", &self.k2),
            ("h1", &self.h1),
            ("h2", &self.h2),
            ("h3", &self.h3),
            ("h4", &self.h4),
        ]
    }

    pub fn grid(&self) -> &Grid<S> {
        self.g1.grid()
    }

    pub fn is_symbolic(&self) -> bool {
        self.kernels().iter().all(|(_, k)| k.is_symbolic())
    }

    /// 1e-10 for exact-quadrature systems, 1e-6 otherwise.
    pub fn default_tolerance(&self) -> S {
        S::lit(if self.is_symbolic() { SYMBOLIC_TOL } else { GRID_TOL })
    }

    /// `(g₁, g₂; h₁, h₂)`.
    pub fn spec12(&self) -> Result<CtoSpec<S>> {
        CtoSpec::new(self.g1.clone(), self.g2.clone(), self.h1.clone(), self.h2.clone())
    }

    /// `(g₁, g₂; h₃, h₄)`.
    pub fn spec34(&self) -> Result<CtoSpec<S>> {
        CtoSpec::new(self.g1.clone(), self.g2.clone(), self.h3.clone(), self.h4.clone())
    }

    /// `{"T": .., "M": .., "g1": tree, …}`; grid-only kernels as sample arrays.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("T".into(), json!(self.grid().horizon().to_f64_lossy()));
        map.insert("M".into(), json!(self.grid().steps()));
        for (name, k) in self.kernels() {
            let v = match k.expr() {
                Some(e) => e.to_json(),
                None => k.to_literal(),
            };
            map.insert(name.into(), v);
        }
        Value::Object(map)
    }

    /// Inverse of [`KernelSystem::to_json`]; each kernel may also be a full literal.
    pub fn from_json(value: &Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::Literal("kernel system must be an object".into()))?;
        let mut keys = vec!["T", "M"];
        keys.extend(NAMES);
        expect_keys(map, &keys)?;
        let horizon = map.get("T").and_then(Value::as_f64).unwrap_or(1.0);
        let steps = map.get("M").and_then(Value::as_u64).unwrap_or(crate::kernel::DEFAULT_STEPS as u64) as usize;
        let grid = Grid::new(S::lit(horizon), steps)?;
        let mut ks = Vec::with_capacity(9);
        for name in NAMES {
            let v = map.get(name).ok_or_else(|| Error::Literal(format!("missing kernel `{name}`")))?;
            ks.push(Kernel::from_value(v, grid)?);
        }
        Self::from_array(ks.try_into().expect("nine kernels"))
    }
}

/// Residuals of conditions (i)–(iv).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemReport<S> {
    /// `‖g₁g₂k² + h₁h₂‖₂`.
    pub residual_i: S,
    /// `m(supp h₃ ∩ supp h₄)` on the grid.
    pub overlap: S,
    /// Gridwise `max |g₁²k² + h₁² − h₃² − k₁²|`.
    pub residual_iii: S,
    /// Gridwise `max |g₂²k² + h₂² − h₄² − k₂²|`.
    pub residual_iv: S,
    pub pass_i: bool,
    pub pass_ii: bool,
    pub pass_iii: bool,
    pub pass_iv: bool,
    /// Kernels vanishing on the grid.
    pub degenerate: Vec<&'static str>,
    pub tol: S,
}

impl<S: Scalar> SystemReport<S> {
    pub fn pass(&self) -> bool {
        self.pass_i && self.pass_ii && self.pass_iii && self.pass_iv && self.degenerate.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let f = |x: S| x.to_f64_lossy();
        json!({
            "residuals": {
                "i": f(self.residual_i),
                "ii": f(self.overlap),
                "iii": f(self.residual_iii),
                "iv": f(self.residual_iv),
            },
            "pass": {
                "i": self.pass_i,
                "ii": self.pass_ii,
                "iii": self.pass_iii,
                "iv": self.pass_iv,
            },
            "degenerate": self.degenerate,
            "tol": f(self.tol),
            "ok": self.pass(),
        })
    }
}

fn balance<S: Scalar>(g: &Kernel<S>, k2: &Kernel<S>, h: &Kernel<S>, hh: &Kernel<S>, kk: &Kernel<S>) -> Result<S> {
    let lhs = g.squared().product(k2)?.sum(&h.squared())?;
    let rhs = hh.squared().sum(&kk.squared())?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Evaluates (i)–(iv). Condition (ii) tolerates one shared boundary cell.
pub fn check_system<S: Scalar>(sys: &KernelSystem<S>, tol: S) -> SystemReport<S> {
    let k2 = sys.k.squared();
    let r1 = sys
        .g1
        .product(&sys.g2)
        .and_then(|x| x.product(&k2))
        .and_then(|x| x.sum(&sys.h1.product(&sys.h2)?))
        .map(|x| l2_norm_sq(&x).sqrt())
        .expect("system kernels share a grid");
    let overlap = supports_overlap(&sys.h3, &sys.h4).expect("shared grid");
    let r3 = balance(&sys.g1, &k2, &sys.h1, &sys.h3, &sys.k1).expect("shared grid");
    let r4 = balance(&sys.g2, &k2, &sys.h2, &sys.h4, &sys.k2).expect("shared grid");
    let cell = sys.grid().dt() * S::lit(1.0 + 1e-9);
    SystemReport {
        residual_i: r1,
        overlap,
        residual_iii: r3,
        residual_iv: r4,
        pass_i: r1 <= tol,
        pass_ii: overlap <= cell,
        pass_iii: r3 <= tol,
        pass_iv: r4 <= tol,
        degenerate: sys.kernels().iter().filter(|(_, k)| k.is_zero()).map(|(n, _)| *n).collect(),
        tol,
    }
}

fn half_sets<S: Scalar>(grid: &Grid<S>) -> Result<(SupportSet<S>, SupportSet<S>)> {
    let (t, mid) = (grid.horizon(), grid.horizon() * S::lit(0.5));
    Ok((SupportSet::interval(S::zero(), mid)?, SupportSet::interval(mid, t)?))
}

/// `g₁ = 2cos(2πt/T)χ_[0,T/2]`, `g₂ = (3 − 4sin²(2πt/T))χ_[T/2,T]`, `k = sin(2πt/T)`,
/// `k₁ = sin(4πt/T)`, `k₂ = sin(6πt/T)`, `h₁ = χ_[T/2,T]`, `h₂ = χ_[0,T/2]`,
/// `h₃ = cos(4πt/T)χ_[T/2,T]`, `h₄ = cos(6πt/T)χ_[0,T/2]`.
pub fn example_6_1<S: Scalar>(grid: Grid<S>) -> Result<KernelSystem<S>> {
    let (t, mid) = (grid.horizon(), grid.horizon() * S::lit(0.5));
    let a = || Expr::indicator(S::zero(), mid);
    let b = || Expr::indicator(mid, t);
    let k = |e: Expr<S>| Kernel::from_expr(e, grid);
    let sin2 = Expr::sin(2.0).times(Expr::sin(2.0));
    KernelSystem::from_array([
        k(Expr::cos(2.0).scaled(S::lit(2.0)).times(a())),
        k(Expr::constant(3.0).minus(sin2.scaled(S::lit(4.0))).times(b())),
        k(Expr::sin(2.0)),
        k(Expr::sin(4.0)),
        k(Expr::sin(6.0)),
        k(b()),
        k(a()),
        k(Expr::cos(4.0).times(b())),
        k(Expr::cos(6.0).times(a())),
    ])
}

/// `g₁ = sin(lπt/T)`, `g₂ = sin(mπt/T)`, `k = cos(nπt/T)` through
/// [`generate_family_trig`] with `A = [0,T/2]`, `B = [T/2,T]`.
pub fn example_6_2<S: Scalar>(l: u32, m: u32, n: u32, grid: Grid<S>) -> Result<KernelSystem<S>> {
    if !(0 < l && l < m && m < n) {
        return Err(Error::InvalidParameter(format!("need 0 < l < m < n, got ({l}, {m}, {n})")));
    }
    let (a, b) = half_sets(&grid)?;
    generate_family_trig(
        &Kernel::sin(l as f64, grid),
        &Kernel::sin(m as f64, grid),
        &Kernel::cos(n as f64, grid),
        &a,
        &b,
    )
}

/// `h₁ = g₁k`, `h₂ = −g₂k`, `h₃ = √2 g₁k χ_A`, `k₁ = √2 g₁k χ_B`,
/// `h₄ = √2 g₂k χ_B`, `k₂ = √2 g₂k χ_A`.
///
/// `h₄` and `k₂` sit on opposite halves from `h₃` and `k₁` so that (ii) holds.
/// Inputs leaving any of the nine kernels zero on the grid are rejected.
pub fn generate_family_trig<S: Scalar>(
    g1: &Kernel<S>,
    g2: &Kernel<S>,
    k: &Kernel<S>,
    a: &SupportSet<S>,
    b: &SupportSet<S>,
) -> Result<KernelSystem<S>> {
    let grid = *g1.grid();
    let (t, cell) = (grid.horizon(), grid.dt() * S::lit(1.0 + 1e-9));
    if a.measure() <= S::zero() || b.measure() <= S::zero() {
        return Err(Error::InvalidParameter("partition sets need positive measure".into()));
    }
    let shared = a.intersection_measure(b);
    if shared > cell {
        return Err(Error::InvalidParameter(format!("partition sets overlap on measure {shared}")));
    }
    let covered = a.measure() + b.measure() - shared;
    if (covered - t).abs() > S::lit(1e-12) * t.max(S::one()) {
        return Err(Error::InvalidParameter(format!("partition covers measure {covered} of {t}")));
    }
    let r2 = S::lit(std::f64::consts::SQRT_2);
    let (g1k, g2k) = (g1.product(k)?, g2.product(k)?);
    let (f1, f2) = (g1k.scaled(r2), g2k.scaled(r2));
    let sys = KernelSystem::from_array([
        g1.clone(),
        g2.clone(),
        k.clone(),
        f1.restricted_to(b),
        f2.restricted_to(a),
        g1k.clone(),
        g2k.negated(),
        f1.restricted_to(a),
        f2.restricted_to(b),
    ])?;
    for (name, k) in sys.kernels() {
        k.ensure_nonzero(name)?;
    }
    Ok(sys)
}

/// Both sides of `T_k((F * G)^{(g₁,g₂;h₁,h₂)}) = (T_{k₁}F * T_{k₂}G)^{(g₁,g₂;h₃,h₄)}`.
#[derive(Debug, Clone)]
pub struct ComposedReport<S: Scalar> {
    pub lhs: ExpCombo<S>,
    pub rhs: ExpCombo<S>,
    pub termwise: TermwiseReport<S>,
    /// Largest relative coefficient gap; an exponent present on one side only counts as 1.
    pub discrepancy: S,
}

impl<S: Scalar> ComposedReport<S> {
    pub fn pass(&self) -> bool {
        self.termwise.passes(S::lit(TERMWISE_TOL))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "termwise": self.termwise.to_json(),
            "discrepancy": self.discrepancy.to_f64_lossy(),
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "pass": self.pass(),
        })
    }
}

/// Closed forms of both sides, whether or not the system satisfies (i)–(iv).
pub fn composed_identity_unchecked<S: Scalar>(
    sys: &KernelSystem<S>,
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    p: &TransformParam<S>,
) -> Result<ComposedReport<S>> {
    let (lhs, _) = fft_of_cto_exp(f, g, &sys.spec12()?, &sys.k, p)?;
    let (rhs, _) = cto_of_ffts_exp(f, g, &sys.k1, &sys.k2, &sys.spec34()?, p)?;
    let termwise = compare_termwise(&lhs, &rhs)?;
    let discrepancy = if termwise.unmatched > 0 { S::one().max(termwise.max_coeff_rel_err) } else { termwise.max_coeff_rel_err };
    Ok(ComposedReport { lhs, rhs, termwise, discrepancy })
}

/// The composed identity on a system that passes [`check_system`] at its default tolerance.
pub fn verify_composed_identity<S: Scalar>(
    sys: &KernelSystem<S>,
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    p: &TransformParam<S>,
) -> Result<ComposedReport<S>> {
    let report = check_system(sys, sys.default_tolerance());
    if !report.pass() {
        return Err(Error::Hypothesis(format!("kernel system fails its conditions: {}", report.to_json()["residuals"])));
    }
    composed_identity_unchecked(sys, f, g, p)
}

#[cfg(test)]
mod tests;
