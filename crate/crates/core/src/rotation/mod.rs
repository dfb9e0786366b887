//! Rotation identities on `C₀²` and `C₀³`: under `h₁h₃ + h₂h₄ = 0` (or
//! disjoint `h₁`, `h₃` supports) the pair `(Z_{h₁}(x₁) + Z_{h₂}(x₂), Z_{h₃}(x₁) + Z_{h₄}(x₂))`
//! has the law of `(Z_{s(h₁,h₂)}(x), Z_{s(h₃,h₄)}(y))` with `x`, `y` independent.
//!
//! Test functionals depend on finitely many PWZ coordinates `⟨w, a⟩` of their
//! path arguments (a point value `a(t)` is `⟨χ_[0,t), a⟩`), which keeps each
//! sample at a handful of dot products.

mod battery;

pub use battery::{
    battery_configs, battery_one_arg, battery_pairs, battery_two_arg, negative_control, run_battery, BatteryCheck,
    BatteryConfig, BatteryOptions, BatteryReport, NegativeControl,
};

use std::sync::Arc;

use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::functional::supports_overlap;
use crate::grid::Grid;
use crate::kernel::{combine_s, Kernel};
use crate::path::{mc_expectations, pwz_sum, McEstimate, PathSampler};
use crate::scalar::Scalar;

/// Residual tolerance for `h₁h₃ + h₂h₄ = 0`.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

/// SE multiplier of the pass rule.
pub const SE_MULTIPLIER: f64 = 3.0;

type Phi1<S> = Arc<dyn Fn(&[S]) -> Complex<S> + Send + Sync>;
type Phi2<S> = Arc<dyn Fn(&[S], &[S]) -> Complex<S> + Send + Sync>;

/// `F(a) = φ(⟨w₁,a⟩, …, ⟨w_m,a⟩)`.
#[derive(Clone)]
pub struct CoordFunctional<S: Scalar> {
    pub name: String,
    pub coords: Vec<Kernel<S>>,
    phi: Phi1<S>,
}

impl<S: Scalar> CoordFunctional<S> {
    pub fn new(
        name: impl Into<String>,
        coords: Vec<Kernel<S>>,
        phi: impl Fn(&[S]) -> Complex<S> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), coords, phi: Arc::new(phi) }
    }

    pub fn eval(&self, coords: &[S]) -> Complex<S> {
        (self.phi)(coords)
    }
}

/// `F(a, b) = φ(⟨w_i, a⟩_i, ⟨w'_j, b⟩_j)`.
#[derive(Clone)]
pub struct CoordFunctional2<S: Scalar> {
    pub name: String,
    pub coords_a: Vec<Kernel<S>>,
    pub coords_b: Vec<Kernel<S>>,
    phi: Phi2<S>,
}

impl<S: Scalar> CoordFunctional2<S> {
    pub fn new(
        name: impl Into<String>,
        coords_a: Vec<Kernel<S>>,
        coords_b: Vec<Kernel<S>>,
        phi: impl Fn(&[S], &[S]) -> Complex<S> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), coords_a, coords_b, phi: Arc::new(phi) }
    }

    pub fn constant(value: Complex<S>) -> Self {
        Self::new("constant", Vec::new(), Vec::new(), move |_, _| value)
    }

    /// `F(a) G(b)`.
    pub fn product(f: &CoordFunctional<S>, g: &CoordFunctional<S>) -> Self {
        let (pf, pg) = (f.phi.clone(), g.phi.clone());
        Self::new(format!("{}*{}", f.name, g.name), f.coords.clone(), g.coords.clone(), move |a, b| {
            pf(a) * pg(b)
        })
    }

    /// `F(a)`, ignoring the second argument.
    pub fn first(f: &CoordFunctional<S>) -> Self {
        let pf = f.phi.clone();
        Self::new(f.name.clone(), f.coords.clone(), Vec::new(), move |a, _| pf(a))
    }

    /// `G(b)`, ignoring the first argument.
    pub fn second(g: &CoordFunctional<S>) -> Self {
        let pg = g.phi.clone();
        Self::new(g.name.clone(), Vec::new(), g.coords.clone(), move |_, b| pg(b))
    }

    pub fn eval(&self, a: &[S], b: &[S]) -> Complex<S> {
        (self.phi)(a, b)
    }
}

/// Kernel quadruple `(h₁, h₂, h₃, h₄)` on a shared grid.
#[derive(Debug, Clone)]
pub struct RotationCase<S: Scalar> {
    pub h1: Kernel<S>,
    pub h2: Kernel<S>,
    pub h3: Kernel<S>,
    pub h4: Kernel<S>,
}

impl<S: Scalar> RotationCase<S> {
    pub fn new(h1: Kernel<S>, h2: Kernel<S>, h3: Kernel<S>, h4: Kernel<S>) -> Result<Self> {
        for (k, name) in [(&h2, "h2"), (&h3, "h3"), (&h4, "h4")] {
            h1.grid().ensure_same(k.grid(), name)?;
        }
        Ok(Self { h1, h2, h3, h4 })
    }

    /// The swapped, negated pairing `(h₁, −h₂; h₂, h₁)`, independent for any `h₁, h₂`.
    pub fn bearman(h1: Kernel<S>, h2: Kernel<S>) -> Result<Self> {
        Self::new(h1.clone(), h2.negated(), h2, h1)
    }

    pub fn grid(&self) -> &Grid<S> {
        self.h1.grid()
    }

    fn ensure_nonzero(&self) -> Result<()> {
        for (k, name) in [(&self.h1, "h1"), (&self.h2, "h2"), (&self.h3, "h3"), (&self.h4, "h4")] {
            k.ensure_nonzero(name)?;
        }
        Ok(())
    }

    /// `(s(h₁,h₂), s(h₃,h₄))`.
    pub fn combined(&self) -> Result<(Kernel<S>, Kernel<S>)> {
        Ok((combine_s(&self.h1, &self.h2)?, combine_s(&self.h3, &self.h4)?))
    }
}

#[derive(Debug, Clone)]
pub struct IndependenceResult<S: Scalar> {
    pub independent: bool,
    /// `h₁h₃ + h₂h₄` on the grid.
    pub residual: Kernel<S>,
}

/// `𝔷_{h₁,h₂}` and `𝔷_{h₃,h₄}` are independent iff `h₁h₃ + h₂h₄ = 0`.
pub fn independence_criterion<S: Scalar>(case: &RotationCase<S>) -> Result<IndependenceResult<S>> {
    let residual = case.h1.product(&case.h3)?.sum(&case.h2.product(&case.h4)?)?;
    Ok(IndependenceResult { independent: residual.max_abs() <= S::lit(INDEPENDENCE_TOL), residual })
}

/// Which path slot drives each kernel of an argument: `a = Σ Z_{h}(x_slot)`.
#[derive(Clone)]
pub(crate) struct Side<S: Scalar> {
    pub slots: usize,
    pub a: Vec<(Kernel<S>, usize)>,
    pub b: Vec<(Kernel<S>, usize)>,
}

impl<S: Scalar> Side<S> {
    /// `(Z_{h₁}(x₁) + Z_{h₂}(x₂), Z_{h₃}(x₁) + Z_{h₄}(x₂))`.
    pub fn coupled_2d(case: &RotationCase<S>) -> Self {
        Self {
            slots: 2,
            a: vec![(case.h1.clone(), 0), (case.h2.clone(), 1)],
            b: vec![(case.h3.clone(), 0), (case.h4.clone(), 1)],
        }
    }

    /// `(Z_{h₁}(x₁) + Z_{h₂}(x₂), Z_{h₃}(x₁) + Z_{h₄}(x₃))`.
    pub fn coupled_3d(case: &RotationCase<S>) -> Self {
        Self {
            slots: 3,
            a: vec![(case.h1.clone(), 0), (case.h2.clone(), 1)],
            b: vec![(case.h3.clone(), 0), (case.h4.clone(), 2)],
        }
    }

    /// `(Z_{s₁}(x), Z_{s₂}(y))`.
    pub fn rotated(s1: Kernel<S>, s2: Kernel<S>) -> Self {
        Self { slots: 2, a: vec![(s1, 0)], b: vec![(s2, 1)] }
    }
}

/// Coordinate weights `w · h` per slot, deduplicated across functionals.
struct CoordTable<S> {
    /// Per unique coordinate: `(weights, slot)` contributions.
    a: Vec<Vec<(Vec<S>, usize)>>,
    b: Vec<Vec<(Vec<S>, usize)>>,
    /// Per functional: indices into `a` and `b`.
    index: Vec<(Vec<usize>, Vec<usize>)>,
}

fn intern<S: Scalar>(pool: &mut Vec<Kernel<S>>, w: &Kernel<S>) -> usize {
    match pool.iter().position(|p| p.grid_eq(w, S::zero())) {
        Some(i) => i,
        None => {
            pool.push(w.clone());
            pool.len() - 1
        }
    }
}

impl<S: Scalar> CoordTable<S> {
    fn build(side: &Side<S>, fs: &[CoordFunctional2<S>]) -> Result<Self> {
        let (mut pa, mut pb) = (Vec::new(), Vec::new());
        let index = fs
            .iter()
            .map(|f| {
                let ia = f.coords_a.iter().map(|w| intern(&mut pa, w)).collect();
                let ib = f.coords_b.iter().map(|w| intern(&mut pb, w)).collect();
                (ia, ib)
            })
            .collect();
        let weights = |pool: &[Kernel<S>], parts: &[(Kernel<S>, usize)]| -> Result<Vec<Vec<(Vec<S>, usize)>>> {
            pool.iter()
                .map(|w| parts.iter().map(|(h, s)| Ok((w.product(h)?.samples().to_vec(), *s))).collect())
                .collect()
        };
        Ok(Self { a: weights(&pa, &side.a)?, b: weights(&pb, &side.b)?, index })
    }
}

fn coords_into<S: Scalar>(table: &[Vec<(Vec<S>, usize)>], dx: &[Vec<S>], out: &mut [S]) {
    for (o, parts) in out.iter_mut().zip(table) {
        *o = parts.iter().map(|(w, s)| pwz_sum(w, &dx[*s])).sum();
    }
}

/// One MC pass estimating every functional on a shared draw of `side`.
pub(crate) fn estimate_side<S: Scalar>(
    side: &Side<S>,
    fs: &[CoordFunctional2<S>],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<McEstimate<S>>> {
    let table = CoordTable::build(side, fs)?;
    let slots: Vec<u64> = (0..side.slots as u64).collect();
    let (na, nb) = (table.a.len(), table.b.len());
    let width = fs.iter().map(|f| f.coords_a.len().max(f.coords_b.len())).max().unwrap_or(0);
    mc_expectations(
        sampler,
        n,
        &slots,
        fs.len(),
        || (vec![S::zero(); na], vec![S::zero(); nb], vec![S::zero(); width], vec![S::zero(); width]),
        |(ca, cb, ga, gb), dx, out| {
            coords_into(&table.a, dx, ca);
            coords_into(&table.b, dx, cb);
            for ((f, (ia, ib)), o) in fs.iter().zip(&table.index).zip(out.iter_mut()) {
                for (g, &i) in ga.iter_mut().zip(ia) {
                    *g = ca[i];
                }
                for (g, &i) in gb.iter_mut().zip(ib) {
                    *g = cb[i];
                }
                *o = f.eval(&ga[..ia.len()], &gb[..ib.len()]);
            }
        },
    )
}

/// Two MC estimates of one identity and the 3-SE verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationReport<S> {
    pub name: String,
    pub lhs: McEstimate<S>,
    pub rhs: McEstimate<S>,
    pub delta: S,
    /// Combined standard error `√(se_l² + se_r²)`.
    pub se: S,
    pub pass: bool,
    pub seed: u64,
    pub n: usize,
    pub steps: usize,
}

impl<S: Scalar> RotationReport<S> {
    pub fn compare(name: impl Into<String>, lhs: McEstimate<S>, rhs: McEstimate<S>, sampler: &PathSampler<S>, n: usize) -> Self {
        let delta = (lhs.mean - rhs.mean).norm();
        let se = (lhs.std_error.powi(2) + rhs.std_error.powi(2)).sqrt();
        let slack = S::lit(1e-12) * lhs.mean.norm().max(S::one());
        Self {
            name: name.into(),
            lhs,
            rhs,
            delta,
            se,
            pass: delta <= S::lit(SE_MULTIPLIER) * se + slack,
            seed: sampler.seed(),
            n,
            steps: sampler.grid().steps(),
        }
    }

    /// `|Δ| / SE`.
    pub fn z(&self) -> S {
        if self.delta == S::zero() {
            S::zero()
        } else {
            self.delta / self.se
        }
    }

    pub fn to_json(&self) -> Value {
        let side = |e: &McEstimate<S>| {
            json!({"mean": [e.mean.re.to_f64_lossy(), e.mean.im.to_f64_lossy()], "se": e.std_error.to_f64_lossy()})
        };
        json!({
            "name": self.name,
            "lhs": side(&self.lhs),
            "rhs": side(&self.rhs),
            "delta": self.delta.to_f64_lossy(),
            "se": self.se.to_f64_lossy(),
            "z": self.z().to_f64_lossy(),
            "pass": self.pass,
            "seeds": [self.seed],
            "n": self.n,
            "M": self.steps,
        })
    }
}

pub(crate) fn require_independent<S: Scalar>(case: &RotationCase<S>) -> Result<()> {
    case.ensure_nonzero()?;
    let crit = independence_criterion(case)?;
    if !crit.independent {
        return Err(Error::Hypothesis(format!(
            "h1 h3 + h2 h4 reaches {} on the grid",
            crit.residual.max_abs()
        )));
    }
    Ok(())
}

pub(crate) fn require_disjoint<S: Scalar>(case: &RotationCase<S>) -> Result<()> {
    case.ensure_nonzero()?;
    let overlap = supports_overlap(&case.h1, &case.h3)?;
    if overlap > case.grid().dt() * S::lit(1.0 + 1e-9) {
        return Err(Error::Hypothesis(format!("supp h1 and supp h3 overlap on a set of measure {overlap}")));
    }
    Ok(())
}

/// Slot bases: the two sides of an identity never share streams.
const LHS_SLOTS: u64 = 0;
const RHS_SLOTS: u64 = 4;

/// Reports for an equal-in-law identity over `fs` and its product split over
/// `pairs`, from one draw per side. Left: `coupled`. Right: `(Z_{s₁}(x), Z_{s₂}(y))`;
/// product right sides multiply the marginal estimates of `F` (on `x`) and `G` (on `y`).
pub(crate) fn run_identity<S: Scalar>(
    coupled: &Side<S>,
    case: &RotationCase<S>,
    fs: &[CoordFunctional2<S>],
    pairs: &[(CoordFunctional<S>, CoordFunctional<S>)],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<(Vec<RotationReport<S>>, Vec<RotationReport<S>>)> {
    let (s1, s2) = case.combined()?;
    let joint: Vec<_> = pairs.iter().map(|(f, g)| CoordFunctional2::product(f, g)).collect();
    let mut left: Vec<_> = fs.to_vec();
    left.extend(joint.iter().cloned());
    let mut right: Vec<_> = fs.to_vec();
    right.extend(pairs.iter().map(|(f, _)| CoordFunctional2::first(f)));
    right.extend(pairs.iter().map(|(_, g)| CoordFunctional2::second(g)));
    let base = sampler.slot_base();
    let lhs = estimate_side(coupled, &left, &sampler.with_slot_base(base + LHS_SLOTS), n)?;
    let rhs = estimate_side(&Side::rotated(s1, s2), &right, &sampler.with_slot_base(base + RHS_SLOTS), n)?;
    let (m, k) = (fs.len(), pairs.len());
    let laws = fs
        .iter()
        .enumerate()
        .map(|(i, f)| RotationReport::compare(f.name.clone(), lhs[i], rhs[i], sampler, n))
        .collect();
    let products = joint
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let r = rhs[m + i].product(&rhs[m + k + i]);
            RotationReport::compare(f.name.clone(), lhs[m + i], r, sampler, n)
        })
        .collect();
    Ok((laws, products))
}

/// Two-dimensional rotation for each functional, sharing one draw per side.
pub fn verify_rotation_2d_battery<S: Scalar>(
    case: &RotationCase<S>,
    fs: &[CoordFunctional2<S>],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<RotationReport<S>>> {
    require_independent(case)?;
    Ok(run_identity(&Side::coupled_2d(case), case, fs, &[], sampler, n)?.0)
}

/// `E[F(Z_{h₁}(x₁)+Z_{h₂}(x₂), Z_{h₃}(x₁)+Z_{h₄}(x₂))] = E[F(Z_{s(h₁,h₂)}(x), Z_{s(h₃,h₄)}(y))]`.
pub fn verify_rotation_2d<S: Scalar>(
    case: &RotationCase<S>,
    f: &CoordFunctional2<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<RotationReport<S>> {
    Ok(verify_rotation_2d_battery(case, std::slice::from_ref(f), sampler, n)?.remove(0))
}

/// `E[F(Z_{h₁}(x₁) + Z_{h₂}(x₂))] = E[F(Z_{s(h₁,h₂)}(x))]`.
pub fn verify_rotation_1d<S: Scalar>(
    h1: &Kernel<S>,
    h2: &Kernel<S>,
    fs: &[CoordFunctional<S>],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<RotationReport<S>>> {
    h1.grid().ensure_same(h2.grid(), "h2")?;
    h1.ensure_nonzero("h1")?;
    h2.ensure_nonzero("h2")?;
    let s = combine_s(h1, h2)?;
    let f2: Vec<_> = fs.iter().map(CoordFunctional2::first).collect();
    let coupled = Side { slots: 2, a: vec![(h1.clone(), 0), (h2.clone(), 1)], b: Vec::new() };
    let single = Side { slots: 1, a: vec![(s, 0)], b: Vec::new() };
    let base = sampler.slot_base();
    let lhs = estimate_side(&coupled, &f2, &sampler.with_slot_base(base + LHS_SLOTS), n)?;
    let rhs = estimate_side(&single, &f2, &sampler.with_slot_base(base + RHS_SLOTS), n)?;
    Ok(fs
        .iter()
        .zip(lhs.into_iter().zip(rhs))
        .map(|(f, (l, r))| RotationReport::compare(f.name.clone(), l, r, sampler, n))
        .collect())
}

/// `E[F(𝔷_{h₁,h₂}) G(𝔷_{h₃,h₄})] = E[F(Z_{s(h₁,h₂)})] E[G(Z_{s(h₃,h₄)})]`: left side one
/// coupled estimate of `F(a) G(b)`, right side a product of independent estimates.
pub fn verify_product_split_2d<S: Scalar>(
    case: &RotationCase<S>,
    pairs: &[(CoordFunctional<S>, CoordFunctional<S>)],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<RotationReport<S>>> {
    require_independent(case)?;
    Ok(run_identity(&Side::coupled_2d(case), case, &[], pairs, sampler, n)?.1)
}

/// Three-path rotation under `m(supp h₁ ∩ supp h₃) = 0`.
pub fn verify_rotation_3d_battery<S: Scalar>(
    case: &RotationCase<S>,
    fs: &[CoordFunctional2<S>],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<RotationReport<S>>> {
    require_disjoint(case)?;
    Ok(run_identity(&Side::coupled_3d(case), case, fs, &[], sampler, n)?.0)
}

/// `E[F(Z_{h₁}(x₁)+Z_{h₂}(x₂), Z_{h₃}(x₁)+Z_{h₄}(x₃))] = E[F(Z_{s(h₁,h₂)}(x), Z_{s(h₃,h₄)}(y))]`.
pub fn verify_rotation_3d<S: Scalar>(
    case: &RotationCase<S>,
    f: &CoordFunctional2<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<RotationReport<S>> {
    Ok(verify_rotation_3d_battery(case, std::slice::from_ref(f), sampler, n)?.remove(0))
}

/// Product form of the three-path rotation.
pub fn verify_product_split_3d<S: Scalar>(
    case: &RotationCase<S>,
    pairs: &[(CoordFunctional<S>, CoordFunctional<S>)],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<RotationReport<S>>> {
    require_disjoint(case)?;
    Ok(run_identity(&Side::coupled_3d(case), case, &[], pairs, sampler, n)?.1)
}

/// `E[𝔷_{h₁,h₂}(s) 𝔷_{h₃,h₄}(t)]` at each `(s, t)`, over independent `(x₁, x₂)`.
pub fn empirical_cross_covariance<S: Scalar>(
    case: &RotationCase<S>,
    points: &[(S, S)],
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<Vec<McEstimate<S>>> {
    if [&case.h1, &case.h2, &case.h3, &case.h4].iter().all(|k| k.is_zero()) {
        return Err(Error::ZeroKernel("h1..h4".into()));
    }
    let grid = *case.grid();
    let upto = |t: S| Kernel::indicator(S::zero(), t, grid);
    let fs: Vec<_> = points
        .iter()
        .map(|&(s, t)| {
            CoordFunctional2::new(format!("cov({s},{t})"), vec![upto(s)], vec![upto(t)], |a, b| {
                Complex::new(a[0] * b[0], S::zero())
            })
        })
        .collect();
    estimate_side(&Side::coupled_2d(case), &fs, sampler, n)
}
