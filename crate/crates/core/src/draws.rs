//! Seeded random draws from the symbolic primitive set: kernels, partitions,
//! exponential combinations and hypothesis-satisfying kernel tuples.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::functional::{CtoSpec, ExpCombo, ExpTerm, TransformParam};
use crate::grid::Grid;
use crate::kernel::{Expr, Kernel, SupportSet};
use crate::scalar::Scalar;

/// Partition cut points are multiples of `T / BLOCKS`.
pub const BLOCKS: usize = 8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn leaf<S: Scalar>(rng: &mut impl Rng, horizon: S) -> Expr<S> {
    let block = horizon / S::from_usize_lossy(BLOCKS);
    match rng.random_range(0..5) {
        0 => Expr::constant(rng.random_range(0.25..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }),
        1 => Expr::sin(rng.random_range(1..=6) as f64),
        2 => Expr::cos(rng.random_range(0..=6) as f64),
        3 => Expr::Time.scaled(horizon.recip()),
        _ => {
            let lo = rng.random_range(0..BLOCKS);
            let hi = rng.random_range(lo + 1..=BLOCKS);
            Expr::indicator(block * S::from_usize_lossy(lo), block * S::from_usize_lossy(hi))
        }
    }
}

fn tree<S: Scalar>(rng: &mut impl Rng, horizon: S, depth: u32) -> Expr<S> {
    if depth == 0 || rng.random_bool(0.35) {
        return leaf(rng, horizon);
    }
    let (a, b) = (tree(rng, horizon, depth - 1), tree(rng, horizon, depth - 1));
    match rng.random_range(0..3) {
        0 => a.plus(b.scaled(S::lit(rng.random_range(-1.5..1.5)))),
        1 => a.times(b),
        _ => a.minus(b),
    }
}

/// A nonzero symbolic kernel of bounded tree depth.
pub fn random_kernel<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>) -> Kernel<S> {
    loop {
        let k = Kernel::from_expr(tree(rng, grid.horizon(), 2), grid);
        if k.max_abs() > S::lit(1e-3) {
            return k;
        }
    }
}

/// A nonzero kernel rescaled so that `max |u| = amp`.
pub fn random_bounded_kernel<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>, amp: S) -> Kernel<S> {
    let k = random_kernel(rng, grid);
    let m = k.max_abs();
    k.scaled(amp / m)
}

/// `{A, B}` covering `[0, T]` with positive measures: a cut `[0,c] ∪ [c,T]` at a
/// block boundary, or two interleaved unions of blocks.
pub fn random_partition<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>) -> Result<(SupportSet<S>, SupportSet<S>)> {
    let block = grid.horizon() / S::from_usize_lossy(BLOCKS);
    let at = |j: usize| if j == BLOCKS { grid.horizon() } else { block * S::from_usize_lossy(j) };
    if rng.random_bool(0.5) {
        let c = rng.random_range(1..BLOCKS);
        return Ok((SupportSet::interval(S::zero(), at(c))?, SupportSet::interval(at(c), at(BLOCKS))?));
    }
    let mask: Vec<bool> = loop {
        let m: Vec<bool> = (0..BLOCKS).map(|_| rng.random_bool(0.5)).collect();
        if m.iter().any(|&x| x) && m.iter().any(|&x| !x) {
            break m;
        }
    };
    let side = |want: bool| {
        let iv = (0..BLOCKS).filter(|&j| mask[j] == want).map(|j| (at(j), at(j + 1))).collect();
        SupportSet::from_intervals(iv)
    };
    Ok((side(true)?, side(false)?))
}

/// `Σ c_j exp⟨u_j, ·⟩` with 1–3 terms and `max |u_j| ≤ 0.4`.
pub fn random_combo<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>) -> Result<ExpCombo<S>> {
    random_combo_within(rng, grid, S::lit(0.4))
}

/// As [`random_combo`] with `max |u_j| ≤ max_amp`.
pub fn random_combo_within<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>, max_amp: S) -> Result<ExpCombo<S>> {
    loop {
        let n = rng.random_range(1..=3);
        let terms = (0..n)
            .map(|_| {
                let c = Complex::new(S::lit(rng.random_range(-2.0..2.0)), S::lit(rng.random_range(-1.0..1.0)));
                let amp = max_amp * S::lit(rng.random_range(0.125..1.0));
                ExpTerm::new(c, random_bounded_kernel(rng, grid, amp))
            })
            .collect();
        let combo = ExpCombo::from_terms(terms, grid)?;
        if !combo.is_empty() {
            return Ok(combo);
        }
    }
}

/// Feynman `q ∈ ±[0.5, 3]`, or an analytic `λ` with `Re λ > 0`.
pub fn random_param<S: Scalar>(rng: &mut impl Rng) -> Result<TransformParam<S>> {
    if rng.random_bool(0.5) {
        let q = rng.random_range(0.5..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        TransformParam::feynman(S::lit(q))
    } else {
        TransformParam::analytic(Complex::new(S::lit(rng.random_range(0.2..3.0)), S::lit(rng.random_range(-3.0..3.0))))
    }
}

fn nonzero<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>, f: impl Fn(Kernel<S>) -> Result<Kernel<S>>) -> Result<Kernel<S>> {
    loop {
        let k = f(random_kernel(rng, grid))?;
        if k.max_abs() > S::lit(1e-3) {
            return Ok(k);
        }
    }
}

/// `(spec, k)` with `g₁g₂k² + h₁h₂ = 0`: either `h₁ = c g₁k, h₂ = −g₂k / c`, or
/// `g₁, h₂` carried by `A` and `g₂, h₁` by `B`.
pub fn random_thm52_case<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>) -> Result<(CtoSpec<S>, Kernel<S>)> {
    loop {
        let k = random_kernel(rng, grid);
        let spec = if rng.random_bool(0.5) {
            let (g1, g2) = (random_kernel(rng, grid), random_kernel(rng, grid));
            let c = S::lit(rng.random_range(0.5..2.0));
            let h1 = g1.product(&k)?.scaled(c);
            let h2 = g2.product(&k)?.scaled(-c.recip());
            CtoSpec::new(g1, g2, h1, h2)
        } else {
            let (a, b) = random_partition(rng, grid)?;
            let g1 = nonzero(rng, grid, |x| Ok(x.restricted_to(&a)))?;
            let h2 = nonzero(rng, grid, |x| Ok(x.restricted_to(&a)))?;
            let g2 = nonzero(rng, grid, |x| Ok(x.restricted_to(&b)))?;
            let h1 = nonzero(rng, grid, |x| Ok(x.restricted_to(&b)))?;
            CtoSpec::new(g1, g2, h1, h2)
        };
        // products can vanish on the grid; draw again
        if let Ok(spec) = spec {
            return Ok((spec, k));
        }
    }
}

/// `(spec34, k₁, k₂)` with `h₃ = p χ_A`, `h₄ = r χ_B`.
pub fn random_thm54_case<S: Scalar>(rng: &mut impl Rng, grid: Grid<S>) -> Result<(CtoSpec<S>, Kernel<S>, Kernel<S>)> {
    let (a, b) = random_partition(rng, grid)?;
    let (g1, g2) = (random_kernel(rng, grid), random_kernel(rng, grid));
    let h3 = nonzero(rng, grid, |x| Ok(x.restricted_to(&a)))?;
    let h4 = nonzero(rng, grid, |x| Ok(x.restricted_to(&b)))?;
    let (k1, k2) = (random_kernel(rng, grid), random_kernel(rng, grid));
    Ok((CtoSpec::new(g1, g2, h3, h4)?, k1, k2))
}

/// `(g₁, g₂, k, A, B)` for which the trigonometric family has no zero slot.
pub fn random_trig_inputs<S: Scalar>(
    rng: &mut impl Rng,
    grid: Grid<S>,
) -> Result<(Kernel<S>, Kernel<S>, Kernel<S>, SupportSet<S>, SupportSet<S>)> {
    loop {
        let (g1, g2, k) = (random_kernel(rng, grid), random_kernel(rng, grid), random_kernel(rng, grid));
        let (a, b) = random_partition(rng, grid)?;
        let (g1k, g2k) = (g1.product(&k)?, g2.product(&k)?);
        let live = [&g1k, &g2k].iter().all(|f| !f.restricted_to(&a).is_zero() && !f.restricted_to(&b).is_zero());
        if live {
            return Ok((g1, g2, k, a, b));
        }
    }
}
