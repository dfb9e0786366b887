use super::expr::{haar_level, Expr};
use super::support::SupportSet;
use super::Kernel;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// `h_n` needs every breakpoint `i T / 2^{j+1}` on the grid.
pub(crate) fn ensure_resolvable<S: Scalar>(index: usize, grid: &Grid<S>) -> Result<()> {
    if index == 0 {
        return Err(Error::InvalidParameter("Haar functions are indexed from 1".into()));
    }
    let Some((level, _)) = haar_level(index) else {
        return Ok(());
    };
    let required = 1usize
        .checked_shl(level + 1)
        .ok_or_else(|| Error::InvalidParameter(format!("Haar index {index} too large")))?;
    if grid.steps() % required != 0 {
        return Err(Error::GridTooCoarse { required, steps: grid.steps() });
    }
    Ok(())
}

/// `h_1, …, h_{n_max}`: orthonormal Haar system on `[0, T]`.
pub fn haar_basis<S: Scalar>(n_max: usize, grid: Grid<S>) -> Result<Vec<Kernel<S>>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    ensure_resolvable(n_max, &grid)?;
    Ok((1..=n_max).map(|n| Kernel::from_expr(Expr::haar(n), grid)).collect())
}

/// The two halves `A = [0, T/2]`, `B = [T/2, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfInterval {
    A,
    B,
}

impl HalfInterval {
    pub fn bounds<S: Scalar>(self, horizon: S) -> (S, S) {
        let mid = horizon * S::lit(0.5);
        match self {
            HalfInterval::A => (S::zero(), mid),
            HalfInterval::B => (mid, horizon),
        }
    }

    pub fn set<S: Scalar>(self, horizon: S) -> SupportSet<S> {
        let (lo, hi) = self.bounds(horizon);
        SupportSet::interval(lo, hi).expect("valid half interval")
    }

    fn contains_shift(self, level: u32, shift: usize) -> bool {
        let half = 1usize << (level - 1);
        match self {
            HalfInterval::A => shift < half,
            HalfInterval::B => shift >= half,
        }
    }
}

/// First `count` members of the orthonormal basis of `L₂(side)`: the normalized
/// indicator `χ/√(T/2)` followed by the Haar functions supported in `side`, in
/// level order. `count = 2^p` exhausts levels `1..=p`.
pub fn haar_subbasis<S: Scalar>(side: HalfInterval, count: usize, grid: Grid<S>) -> Result<Vec<Kernel<S>>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let horizon = grid.horizon();
    let (lo, hi) = side.bounds(horizon);
    let norm = (horizon * S::lit(0.5)).sqrt().recip();
    let mut out = vec![Kernel::from_expr(Expr::indicator(lo, hi).scaled(norm), grid)];
    let mut n = 3;
    while out.len() < count {
        let (level, shift) = haar_level(n).expect("n >= 3");
        if side.contains_shift(level, shift) {
            out.push(Kernel::haar(n, grid)?);
        }
        n += 1;
    }
    Ok(out)
}
