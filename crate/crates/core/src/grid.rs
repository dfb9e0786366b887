use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform time grid `t_i = i T / M`, `i = 0..=M`, on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<S> {
    horizon: S,
    steps: usize,
}

impl<S: Scalar> Grid<S> {
    pub fn new(horizon: S, steps: usize) -> Result<Self> {
        if !(horizon > S::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    #[inline]
    pub fn horizon(&self) -> S {
        self.horizon
    }

    /// Number of steps `M`; there are `M + 1` nodes.
    #[inline]
    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    #[inline]
    pub fn dt(&self) -> S {
        self.horizon / S::from_usize_lossy(self.steps)
    }

    /// Node `t_i`, computed as `T * (i / M)` so dyadic breakpoints land exactly on nodes.
    #[inline]
    pub fn time(&self, i: usize) -> S {
        self.horizon * (S::from_usize_lossy(i) / S::from_usize_lossy(self.steps))
    }

    pub fn times(&self) -> impl Iterator<Item = S> + '_ {
        (0..=self.steps).map(move |i| self.time(i))
    }

    /// Index of the node nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: S) -> usize {
        let x = (t / self.dt()).round();
        let x = x.max(S::zero()).to_usize().unwrap_or(0);
        x.min(self.steps)
    }

    pub fn ensure_same(&self, other: &Self, what: &str) -> Result<()> {
        if self.steps != other.steps || self.horizon != other.horizon {
            return Err(Error::GridMismatch(format!(
                "{what}: (T={}, M={}) vs (T={}, M={})",
                self.horizon, self.steps, other.horizon, other.steps
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_nodes_are_exact() {
        let g = Grid::new(3.0f64, 8).unwrap();
        assert_eq!(g.time(4), 1.5);
        assert_eq!(g.time(8), 3.0);
        assert_eq!(g.nearest_index(1.49), 4);
        assert_eq!(g.nearest_index(10.0), 8);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Grid::new(0.0f64, 4).is_err());
        assert!(Grid::new(1.0f64, 0).is_err());
    }
}
