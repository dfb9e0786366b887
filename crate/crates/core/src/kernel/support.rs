use serde_json::{json, Value};

use super::expr::{as_f64, indicator, Expr};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Sorted union of closed intervals in `[0, T]`, pairwise disjoint up to
/// touching endpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportSet<S> {
    intervals: Vec<(S, S)>,
}

impl<S: Scalar> SupportSet<S> {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn interval(lo: S, hi: S) -> Result<Self> {
        Self::from_intervals(vec![(lo, hi)])
    }

    /// Sorts and validates; touching intervals are merged.
    pub fn from_intervals(mut intervals: Vec<(S, S)>) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite()) || a > b) {
            return Err(Error::InvalidParameter("support intervals need lo <= hi".into()));
        }
        intervals.retain(|&(a, b)| a < b);
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        let mut merged: Vec<(S, S)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a < last.1 => {
                    return Err(Error::InvalidParameter(format!(
                        "support intervals overlap at [{a}, {}]",
                        last.1
                    )))
                }
                Some(last) if a == last.1 => last.1 = b,
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    /// Union of cells `[t_i, t_{i+1}]` over marked nodes; the last node maps to
    /// the final cell `[t_{M-1}, t_M]`.
    pub fn from_grid_mask(grid: &Grid<S>, mask: impl Iterator<Item = bool>) -> Self {
        let m = grid.steps();
        let mut cells = vec![false; m];
        for (i, on) in mask.enumerate().take(m + 1) {
            if on {
                cells[i.min(m - 1)] = true;
            }
        }
        let mut intervals = Vec::new();
        let mut i = 0;
        while i < m {
            if cells[i] {
                let start = i;
                while i < m && cells[i] {
                    i += 1;
                }
                intervals.push((grid.time(start), grid.time(i)));
            } else {
                i += 1;
            }
        }
        Self { intervals }
    }

    pub fn intervals(&self) -> &[(S, S)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> S {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn intersection_measure(&self, other: &Self) -> S {
        let mut total = S::zero();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if hi > lo {
                    total += hi - lo;
                }
            }
        }
        total
    }

    pub fn contains_set(&self, other: &Self) -> bool {
        (other.measure() - self.intersection_measure(other)).abs()
            <= S::lit(1e-12) * other.measure().max(S::one())
    }

    /// `χ_A` as a sum of half-open indicators.
    pub fn indicator_expr(&self) -> Expr<S> {
        Expr::Add(self.intervals.iter().map(|&(a, b)| Expr::indicator(a, b)).collect())
    }

    pub fn indicator_at(&self, t: S, horizon: S) -> S {
        self.intervals.iter().map(|&(a, b)| indicator(t, a, b, horizon)).sum()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.intervals
                .iter()
                .map(|&(a, b)| json!([a.to_f64_lossy(), b.to_f64_lossy()]))
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let list = value
            .as_array()
            .ok_or_else(|| Error::Literal("support set must be a list of [lo, hi]".into()))?;
        let intervals = list
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok((S::lit(as_f64(a)?), S::lit(as_f64(b)?))),
                _ => Err(Error::Literal("support interval must be [lo, hi]".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_intervals(intervals)
    }
}
