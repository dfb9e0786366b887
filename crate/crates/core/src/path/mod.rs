//! Discretized Wiener paths, PWZ integrals and Monte Carlo estimation.
//!
//! The PWZ integral uses the left-endpoint sum `Σ v(t_i) (x(t_{i+1}) − x(t_i))`,
//! so `⟨v, Z_h(x)⟩ = ⟨vh, x⟩` is an algebraic identity on the grid.

mod estimate;
mod mc;
mod sampler;

pub use estimate::{McEstimate, Welford};
pub use mc::{mc_expectation, mc_expectations, pwz_sum};
pub use sampler::PathSampler;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::scalar::Scalar;

/// A grid-sampled path starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath<S: Scalar> {
    grid: Grid<S>,
    samples: Vec<S>,
    stream: Option<u64>,
}

impl<S: Scalar> WienerPath<S> {
    pub fn zero(grid: Grid<S>) -> Self {
        Self { grid, samples: vec![S::zero(); grid.nodes()], stream: None }
    }

    /// Any grid function vanishing at `t = 0`; deterministic paths carry no stream.
    pub fn from_samples(samples: Vec<S>, grid: Grid<S>) -> Result<Self> {
        if samples.len() != grid.nodes() {
            return Err(Error::GridMismatch(format!(
                "path needs {} samples, got {}",
                grid.nodes(),
                samples.len()
            )));
        }
        if samples[0] != S::zero() {
            return Err(Error::InvalidParameter("paths start at the origin".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("path samples must be finite".into()));
        }
        Ok(Self { grid, samples, stream: None })
    }

    /// Cumulative sum of increments.
    pub fn from_increments(increments: &[S], grid: Grid<S>) -> Result<Self> {
        if increments.len() != grid.steps() {
            return Err(Error::GridMismatch(format!(
                "path needs {} increments, got {}",
                grid.steps(),
                increments.len()
            )));
        }
        let mut samples = Vec::with_capacity(grid.nodes());
        cumulate(increments, &mut samples);
        Ok(Self { grid, samples, stream: None })
    }

    pub(crate) fn with_stream(mut self, stream: u64) -> Self {
        self.stream = Some(stream);
        self
    }

    /// RNG stream the path was drawn from, if any.
    pub fn stream(&self) -> Option<u64> {
        self.stream
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn terminal(&self) -> S {
        self.samples[self.grid.steps()]
    }

    pub fn increments(&self) -> impl Iterator<Item = S> + '_ {
        self.samples.windows(2).map(|w| w[1] - w[0])
    }

    pub fn scaled(&self, rho: S) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|&x| rho * x).collect(), stream: None }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-S::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "path sum")?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| a + b).collect();
        Ok(Self { grid: self.grid, samples, stream: None })
    }
}

/// Writes the running sums `0, d_0, d_0 + d_1, …` into `out`.
pub(crate) fn cumulate<S: Scalar>(increments: &[S], out: &mut Vec<S>) {
    out.clear();
    out.push(S::zero());
    let mut acc = S::zero();
    for &d in increments {
        acc += d;
        out.push(acc);
    }
}

/// `⟨v, x⟩ = Σ_{i<M} v(t_i) (x(t_{i+1}) − x(t_i))`; `v ≡ 1` telescopes to `x(T)`.
pub fn pwz_integral<S: Scalar>(v: &Kernel<S>, x: &WienerPath<S>) -> Result<S> {
    v.grid().ensure_same(x.grid(), "PWZ integral")?;
    if v.samples().iter().all(|&a| a == S::one()) {
        return Ok(x.terminal());
    }
    Ok(v.samples().iter().zip(x.increments()).map(|(&a, d)| a * d).sum())
}

/// `Z_h(x, t_j) = Σ_{i<j} h(t_i) (x(t_{i+1}) − x(t_i))`; `h ≡ 1` returns `x` itself.
pub fn gaussian_process_path<S: Scalar>(h: &Kernel<S>, x: &WienerPath<S>) -> Result<WienerPath<S>> {
    h.grid().ensure_same(x.grid(), "Gaussian process path")?;
    if h.samples().iter().all(|&v| v == S::one()) {
        return Ok(x.clone());
    }
    let mut samples = Vec::with_capacity(x.samples.len());
    let weighted: Vec<S> = h.samples().iter().zip(x.increments()).map(|(&a, d)| a * d).collect();
    cumulate(&weighted, &mut samples);
    Ok(WienerPath { grid: x.grid, samples, stream: None })
}

/// Draws `n` paths from slot 0 of the sampler, in sample order.
pub fn sample_paths<S: Scalar>(sampler: &PathSampler<S>, n: usize) -> Vec<WienerPath<S>> {
    sampler.paths(0, n)
}

#[cfg(test)]
mod tests;
