use num_complex::Complex;
use rayon::prelude::*;

use super::estimate::{McEstimate, Welford};
use super::sampler::PathSampler;
use super::cumulate;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `Σ_i v_i dx_i` over the shorter of the two slices.
#[inline]
pub fn pwz_sum<S: Scalar>(v: &[S], dx: &[S]) -> S {
    let mut acc = [S::zero(); 4];
    let chunks = v.chunks_exact(4).zip(dx.chunks_exact(4));
    let tail = v.len().min(dx.len()) / 4 * 4;
    for (a, b) in chunks {
        for k in 0..4 {
            acc[k] += a[k] * b[k];
        }
    }
    let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (&a, &b) in v[tail..].iter().zip(&dx[tail..]) {
        total += a * b;
    }
    total
}

/// Estimates `outputs` expectations from one shared draw per sample.
///
/// Each sample draws one increment vector per entry of `slots` (the entry is
/// the stream slot, so callers keep the two sides of an identity on disjoint
/// slots). `f(scratch, increments, out)` writes the functional values; scratch
/// comes from `init` once per worker and must not carry state between calls.
/// Batches are reduced by a fixed binary tree, so the result is bit-identical
/// for a given seed whatever the thread count.
pub fn mc_expectations<S, W, I, F>(
    sampler: &PathSampler<S>,
    n: usize,
    slots: &[u64],
    outputs: usize,
    init: I,
    f: F,
) -> Result<Vec<McEstimate<S>>>
where
    S: Scalar,
    I: Fn() -> W + Sync + Send,
    F: Fn(&mut W, &[Vec<S>], &mut [Complex<S>]) + Sync + Send,
{
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    let steps = sampler.grid().steps();
    let batch = sampler.batch();
    let zero = Complex::new(S::zero(), S::zero());
    let half = S::lit(0.5);
    let stats: Vec<Result<Vec<Welford<S>>>> = (0..n.div_ceil(batch))
        .into_par_iter()
        .map_init(
            || (init(), vec![vec![S::zero(); steps]; slots.len()], vec![zero; outputs], vec![zero; outputs]),
            |(scratch, dx, out, mirror), b| {
                let mut rngs: Vec<_> = slots.iter().map(|&s| sampler.rng(s, b)).collect();
                let mut acc = vec![Welford::default(); outputs];
                for j in 0..batch.min(n - b * batch) {
                    for (rng, d) in rngs.iter_mut().zip(dx.iter_mut()) {
                        sampler.fill_increments(rng, d);
                    }
                    f(scratch, dx, out);
                    if sampler.antithetic() {
                        dx.iter_mut().flatten().for_each(|d| *d = -*d);
                        f(scratch, dx, mirror);
                        for (o, m) in out.iter_mut().zip(mirror.iter()) {
                            *o = (*o + *m) * half;
                        }
                    }
                    if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                        return Err(Error::NonFinite {
                            sample: b * batch + j,
                            seed: sampler.seed(),
                            stream: sampler.stream_of(slots.first().copied().unwrap_or(0), b),
                        });
                    }
                    for (w, &v) in acc.iter_mut().zip(out.iter()) {
                        w.push(v);
                    }
                }
                Ok(acc)
            },
        )
        .collect();
    let stats = stats.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..outputs)
        .map(|k| {
            let parts: Vec<Welford<S>> = stats.iter().map(|s| s[k]).collect();
            Welford::tree_merge(&parts).estimate()
        })
        .collect())
}

/// `E[f(ρ_1 x_1, …, ρ_k x_k)]` over independent Wiener paths, one per entry
/// of `scales`, drawn from slots `0..k`.
pub fn mc_expectation<S, F>(sampler: &PathSampler<S>, n: usize, scales: &[S], f: F) -> Result<McEstimate<S>>
where
    S: Scalar,
    F: Fn(&[&[S]]) -> Complex<S> + Sync + Send,
{
    let slots: Vec<u64> = (0..scales.len() as u64).collect();
    let nodes = sampler.grid().nodes();
    let est = mc_expectations(
        sampler,
        n,
        &slots,
        1,
        || (vec![Vec::with_capacity(nodes); scales.len()], Vec::with_capacity(nodes)),
        |(paths, tmp): &mut (Vec<Vec<S>>, Vec<S>), dx, out| {
            for ((p, d), &rho) in paths.iter_mut().zip(dx).zip(scales) {
                tmp.clear();
                tmp.extend(d.iter().map(|&v| rho * v));
                cumulate(tmp, p);
            }
            let views: Vec<&[S]> = paths.iter().map(Vec::as_slice).collect();
            out[0] = f(&views);
        },
    )?;
    Ok(est[0])
}
