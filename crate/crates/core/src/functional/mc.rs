//! Monte Carlo forms of the transform and convolution at real `λ > 0`:
//! `E[F(y + λ^{-1/2} Z_k(x))]` and its relatives, for any path functional.

use num_complex::Complex;

use super::{CtoSpec, ExpCombo};
use crate::error::{Error, Result};
use crate::kernel::{combine_s, Kernel};
use crate::path::{gaussian_process_path, mc_expectations, McEstimate, PathSampler, WienerPath};
use crate::scalar::Scalar;

/// A functional evaluated on the node samples of a path.
pub trait PathFunctional<S: Scalar>: Sync + Send {
    fn eval_path(&self, x: &[S]) -> Complex<S>;
}

impl<S: Scalar> PathFunctional<S> for ExpCombo<S> {
    fn eval_path(&self, x: &[S]) -> Complex<S> {
        self.terms().iter().fold(Complex::new(S::zero(), S::zero()), |acc, t| {
            let e: S = t.u.samples().iter().zip(x.windows(2)).map(|(&u, w)| u * (w[1] - w[0])).sum();
            acc + t.coeff * e.exp()
        })
    }
}

/// Adapts a closure `x ↦ F(x)` over node samples.
pub struct FnFunctional<F>(pub F);

impl<S: Scalar, F: Fn(&[S]) -> Complex<S> + Sync + Send> PathFunctional<S> for FnFunctional<F> {
    fn eval_path(&self, x: &[S]) -> Complex<S> {
        (self.0)(x)
    }
}

fn scale_of<S: Scalar>(lambda: S) -> Result<S> {
    if !(lambda > S::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("Monte Carlo transforms need real λ > 0, got {lambda}")));
    }
    Ok(lambda.sqrt().recip())
}

/// `out_j = base_j + c Σ_{(w, s)} Σ_{i<j} w_i dx_s[i]`.
fn accumulate<S: Scalar>(base: &[S], parts: &[(&[S], usize)], c: S, dx: &[Vec<S>], out: &mut Vec<S>) {
    out.clear();
    out.push(base[0]);
    let mut acc = S::zero();
    for i in 0..base.len() - 1 {
        for &(w, s) in parts {
            acc += w[i] * dx[s][i];
        }
        out.push(base[i + 1] + c * acc);
    }
}

fn check_grids<S: Scalar>(sampler: &PathSampler<S>, y: &WienerPath<S>, kernels: &[&Kernel<S>]) -> Result<()> {
    sampler.grid().ensure_same(y.grid(), "evaluation path")?;
    for k in kernels {
        sampler.grid().ensure_same(k.grid(), "kernel")?;
    }
    Ok(())
}

/// Runs `F(a) · G(b)` (or `F(a)` alone) with `a`, `b` assembled from the draws.
#[allow(clippy::too_many_arguments)]
fn run_pair<S, F, G>(
    sampler: &PathSampler<S>,
    n: usize,
    slots: usize,
    c: S,
    (fa, a_base, a_parts): (&F, &[S], &[(&[S], usize)]),
    b: Option<(&G, &[S], &[(&[S], usize)])>,
) -> Result<McEstimate<S>>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    let nodes = a_base.len();
    let slot_ids: Vec<u64> = (0..slots as u64).collect();
    let est = mc_expectations(
        sampler,
        n,
        &slot_ids,
        1,
        || (Vec::with_capacity(nodes), Vec::with_capacity(nodes)),
        |(pa, pb): &mut (Vec<S>, Vec<S>), dx, out| {
            accumulate(a_base, a_parts, c, dx, pa);
            let mut v = fa.eval_path(pa);
            if let Some((gb, b_base, b_parts)) = b {
                accumulate(b_base, b_parts, c, dx, pb);
                v = v * gb.eval_path(pb);
            }
            out[0] = v;
        },
    )?;
    Ok(est[0])
}

/// `T_{λ,k}(F)(y) = E_x[F(y + λ^{-1/2} Z_k(x))]`.
pub fn mc_fft<S, F>(
    f: &F,
    k: &Kernel<S>,
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<McEstimate<S>>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
{
    check_grids(sampler, y, &[k])?;
    let c = scale_of(lambda)?;
    run_pair::<S, F, F>(sampler, n, 1, c, (f, y.samples(), &[(k.samples(), 0)]), None)
}

/// `(F * G)_λ(y) = E_x[F(Z_{g₁}(y) + λ^{-1/2} Z_{h₁}(x)) · G(Z_{g₂}(y) + λ^{-1/2} Z_{h₂}(x))]`.
pub fn mc_cto<S, F, G>(
    f: &F,
    g: &G,
    spec: &CtoSpec<S>,
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<McEstimate<S>>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    check_grids(sampler, y, &[&spec.g1])?;
    let c = scale_of(lambda)?;
    let (y1, y2) = (gaussian_process_path(&spec.g1, y)?, gaussian_process_path(&spec.g2, y)?);
    run_pair(
        sampler,
        n,
        1,
        c,
        (f, y1.samples(), &[(spec.h1.samples(), 0)]),
        Some((g, y2.samples(), &[(spec.h2.samples(), 0)][..])),
    )
}

/// `T_{λ,k}((F * G)_λ)(y)` by one joint draw: `x₁` drives `h₁, h₂`, `x₂` drives the outer `k`.
#[allow(clippy::too_many_arguments)]
pub fn mc_thm52_lhs<S, F, G>(
    f: &F,
    g: &G,
    spec: &CtoSpec<S>,
    k: &Kernel<S>,
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<McEstimate<S>>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    check_grids(sampler, y, &[&spec.g1, k])?;
    let c = scale_of(lambda)?;
    let (y1, y2) = (gaussian_process_path(&spec.g1, y)?, gaussian_process_path(&spec.g2, y)?);
    let (g1k, g2k) = (spec.g1.product(k)?, spec.g2.product(k)?);
    run_pair(
        sampler,
        n,
        2,
        c,
        (f, y1.samples(), &[(spec.h1.samples(), 0), (g1k.samples(), 1)]),
        Some((g, y2.samples(), &[(spec.h2.samples(), 0), (g2k.samples(), 1)][..])),
    )
}

/// Product of two independent transforms, slots `0` and `1` of `sampler`.
#[allow(clippy::too_many_arguments)]
fn product_of_ffts<S, F, G>(
    f: &F,
    g: &G,
    (s_f, g_f): (&Kernel<S>, &Kernel<S>),
    (s_g, g_g): (&Kernel<S>, &Kernel<S>),
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<[McEstimate<S>; 3]>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    let base = sampler.slot_base();
    let ef = mc_fft(f, s_f, lambda, &gaussian_process_path(g_f, y)?, &sampler.with_slot_base(base), n)?;
    let eg = mc_fft(g, s_g, lambda, &gaussian_process_path(g_g, y)?, &sampler.with_slot_base(base + 1), n)?;
    Ok([ef.product(&eg), ef, eg])
}

/// `T_{λ,s(g₁k,h₁)}(F)(Z_{g₁}(y)) · T_{λ,s(g₂k,h₂)}(G)(Z_{g₂}(y))`; returns the
/// product (delta-method SE) and both factors.
#[allow(clippy::too_many_arguments)]
pub fn mc_thm52_rhs<S, F, G>(
    f: &F,
    g: &G,
    spec: &CtoSpec<S>,
    k: &Kernel<S>,
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<[McEstimate<S>; 3]>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    let s1 = combine_s(&spec.g1.product(k)?, &spec.h1)?;
    let s2 = combine_s(&spec.g2.product(k)?, &spec.h2)?;
    product_of_ffts(f, g, (&s1, &spec.g1), (&s2, &spec.g2), lambda, y, sampler, n)
}

/// `(T_{λ,k₁}(F) * T_{λ,k₂}(G))_λ^{(g₁,g₂;h₃,h₄)}(y)` by a triple draw:
/// `x` drives `h₃, h₄`, `x'` drives `k₁` and `x''` drives `k₂`.
#[allow(clippy::too_many_arguments)]
pub fn mc_thm54_lhs<S, F, G>(
    f: &F,
    g: &G,
    k1: &Kernel<S>,
    k2: &Kernel<S>,
    spec34: &CtoSpec<S>,
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<McEstimate<S>>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    check_grids(sampler, y, &[&spec34.g1, k1, k2])?;
    let c = scale_of(lambda)?;
    let (y1, y2) = (gaussian_process_path(&spec34.g1, y)?, gaussian_process_path(&spec34.g2, y)?);
    run_pair(
        sampler,
        n,
        3,
        c,
        (f, y1.samples(), &[(spec34.h1.samples(), 0), (k1.samples(), 1)]),
        Some((g, y2.samples(), &[(spec34.h2.samples(), 0), (k2.samples(), 2)][..])),
    )
}

/// `T_{λ,s(h₃,k₁)}(F)(Z_{g₁}(y)) · T_{λ,s(h₄,k₂)}(G)(Z_{g₂}(y))`.
#[allow(clippy::too_many_arguments)]
pub fn mc_thm54_rhs<S, F, G>(
    f: &F,
    g: &G,
    k1: &Kernel<S>,
    k2: &Kernel<S>,
    spec34: &CtoSpec<S>,
    lambda: S,
    y: &WienerPath<S>,
    sampler: &PathSampler<S>,
    n: usize,
) -> Result<[McEstimate<S>; 3]>
where
    S: Scalar,
    F: PathFunctional<S> + ?Sized,
    G: PathFunctional<S> + ?Sized,
{
    let s3 = combine_s(&spec34.h1, k1)?;
    let s4 = combine_s(&spec34.h2, k2)?;
    product_of_ffts(f, g, (&s3, &spec34.g1), (&s4, &spec34.g2), lambda, y, sampler, n)
}
