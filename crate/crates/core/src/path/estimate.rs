use num_complex::Complex;
use serde_json::{json, Value};

use crate::scalar::Scalar;

/// Running mean and sum of squared deviations of complex samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Welford<S> {
    count: usize,
    mean: Complex<S>,
    m2: S,
}

impl<S: Scalar> Default for Welford<S> {
    fn default() -> Self {
        Self { count: 0, mean: Complex::new(S::zero(), S::zero()), m2: S::zero() }
    }
}

impl<S: Scalar> Welford<S> {
    #[inline]
    pub fn push(&mut self, v: Complex<S>) {
        self.count += 1;
        let d = v - self.mean;
        self.mean = self.mean + d / S::from_usize_lossy(self.count);
        self.m2 += (d.conj() * (v - self.mean)).re;
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb, nt) =
            (S::from_usize_lossy(self.count), S::from_usize_lossy(other.count), S::from_usize_lossy(n));
        let d = other.mean - self.mean;
        Self {
            count: n,
            mean: self.mean + d * (nb / nt),
            m2: self.m2 + other.m2 + d.norm_sqr() * na * nb / nt,
        }
    }

    /// Balanced binary-tree reduction in index order.
    pub fn tree_merge(parts: &[Self]) -> Self {
        match parts.len() {
            0 => Self::default(),
            1 => parts[0],
            n => {
                let (l, r) = parts.split_at(n / 2);
                Self::tree_merge(l).merge(&Self::tree_merge(r))
            }
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn estimate(&self) -> McEstimate<S> {
        let n = S::from_usize_lossy(self.count.max(1));
        let var = if self.count > 1 { self.m2 / (n - S::one()) } else { S::zero() };
        McEstimate { mean: self.mean, std_error: (var.max(S::zero()) / n).sqrt(), n_samples: self.count }
    }
}

/// Sample mean with its standard error `sd / √n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<S> {
    pub mean: Complex<S>,
    pub std_error: S,
    pub n_samples: usize,
}

impl<S: Scalar> McEstimate<S> {
    /// An exactly known value, `SE = 0`.
    pub fn exact(value: Complex<S>) -> Self {
        Self { mean: value, std_error: S::zero(), n_samples: 0 }
    }

    /// First-order delta-method estimate of the product of two independent means.
    pub fn product(&self, other: &Self) -> Self {
        let se = (self.mean.norm_sqr() * other.std_error.powi(2)
            + other.mean.norm_sqr() * self.std_error.powi(2))
        .sqrt();
        Self { mean: self.mean * other.mean, std_error: se, n_samples: self.n_samples.min(other.n_samples) }
    }

    /// `|mean − value|` in units of the standard error (infinite when `SE = 0` and they differ).
    pub fn z_score(&self, value: Complex<S>) -> S {
        let gap = (self.mean - value).norm();
        if gap == S::zero() {
            S::zero()
        } else {
            gap / self.std_error
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mean": [self.mean.re.to_f64_lossy(), self.mean.im.to_f64_lossy()],
            "se": self.std_error.to_f64_lossy(),
            "n": self.n_samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 13.0).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(c(x)));
        let parts: Vec<Welford<f64>> = xs
            .chunks(5)
            .map(|ch| {
                let mut w = Welford::default();
                ch.iter().for_each(|&x| w.push(c(x)));
                w
            })
            .collect();
        let merged = Welford::tree_merge(&parts);
        assert_eq!(merged.count(), 37);
        assert!((merged.mean - all.mean).norm() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9);

        let mean = xs.iter().sum::<f64>() / 37.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 36.0;
        assert!((all.estimate().std_error - (var / 37.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let mut w = Welford::default();
        for _ in 0..10 {
            w.push(Complex::new(2.5, -1.0));
        }
        let e = w.merge(&w).estimate();
        assert_eq!(e.mean, Complex::new(2.5, -1.0));
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn delta_method_product() {
        let a = McEstimate { mean: c(2.0), std_error: 0.1, n_samples: 10 };
        let b = McEstimate { mean: c(3.0), std_error: 0.2, n_samples: 10 };
        let p = a.product(&b);
        assert_eq!(p.mean, c(6.0));
        assert!((p.std_error - (4.0f64 * 0.04 + 9.0 * 0.01).sqrt()).abs() < 1e-15);
    }
}
