use num_complex::Complex;

use super::*;
use crate::kernel::{l2_norm_sq, Expr};

const N: usize = 100_000;

fn grid(m: usize) -> Grid<f64> {
    Grid::new(1.0, m).unwrap()
}

fn re(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

/// Sample mean and standard error of an `f64` sequence, computed directly.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn paths_start_at_origin_with_right_increment_law() {
    let g = grid(64);
    let paths = sample_paths(&PathSampler::new(g, 11), 2000);
    assert!(paths.iter().all(|p| p.samples()[0] == 0.0 && p.samples().len() == 65));
    let incs: Vec<f64> = paths.iter().flat_map(|p| p.increments().collect::<Vec<_>>()).collect();
    let (m, se) = mean_se(&incs);
    assert!(m.abs() < 3.0 * se);
    let sq: Vec<f64> = incs.iter().map(|d| d * d).collect();
    let (v, se) = mean_se(&sq);
    assert!((v - 1.0 / 64.0).abs() < 3.0 * se);
}

#[test]
fn terminal_value_moments() {
    let paths = sample_paths(&PathSampler::new(grid(128), 1), N);
    let xt: Vec<f64> = paths.iter().map(WienerPath::terminal).collect();
    let (m, _) = mean_se(&xt);
    assert!(m.abs() < 3.0 * (1.0 / N as f64).sqrt());

    // variance estimator and its standard error from the fourth moment
    let n = N as f64;
    let var = xt.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xt.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let se = ((m4 - var * var) / n).sqrt();
    assert!((var - 1.0).abs() < 3.0 * se, "var {var} se {se}");
}

#[test]
fn wiener_covariance() {
    let g = grid(128);
    let (i, j) = (g.nearest_index(0.25), g.nearest_index(0.75));
    let est = mc_expectation(&PathSampler::new(g, 2), N, &[1.0], |p| re(p[0][i] * p[0][j])).unwrap();
    assert!(est.z_score(re(0.25)) < 3.0, "{est:?}");
}

#[test]
fn pwz_trivial_kernels() {
    let g = grid(32);
    for x in sample_paths(&PathSampler::new(g, 3), 20) {
        assert_eq!(pwz_integral(&Kernel::zero(g), &x).unwrap(), 0.0);
        assert_eq!(pwz_integral(&Kernel::one(g), &x).unwrap(), x.terminal());
    }
    let other = WienerPath::zero(grid(16));
    assert!(pwz_integral(&Kernel::one(g), &other).is_err());
}

#[test]
fn pwz_of_sine_is_gaussian_with_norm_variance() {
    let g = grid(256);
    let v = Kernel::sin(2.0, g);
    let vals: Vec<f64> = sample_paths(&PathSampler::new(g, 4), N)
        .iter()
        .map(|x| pwz_integral(&v, x).unwrap())
        .collect();
    let (m, se) = mean_se(&vals);
    assert!(m.abs() < 3.0 * se);
    let sq: Vec<f64> = vals.iter().map(|x| (x - m).powi(2)).collect();
    let (var, se) = mean_se(&sq);
    assert!((var - l2_norm_sq(&v)).abs() < 3.0 * se, "{var} ± {se}");
}

#[test]
fn gaussian_process_path_trivial_kernels() {
    let g = grid(32);
    for x in sample_paths(&PathSampler::new(g, 5), 10) {
        assert_eq!(gaussian_process_path(&Kernel::one(g), &x).unwrap(), x);
        let z = gaussian_process_path(&Kernel::zero(g), &x).unwrap();
        assert!(z.samples().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn gaussian_process_covariance() {
    let g = grid(128);
    let h1 = Kernel::indicator(0.0, 0.5, g);
    let half = g.nearest_index(0.5);
    let h1w = h1.samples().to_vec();
    let est = mc_expectation(&PathSampler::new(g, 6), N, &[1.0], |p| {
        let x = p[0];
        let z1: f64 = (0..half).map(|i| h1w[i] * (x[i + 1] - x[i])).sum();
        re(z1 * x[128])
    })
    .unwrap();
    assert!(est.z_score(re(0.5)) < 3.0, "{est:?}");
}

#[test]
fn pwz_identity_per_path() {
    let g = grid(512);
    let pairs = [
        (Expr::sin(2.0), Expr::cos(3.0)),
        (Expr::Time, Expr::indicator(0.25, 0.75)),
        (Expr::haar(5), Expr::sin(1.0).times(Expr::Time)),
    ];
    for x in sample_paths(&PathSampler::new(g, 7), 50) {
        for (v, h) in &pairs {
            let (v, h) = (Kernel::from_expr(v.clone(), g), Kernel::from_expr(h.clone(), g));
            let lhs = pwz_integral(&v, &gaussian_process_path(&h, &x).unwrap()).unwrap();
            let rhs = pwz_integral(&v.product(&h).unwrap(), &x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}

#[test]
fn constant_functional_is_exact() {
    let est = mc_expectation(&PathSampler::new(grid(16), 8), 5000, &[1.0, 1.0], |_| Complex::new(2.0, -1.0))
        .unwrap();
    assert_eq!(est.mean, Complex::new(2.0, -1.0));
    assert_eq!(est.std_error, 0.0);
    assert_eq!(est.n_samples, 5000);
}

#[test]
fn exponential_integration_formula() {
    let g = grid(256);
    let v = Kernel::sin(2.0, g);
    let w = v.samples().to_vec();
    let est = mc_expectation(&PathSampler::new(g, 9), N, &[1.0], |p| {
        let x = p[0];
        re((0..256).map(|i| w[i] * (x[i + 1] - x[i])).sum::<f64>().exp())
    })
    .unwrap();
    assert!(est.z_score(re(0.25f64.exp())) < 3.0, "{est:?}");
}

#[test]
fn terminal_square() {
    let est = mc_expectation(&PathSampler::new(grid(64), 10), N, &[1.0], |p| re(p[0][64].powi(2))).unwrap();
    assert!(est.z_score(re(1.0)) < 3.0, "{est:?}");
}

#[test]
fn antithetic_sign_symmetry_is_bitwise() {
    let s = PathSampler::new(grid(64), 12).with_antithetic(true);
    let f = |x: &[f64]| re((x[64] + 0.3 * x[20]).exp() + x[40].powi(3));
    let plus = mc_expectation(&s, 4000, &[1.0], |p| f(p[0])).unwrap();
    let minus = mc_expectation(&s, 4000, &[-1.0], |p| f(p[0])).unwrap();
    assert_eq!(plus, minus);
}

#[test]
fn reproducible_across_thread_counts() {
    let s = PathSampler::new(grid(64), 13).with_batch(100);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            mc_expectations(&s, 1234, &[0, 1], 2, || (), |_, dx, out| {
                out[0] = re(pwz_sum(&[1.0; 64], &dx[0]).exp());
                out[1] = re(dx[1][3] * dx[0][5]);
            })
            .unwrap()
        })
    };
    assert_eq!(run(1), run(4));
    assert_eq!(run(1), run(3));
}

#[test]
fn slot_paths_match_estimator_draws() {
    let g = grid(16);
    let s = PathSampler::new(g, 14).with_batch(8);
    let paths = s.paths(3, 20);
    let direct: f64 = paths.iter().map(|p| p.terminal()).sum::<f64>() / 20.0;
    let est = mc_expectations(&s, 20, &[3], 1, || (), |_, dx, out| out[0] = re(dx[0].iter().sum())).unwrap();
    assert!((est[0].mean.re - direct).abs() < 1e-12);
    assert_eq!(paths[9].stream(), Some(PathSampler::<f64>::stream_id(3, 1)));
}

#[test]
fn non_finite_values_report_their_sample() {
    let s = PathSampler::new(grid(16), 15).with_batch(10);
    let err = mc_expectations(&s, 50, &[0], 1, || 0usize, |count, _, out| {
        *count += 1;
        out[0] = re(if *count == 3 { f64::NAN } else { 1.0 });
    })
    .unwrap_err();
    assert!(matches!(err, Error::NonFinite { seed: 15, .. }));
    assert!(mc_expectation(&s, 1, &[1.0], |_| re(0.0)).is_err());
}

#[test]
fn single_precision_sampling() {
    let g = Grid::new(1.0f32, 64).unwrap();
    let est = mc_expectation(&PathSampler::new(g, 16), 20_000, &[1.0], |p| {
        Complex::new(p[0][64] * p[0][64], 0.0)
    })
    .unwrap();
    assert!(est.z_score(Complex::new(1.0, 0.0)) < 3.0);
}
