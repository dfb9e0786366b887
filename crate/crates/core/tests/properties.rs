//! Invariants over randomized inputs, through the public API only.

use proptest::prelude::*;

use wiener_fft::functional::{verify_thm52, verify_thm54};
use wiener_fft::path::{gaussian_process_path, pwz_integral, sample_paths};
use wiener_fft::system::example_6_1;
use wiener_fft::{check_system, combine_s, draws, l2_norm_sq, Grid, Grid64, PathSampler64};

fn grid() -> Grid64 {
    Grid64::new(1.0, 256).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pwz_identity_holds_per_path(seed in any::<u64>()) {
        let g = grid();
        let mut rng = draws::rng(seed);
        let (v, h) = (draws::random_kernel(&mut rng, g), draws::random_kernel(&mut rng, g));
        for x in sample_paths(&PathSampler64::new(g, seed), 5) {
            let lhs = pwz_integral(&v, &gaussian_process_path(&h, &x).unwrap()).unwrap();
            let rhs = pwz_integral(&v.product(&h).unwrap(), &x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn multiply_is_pointwise_product(seed in any::<u64>()) {
        let g = grid();
        let mut rng = draws::rng(seed);
        let (f, h) = (draws::random_combo(&mut rng, g).unwrap(), draws::random_combo(&mut rng, g).unwrap());
        let fh = f.multiply(&h).unwrap();
        for x in sample_paths(&PathSampler64::new(g, seed), 5) {
            let (a, b) = (fh.eval(&x).unwrap(), f.eval(&x).unwrap() * h.eval(&x).unwrap());
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn combined_kernel_adds_variances(seed in any::<u64>()) {
        let g = grid();
        let mut rng = draws::rng(seed);
        let (a, b) = (draws::random_kernel(&mut rng, g), draws::random_kernel(&mut rng, g));
        let lhs = l2_norm_sq(&combine_s(&a, &b).unwrap());
        let rhs = l2_norm_sq(&a) + l2_norm_sq(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn theorem_52_termwise(seed in any::<u64>()) {
        let g = grid();
        let mut rng = draws::rng(seed);
        let (spec, k) = draws::random_thm52_case(&mut rng, g).unwrap();
        let (f, h) = (draws::random_combo(&mut rng, g).unwrap(), draws::random_combo(&mut rng, g).unwrap());
        let p = draws::random_param(&mut rng).unwrap();
        let r = verify_thm52(&f, &h, &spec, &k, &p).unwrap();
        prop_assert!(r.pass(), "{}", r.termwise.to_json());
    }

    #[test]
    fn theorem_54_termwise(seed in any::<u64>()) {
        let g = grid();
        let mut rng = draws::rng(seed);
        let (spec34, k1, k2) = draws::random_thm54_case(&mut rng, g).unwrap();
        let (f, h) = (draws::random_combo(&mut rng, g).unwrap(), draws::random_combo(&mut rng, g).unwrap());
        let p = draws::random_param(&mut rng).unwrap();
        let r = verify_thm54(&f, &h, &k1, &k2, &spec34, &p).unwrap();
        prop_assert!(r.pass(), "{}", r.termwise.to_json());
    }
}

#[test]
fn example_6_1_in_single_precision() {
    let g = Grid::<f32>::new(1.0, 256).unwrap();
    let r = check_system(&example_6_1(g).unwrap(), 1e-4);
    assert!(r.pass(), "{}", r.to_json());
}

#[test]
fn sampling_is_seed_deterministic() {
    let g = grid();
    let a = sample_paths(&PathSampler64::new(g, 3), 4);
    let b = sample_paths(&PathSampler64::new(g, 3), 4);
    let c = sample_paths(&PathSampler64::new(g, 4), 4);
    assert!(a.iter().zip(&b).all(|(x, y)| x.samples() == y.samples()));
    assert!(a.iter().zip(&c).all(|(x, y)| x.samples() != y.samples()));
}
