use num_complex::Complex;

use super::*;
use crate::kernel::{Expr, Kernel};
use crate::path::{gaussian_process_path, mc_expectation, sample_paths, PathSampler, WienerPath};

type C = Complex<f64>;

fn grid(m: usize) -> Grid<f64> {
    Grid::new(1.0, m).unwrap()
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

fn feynman(q: f64) -> TransformParam<f64> {
    TransformParam::feynman(q).unwrap()
}

#[test]
fn eval_basics() {
    let g = grid(64);
    let paths = sample_paths(&PathSampler::new(g, 1), 20);
    let one = Kernel::one(g);
    let (u1, u2) = (Kernel::sin(1.0, g), Kernel::from_expr(Expr::Time.times(Expr::cos(2.0)), g));
    let prod = ExpCombo::psi(u1.clone()).multiply(&ExpCombo::psi(u2.clone())).unwrap();
    let summed = ExpCombo::psi(u1.sum(&u2).unwrap());
    for x in &paths {
        assert_eq!(ExpCombo::zero(g).eval(x).unwrap(), c(0.0, 0.0));
        assert_eq!(ExpCombo::psi(one.clone()).eval(x).unwrap(), c(x.terminal().exp(), 0.0));
        let lhs = ExpCombo::psi(u1.clone()).eval(x).unwrap() * ExpCombo::psi(u2.clone()).eval(x).unwrap();
        assert!(close(lhs, summed.eval(x).unwrap(), 1e-12));
        assert!(close(lhs, prod.eval(x).unwrap(), 1e-12));
    }
}

#[test]
fn eval_overflow_names_the_term() {
    let g = grid(4);
    let x = WienerPath::from_samples(vec![0.0, 1.0, 2.0, 3.0, 4.0], g).unwrap();
    let f = ExpCombo::from_terms(
        vec![ExpTerm::new(c(1.0, 0.0), Kernel::one(g)), ExpTerm::new(c(1.0, 0.0), Kernel::constant(500.0, g))],
        g,
    )
    .unwrap();
    assert!(matches!(f.eval(&x), Err(Error::Overflow(1))));
}

#[test]
fn weighted_terms_fold_their_phase() {
    let g = grid(64);
    let t = ExpTerm::weighted(c(2.0, 0.0), Kernel::one(g), 2.0, &Kernel::one(g), &Kernel::sin(2.0, g)).unwrap();
    assert!(close(t.coeff, c(2.0, 0.0) * c(0.0, 0.125).exp(), 1e-15));
    // Ψ^{q,v,k}_{u1} Ψ^{q,v,k}_{u2} = α Ψ^{q,v,k}_{u1+u2} with α the extra phase
    let (v, k) = (Kernel::cos(1.0, g), Kernel::one(g));
    let a = ExpTerm::weighted(c(1.0, 0.0), Kernel::sin(1.0, g), 1.5, &v, &k).unwrap();
    let b = ExpTerm::weighted(c(1.0, 0.0), Kernel::sin(3.0, g), 1.5, &v, &k).unwrap();
    let ab = ExpCombo::single(a.coeff, a.u).multiply(&ExpCombo::single(b.coeff, b.u)).unwrap();
    let alpha = c(0.0, 0.25 / 1.5).exp();
    let target = ExpTerm::weighted(alpha, Kernel::sin(1.0, g).sum(&Kernel::sin(3.0, g)).unwrap(), 1.5, &v, &k).unwrap();
    assert!(close(ab.terms()[0].coeff, target.coeff, 1e-14));
}

#[test]
fn multiply_identities() {
    let g = grid(64);
    let (u1, u2, u3) = (Kernel::sin(1.0, g), Kernel::cos(2.0, g), Kernel::from_expr(Expr::Time, g));
    let f = ExpCombo::from_terms(
        vec![ExpTerm::new(c(1.0, 2.0), u1.clone()), ExpTerm::new(c(-0.5, 0.0), u2.clone())],
        g,
    )
    .unwrap();
    let unit = f.multiply(&ExpCombo::psi(Kernel::zero(g))).unwrap();
    assert_eq!(compare_termwise(&f, &unit).unwrap().max_coeff_rel_err, 0.0);

    let cancel = ExpCombo::psi(u1.clone()).multiply(&ExpCombo::psi(u1.negated())).unwrap();
    assert_eq!(cancel.len(), 1);
    assert!(cancel.terms()[0].u.is_zero());
    assert_eq!(cancel.terms()[0].coeff, c(1.0, 0.0));

    let pair = ExpCombo::psi(u1.clone()).add(&ExpCombo::psi(u2.clone())).unwrap();
    let out = pair.multiply(&ExpCombo::psi(u3.clone())).unwrap();
    let expected = ExpCombo::psi(u1.sum(&u3).unwrap()).add(&ExpCombo::psi(u2.sum(&u3).unwrap())).unwrap();
    assert!(compare_termwise(&out, &expected).unwrap().passes(0.0));
}

#[test]
fn merging_and_zero_coefficients() {
    let g = grid(32);
    let u = Kernel::sin(2.0, g);
    let f = ExpCombo::from_terms(
        vec![
            ExpTerm::new(c(1.0, 0.0), u.clone()),
            ExpTerm::new(c(2.0, 1.0), Kernel::from_expr(Expr::sin(2.0).scaled(1.0), g)),
            ExpTerm::new(c(0.0, 0.0), Kernel::one(g)),
        ],
        g,
    )
    .unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f.terms()[0].coeff, c(3.0, 1.0));
    let back = ExpCombo::<f64>::from_json(&f.to_json(), g).unwrap();
    assert!(compare_termwise(&f, &back).unwrap().passes(0.0));
}

#[test]
fn parameter_conventions() {
    assert!(TransformParam::<f64>::real(0.0).is_err());
    assert!(TransformParam::<f64>::analytic(c(-1.0, 2.0)).is_err());
    assert!(TransformParam::<f64>::feynman(0.0).is_err());
    assert_eq!(feynman(2.0).inv_two_lambda(), c(0.0, 0.25));
    let p = TransformParam::analytic(c(0.5, -3.0)).unwrap();
    assert!(p.sqrt_lambda().re > 0.0);
    assert!(close(p.sqrt_lambda() * p.sqrt_lambda(), c(0.5, -3.0), 1e-15));
    let back = TransformParam::<f64>::from_json(&p.to_json()).unwrap();
    assert_eq!(back, p);
    assert!(TransformParam::<f64>::from_json(&serde_json::json!({"q": 1.0, "lambda": 1.0})).is_err());
}

#[test]
fn analytic_feynman_examples() {
    let g = grid(64);
    let one = Kernel::one(g);
    let zero_u = ExpCombo::psi(Kernel::zero(g));
    for p in [feynman(1.0), feynman(-3.0), TransformParam::analytic(c(2.0, 1.0)).unwrap()] {
        assert_eq!(analytic_feynman_exp(&zero_u, &Kernel::sin(1.0, g), &p).unwrap(), c(1.0, 0.0));
    }
    let psi1 = ExpCombo::psi(one.clone());
    let v = analytic_feynman_exp(&psi1, &one, &feynman(1.0)).unwrap();
    assert!(close(v, c(0.0, 0.5).exp(), 1e-15));
    let lambda = TransformParam::real(2.0).unwrap();
    let v = analytic_feynman_exp(&psi1, &one, &lambda).unwrap();
    assert!(close(v, c(0.25f64.exp(), 0.0), 1e-15));
    assert!(matches!(analytic_feynman_exp(&psi1, &Kernel::zero(g), &lambda), Err(Error::ZeroKernel(_))));

    // E[Ψ_u(λ^{-1/2} Z_h)] by simulation
    let g = grid(256);
    let est = mc_fft(&ExpCombo::psi(Kernel::one(g)), &Kernel::one(g), 2.0, &WienerPath::zero(g), &PathSampler::new(g, 3), 100_000)
        .unwrap();
    assert!(est.z_score(c(0.25f64.exp(), 0.0)) < 3.0, "{est:?}");
}

#[test]
fn fft_examples() {
    let g = grid(64);
    let k = Kernel::sin(2.0, g);
    let unit = ExpCombo::one(g);
    let out = fft_exp(&unit, &k, &feynman(0.7)).unwrap();
    assert!(compare_termwise(&unit, &out).unwrap().passes(0.0));

    let f = ExpCombo::from_terms(
        vec![
            ExpTerm::new(c(1.0, -1.0), Kernel::cos(1.0, g)),
            ExpTerm::new(c(0.3, 0.0), Kernel::from_expr(Expr::Time, g)),
        ],
        g,
    )
    .unwrap();
    let p = TransformParam::analytic(c(1.5, 0.5)).unwrap();
    let plus = fft_exp(&f, &k, &p).unwrap();
    let minus = fft_exp(&f, &k.negated(), &p).unwrap();
    assert_eq!(compare_termwise(&plus, &minus).unwrap().max_coeff_rel_err, 0.0);

    let out = fft_exp(&ExpCombo::psi(Kernel::one(g)), &k, &feynman(2.0)).unwrap();
    assert!(close(out.terms()[0].coeff, c(0.0, 0.125).exp(), 1e-15));
    assert!(fft_exp(&f, &Kernel::zero(g), &p).is_err());
}

#[test]
fn cto_examples() {
    let g = grid(64);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let one = ExpCombo::one(g);
    let pm = CtoSpec::new(Kernel::constant(r, g), Kernel::constant(r, g), Kernel::constant(r, g), Kernel::constant(-r, g))
        .unwrap();
    let out = cto_exp(&one, &one, &pm, &feynman(1.0)).unwrap();
    assert!(compare_termwise(&out, &one).unwrap().passes(0.0));

    let psi1 = ExpCombo::psi(Kernel::one(g));
    for q in [1.0, -2.0, 0.3] {
        let out = cto_exp(&psi1, &psi1, &pm, &feynman(q)).unwrap();
        assert_eq!(out.len(), 1);
        let t = &out.terms()[0];
        assert!(t.u.samples().iter().all(|&x| (x - 2f64.sqrt()).abs() < 1e-15));
        assert!(close(t.coeff, c(1.0, 0.0), 1e-15));
    }

    let (a, b) = (Kernel::indicator(0.0, 0.5, g), Kernel::indicator(0.5, 1.0, g));
    let spec = CtoSpec::new(a.clone(), b.clone(), b, a).unwrap();
    let out = cto_exp(&psi1, &psi1, &spec, &feynman(1.0)).unwrap();
    let t = &out.terms()[0];
    assert!(t.u.samples().iter().all(|&x| x == 1.0));
    assert!(close(t.coeff, c(0.0, 0.5).exp(), 1e-15));

    assert!(CtoSpec::new(Kernel::one(g), Kernel::one(g), Kernel::zero(g), Kernel::one(g)).is_err());
}

/// Four-kernel system from the first worked example on `[0, T]`.
fn example_system(g: Grid<f64>) -> [Kernel<f64>; 9] {
    let (lo, hi) = (Expr::indicator(0.0, 0.5), Expr::indicator(0.5, 1.0));
    let s2 = Expr::sin(2.0);
    let k = |e: Expr<f64>| Kernel::from_expr(e, g);
    [
        k(Expr::cos(2.0).scaled(2.0).times(lo.clone())),
        k(Expr::constant(3.0).minus(s2.clone().times(s2.clone()).scaled(4.0)).times(hi.clone())),
        k(s2),
        k(Expr::sin(4.0)),
        k(Expr::sin(6.0)),
        k(hi.clone()),
        k(lo.clone()),
        k(Expr::cos(4.0).times(hi)),
        k(Expr::cos(6.0).times(lo)),
    ]
}

#[test]
fn fft_of_cto_factorizes_under_the_condition() {
    let g = grid(256);
    let [g1, g2, k, _, _, h1, h2, h3, h4] = example_system(g);
    let spec = CtoSpec::new(g1, g2, h1, h2).unwrap();
    let psi1 = ExpCombo::psi(Kernel::one(g));
    let (lhs, diags) = fft_of_cto_exp(&psi1, &psi1, &spec, &k, &feynman(1.0)).unwrap();
    assert!(diags[0].cross.abs() < 1e-10);
    let rhs = thm52_rhs(&psi1, &psi1, &spec, &k, &feynman(1.0)).unwrap();
    assert!(compare_termwise(&lhs, &rhs).unwrap().passes(1e-10));
    // the diagnostics rebuild the phase: gain = exp(i (su + sv + 2 cross) / 2q)
    let d = diags[0];
    let gain = c(0.0, 0.5 * (d.square_u + d.square_v + 2.0 * d.cross)).exp();
    assert!(close(lhs.terms()[0].coeff, gain, 1e-12));

    assert!(supports_overlap(&h3, &h4).unwrap() == 0.0);
}

#[test]
fn fft_of_cto_with_a_trivial_factor() {
    let g = grid(64);
    let spec = CtoSpec::new(Kernel::sin(1.0, g), Kernel::cos(1.0, g), Kernel::one(g), Kernel::constant(0.5, g)).unwrap();
    let k = Kernel::cos(3.0, g);
    let f = ExpCombo::psi(Kernel::from_expr(Expr::Time, g));
    let p = feynman(1.3);
    let (lhs, _) = fft_of_cto_exp(&f, &ExpCombo::psi(Kernel::zero(g)), &spec, &k, &p).unwrap();
    let s1 = crate::kernel::combine_s(&spec.g1.product(&k).unwrap(), &spec.h1).unwrap();
    let rhs = compose_gaussian(&fft_exp(&f, &s1, &p).unwrap(), &spec.g1).unwrap();
    assert!(compare_termwise(&lhs, &rhs).unwrap().passes(1e-12));
}

#[test]
fn thm52_rejects_unmet_condition() {
    let g = grid(64);
    let one = Kernel::one(g);
    let spec = CtoSpec::new(one.clone(), one.clone(), one.clone(), one.clone()).unwrap();
    let f = ExpCombo::psi(Kernel::sin(1.0, g));
    assert!(matches!(verify_thm52(&f, &f, &spec, &one, &feynman(1.0)), Err(Error::Hypothesis(_))));
}

#[test]
fn cto_of_ffts_with_disjoint_supports() {
    let g = grid(256);
    let [g1, g2, _, k1, k2, _, _, h3, h4] = example_system(g);
    let spec34 = CtoSpec::new(g1, g2, h3, h4).unwrap();
    let f = ExpCombo::from_terms(
        vec![ExpTerm::new(c(1.0, 0.5), Kernel::one(g)), ExpTerm::new(c(-0.2, 0.0), Kernel::sin(1.0, g))],
        g,
    )
    .unwrap();
    let gg = ExpCombo::psi(Kernel::from_expr(Expr::Time, g));
    let p = feynman(-0.8);
    let (_, diags) = cto_of_ffts_exp(&f, &gg, &k1, &k2, &spec34, &p).unwrap();
    assert!(diags.iter().all(|d| d.cross.abs() < 1e-12));
    let report = verify_thm54(&f, &gg, &k1, &k2, &spec34, &p).unwrap();
    assert!(report.pass(), "{:?}", report.termwise);

    let overlapping = CtoSpec::new(spec34.g1.clone(), spec34.g2.clone(), Kernel::one(g), Kernel::one(g)).unwrap();
    assert!(matches!(verify_thm54(&f, &gg, &k1, &k2, &overlapping, &p), Err(Error::Hypothesis(_))));
}

#[test]
fn mc_fft_examples() {
    let g = grid(256);
    let sampler = PathSampler::new(g, 21);
    let y = sample_paths(&PathSampler::new(g, 99), 1).remove(0);
    let f = ExpCombo::from_terms(
        vec![
            ExpTerm::new(c(1.0, 0.0), Kernel::sin(1.0, g).scaled(0.5)),
            ExpTerm::new(c(0.5, -0.5), Kernel::from_expr(Expr::Time, g).scaled(-0.3)),
        ],
        g,
    )
    .unwrap();
    let k = Kernel::cos(2.0, g);
    let lambda = 1.5;
    let est = mc_fft(&f, &k, lambda, &y, &sampler, 100_000).unwrap();
    let exact = fft_exp(&f, &k, &TransformParam::real(lambda).unwrap()).unwrap().eval(&y).unwrap();
    assert!(est.z_score(exact) < 3.0, "{est:?} vs {exact}");

    let constant = FnFunctional(|_: &[f64]| c(4.0, 0.0));
    let est = mc_fft(&constant, &k, lambda, &y, &sampler, 1000).unwrap();
    assert_eq!((est.mean, est.std_error), (c(4.0, 0.0), 0.0));

    let square = FnFunctional(|x: &[f64]| c(x[256] * x[256], 0.0));
    let est = mc_fft(&square, &Kernel::one(g), 1.0, &WienerPath::zero(g), &sampler, 100_000).unwrap();
    assert!(est.z_score(c(1.0, 0.0)) < 3.0);
    assert!(mc_fft(&square, &k, -1.0, &y, &sampler, 10).is_err());
}

#[test]
fn mc_cto_examples() {
    let g = grid(256);
    let sampler = PathSampler::new(g, 22);
    let y = sample_paths(&PathSampler::new(g, 98), 1).remove(0);
    let spec = CtoSpec::new(
        Kernel::cos(1.0, g),
        Kernel::one(g),
        Kernel::sin(1.0, g).scaled(0.8),
        Kernel::from_expr(Expr::Time, g),
    )
    .unwrap();
    let f = FnFunctional(|x: &[f64]| c((x[128] - x[64]).powi(2) + x[256], 0.0));
    let unit = FnFunctional(|_: &[f64]| c(1.0, 0.0));

    let via_cto = mc_cto(&f, &unit, &spec, 2.0, &y, &sampler, 5000).unwrap();
    let zg1 = gaussian_process_path(&spec.g1, &y).unwrap();
    let via_fft = mc_fft(&f, &spec.h1, 2.0, &zg1, &sampler, 5000).unwrap();
    assert!((via_cto.mean - via_fft.mean).norm() < 1e-12);

    let fe = ExpCombo::psi(Kernel::sin(2.0, g).scaled(0.4));
    let ge = ExpCombo::from_terms(
        vec![ExpTerm::new(c(1.0, 0.0), Kernel::one(g).scaled(0.3)), ExpTerm::new(c(0.0, 1.0), Kernel::zero(g))],
        g,
    )
    .unwrap();
    let est = mc_cto(&fe, &ge, &spec, 1.0, &y, &sampler, 100_000).unwrap();
    let exact = cto_exp(&fe, &ge, &spec, &TransformParam::real(1.0).unwrap()).unwrap().eval(&y).unwrap();
    assert!(est.z_score(exact) < 3.0, "{est:?} vs {exact}");
}

#[test]
fn classical_convolution_specialization() {
    let g = grid(128);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let spec = CtoSpec::new(Kernel::constant(r, g), Kernel::constant(r, g), Kernel::constant(r, g), Kernel::constant(-r, g))
        .unwrap();
    let y = sample_paths(&PathSampler::new(g, 97), 1).remove(0);
    let f = FnFunctional(|x: &[f64]| c(x[128].sin() + x[32], 0.0));
    let gg = FnFunctional(|x: &[f64]| c((0.5 * x[100]).exp(), 0.0));
    let sampler = PathSampler::new(g, 23);
    let est = mc_cto(&f, &gg, &spec, 1.0, &y, &sampler, 20_000).unwrap();
    // F((y + x)/√2) G((y − x)/√2) on the same draws
    let ys = y.samples().to_vec();
    let direct = mc_expectation(&sampler, 20_000, &[1.0], |p| {
        let a: Vec<f64> = ys.iter().zip(p[0]).map(|(&u, &v)| r * (u + v)).collect();
        let b: Vec<f64> = ys.iter().zip(p[0]).map(|(&u, &v)| r * (u - v)).collect();
        f.eval_path(&a) * gg.eval_path(&b)
    })
    .unwrap();
    assert!((est.mean - direct.mean).norm() < 1e-10 * direct.mean.norm());
}

#[test]
fn theorem_sides_agree_by_simulation() {
    let g = grid(256);
    let [g1, g2, k, k1, k2, h1, h2, h3, h4] = example_system(g);
    let y = sample_paths(&PathSampler::new(g, 96), 1).remove(0);
    let f = ExpCombo::psi(Kernel::cos(1.0, g).scaled(0.3));
    let gg = ExpCombo::psi(Kernel::from_expr(Expr::Time, g).scaled(0.4));
    let lambda = TransformParam::real(1.0).unwrap();
    let sampler = PathSampler::new(g, 24);

    let spec = CtoSpec::new(g1.clone(), g2.clone(), h1, h2).unwrap();
    let exact = thm52_rhs(&f, &gg, &spec, &k, &lambda).unwrap().eval(&y).unwrap();
    let lhs = mc_thm52_lhs(&f, &gg, &spec, &k, 1.0, &y, &sampler, 100_000).unwrap();
    let [rhs, _, _] = mc_thm52_rhs(&f, &gg, &spec, &k, 1.0, &y, &sampler.with_slot_base(10), 100_000).unwrap();
    assert!(lhs.z_score(exact) < 3.0, "{lhs:?} vs {exact}");
    assert!(rhs.z_score(exact) < 3.0, "{rhs:?} vs {exact}");

    let spec34 = CtoSpec::new(g1, g2, h3, h4).unwrap();
    let exact = thm54_rhs(&f, &gg, &k1, &k2, &spec34, &lambda).unwrap().eval(&y).unwrap();
    let lhs = mc_thm54_lhs(&f, &gg, &k1, &k2, &spec34, 1.0, &y, &sampler, 100_000).unwrap();
    let [rhs, _, _] = mc_thm54_rhs(&f, &gg, &k1, &k2, &spec34, 1.0, &y, &sampler.with_slot_base(10), 100_000).unwrap();
    assert!(lhs.z_score(exact) < 3.0, "{lhs:?} vs {exact}");
    assert!(rhs.z_score(exact) < 3.0, "{rhs:?} vs {exact}");
}
