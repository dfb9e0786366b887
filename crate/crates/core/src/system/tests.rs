use super::*;
use crate::draws;
use crate::kernel::{haar_subbasis, HalfInterval};
use num_complex::Complex;
use proptest::prelude::*;

fn grid() -> Grid<f64> {
    Grid::new(1.0, 1024).unwrap()
}

fn halves(g: &Grid<f64>) -> (SupportSet<f64>, SupportSet<f64>) {
    half_sets(g).unwrap()
}

#[test]
fn example_6_1_passes() {
    let sys = example_6_1(grid()).unwrap();
    assert!(sys.is_symbolic());
    assert_eq!(sys.default_tolerance(), 1e-10);
    let r = check_system(&sys, 1e-10);
    assert!(r.pass(), "{}", r.to_json());
    for x in [r.residual_i, r.overlap, r.residual_iii, r.residual_iv] {
        assert!(x <= 1e-10);
    }
}

#[test]
fn example_6_1_on_another_horizon() {
    let r = check_system(&example_6_1(Grid::new(2.5, 512).unwrap()).unwrap(), 1e-10);
    assert!(r.pass(), "{}", r.to_json());
}

#[test]
fn perturbed_h3_fails_condition_iii() {
    let mut sys = example_6_1(grid()).unwrap();
    sys.h3 = sys.h3.sum(&Kernel::constant(0.1, *sys.grid())).unwrap();
    let r = check_system(&sys, 1e-10);
    assert!(!r.pass_iii);
    assert!(r.residual_iii >= 0.01);
    assert!(!r.pass());
}

#[test]
fn all_ones_fails_condition_i() {
    let one = Kernel::one(grid());
    let sys = KernelSystem::from_array(std::array::from_fn(|_| one.clone())).unwrap();
    let r = check_system(&sys, 1e-10);
    assert!(!r.pass_i);
    // ‖2‖₂ on [0, 1]
    assert!((r.residual_i - 2.0).abs() < 1e-12);
}

#[test]
fn example_6_2_instances_pass() {
    for (l, m, n) in [(1, 2, 3), (2, 3, 5)] {
        let sys = example_6_2(l, m, n, grid()).unwrap();
        let r = check_system(&sys, 1e-10);
        assert!(r.pass(), "({l},{m},{n}) {}", r.to_json());
    }
    assert!(example_6_2::<f64>(3, 2, 5, grid()).is_err());
}

#[test]
fn literal_layout_of_example_6_2_breaks_condition_ii() {
    // h₄ on A alongside h₃ (and k₂ on B) makes supp h₃ ∩ supp h₄ = A
    let mut sys = example_6_2(1, 2, 3, grid()).unwrap();
    std::mem::swap(&mut sys.h4, &mut sys.k2);
    let r = check_system(&sys, 1e-10);
    assert!(r.pass_i && r.pass_iii && r.pass_iv);
    assert!(!r.pass_ii);
    assert!((r.overlap - 0.5).abs() < 2.0 * grid().dt());
}

#[test]
fn trig_family_on_constants() {
    let g = grid();
    let one = Kernel::one(g);
    let (a, b) = halves(&g);
    let sys = generate_family_trig(&one, &one, &one, &a, &b).unwrap();
    let r2 = std::f64::consts::SQRT_2;
    assert!(sys.h1.samples().iter().all(|&x| x == 1.0));
    assert!(sys.h2.samples().iter().all(|&x| x == -1.0));
    for (i, t) in g.times().enumerate() {
        let (ia, ib) = (if t < 0.5 { r2 } else { 0.0 }, if t < 0.5 { 0.0 } else { r2 });
        assert!((sys.h3.samples()[i] - ia).abs() < 1e-15);
        assert!((sys.k1.samples()[i] - ib).abs() < 1e-15);
    }
    assert!(check_system(&sys, 1e-10).pass());
}

#[test]
fn degenerate_partitions_rejected() {
    let g = grid();
    let one = Kernel::one(g);
    let full = SupportSet::interval(0.0, 1.0).unwrap();
    let empty = SupportSet::empty();
    assert!(matches!(generate_family_trig(&one, &one, &one, &empty, &full), Err(Error::InvalidParameter(_))));
    let (a, _) = halves(&g);
    let wide = SupportSet::interval(0.25, 1.0).unwrap();
    assert!(generate_family_trig(&one, &one, &one, &a, &wide).is_err());
    let short = SupportSet::interval(0.5, 0.75).unwrap();
    assert!(generate_family_trig(&one, &one, &one, &a, &short).is_err());
    // g₁k vanishing on B leaves k₁ ≡ 0
    let (_, b) = halves(&g);
    let left = Kernel::indicator(0.0, 0.5, g);
    assert!(matches!(generate_family_trig(&left, &one, &one, &a, &b), Err(Error::ZeroKernel(_))));
}

#[test]
fn system_json_round_trip() {
    let sys = example_6_1(grid()).unwrap();
    let back = KernelSystem::<f64>::from_json(&sys.to_json()).unwrap();
    for ((n, a), (_, b)) in sys.kernels().iter().zip(back.kernels().iter()) {
        assert_eq!(a.samples(), b.samples(), "{n}");
    }
    let mut bad = sys.to_json();
    bad["h5"] = json!(1.0);
    assert!(matches!(KernelSystem::<f64>::from_json(&bad), Err(Error::Literal(_))));
    let mut missing = sys.to_json();
    missing.as_object_mut().unwrap().remove("k2");
    assert!(KernelSystem::<f64>::from_json(&missing).is_err());
}

#[test]
fn grid_only_systems_use_loose_tolerance() {
    let sys = example_6_1(grid()).unwrap();
    let mut ks: Vec<Kernel<f64>> = sys.kernels().iter().map(|(_, k)| (*k).clone()).collect();
    ks[0] = Kernel::from_samples(ks[0].samples().to_vec(), grid()).unwrap();
    let grid_sys = KernelSystem::from_array(ks.try_into().unwrap()).unwrap();
    assert!(!grid_sys.is_symbolic());
    assert_eq!(grid_sys.default_tolerance(), 1e-6);
    assert!(check_system(&grid_sys, grid_sys.default_tolerance()).pass());
}

#[test]
fn composed_identity_on_example_6_1() {
    let sys = example_6_1(grid()).unwrap();
    let psi = ExpCombo::psi(Kernel::one(grid()));
    let q = TransformParam::feynman(1.0).unwrap();
    let r = verify_composed_identity(&sys, &psi, &psi, &q).unwrap();
    assert!(r.pass());
    assert!(r.discrepancy <= 1e-10);
    let one = ExpCombo::one(grid());
    let r = verify_composed_identity(&sys, &one, &one, &q).unwrap();
    assert_eq!(r.lhs.len(), 1);
    assert!((r.lhs.terms()[0].coeff - Complex::new(1.0, 0.0)).norm() < 1e-15);
    assert!(r.lhs.terms()[0].u.is_zero());
    assert!(r.pass());
}

#[test]
fn composed_identity_negative_control() {
    let mut sys = example_6_1(grid()).unwrap();
    sys.h3 = sys.h3.sum(&Kernel::constant(0.1, grid())).unwrap();
    let psi = ExpCombo::psi(Kernel::one(grid()));
    let q = TransformParam::feynman(1.0).unwrap();
    assert!(matches!(verify_composed_identity(&sys, &psi, &psi, &q), Err(Error::Hypothesis(_))));
    let r = composed_identity_unchecked(&sys, &psi, &psi, &q).unwrap();
    assert!(r.discrepancy > 1e-3, "{}", r.discrepancy);
    assert!(!r.pass());
}

/// `‖f − P_p f‖²` for `f = √2 sin(πt)` on `[0, 1]`, `P_p` the projection onto
/// functions constant on the `2^{p+1}` dyadic cells.
fn sine_residual_sq(p: u32) -> f64 {
    let pi = std::f64::consts::PI;
    let cells = 1usize << (p + 1);
    let h = 1.0 / cells as f64;
    (0..cells)
        .map(|c| {
            let (a, b) = (c as f64 * h, (c + 1) as f64 * h);
            let int_f = 2f64.sqrt() * ((pi * a).cos() - (pi * b).cos()) / pi;
            let int_f2 = 2.0 * ((b - a) / 2.0 - ((2.0 * pi * b).sin() - (2.0 * pi * a).sin()) / (4.0 * pi));
            int_f2 - int_f * int_f / h
        })
        .sum()
}

#[test]
fn haar_residual_sequence_for_sine() {
    let g = Grid::new(1.0, 4096).unwrap();
    let (g1, k) = (Kernel::sin(1.0, g), Kernel::one(g));
    let fams = haar_depth_sweep(&g1, &g1, &k, 3..=8).unwrap();
    let res: Vec<f64> = fams.iter().map(|f| f.residual[0]).collect();
    for w in res.windows(2) {
        assert!(w[1] < w[0], "{res:?}");
    }
    for (p, f) in (3..=8).zip(&fams) {
        let oracle = sine_residual_sq(p).sqrt();
        assert!((f.residual[0] - oracle).abs() <= 1e-9 * oracle.max(1e-3), "p={p}: {} vs {oracle}", f.residual[0]);
        assert!((f.parseval_gap[0] - oracle * oracle).abs() < 1e-12);
    }
    assert!(res[5] <= 1e-2);
    let gaps: Vec<f64> = fams.iter().map(|f| f.parseval_gap[0]).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    // truncation does not satisfy (iii) exactly, and says so
    assert!(!fams[5].check.pass_iii);
    assert!(fams[5].check.pass_i && fams[5].check.pass_ii);
}

#[test]
fn haar_family_recovers_finite_haar_combinations() {
    let g = Grid::new(1.0, 256).unwrap();
    let e = Expr::constant(0.5).plus(Expr::haar(3).scaled(0.25)).plus(Expr::haar(14).scaled(-1.5));
    let g1 = Kernel::from_expr(e, g);
    let g2 = Kernel::from_expr(Expr::haar(6).plus(Expr::constant(2.0)), g);
    let fam = generate_family_haar(&g1, &g2, &Kernel::one(g), 16).unwrap();
    for j in 0..2 {
        assert!(fam.residual[j] <= 1e-12, "{:?}", fam.residual);
    }
    assert!(fam.check.pass(), "{}", fam.check.to_json());
}

#[test]
fn haar_family_needs_fine_grid() {
    let g = Grid::new(1.0, 64).unwrap();
    let one = Kernel::one(g);
    assert!(matches!(generate_family_haar(&one, &one, &one, 64), Err(Error::GridTooCoarse { .. })));
    assert!(generate_family_haar(&one, &one, &one, 0).is_err());
}

#[test]
fn half_interval_bases_are_orthonormal() {
    let g = Grid::new(1.0, 256).unwrap();
    for side in [HalfInterval::A, HalfInterval::B] {
        let basis = haar_subbasis(side, 64, g).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let want: f64 = if i == j { 1.0 } else { 0.0 };
                assert!((crate::kernel::inner(a, b).unwrap() - want).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn haar_family_report_shapes() {
    let g = Grid::new(1.0, 256).unwrap();
    let fam = generate_family_haar(&Kernel::sin(1.0, g), &Kernel::cos(1.0, g), &Kernel::one(g), 8).unwrap();
    let v = fam.to_json();
    assert_eq!(v["alpha"][0].as_array().unwrap().len(), 8);
    assert_eq!(fam.csv_row().len(), HaarFamily::<f64>::CSV_HEADER.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trig_family_is_sound(seed in any::<u64>()) {
        let g = Grid::new(1.0, 256).unwrap();
        let mut rng = draws::rng(seed);
        let (g1, g2, k, a, b) = draws::random_trig_inputs(&mut rng, g).unwrap();
        let sys = generate_family_trig(&g1, &g2, &k, &a, &b).unwrap();
        let r = check_system(&sys, 1e-10);
        prop_assert!(r.pass(), "{}", r.to_json());
    }

    #[test]
    fn composed_identity_on_trig_family(seed in any::<u64>()) {
        let g = Grid::new(1.0, 128).unwrap();
        let mut rng = draws::rng(seed);
        let (g1, g2, k, a, b) = draws::random_trig_inputs(&mut rng, g).unwrap();
        let sys = generate_family_trig(&g1, &g2, &k, &a, &b).unwrap();
        let (f, gg) = (draws::random_combo(&mut rng, g).unwrap(), draws::random_combo(&mut rng, g).unwrap());
        let p = draws::random_param(&mut rng).unwrap();
        let r = composed_identity_unchecked(&sys, &f, &gg, &p).unwrap();
        prop_assert!(r.pass(), "{}", r.termwise.to_json());
    }
}
