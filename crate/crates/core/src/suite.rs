//! Built-in check bundles: `paper-identities`, `mc-battery`, `examples`.
//!
//! Reports are pure functions of the options; the caller adds any timestamp.

use num_complex::Complex;
use serde_json::{json, Value};

use crate::draws;
use crate::error::{Error, Result};
use crate::functional::{
    mc_thm52_lhs, mc_thm52_rhs, mc_thm54_lhs, mc_thm54_rhs, thm52_rhs, thm54_rhs, verify_thm52, verify_thm54,
    ExpCombo, TransformParam,
};
use crate::grid::Grid;
use crate::kernel::{combine_s, haar_subbasis, inner, Expr, HalfInterval, Kernel};
use crate::path::{sample_paths, McEstimate, PathSampler};
use crate::rotation::{run_battery, BatteryOptions};
use crate::scalar::Scalar;
use crate::system::{
    check_system, composed_identity_unchecked, example_6_1, example_6_2, generate_family_haar, generate_family_trig,
    haar_depth_sweep, verify_composed_identity, KernelSystem,
};

pub const SUITES: [&str; 3] = ["paper-identities", "mc-battery", "examples"];

/// Gram tolerance and size for the half-interval Haar bases.
const GRAM_TOL: f64 = 1e-10;
const GRAM_SIZE: usize = 64;
/// Residual bound at the deepest Haar level of the sweep.
const HAAR_DEPTHS: std::ops::RangeInclusive<u32> = 3..=8;
const HAAR_BOUND: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Monte Carlo sample count.
    pub n: usize,
    /// Grid size; each suite has its own default.
    pub steps: Option<usize>,
    /// Randomized closed-form draws per identity.
    pub draws: usize,
    /// Randomized Monte Carlo cross-checks per theorem.
    pub mc_draws: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 1, n: 100_000, steps: None, draws: 50, mc_draws: 5 }
    }
}

impl SuiteOptions {
    fn steps_or(&self, default: usize) -> usize {
        self.steps.unwrap_or(default)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteCheck {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub options: Value,
    pub checks: Vec<SuiteCheck>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "options": self.options,
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
            "passed": self.checks.iter().filter(|c| c.pass).count(),
            "failed": self.failures().count(),
            "pass": self.pass(),
        })
    }
}

fn check(checks: &mut Vec<SuiteCheck>, name: impl Into<String>, pass: bool, detail: Value) {
    checks.push(SuiteCheck { name: name.into(), pass, detail });
}

/// Independent draw stream per family and seed.
fn family_rng(seed: u64, family: u64) -> rand_chacha::ChaCha8Rng {
    draws::rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ family)
}

pub fn run_suite<S: Scalar>(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    match name {
        "paper-identities" => paper_identities::<S>(opts),
        "mc-battery" => mc_battery::<S>(opts),
        "examples" => examples::<S>(opts),
        other => Err(Error::InvalidParameter(format!("unknown suite `{other}`; expected one of {SUITES:?}"))),
    }
}

fn options_json(opts: &SuiteOptions, steps: usize) -> Value {
    json!({"seed": opts.seed, "n": opts.n, "M": steps, "T": 1.0, "draws": opts.draws, "mc_draws": opts.mc_draws})
}

fn z_json<S: Scalar>(est: &McEstimate<S>, exact: Complex<S>) -> Value {
    json!({
        "estimate": est.to_json(),
        "exact": [exact.re.to_f64_lossy(), exact.im.to_f64_lossy()],
        "z": est.z_score(exact).to_f64_lossy(),
    })
}

/// Largest kernel magnitude, floored at 1.
fn scale_of<S: Scalar>(ks: &[&Kernel<S>]) -> S {
    ks.iter().map(|k| k.max_abs()).fold(S::one(), |a, b| a.max(b))
}

/// Both transform-of-convolution factorizations and the composed identity in
/// closed form over random draws, plus Monte Carlo cross-checks of both
/// factorizations at `λ = 1`.
pub fn paper_identities<S: Scalar>(opts: &SuiteOptions) -> Result<SuiteReport> {
    let steps = opts.steps_or(1024);
    let grid = Grid::new(S::one(), steps)?;
    let mut checks = Vec::new();

    let mut rng = family_rng(opts.seed, 52);
    for i in 0..opts.draws {
        let (spec, k) = draws::random_thm52_case(&mut rng, grid)?;
        let (f, g) = (draws::random_combo(&mut rng, grid)?, draws::random_combo(&mut rng, grid)?);
        let p = draws::random_param(&mut rng)?;
        let r = verify_thm52(&f, &g, &spec, &k, &p)?;
        check(&mut checks, format!("thm52/{i}"), r.pass(), json!({"termwise": r.termwise.to_json(), "param": p.to_json()}));
    }

    let mut rng = family_rng(opts.seed, 54);
    for i in 0..opts.draws {
        let (spec34, k1, k2) = draws::random_thm54_case(&mut rng, grid)?;
        let (f, g) = (draws::random_combo(&mut rng, grid)?, draws::random_combo(&mut rng, grid)?);
        let p = draws::random_param(&mut rng)?;
        let r = verify_thm54(&f, &g, &k1, &k2, &spec34, &p)?;
        check(&mut checks, format!("thm54/{i}"), r.pass(), json!({"termwise": r.termwise.to_json(), "param": p.to_json()}));
    }

    let mut rng = family_rng(opts.seed, 61);
    for i in 0..opts.draws {
        let (g1, g2, k, a, b) = draws::random_trig_inputs(&mut rng, grid)?;
        let sys = generate_family_trig(&g1, &g2, &k, &a, &b)?;
        let (f, g) = (draws::random_combo(&mut rng, grid)?, draws::random_combo(&mut rng, grid)?);
        let p = draws::random_param(&mut rng)?;
        let r = verify_composed_identity(&sys, &f, &g, &p)?;
        check(&mut checks, format!("composed/{i}"), r.pass(), json!({"termwise": r.termwise.to_json()}));
    }

    let lambda = TransformParam::real(S::one())?;
    let mut rng = family_rng(opts.seed, 152);
    for i in 0..opts.mc_draws {
        let (spec, k) = draws::random_thm52_case(&mut rng, grid)?;
        let (s1, s2) = (combine_s(&spec.g1.product(&k)?, &spec.h1)?, combine_s(&spec.g2.product(&k)?, &spec.h2)?);
        let amp = S::lit(0.5) / scale_of(&[&s1, &s2]);
        let (f, g) = (draws::random_combo_within(&mut rng, grid, amp)?, draws::random_combo_within(&mut rng, grid, amp)?);
        let y = sample_paths(&PathSampler::new(grid, opts.seed.wrapping_add(1000 + i as u64)), 1).remove(0);
        let exact = thm52_rhs(&f, &g, &spec, &k, &lambda)?.eval(&y)?;
        let sampler = PathSampler::new(grid, opts.seed).with_slot_base(100 + 10 * i as u64);
        let lhs = mc_thm52_lhs(&f, &g, &spec, &k, S::one(), &y, &sampler, opts.n)?;
        let [rhs, _, _] = mc_thm52_rhs(&f, &g, &spec, &k, S::one(), &y, &sampler.with_slot_base(sampler.slot_base() + 4), opts.n)?;
        mc_pair(&mut checks, format!("thm52-mc/{i}"), &lhs, &rhs, exact);
    }

    let mut rng = family_rng(opts.seed, 154);
    for i in 0..opts.mc_draws {
        let (spec34, k1, k2) = draws::random_thm54_case(&mut rng, grid)?;
        let (s3, s4) = (combine_s(&spec34.h1, &k1)?, combine_s(&spec34.h2, &k2)?);
        let amp = S::lit(0.5) / scale_of(&[&s3, &s4]);
        let (f, g) = (draws::random_combo_within(&mut rng, grid, amp)?, draws::random_combo_within(&mut rng, grid, amp)?);
        let y = sample_paths(&PathSampler::new(grid, opts.seed.wrapping_add(2000 + i as u64)), 1).remove(0);
        let exact = thm54_rhs(&f, &g, &k1, &k2, &spec34, &lambda)?.eval(&y)?;
        let sampler = PathSampler::new(grid, opts.seed).with_slot_base(200 + 10 * i as u64);
        let lhs = mc_thm54_lhs(&f, &g, &k1, &k2, &spec34, S::one(), &y, &sampler, opts.n)?;
        let [rhs, _, _] =
            mc_thm54_rhs(&f, &g, &k1, &k2, &spec34, S::one(), &y, &sampler.with_slot_base(sampler.slot_base() + 4), opts.n)?;
        mc_pair(&mut checks, format!("thm54-mc/{i}"), &lhs, &rhs, exact);
    }

    Ok(SuiteReport { suite: "paper-identities".into(), options: options_json(opts, steps), checks })
}

/// Both simulated sides against the closed form, 3 SE each.
fn mc_pair<S: Scalar>(checks: &mut Vec<SuiteCheck>, name: String, lhs: &McEstimate<S>, rhs: &McEstimate<S>, exact: Complex<S>) {
    let three = S::lit(3.0);
    let pass = lhs.z_score(exact) <= three && rhs.z_score(exact) <= three;
    check(checks, name, pass, json!({"lhs": z_json(lhs, exact), "rhs": z_json(rhs, exact)}));
}

/// The rotation battery at seeds `seed, seed+1, seed+2`.
pub fn mc_battery<S: Scalar>(opts: &SuiteOptions) -> Result<SuiteReport> {
    let steps = opts.steps_or(1024);
    let bopts = BatteryOptions { n: opts.n, steps, seeds: [opts.seed, opts.seed + 1, opts.seed + 2] };
    let report = run_battery::<S>(&bopts)?;
    let mut checks = Vec::new();
    for c in &report.checks {
        let name = format!("{}/{}/{}/seed{}", c.identity, c.config, c.report.name, c.report.seed);
        check(&mut checks, name, c.report.pass, c.to_json());
    }
    for c in &report.controls {
        check(&mut checks, format!("negative-control/seed{}", c.seed), c.rejected, c.to_json());
    }
    let mut options = options_json(opts, steps);
    options["seeds"] = json!(bopts.seeds);
    Ok(SuiteReport { suite: "mc-battery".into(), options, checks })
}

fn composed_check<S: Scalar>(
    checks: &mut Vec<SuiteCheck>,
    name: String,
    sys: &KernelSystem<S>,
    f: &ExpCombo<S>,
    g: &ExpCombo<S>,
    p: &TransformParam<S>,
) -> Result<()> {
    match verify_composed_identity(sys, f, g, p) {
        Ok(r) => check(checks, name, r.pass(), json!({"termwise": r.termwise.to_json()})),
        Err(Error::Hypothesis(msg)) => check(checks, name, false, json!({"error": msg})),
        Err(e) => return Err(e),
    }
    Ok(())
}

/// Example systems, trigonometric family soundness, and the Haar construction.
pub fn examples<S: Scalar>(opts: &SuiteOptions) -> Result<SuiteReport> {
    let steps = opts.steps_or(4096);
    let grid = Grid::new(S::one(), steps)?;
    let mut checks = Vec::new();
    let tol = S::lit(crate::system::SYMBOLIC_TOL);
    let q = TransformParam::feynman(S::one())?;
    let psi1 = ExpCombo::psi(Kernel::one(grid));

    let ex61 = example_6_1(grid)?;
    let r = check_system(&ex61, tol);
    check(&mut checks, "example-6.1/system", r.pass(), r.to_json());
    composed_check(&mut checks, "example-6.1/composed".into(), &ex61, &psi1, &psi1, &q)?;

    let mut broken = ex61.clone();
    broken.h3 = broken.h3.sum(&Kernel::constant(S::lit(0.1), grid))?;
    let r = check_system(&broken, tol);
    let gap = composed_identity_unchecked(&broken, &psi1, &psi1, &q)?.discrepancy;
    let rejected = !r.pass_iii && r.residual_iii >= S::lit(0.01) && gap > S::lit(1e-3);
    check(
        &mut checks,
        "example-6.1/perturbed-rejected",
        rejected,
        json!({"system": r.to_json(), "composed_discrepancy": gap.to_f64_lossy()}),
    );

    let mut rng = family_rng(opts.seed, 62);
    for (l, m, n) in [(1, 2, 3), (2, 3, 5)] {
        let sys = example_6_2(l, m, n, grid)?;
        let r = check_system(&sys, tol);
        check(&mut checks, format!("example-6.2/({l},{m},{n})/system"), r.pass(), r.to_json());
        let (f, g) = (draws::random_combo(&mut rng, grid)?, draws::random_combo(&mut rng, grid)?);
        composed_check(&mut checks, format!("example-6.2/({l},{m},{n})/composed"), &sys, &f, &g, &q)?;
    }

    let mut rng = family_rng(opts.seed, 63);
    for i in 0..opts.draws {
        let (g1, g2, k, a, b) = draws::random_trig_inputs(&mut rng, grid)?;
        let sys = generate_family_trig(&g1, &g2, &k, &a, &b)?;
        let r = check_system(&sys, tol);
        check(&mut checks, format!("trig-family/{i}/system"), r.pass(), r.to_json());
        let (f, g) = (draws::random_combo(&mut rng, grid)?, draws::random_combo(&mut rng, grid)?);
        let p = draws::random_param(&mut rng)?;
        composed_check(&mut checks, format!("trig-family/{i}/composed"), &sys, &f, &g, &p)?;
    }

    for side in [HalfInterval::A, HalfInterval::B] {
        let basis = haar_subbasis(side, GRAM_SIZE, grid)?;
        let mut worst = S::zero();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let want = if i == j { S::one() } else { S::zero() };
                worst = worst.max((inner(a, b)? - want).abs());
            }
        }
        check(
            &mut checks,
            format!("haar/gram-{side:?}"),
            worst <= S::lit(GRAM_TOL),
            json!({"functions": GRAM_SIZE, "max_deviation": worst.to_f64_lossy()}),
        );
    }

    let (g1, g2, one) = (Kernel::sin(1.0, grid), Kernel::cos(1.0, grid), Kernel::one(grid));
    let fams = haar_depth_sweep(&g1, &g2, &one, HAAR_DEPTHS)?;
    let res: Vec<S> = fams.iter().map(|f| f.residual[0]).collect();
    let gaps: Vec<S> = fams.iter().map(|f| f.parseval_gap[0]).collect();
    let decreasing = |xs: &[S]| xs.windows(2).all(|w| w[1] < w[0]);
    let last = *res.last().expect("nonempty sweep");
    let f64s = |xs: &[S]| xs.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
    check(
        &mut checks,
        "haar/sine-residual",
        decreasing(&res) && decreasing(&gaps) && last <= S::lit(HAAR_BOUND),
        json!({
            "depths": HAAR_DEPTHS.collect::<Vec<_>>(),
            "residual": f64s(&res),
            "parseval_gap": f64s(&gaps),
            "bound": HAAR_BOUND,
        }),
    );

    // a finite Haar combination is reproduced exactly
    let e = Expr::constant(0.5).plus(Expr::haar(3).scaled(S::lit(0.25))).plus(Expr::haar(14).scaled(S::lit(-1.5)));
    let fam = generate_family_haar(&Kernel::from_expr(e, grid), &one, &one, 16)?;
    let exact = fam.residual.iter().all(|&r| r <= S::lit(1e-12)) && fam.check.pass();
    check(&mut checks, "haar/finite-combination", exact, fam.to_json());

    Ok(SuiteReport { suite: "examples".into(), options: options_json(opts, steps), checks })
}
