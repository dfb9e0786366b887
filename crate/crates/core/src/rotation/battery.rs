//! The fixed rotation battery: five test functionals, four kernel
//! configurations, every identity of the rotation family, and a dependent
//! negative control.
//!
//! Battery version 1. Changing a functional, a kernel or the slot layout
//! changes every number downstream, so bump the version with it.

use num_complex::Complex;
use serde_json::{json, Value};

use super::{
    empirical_cross_covariance, require_disjoint, require_independent, run_identity, CoordFunctional,
    CoordFunctional2, RotationCase, RotationReport, Side,
};
use crate::error::Result;
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::path::{McEstimate, PathSampler};
use crate::scalar::Scalar;

pub const BATTERY_VERSION: u32 = 1;

/// Rejection threshold of the negative control, in SE.
pub const CONTROL_Z: f64 = 5.0;

fn re<S: Scalar>(v: S) -> Complex<S> {
    Complex::new(v, S::zero())
}

/// `u = 0.8 cos(πt/T)` and `v = 0.5 + 0.5 sin(2πt/T)`.
fn weights<S: Scalar>(grid: Grid<S>) -> (Kernel<S>, Kernel<S>) {
    let u = Kernel::cos(1.0, grid).scaled(S::lit(0.8));
    let v = Kernel::constant(S::lit(0.5), grid).sum(&Kernel::sin(2.0, grid).scaled(S::lit(0.5))).expect("same grid");
    (u, v)
}

fn single<S: Scalar>(
    name: &str,
    coords: Vec<Kernel<S>>,
    phi: impl Fn(&[S]) -> Complex<S> + Send + Sync + 'static,
) -> CoordFunctional<S> {
    CoordFunctional::new(name, coords, phi)
}

/// Point evaluation `a(t) = ⟨χ_[0,t), a⟩`.
fn at<S: Scalar>(t: S, grid: Grid<S>) -> Kernel<S> {
    Kernel::indicator(S::zero(), t, grid)
}

/// Two-argument functionals, polynomial of degree ≤ 2 or exponential in PWZ coordinates.
pub fn battery_two_arg<S: Scalar>(grid: Grid<S>) -> Vec<CoordFunctional2<S>> {
    let (u, v) = weights(grid);
    let (half, end) = (at(grid.horizon() * S::lit(0.5), grid), at(grid.horizon(), grid));
    vec![
        CoordFunctional2::new("exp(<u,a>+<v,b>)", vec![u.clone()], vec![v.clone()], |a, b| re((a[0] + b[0]).exp())),
        CoordFunctional2::new("<u,a>^2+<v,b>^2", vec![u.clone()], vec![v.clone()], |a, b| re(a[0] * a[0] + b[0] * b[0])),
        CoordFunctional2::new("<u,a><v,b>", vec![u.clone()], vec![v], |a, b| re(a[0] * b[0])),
        CoordFunctional2::new("a(T/2)^2+a(T)b(T/2)", vec![half.clone(), end.clone()], vec![half], |a, b| {
            re(a[0] * a[0] + a[1] * b[0])
        }),
        CoordFunctional2::new("(1+<u,a>+b(T))^2", vec![u], vec![end], |a, b| {
            let s = S::one() + a[0] + b[0];
            re(s * s)
        }),
    ]
}

/// `(F, G)` pairs for the product splits.
pub fn battery_pairs<S: Scalar>(grid: Grid<S>) -> Vec<(CoordFunctional<S>, CoordFunctional<S>)> {
    let (u, v) = weights(grid);
    let (half, end) = (at(grid.horizon() * S::lit(0.5), grid), at(grid.horizon(), grid));
    vec![
        (single("exp<u,a>", vec![u.clone()], |c: &[S]| re(c[0].exp())), single("exp<v,b>", vec![v.clone()], |c: &[S]| re(c[0].exp()))),
        (single("<u,a>^2", vec![u.clone()], |c: &[S]| re(c[0] * c[0])), single("<v,b>^2", vec![v.clone()], |c: &[S]| re(c[0] * c[0]))),
        (single("<u,a>", vec![u], |c: &[S]| re(c[0])), single("<v,b>", vec![v], |c: &[S]| re(c[0]))),
        (
            single("a(T)", vec![end.clone()], |c: &[S]| re(c[0])),
            single("1+b(T)^2", vec![end.clone()], |c: &[S]| re(S::one() + c[0] * c[0])),
        ),
        (
            single("(1+a(T))^2", vec![end], |c: &[S]| re((S::one() + c[0]) * (S::one() + c[0]))),
            single("b(T/2)^2", vec![half], |c: &[S]| re(c[0] * c[0])),
        ),
    ]
}

/// One-argument functionals for the single-path rotation.
pub fn battery_one_arg<S: Scalar>(grid: Grid<S>) -> Vec<CoordFunctional<S>> {
    let (u, v) = weights(grid);
    let (half, end) = (at(grid.horizon() * S::lit(0.5), grid), at(grid.horizon(), grid));
    vec![
        single("exp<u,a>", vec![u.clone()], |c: &[S]| re(c[0].exp())),
        single("<u,a>^2", vec![u.clone()], |c: &[S]| re(c[0] * c[0])),
        single("a(T/2)^2+a(T)", vec![half, end.clone()], |c: &[S]| re(c[0] * c[0] + c[1])),
        single("(1+<u,a>)^2", vec![u], |c: &[S]| re((S::one() + c[0]) * (S::one() + c[0]))),
        single("a(T)<v,a>", vec![end, v], |c: &[S]| re(c[0] * c[1])),
    ]
}

/// A named kernel configuration: a quadruple satisfying `h₁h₃ + h₂h₄ = 0` and
/// one with disjoint `h₁`, `h₃` supports.
#[derive(Debug, Clone)]
pub struct BatteryConfig<S: Scalar> {
    pub name: &'static str,
    pub pair: RotationCase<S>,
    pub triple: RotationCase<S>,
}

/// classical `±1/√2`, cos/sin rotation, disjoint indicators, trigonometric.
pub fn battery_configs<S: Scalar>(grid: Grid<S>) -> Result<Vec<BatteryConfig<S>>> {
    let t = grid.horizon();
    let half = t * S::lit(0.5);
    let (ca, cb) = (Kernel::indicator(S::zero(), half, grid), Kernel::indicator(half, t, grid));
    let r = S::lit(std::f64::consts::FRAC_1_SQRT_2);
    let rk = Kernel::constant(r, grid);
    let (c2, s2) = (Kernel::cos(2.0, grid), Kernel::sin(2.0, grid));
    let (s1, c3) = (Kernel::sin(1.0, grid), Kernel::cos(3.0, grid));
    Ok(vec![
        BatteryConfig {
            name: "classical",
            pair: RotationCase::new(rk.clone(), rk.clone(), rk.negated(), rk.clone())?,
            triple: RotationCase::new(ca.scaled(r), rk.clone(), cb.scaled(r), rk.negated())?,
        },
        BatteryConfig {
            name: "cos-sin",
            pair: RotationCase::bearman(c2.clone(), s2.clone())?,
            triple: RotationCase::new(c2.product(&ca)?, s2.negated(), s2.product(&cb)?, c2)?,
        },
        BatteryConfig {
            name: "indicators",
            pair: RotationCase::new(ca.clone(), cb.clone(), cb.clone(), ca.negated())?,
            triple: RotationCase::new(ca.clone(), cb.clone(), cb.clone(), ca.negated())?,
        },
        BatteryConfig {
            name: "trig",
            pair: RotationCase::new(s1.clone(), c3.clone(), c3, s1.negated())?,
            triple: RotationCase::new(
                Kernel::cos(6.0, grid).product(&ca)?,
                s2,
                Kernel::cos(4.0, grid).product(&cb)?,
                Kernel::sin(4.0, grid),
            )?,
        },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryOptions {
    pub n: usize,
    pub steps: usize,
    pub seeds: [u64; 3],
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self { n: 100_000, steps: 1024, seeds: [1, 2, 3] }
    }
}

/// One identity check of the battery.
#[derive(Debug, Clone)]
pub struct BatteryCheck<S: Scalar> {
    pub identity: &'static str,
    pub config: &'static str,
    pub report: RotationReport<S>,
}

impl<S: Scalar> BatteryCheck<S> {
    pub fn to_json(&self) -> Value {
        let mut v = self.report.to_json();
        v["identity"] = json!(self.identity);
        v["config"] = json!(self.config);
        v
    }
}

/// Dependent quadruple `h₁ = h₂ = h₃ = h₄ ≡ 1`: the cross covariance at `(T, T)`
/// is 2, and the test of zero must reject.
#[derive(Debug, Clone, Copy)]
pub struct NegativeControl<S> {
    pub estimate: McEstimate<S>,
    pub z: S,
    pub rejected: bool,
    pub seed: u64,
}

impl<S: Scalar> NegativeControl<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "estimate": self.estimate.to_json(),
            "z": self.z.to_f64_lossy(),
            "rejected": self.rejected,
            "seed": self.seed,
        })
    }
}

const CONTROL_SLOTS: u64 = 1 << 20;

pub fn negative_control<S: Scalar>(grid: Grid<S>, seed: u64, n: usize) -> Result<NegativeControl<S>> {
    let one = Kernel::one(grid);
    let case = RotationCase::new(one.clone(), one.clone(), one.clone(), one)?;
    let sampler = PathSampler::new(grid, seed).with_slot_base(CONTROL_SLOTS);
    let t = grid.horizon();
    let estimate = empirical_cross_covariance(&case, &[(t, t)], &sampler, n)?[0];
    let z = estimate.z_score(Complex::new(S::zero(), S::zero()));
    Ok(NegativeControl { estimate, z, rejected: z > S::lit(CONTROL_Z), seed })
}

#[derive(Debug, Clone)]
pub struct BatteryReport<S: Scalar> {
    pub options: BatteryOptions,
    pub checks: Vec<BatteryCheck<S>>,
    pub controls: Vec<NegativeControl<S>>,
}

impl<S: Scalar> BatteryReport<S> {
    pub fn failures(&self) -> impl Iterator<Item = &BatteryCheck<S>> {
        self.checks.iter().filter(|c| !c.report.pass)
    }

    pub fn pass(&self) -> bool {
        self.failures().next().is_none() && self.controls.iter().all(|c| c.rejected)
    }

    pub fn max_z(&self) -> S {
        self.checks.iter().map(|c| c.report.z()).fold(S::zero(), |a, b| a.max(b))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": BATTERY_VERSION,
            "n": self.options.n,
            "M": self.options.steps,
            "seeds": self.options.seeds,
            "checks": self.checks.iter().map(BatteryCheck::to_json).collect::<Vec<_>>(),
            "negative_controls": self.controls.iter().map(NegativeControl::to_json).collect::<Vec<_>>(),
            "max_z": self.max_z().to_f64_lossy(),
            "pass": self.pass(),
        })
    }
}

/// Slot stride per configuration; each identity gets 8 slots inside it.
const CONFIG_STRIDE: u64 = 64;

/// Rotation, cos/sin pairing, 2-D product split, 3-D rotation and its product
/// split, on every configuration and seed, plus one negative control per seed.
pub fn run_battery<S: Scalar>(opts: &BatteryOptions) -> Result<BatteryReport<S>> {
    let grid = Grid::new(S::one(), opts.steps)?;
    let fs = battery_two_arg(grid);
    let pairs = battery_pairs(grid);
    let configs = battery_configs(grid)?;
    let mut checks = Vec::new();
    let mut controls = Vec::new();
    let mut push = |identity, config, reports: Vec<RotationReport<S>>| {
        checks.extend(reports.into_iter().map(|report| BatteryCheck { identity, config, report }));
    };
    for &seed in &opts.seeds {
        for (ci, cfg) in configs.iter().enumerate() {
            let base = PathSampler::new(grid, seed).with_slot_base(ci as u64 * CONFIG_STRIDE);
            let at = |k: u64| base.with_slot_base(base.slot_base() + 8 * k);

            require_independent(&cfg.pair)?;
            let (laws, products) = run_identity(&Side::coupled_2d(&cfg.pair), &cfg.pair, &fs, &pairs, &at(0), opts.n)?;
            push("rotation2d", cfg.name, laws);
            push("product2d", cfg.name, products);

            let bearman = RotationCase::bearman(cfg.pair.h1.clone(), cfg.pair.h2.clone())?;
            require_independent(&bearman)?;
            push("cos-sin", cfg.name, run_identity(&Side::coupled_2d(&bearman), &bearman, &fs, &[], &at(1), opts.n)?.0);

            require_disjoint(&cfg.triple)?;
            let (laws, products) =
                run_identity(&Side::coupled_3d(&cfg.triple), &cfg.triple, &fs, &pairs, &at(2), opts.n)?;
            push("rotation3d", cfg.name, laws);
            push("product3d", cfg.name, products);
        }
        controls.push(negative_control(grid, seed, opts.n)?);
    }
    Ok(BatteryReport { options: *opts, checks, controls })
}
