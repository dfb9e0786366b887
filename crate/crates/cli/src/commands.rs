//! One function per subcommand. Each returns the report body (without
//! timestamp), an optional CSV table and the pass verdict.

use std::path::Path;

use num_complex::Complex;
use serde_json::{json, Value};

use wiener_fft::functional::{
    cto_exp, fft_exp, mc_cto, mc_fft, verify_thm52, verify_thm54, IdentityReport, TransformParam,
};
use wiener_fft::path::sample_paths;
use wiener_fft::rotation::{
    battery_two_arg, independence_criterion, verify_rotation_2d_battery, verify_rotation_3d_battery,
};
use wiener_fft::suite::{run_suite, SuiteOptions};
use wiener_fft::system::{generate_family_haar, generate_family_trig, verify_composed_identity, HaarFamily};
use wiener_fft::{
    check_system, CtoSpec, ExpCombo64, KernelSystem64, McEstimate64, PathSampler64, RotationCase, RotationReport,
    WienerPath64,
};

use crate::config::{self, Overrides, Sampling};
use crate::CliError;

/// MC agreement threshold for `eval`, in standard errors.
const SE_RULE: f64 = 3.0;
/// Slot base for the evaluation path `y`, clear of every estimator's slots.
const Y_SLOT: u64 = 1 << 30;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Outcome {
    pub report: Value,
    pub table: Option<Table>,
    pub pass: bool,
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn complex_json(c: Complex<f64>) -> Value {
    json!([c.re, c.im])
}

fn eval_path(s: &Sampling) -> WienerPath64 {
    sample_paths(&PathSampler64::new(s.grid, s.seed).with_slot_base(Y_SLOT), 1).remove(0)
}

/// Closed form at `y`, plus a Monte Carlo cross-check when `λ` is real.
fn eval_outcome(
    name: &str,
    closed: ExpCombo64,
    y: &WienerPath64,
    p: &TransformParam<f64>,
    s: &Sampling,
    mc: impl FnOnce(f64) -> wiener_fft::Result<McEstimate64>,
) -> Result<Outcome, CliError> {
    let value = closed.eval(y)?;
    let (mc_json, pass) = match p.real_lambda() {
        Some(l) => {
            let est = mc(l)?;
            let z = est.z_score(value);
            (json!({"estimate": est.to_json(), "z": z, "pass": z <= SE_RULE}), z <= SE_RULE)
        }
        None => (Value::Null, true),
    };
    let mut table = Table::new(&["term", "coeff_re", "coeff_im"]);
    for (i, t) in closed.terms().iter().enumerate() {
        table.push(vec![i.to_string(), fmt(t.coeff.re), fmt(t.coeff.im)]);
    }
    let report = json!({
        "operation": name,
        "param": p.to_json(),
        "transform": closed.to_json(),
        "value_at_y": complex_json(value),
        "y_seed": s.seed,
        "monte_carlo": mc_json,
        "n": s.n,
        "M": s.grid.steps(),
        "pass": pass,
    });
    Ok(Outcome { report, table: Some(table), pass })
}

pub fn eval_fft(cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::FftConfig = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let f = config::combo(&c.f, s.grid, "f")?;
    let k = config::kernel(&c.k, s.grid, "k")?;
    let p = config::param(&c.param)?;
    let closed = fft_exp(&f, &k, &p)?;
    let y = eval_path(&s);
    eval_outcome("fft", closed, &y, &p, &s, |l| mc_fft(&f, &k, l, &y, &PathSampler64::new(s.grid, s.seed), s.n))
}

pub fn eval_cto(cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::CtoConfig = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let (f, g) = (config::combo(&c.f, s.grid, "f")?, config::combo(&c.g, s.grid, "g")?);
    let spec = CtoSpec::new(
        config::kernel(&c.g1, s.grid, "g1")?,
        config::kernel(&c.g2, s.grid, "g2")?,
        config::kernel(&c.h1, s.grid, "h1")?,
        config::kernel(&c.h2, s.grid, "h2")?,
    )?;
    let p = config::param(&c.param)?;
    let closed = cto_exp(&f, &g, &spec, &p)?;
    let y = eval_path(&s);
    eval_outcome("cto", closed, &y, &p, &s, |l| mc_cto(&f, &g, &spec, l, &y, &PathSampler64::new(s.grid, s.seed), s.n))
}

#[derive(Clone, Copy)]
pub enum Rotation {
    TwoD,
    ThreeD,
}

pub fn verify_rotation(kind: Rotation, cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::RotationConfig = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let seeds = match (o.seed, c.seeds) {
        (Some(seed), _) => vec![seed],
        (None, Some(list)) if !list.is_empty() => list,
        (None, Some(_)) => return Err(CliError::Config("`seeds` must not be empty".into())),
        (None, None) => vec![1, 2, 3],
    };
    let case = RotationCase::new(
        config::kernel(&c.h1, s.grid, "h1")?,
        config::kernel(&c.h2, s.grid, "h2")?,
        config::kernel(&c.h3, s.grid, "h3")?,
        config::kernel(&c.h4, s.grid, "h4")?,
    )?;
    let mut fs = battery_two_arg(s.grid);
    if let Some(names) = &c.functionals {
        for name in names {
            if !fs.iter().any(|f| &f.name == name) {
                let known: Vec<_> = fs.iter().map(|f| f.name.clone()).collect();
                return Err(CliError::Config(format!("unknown functional `{name}`; known: {known:?}")));
            }
        }
        fs.retain(|f| names.contains(&f.name));
    }
    let mut reports: Vec<RotationReport<f64>> = Vec::new();
    for &seed in &seeds {
        let sampler = PathSampler64::new(s.grid, seed);
        reports.extend(match kind {
            Rotation::TwoD => verify_rotation_2d_battery(&case, &fs, &sampler, s.n)?,
            Rotation::ThreeD => verify_rotation_3d_battery(&case, &fs, &sampler, s.n)?,
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    let mut table = Table::new(&[
        "functional", "seed", "lhs_re", "lhs_im", "lhs_se", "rhs_re", "rhs_im", "rhs_se", "delta", "z", "pass",
    ]);
    for r in &reports {
        table.push(vec![
            r.name.clone(),
            r.seed.to_string(),
            fmt(r.lhs.mean.re),
            fmt(r.lhs.mean.im),
            fmt(r.lhs.std_error),
            fmt(r.rhs.mean.re),
            fmt(r.rhs.mean.im),
            fmt(r.rhs.std_error),
            fmt(r.delta),
            fmt(r.z()),
            r.pass.to_string(),
        ]);
    }
    let report = json!({
        "identity": match kind { Rotation::TwoD => "rotation2d", Rotation::ThreeD => "rotation3d" },
        "independence_residual": independence_criterion(&case)?.residual.max_abs(),
        "seeds": seeds,
        "n": s.n,
        "M": s.grid.steps(),
        "reports": reports.iter().map(RotationReport::to_json).collect::<Vec<_>>(),
        "pass": pass,
    });
    Ok(Outcome { report, table: Some(table), pass })
}

fn identity_outcome(r: IdentityReport<f64>) -> Outcome {
    let mut table = Table::new(&["identity", "terms", "unmatched", "max_coeff_rel_err", "pass"]);
    let t = &r.termwise;
    table.push(vec![
        r.name.into(),
        t.terms.to_string(),
        t.unmatched.to_string(),
        fmt(t.max_coeff_rel_err),
        r.pass().to_string(),
    ]);
    Outcome { pass: r.pass(), report: r.to_json(), table: Some(table) }
}

pub fn verify_thm52_cmd(cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::Thm52Config = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let (f, g) = (config::combo(&c.f, s.grid, "f")?, config::combo(&c.g, s.grid, "g")?);
    let spec = CtoSpec::new(
        config::kernel(&c.g1, s.grid, "g1")?,
        config::kernel(&c.g2, s.grid, "g2")?,
        config::kernel(&c.h1, s.grid, "h1")?,
        config::kernel(&c.h2, s.grid, "h2")?,
    )?;
    let k = config::kernel(&c.k, s.grid, "k")?;
    Ok(identity_outcome(verify_thm52(&f, &g, &spec, &k, &config::param(&c.param)?)?))
}

pub fn verify_thm54_cmd(cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::Thm54Config = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let (f, g) = (config::combo(&c.f, s.grid, "f")?, config::combo(&c.g, s.grid, "g")?);
    let spec34 = CtoSpec::new(
        config::kernel(&c.g1, s.grid, "g1")?,
        config::kernel(&c.g2, s.grid, "g2")?,
        config::kernel(&c.h3, s.grid, "h3")?,
        config::kernel(&c.h4, s.grid, "h4")?,
    )?;
    let (k1, k2) = (config::kernel(&c.k1, s.grid, "k1")?, config::kernel(&c.k2, s.grid, "k2")?);
    Ok(identity_outcome(verify_thm54(&f, &g, &k1, &k2, &spec34, &config::param(&c.param)?)?))
}

fn system(v: &Value) -> Result<KernelSystem64, CliError> {
    KernelSystem64::from_json(v).map_err(|e| CliError::Config(format!("system: {e}")))
}

pub fn verify_composed(cfg: Option<&Path>) -> Result<Outcome, CliError> {
    let c: config::ComposedConfig = config::load(cfg)?;
    let sys = system(&c.system)?;
    let grid = *sys.grid();
    let (f, g) = (config::combo(&c.f, grid, "f")?, config::combo(&c.g, grid, "g")?);
    let r = verify_composed_identity(&sys, &f, &g, &config::param(&c.param)?)?;
    let mut table = Table::new(&["terms", "unmatched", "discrepancy", "pass"]);
    table.push(vec![
        r.termwise.terms.to_string(),
        r.termwise.unmatched.to_string(),
        fmt(r.discrepancy),
        r.pass().to_string(),
    ]);
    Ok(Outcome { pass: r.pass(), report: r.to_json(), table: Some(table) })
}

fn system_table(r: &wiener_fft::SystemReport<f64>) -> Table {
    let mut table = Table::new(&["residual_i", "overlap_ii", "residual_iii", "residual_iv", "tol", "pass"]);
    table.push(vec![
        fmt(r.residual_i),
        fmt(r.overlap),
        fmt(r.residual_iii),
        fmt(r.residual_iv),
        fmt(r.tol),
        r.pass().to_string(),
    ]);
    table
}

pub fn check_system_cmd(cfg: Option<&Path>) -> Result<Outcome, CliError> {
    let c: config::CheckConfig = config::load(cfg)?;
    let sys = system(&c.system)?;
    let tol = c.tol.unwrap_or_else(|| sys.default_tolerance());
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::Config(format!("tolerance must be finite and non-negative, got {tol}")));
    }
    let r = check_system(&sys, tol);
    Ok(Outcome { pass: r.pass(), table: Some(system_table(&r)), report: r.to_json() })
}

pub fn gen_trig(cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::TrigConfig = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let sys = generate_family_trig(
        &config::kernel(&c.g1, s.grid, "g1")?,
        &config::kernel(&c.g2, s.grid, "g2")?,
        &config::kernel(&c.k, s.grid, "k")?,
        &config::support_set(&c.a, "A")?,
        &config::support_set(&c.b, "B")?,
    )?;
    let r = check_system(&sys, sys.default_tolerance());
    let report = json!({"system": sys.to_json(), "check": r.to_json(), "pass": r.pass()});
    Ok(Outcome { pass: r.pass(), table: Some(system_table(&r)), report })
}

pub fn gen_haar(cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::HaarConfig = config::load(cfg)?;
    let s = c.sampler.resolve(o)?;
    let [lo, hi] = c.depths.unwrap_or([3, 8]);
    if lo > hi || hi > 20 {
        return Err(CliError::Config(format!("depths must satisfy lo <= hi <= 20, got [{lo}, {hi}]")));
    }
    let (g1, g2, k) = (
        config::kernel(&c.g1, s.grid, "g1")?,
        config::kernel(&c.g2, s.grid, "g2")?,
        config::kernel(&c.k, s.grid, "k")?,
    );
    let fams = (lo..=hi).map(|p| generate_family_haar(&g1, &g2, &k, 1usize << p)).collect::<wiener_fft::Result<Vec<_>>>()?;
    // truncation residuals can only shrink as the basis grows
    let slack = 1e-12;
    let monotone = fams.windows(2).all(|w| (0..2).all(|j| w[1].residual[j] <= w[0].residual[j] + slack));
    let mut table = Table::new(&HaarFamily::<f64>::CSV_HEADER);
    for f in &fams {
        table.push(f.csv_row().iter().map(|&x| fmt(x)).collect());
    }
    let report = json!({
        "depths": (lo..=hi).collect::<Vec<_>>(),
        "families": fams.iter().map(HaarFamily::to_json).collect::<Vec<_>>(),
        "monotone": monotone,
        "pass": monotone,
    });
    Ok(Outcome { report, table: Some(table), pass: monotone })
}

pub fn suite(name: &str, cfg: Option<&Path>, o: &Overrides) -> Result<Outcome, CliError> {
    let c: config::SuiteConfig = config::load_or_default(cfg)?;
    let d = SuiteOptions::default();
    let opts = SuiteOptions {
        seed: o.seed.or(c.seed).unwrap_or(d.seed),
        n: o.n.or(c.n).unwrap_or(d.n),
        steps: o.grid.or(c.steps),
        draws: c.draws.unwrap_or(d.draws),
        mc_draws: c.mc_draws.unwrap_or(d.mc_draws),
    };
    let r = run_suite::<f64>(name, &opts).map_err(|e| match e {
        wiener_fft::Error::InvalidParameter(msg) if msg.starts_with("unknown suite") => CliError::Config(msg),
        other => CliError::Lib(other),
    })?;
    let mut table = Table::new(&["check", "pass"]);
    for ch in &r.checks {
        table.push(vec![ch.name.clone(), ch.pass.to_string()]);
    }
    Ok(Outcome { pass: r.pass(), report: r.to_json(), table: Some(table) })
}
