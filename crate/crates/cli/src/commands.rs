use lifi_core::geometry::{cos_incidence, link_geometry};
use lifi_core::linkstats::ber_fixed;
use lifi_core::montecarlo::ber_orientation_average;
use lifi_core::orientation::StableOmegaRange;
use lifi_core::{
    ber_approx, ber_exact, gain_distribution, ks_statistic, los_gain, omega_range, omega_range_all_theta,
    optimum_tilt, prob_los_blocked, simulate_ber, simulate_gain, snr_cdf, snr_pdf, theta_threshold,
    ElevationModel, McConfig, ModulationOrder, OmegaRange, Scenario, Vec3,
};
use serde_json::{json, Value};

use crate::config::{ScenarioFile, Sweep, SweepVariable};
use crate::output::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// What a command produced; `failure` maps to exit code 1.
#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub notes: Option<String>,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            body,
            notes: None,
            failure: None,
        }
    }
}

pub struct Context {
    pub file: ScenarioFile,
    pub seed: u64,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy)]
pub struct McArgs {
    pub samples: u64,
    pub workers: Option<usize>,
    pub bins: usize,
}

impl Context {
    fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(self.file.to_scenario()?)
    }

    fn mc(&self, args: &McArgs) -> McConfig {
        let mut cfg = McConfig {
            n_samples: args.samples,
            seed: self.seed,
            n_bins: args.bins,
            ..McConfig::default()
        };
        if let Some(w) = args.workers {
            cfg.workers = w;
        }
        cfg
    }

    fn fixed_facing(&self, what: &str) -> Result<f64, CliError> {
        self.file.orientation.omega.ok_or_else(|| {
            CliError::Config(format!("{what} needs a fixed facing direction (orientation.omega)"))
        })
    }

    /// A representative fixed elevation: `theta` if given, else `mu_theta`.
    fn nominal_theta(&self) -> f64 {
        match self.file.elevation() {
            ElevationModel::Fixed { theta } => theta,
            ElevationModel::Laplace { mu, .. } => mu,
        }
    }

    fn table(&self, t: &Table) -> String {
        match self.format.unwrap_or(Format::Csv) {
            Format::Csv => t.to_csv(),
            Format::Json => pretty(&t.to_json()),
        }
    }

    fn sweep(&self, var: SweepVariable, flags: [Option<f64>; 3], default: Sweep) -> Result<Sweep, CliError> {
        let base = match &self.file.sweep {
            Some(s) if s.variable == var => s.clone(),
            _ => default,
        };
        let sw = Sweep::new(
            var,
            flags[0].unwrap_or(base.start),
            flags[1].unwrap_or(base.stop),
            flags[2].unwrap_or(base.step),
        );
        sw.validate()?;
        Ok(sw)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value");
    s.push('\n');
    s
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn range_json(r: &OmegaRange) -> Value {
    json!({
        "kind": r.kind(),
        "endpoints": r.endpoints().map(|(a, b)| vec![num(a), num(b)]),
        "measure": num(r.measure()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAngle {
    Theta,
    Omega,
}

pub struct GainSweepArgs {
    pub variable: Option<SweepAngle>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub theta: Option<f64>,
    pub omega: Option<f64>,
}

pub fn gain_sweep(ctx: &Context, a: &GainSweepArgs) -> Result<Outcome, CliError> {
    let s = ctx.scenario()?;
    let g = s.geometry()?;
    let c = s.constants()?;
    let fov = s.phy.fov;
    let variable = a.variable.unwrap_or(match &ctx.file.sweep {
        Some(sw) if sw.variable == SweepVariable::Omega => SweepAngle::Omega,
        _ => SweepAngle::Theta,
    });
    let flags = [a.start, a.stop, a.step];
    let mut t = Table::new(&["theta", "omega", "cos_psi", "gain"]);
    match variable {
        SweepAngle::Theta => {
            let omega = match a.omega {
                Some(o) => o,
                None => ctx.fixed_facing("a theta sweep")?,
            };
            let sw = ctx.sweep(SweepVariable::Theta, flags, Sweep::new(SweepVariable::Theta, 0.0, 90.0, 0.1))?;
            for theta in sw.points() {
                let theta = theta.min(90.0);
                t.push(vec![
                    theta.into(),
                    omega.into(),
                    cos_incidence(&g, theta, omega)?.into(),
                    los_gain(&c, &g, theta, omega, fov)?.into(),
                ]);
            }
        }
        SweepAngle::Omega => {
            let theta = a.theta.unwrap_or_else(|| ctx.nominal_theta());
            let sw = ctx.sweep(SweepVariable::Omega, flags, Sweep::new(SweepVariable::Omega, 0.0, 359.0, 1.0))?;
            for omega in sw.points() {
                t.push(vec![
                    theta.into(),
                    omega.into(),
                    cos_incidence(&g, theta, omega)?.into(),
                    los_gain(&c, &g, theta, omega, fov)?.into(),
                ]);
            }
        }
    }
    Ok(Outcome::ok(ctx.table(&t)))
}

pub fn omega_range_cmd(ctx: &Context, theta: Option<f64>, fov: Option<f64>) -> Result<Outcome, CliError> {
    let s = ctx.scenario()?;
    let g = s.geometry()?;
    let fov = fov.unwrap_or(s.phy.fov);
    if !(fov > 0.0 && fov <= 90.0) {
        return Err(CliError::Config(format!("--fov must lie in (0, 90], got {fov}")));
    }
    let theta = theta.unwrap_or_else(|| ctx.nominal_theta());
    let range = omega_range(&g, theta, fov)?;
    let pr = prob_los_blocked(&g, theta, fov)?;
    let th = theta_threshold(&g, fov);
    let body = match ctx.format.unwrap_or(Format::Json) {
        Format::Json => {
            let stable = match omega_range_all_theta(&g, fov)? {
                StableOmegaRange::Range { range } => range_json(&range),
                StableOmegaRange::NotApplicable => Value::from("not-applicable"),
            };
            let mut v = range_json(&range);
            let obj = v.as_object_mut().expect("object");
            obj.insert("theta".into(), num(theta));
            obj.insert("fov".into(), num(fov));
            obj.insert("pr_blocked".into(), num(pr));
            obj.insert("theta_threshold".into(), num(th.raw));
            obj.insert("all_theta_range".into(), stable);
            pretty(&v)
        }
        Format::Csv => {
            let mut t = Table::new(&["theta", "fov", "kind", "start", "end", "measure", "pr_blocked"]);
            let (a, b) = range.endpoints().map_or((f64::NAN, f64::NAN), |e| e);
            t.push(vec![
                theta.into(),
                fov.into(),
                range.kind().into(),
                a.into(),
                b.into(),
                range.measure().into(),
                pr.into(),
            ]);
            t.to_csv()
        }
    };
    Ok(Outcome::ok(body))
}

pub struct OutageArgs {
    pub theta: f64,
    pub fovs: Vec<f64>,
    pub r_start: Option<f64>,
    pub r_stop: Option<f64>,
    pub r_step: Option<f64>,
}

pub fn outage_profile(ctx: &Context, a: &OutageArgs) -> Result<Outcome, CliError> {
    let s = ctx.scenario()?;
    let sw = ctx.sweep(
        SweepVariable::R,
        [a.r_start, a.r_stop, a.r_step],
        Sweep::new(SweepVariable::R, 0.0, 5.0, 0.05),
    )?;
    if sw.start < 0.0 {
        return Err(CliError::Config("r sweep must start at r >= 0".into()));
    }
    // keep the file's bearing; Pr{H = 0} depends on r only
    let bearing = (s.ue.y - s.ap.y).atan2(s.ue.x - s.ap.x);
    let mut t = Table::new(&["r", "fov", "pr_blocked"]);
    for &fov in &a.fovs {
        if !(fov > 0.0 && fov <= 90.0) {
            return Err(CliError::Config(format!("--fov values must lie in (0, 90], got {fov}")));
        }
        for r in sw.points() {
            let ue = Vec3::new(s.ap.x + r * bearing.cos(), s.ap.y + r * bearing.sin(), s.ue.z);
            let g = link_geometry(ue, s.ap)?;
            t.push(vec![r.into(), fov.into(), prob_los_blocked(&g, a.theta, fov)?.into()]);
        }
    }
    Ok(Outcome::ok(ctx.table(&t)))
}

pub fn snr_dist(ctx: &Context, points: usize, mc: &McArgs) -> Result<Outcome, CliError> {
    let s = ctx.scenario()?;
    ctx.fixed_facing("snr-dist")?;
    let model = s.snr_model()?;
    let d = model.gain;
    let mut t = Table::new(&["s_db", "s", "pdf", "cdf"]);
    if !d.always_blocked() && !d.is_degenerate() && points >= 2 {
        let hi = 10.0 * model.s_max.log10();
        let lo = 10.0 * model.s_min.max(model.s_max * 1e-6).log10();
        for k in 0..points {
            let db = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let sv = 10f64.powf(db / 10.0).min(model.s_max);
            t.push(vec![db.into(), sv.into(), snr_pdf(&model, sv)?.into(), snr_cdf(&model, sv)?.into()]);
        }
    }
    let emp = simulate_gain(&s, &ctx.mc(mc))?;
    let ks = if d.always_blocked() || d.is_degenerate() {
        None
    } else {
        ks_statistic(&emp, |h| d.conditional_cdf(h).unwrap_or(f64::NAN)).ok()
    };
    let summary = json!({
        "s0": num(model.s0),
        "s_min": num(model.s_min),
        "s_max": num(model.s_max),
        "mu_h": num(d.mu_h),
        "b_h": num(d.b_h),
        "c_h_analytic": num(d.c_h),
        "c_h_empirical": num(emp.point_mass_at_zero()),
        "ks": ks.map(num),
        "samples": emp.n,
        "seed": ctx.seed,
    });
    Ok(match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => Outcome {
            body: t.to_csv(),
            notes: Some(pretty(&summary)),
            failure: None,
        },
        Format::Json => Outcome::ok(pretty(&json!({ "summary": summary, "rows": t.to_json() }))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerMode {
    Vertical,
    FixedTheta,
    Optimum,
    Random,
    Approx,
    Exact,
    Mc,
}

impl BerMode {
    pub fn name(&self) -> &'static str {
        match self {
            BerMode::Vertical => "vertical",
            BerMode::FixedTheta => "fixed-theta",
            BerMode::Optimum => "optimum",
            BerMode::Random => "random",
            BerMode::Approx => "approx",
            BerMode::Exact => "exact",
            BerMode::Mc => "mc",
        }
    }
}

pub struct BerArgs {
    pub orders: Vec<u32>,
    pub modes: Vec<BerMode>,
    pub p_start: Option<f64>,
    pub p_stop: Option<f64>,
    pub p_step: Option<f64>,
    pub theta: Option<f64>,
    pub mc: McArgs,
}

pub fn ber_curve(ctx: &Context, a: &BerArgs) -> Result<Outcome, CliError> {
    let base = ctx.scenario()?;
    let orders = a
        .orders
        .iter()
        .map(|&m| ModulationOrder::new(m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let needs_facing = a
        .modes
        .iter()
        .any(|m| matches!(m, BerMode::FixedTheta | BerMode::Optimum | BerMode::Approx | BerMode::Exact));
    let omega = if needs_facing {
        ctx.fixed_facing("modes fixed-theta, optimum, approx and exact")?
    } else {
        ctx.file.orientation.omega.unwrap_or(0.0)
    };
    let sw = ctx.sweep(
        SweepVariable::POpt,
        [a.p_start, a.p_stop, a.p_step],
        Sweep::new(SweepVariable::POpt, 0.1, 5.0, 0.1),
    )?;
    let g = base.geometry()?;
    let c = base.constants()?;
    let fixed_theta = a.theta.unwrap_or_else(|| ctx.nominal_theta());
    let theta_ot = optimum_tilt(&g, omega).theta;
    let mut t = Table::new(&["p_opt", "mode", "m", "ber"]);
    for p in sw.points() {
        if p <= 0.0 {
            return Err(CliError::Config(format!("p_opt must be positive, got {p}")));
        }
        let s = base.with_power(p);
        let snr = if a.modes.iter().any(|m| matches!(m, BerMode::Approx | BerMode::Exact)) {
            Some(s.snr_model()?)
        } else {
            None
        };
        for &mode in &a.modes {
            for &m in &orders {
                let ber = match mode {
                    BerMode::Vertical => ber_fixed(&c, &s.phy, &g, 0.0, omega, m)?,
                    BerMode::FixedTheta => ber_fixed(&c, &s.phy, &g, fixed_theta, omega, m)?,
                    BerMode::Optimum => ber_fixed(&c, &s.phy, &g, theta_ot, omega, m)?,
                    BerMode::Random => ber_orientation_average(&s, m)?,
                    BerMode::Approx => ber_approx(snr.as_ref().expect("model"), m).value,
                    BerMode::Exact => ber_exact(snr.as_ref().expect("model"), m),
                    BerMode::Mc => simulate_ber(&s, m, &ctx.mc(&a.mc))?.mean,
                };
                t.push(vec![p.into(), mode.name().into(), u64::from(m.m()).into(), ber.into()]);
            }
        }
    }
    Ok(Outcome::ok(ctx.table(&t)))
}

pub struct ValidateArgs {
    pub mc: McArgs,
    pub ks_tol: f64,
    pub perturb_mu: f64,
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

pub fn mc_validate(ctx: &Context, a: &ValidateArgs) -> Result<Outcome, CliError> {
    let s = ctx.scenario()?;
    let omega = ctx.fixed_facing("mc-validate")?;
    let law = ctx
        .file
        .law()
        .ok_or_else(|| CliError::Config("mc-validate needs a Laplace elevation model".into()))?;
    let model_law = lifi_core::TruncatedLaplace::new(law.mu + a.perturb_mu, law.b)?;
    let g = s.geometry()?;
    let c = s.constants()?;
    let d = gain_distribution(&c, &g, omega, s.phy.fov, &model_law)?;
    let cfg = ctx.mc(&a.mc);
    let emp = simulate_gain(&s, &cfg)?;
    let n = emp.n as f64;
    let mut checks = Vec::new();

    let total = d.total_mass();
    checks.push(Check {
        name: "total_mass",
        value: total,
        threshold: 0.05,
        pass: (total - 1.0).abs() <= 0.05,
    });

    let zero_diff = (emp.point_mass_at_zero() - d.c_h).abs();
    let zero_tol = 4.0 * (d.c_h * (1.0 - d.c_h) / n).sqrt() + (1.0 - model_law.normalization());
    checks.push(Check {
        name: "zero_mass",
        value: zero_diff,
        threshold: zero_tol,
        pass: zero_diff <= zero_tol,
    });

    if !d.always_blocked() && !d.is_degenerate() && !emp.positives().is_empty() {
        let ks = ks_statistic(&emp, |h| d.conditional_cdf(h).unwrap_or(f64::NAN))?;
        checks.push(Check {
            name: "ks_gain",
            value: ks,
            threshold: a.ks_tol,
            pass: ks < a.ks_tol,
        });
    }

    let est = simulate_ber(&s, ModulationOrder::QAM4, &cfg)?;
    let reference = ber_orientation_average(&s, ModulationOrder::QAM4)?;
    let ber_tol = 4.0 * est.std_err + 1e-300;
    checks.push(Check {
        name: "ber_vs_quadrature",
        value: (est.mean - reference).abs(),
        threshold: ber_tol,
        pass: (est.mean - reference).abs() <= ber_tol,
    });

    let small = McConfig {
        n_samples: cfg.n_samples.min(10_000),
        ..cfg
    };
    let repeat = simulate_gain(&s, &small)? == simulate_gain(&s, &McConfig { workers: 1, ..small })?;
    checks.push(Check {
        name: "determinism",
        value: if repeat { 0.0 } else { 1.0 },
        threshold: 0.0,
        pass: repeat,
    });

    let snr = lifi_core::snr_model(&s.phy, &d)?;
    let closed = ber_exact(&snr, ModulationOrder::QAM4);
    let all_pass = checks.iter().all(|c| c.pass);
    let report = json!({
        "pass": all_pass,
        "samples": emp.n,
        "seed": ctx.seed,
        "workers": cfg.workers,
        "perturb_mu": num(a.perturb_mu),
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "value": num(c.value),
            "threshold": num(c.threshold),
            "pass": c.pass,
        })).collect::<Vec<_>>(),
        "info": {
            "c_h_analytic": num(d.c_h),
            "c_h_empirical": num(emp.point_mass_at_zero()),
            "ber_mc": num(est.mean),
            "ber_mc_std_err": num(est.std_err),
            "ber_quadrature": num(reference),
            "ber_closed_form": num(closed),
            "theta_threshold": num(theta_threshold(&g, s.phy.fov).raw),
        },
    });
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    Ok(Outcome {
        body: pretty(&report),
        notes: None,
        failure: (!failed.is_empty()).then(|| failed.join(", ")),
    })
}
