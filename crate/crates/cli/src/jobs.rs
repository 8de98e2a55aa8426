use std::f64::consts::PI;
use std::fmt::Write as _;

use framelab::extended_affine::{contracted_bounds, contraction_limit_check, wavelet_family};
use framelab::perturbation::{
    estimate_constants, perturbation_battery, perturbed_bounds, verify_condition, wavelet_perturbed_bounds, DEFAULT_BATTERY_SIZE,
};
use framelab::weyl_heisenberg::{
    check_power_sum_condition, check_power_sum_condition_at, christensen_bounds, gabor_family,
    painless_exact_bounds,
};
use framelab::{
    random_test_signals, AtomFamily, Complex64, ConditionVerdict, FrameError, FrameReport, GaborSystemSpec,
    GeneratorSpec, GridSignal, LimitReport, PerturbationConstants, PerturbationVerdict, SignalKind,
};
use serde::Serialize;

use crate::config::{FamilyKind, Format, Job, JobConfig, PerturbationSpec};
use crate::error::CliError;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Correlation-sum bounds of one generator, with `b = |P·p0|/(2π)`.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorBounds {
    pub generator: usize,
    pub a: f64,
    pub b: f64,
    pub bounds: FrameReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaborBoundsReport {
    /// Exact painless bounds; absent when the translation steps are
    /// incommensurate.
    pub exact: Option<FrameReport>,
    pub correlation: Vec<GeneratorBounds>,
    pub oracle: FrameReport,
    pub lower_certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaborVerifyReport {
    pub alpha: f64,
    pub beta: f64,
    pub probe_points: Vec<f64>,
    pub scan_points: usize,
    #[serde(flatten)]
    pub verdict: ConditionVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveletBoundsReport {
    pub epsilon: f64,
    pub c: f64,
    pub alpha_o: f64,
    pub beta_o: f64,
    pub closed_form: FrameReport,
    pub oracle: FrameReport,
    pub tolerance: f64,
    /// The oracle bracket lies inside the closed-form bracket widened by
    /// `tolerance`.
    pub bracket_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbReport {
    pub family: FamilyKind,
    pub reference_lower: f64,
    pub reference_upper: f64,
    pub constants: PerturbationConstants,
    pub estimated: bool,
    pub condition: PerturbationVerdict,
    pub bounds: FrameReport,
    pub oracle: FrameReport,
    pub tolerance: f64,
    pub bracket_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignalExport {
    pub kind: SignalKind,
    pub seed: u64,
    pub index: usize,
    pub x: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Result of a job, ready to be rendered.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "job", rename_all = "kebab-case")]
pub enum Report {
    GaborBounds(GaborBoundsReport),
    GaborVerify(GaborVerifyReport),
    WaveletBounds(WaveletBoundsReport),
    ContractSweep(LimitReport),
    Perturb(PerturbReport),
    Signals(SignalExport),
}

impl Report {
    /// Whether the mathematical check the job performs came out negative.
    pub fn check_failed(&self) -> bool {
        match self {
            Report::GaborBounds(r) => !r.lower_certified,
            Report::GaborVerify(r) => !r.verdict.holds(),
            Report::WaveletBounds(r) => !r.bracket_holds,
            Report::ContractSweep(r) => !r.passed(),
            Report::Perturb(r) => !r.condition.holds() || !r.bracket_holds,
            Report::Signals(_) => false,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Report::GaborBounds(r) => {
                out.push_str("source,lower,upper,lower_certified\n");
                let mut row = |name: String, rep: &FrameReport| {
                    let _ = writeln!(out, "{name},{},{},{}", num(rep.lower), num(rep.upper), rep.lower_certified);
                };
                if let Some(e) = &r.exact {
                    row("exact".into(), e);
                }
                for g in &r.correlation {
                    row(format!("correlation_{}", g.generator), &g.bounds);
                }
                row("oracle".into(), &r.oracle);
            }
            Report::GaborVerify(r) => {
                out.push_str("verdict,generator,x,value,bound,side\n");
                match &r.verdict {
                    ConditionVerdict::Holds => out.push_str("holds,,,,,\n"),
                    ConditionVerdict::Violated { x, generator, value, bound, side } => {
                        let side = match side {
                            framelab::BoundSide::Lower => "lower",
                            framelab::BoundSide::Upper => "upper",
                        };
                        let _ = writeln!(out, "violated,{generator},{},{},{},{side}", num(*x), num(*value), num(*bound));
                    }
                }
            }
            Report::WaveletBounds(r) => {
                out.push_str("source,lower,upper\n");
                let _ = writeln!(out, "closed_form,{},{}", num(r.closed_form.lower), num(r.closed_form.upper));
                let _ = writeln!(out, "oracle,{},{}", num(r.oracle.lower), num(r.oracle.upper));
            }
            Report::ContractSweep(r) => {
                out.push_str("epsilon,lower_bound,upper_bound,oracle_min,oracle_max\n");
                for row in &r.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        num(row.epsilon),
                        num(row.lower_bound),
                        num(row.upper_bound),
                        opt_num(row.oracle_min),
                        opt_num(row.oracle_max)
                    );
                }
            }
            Report::Perturb(r) => {
                out.push_str("M,lambda,condition,lower,upper,oracle_lower,oracle_upper\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    num(r.constants.m()),
                    num(r.constants.lambda()),
                    if r.condition.holds() { "holds" } else { "violated" },
                    num(r.bounds.lower),
                    num(r.bounds.upper),
                    num(r.oracle.lower),
                    num(r.oracle.upper)
                );
            }
            Report::Signals(s) => {
                out.push_str("x,re,im\n");
                for ((x, re), im) in s.x.iter().zip(&s.re).zip(&s.im) {
                    let _ = writeln!(out, "{},{},{}", num(*x), num(*re), num(*im));
                }
            }
        }
        out
    }
}

fn battery(cfg: &JobConfig) -> Vec<GridSignal> {
    let s = cfg.options.signal_options();
    random_test_signals(&cfg.grid, s.count, cfg.options.seed, s.kind)
}

/// Runs one job against a validated configuration.
pub fn run_job(job: Job, cfg: &JobConfig) -> Result<Report, CliError> {
    cfg.check_job(job)?;
    Ok(match job {
        Job::GaborBounds => Report::GaborBounds(gabor_bounds(cfg)?),
        Job::GaborVerify => Report::GaborVerify(gabor_verify(cfg)?),
        Job::WaveletBounds => Report::WaveletBounds(wavelet_bounds(cfg)?),
        Job::ContractSweep => Report::ContractSweep(contract_sweep(cfg)?),
        Job::Perturb => Report::Perturb(perturb(cfg)?),
        Job::Signals => Report::Signals(signals(cfg)?),
    })
}

fn gabor_bounds(cfg: &JobConfig) -> Result<GaborBoundsReport, CliError> {
    let sys = &cfg.system;
    let exact = match painless_exact_bounds(sys) {
        Ok(r) => Some(r),
        Err(FrameError::IncommensurateLattice) => None,
        Err(e) => return Err(e.into()),
    };
    let p = sys.wh().p();
    let correlation = sys
        .generators()
        .iter()
        .enumerate()
        .map(|(l, g)| {
            let (a, b) = (g.q0().abs(), (p * g.p0()).abs() / (2.0 * PI));
            let bounds = christensen_bounds(g.window(), a, b, cfg.options.grid_points)?;
            Ok(GeneratorBounds { generator: l, a, b, bounds })
        })
        .collect::<Result<Vec<_>, FrameError>>()?;
    let fam = gabor_family(sys, &cfg.grid, cfg.options.truncation)?;
    let oracle = fam.oracle_bounds(&battery(cfg))?;
    let lower_certified = match &exact {
        Some(e) => e.lower_certified,
        None => sys.n_generators() == 1 && correlation[0].bounds.lower_certified,
    };
    Ok(GaborBoundsReport { exact, correlation, oracle, lower_certified })
}

fn gabor_verify(cfg: &JobConfig) -> Result<GaborVerifyReport, CliError> {
    let sys = &cfg.system;
    let (alpha, beta) = match (cfg.options.alpha, cfg.options.beta) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let exact = painless_exact_bounds(sys)?;
            (a.unwrap_or(exact.lower), b.unwrap_or(exact.upper))
        }
    };
    let probes = &cfg.options.probe_points;
    let mut verdict = check_power_sum_condition_at(sys, alpha, beta, probes)?;
    if verdict.holds() {
        verdict = check_power_sum_condition(sys, alpha, beta, cfg.options.scan_points)?;
    }
    Ok(GaborVerifyReport {
        alpha,
        beta,
        probe_points: probes.clone(),
        scan_points: cfg.options.scan_points,
        verdict,
    })
}

fn inside(bounds: &FrameReport, oracle: &FrameReport, tol: f64) -> bool {
    bounds.brackets(oracle.lower, tol) && bounds.brackets(oracle.upper, tol)
}

fn wavelet_bounds(cfg: &JobConfig) -> Result<WaveletBoundsReport, CliError> {
    let spec = cfg.contraction_spec(None)?;
    let closed_form = contracted_bounds(&spec);
    let fam = wavelet_family(&spec, &cfg.grid, cfg.options.truncation)?;
    let oracle = fam.oracle_bounds(&battery(cfg))?;
    let tolerance = cfg.options.tolerance;
    Ok(WaveletBoundsReport {
        epsilon: spec.epsilon(),
        c: spec.c(),
        alpha_o: spec.alpha_o(),
        beta_o: spec.beta_o(),
        bracket_holds: inside(&closed_form, &oracle, tolerance),
        closed_form,
        oracle,
        tolerance,
    })
}

fn contract_sweep(cfg: &JobConfig) -> Result<LimitReport, CliError> {
    let spec = cfg.contraction_spec(None)?;
    Ok(contraction_limit_check(
        &spec,
        &battery(cfg),
        &cfg.options.eps_sweep,
        cfg.options.truncation,
        cfg.options.tolerance,
    )?)
}

fn perturbed_system(cfg: &JobConfig, labels: &[String]) -> Result<GaborSystemSpec, CliError> {
    let sys = &cfg.system;
    let generators = sys
        .generators()
        .iter()
        .zip(labels)
        .map(|(g, label)| {
            let w = cfg.window(label).expect("labels checked during validation");
            GeneratorSpec::new(w.clone(), g.q0(), g.p0())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GaborSystemSpec::new(sys.wh(), generators)?)
}

fn perturb(cfg: &JobConfig) -> Result<PerturbReport, CliError> {
    let o = &cfg.options;
    let spec = o.perturbation.as_ref().ok_or_else(|| CliError::Validation {
        pointer: "/options/perturbation".into(),
        message: "the perturb job needs a perturbation block".into(),
    })?;
    let trunc = o.truncation;
    let (base, pert, reference): (AtomFamily, AtomFamily, FrameReport) = match o.family {
        FamilyKind::Gabor => {
            let base = gabor_family(&cfg.system, &cfg.grid, trunc)?;
            let pert = match spec {
                PerturbationSpec::Scale { factor } => base.scaled(Complex64::new(*factor, 0.0)),
                PerturbationSpec::Windows { windows } => gabor_family(&perturbed_system(cfg, windows)?, &cfg.grid, trunc)?,
            };
            let reference = match (o.alpha, o.beta) {
                (Some(a), Some(b)) => FrameReport::closed_form(a, b),
                _ => painless_exact_bounds(&cfg.system)?,
            };
            (base, pert, reference)
        }
        FamilyKind::Wavelet => {
            let cs = cfg.contraction_spec(None)?;
            let base = wavelet_family(&cs, &cfg.grid, trunc)?;
            let pert = match spec {
                PerturbationSpec::Scale { factor } => base.scaled(Complex64::new(*factor, 0.0)),
                PerturbationSpec::Windows { windows } => {
                    let sys = perturbed_system(cfg, windows)?;
                    let raw = cfg.contraction.as_ref().expect("contraction_spec succeeded");
                    let moved = framelab::ContractionSpec::new(
                        cs.epsilon(),
                        cs.c(),
                        raw.u0,
                        raw.v0,
                        sys,
                        cs.alpha_o(),
                        cs.beta_o(),
                    )?;
                    wavelet_family(&moved, &cfg.grid, trunc)?
                }
            };
            (base, pert, contracted_bounds(&cs))
        }
    };
    let signals = match o.signals {
        Some(_) => battery(cfg),
        None => perturbation_battery(&base, &pert, DEFAULT_BATTERY_SIZE, o.seed)?,
    };
    let (constants, estimated) = match o.constants {
        Some(k) => (PerturbationConstants::new(k.m, k.lambda)?, false),
        None => (estimate_constants(&base, &pert, &signals, o.lambda_fraction, reference.lower)?, true),
    };
    let condition = verify_condition(&base, &pert, constants, &signals)?;
    let bounds = match o.family {
        FamilyKind::Gabor => perturbed_bounds(reference.lower, reference.upper, constants)?,
        FamilyKind::Wavelet => {
            let cs = cfg.contraction_spec(None)?;
            wavelet_perturbed_bounds(cs.epsilon(), cs.c(), cs.alpha_o(), cs.beta_o(), constants)?
        }
    };
    let oracle = pert.oracle_bounds(&signals)?;
    Ok(PerturbReport {
        family: o.family,
        reference_lower: reference.lower,
        reference_upper: reference.upper,
        constants,
        estimated,
        condition,
        bracket_holds: inside(&bounds, &oracle, o.tolerance),
        bounds,
        oracle,
        tolerance: o.tolerance,
    })
}

fn signals(cfg: &JobConfig) -> Result<SignalExport, CliError> {
    let o = &cfg.options;
    let index = o.signal_index;
    let count = o.signal_options().count;
    if index >= count {
        return Err(CliError::Validation {
            pointer: "/options/signal_index".into(),
            message: format!("index {index} is outside a battery of {count}"),
        });
    }
    let f = battery(cfg).swap_remove(index);
    let x: Vec<f64> = cfg.grid.abscissae().collect();
    let re = f.samples().iter().map(|v| v.re).collect();
    let im = f.samples().iter().map(|v| v.im).collect();
    Ok(SignalExport { kind: o.signal_options().kind, seed: o.seed, index, x, re, im })
}
