//! JSON job configuration.
//!
//! Deserialization errors and invariant violations alike are reported with
//! the JSON pointer of the offending value.

use std::collections::BTreeMap;
use std::fmt;

use framelab::{
    ContractionSpec, FrameError, GaborSystemSpec, GeneratorSpec, Grid, LatticeTruncation, PiecewiseWindow,
    SignalKind, WHParams, WindowPiece,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Job {
    GaborBounds,
    GaborVerify,
    WaveletBounds,
    ContractSweep,
    Perturb,
    /// Export one member of the seeded test-signal battery.
    Signals,
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Job::GaborBounds => "gabor-bounds",
            Job::GaborVerify => "gabor-verify",
            Job::WaveletBounds => "wavelet-bounds",
            Job::ContractSweep => "contract-sweep",
            Job::Perturb => "perturb",
            Job::Signals => "signals",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    job: Option<Job>,
    #[serde(default)]
    grid: Option<RawGrid>,
    windows: Vec<RawWindow>,
    system: RawSystem,
    #[serde(default)]
    contraction: Option<RawContraction>,
    #[serde(default)]
    options: Options,
    #[serde(default)]
    output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    label: String,
    pieces: Vec<WindowPiece>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "Q", default)]
    q: f64,
    generators: Vec<RawGenerator>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    window: String,
    q0: f64,
    /// Painless step `2π/(Pμ)` when omitted.
    #[serde(default)]
    p0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawContraction {
    pub epsilon: f64,
    #[serde(default = "one")]
    pub c: f64,
    pub u0: f64,
    pub v0: f64,
    /// Default to the exact painless bounds of the base system.
    #[serde(default)]
    pub alpha_o: Option<f64>,
    #[serde(default)]
    pub beta_o: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalOptions {
    pub count: usize,
    pub kind: SignalKind,
}

impl Default for SignalOptions {
    fn default() -> Self {
        SignalOptions { count: 50, kind: SignalKind::Compact }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    #[default]
    Gabor,
    Wavelet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PerturbationSpec {
    /// Every atom multiplied by `factor`.
    Scale { factor: f64 },
    /// Generator `l` uses `windows[l]` on the same lattice.
    Windows { windows: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitConstants {
    #[serde(rename = "M")]
    pub m: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub truncation: LatticeTruncation,
    pub seed: u64,
    /// Random battery; when absent, `perturb` uses its mixed battery and the
    /// other jobs 50 compact signals.
    pub signals: Option<SignalOptions>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Midpoint scan size for the correlation-sum bounds.
    pub grid_points: usize,
    /// Samples per period for the power-sum condition.
    pub scan_points: usize,
    /// Abscissae checked before the periodic scan.
    pub probe_points: Vec<f64>,
    pub eps_sweep: Vec<f64>,
    pub tolerance: f64,
    pub lambda_fraction: f64,
    pub family: FamilyKind,
    pub perturbation: Option<PerturbationSpec>,
    pub constants: Option<ExplicitConstants>,
    pub signal_index: usize,
}

impl Options {
    pub fn signal_options(&self) -> SignalOptions {
        self.signals.unwrap_or_default()
    }
}

impl Default for Options {
    fn default() -> Self {
        Options {
            truncation: LatticeTruncation::acceptance(),
            seed: 0,
            signals: None,
            alpha: None,
            beta: None,
            grid_points: 4096,
            scan_points: 4096,
            probe_points: Vec::new(),
            eps_sweep: vec![1.0, 0.1, 0.01, 0.001],
            tolerance: 0.02,
            lambda_fraction: 0.0,
            family: FamilyKind::Gabor,
            perturbation: None,
            constants: None,
            signal_index: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: Format,
}

/// A validated job description.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub job: Option<Job>,
    pub grid: Grid,
    pub windows: BTreeMap<String, PiecewiseWindow>,
    pub system: GaborSystemSpec,
    pub contraction: Option<RawContraction>,
    pub options: Options,
    pub output: OutputSpec,
}

fn invalid(pointer: impl Into<String>, err: impl fmt::Display) -> CliError {
    CliError::Validation { pointer: pointer.into(), message: err.to_string() }
}

/// `a.b[3].c` as produced by `serde_path_to_error`, rewritten as `/a/b/3/c`.
fn json_pointer(path: &str) -> String {
    if path == "." || path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for segment in path.split('.') {
        let mut rest = segment;
        if let Some(i) = rest.find('[') {
            out.push('/');
            out.push_str(&rest[..i]);
            rest = &rest[i..];
            while let Some(end) = rest.find(']') {
                out.push('/');
                out.push_str(&rest[1..end]);
                rest = &rest[end + 1..];
            }
        } else {
            out.push('/');
            out.push_str(rest);
        }
    }
    out.replace("//", "/")
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<JobConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(&e.path().to_string());
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            CliError::Parse(inner.to_string())
        } else {
            CliError::Validation { pointer, message: inner.to_string() }
        }
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<JobConfig, CliError> {
    let grid = match raw.grid {
        None => Grid::default_acceptance(),
        Some(g) => Grid::new(g.x_min, g.x_max, g.n_points).map_err(|e| invalid("/grid", e))?,
    };

    let mut windows = BTreeMap::new();
    for (i, w) in raw.windows.into_iter().enumerate() {
        let pointer = format!("/windows/{i}");
        if windows.contains_key(&w.label) {
            return Err(invalid(format!("{pointer}/label"), format!("window label {:?} is defined twice", w.label)));
        }
        let window = PiecewiseWindow::new(w.label.clone(), w.pieces).map_err(|e| invalid(&pointer, e))?;
        windows.insert(w.label, window);
    }

    let wh = WHParams::new(raw.system.p, raw.system.q).map_err(|e| invalid("/system/P", e))?;
    if raw.system.generators.is_empty() {
        return Err(invalid("/system/generators", "a system needs at least one generator"));
    }
    let mut generators = Vec::with_capacity(raw.system.generators.len());
    for (i, g) in raw.system.generators.iter().enumerate() {
        let pointer = format!("/system/generators/{i}");
        let window = lookup(&windows, &g.window, &format!("{pointer}/window"))?;
        let spec = match g.p0 {
            Some(p0) => GeneratorSpec::new(window.clone(), g.q0, p0),
            None => GeneratorSpec::painless(window.clone(), g.q0, wh),
        }
        .map_err(|e| invalid(&pointer, e))?;
        generators.push(spec);
    }
    let system = GaborSystemSpec::new(wh, generators).map_err(|e| invalid("/system", e))?;

    let options = raw.options;
    validate_options(&options, &windows, system.n_generators())?;

    Ok(JobConfig {
        job: raw.job,
        grid,
        windows,
        system,
        contraction: raw.contraction,
        options,
        output: raw.output,
    })
}

fn lookup<'a>(
    windows: &'a BTreeMap<String, PiecewiseWindow>,
    label: &str,
    pointer: &str,
) -> Result<&'a PiecewiseWindow, CliError> {
    windows.get(label).ok_or_else(|| invalid(pointer, format!("window {label:?} is not defined")))
}

fn validate_options(
    o: &Options,
    windows: &BTreeMap<String, PiecewiseWindow>,
    n_generators: usize,
) -> Result<(), CliError> {
    if o.signals.is_some_and(|s| s.count == 0) {
        return Err(invalid("/options/signals/count", "the signal battery must not be empty"));
    }
    if o.grid_points == 0 {
        return Err(invalid("/options/grid_points", "grid_points must be positive"));
    }
    if o.scan_points == 0 {
        return Err(invalid("/options/scan_points", "scan_points must be positive"));
    }
    for (i, w) in o.eps_sweep.windows(2).enumerate() {
        if w[1] >= w[0] {
            return Err(invalid(format!("/options/eps_sweep/{}", i + 1), "eps_sweep must be strictly descending"));
        }
    }
    for (i, &e) in o.eps_sweep.iter().enumerate() {
        if !(e > 0.0 && e <= 1.0) {
            return Err(invalid(format!("/options/eps_sweep/{i}"), format!("ε must lie in (0, 1], got {e}")));
        }
    }
    if o.tolerance.is_nan() || o.tolerance < 0.0 {
        return Err(invalid("/options/tolerance", "tolerance must be non-negative"));
    }
    if !(0.0..1.0).contains(&o.lambda_fraction) {
        return Err(invalid("/options/lambda_fraction", "lambda_fraction must lie in [0, 1)"));
    }
    match &o.perturbation {
        Some(PerturbationSpec::Scale { factor }) if !factor.is_finite() || *factor == 0.0 => {
            return Err(invalid("/options/perturbation/factor", "scale factor must be finite and nonzero"));
        }
        Some(PerturbationSpec::Windows { windows: labels }) => {
            if labels.len() != n_generators {
                return Err(invalid(
                    "/options/perturbation/windows",
                    format!("expected one window per generator ({n_generators}), got {}", labels.len()),
                ));
            }
            for (i, l) in labels.iter().enumerate() {
                lookup(windows, l, &format!("/options/perturbation/windows/{i}"))?;
            }
        }
        _ => {}
    }
    Ok(())
}

impl JobConfig {
    /// Checks that the subcommand agrees with the config's own `job`, if any.
    pub fn check_job(&self, job: Job) -> Result<(), CliError> {
        match self.job {
            Some(j) if j != job => Err(invalid("/job", format!("config is for {j}, but {job} was requested"))),
            _ => Ok(()),
        }
    }

    pub fn contraction_spec(&self, epsilon: Option<f64>) -> Result<ContractionSpec, CliError> {
        let raw = self
            .contraction
            .as_ref()
            .ok_or_else(|| invalid("/contraction", "this job needs a contraction block"))?;
        let (alpha_o, beta_o) = match (raw.alpha_o, raw.beta_o) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let exact = framelab::weyl_heisenberg::painless_exact_bounds(&self.system)
                    .map_err(|e| invalid("/contraction", e))?;
                (a.unwrap_or(exact.lower), b.unwrap_or(exact.upper))
            }
        };
        ContractionSpec::new(
            epsilon.unwrap_or(raw.epsilon),
            raw.c,
            raw.u0,
            raw.v0,
            self.system.clone(),
            alpha_o,
            beta_o,
        )
        .map_err(|e: FrameError| invalid("/contraction", e))
    }

    pub fn window(&self, label: &str) -> Option<&PiecewiseWindow> {
        self.windows.get(label)
    }
}
