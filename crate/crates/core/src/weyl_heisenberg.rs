//! Multi-generator Gabor systems generated by the Weyl-Heisenberg
//! representation `κ^{P,Q}`, their frame sums, and closed-form frame bounds.
//!
//! Atoms are `e^{i[P(mn q0 p0/2 + x m p0) + Q m p0]} φ_l(x + n q0)`:
//! angular-frequency modulation and translation by `−n q0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::family::{AtomFamily, AtomIndex, FrameSum, LatticeTruncation, SparseAtom};
use crate::numerics::{Grid, GridSignal};
use crate::piecewise::{
    correlation_extrema, correlation_sum, power_sum_poly, translation_power_sum, PiecewiseWindow,
};
use crate::poly::{Extrema, PiecewisePoly, Segment};
use crate::report::{BoundMethod, FrameReport, TAIL_FLAG_THRESHOLD};

/// Relative tolerance for recognizing `p0 = 2π/(Pμ)`.
pub const PAINLESS_TOLERANCE: f64 = 1e-12;

/// Representation parameters `P ≠ 0`, `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WHParams {
    p: f64,
    q: f64,
}

impl WHParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if p == 0.0 || !p.is_finite() || !q.is_finite() {
            return Err(FrameError::InvalidParameter(format!(
                "need finite P ≠ 0 and finite Q, got P = {p}, Q = {q}"
            )));
        }
        Ok(WHParams { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// One generator: window plus lattice steps `q0` (translation) and `p0`
/// (modulation), with `|q0·p0| < 2π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSpec {
    window: PiecewiseWindow,
    q0: f64,
    p0: f64,
}

impl GeneratorSpec {
    pub fn new(window: PiecewiseWindow, q0: f64, p0: f64) -> Result<Self> {
        if !(q0.is_finite() && p0.is_finite()) || q0 == 0.0 || p0 == 0.0 {
            return Err(FrameError::InvalidParameter(format!(
                "lattice steps must be finite and nonzero, got q0 = {q0}, p0 = {p0}"
            )));
        }
        if (q0 * p0).abs() >= 2.0 * PI {
            return Err(FrameError::InvalidParameter(format!(
                "|q0·p0| = {} violates the density condition |q0·p0| < 2π",
                (q0 * p0).abs()
            )));
        }
        Ok(GeneratorSpec { window, q0, p0 })
    }

    /// Generator with the painless modulation step `p0 = 2π/(Pμ)`.
    pub fn painless(window: PiecewiseWindow, q0: f64, wh: WHParams) -> Result<Self> {
        let p0 = painless_p0(wh.p(), window.support_length())?;
        Self::new(window, q0, p0)
    }

    pub fn window(&self) -> &PiecewiseWindow {
        &self.window
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn mu(&self) -> f64 {
        self.window.support_length()
    }
}

/// `(P, Q)` together with `N ≥ 1` generators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaborSystemSpec {
    wh: WHParams,
    generators: Vec<GeneratorSpec>,
}

impl GaborSystemSpec {
    pub fn new(wh: WHParams, generators: Vec<GeneratorSpec>) -> Result<Self> {
        if generators.is_empty() {
            return Err(FrameError::InvalidParameter("a system needs at least one generator".into()));
        }
        Ok(GaborSystemSpec { wh, generators })
    }

    pub fn wh(&self) -> WHParams {
        self.wh
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.generators
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    /// The one-generator subsystem for generator `l`.
    pub fn subsystem(&self, l: usize) -> Result<GaborSystemSpec> {
        let g = self.generator(l)?.clone();
        GaborSystemSpec::new(self.wh, vec![g])
    }

    /// The same lattice with a different `Q`.
    pub fn with_q(&self, q: f64) -> Result<GaborSystemSpec> {
        Ok(GaborSystemSpec { wh: WHParams::new(self.wh.p, q)?, generators: self.generators.clone() })
    }

    fn generator(&self, l: usize) -> Result<&GeneratorSpec> {
        self.generators.get(l).ok_or_else(|| {
            FrameError::InvalidParameter(format!(
                "generator index {l} out of range for {} generators",
                self.generators.len()
            ))
        })
    }

    /// Fails with `NotPainless` unless every `p0` equals `2π/(Pμ_l)`.
    pub fn check_painless(&self) -> Result<()> {
        for (l, g) in self.generators.iter().enumerate() {
            let expected = painless_p0(self.wh.p, g.mu())?;
            if (g.p0 - expected).abs() > PAINLESS_TOLERANCE * expected.abs().max(1.0) {
                return Err(FrameError::NotPainless { generator: l, p0: g.p0, expected });
            }
        }
        Ok(())
    }
}

/// `(κ^{P,Q}((u1, u2), z) f)(x) = e^{i[P(u1 + x u2) + Q u2]} f(z + x)`.
///
/// The translation is rounded to the nearest whole number of samples;
/// samples shifted in from outside the grid are zero.
pub fn wh_apply(wh: WHParams, u1: f64, u2: f64, z: f64, f: &GridSignal) -> Result<GridSignal> {
    let grid = *f.grid();
    if !z.is_finite() || z.abs() > grid.width() {
        return Err(FrameError::OutOfDomain(format!(
            "translation {z} exceeds the grid width {}",
            grid.width()
        )));
    }
    let shift = (z / grid.dx()).round() as i64;
    let src = f.samples();
    let n = grid.len() as i64;
    GridSignal::new(
        grid,
        (0..n)
            .map(|i| {
                let j = i + shift;
                if (0..n).contains(&j) {
                    let x = grid.x(i as usize);
                    src[j as usize] * Complex64::from_polar(1.0, wh.p * (u1 + x * u2) + wh.q * u2)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    )
}

/// `p0 = 2π/(Pμ)`: the modulation step that makes `{e^{iPx m p0}}` an
/// orthogonal basis on any interval of length `μ`.
pub fn painless_p0(p: f64, mu: f64) -> Result<f64> {
    if p == 0.0 || mu.is_nan() || mu <= 0.0 {
        return Err(FrameError::InvalidParameter(format!(
            "need P ≠ 0 and μ > 0, got P = {p}, μ = {mu}"
        )));
    }
    Ok(2.0 * PI / (p * mu))
}

fn sparse_gabor_atom(sys: &GaborSystemSpec, idx: AtomIndex, grid: &Grid) -> Result<SparseAtom> {
    let g = sys.generator(idx.l)?;
    let (wlo, whi) = g.window.support();
    let shift = idx.n as f64 * g.q0;
    let (start, end) = grid.index_range(wlo - shift, whi - shift);
    if start >= end {
        return Ok(SparseAtom::empty());
    }
    let (p, q) = (sys.wh.p, sys.wh.q);
    let (m, n) = (idx.m as f64, idx.n as f64);
    let const_phase = p * (m * n * g.q0 * g.p0 / 2.0) + q * m * g.p0;
    let values = (start..end)
        .map(|i| {
            let x = grid.x(i);
            let amp = g.window.eval(x + shift);
            Complex64::from_polar(1.0, const_phase + p * x * m * g.p0) * amp
        })
        .collect();
    Ok(SparseAtom { start, values })
}

/// Samples of `φ^{P,Q}_{(m,n,l)}` on `grid` (`l` zero-based).
pub fn gabor_atom(sys: &GaborSystemSpec, m: i64, n: i64, l: usize, grid: &Grid) -> Result<GridSignal> {
    let g = sys.generator(l)?;
    let shift = n as f64 * g.q0;
    if shift.abs() > grid.width() {
        return Err(FrameError::OutOfDomain(format!(
            "translation n·q0 = {shift} exceeds the grid width {}",
            grid.width()
        )));
    }
    Ok(sparse_gabor_atom(sys, AtomIndex { m, n, l }, grid)?.to_signal(*grid))
}

/// Every atom of the truncated system. Translates that miss the grid are
/// stored as empty atoms.
pub fn gabor_family(sys: &GaborSystemSpec, grid: &Grid, trunc: LatticeTruncation) -> Result<AtomFamily> {
    AtomFamily::build(*grid, trunc, sys.n_generators(), |idx| sparse_gabor_atom(sys, idx, grid))
}

/// `Σ_l Σ_{|m|≤m_max} Σ_{|n|≤n_max} |⟨φ^{P,Q}_{(m,n,l)}|f⟩|²`.
pub fn frame_sum(sys: &GaborSystemSpec, f: &GridSignal, trunc: LatticeTruncation) -> Result<FrameSum> {
    gabor_family(sys, f.grid(), trunc)?.frame_sum(f)
}

/// `D(x) = Σ_l μ_l Σ_n |φ_l(x + n q0_l)|²`, the multiplier the frame operator
/// reduces to in the painless case.
pub fn painless_density(sys: &GaborSystemSpec, x: f64) -> Result<f64> {
    sys.check_painless()?;
    sys.generators
        .iter()
        .map(|g| Ok(g.mu() * translation_power_sum(&g.window, g.q0.abs(), x)?))
        .sum()
}

/// `∫ |f|² D dx` by the same rectangle rule as the frame sums.
pub fn painless_quadrature(sys: &GaborSystemSpec, f: &GridSignal) -> Result<f64> {
    sys.check_painless()?;
    let grid = f.grid();
    let mut acc = 0.0;
    for (x, v) in grid.abscissae().zip(f.samples()) {
        let e = v.norm_sqr();
        if e > 0.0 {
            acc += e * painless_density(sys, x)?;
        }
    }
    Ok(acc * grid.dx())
}

/// Smallest common period of the translation steps, or `None` when the
/// ratios are not recognizably rational.
pub fn common_period(steps: &[f64]) -> Option<f64> {
    let base = steps.first()?.abs();
    let mut num_den = Vec::with_capacity(steps.len());
    for s in steps {
        num_den.push(rational_approx(s.abs() / base, 1000)?);
    }
    let den_lcm = num_den.iter().fold(1u64, |acc, &(_, d)| lcm(acc, d));
    let unit = base / den_lcm as f64;
    let ints_lcm = num_den.iter().fold(1u64, |acc, &(p, d)| lcm(acc, p * (den_lcm / d)));
    let period = unit * ints_lcm as f64;
    (period / base <= 1e4).then_some(period)
}

fn rational_approx(r: f64, max_den: u64) -> Option<(u64, u64)> {
    (1..=max_den).find_map(|d| {
        let p = (r * d as f64).round();
        (p >= 1.0 && ((p / d as f64) - r).abs() <= 1e-10 * r).then_some((p as u64, d))
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `D` as an exact piecewise polynomial over one common period `[0, T]`.
pub fn density_poly(sys: &GaborSystemSpec) -> Result<PiecewisePoly> {
    sys.check_painless()?;
    let steps: Vec<f64> = sys.generators.iter().map(|g| g.q0).collect();
    let period = common_period(&steps).ok_or(FrameError::IncommensurateLattice)?;
    let mut terms = Vec::new();
    for g in &sys.generators {
        let a = g.q0.abs();
        let g0 = power_sum_poly(&g.window, a)?;
        let reps = (period / a).round() as i64;
        for r in 0..reps {
            let off = r as f64 * a;
            for Segment { lo, hi, poly } in g0.segments() {
                terms.push((lo + off, hi + off, poly.shifted(off).scale(g.mu())));
            }
        }
    }
    Ok(PiecewisePoly::from_terms(0.0, period, &terms))
}

/// Exact painless bounds: the extrema of `D` over one period.
pub fn painless_exact_bounds(sys: &GaborSystemSpec) -> Result<FrameReport> {
    let d = density_poly(sys)?;
    let Extrema { inf, sup, arginf, argsup } = d.extrema();
    Ok(FrameReport::closed_form(inf, sup).with_witnesses(arginf, argsup))
}

/// Which side of the per-generator power-sum condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// Outcome of the sampled per-generator condition
/// `α/(N min μ) ≤ Σ_n |φ_l(x − n q0)|² ≤ β/(N max μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ConditionVerdict {
    Holds,
    Violated {
        x: f64,
        /// Zero-based generator index.
        generator: usize,
        value: f64,
        bound: f64,
        side: BoundSide,
    },
}

impl ConditionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionVerdict::Holds)
    }
}

/// Samples each generator's `G0` at `grid_points` abscissae of its period
/// `(0, |q0|]` and reports the first violation, scanning generators in order.
pub fn check_power_sum_condition(
    sys: &GaborSystemSpec,
    alpha: f64,
    beta: f64,
    grid_points: usize,
) -> Result<ConditionVerdict> {
    let points = grid_points.max(1);
    scan_condition(sys, alpha, beta, |g| {
        let a = g.q0.abs();
        (0..points).map(|j| a * (j + 1) as f64 / points as f64).collect()
    })
}

/// The same condition evaluated only at the given abscissae, for every
/// generator.
pub fn check_power_sum_condition_at(
    sys: &GaborSystemSpec,
    alpha: f64,
    beta: f64,
    probes: &[f64],
) -> Result<ConditionVerdict> {
    scan_condition(sys, alpha, beta, |_| probes.to_vec())
}

fn scan_condition<F>(sys: &GaborSystemSpec, alpha: f64, beta: f64, abscissae: F) -> Result<ConditionVerdict>
where
    F: Fn(&GeneratorSpec) -> Vec<f64>,
{
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(FrameError::InvalidParameter(format!(
            "need α, β > 0, got α = {alpha}, β = {beta}"
        )));
    }
    let n = sys.n_generators() as f64;
    let mus = sys.generators.iter().map(GeneratorSpec::mu);
    let min_mu = mus.clone().fold(f64::INFINITY, f64::min);
    let max_mu = mus.fold(f64::NEG_INFINITY, f64::max);
    let lo_bound = alpha / (n * min_mu);
    let hi_bound = beta / (n * max_mu);
    let slack = 1e-12;
    for (l, g) in sys.generators.iter().enumerate() {
        let a = g.q0.abs();
        for x in abscissae(g) {
            let v = translation_power_sum(&g.window, a, x)?;
            if v < lo_bound * (1.0 - slack) {
                return Ok(ConditionVerdict::Violated { x, generator: l, value: v, bound: lo_bound, side: BoundSide::Lower });
            }
            if v > hi_bound * (1.0 + slack) {
                return Ok(ConditionVerdict::Violated { x, generator: l, value: v, bound: hi_bound, side: BoundSide::Upper });
            }
        }
    }
    Ok(ConditionVerdict::Holds)
}

/// Single-window bounds for `{e^{2πimbx} g(x − na)}`:
/// `γ = (1/b) inf_{[0,a]} (G0 − G1)` and `β = (1/b) sup_{[0,a]} (G0 + G1)`.
///
/// Exact piecewise extrema are merged with a `grid_points` midpoint scan of
/// the directly enumerated sums. A non-positive `γ` is clamped to 0 and the
/// report is marked as carrying no certified lower bound.
pub fn christensen_bounds(w: &PiecewiseWindow, a: f64, b: f64, grid_points: usize) -> Result<FrameReport> {
    if !(a > 0.0 && b > 0.0) {
        return Err(FrameError::InvalidParameter(format!("need a, b > 0, got a = {a}, b = {b}")));
    }
    let step = 1.0 / b;
    let (mut lower, mut upper) = correlation_extrema(w, a, step)?;
    let points = grid_points.max(1);
    for j in 0..points {
        let x = a * (j as f64 + 0.5) / points as f64;
        let g0 = translation_power_sum(w, a, x)?;
        let g1 = correlation_sum(w, a, step, x)?;
        lower = lower.merge(Extrema { inf: g0 - g1, sup: g0 - g1, arginf: x, argsup: x });
        upper = upper.merge(Extrema { inf: g0 + g1, sup: g0 + g1, arginf: x, argsup: x });
    }
    let gamma = lower.inf / b;
    let beta = upper.sup / b;
    Ok(FrameReport {
        lower: gamma.max(0.0),
        upper: beta,
        method: BoundMethod::GridExtrema,
        witnesses: Some((lower.arginf, upper.argsup)),
        truncation_defect: 0.0,
        lower_certified: gamma > 0.0,
        tail_flagged: false,
    })
}

/// Empirical bracket `min/max frame_sum(f)/‖f‖²` over a signal battery.
pub fn oracle_bounds(
    sys: &GaborSystemSpec,
    signals: &[GridSignal],
    trunc: LatticeTruncation,
) -> Result<FrameReport> {
    let first = signals
        .first()
        .ok_or_else(|| FrameError::InvalidParameter("empty signal battery".into()))?;
    let fam = gabor_family(sys, first.grid(), trunc)?;
    let mut rep = fam.oracle_bounds(signals)?;
    rep.tail_flagged = rep.truncation_defect > TAIL_FLAG_THRESHOLD;
    Ok(rep)
}
