//! Extended-affine representations, the intertwiner `U_ε`, and the wavelet
//! systems obtained on the contraction lattice.
//!
//! `U_ε f(x) = √ε · e^{−εx/2} · f̂(e^{−εx})` maps the Hardy space onto
//! `L²(ℝ)`; the extra `√ε` makes it an isometry. Conjugating
//! `η^α ⊗ χ_β` by `U_ε` gives the translate-and-chirp representation
//! `ζ_ε(a, b, y) f(x) = e^{iβy} e^{iαb e^{−εx}} f(x − ln(a)/ε)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::family::{AtomFamily, AtomIndex, FrameSum, LatticeTruncation, SparseAtom};
use crate::numerics::{
    fourier_at, frequency_grid, inverse_fourier_transform, negative_frequency_fraction, norm_sq,
    Grid, GridSignal,
};
use crate::report::FrameReport;
use crate::weyl_heisenberg::{gabor_family, GaborSystemSpec};

/// Largest negative-frequency energy fraction accepted by [`u_epsilon`].
pub const HARDY_TOLERANCE: f64 = 1e-6;

/// Largest share of a signal's energy that [`affine_rep`] may push off the grid.
pub const SUPPORT_LOSS_TOLERANCE: f64 = 1e-6;

/// Parameters of `η^α ⊗ χ_β`: dilation-direction `α ≠ 0` and character `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EAParams {
    alpha: f64,
    beta: f64,
}

impl EAParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(FrameError::InvalidParameter(format!(
                "need finite α ≠ 0 and finite β, got α = {alpha}, β = {beta}"
            )));
        }
        Ok(EAParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

fn check_scale(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(FrameError::InvalidParameter(format!("dilation a must be positive, got {a}")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(FrameError::InvalidParameter(format!("ε must lie in (0, 1], got {epsilon}")))
    }
}

/// Linear interpolation of the samples at abscissa `t`; zero off the grid.
fn interpolate(f: &GridSignal, t: f64) -> Complex64 {
    let grid = f.grid();
    let pos = (t - grid.x_min()) / grid.dx();
    let i = pos.floor();
    if i < 0.0 || i as usize + 1 >= grid.len() {
        // the final sample is still reachable exactly
        if i as usize + 1 == grid.len() && pos == i {
            return f.samples()[i as usize];
        }
        return Complex64::new(0.0, 0.0);
    }
    let k = i as usize;
    let w = pos - i;
    f.samples()[k] * (1.0 - w) + f.samples()[k + 1] * w
}

/// `(η^α(a, b) f)(x) = a^{−1/2} f((x + αb)/a)`, resampled by linear
/// interpolation. Fails if the image of the signal's energy leaves the grid.
pub fn affine_rep(alpha: f64, a: f64, b: f64, f: &GridSignal) -> Result<GridSignal> {
    check_scale(a)?;
    let grid = *f.grid();
    let total = norm_sq(f);
    let lost: f64 = grid
        .abscissae()
        .zip(f.samples())
        .filter(|(y, _)| {
            let x = a * y - alpha * b;
            x < grid.x_min() || x > grid.x_max()
        })
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * grid.dx();
    if total > 0.0 && lost > SUPPORT_LOSS_TOLERANCE * total {
        return Err(FrameError::OutOfDomain(format!(
            "dilation a = {a}, b = {b} moves {:.3e} of the energy off the grid",
            lost / total
        )));
    }
    let amp = 1.0 / a.sqrt();
    Ok(GridSignal::from_fn(grid, |x| interpolate(f, (x + alpha * b) / a) * amp))
}

/// `((η^α ⊗ χ_β)(a, b, y) f)(x) = e^{iβy} a^{−1/2} f((x + αb)/a)`.
pub fn ea_rep(params: EAParams, a: f64, b: f64, y: f64, f: &GridSignal) -> Result<GridSignal> {
    let out = affine_rep(params.alpha, a, b, f)?;
    Ok(out.scaled(Complex64::from_polar(1.0, params.beta * y)))
}

/// `U_ε f(x) = √ε · e^{−εx/2} · f̂(e^{−εx})`, with `f̂` evaluated by direct
/// quadrature at each `e^{−εx_i}`. The samples stand for a signal band-limited
/// to the grid's Nyquist frequency `π/dx`, so `f̂` is taken as zero beyond it
/// rather than letting the quadrature alias.
pub fn u_epsilon(f: &GridSignal, epsilon: f64) -> Result<GridSignal> {
    check_epsilon(epsilon)?;
    let neg = negative_frequency_fraction(f);
    if neg >= HARDY_TOLERANCE {
        return Err(FrameError::NotHardy(neg));
    }
    let grid = *f.grid();
    let nyquist = std::f64::consts::PI / grid.dx();
    let omegas: Vec<f64> = grid.abscissae().map(|x| (-epsilon * x).exp()).collect();
    let spec = fourier_at(f, &omegas);
    let root = epsilon.sqrt();
    let samples = grid
        .abscissae()
        .zip(omegas.iter().zip(spec))
        .map(|(x, (&w, v))| {
            if w >= nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                v * (root * (-0.5 * epsilon * x).exp())
            }
        })
        .collect();
    GridSignal::new(grid, samples)
}

/// `U_ε⁻¹`: spectrum `f̂(s) = g(−ln(s)/ε)/√(ε s)` on positive frequency
/// bins, zero elsewhere, transformed back to the spatial grid.
pub fn u_epsilon_inverse(g: &GridSignal, epsilon: f64) -> Result<GridSignal> {
    check_epsilon(epsilon)?;
    let grid = *g.grid();
    let fgrid = frequency_grid(&grid);
    let spectrum = GridSignal::from_fn(fgrid, |s| {
        if s <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        interpolate(g, -s.ln() / epsilon) / (epsilon * s).sqrt()
    });
    inverse_fourier_transform(&spectrum, &grid)
}

/// `(ζ_ε^{β,α}(a, b, y) f)(x) = e^{iβy} e^{iαb e^{−εx}} f(x − ln(a)/ε)`.
///
/// The translation is rounded to whole samples.
pub fn zeta_apply(
    params: EAParams,
    epsilon: f64,
    a: f64,
    b: f64,
    y: f64,
    f: &GridSignal,
) -> Result<GridSignal> {
    check_epsilon(epsilon)?;
    check_scale(a)?;
    let grid = *f.grid();
    let shift = -a.ln() / epsilon;
    if shift.abs() > grid.width() {
        return Err(FrameError::OutOfDomain(format!(
            "translation −ln(a)/ε = {shift} exceeds the grid width {}",
            grid.width()
        )));
    }
    let k = (shift / grid.dx()).round() as i64;
    let n = grid.len() as i64;
    let global = Complex64::from_polar(1.0, params.beta * y);
    let src = f.samples();
    let samples = (0..n)
        .map(|i| {
            let j = i + k;
            if !(0..n).contains(&j) {
                return Complex64::new(0.0, 0.0);
            }
            let x = grid.x(i as usize);
            src[j as usize] * global * Complex64::from_polar(1.0, params.alpha * b * (-epsilon * x).exp())
        })
        .collect();
    GridSignal::new(grid, samples)
}

/// Contraction parameters: `ε ∈ (0, 1]`, the constant `c > 0`, offsets
/// `u0 + v0 = Q`, the painless base system and its frame bounds
/// `α_o ≤ β_o`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionSpec {
    epsilon: f64,
    c: f64,
    u0: f64,
    v0: f64,
    base: GaborSystemSpec,
    alpha_o: f64,
    beta_o: f64,
}

impl ContractionSpec {
    pub fn new(
        epsilon: f64,
        c: f64,
        u0: f64,
        v0: f64,
        base: GaborSystemSpec,
        alpha_o: f64,
        beta_o: f64,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(FrameError::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !(alpha_o > 0.0 && alpha_o <= beta_o && beta_o.is_finite()) {
            return Err(FrameError::InvalidParameter(format!(
                "need 0 < α_o ≤ β_o, got α_o = {alpha_o}, β_o = {beta_o}"
            )));
        }
        let q = base.wh().q();
        if (u0 + v0 - q).abs() > 1e-12 * (1.0 + q.abs()) {
            return Err(FrameError::InvalidParameter(format!(
                "offsets must satisfy u0 + v0 = Q, got {u0} + {v0} ≠ {q}"
            )));
        }
        base.check_painless()?;
        Ok(ContractionSpec { epsilon, c, u0, v0, base, alpha_o, beta_o })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(ContractionSpec { epsilon, ..self.clone() })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn base(&self) -> &GaborSystemSpec {
        &self.base
    }

    pub fn alpha_o(&self) -> f64 {
        self.alpha_o
    }

    pub fn beta_o(&self) -> f64 {
        self.beta_o
    }

    /// `u(ε) = u0 + P/ε`.
    pub fn u(&self) -> f64 {
        self.u0 + self.base.wh().p() / self.epsilon
    }

    /// `v(ε) = v0 − P/ε`.
    pub fn v(&self) -> f64 {
        self.v0 - self.base.wh().p() / self.epsilon
    }

    /// `ln(ε + c) − ln c`.
    pub fn log_gain(&self) -> f64 {
        (self.epsilon / self.c).ln_1p()
    }

    fn v_checked(&self) -> Result<f64> {
        let v = self.v();
        let scale = self.v0.abs().max((self.base.wh().p() / self.epsilon).abs());
        if v.abs() <= 1e-12 * scale {
            Err(FrameError::DegenerateV(self.epsilon))
        } else {
            Ok(v)
        }
    }
}

/// Lattice point `(a_n, b_mn, y_mn)` of the extended affine group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionLatticePoint {
    pub a_n: f64,
    pub b_mn: f64,
    pub y_mn: f64,
}

/// `a_n = e^{−εnq0}`,
/// `b_mn = β_o a_n π m / (α_o v(ε) (ln(ε+c) − ln c) c μ_l)`,
/// `y_mn = b_mn · ln(a_n) a_n/(a_n − 1)`, taking the factor's limit 1 at `n = 0`.
pub fn contraction_lattice(spec: &ContractionSpec, m: i64, n: i64, l: usize) -> Result<ContractionLatticePoint> {
    let v = spec.v_checked()?;
    let g = spec.base.generators().get(l).ok_or_else(|| {
        FrameError::InvalidParameter(format!("generator index {l} out of range"))
    })?;
    let exponent = -spec.epsilon * n as f64 * g.q0();
    let a_n = exponent.exp();
    let b_mn = spec.beta_o * a_n * std::f64::consts::PI * m as f64
        / (spec.alpha_o * v * spec.log_gain() * spec.c * g.mu());
    let factor = if n == 0 { 1.0 } else { exponent * a_n / exponent.exp_m1() };
    Ok(ContractionLatticePoint { a_n, b_mn, y_mn: b_mn * factor })
}

fn sparse_wavelet_atom(
    spec: &ContractionSpec,
    idx: AtomIndex,
    point: ContractionLatticePoint,
    grid: &Grid,
) -> Result<SparseAtom> {
    let g = &spec.base.generators()[idx.l];
    let (wlo, whi) = g.window().support();
    let shift = idx.n as f64 * g.q0();
    let (start, end) = grid.index_range(wlo - shift, whi - shift);
    if start >= end {
        return Ok(SparseAtom::empty());
    }
    let eps = spec.epsilon;
    let chirp = spec.v() * point.b_mn;
    let global = spec.u() * point.y_mn;
    let values = (start..end)
        .map(|i| {
            let x = grid.x(i);
            let t = x + shift;
            let amp = (-0.5 * eps * t).exp() * g.window().eval(t);
            Complex64::from_polar(amp, global + chirp * (-eps * x).exp())
        })
        .collect();
    Ok(SparseAtom { start, values })
}

/// Samples of `ζ_ε^{u(ε),v(ε)}(a_n, b_mn, y_mn)(T_ε φ_l)`, i.e.
/// `e^{iu y_mn} e^{iv b_mn e^{−εx}} e^{−ε(x+nq0)/2} φ_l(x + nq0)`.
pub fn wavelet_atom(spec: &ContractionSpec, m: i64, n: i64, l: usize, grid: &Grid) -> Result<GridSignal> {
    let point = contraction_lattice(spec, m, n, l)?;
    let shift = n as f64 * spec.base.generators()[l].q0();
    if shift.abs() > grid.width() {
        return Err(FrameError::OutOfDomain(format!(
            "translation n·q0 = {shift} exceeds the grid width {}",
            grid.width()
        )));
    }
    Ok(sparse_wavelet_atom(spec, AtomIndex { m, n, l }, point, grid)?.to_signal(*grid))
}

/// The truncated wavelet family.
pub fn wavelet_family(spec: &ContractionSpec, grid: &Grid, trunc: LatticeTruncation) -> Result<AtomFamily> {
    wavelet_family_with_phases(spec, grid, trunc, |_, y| y)
}

/// The truncated wavelet family with every `y_mn` replaced by
/// `remap(index, y_mn)`.
pub fn wavelet_family_with_phases<F>(
    spec: &ContractionSpec,
    grid: &Grid,
    trunc: LatticeTruncation,
    remap: F,
) -> Result<AtomFamily>
where
    F: Fn(AtomIndex, f64) -> f64 + Sync,
{
    AtomFamily::build(*grid, trunc, spec.base.n_generators(), |idx| {
        let mut point = contraction_lattice(spec, idx.m, idx.n, idx.l)?;
        point.y_mn = remap(idx, point.y_mn);
        sparse_wavelet_atom(spec, idx, point, grid)
    })
}

pub fn wavelet_frame_sum(spec: &ContractionSpec, f: &GridSignal, trunc: LatticeTruncation) -> Result<FrameSum> {
    wavelet_family(spec, f.grid(), trunc)?.frame_sum(f)
}

/// Closed-form wavelet frame bounds
/// `(α_o² c/β_o)·(ln(ε+c) − ln c)/ε` and `α_o c·(ln(ε+c) − ln c)/ε`.
pub fn contracted_bounds(spec: &ContractionSpec) -> FrameReport {
    let (lo, hi) = contracted_bound_values(spec.epsilon, spec.c, spec.alpha_o, spec.beta_o);
    FrameReport::closed_form(lo, hi)
}

pub(crate) fn contracted_bound_values(epsilon: f64, c: f64, alpha_o: f64, beta_o: f64) -> (f64, f64) {
    let ratio = (epsilon / c).ln_1p() / epsilon;
    (alpha_o * alpha_o * c / beta_o * ratio, alpha_o * c * ratio)
}

/// One row of an ε-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Extremes of `wavelet_frame_sum/‖f‖²` over the battery; `None` where
    /// `v(ε) = 0` leaves the lattice undefined.
    pub oracle_min: Option<f64>,
    pub oracle_max: Option<f64>,
    /// Largest `wavelet_frame_sum / gabor_frame_sum` over the battery.
    pub max_wavelet_to_gabor: Option<f64>,
    /// Whether `wavelet ≤ gabor·(1+tol) ≤ β_o‖f‖²·(1+tol)` held for every signal.
    pub chain_holds: Option<bool>,
}

/// Outcome of sweeping ε toward 0⁺.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub rows: Vec<SweepRow>,
    /// Closed-form upper bounds strictly increase as ε decreases.
    pub upper_monotone: bool,
    /// Every non-degenerate row satisfied its chain.
    pub chain_holds: bool,
    /// Largest `gabor_frame_sum/‖f‖²` over the battery.
    pub gabor_max_ratio: f64,
}

impl LimitReport {
    pub fn passed(&self) -> bool {
        self.upper_monotone && self.chain_holds
    }
}

/// For each ε of a descending sweep, evaluates the closed-form wavelet
/// bounds and the wavelet frame sums of the battery, and checks
/// `wavelet_sum ≤ gabor_sum·(1+tol) ≤ β_o‖f‖²·(1+tol)`.
pub fn contraction_limit_check(
    spec: &ContractionSpec,
    signals: &[GridSignal],
    eps_sweep: &[f64],
    trunc: LatticeTruncation,
    tol: f64,
) -> Result<LimitReport> {
    if eps_sweep.is_empty() {
        return Err(FrameError::InvalidParameter("ε sweep is empty".into()));
    }
    let grid = *signals
        .first()
        .ok_or_else(|| FrameError::InvalidParameter("empty signal battery".into()))?
        .grid();
    let gabor = gabor_family(&spec.base, &grid, trunc)?;
    let mut gabor_sums = Vec::with_capacity(signals.len());
    let mut norms = Vec::with_capacity(signals.len());
    for (k, f) in signals.iter().enumerate() {
        let nsq = norm_sq(f);
        if nsq == 0.0 {
            return Err(FrameError::ZeroSignal(k));
        }
        norms.push(nsq);
        gabor_sums.push(gabor.frame_sum(f)?.total);
    }
    let gabor_max_ratio = gabor_sums.iter().zip(&norms).map(|(g, n)| g / n).fold(0.0, f64::max);

    let mut rows = Vec::with_capacity(eps_sweep.len());
    for &eps in eps_sweep {
        let at = spec.with_epsilon(eps)?;
        let bounds = contracted_bounds(&at);
        let mut row = SweepRow {
            epsilon: eps,
            lower_bound: bounds.lower,
            upper_bound: bounds.upper,
            oracle_min: None,
            oracle_max: None,
            max_wavelet_to_gabor: None,
            chain_holds: None,
        };
        match wavelet_family(&at, &grid, trunc) {
            Err(FrameError::DegenerateV(_)) => {}
            Err(e) => return Err(e),
            Ok(fam) => {
                let (mut lo, mut hi, mut worst) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
                let mut ok = true;
                for ((f, g), nsq) in signals.iter().zip(&gabor_sums).zip(&norms) {
                    let w = fam.frame_sum(f)?.total;
                    lo = lo.min(w / nsq);
                    hi = hi.max(w / nsq);
                    worst = worst.max(w / g);
                    ok &= w <= g * (1.0 + tol) && *g <= spec.beta_o * nsq * (1.0 + tol);
                }
                row.oracle_min = Some(lo);
                row.oracle_max = Some(hi);
                row.max_wavelet_to_gabor = Some(worst);
                row.chain_holds = Some(ok);
            }
        }
        rows.push(row);
    }
    let upper_monotone = rows.windows(2).all(|w| {
        // sweep is descending in ε; bounds must rise
        (w[1].epsilon < w[0].epsilon) == (w[1].upper_bound > w[0].upper_bound)
    });
    let chain_holds = rows.iter().all(|r| r.chain_holds != Some(false));
    Ok(LimitReport { rows, upper_monotone, chain_holds, gabor_max_ratio })
}
