//! Paley-Wiener-type perturbation of Gabor and wavelet frames.
//!
//! If `Σ|⟨f, φ − φ̃⟩|² ≤ M·min(Σ|⟨f, φ⟩|², Σ|⟨f, φ̃⟩|²) + λ‖f‖²` and
//! `λ < α_o`, the perturbed family is a frame with bounds
//! `(1 − λ/α_o)α_o / (2(M+1))` and `2β_o(M+1) + λ`. The condition is checked
//! here over a finite battery of signals, so a pass is evidence only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::extended_affine::contracted_bound_values;
use crate::family::AtomFamily;
use crate::numerics::{norm_sq, random_test_signals, GridSignal, SignalKind};
use crate::report::FrameReport;

/// Relative slack allowed when comparing the two sides of the condition.
pub const CONDITION_SLACK: f64 = 1e-10;

/// Floor on the min-term, relative to `‖f‖²`, used by [`estimate_constants`].
pub const MIN_TERM_FLOOR: f64 = 1e-12;

/// Size of the default [`perturbation_battery`].
pub const DEFAULT_BATTERY_SIZE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConstants {
    #[serde(rename = "M")]
    m: f64,
    lambda: f64,
}

impl PerturbationConstants {
    pub fn new(m: f64, lambda: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite() && lambda >= 0.0 && lambda.is_finite()) {
            return Err(FrameError::InvalidParameter(format!(
                "perturbation constants must be finite and non-negative, got M = {m}, λ = {lambda}"
            )));
        }
        Ok(PerturbationConstants { m, lambda })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// `((1 − λ/α_o)α_o / (2(M+1)), 2β_o(M+1) + λ)`.
pub fn perturbed_bounds(alpha_o: f64, beta_o: f64, k: PerturbationConstants) -> Result<FrameReport> {
    if !(alpha_o > 0.0 && beta_o >= alpha_o) {
        return Err(FrameError::InvalidParameter(format!(
            "need 0 < α_o ≤ β_o, got α_o = {alpha_o}, β_o = {beta_o}"
        )));
    }
    if k.lambda >= alpha_o {
        return Err(FrameError::LambdaTooLarge { lambda: k.lambda, alpha: alpha_o });
    }
    let lower = (1.0 - k.lambda / alpha_o) * alpha_o / (2.0 * (k.m + 1.0));
    let upper = 2.0 * beta_o * (k.m + 1.0) + k.lambda;
    Ok(FrameReport::closed_form(lower, upper))
}

/// Perturbed bounds of a wavelet frame whose reference bounds are the
/// contracted ones at `(ε, c, α_o, β_o)`.
pub fn wavelet_perturbed_bounds(
    epsilon: f64,
    c: f64,
    alpha_o: f64,
    beta_o: f64,
    k: PerturbationConstants,
) -> Result<FrameReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0 && c > 0.0) {
        return Err(FrameError::InvalidParameter(format!(
            "need ε ∈ (0, 1] and c > 0, got ε = {epsilon}, c = {c}"
        )));
    }
    let (lo, hi) = contracted_bound_values(epsilon, c, alpha_o, beta_o);
    perturbed_bounds(lo, hi, k)
}

/// One signal's evaluation of the perturbation condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionTerms {
    pub difference: f64,
    pub base: f64,
    pub perturbed: f64,
    pub norm_sq: f64,
}

impl ConditionTerms {
    fn min_term(&self) -> f64 {
        self.base.min(self.perturbed)
    }

    fn rhs(&self, k: PerturbationConstants) -> f64 {
        k.m * self.min_term() + k.lambda * self.norm_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PerturbationVerdict {
    Holds,
    Violated { signal: usize, lhs: f64, rhs: f64 },
}

impl PerturbationVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, PerturbationVerdict::Holds)
    }
}

/// Both sides of the condition for every signal, in battery order.
pub fn condition_terms(base: &AtomFamily, pert: &AtomFamily, signals: &[GridSignal]) -> Result<Vec<ConditionTerms>> {
    base.check_aligned(pert)?;
    signals
        .par_iter()
        .map(|f| {
            Ok(ConditionTerms {
                difference: base.difference_sum(pert, f)?,
                base: base.frame_sum(f)?.total,
                perturbed: pert.frame_sum(f)?.total,
                norm_sq: norm_sq(f),
            })
        })
        .collect()
}

/// Finds the first battery signal violating the condition, if any.
pub fn verify_condition(
    base: &AtomFamily,
    pert: &AtomFamily,
    k: PerturbationConstants,
    signals: &[GridSignal],
) -> Result<PerturbationVerdict> {
    Ok(verdict_from_terms(&condition_terms(base, pert, signals)?, k))
}

pub fn verdict_from_terms(terms: &[ConditionTerms], k: PerturbationConstants) -> PerturbationVerdict {
    for (signal, t) in terms.iter().enumerate() {
        let rhs = t.rhs(k);
        if t.difference > rhs * (1.0 + CONDITION_SLACK) {
            return PerturbationVerdict::Violated { signal, lhs: t.difference, rhs };
        }
    }
    PerturbationVerdict::Holds
}

/// A battery for the condition: up to `count/10` atom differences `φ_k − φ̃_k`
/// taken nearest the lattice origin, then compact and band-limited random
/// signals in equal parts.
pub fn perturbation_battery(base: &AtomFamily, pert: &AtomFamily, count: usize, seed: u64) -> Result<Vec<GridSignal>> {
    base.check_aligned(pert)?;
    let grid = *base.grid();
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by_key(|&k| {
        let i = base.indices()[k];
        (i.m.unsigned_abs() + i.n.unsigned_abs(), i.l, i.m, i.n)
    });
    let mut out = Vec::with_capacity(count);
    for k in order {
        if out.len() >= count / 10 {
            break;
        }
        let d = base.atoms()[k].to_signal(grid).sub(&pert.atoms()[k].to_signal(grid))?;
        if norm_sq(&d) > 0.0 {
            out.push(d);
        }
    }
    let rest = count - out.len();
    out.extend(random_test_signals(&grid, rest - rest / 2, seed, SignalKind::Compact));
    out.extend(random_test_signals(&grid, rest / 2, seed, SignalKind::Bandlimited));
    Ok(out)
}

/// Smallest `M` making the condition hold over the battery with
/// `λ = lambda_fraction·α_o`.
pub fn estimate_constants(
    base: &AtomFamily,
    pert: &AtomFamily,
    signals: &[GridSignal],
    lambda_fraction: f64,
    alpha_o: f64,
) -> Result<PerturbationConstants> {
    let terms = condition_terms(base, pert, signals)?;
    estimate_from_terms(&terms, lambda_fraction, alpha_o)
}

pub fn estimate_from_terms(terms: &[ConditionTerms], lambda_fraction: f64, alpha_o: f64) -> Result<PerturbationConstants> {
    if !(0.0..1.0).contains(&lambda_fraction) {
        return Err(FrameError::InvalidParameter(format!(
            "lambda_fraction must lie in [0, 1), got {lambda_fraction}"
        )));
    }
    let lambda = lambda_fraction * alpha_o;
    let mut m: f64 = 0.0;
    for (k, t) in terms.iter().enumerate() {
        if t.norm_sq == 0.0 {
            return Err(FrameError::ZeroSignal(k));
        }
        let floor = MIN_TERM_FLOOR * t.norm_sq;
        let need = (t.difference - lambda * t.norm_sq) / t.min_term().max(floor);
        m = m.max(need);
    }
    PerturbationConstants::new(m, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(m: f64, l: f64) -> PerturbationConstants {
        PerturbationConstants::new(m, l).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let r = perturbed_bounds(4.0, 16.0, k(0.0, 0.0)).unwrap();
        assert_eq!((r.lower, r.upper), (2.0, 32.0));
        let r = perturbed_bounds(4.0, 16.0, k(1.0, 2.0)).unwrap();
        assert_eq!((r.lower, r.upper), (0.5, 66.0));
        assert!(matches!(
            perturbed_bounds(4.0, 16.0, k(0.0, 4.0)),
            Err(FrameError::LambdaTooLarge { .. })
        ));
        let r = perturbed_bounds(4.0, 16.0, k(0.01, 0.0)).unwrap();
        assert!((r.lower - 4.0 / 2.02).abs() < 1e-12 && (r.upper - 32.32).abs() < 1e-12);
    }

    #[test]
    fn negative_constants_rejected() {
        assert!(PerturbationConstants::new(-1.0, 0.0).is_err());
        assert!(PerturbationConstants::new(0.0, -0.5).is_err());
    }

    #[test]
    fn wavelet_specializations() {
        let r = wavelet_perturbed_bounds(0.5, 1.0, 4.0, 16.0, k(0.0, 0.0)).unwrap();
        let l = 1.5f64.ln() / 0.5;
        assert!((r.lower - l / 2.0).abs() < 1e-15 && (r.upper - 8.0 * l).abs() < 1e-14);
        let near = wavelet_perturbed_bounds(1e-6, 1.0, 4.0, 16.0, k(0.3, 0.2)).unwrap();
        let lim = perturbed_bounds(1.0, 4.0, k(0.3, 0.2)).unwrap();
        assert!((near.lower - lim.lower).abs() < 1e-5 && (near.upper - lim.upper).abs() < 1e-5);
        let r = wavelet_perturbed_bounds(1.0, 1.0, 4.0, 16.0, k(1.0, 0.0)).unwrap();
        let ln2 = 2f64.ln();
        assert!((r.lower - ln2 / 4.0).abs() < 1e-15);
        assert!((r.upper - 16.0 * ln2).abs() < 1e-14);
        assert!(matches!(
            wavelet_perturbed_bounds(0.5, 1.0, 4.0, 16.0, k(0.0, l)),
            Err(FrameError::LambdaTooLarge { .. })
        ));
    }

    #[test]
    fn estimate_from_synthetic_terms() {
        let t = |d: f64, b: f64, p: f64| ConditionTerms { difference: d, base: b, perturbed: p, norm_sq: 1.0 };
        let terms = [t(0.04, 4.0, 4.84), t(0.16, 16.0, 19.36)];
        let est = estimate_from_terms(&terms, 0.0, 4.0).unwrap();
        assert!((est.m() - 0.01).abs() < 1e-15);
        assert!(verdict_from_terms(&terms, est).holds());
        let tighter = k(0.009, 0.0);
        assert_eq!(
            verdict_from_terms(&terms, tighter),
            PerturbationVerdict::Violated { signal: 0, lhs: 0.04, rhs: 0.036 }
        );
        let est = estimate_from_terms(&terms, 0.5, 4.0).unwrap();
        assert_eq!((est.m(), est.lambda()), (0.0, 2.0));
        let zero = [ConditionTerms { norm_sq: 0.0, ..terms[0] }];
        assert_eq!(estimate_from_terms(&zero, 0.0, 4.0), Err(FrameError::ZeroSignal(0)));
    }
}
