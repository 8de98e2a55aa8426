use serde::{Deserialize, Serialize};

/// How a pair of bounds was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    ClosedForm,
    GridExtrema,
    Oracle,
}

/// Lower/upper frame-bound estimates with provenance and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
    /// Abscissae (or signal indices, for oracle brackets) realizing the
    /// lower and upper values.
    pub witnesses: Option<(f64, f64)>,
    /// Largest relative contribution of the outermost lattice shell.
    pub truncation_defect: f64,
    /// False when the lower estimate was non-positive and got clamped to 0.
    pub lower_certified: bool,
    /// Set when the outermost shell carries more than
    /// [`TAIL_FLAG_THRESHOLD`] of a frame sum.
    pub tail_flagged: bool,
}

/// Relative last-shell contribution above which a report is flagged.
pub const TAIL_FLAG_THRESHOLD: f64 = 1e-4;

impl FrameReport {
    pub fn closed_form(lower: f64, upper: f64) -> Self {
        FrameReport {
            lower,
            upper,
            method: BoundMethod::ClosedForm,
            witnesses: None,
            truncation_defect: 0.0,
            lower_certified: lower > 0.0,
            tail_flagged: false,
        }
    }

    pub fn with_witnesses(mut self, lo: f64, hi: f64) -> Self {
        self.witnesses = Some((lo, hi));
        self
    }

    /// Whether `[lower, upper]` contains `value` after widening both ends by
    /// the relative tolerance `tol`.
    pub fn brackets(&self, value: f64, tol: f64) -> bool {
        value >= self.lower * (1.0 - tol) && value <= self.upper * (1.0 + tol)
    }
}
