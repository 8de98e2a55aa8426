//! Frame bounds for Gabor systems generated by the Weyl-Heisenberg group,
//! wavelet systems generated by the extended affine group, and the group
//! contraction that carries one into the other.
//!
//! Windows are compactly supported piecewise polynomials, so the painless
//! density and the correlation sums are themselves piecewise polynomial and
//! their extrema can be located exactly. Everything that depends on a signal
//! is evaluated on a uniform [`Grid`] with the rectangle rule.

pub mod error;
pub mod extended_affine;
pub mod family;
pub mod numerics;
pub mod perturbation;
pub mod piecewise;
pub mod poly;
pub mod report;
pub mod weyl_heisenberg;

pub use error::{FrameError, Result};
pub use extended_affine::{
    contracted_bounds, contraction_lattice, contraction_limit_check, ContractionLatticePoint, ContractionSpec,
    EAParams, LimitReport, SweepRow,
};
pub use family::{AtomFamily, AtomIndex, FrameSum, LatticeTruncation};
pub use numerics::{norm_sq, random_test_signals, Grid, GridSignal, SignalKind};
pub use num_complex::Complex64;
pub use perturbation::{PerturbationConstants, PerturbationVerdict};
pub use piecewise::{PiecewiseWindow, WindowPiece};
pub use report::{BoundMethod, FrameReport};
pub use weyl_heisenberg::{BoundSide, ConditionVerdict, GaborSystemSpec, GeneratorSpec, WHParams};
