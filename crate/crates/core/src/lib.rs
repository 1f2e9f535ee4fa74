//! Reconstruction of 3D ice-bottom surfaces from radar tomography slices.
//!
//! The input is a sequence of noisy topographic slices (an `l x phi x rho`
//! intensity volume) with known air-surface labels and optional per-slice
//! bottom-bin constraints. The output is a surface: one row label per
//! (slice, column). Reconstruction minimizes a grid-MRF energy combining a
//! learned template appearance term, air/bin hard constraints, and a
//! truncated log-Gaussian smoothness prior, using sequential tree-reweighted
//! message passing; per-slice Viterbi solvers provide exact 2D baselines.
//!
//! The crate also ships parameter training from labeled surfaces, a seeded
//! synthetic-data generator, evaluation metrics, and a versioned on-disk
//! container format.

pub mod baselines;
pub mod dataio;
pub mod energy;
pub mod error;
pub mod eval;
pub mod msgpass;
pub mod synth;
pub mod training;
pub mod trw;
pub mod types;

pub use energy::{build_unary, total_energy, UnaryTable};
pub use error::{DataError, ModelError};
pub use msgpass::{Message, MessageKernel};
pub use types::{
    feasible_label_range, validate_sequence, EnergyParams, ExtraEvidence, Pin, RangeConstraint,
    Surface, TemplateModel, TopoSequence,
};
