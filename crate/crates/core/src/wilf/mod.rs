//! Wilf classes of patterns inside a class: exact avoider series, the
//! horizon that makes agreement conclusive, and structural moves predicting
//! equivalences.

mod orbits;
mod report;
mod signature;

use thiserror::Error;

use crate::automaton::ClassError;
use crate::word::WordError;

pub use orbits::{
    block_shift_orbit, class_symmetries, is_unbounded_polynomial, loop_block_shuffles, move_poly, shuffle_equivalents,
    symmetry_orbit, MoveFailure, MoveOptions, MoveOutcome,
};
pub use report::{collapse_report, verify_predictions, CollapseReport, CollapseRow, Orbit, OrbitKind, PredictionReport};
pub use signature::{
    avoider_series, class_level, signature_horizon, wilf_partition, Horizon, WilfPartition, WilfSignature,
};

#[derive(Debug, Error)]
pub enum WilfError {
    #[error("horizon {max} is below the pattern size {k}")]
    HorizonTooSmall { max: usize, k: usize },
    #[error("letters are not permutations")]
    NotPermutationClass,
    #[error("class is not sum closed")]
    NotSumClosed,
    #[error("class is not an unbounded polynomial class")]
    NotPolynomial,
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("move refused: {0}")]
    Move(MoveFailure),
}
