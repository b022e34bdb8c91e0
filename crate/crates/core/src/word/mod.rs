//! Weighted alphabets and words, the greedy embedding order, and the
//! generating-function identities built on it.

mod alphabet;
mod order;
mod series;

use thiserror::Error;

pub use alphabet::{Alphabet, Letter, LetterId, OrderMode, Payload, Word};
pub use order::{
    finest_incompatible_parts, incompatible, is_incompatible_factorisation, leq, leq_star,
    shuffle_closure, shuffle_orbit, split_at_cuts, validate_embedding_order,
    validate_embedding_order_with, Axiom, OrderReport,
};
pub use series::{
    check_factorisation_identity, check_quotient_identity, series_a, series_i, series_i_oracle,
    series_i_star, series_i_star_oracle, TruncatedSeries,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("words belong to different alphabets")]
    MixedAlphabets,
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("letter {0} is not a sum-indecomposable permutation")]
    NotIndecomposable(String),
    #[error("letter {0:?} has weight 0")]
    ZeroWeight(String),
    #[error("invalid letter name {0:?}")]
    BadLetterName(String),
    #[error("duplicate letter {0}")]
    DuplicateLetter(String),
    #[error("operation needs a permutation alphabet")]
    NotPermutationAlphabet,
    #[error("cutoff {cutoff} is below the word weight {weight}")]
    CutoffTooSmall { cutoff: u64, weight: u64 },
    #[error("factorisation has an empty part")]
    EmptyPart,
    #[error("factorisation is not incompatible")]
    NotIncompatible,
    #[error("series constant term must be 1 to invert")]
    NotInvertible,
    #[error("series cutoffs differ ({0} vs {1})")]
    CutoffMismatch(usize, usize),
}
