//! Permutation classes through their sum decompositions: containment by
//! greedy embedding of words, class automata for finitely many
//! sum-indecomposables, uniform sampling, and Wilf-class enumeration.

pub mod automaton;
pub mod exec;
pub mod perm;
pub mod sampler;
pub mod wilf;
pub mod word;

pub use automaton::{ClassError, ClassModel, ClassSpec};
pub use exec::Strategy;
pub use perm::{PermError, Permutation, Symmetry};
pub use wilf::{WilfError, WilfPartition, WilfSignature};
pub use word::{Alphabet, LetterId, OrderMode, TruncatedSeries, Word, WordError};
