//! Equivalence checking and partial normal forms for deterministic linear
//! tree-to-word transducers, with all outputs kept as grammar-compressed words.

pub mod analysis;
pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod format;
pub mod ltw;
pub mod normalize;
pub mod oracle;
pub mod tree;
pub mod word;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
pub use ltw::{Axiom, Call, Ltw, RankedAlphabet, Rule, StateId, SymbolId};
pub use tree::Tree;
pub use word::{EqualityMode, SlpPool, WordRef};
pub use equivalence::{decide_equiv, decide_same_ordered_equiv, EquivVerdict, Mismatch};
pub use normalize::{partial_normal_form, NormalizationReport};
