//! Symbolic computation for finitely generated groups of `Z^n`-words:
//! exact infinite-word arithmetic, Lyndon length-function audits,
//! universal-tree fragments, effective hierarchies and regular completions.

pub mod alphabet;
pub mod expr;
pub mod ordvec;
pub mod specialize;
pub mod word;

pub use alphabet::{Alphabet, Letter};
pub use ordvec::OrdVec;
pub use word::{Block, BlockWord, WordBuilder, WordError};
