//! Free-group words and finitely presented groups.
//!
//! Relator positions in moves are 0-based; generator labels are 1-based.

mod presentation;
mod search;
mod word;

use thiserror::Error;

pub use presentation::{abelianize, AbelianWitness, Move, Presentation};
pub use search::{normally_generates, trivialize_search, Goal, SearchConfig, TriState, Trivialization, UnknownReason};
pub use word::{Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("0 is not a generator label")]
    ZeroLetter,
    #[error("letter {letter} exceeds the alphabet rank {rank}")]
    RankMismatch { letter: Letter, rank: usize },
    #[error("relator index {index} out of range ({count} relators)")]
    RelatorOutOfRange { index: usize, count: usize },
    #[error("a relator cannot slide over itself (index {index})")]
    SelfSlide { index: usize },
    #[error("slide sign must be +1 or -1, got {sign}")]
    BadSign { sign: i32 },
    #[error("cannot destabilize generator {generator}: {reason}")]
    Destabilize { generator: u32, reason: String },
    #[error("relator {index} is not trivial and cannot be dropped")]
    NotTrivial { index: usize },
    #[error("move {step} does not replay: {reason}")]
    Replay { step: usize, reason: String },
    #[error("presentation parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
