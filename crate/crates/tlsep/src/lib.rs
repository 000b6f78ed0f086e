//! Active learning of small deterministic event-recording automata from
//! membership and inclusion queries, together with the timed-language
//! plumbing it needs: exact rational time, per-event clock constraints,
//! realizability checking, clock regions, and symbolic automata.

pub mod alphabet;
pub mod automata;
pub mod consistency;
pub mod constraint;
pub mod format;
pub mod learner;
pub mod models;
pub mod regions;
pub mod teacher;
pub mod words;

pub use alphabet::{Alphabet, Letter};
pub use automata::{Class3, Dera, SymbolicDfa, SymbolicNfa, ThreeDfa};
pub use consistency::{ConsistencyChecker, ConsistencyVerdict};
pub use constraint::{ElementaryConstraint, Guard, SimpleConstraint};
pub use learner::{learn, ExtractMode, LearnError, LearnOptions, LearnResult};
pub use regions::build_regl;
pub use words::{RegionWord, Time, TimedWord};
