//! Link-level simulation of SCMA with hybrid codeword-position index modulation.
//!
//! Each user sends a block of `n` codeword positions. In `R` successive
//! rounds, index bits choose which still-free positions carry a codeword
//! of that round's codebook and data bits choose the codewords. Unused
//! positions stay empty. The receiver runs message passing per position
//! over the union of all codebooks plus the zero vector, then recovers
//! vacancies, index sets and symbols in stages.

pub mod analysis;
pub mod channel;
pub mod codebook;
pub mod detector;
pub mod error;
pub mod mapper;
pub mod sim;

pub use channel::{ChannelRealization, FadingModel, NoiseParams};
pub use codebook::{CodebookDocument, CodebookFamily, FactorGraph, MergedAlphabet, MergedSymbol};
pub use detector::{BlockDecision, MpaWorkspace, SoftMessageMatrix, UnitObservation, UserDecision};
pub use error::{Error, Result};
pub use mapper::{BitBudget, BtiMapper, CodewordBlock, HcpiConfig, Slot};
pub use sim::{Scheme, SweepConfig, SweepPoint, SweepResult};
