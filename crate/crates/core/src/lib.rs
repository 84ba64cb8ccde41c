//! Pseudorandom generators for read-k and linear-length oblivious branching
//! programs whose reading order is known in advance, plus the tooling to
//! verify them exactly at small scale.
//!
//! - [`sequence`]: read-k sequences, structural checkers, the variable
//!   partition into monotone interleaving parts.
//! - [`program`]: layered oblivious branching programs and exact counting.
//! - [`inw`]: the recursive seed-expansion generator used per part.
//! - [`composite`]: the read-k and linear-length generators assembled from
//!   per-part generators.
//! - [`harness`]: fooling-error measurement, the hybrid check, exhaustive
//!   structural suites, and corpus runs.

pub mod bits;
pub mod composite;
pub mod generator;
pub mod harness;
pub mod inw;
pub mod program;
pub mod sequence;

pub use bits::BitString;

pub use composite::{CompositeDescriptor, CompositeKind, SeedLengthReport};
pub use generator::{Generator, UniformGenerator, Workspace};
pub use inw::{InwDescriptor, InwMode};
pub use program::{AcceptanceResult, ObliviousBranchingProgram, Restriction};
pub use sequence::{ReadKSequence, VariablePartition};

/// Tool version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
