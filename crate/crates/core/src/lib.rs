//! Construction, certification and benchmarking of quantum-state synchronizer
//! channels: CPTP maps on `n` identical `N`-level systems whose outputs have
//! identical single-party reductions.

pub mod bench;
pub mod builder;
pub mod channel;
pub mod cli;
pub mod dimensions;
pub mod error;
pub mod io;
pub mod linalg;
pub mod random;
pub mod sqs;
pub mod swap;

pub use builder::{build, build_mixed_representation, SeedUnitary, SymmetryKind, SymmetryMode};
pub use channel::{certify_qssr, KrausChannel, QssrVerdict};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, DensityMatrix, PureState, SystemShape, C64};
pub use sqs::{is_sqs_mixed, is_sqs_pure, Sign, SqsVerdict};
pub use swap::SwapRepresentation;
