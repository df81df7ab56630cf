//! Discrete-time quantum walks on a line, their measurement randomness, and
//! bit extraction from sampled outcomes.
//!
//! The walk types live in [`walk`] and [`density`]; entropies in
//! [`randomness`]; sampling and position commitment in [`extraction`];
//! stream checks in [`stattests`]. [`harness`] drives the sweeps behind the
//! `qwalk` binary.

pub mod bitbuf;
pub mod density;
pub mod error;
pub mod extraction;
pub mod harness;
pub mod randomness;
pub mod state;
pub mod stattests;
pub mod walk;

pub use bitbuf::BitBuffer;
pub use density::{evolve_density, DensityOperator};
pub use error::{QwalkError, Result};
pub use extraction::{generate_bits, CommitmentScheme, GenerationMode, ZeroPolicy};
pub use randomness::{RandomnessReport, Target};
pub use state::{InitialState, WalkerState};
pub use walk::{evolve, WalkFamily, WalkSpec};
