//! Simulation of the Deutsch-Jozsa algorithm on a rovibrational wave packet.
//!
//! A Boolean function over 2m inputs is written as a phase pattern on the
//! pump pulse, the pulse launches a packet over 2m rovibrational levels, and
//! a delayed probe reads out whether the function is constant or balanced
//! from a single ionization signal.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod harness;
pub mod oracle;
pub mod pipeline;
pub mod readout;
pub mod shaper;
pub mod signal;

pub use basis::{LevelBasis, RovibrationalLevel, SpectroscopicConstants};
pub use dynamics::{CouplingSet, WavePacket};
pub use error::{Error, Result};
pub use exec::Execution;
pub use harness::{load_config, RunConfig};
pub use oracle::{BooleanFunction, FunctionCharacter, PhaseSet};
pub use pipeline::Setup;
pub use readout::CalibrationResult;
pub use shaper::{MaskGeometry, PhaseMask, SpectralEnvelope};
pub use signal::{NoiseModel, ProbeModel};
