//! Desk-scale quantum error correction pipeline: circuit-level Pauli-noise
//! Monte Carlo of repetition and distance-2 surface codes, detection-event
//! statistics, two-point error-correlation estimation, minimum-weight
//! matching decoding under four weighting schemes, exponential
//! error-suppression fitting, and component error budgeting.

pub mod archive;
pub mod analysis;
pub mod circuit;
pub mod codes;
pub mod correlation;
pub mod decoder;
pub mod detection;
pub mod frame;
pub mod matching;
pub mod noise;
pub mod rng;
pub mod sampler;
pub mod tableau;

pub use circuit::{Circuit, CircuitError, Moment, Op};
pub use codes::{build, Basis, Code, CodeSpec, Family, InitSpec, SubsampleMap};
pub use detection::{DetectionTensor, DefReport};
pub use noise::{BurstConfig, Component, CorrelatedChannel, NoiseModel};
pub use sampler::{enumerate_single_errors, reference_run, Sampler, ShotRecord};
