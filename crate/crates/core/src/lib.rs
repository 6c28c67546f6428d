//! Simulation and analysis of the wavelength attack on heterodyne
//! continuous-variable QKD.
//!
//! Eve intercepts Alice's coherent states, heterodynes them, and resends two
//! mutually incoherent beams, a fake signal and a fake local oscillator, at
//! wavelengths where Bob's fused-fiber couplers split unevenly. With the
//! right intensities Bob's detectors read Eve's outcome up to the shot noise
//! of the unbalanced splitters. This crate
//!
//! * models the coupler transmittance and inverts it ([`coupler`]),
//! * models balanced and unbalanced homodyne detectors ([`homodyne`]),
//! * solves the attacking equations in every sign regime ([`attack`]),
//! * simulates full protocol rounds ([`session`]),
//! * evaluates the conditional variances, the hiding condition and the
//!   parameter estimation Alice and Bob would run ([`analysis`]).
//!
//! The analytic modules are generic over [`Real`] (`f32`/`f64`); the
//! aliases below fix them to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod attack;
pub mod coupler;
mod error;
pub mod homodyne;
pub mod roots;
mod scalar;
pub mod session;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;
pub use units::{sample_gaussian_pair, RandomSource};

pub type QuadraturePair = units::QuadraturePair<f64>;
pub type ShotNoise = units::ShotNoise<f64>;
pub type ProtocolParams = units::ProtocolParams<f64>;
pub type CouplerModel = coupler::CouplerModel<f64>;
pub type WavelengthBand = coupler::WavelengthBand<f64>;
pub type DetectorSpec = homodyne::DetectorSpec<f64>;
pub type BeamState = homodyne::BeamState<f64>;
pub type PortIntensities = homodyne::PortIntensities<f64>;
pub type AttackSolution = attack::AttackSolution<f64>;
pub type AttackTarget = attack::AttackTarget<f64>;
pub type VarianceReport = analysis::VarianceReport<f64>;
pub type ConditionalVariance = analysis::ConditionalVariance<f64>;
pub type SweepRow = analysis::SweepRow<f64>;

pub use analysis::{EstimationOptions, EstimationReport};
pub use session::{
    AttackConfig, RoundRecord, SessionConfig, SessionDataset, SignalNoise, T2Policy,
};
