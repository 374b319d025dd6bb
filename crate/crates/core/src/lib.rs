//! Thinning of uniform linear antenna arrays through the inverse quantum
//! Fourier transform.
//!
//! The reference pattern samples are loaded as an `L`-qubit state. The
//! inverse QFT maps them onto the excitation domain, and the measured
//! probabilities decide which lattice positions stay active. Everything runs
//! on a built-in dense statevector simulator.
//!
//! Modules:
//! - [`qsim`]: statevector, gates, QFT/IQFT circuits, readout
//! - [`pattern`]: DFT/IDFT, sampling directions, array factor evaluation
//! - [`reference`]: layout and Dolph-Chebyshev reference patterns
//! - [`noise`]: complex Gaussian input noise at a prescribed SNR
//! - [`metrics`]: matching costs, sidelobe region and sidelobe indexes
//! - [`thinning`]: ranking and minimal-K synthesis
//! - [`io`]: CSV exchange formats

pub mod io;
pub mod metrics;
pub mod noise;
pub mod pattern;
pub mod qsim;
pub mod reference;
pub mod thinning;

pub use num_complex::Complex64;

pub use metrics::{FeatureKind, FeatureSpec, MetricsBundle, SidelobeRegion};
pub use noise::NoiseSpec;
pub use pattern::{ArrayLayout, ExcitationMode, PatternSamples, UGrid};
pub use qsim::{Gate, GateSequence, Statevector};
pub use reference::{ReferenceKind, ReferenceSpec};
pub use thinning::{Ranking, Readout, ThinningReport, ThinningResult};
