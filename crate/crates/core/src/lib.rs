//! Quantum and semiclassical polarization correlations.
//!
//! Two beams (or two photons) are analyzed by polarizers followed by binary
//! on/off detectors. This crate computes the coincidence statistics for
//!
//! * Werner states, including the singlet ([`quantum`]);
//! * rotationally invariant mixtures of classical beam pairs
//!   ([`semiclassical`]), with closed forms, kernel bounds and Monte Carlo
//!   and quadrature routes for every average over SO(3);
//! * a counter-rotating two-waveplate depolarizer ([`optics`]);
//! * a virtual version of a pulsed-laser coincidence measurement
//!   ([`experiment`]).
//!
//! Bloch vectors use z ↔ H/V, x ↔ diagonal, y ↔ circular; see [`bloch`].

// `!(x > 0.0)` is how input checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod detector;
pub mod error;
pub mod experiment;
pub mod optics;
pub mod quadrature;
pub mod quantum;
pub mod rng;
pub mod rotation;
pub mod semiclassical;

pub use bloch::BlochVector;
pub use detector::{click_probability, DetectorModel};
pub use error::{Error, Result};
pub use rng::SeedStream;
pub use rotation::{haar_rotation, rotation_about, Rotation3};
