//! Retention probability of a particle in a slowly driven 1D trap whose bound
//! state is brought to the continuum threshold and back.
//!
//! * [`potentials`]: trap shapes, drive schedules, critical strengths/widths.
//! * [`stationary`]: lattice bound states and threshold counting.
//! * [`propagator`]: Crank–Nicolson propagation, dense reference propagator,
//!   and the full threshold-touching run.
//! * [`observables`]: retention probabilities and emitted-energy spectra.
//! * [`scaling`]: the `(μ, v)` rescaling and spectrum collapse.
//! * [`runner`]: scenarios, parallel sweeps, adiabatic plateau detection,
//!   figure data, config files and CSV output.

pub mod error;
pub mod lattice;
pub mod observables;
pub mod potentials;
pub mod propagator;
pub mod runner;
pub mod scaling;
pub mod stationary;

pub use error::{Error, Result};
