//! Scenarios, convergence-controlled runs, parallel sweeps, adiabatic
//! plateau detection, config files and figure data.

mod adiabatic;
pub mod config;
pub mod figures;
pub mod output;
mod scenario;
mod single;
mod sweep;

pub use adiabatic::{estimate_adiabatic_limit, fit_values, AdiabaticEstimate, THRESHOLD_REGIME};
pub use figures::{reproduce_figure, FigureOptions, FigureReport, FIGURE_IDS};
pub use scenario::{Drive, Scenario};
pub use single::{emission_spectrum, retention, Convergence, RunControls, SpectrumRun, SweepResult};
pub use sweep::{map_points, sweep, Execution};
