//! Time-dependent Schrödinger propagation in a hard-walled box.
//!
//! Finite-range wells live on the full line; the zero-range well lives on
//! the half line with a time-dependent Robin condition at the origin.

mod crank_nicolson;
mod dense;
mod experiment;
mod grid;

use num_complex::Complex64;

pub use crank_nicolson::CrankNicolson;
pub use dense::{dense_oracle, ORACLE_LIMIT};
pub use experiment::{
    run_touch_experiment, ApproachScales, Numerics, Resolution, RunMetadata, TouchOptions,
    TouchOutcome,
};
pub use grid::{Domain, Grid, LeftBoundary, WaveField};

use crate::error::{invalid, Error, Result};
use crate::lattice::TrapLattice;
use crate::potentials::{PotentialShape, TrapSchedule};

/// Largest `μ ρ dx` for which the Robin-boundary bound state is resolved.
pub const ROBIN_RESOLUTION_LIMIT: f64 = 0.5;

pub(crate) fn lattice_for(
    psi: &WaveField,
    shape: &PotentialShape,
    schedule: &TrapSchedule,
) -> Result<TrapLattice> {
    if shape.is_delta() && schedule.is_squeezing() {
        return Err(Error::SqueezingDelta);
    }
    match (shape.is_delta(), psi.grid.domain()) {
        (true, Domain::HalfLine) if psi.grid.left_boundary() == LeftBoundary::Robin => {}
        (false, Domain::FullLine) | (true, Domain::FullLine) => {}
        _ => {
            return Err(invalid(
                "grid incompatible with shape: delta needs a Robin half line, finite wells the full line",
            ))
        }
    }
    TrapLattice::new(psi.grid, shape, psi.mass)
}

pub(crate) fn check_time_span(t_from: f64, t_to: f64, dt: f64) -> Result<()> {
    if !(t_from < t_to) {
        return Err(invalid(format!("need t_from < t_to, got {t_from} >= {t_to}")));
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

/// Number of uniform steps of size at most `dt` covering `[t_from, t_to]`.
pub(crate) fn step_count(t_from: f64, t_to: f64, dt: f64) -> (usize, f64) {
    let span = t_to - t_from;
    let n = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

/// Owns a lattice, its stepper, and the unknowns of one propagation.
pub(crate) struct Session<'a> {
    lattice: TrapLattice,
    schedule: &'a TrapSchedule,
    stepper: CrankNicolson,
    psi: Vec<Complex64>,
    first: usize,
    time: f64,
}

impl<'a> Session<'a> {
    pub(crate) fn new(psi: &WaveField, shape: &PotentialShape, schedule: &'a TrapSchedule) -> Result<Self> {
        let lattice = lattice_for(psi, shape, schedule)?;
        let range = psi.grid.unknowns();
        Ok(Session {
            stepper: CrankNicolson::new(lattice.dim()),
            schedule,
            psi: psi.samples[range.clone()].to_vec(),
            first: range.start,
            time: psi.time,
            lattice,
        })
    }

    pub(crate) fn lattice(&self) -> &TrapLattice {
        &self.lattice
    }

    /// Advances to `t_to` in uniform steps no larger than `dt`, calling
    /// `observe(self)` every `every` steps and after the last one.
    pub(crate) fn advance(
        &mut self,
        t_to: f64,
        dt: f64,
        every: usize,
        mut observe: impl FnMut(&Session<'_>) -> Result<()>,
    ) -> Result<usize> {
        check_time_span(self.time, t_to, dt)?;
        let t_from = self.time;
        let (steps, h) = step_count(t_from, t_to, dt);
        let dx = self.lattice.grid().dx();
        for k in 0..steps {
            let t = t_from + (k as f64 + 0.5) * h;
            let strength = self.schedule.strength(t);
            if self.lattice.is_robin() {
                let r = self.lattice.mass() * strength * dx;
                if r > ROBIN_RESOLUTION_LIMIT {
                    return Err(Error::UnderResolved(r));
                }
            }
            self.stepper
                .step(&self.lattice, &mut self.psi, strength, self.schedule.width(t), h);
            self.time = t_from + (k + 1) as f64 * h;
            if every > 0 && ((k + 1) % every == 0 || k + 1 == steps) {
                observe(self)?;
            }
        }
        self.time = t_to;
        Ok(steps)
    }

    pub(crate) fn samples(&self) -> Vec<Complex64> {
        let grid = self.lattice.grid();
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        out[self.first..self.first + self.psi.len()].copy_from_slice(&self.psi);
        out
    }

    pub(crate) fn unknowns(&self) -> &[Complex64] {
        &self.psi
    }

    pub(crate) fn first(&self) -> usize {
        self.first
    }

    pub(crate) fn field(&self) -> WaveField {
        WaveField {
            grid: *self.lattice.grid(),
            samples: self.samples(),
            time: self.time,
            mass: self.lattice.mass(),
        }
    }
}

/// Propagates `psi` from `t_from` to `t_to` with Crank–Nicolson steps no
/// larger than `dt`; the trap is evaluated at each step midpoint.
pub fn propagate(
    psi: &WaveField,
    shape: &PotentialShape,
    schedule: &TrapSchedule,
    t_from: f64,
    t_to: f64,
    dt: f64,
) -> Result<WaveField> {
    let mut start = psi.clone();
    start.time = t_from;
    let mut session = Session::new(&start, shape, schedule)?;
    session.advance(t_to, dt, 0, |_| Ok(()))?;
    Ok(session.field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::ShapeKind;
    use crate::stationary::{solve_bound_states, BoundStateOptions};

    #[test]
    fn static_zero_range_state_only_rotates() {
        let grid = Grid::half_line(30.0, 3001).unwrap();
        let delta = PotentialShape::delta();
        // rate tiny => strength practically constant at base 2.0
        let sched = TrapSchedule::culling(2.0, 1.0, 1e-300, 0).unwrap();
        let phi = &solve_bound_states(&delta, 2.0, 1.0, 1.0, &grid, &BoundStateOptions::default())
            .unwrap()[0];
        let psi0 = phi.to_wave_field(0.0);
        let tau = 3.0;
        let dt = 1e-3;
        let out = propagate(&psi0, &delta, &sched, 0.0, tau, dt).unwrap();
        let amp = grid.inner(&psi0.samples, &out.samples);
        assert!((amp.norm_sqr() - 1.0).abs() < 1e-8);
        // Cayley phase of the discrete eigenvalue.
        let (steps, h) = step_count(0.0, tau, dt);
        let expected = -2.0 * steps as f64 * (phi.energy * h / 2.0).atan();
        let diff = (amp.arg() - expected).rem_euclid(2.0 * std::f64::consts::PI);
        let diff = diff.min(2.0 * std::f64::consts::PI - diff);
        assert!(diff < 1e-6, "{diff}");
        // and close to the continuum phase -E tau
        let cont = (amp.arg() + phi.energy * tau).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(cont.min(2.0 * std::f64::consts::PI - cont) < 1e-5);
    }

    #[test]
    fn free_box_mode_keeps_profile() {
        let l = 10.0;
        let grid = Grid::full_line(l, 401).unwrap();
        let sq = PotentialShape::new(ShapeKind::Square, 1.0).unwrap();
        let sched = TrapSchedule::culling(0.0, 1.0, 1e-300, 0).unwrap();
        let vals: Vec<f64> = grid
            .xs()
            .iter()
            .map(|x| (std::f64::consts::PI * (x + l) / (2.0 * l)).sin())
            .collect();
        let psi = WaveField::from_real(grid, &vals, 0.0, 1.0).unwrap();
        let out = propagate(&psi, &sq, &sched, 0.0, 2.0, 1e-3).unwrap();
        for (a, b) in psi.samples.iter().zip(&out.samples) {
            assert!((a.norm() - b.norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_under_resolved_robin() {
        let grid = Grid::half_line(30.0, 301).unwrap();
        let delta = PotentialShape::delta();
        let sched = TrapSchedule::culling(0.0, 2.0, 1.0, 0).unwrap();
        let psi = WaveField::from_real(grid, &vec![0.0; 301], -10.0, 1.0).unwrap();
        let r = propagate(&psi, &delta, &sched, -10.0, 0.0, 0.01);
        assert!(matches!(r, Err(Error::UnderResolved(_))));
    }
}
