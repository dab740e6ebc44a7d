use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::potentials::{DriveMode, PotentialShape, TrapSchedule};
use crate::stationary::{self, bound_states_of, BoundState, BoundStateOptions};

use super::{Domain, Grid, Session, WaveField};

/// Absolute discretization of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub dx: f64,
    pub dt: f64,
    pub l_box: f64,
    /// The run starts at `-t_max` (and optionally ends at `+t_max`).
    pub t_max: f64,
}

/// Resolution knobs, relative to the natural scales of the threshold passage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Grid points per threshold length scale.
    pub points_per_length: f64,
    /// Grid points per half width of a finite-range well.
    pub points_per_half_width: f64,
    /// Time steps per threshold time scale.
    pub steps_per_time: f64,
    /// Binding energy at `-T` in units of the threshold energy scale.
    pub depth: f64,
    /// Bounds on `T` in units of the threshold time scale.
    pub t_min: f64,
    pub t_max: f64,
    /// Largest emitted energy (threshold units) that must not reach the wall.
    pub emission_energy: f64,
    /// Time (threshold units) before `t = 0` from which emitted waves are
    /// tracked; earlier emission is negligible.
    pub emission_window: f64,
    /// Upper bound on `κ(-T) dx`.
    pub kappa_dx: f64,
    /// Upper bound on `|E(-T)| dt`.
    pub phase_step: f64,
    /// Largest threshold-law binding at `±T` of a squeezed well, as a
    /// fraction of its depth. Wider starts leave the threshold regime, where
    /// the early evolution is no longer adiabatic.
    pub squeeze_binding: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            points_per_length: 16.0,
            points_per_half_width: 8.0,
            steps_per_time: 200.0,
            depth: 40.0,
            t_min: 2.0,
            t_max: 40.0,
            emission_energy: 10.0,
            emission_window: 4.0,
            kappa_dx: 0.4,
            phase_step: 0.1,
            squeeze_binding: 1.0,
        }
    }
}

impl Resolution {
    /// Every spatial and temporal density multiplied by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        Resolution {
            points_per_length: self.points_per_length * factor,
            points_per_half_width: self.points_per_half_width * factor,
            steps_per_time: self.steps_per_time * factor,
            kappa_dx: self.kappa_dx / factor,
            phase_step: self.phase_step / factor,
            ..*self
        }
    }
}

/// Natural scales of the passage, from the threshold law `E ≈ -C (v|t|)^{2ν}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachScales {
    pub coefficient: f64,
    /// `t*` with `|E(t*)| t* = 1`.
    pub time: f64,
    pub energy: f64,
    /// `1 / sqrt(2 μ E*)`.
    pub length: f64,
}

impl ApproachScales {
    pub fn of(shape: &PotentialShape, schedule: &TrapSchedule, mu: f64) -> Result<Self> {
        let coefficient = approach_coefficient(shape, schedule, mu)?;
        let nu = schedule.nu;
        let v2nu = schedule.rate.powf(2.0 * nu);
        let time = (coefficient * v2nu).powf(-1.0 / (2.0 * nu + 1.0));
        let energy = 1.0 / time;
        Ok(ApproachScales {
            coefficient,
            time,
            energy,
            length: 1.0 / (2.0 * mu * energy).sqrt(),
        })
    }
}

fn approach_coefficient(shape: &PotentialShape, schedule: &TrapSchedule, mu: f64) -> Result<f64> {
    let dx = shape.half_width().max(1e-300) / 400.0;
    match schedule.mode {
        DriveMode::Culling { base_strength } => {
            if shape.is_delta() {
                Ok(mu / 2.0)
            } else {
                Ok(stationary::threshold_coefficient(shape, base_strength, mu, dx))
            }
        }
        DriveMode::Squeezing { base_width, depth } => {
            if shape.is_delta() {
                return Err(Error::SqueezingDelta);
            }
            if base_width == 0.0 {
                // E ≈ -μ (ρ L)² / 2 once the well is much narrower than the state.
                Ok(mu * depth * depth / 2.0)
            } else {
                let rho_unit = depth * base_width * base_width;
                let c1 = stationary::threshold_coefficient(shape, rho_unit, mu, dx);
                Ok(4.0 * depth * depth * c1)
            }
        }
    }
}

impl Numerics {
    /// Discretization derived from the approach scales. `horizon` is the
    /// latest time of interest (0 or `T`), which sets how far emitted waves
    /// travel before the run ends.
    pub fn auto(
        shape: &PotentialShape,
        schedule: &TrapSchedule,
        mu: f64,
        res: &Resolution,
        to_plus_t: bool,
    ) -> Result<Self> {
        let sc = ApproachScales::of(shape, schedule, mu)?;
        let nu = schedule.nu.min(schedule.nu_after);
        let t_rel = res.depth.powf(1.0 / (2.0 * nu)).clamp(res.t_min, res.t_max);
        let t_max = t_rel * sc.time;
        Self::for_horizon(shape, schedule, mu, res, &sc, t_max, to_plus_t)
    }

    pub(crate) fn for_horizon(
        shape: &PotentialShape,
        schedule: &TrapSchedule,
        mu: f64,
        res: &Resolution,
        sc: &ApproachScales,
        t_max: f64,
        to_plus_t: bool,
    ) -> Result<Self> {
        let t_max = match schedule.mode {
            DriveMode::Squeezing { depth, .. } => {
                let excursion = (res.squeeze_binding * depth / sc.coefficient).sqrt();
                let mut cap = excursion.powf(1.0 / schedule.nu) / schedule.rate;
                if to_plus_t {
                    cap = cap.min(excursion.powf(1.0 / schedule.nu_after) / schedule.rate);
                }
                t_max.min(cap)
            }
            DriveMode::Culling { .. } => t_max,
        };
        // Binding energy at the ends of the run, from the threshold law,
        // floored by the true energy for deep finite wells.
        let e_law = |t: f64| sc.coefficient * schedule.excursion(t).powi(2);
        let e_end = e_law(-t_max).max(if to_plus_t { e_law(t_max) } else { 0.0 });
        // A squeezed well never binds deeper than its fixed depth.
        let e_end = match schedule.mode {
            DriveMode::Squeezing { depth, .. } => e_end.min(depth),
            DriveMode::Culling { .. } => e_end,
        };
        let e_end = e_end.max(sc.energy);
        let kappa_end = (2.0 * mu * e_end).sqrt();

        let width_end = schedule.width(-t_max).max(schedule.width(t_max));
        let reach = shape.half_width() * width_end;
        let mut dx = sc.length / res.points_per_length;
        if shape.is_delta() {
            dx = dx.min(res.kappa_dx / kappa_end);
        } else {
            let w_ref = match schedule.mode {
                DriveMode::Culling { .. } => 1.0,
                DriveMode::Squeezing { base_width, .. } => base_width.max(width_end),
            };
            dx = dx.min(shape.half_width() * w_ref / res.points_per_half_width);
        }

        let dt = (sc.time / res.steps_per_time).min(res.phase_step / e_end);

        let speed = (2.0 * res.emission_energy * sc.energy / mu).sqrt();
        let window = t_max.min(res.emission_window * sc.time);
        let travel = if to_plus_t { t_max + window } else { window };
        let containment = 25.0 / kappa_end;
        let l_box = reach + containment.max(3.0 * sc.length + speed * travel);
        if !(dx > 0.0 && dt > 0.0 && l_box.is_finite()) {
            return Err(invalid("could not derive numerics for this scenario"));
        }
        Ok(Numerics { dx, dt, l_box, t_max })
    }

    pub fn grid(&self, shape: &PotentialShape) -> Result<Grid> {
        let domain = if shape.is_delta() {
            Domain::HalfLine
        } else {
            Domain::FullLine
        };
        Grid::with_spacing(domain, self.l_box, self.dx)
    }

    pub fn n_points(&self, shape: &PotentialShape) -> usize {
        self.grid(shape).map(|g| g.len()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchOptions {
    /// Continue from `t = 0` to `t = +T`.
    pub to_plus_t: bool,
    /// Largest tolerated probability in the outer 10% of the box.
    pub leak_limit: f64,
    /// Steps between leak/norm checks.
    pub check_every: usize,
    /// Extra times at which to record the field.
    pub snapshot_times: Vec<f64>,
}

impl Default for TouchOptions {
    fn default() -> Self {
        TouchOptions {
            to_plus_t: false,
            leak_limit: 1e-5,
            check_every: 64,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetadata {
    pub dx: f64,
    pub dt: f64,
    pub l_box: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub steps: usize,
    /// Largest `| ‖ψ‖² - 1 |` seen at the checkpoints.
    pub norm_drift: f64,
    /// Largest probability found in the outer 10% of the box.
    pub leak: f64,
    pub initial_energy: f64,
}

#[derive(Debug, Clone)]
pub struct TouchOutcome {
    pub psi_at_zero: WaveField,
    pub psi_at_plus_t: Option<WaveField>,
    pub initial_state: BoundState,
    /// All bound states of the trap at `+T` (when propagated that far).
    pub final_states: Vec<BoundState>,
    pub snapshots: Vec<WaveField>,
    pub meta: RunMetadata,
}

impl TouchOutcome {
    /// The tracked state `φ_n(+T)`.
    pub fn final_state(&self, n: usize) -> Option<&BoundState> {
        self.final_states.get(n)
    }
}

/// Prepares `φ_n(-T)`, propagates it to `t = 0` (and optionally to `+T`).
///
/// The initial state is the eigenvector of the same lattice Hamiltonian that
/// is propagated, so the deep adiabatic state is represented exactly.
pub fn run_touch_experiment(
    shape: &PotentialShape,
    schedule: &TrapSchedule,
    mu: f64,
    numerics: &Numerics,
    opts: &TouchOptions,
) -> Result<TouchOutcome> {
    let grid = numerics.grid(shape)?;
    run_on_grid(shape, schedule, mu, numerics, &grid, opts)
}

pub(crate) fn run_on_grid(
    shape: &PotentialShape,
    schedule: &TrapSchedule,
    mu: f64,
    numerics: &Numerics,
    grid: &Grid,
    opts: &TouchOptions,
) -> Result<TouchOutcome> {
    if shape.is_delta() && schedule.is_squeezing() {
        return Err(Error::SqueezingDelta);
    }
    if !(numerics.t_max > 0.0) {
        return Err(invalid("T must be positive"));
    }
    let n = schedule.state_index;
    let t0 = -numerics.t_max;
    let lattice = crate::lattice::TrapLattice::new(*grid, shape, mu)?;
    let initial = pick_state(&lattice, schedule, t0, n)?;
    let start = initial.to_wave_field(t0);

    let mut session = Session::new(&start, shape, schedule)?;
    let mut meta = RunMetadata {
        dx: grid.dx(),
        dt: numerics.dt,
        l_box: grid.l_box(),
        t_max: numerics.t_max,
        n_points: grid.len(),
        steps: 0,
        norm_drift: 0.0,
        leak: 0.0,
        initial_energy: initial.energy,
    };
    let mut snapshots = Vec::new();
    let mut snap_times: Vec<f64> = opts.snapshot_times.clone();
    snap_times.sort_by(f64::total_cmp);
    let horizon = if opts.to_plus_t { numerics.t_max } else { 0.0 };
    snap_times.retain(|&t| t > t0 && t < horizon && t != 0.0);

    let run_to = |session: &mut Session<'_>, target: f64, meta: &mut RunMetadata| -> Result<()> {
        let mut drift = meta.norm_drift;
        let mut leak = meta.leak;
        let limit = opts.leak_limit;
        let steps = session.advance(target, numerics.dt, opts.check_every, |s| {
            let g = s.lattice().grid();
            let psi = s.unknowns();
            let first = s.first();
            let norm = g.dx()
                * g.symmetry_factor()
                * psi
                    .iter()
                    .enumerate()
                    .map(|(j, v)| g.weight(first + j) * v.norm_sqr())
                    .sum::<f64>();
            drift = drift.max((norm - 1.0).abs());
            let edge = edge_probability_unknowns(g, first, psi, 0.1);
            leak = leak.max(edge);
            if edge > limit {
                return Err(Error::BoundaryLeak { leak: edge, limit });
            }
            Ok(())
        })?;
        meta.steps += steps;
        meta.norm_drift = drift;
        meta.leak = leak;
        Ok(())
    };

    let mut pending = snap_times.iter().copied().peekable();
    while let Some(&ts) = pending.peek() {
        if ts >= 0.0 {
            break;
        }
        run_to(&mut session, ts, &mut meta)?;
        snapshots.push(session.field());
        pending.next();
    }
    run_to(&mut session, 0.0, &mut meta)?;
    let psi_at_zero = session.field();

    let mut psi_at_plus_t = None;
    let mut final_states = Vec::new();
    if opts.to_plus_t {
        for ts in pending {
            run_to(&mut session, ts, &mut meta)?;
            snapshots.push(session.field());
        }
        run_to(&mut session, numerics.t_max, &mut meta)?;
        psi_at_plus_t = Some(session.field());
        final_states = final_bound_states(&lattice, schedule, numerics.t_max, n)?;
    }
    Ok(TouchOutcome {
        psi_at_zero,
        psi_at_plus_t,
        initial_state: initial,
        final_states,
        snapshots,
        meta,
    })
}

fn edge_probability_unknowns(grid: &Grid, first: usize, psi: &[Complex64], fraction: f64) -> f64 {
    let n = grid.len();
    let n_edge = ((n as f64 * fraction).ceil() as usize).max(1);
    let mut s = 0.0;
    for (j, v) in psi.iter().enumerate() {
        let i = first + j;
        let outer = i + n_edge >= n || (grid.domain() == Domain::FullLine && i < n_edge);
        if outer {
            s += grid.weight(i) * v.norm_sqr();
        }
    }
    s * grid.dx() * grid.symmetry_factor()
}

fn pick_state(
    lattice: &crate::lattice::TrapLattice,
    schedule: &TrapSchedule,
    t: f64,
    n: usize,
) -> Result<BoundState> {
    let states = bound_states_of(
        lattice,
        schedule.strength(t),
        schedule.width(t),
        &BoundStateOptions::lowest(n + 1),
    )?;
    states
        .into_iter()
        .nth(n)
        .ok_or(Error::StateMissing { state: n })
}

/// All bound states at `t`; only the tracked state `n` must pass the tail check.
fn final_bound_states(
    lattice: &crate::lattice::TrapLattice,
    schedule: &TrapSchedule,
    t: f64,
    n: usize,
) -> Result<Vec<BoundState>> {
    let strength = schedule.strength(t);
    let width = schedule.width(t);
    let checked = bound_states_of(lattice, strength, width, &BoundStateOptions::lowest(n + 1))?;
    if checked.len() <= n {
        return Err(Error::StateMissing { state: n });
    }
    let all = bound_states_of(
        lattice,
        strength,
        width,
        &BoundStateOptions {
            max_states: None,
            tail_tolerance: None,
        },
    )?;
    Ok(all)
}
