use crate::error::{Error, Result};
use crate::observables::{
    continuum_part, energy_distribution, p_stay_asymmetric, p_stay_direct, p_stay_symmetric,
    spatial_overlap, EnergySpectrum,
};
use crate::potentials::TrapSchedule;
use crate::propagator::{
    run_touch_experiment, ApproachScales, Numerics, Resolution, RunMetadata, TouchOptions,
    TouchOutcome, WaveField,
};

use super::scenario::Scenario;

/// Convergence controls shared by every run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunControls {
    pub resolution: Resolution,
    /// Largest change of `P` under one growth of `T`.
    pub t_tol: f64,
    /// How many times `T` may grow before giving up.
    pub max_t_growths: usize,
    /// Largest change of `P` when every resolution is doubled; `None` skips
    /// the refined run.
    pub dx_tol: Option<f64>,
    pub leak_limit: f64,
    /// Box enlargements (by 1.5) tried after a boundary leak.
    pub leak_retries: usize,
    /// Grid size ceiling for a single run; the refined check run may use
    /// twice as many points.
    pub max_points: usize,
    /// Also propagate to `+T` and evaluate the direct overlap.
    pub direct: bool,
    pub snapshot_times: Vec<f64>,
}

impl Default for RunControls {
    fn default() -> Self {
        RunControls {
            resolution: Resolution::default(),
            t_tol: 1e-3,
            max_t_growths: 4,
            dx_tol: Some(1e-3),
            leak_limit: 1e-5,
            leak_retries: 3,
            max_points: 16_384,
            direct: false,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub t_converged: bool,
    /// `|P(T_last) - P(T_prev)|`.
    pub t_residual: f64,
    /// `None` when the refined run was skipped or exceeded the cost ceiling.
    pub dx_converged: Option<bool>,
    pub dx_residual: Option<f64>,
    pub leak_free: bool,
}

impl Convergence {
    pub fn passed(&self) -> bool {
        self.t_converged && self.dx_converged != Some(false) && self.leak_free
    }

    pub fn describe(&self) -> String {
        let dx = match self.dx_converged {
            Some(true) => "dx ok",
            Some(false) => "dx NOT converged",
            None => "dx unchecked",
        };
        format!(
            "{}, {dx}, {}",
            if self.t_converged { "T ok" } else { "T NOT converged" },
            if self.leak_free { "leak-free" } else { "LEAKED" }
        )
    }
}

/// Record of one retention run.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub meta: RunMetadata,
    pub p_stay: f64,
    /// Overlap with the final bound state, when propagated to `+T`.
    pub p_direct: Option<f64>,
    pub convergence: Convergence,
    pub snapshots: Vec<WaveField>,
}

/// Emission spectrum of one run, measured at `+T`.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub spectrum: EnergySpectrum,
    pub p_stay: f64,
    pub p_direct: f64,
    /// `∫|φ_n||ψ_cont|` at the measurement time.
    pub overlap: f64,
    pub decoupled: bool,
    /// `∫|w_T - w_prev| dE / yield` against the previous, shorter run.
    pub settle_change: Option<f64>,
    pub meta: RunMetadata,
}

struct Attempt {
    p: f64,
    p_direct: Option<f64>,
    meta: RunMetadata,
    leak_free: bool,
    outcome: TouchOutcome,
}

fn side_schedules(full: &TrapSchedule) -> Vec<TrapSchedule> {
    if full.is_symmetric() {
        vec![*full]
    } else {
        vec![
            TrapSchedule {
                nu_after: full.nu,
                ..*full
            },
            full.mirrored_departure(),
        ]
    }
}

fn numerics_for(
    scenario: &Scenario,
    sched: &TrapSchedule,
    res: &Resolution,
    t_scale: f64,
    to_plus_t: bool,
) -> Result<Numerics> {
    let shape = &scenario.shape;
    let auto = Numerics::auto(shape, sched, scenario.mu, res, to_plus_t)?;
    if t_scale == 1.0 {
        return Ok(auto);
    }
    let sc = ApproachScales::of(shape, sched, scenario.mu)?;
    Numerics::for_horizon(shape, sched, scenario.mu, res, &sc, auto.t_max * t_scale, to_plus_t)
}

fn attempt_once(
    scenario: &Scenario,
    res: &Resolution,
    t_scale: f64,
    l_scale: f64,
    leak_limit: f64,
    ctl: &RunControls,
    to_plus_t: bool,
) -> Result<Attempt> {
    let rough = scenario.schedule(None)?;
    let sides = side_schedules(&rough);
    let plans: Vec<Numerics> = sides
        .iter()
        .map(|s| numerics_for(scenario, s, res, t_scale, to_plus_t && sides.len() == 1))
        .collect::<Result<_>>()?;
    let dx = plans.iter().map(|n| n.dx).fold(f64::INFINITY, f64::min);
    let l_box = l_scale * plans.iter().map(|n| n.l_box).fold(0.0, f64::max);

    let exact = scenario.schedule(Some(dx))?;
    let sides = side_schedules(&exact);
    let opts = |plus: bool, snaps: bool| TouchOptions {
        to_plus_t: plus,
        leak_limit,
        snapshot_times: if snaps { ctl.snapshot_times.clone() } else { Vec::new() },
        ..Default::default()
    };
    let mut outcomes = Vec::with_capacity(2);
    for (k, (sched, plan)) in sides.iter().zip(&plans).enumerate() {
        let numerics = Numerics { dx, l_box, ..*plan };
        let points = numerics.n_points(&scenario.shape);
        if points > ctl.max_points {
            return Err(Error::CostCeiling { points, limit: ctl.max_points });
        }
        let plus = to_plus_t && sides.len() == 1;
        outcomes.push(run_touch_experiment(
            &scenario.shape,
            sched,
            scenario.mu,
            &numerics,
            &opts(plus, k == 0),
        )?);
    }

    let (p, p_direct) = if sides.len() == 1 {
        let o = &outcomes[0];
        let p = p_stay_symmetric(&o.psi_at_zero, &exact)?;
        let direct = match (&o.psi_at_plus_t, o.final_state(scenario.state)) {
            (Some(psi), Some(phi)) => Some(p_stay_direct(psi, phi)?),
            _ => None,
        };
        (p, direct)
    } else {
        let p = p_stay_asymmetric(&outcomes[0].psi_at_zero, &outcomes[1].psi_at_zero)?;
        let direct = if to_plus_t {
            let numerics = numerics_for(scenario, &exact, res, t_scale, true)?;
            let numerics = Numerics { dx, l_box: numerics.l_box * l_scale, ..numerics };
            let points = numerics.n_points(&scenario.shape);
            if points > ctl.max_points {
                return Err(Error::CostCeiling { points, limit: ctl.max_points });
            }
            let o = run_touch_experiment(&scenario.shape, &exact, scenario.mu, &numerics, &opts(true, false))?;
            let phi = o
                .final_state(scenario.state)
                .ok_or(Error::StateMissing { state: scenario.state })?;
            Some(p_stay_direct(o.psi_at_plus_t.as_ref().expect("propagated to +T"), phi)?)
        } else {
            None
        };
        (p, direct)
    };

    let mut meta = outcomes[0].meta;
    for o in &outcomes[1..] {
        meta.leak = meta.leak.max(o.meta.leak);
        meta.norm_drift = meta.norm_drift.max(o.meta.norm_drift);
        meta.steps += o.meta.steps;
    }
    Ok(Attempt {
        p,
        p_direct,
        meta,
        leak_free: true,
        outcome: outcomes.swap_remove(0),
    })
}

/// Runs once, enlarging the box after each boundary leak. The last try
/// accepts any leak and is flagged.
fn attempt(
    scenario: &Scenario,
    res: &Resolution,
    t_scale: f64,
    ctl: &RunControls,
    to_plus_t: bool,
) -> Result<Attempt> {
    let mut l_scale = 1.0;
    for retry in 0..=ctl.leak_retries {
        let last = retry == ctl.leak_retries;
        let limit = if last { f64::INFINITY } else { ctl.leak_limit };
        match attempt_once(scenario, res, t_scale, l_scale, limit, ctl, to_plus_t) {
            Err(Error::BoundaryLeak { .. } | Error::BoxTooSmall { .. }) if !last => l_scale *= 1.5,
            Ok(mut a) => {
                a.leak_free = a.meta.leak <= ctl.leak_limit;
                return Ok(a);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("the last retry accepts any leak")
}

/// Factor by which `T` grows between convergence checks: doubling, but at
/// most a fourfold deeper start so the cost stays bounded for large `ν`.
fn t_growth(scenario: &Scenario) -> f64 {
    let nu = scenario.nu.min(scenario.departure());
    2f64.min(4f64.powf(1.0 / (2.0 * nu)))
}

/// Retention probability of one scenario, with `T` grown until `P` settles
/// and an optional refined-resolution check.
pub fn retention(scenario: &Scenario, ctl: &RunControls) -> Result<SweepResult> {
    let res = ctl.resolution;
    let growth = t_growth(scenario);
    let mut best = attempt(scenario, &res, 1.0, ctl, ctl.direct)?;
    let mut scale = 1.0;
    let mut t_residual = f64::INFINITY;
    let mut t_converged = false;
    for _ in 0..ctl.max_t_growths {
        let next = match attempt(scenario, &res, scale * growth, ctl, ctl.direct) {
            Ok(a) => a,
            Err(Error::CostCeiling { .. }) => break,
            Err(e) => return Err(e),
        };
        // A squeezed well caps T. If the cap binds before any growth, probe
        // the sensitivity with a shorter run instead.
        if next.meta.t_max <= best.meta.t_max * (1.0 + 1e-9) {
            if !t_residual.is_finite() {
                match attempt(scenario, &res, scale / growth, ctl, ctl.direct) {
                    Ok(shorter) => {
                        t_residual = (shorter.p - best.p).abs();
                        t_converged = t_residual < ctl.t_tol;
                    }
                    Err(Error::CostCeiling { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            break;
        }
        scale *= growth;
        t_residual = (next.p - best.p).abs();
        let leak_free = best.leak_free && next.leak_free;
        best = next;
        best.leak_free = leak_free;
        if t_residual < ctl.t_tol {
            t_converged = true;
            break;
        }
    }

    let check_budget = RunControls {
        max_points: 2 * ctl.max_points,
        snapshot_times: Vec::new(),
        ..ctl.clone()
    };
    let (dx_converged, dx_residual) = match ctl.dx_tol {
        None => (None, None),
        Some(tol) => match attempt(scenario, &res.refined(2.0), scale, &check_budget, false) {
            Ok(fine) => {
                let r = (fine.p - best.p).abs();
                (Some(r < tol), Some(r))
            }
            Err(Error::CostCeiling { .. }) => (None, None),
            Err(e) => return Err(e),
        },
    };

    Ok(SweepResult {
        scenario: scenario.clone(),
        meta: best.meta,
        p_stay: best.p,
        p_direct: best.p_direct,
        convergence: Convergence {
            t_converged,
            t_residual,
            dx_converged,
            dx_residual,
            leak_free: best.leak_free,
        },
        snapshots: best.outcome.snapshots,
    })
}

/// Energy distribution of the emitted particles of a symmetric scenario.
/// `T` grows until the continuum has left the bound state
/// (`∫|φ_n||ψ_cont| < overlap_tol`) or the growth budget is spent.
pub fn emission_spectrum(
    scenario: &Scenario,
    ctl: &RunControls,
    overlap_tol: f64,
) -> Result<SpectrumRun> {
    if !scenario.is_symmetric() {
        return Err(Error::AsymmetricSchedule);
    }
    let growth = t_growth(scenario);
    let mut scale = 1.0;
    let mut result: Option<SpectrumRun> = None;
    for _ in 0..=ctl.max_t_growths {
        let a = match attempt(scenario, &ctl.resolution, scale, ctl, true) {
            Ok(a) => a,
            Err(Error::CostCeiling { .. }) if result.is_some() => break,
            Err(e) => return Err(e),
        };
        let o = &a.outcome;
        let psi = o.psi_at_plus_t.as_ref().expect("propagated to +T");
        let phi = o
            .final_state(scenario.state)
            .ok_or(Error::StateMissing { state: scenario.state })?;
        let cont = continuum_part(psi, &o.final_states);
        let overlap = spatial_overlap(phi, &cont);
        let mut spectrum = energy_distribution(psi, &o.final_states, scenario.mu)?;
        spectrum.valid &= a.leak_free;
        let settle_change = result
            .as_ref()
            .map(|prev| spectrum.l1_distance(&prev.spectrum) / spectrum.total_yield);
        let run = SpectrumRun {
            settle_change,
            spectrum,
            p_stay: a.p,
            p_direct: a.p_direct.unwrap_or(f64::NAN),
            overlap,
            decoupled: overlap < overlap_tol,
            meta: a.meta,
        };
        let done = run.decoupled;
        result = Some(run);
        if done {
            break;
        }
        scale *= growth;
    }
    Ok(result.expect("at least one attempt"))
}
