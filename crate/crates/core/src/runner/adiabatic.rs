use crate::error::{invalid, Error, Result};

use super::scenario::Scenario;
use super::single::{retention, RunControls, SweepResult};

/// Numerical `v → 0` limit of the retention probability.
#[derive(Debug, Clone)]
pub struct AdiabaticEstimate {
    pub nu: f64,
    pub nu_after: f64,
    /// `P` at the smallest rate reached.
    pub p_limit: f64,
    pub v_sequence: Vec<f64>,
    /// `|P(v_min) - P(2 v_min)|`.
    pub plateau_residual: f64,
    /// Residual below tolerance before the cost ceiling was hit.
    pub converged: bool,
    pub runs: Vec<SweepResult>,
}

impl AdiabaticEstimate {
    pub fn p_sequence(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.p_stay).collect()
    }
}

/// Range ratio below which a run counts towards the plateau.
pub const THRESHOLD_REGIME: f64 = 0.5;

/// Halves the rate from `v_start` until `P` stops changing: two consecutive
/// halvings each move it by less than `tol`, over runs with settled `T` whose
/// well range is under [`THRESHOLD_REGIME`] threshold lengths. Finite wells
/// can show flat stretches or turning points at moderate rates, before the
/// bound state extends well beyond the trap. Stops early, flagged as not
/// converged, after `max_halvings` halvings or when a run would exceed the
/// grid-size ceiling.
pub fn estimate_adiabatic_limit(
    scenario: &Scenario,
    v_start: f64,
    tol: f64,
    ctl: &RunControls,
    max_halvings: usize,
) -> Result<AdiabaticEstimate> {
    if !(v_start > 0.0 && v_start.is_finite()) {
        return Err(invalid(format!("starting rate must be positive, got {v_start}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("plateau tolerance must be positive"));
    }
    let mut runs: Vec<SweepResult> = Vec::new();
    let mut v = v_start;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut agreeing = 0;
    let mut prev_eligible = false;
    for _ in 0..=max_halvings {
        let run = match retention(&scenario.clone().with_rate(v), ctl) {
            Ok(r) => r,
            Err(Error::CostCeiling { .. }) if !runs.is_empty() => break,
            Err(e) => return Err(e),
        };
        let eligible = run.convergence.t_converged
            && run.scenario.range_ratio()? <= THRESHOLD_REGIME;
        let settled = match runs.last() {
            Some(prev) => {
                residual = (run.p_stay - prev.p_stay).abs();
                eligible && prev_eligible
            }
            None => false,
        };
        prev_eligible = eligible;
        runs.push(run);
        agreeing = if settled && residual < tol { agreeing + 1 } else { 0 };
        if agreeing == 2 {
            converged = true;
            break;
        }
        v *= 0.5;
    }
    let last = runs.last().expect("at least one run");
    Ok(AdiabaticEstimate {
        nu: scenario.nu,
        nu_after: scenario.departure(),
        p_limit: last.p_stay,
        v_sequence: runs.iter().map(|r| r.scenario.rate).collect(),
        plateau_residual: residual,
        converged,
        runs,
    })
}

/// `([0.65 + ν]⁻¹, [1 + 0.44ν + 0.28ν²]⁻¹)`: the closed-form fits for the
/// zero-range retention probability, suited to large and small `ν`.
pub fn fit_values(nu: f64) -> Result<(f64, f64)> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid(format!("exponent must be positive, got {nu}")));
    }
    Ok((1.0 / (0.65 + nu), 1.0 / (1.0 + 0.44 * nu + 0.28 * nu * nu)))
}
