//! CSV tables (12 significant digits) and `key = value` metadata sidecars.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::observables::EnergySpectrum;
use crate::propagator::WaveField;
use crate::stationary::BoundState;

use super::single::SweepResult;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}").to_lowercase()
    }
}

fn flag(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "unchecked",
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub const RESULT_HEADER: [&str; 20] = [
    "shape", "a", "mode", "nu", "nu_after", "v", "mu", "n", "dx", "dt", "l_box", "t_max",
    "n_points", "p_stay", "p_direct", "t_residual", "dx_residual", "t_converged",
    "dx_converged", "leak_free",
];

pub fn result_row(r: &SweepResult) -> Vec<String> {
    let s = &r.scenario;
    let c = &r.convergence;
    vec![
        s.shape.kind().name().to_string(),
        num(if s.shape.is_delta() { 0.0 } else { s.shape.half_width() }),
        s.drive.name().to_string(),
        num(s.nu),
        num(s.departure()),
        num(s.rate),
        num(s.mu),
        s.state.to_string(),
        num(r.meta.dx),
        num(r.meta.dt),
        num(r.meta.l_box),
        num(r.meta.t_max),
        r.meta.n_points.to_string(),
        num(r.p_stay),
        r.p_direct.map(num).unwrap_or_else(|| "nan".into()),
        num(c.t_residual),
        c.dx_residual.map(num).unwrap_or_else(|| "nan".into()),
        flag(Some(c.t_converged)).into(),
        flag(c.dx_converged).into(),
        flag(Some(c.leak_free)).into(),
    ]
}

pub fn write_results(path: &Path, results: &[SweepResult]) -> Result<()> {
    let rows: Vec<_> = results.iter().map(result_row).collect();
    write_csv(path, &RESULT_HEADER, &rows)
}

pub fn write_spectrum(path: &Path, spec: &EnergySpectrum) -> Result<()> {
    let rows: Vec<_> = spec.samples.iter().map(|&(e, w)| vec![num(e), num(w)]).collect();
    write_csv(path, &["energy", "density"], &rows)
}

pub fn write_field(path: &Path, psi: &WaveField) -> Result<()> {
    let g = &psi.grid;
    let rows: Vec<_> = psi
        .samples
        .iter()
        .enumerate()
        .map(|(i, v)| vec![num(g.x(i)), num(v.re), num(v.im)])
        .collect();
    write_csv(path, &["x", "re_psi", "im_psi"], &rows)
}

pub fn write_state(path: &Path, state: &BoundState) -> Result<()> {
    let g = &state.grid;
    let rows: Vec<_> = state
        .wavefunction
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![num(g.x(i)), num(v)])
        .collect();
    write_csv(path, &["x", "phi"], &rows)
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sidecar {
    entries: Vec<(String, String)>,
}

impl Sidecar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn section(&mut self, name: &str) {
        self.entries.push((format!("[{name}]"), String::new()));
    }

    pub fn record_run(&mut self, prefix: &str, r: &SweepResult) {
        let m = &r.meta;
        let c = &r.convergence;
        self.set(
            prefix,
            format!(
                "v={} dx={} dt={} l_box={} t_max={} n_points={} steps={} p_stay={} t_residual={} dx_residual={} leak={} norm_drift={} flags=[{}]",
                num(r.scenario.rate),
                num(m.dx),
                num(m.dt),
                num(m.l_box),
                num(m.t_max),
                m.n_points,
                m.steps,
                num(r.p_stay),
                num(c.t_residual),
                c.dx_residual.map(num).unwrap_or_else(|| "nan".into()),
                num(m.leak),
                num(m.norm_drift),
                c.describe()
            ),
        );
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            if k.starts_with('[') {
                let _ = writeln!(s, "{k}");
            } else {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}
