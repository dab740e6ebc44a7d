//! Data behind each figure: one CSV per curve plus a `<id>_meta.txt` sidecar.

use std::fs;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::potentials::{PotentialShape, ShapeKind};
use crate::scaling::{rescale_spectrum, scaling_params};

use super::adiabatic::{estimate_adiabatic_limit, fit_values, AdiabaticEstimate};
use super::output::{self, num, Sidecar};
use super::scenario::Scenario;
use super::single::{emission_spectrum, retention, RunControls, SweepResult};
use super::sweep::{map_points, sweep, Execution};

pub const FIGURE_IDS: [&str; 7] = ["fig2", "fig3", "fig4a", "fig4b", "fig4c", "fig5", "fig6"];

/// Exponent grid of the zero-range curve.
pub const FIG2_NU: [f64; 12] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
/// `(μ, v)` of the three emission spectra; the first is the reference.
pub const FIG3_RUNS: [(f64, f64); 3] = [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)];
/// Asymmetric exponent pairs.
pub const FIG6_PAIRS: [(f64, f64); 3] = [(1.0, 2.0), (1.0, 3.0), (2.0, 3.0)];
/// Strength of the squeezed wells.
pub const SQUEEZE_DEPTH: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub out_dir: PathBuf,
    /// Plateau tolerance for the finite-range curves.
    pub tol: f64,
    pub v_start: f64,
    pub max_halvings: usize,
    /// Largest `∫|φ||ψ_cont|` at which a spectrum is taken.
    pub overlap_tol: f64,
    pub controls: RunControls,
    pub exec: Execution,
}

impl FigureOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        FigureOptions {
            out_dir: out_dir.into(),
            tol: 3e-3,
            v_start: 1.0,
            max_halvings: 16,
            overlap_tol: 1e-3,
            controls: RunControls::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FigureReport {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn shapes() -> Vec<PotentialShape> {
    [ShapeKind::Square, ShapeKind::Parabolic, ShapeKind::Asymmetric]
        .into_iter()
        .map(|k| PotentialShape::new(k, 1.0).expect("unit half width"))
        .collect()
}

pub fn reproduce_figure(id: &str, opts: &FigureOptions) -> Result<FigureReport> {
    fs::create_dir_all(&opts.out_dir)?;
    let mut report = FigureReport::default();
    let mut meta = Sidecar::new();
    meta.set("figure", id);
    meta.set("t_tol", num(opts.controls.t_tol));
    meta.set("dx_tol", opts.controls.dx_tol.map(num).unwrap_or_else(|| "off".into()));
    meta.set("leak_limit", num(opts.controls.leak_limit));
    meta.set("max_points", opts.controls.max_points);
    match id {
        "fig2" => fig2(opts, &mut meta, &mut report)?,
        "fig3" => fig3(opts, &mut meta, &mut report)?,
        "fig4a" => culling_figure(id, 1.3, 0, opts, &mut meta, &mut report)?,
        "fig4b" => culling_figure(id, 2.7, 1, opts, &mut meta, &mut report)?,
        "fig4c" => culling_figure(id, 3.1, 2, opts, &mut meta, &mut report)?,
        "fig5" => fig5(opts, &mut meta, &mut report)?,
        "fig6" => fig6(opts, &mut meta, &mut report)?,
        other => return Err(Error::UnknownFigure(other.to_string())),
    }
    for w in &report.warnings {
        meta.set("warning", w);
    }
    let path = opts.out_dir.join(format!("{id}_meta.txt"));
    meta.write(&path)?;
    report.files.push(path);
    Ok(report)
}

fn csv_path(opts: &FigureOptions, name: &str) -> PathBuf {
    opts.out_dir.join(format!("{name}.csv"))
}

fn flag_unconverged(report: &mut FigureReport, curve: &str, results: &[SweepResult]) {
    for r in results {
        if !r.convergence.passed() {
            report.warnings.push(format!(
                "{curve}: point v={} not converged ({})",
                num(r.scenario.rate),
                r.convergence.describe()
            ));
        }
    }
}

fn fig2(opts: &FigureOptions, meta: &mut Sidecar, report: &mut FigureReport) -> Result<()> {
    let points: Vec<Scenario> = FIG2_NU.iter().map(|&nu| Scenario::zero_range(nu, 1.0, 1.0)).collect();
    let results = sweep(&points, &opts.controls, opts.exec)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec!["fit_large_nu", "fit_small_nu"];
    header.extend(output::RESULT_HEADER);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let (g0, g00) = fit_values(r.scenario.nu).expect("positive exponent");
            let mut row = vec![num(g0), num(g00)];
            row.extend(output::result_row(r));
            row
        })
        .collect();
    let path = csv_path(opts, "fig2_zero_range");
    output::write_csv(&path, &header, &rows)?;
    report.files.push(path);

    meta.set("reference_nu2", num(0.38));
    for (k, r) in results.iter().enumerate() {
        meta.record_run(&format!("nu{}", r.scenario.nu), r);
        if k > 0 && r.p_stay >= results[k - 1].p_stay {
            report.warnings.push(format!(
                "P not decreasing between nu={} and nu={}",
                results[k - 1].scenario.nu, r.scenario.nu
            ));
        }
    }
    flag_unconverged(report, "fig2", &results);
    Ok(())
}

fn fig3(opts: &FigureOptions, meta: &mut Sidecar, report: &mut FigureReport) -> Result<()> {
    let nu = 2.0;
    let runs = map_points(&FIG3_RUNS, opts.exec, |&(mu, v)| {
        emission_spectrum(&Scenario::zero_range(nu, v, mu), &opts.controls, opts.overlap_tol)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let labels = ["I", "II", "III"];
    let (mu_ref, v_ref) = FIG3_RUNS[0];
    let reference = &runs[0].spectrum;
    for (k, ((mu, v), run)) in FIG3_RUNS.iter().zip(&runs).enumerate() {
        let name = format!("fig3_curve_{}", labels[k]);
        let path = csv_path(opts, &name);
        output::write_spectrum(&path, &run.spectrum)?;
        report.files.push(path);
        meta.section(&name);
        meta.set("mu", num(*mu));
        meta.set("v", num(*v));
        meta.set("dx", num(run.meta.dx));
        meta.set("dt", num(run.meta.dt));
        meta.set("l_box", num(run.meta.l_box));
        meta.set("t_max", num(run.meta.t_max));
        meta.set("p_stay", num(run.p_stay));
        meta.set("total_yield", num(run.spectrum.total_yield));
        meta.set("overlap", num(run.overlap));
        meta.set("valid", run.spectrum.valid);
        if !run.decoupled || !run.spectrum.valid {
            report
                .warnings
                .push(format!("{name}: spectrum not decoupled or leaked (overlap {})", num(run.overlap)));
        }
        if k > 0 {
            let params = scaling_params(*mu, *v, mu_ref, v_ref, nu)?;
            let scaled = rescale_spectrum(&run.spectrum, &params);
            let name = format!("fig3_rescaled_{}", labels[k]);
            let path = csv_path(opts, &name);
            output::write_spectrum(&path, &scaled)?;
            report.files.push(path);
            meta.set("alpha", num(params.alpha));
            meta.set(
                "l1_distance_to_I_over_yield",
                num(scaled.l1_distance(reference) / reference.total_yield),
            );
        }
    }
    Ok(())
}

fn write_estimate(
    opts: &FigureOptions,
    name: &str,
    est: &AdiabaticEstimate,
    meta: &mut Sidecar,
    report: &mut FigureReport,
) -> Result<()> {
    let path = csv_path(opts, name);
    output::write_results(&path, &est.runs)?;
    report.files.push(path);
    meta.section(name);
    meta.set("p_limit", num(est.p_limit));
    meta.set("plateau_residual", num(est.plateau_residual));
    meta.set("plateau_converged", est.converged);
    for (k, r) in est.runs.iter().enumerate() {
        meta.record_run(&format!("run{k}"), r);
    }
    if !est.converged {
        report
            .warnings
            .push(format!("{name}: plateau not reached (residual {})", num(est.plateau_residual)));
    }
    flag_unconverged(report, name, &est.runs);
    Ok(())
}

fn write_reference(
    opts: &FigureOptions,
    name: &str,
    zr: &SweepResult,
    meta: &mut Sidecar,
    report: &mut FigureReport,
) -> Result<()> {
    let path = csv_path(opts, name);
    output::write_results(&path, std::slice::from_ref(zr))?;
    report.files.push(path);
    meta.section(name);
    meta.record_run("run0", zr);
    flag_unconverged(report, name, std::slice::from_ref(zr));
    Ok(())
}

fn shape_curves(
    id: &str,
    scenarios: Vec<Scenario>,
    zr: Scenario,
    opts: &FigureOptions,
    meta: &mut Sidecar,
    report: &mut FigureReport,
) -> Result<()> {
    let estimates = map_points(&scenarios, opts.exec, |s| {
        estimate_adiabatic_limit(s, opts.v_start, opts.tol, &opts.controls, opts.max_halvings)
    });
    let reference = retention(&zr, &opts.controls)?;
    for (s, est) in scenarios.iter().zip(estimates) {
        let est = est?;
        write_estimate(opts, &format!("{id}_{}", s.shape.kind().name()), &est, meta, report)?;
    }
    write_reference(opts, &format!("{id}_zero_range"), &reference, meta, report)
}

fn culling_figure(
    id: &str,
    nu: f64,
    n: usize,
    opts: &FigureOptions,
    meta: &mut Sidecar,
    report: &mut FigureReport,
) -> Result<()> {
    meta.set("nu", num(nu));
    meta.set("state", n);
    let scenarios = shapes()
        .into_iter()
        .map(|s| Scenario::culling(s, nu, opts.v_start, 1.0, n))
        .collect();
    shape_curves(id, scenarios, Scenario::zero_range(nu, 1.0, 1.0), opts, meta, report)
}

fn fig5(opts: &FigureOptions, meta: &mut Sidecar, report: &mut FigureReport) -> Result<()> {
    let nu = 3.4;
    meta.set("nu", num(nu));
    meta.set("depth", num(SQUEEZE_DEPTH));
    let scenarios = shapes()
        .into_iter()
        .map(|s| Scenario::squeezing(s, SQUEEZE_DEPTH, nu, opts.v_start, 1.0, 0))
        .collect();
    shape_curves("fig5", scenarios, Scenario::zero_range(nu, 1.0, 1.0), opts, meta, report)
}

fn fig6(opts: &FigureOptions, meta: &mut Sidecar, report: &mut FigureReport) -> Result<()> {
    let square = PotentialShape::new(ShapeKind::Square, 1.0)?;
    let pairs: Vec<(f64, f64)> = FIG6_PAIRS.to_vec();
    meta.set(
        "pairs",
        pairs.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" "),
    );
    let estimates = map_points(&pairs, opts.exec, |&(a, b)| {
        let s = Scenario::culling(square.clone(), a, opts.v_start, 1.0, 0).with_departure(b);
        estimate_adiabatic_limit(&s, opts.v_start, opts.tol, &opts.controls, opts.max_halvings)
    });
    for (&(a, b), est) in pairs.iter().zip(estimates) {
        let est = est?;
        let tag = format!("nu{a}_to{b}");
        write_estimate(opts, &format!("fig6_square_{tag}"), &est, meta, report)?;
        // Zero-range curve on the same rates, and the factorized reference.
        let zr_points: Vec<Scenario> = est
            .v_sequence
            .iter()
            .map(|&v| Scenario::zero_range(a, v, 1.0).with_departure(b))
            .collect();
        let zr = sweep(&zr_points, &opts.controls, opts.exec)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let name = format!("fig6_zero_range_{tag}");
        let path = csv_path(opts, &name);
        output::write_results(&path, &zr)?;
        report.files.push(path);
        meta.section(&name);
        for (k, r) in zr.iter().enumerate() {
            meta.record_run(&format!("run{k}"), r);
        }
        flag_unconverged(report, &name, &zr);
        let sym = sweep(
            &[Scenario::zero_range(a, 1.0, 1.0), Scenario::zero_range(b, 1.0, 1.0)],
            &opts.controls,
            opts.exec,
        )
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        meta.set("factorized_reference", num((sym[0].p_stay * sym[1].p_stay).sqrt()));
    }
    Ok(())
}
