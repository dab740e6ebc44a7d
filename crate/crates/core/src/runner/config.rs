//! Line-oriented scenario files.
//!
//! ```text
//! # settings before the first section apply to every scenario
//! t_tol = 1e-3
//! max_points = 16384
//!
//! [zero_range]
//! shape = delta
//! nu = 2
//! v = 1, 0.5, 0.25
//!
//! [square_limit]
//! shape = square
//! a = 1
//! nu = 1.3
//! limit = true
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::potentials::{PotentialShape, ShapeKind};

use super::adiabatic::estimate_adiabatic_limit;
use super::output::{self, num, Sidecar};
use super::scenario::{Drive, Scenario};
use super::single::RunControls;
use super::sweep::{sweep, Execution};

/// Plateau search settings of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSpec {
    pub v_start: f64,
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for LimitSpec {
    fn default() -> Self {
        LimitSpec {
            v_start: 1.0,
            tol: 3e-3,
            max_halvings: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub scenario: Scenario,
    /// Rates to sweep (ignored when `limit` is set).
    pub rates: Vec<f64>,
    pub limit: Option<LimitSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub controls: RunControls,
    pub scenarios: Vec<ScenarioSpec>,
}

type Section = (usize, String, BTreeMap<String, (usize, String)>);

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = vec![(0, String::new(), BTreeMap::new())];
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "unterminated section header"))?
                .trim();
            if name.is_empty() || out.iter().any(|s| s.1 == name) {
                return Err(err(line_no, format!("empty or repeated section name `{name}`")));
            }
            out.push((line_no, name.to_string(), BTreeMap::new()));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `key = value`"))?;
        let key = key.trim().to_lowercase();
        let map = &mut out.last_mut().expect("global section").2;
        if map.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

struct Keys<'a> {
    map: &'a BTreeMap<String, (usize, String)>,
    header: usize,
}

impl Keys<'_> {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|(l, v)| v.parse().map_err(|_| err(l, format!("`{key}` must be a number"))))
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| err(self.header, format!("missing `{key}`")))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|(l, v)| v.parse().map_err(|_| err(l, format!("`{key}` must be a whole number"))))
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|(l, v)| match v {
                "true" | "yes" | "on" => Ok(true),
                "false" | "no" | "off" => Ok(false),
                _ => Err(err(l, format!("`{key}` must be true or false"))),
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|(l, v)| {
                v.split(',')
                    .map(|s| s.trim().parse().map_err(|_| err(l, format!("bad number in `{key}`"))))
                    .collect()
            })
            .transpose()
    }

    fn check_known(&self, known: &[&str]) -> Result<()> {
        for (k, (l, _)) in self.map {
            if !known.contains(&k.as_str()) {
                return Err(err(*l, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }
}

const GLOBAL_KEYS: [&str; 8] = [
    "t_tol", "dx_tol", "leak_limit", "leak_retries", "max_points", "max_t_growths", "direct",
    "snapshots",
];
const SCENARIO_KEYS: [&str; 15] = [
    "shape", "a", "table", "mode", "depth", "nu", "nu_after", "v", "mu", "state", "limit",
    "v_start", "tol", "max_halvings", "description",
];

fn controls(keys: &Keys) -> Result<RunControls> {
    keys.check_known(&GLOBAL_KEYS)?;
    let mut c = RunControls::default();
    if let Some(x) = keys.f64("t_tol")? {
        c.t_tol = x;
    }
    if let Some((l, v)) = keys.raw("dx_tol") {
        c.dx_tol = if v == "off" {
            None
        } else {
            Some(v.parse().map_err(|_| err(l, "`dx_tol` must be a number or `off`"))?)
        };
    }
    if let Some(x) = keys.f64("leak_limit")? {
        c.leak_limit = x;
    }
    if let Some(x) = keys.usize("leak_retries")? {
        c.leak_retries = x;
    }
    if let Some(x) = keys.usize("max_points")? {
        c.max_points = x;
    }
    if let Some(x) = keys.usize("max_t_growths")? {
        c.max_t_growths = x;
    }
    if let Some(x) = keys.bool("direct")? {
        c.direct = x;
    }
    if let Some(x) = keys.list("snapshots")? {
        c.snapshot_times = x;
    }
    Ok(c)
}

fn scenario(name: &str, keys: &Keys, base_dir: &Path) -> Result<ScenarioSpec> {
    keys.check_known(&SCENARIO_KEYS)?;
    let at = |l: usize| move |e: Error| err(l, e.to_string());
    let (l, shape_name) = keys
        .raw("shape")
        .ok_or_else(|| err(keys.header, "missing `shape`"))?;
    let kind = ShapeKind::parse(shape_name).map_err(at(l))?;
    let shape = match kind {
        ShapeKind::Delta => PotentialShape::delta(),
        ShapeKind::Tabulated => {
            let (lt, file) = keys
                .raw("table")
                .ok_or_else(|| err(l, "tabulated shape needs `table = <csv path>`"))?;
            PotentialShape::from_csv(base_dir.join(file)).map_err(at(lt))?
        }
        _ => PotentialShape::new(kind, keys.f64("a")?.unwrap_or(1.0)).map_err(at(l))?,
    };
    let drive = match keys.raw("mode") {
        None | Some((_, "culling")) => Drive::Culling,
        Some((_, "squeezing")) => Drive::Squeezing {
            depth: keys.f64("depth")?.unwrap_or(1.0),
        },
        Some((lm, other)) => return Err(err(lm, format!("unknown mode `{other}`"))),
    };
    let nu = keys.required("nu")?;
    let mut sc = Scenario {
        shape,
        drive,
        nu,
        nu_after: None,
        rate: 1.0,
        mu: keys.f64("mu")?.unwrap_or(1.0),
        state: keys.usize("state")?.unwrap_or(0),
    };
    if let Some(nu2) = keys.f64("nu_after")? {
        sc = sc.with_departure(nu2);
    }
    let rates = keys.list("v")?.unwrap_or_else(|| vec![1.0]);
    let limit = match keys.bool("limit")? {
        Some(true) => {
            let d = LimitSpec::default();
            Some(LimitSpec {
                v_start: keys.f64("v_start")?.unwrap_or(d.v_start),
                tol: keys.f64("tol")?.unwrap_or(d.tol),
                max_halvings: keys.usize("max_halvings")?.unwrap_or(d.max_halvings),
            })
        }
        _ => None,
    };
    for &v in &rates {
        sc.clone().with_rate(v).validate().map_err(at(keys.header))?;
    }
    Ok(ScenarioSpec {
        name: name.to_string(),
        scenario: sc,
        rates,
        limit,
    })
}

/// Parses a config; relative table paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let secs = sections(text)?;
    let global = Keys { map: &secs[0].2, header: 1 };
    let controls = controls(&global)?;
    let scenarios = secs[1..]
        .iter()
        .map(|(line, name, map)| scenario(name, &Keys { map, header: *line }, base_dir))
        .collect::<Result<Vec<_>>>()?;
    if scenarios.is_empty() {
        return Err(err(1, "no scenario sections"));
    }
    Ok(RunConfig { controls, scenarios })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Runs every scenario; writes `<name>.csv`, `<name>_meta.txt` and, when
/// requested, snapshot files. Returns the files written.
pub fn execute(
    cfg: &RunConfig,
    out_dir: &Path,
    exec: Execution,
    dump_snapshots: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut ctl = cfg.controls.clone();
    if !dump_snapshots {
        ctl.snapshot_times.clear();
    }
    let mut files = Vec::new();
    for spec in &cfg.scenarios {
        let mut meta = Sidecar::new();
        meta.set("scenario", &spec.name);
        meta.set("label", spec.scenario.label());
        let results = match spec.limit {
            Some(lim) => {
                let est = estimate_adiabatic_limit(
                    &spec.scenario.clone().with_rate(lim.v_start),
                    lim.v_start,
                    lim.tol,
                    &ctl,
                    lim.max_halvings,
                )?;
                meta.set("p_limit", num(est.p_limit));
                meta.set("plateau_residual", num(est.plateau_residual));
                meta.set("plateau_tol", num(lim.tol));
                meta.set("plateau_converged", est.converged);
                est.runs
            }
            None => {
                let points: Vec<Scenario> = spec
                    .rates
                    .iter()
                    .map(|&v| spec.scenario.clone().with_rate(v))
                    .collect();
                sweep(&points, &ctl, exec).into_iter().collect::<Result<Vec<_>>>()?
            }
        };
        for (k, r) in results.iter().enumerate() {
            meta.record_run(&format!("run{k}"), r);
        }
        let csv = out_dir.join(format!("{}.csv", spec.name));
        output::write_results(&csv, &results)?;
        files.push(csv);
        if dump_snapshots {
            for r in &results {
                for psi in &r.snapshots {
                    let p = out_dir.join(format!(
                        "{}_v{}_t{}.csv",
                        spec.name,
                        num(r.scenario.rate),
                        num(psi.time)
                    ));
                    output::write_field(&p, psi)?;
                    files.push(p);
                }
            }
        }
        let side = out_dir.join(format!("{}_meta.txt", spec.name));
        meta.write(&side)?;
        files.push(side);
    }
    Ok(files)
}
