//! Trap shapes, drive schedules, and the critical strengths/widths at which a
//! bound state sits exactly at the continuum threshold.
//!
//! Every shape is normalized to unit area and vanishes outside `[-a, a]`.
//! Potentials are attractive: the trap energy is `-strength * W(x / width)`.

use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::stationary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Delta,
    Square,
    Parabolic,
    Asymmetric,
    Tabulated,
}

impl ShapeKind {
    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Delta => "delta",
            ShapeKind::Square => "square",
            ShapeKind::Parabolic => "parabolic",
            ShapeKind::Asymmetric => "asymmetric",
            ShapeKind::Tabulated => "tabulated",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "delta" | "zr" | "zero-range" => Ok(ShapeKind::Delta),
            "square" | "w1" | "i" => Ok(ShapeKind::Square),
            "parabolic" | "w2" | "ii" => Ok(ShapeKind::Parabolic),
            "asymmetric" | "w3" | "iii" => Ok(ShapeKind::Asymmetric),
            "tabulated" => Ok(ShapeKind::Tabulated),
            other => Err(invalid(format!("unknown shape kind `{other}`"))),
        }
    }
}

/// Piecewise-linear profile with precomputed cumulative integral.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    x: Vec<f64>,
    w: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Table {
    fn value(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return 0.0;
        }
        let j = self.segment(x);
        let t = (x - self.x[j]) / (self.x[j + 1] - self.x[j]);
        self.w[j] + t * (self.w[j + 1] - self.w[j])
    }

    fn antiderivative(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return 0.0;
        }
        if x >= self.x[n - 1] {
            return self.cumulative[n - 1];
        }
        let j = self.segment(x);
        let h = x - self.x[j];
        let slope = (self.w[j + 1] - self.w[j]) / (self.x[j + 1] - self.x[j]);
        self.cumulative[j] + self.w[j] * h + 0.5 * slope * h * h
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }
}

/// Normalized trap profile `W(x)` with support `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialShape {
    kind: ShapeKind,
    half_width: f64,
    table: Option<Table>,
}

impl PotentialShape {
    pub fn delta() -> Self {
        PotentialShape {
            kind: ShapeKind::Delta,
            half_width: 0.0,
            table: None,
        }
    }

    /// Builds one of the analytic shapes. `a` is ignored for the delta kind.
    pub fn new(kind: ShapeKind, a: f64) -> Result<Self> {
        match kind {
            ShapeKind::Delta => Ok(Self::delta()),
            ShapeKind::Tabulated => Err(invalid(
                "tabulated shapes are built with PotentialShape::tabulated",
            )),
            _ => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(invalid(format!("half width must be positive, got {a}")));
                }
                Ok(PotentialShape {
                    kind,
                    half_width: a,
                    table: None,
                })
            }
        }
    }

    /// Builds a shape from samples `(x, W)`; the profile is linearly
    /// interpolated, rescaled to unit area, and zero outside the table.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("tabulated profile needs at least two points"));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("tabulated abscissae must be distinct"));
        }
        if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(invalid("tabulated profile contains non-finite values"));
        }
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mut w: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let total: f64 = x
            .windows(2)
            .zip(w.windows(2))
            .map(|(xs, ws)| 0.5 * (ws[0] + ws[1]) * (xs[1] - xs[0]))
            .sum();
        if !(total > 0.0) {
            return Err(Error::NonPositiveIntegral(total));
        }
        w.iter_mut().for_each(|v| *v /= total);
        let mut cumulative = vec![0.0; x.len()];
        for j in 1..x.len() {
            cumulative[j] = cumulative[j - 1] + 0.5 * (w[j - 1] + w[j]) * (x[j] - x[j - 1]);
        }
        let half_width = x[0].abs().max(x[x.len() - 1].abs());
        Ok(PotentialShape {
            kind: ShapeKind::Tabulated,
            half_width,
            table: Some(Table { x, w, cumulative }),
        })
    }

    /// Loads a two-column `x,W` CSV. Lines starting with `#` and a non-numeric
    /// header row are skipped.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Config {
                    line: i + 1,
                    msg: "expected two columns".into(),
                });
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(w)) => pts.push((x, w)),
                _ if pts.is_empty() => continue,
                _ => {
                    return Err(Error::Config {
                        line: i + 1,
                        msg: format!("cannot parse `{line}`"),
                    })
                }
            }
        }
        Self::tabulated(&pts)
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn is_delta(&self) -> bool {
        self.kind == ShapeKind::Delta
    }

    /// `W(x)` at unit width. The delta profile is infinite at the origin.
    pub fn profile(&self, x: f64) -> f64 {
        let a = self.half_width;
        if self.kind != ShapeKind::Tabulated && x.abs() > a {
            return 0.0;
        }
        match self.kind {
            ShapeKind::Delta => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            ShapeKind::Square => 0.5 / a,
            ShapeKind::Parabolic => 0.75 * (a * a - x * x) / (a * a * a),
            ShapeKind::Asymmetric => (a - x) / (2.0 * a * a),
            ShapeKind::Tabulated => self.table.as_ref().map_or(0.0, |t| t.value(x)),
        }
    }

    /// `F(x) = ∫_{-∞}^{x} W`, with `F(+∞) = 1`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let a = self.half_width;
        if self.kind == ShapeKind::Delta {
            return if x > 0.0 {
                1.0
            } else if x < 0.0 {
                0.0
            } else {
                0.5
            };
        }
        if self.kind == ShapeKind::Tabulated {
            return self.table.as_ref().map_or(0.0, |t| t.antiderivative(x));
        }
        if x <= -a {
            return 0.0;
        }
        if x >= a {
            return 1.0;
        }
        match self.kind {
            ShapeKind::Square => (x + a) / (2.0 * a),
            ShapeKind::Parabolic => 0.75 * (a * a * x - x * x * x / 3.0) / (a * a * a) + 0.5,
            ShapeKind::Asymmetric => (a * x - 0.5 * x * x + 1.5 * a * a) / (2.0 * a * a),
            ShapeKind::Delta | ShapeKind::Tabulated => unreachable!(),
        }
    }

    /// Mean of `W(x / width)` over the cell `[center - dx/2, center + dx/2]`.
    ///
    /// Cell averaging keeps the discretized trap's area exact, which makes
    /// step discontinuities and narrow (even sub-cell) wells second order.
    pub fn cell_average(&self, center: f64, dx: f64, width: f64) -> f64 {
        let lo = (center - 0.5 * dx) / width;
        let hi = (center + 0.5 * dx) / width;
        width * (self.antiderivative(hi) - self.antiderivative(lo)) / dx
    }

    /// `∫ W` by composite Simpson on `2 * panels` intervals across the support
    /// (exact for the polynomial shapes). The delta shape returns 1.
    pub fn integral(&self, panels: usize) -> f64 {
        match (&self.kind, &self.table) {
            (ShapeKind::Delta, _) => 1.0,
            (ShapeKind::Tabulated, Some(t)) => t
                .x
                .windows(2)
                .zip(t.w.windows(2))
                .map(|(xs, ws)| 0.5 * (ws[0] + ws[1]) * (xs[1] - xs[0]))
                .sum(),
            _ => {
                let a = self.half_width;
                let m = 2 * panels.max(1);
                let h = 2.0 * a / m as f64;
                let mut s = self.profile(-a) + self.profile(a);
                for k in 1..m {
                    let x = -a + k as f64 * h;
                    s += if k % 2 == 1 { 4.0 } else { 2.0 } * self.profile(x);
                }
                s * h / 3.0
            }
        }
    }
}

/// How the trap is driven through the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveMode {
    /// Depth `rho_c + (v|t|)^nu` at fixed unit width.
    Culling { base_strength: f64 },
    /// Width `L_c + (v|t|)^nu` at fixed depth `rho`.
    Squeezing { base_width: f64, depth: f64 },
}

/// Time law of the trap. `nu` applies for `t < 0`, `nu_after` for `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSchedule {
    pub mode: DriveMode,
    pub nu: f64,
    pub nu_after: f64,
    pub rate: f64,
    pub state_index: usize,
}

impl TrapSchedule {
    pub fn culling(base_strength: f64, nu: f64, rate: f64, state_index: usize) -> Result<Self> {
        Self::build(DriveMode::Culling { base_strength }, nu, nu, rate, state_index)
    }

    pub fn squeezing(
        base_width: f64,
        depth: f64,
        nu: f64,
        rate: f64,
        state_index: usize,
    ) -> Result<Self> {
        if !(depth > 0.0) {
            return Err(invalid(format!("squeezing depth must be positive, got {depth}")));
        }
        Self::build(
            DriveMode::Squeezing { base_width, depth },
            nu,
            nu,
            rate,
            state_index,
        )
    }

    /// Same drive with a different exponent on the departure side.
    pub fn with_departure(mut self, nu_after: f64) -> Result<Self> {
        if !(nu_after > 0.0 && nu_after.is_finite()) {
            return Err(invalid(format!("exponent must be positive, got {nu_after}")));
        }
        self.nu_after = nu_after;
        Ok(self)
    }

    /// The symmetric schedule that uses `nu_after` on both sides.
    pub fn mirrored_departure(&self) -> Self {
        TrapSchedule {
            nu: self.nu_after,
            ..*self
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    fn build(mode: DriveMode, nu: f64, nu_after: f64, rate: f64, n: usize) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid(format!("exponent must be positive, got {nu}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        match mode {
            DriveMode::Culling { base_strength } if !(base_strength >= 0.0) => {
                return Err(invalid(format!(
                    "base strength must be non-negative, got {base_strength}"
                )))
            }
            DriveMode::Squeezing { base_width, .. } if !(base_width >= 0.0) => {
                return Err(invalid(format!(
                    "base width must be non-negative, got {base_width}"
                )))
            }
            _ => {}
        }
        Ok(TrapSchedule {
            mode,
            nu,
            nu_after,
            rate,
            state_index: n,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.nu == self.nu_after
    }

    pub fn is_squeezing(&self) -> bool {
        matches!(self.mode, DriveMode::Squeezing { .. })
    }

    /// `(v|t|)^nu` or `(v|t|)^nu'`, depending on the sign of `t`.
    pub fn excursion(&self, t: f64) -> f64 {
        let p = if t < 0.0 { self.nu } else { self.nu_after };
        (self.rate * t.abs()).powf(p)
    }

    pub fn strength(&self, t: f64) -> f64 {
        match self.mode {
            DriveMode::Culling { base_strength } => base_strength + self.excursion(t),
            DriveMode::Squeezing { depth, .. } => depth,
        }
    }

    pub fn width(&self, t: f64) -> f64 {
        match self.mode {
            DriveMode::Culling { .. } => 1.0,
            DriveMode::Squeezing { base_width, .. } => base_width + self.excursion(t),
        }
    }
}

/// Trap energy `-strength(t) * W(x / width(t))`.
pub fn eval_potential(shape: &PotentialShape, schedule: &TrapSchedule, x: f64, t: f64) -> Result<f64> {
    if shape.is_delta() && schedule.is_squeezing() {
        return Err(Error::SqueezingDelta);
    }
    let s = schedule.strength(t);
    let w = schedule.width(t);
    if s == 0.0 || w == 0.0 {
        return Ok(0.0);
    }
    Ok(-s * shape.profile(x / w))
}

/// Controls for the threshold searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSearch {
    /// Lattice spacing at unit width, in units of the shape's half width.
    pub dx_rel: f64,
    /// Upper end of the strength bracket; `None` picks one that binds `n + 2` states.
    pub ceiling: Option<f64>,
    pub rel_tol: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch {
            dx_rel: 1.0 / 2000.0,
            ceiling: None,
            rel_tol: 1e-9,
        }
    }
}

impl CriticalSearch {
    pub fn with_dx(dx: f64, a: f64) -> Self {
        CriticalSearch {
            dx_rel: dx / a,
            ..Default::default()
        }
    }
}

fn default_ceiling(shape: &PotentialShape, mu: f64, n: usize) -> f64 {
    // A square well of the same area binds n + 2 states once
    // sqrt(2 mu V0) a > (n + 2) pi / 2.
    let a = shape.half_width();
    let k = (n as f64 + 2.0) * std::f64::consts::FRAC_PI_2 / a;
    4.0 * a * k * k / (2.0 * mu)
}

/// Smallest strength `rho` for which `rho * W` binds `n + 1` states.
pub fn find_critical_strength(
    shape: &PotentialShape,
    mu: f64,
    n: usize,
    search: &CriticalSearch,
) -> Result<f64> {
    if shape.is_delta() {
        return if n == 0 {
            Ok(0.0)
        } else {
            Err(Error::NoBracket { state: n, ceiling: f64::INFINITY })
        };
    }
    if !(mu > 0.0) {
        return Err(invalid(format!("mass must be positive, got {mu}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let dx = search.dx_rel * shape.half_width();
    let count = |rho: f64| stationary::threshold_count(shape, rho, 1.0, mu, dx);
    let mut hi = search
        .ceiling
        .unwrap_or_else(|| default_ceiling(shape, mu, n));
    if count(hi) < n + 1 {
        if search.ceiling.is_some() {
            return Err(Error::NoBracket { state: n, ceiling: hi });
        }
        let mut tries = 0;
        while count(hi) < n + 1 {
            hi *= 4.0;
            tries += 1;
            if tries > 20 {
                return Err(Error::NoBracket { state: n, ceiling: hi });
            }
        }
    }
    let mut lo = 0.0;
    while hi - lo > search.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= n + 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Width at which state `n` of `depth * W(x / L)` sits at threshold, with the
/// lattice spacing held fixed at `search.dx_rel * a`.
pub fn find_critical_width(
    shape: &PotentialShape,
    depth: f64,
    mu: f64,
    n: usize,
    search: &CriticalSearch,
) -> Result<f64> {
    if shape.is_delta() {
        return Err(Error::SqueezingDelta);
    }
    if n == 0 {
        return Err(Error::NoCriticalWidth(0));
    }
    if !(depth > 0.0) || !(mu > 0.0) {
        return Err(invalid("depth and mass must be positive"));
    }
    let dx = search.dx_rel * shape.half_width();
    let count = |l: f64| stationary::threshold_count(shape, depth, l, mu, dx);
    // Continuum estimate from the unit-width critical strength.
    let rho1 = find_critical_strength(shape, mu, n, search)?;
    let guess = (rho1 / depth).sqrt();
    let mut hi = guess * 1.5;
    let mut tries = 0;
    while count(hi) < n + 1 {
        hi *= 2.0;
        tries += 1;
        if tries > 40 {
            return Err(Error::NoBracket { state: n, ceiling: hi });
        }
    }
    let mut lo = guess / 1.5;
    while lo > 0.0 && count(lo) >= n + 1 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::NoCriticalWidth(n));
        }
    }
    while hi - lo > search.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= n + 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
