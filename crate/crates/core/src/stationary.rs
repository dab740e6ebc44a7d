//! Static bound states of the discretized trap.
//!
//! Eigenvalues come from Sturm-sequence bisection on the symmetric
//! tridiagonal lattice Hamiltonian and eigenvectors from inverse iteration;
//! only the handful of negative-energy states is ever computed.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lattice::TrapLattice;
use crate::potentials::PotentialShape;
use crate::propagator::{Domain, Grid, WaveField};

/// Stationary eigenpair, real-valued, normalized over the whole line.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    pub grid: Grid,
    /// Samples at every grid node (zero at the walls).
    pub wavefunction: Vec<f64>,
    pub nodes: usize,
    pub mass: f64,
}

impl BoundState {
    pub fn to_wave_field(&self, time: f64) -> WaveField {
        WaveField {
            grid: self.grid,
            samples: self
                .wavefunction
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
            time,
            mass: self.mass,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(|i| self.wavefunction[i] * self.wavefunction[i])
    }

    /// `κ = sqrt(2 μ |E|)`.
    pub fn decay_constant(&self) -> f64 {
        (2.0 * self.mass * self.energy.abs()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateOptions {
    /// Only the lowest `max_states` states are resolved.
    pub max_states: Option<usize>,
    /// Largest allowed `max|φ|` over the outer 5% of the box relative to the peak.
    pub tail_tolerance: Option<f64>,
}

impl Default for BoundStateOptions {
    fn default() -> Self {
        BoundStateOptions {
            max_states: None,
            tail_tolerance: Some(1e-8),
        }
    }
}

impl BoundStateOptions {
    pub fn lowest(n: usize) -> Self {
        BoundStateOptions {
            max_states: Some(n),
            ..Default::default()
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `lambda`.
pub fn sturm_count(d: &[f64], e: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let q_safe = if q.abs() < 1e-300 { 1e-300_f64.copysign(q) } else { q };
        q = (d[i] - lambda) - e[i - 1] * e[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_lower(d: &[f64], e: &[f64]) -> f64 {
    (0..d.len())
        .map(|i| {
            let l = if i > 0 { e[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < d.len() { e[i].abs() } else { 0.0 };
            d[i] - l - r
        })
        .fold(f64::INFINITY, f64::min)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection in `[lo, hi]`.
fn bisect_eigenvalue(d: &[f64], e: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector for the (simple) eigenvalue `lambda` by inverse iteration.
fn inverse_iteration(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    let scale = d.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let shift = lambda - 1e-13 * scale.max(lambda.abs());
    let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * ((i as f64) * 0.618).sin()).collect();
    let mut c = vec![0.0; n];
    let mut piv = vec![0.0; n];
    for _ in 0..4 {
        // Thomas solve of (T - shift) z = y in place.
        let mut m = d[0] - shift;
        if m.abs() < 1e-300 {
            m = 1e-300;
        }
        piv[0] = m;
        y[0] /= m;
        for i in 1..n {
            c[i - 1] = e[i - 1] / piv[i - 1];
            let mut m = d[i] - shift - e[i - 1] * c[i - 1];
            if m.abs() < 1e-300 {
                m = 1e-300;
            }
            piv[i] = m;
            y[i] = (y[i] - e[i - 1] * y[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
    }
    y
}

/// Strict sign changes of `values`, ignoring samples below `1e-12 * max|v|`.
pub fn count_nodes(values: &[f64]) -> usize {
    let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = 1e-12 * peak;
    let mut last = 0.0_f64;
    let mut changes = 0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Bound states (`E < 0`) of `-∂²/2μ - strength W(x / width)` on `grid`.
///
/// For the delta shape the width is ignored; on a half-line grid the well is
/// carried by the Robin boundary.
pub fn solve_bound_states(
    shape: &PotentialShape,
    strength: f64,
    width: f64,
    mu: f64,
    grid: &Grid,
    opts: &BoundStateOptions,
) -> Result<Vec<BoundState>> {
    if !(strength > 0.0) {
        return Err(invalid(format!("strength must be positive, got {strength}")));
    }
    let lattice = TrapLattice::new(*grid, shape, mu)?;
    let width = if shape.is_delta() { 1.0 } else { width };
    if !(width > 0.0) {
        return Err(invalid(format!("width must be positive, got {width}")));
    }
    bound_states_of(&lattice, strength, width, opts)
}

pub(crate) fn bound_states_of(
    lattice: &TrapLattice,
    strength: f64,
    width: f64,
    opts: &BoundStateOptions,
) -> Result<Vec<BoundState>> {
    let grid = *lattice.grid();
    let (d, e) = lattice.symmetric_form(strength, width);
    let n_neg = sturm_count(&d, &e, 0.0);
    let wanted = opts.max_states.map_or(n_neg, |m| m.min(n_neg));
    let lower = gershgorin_lower(&d, &e) - 1.0;
    let w = lattice.weights();
    let first = grid.unknowns().start;

    let mut states = Vec::with_capacity(wanted);
    for k in 0..wanted {
        let energy = bisect_eigenvalue(&d, &e, k, lower, 0.0);
        let y = inverse_iteration(&d, &e, energy);
        let mut phi = vec![0.0; grid.len()];
        for (j, yj) in y.iter().enumerate() {
            phi[first + j] = yj / w[j].sqrt();
        }
        let norm = grid.integrate(|i| phi[i] * phi[i]).sqrt();
        let peak_idx = (0..phi.len())
            .max_by(|&a, &b| phi[a].abs().total_cmp(&phi[b].abs()))
            .unwrap_or(0);
        let sign = if phi[peak_idx] < 0.0 { -1.0 } else { 1.0 };
        phi.iter_mut().for_each(|v| *v *= sign / norm);

        if let Some(tol) = opts.tail_tolerance {
            let ratio = tail_ratio(&grid, &phi);
            if ratio > tol {
                return Err(Error::BoxTooSmall { state: k, ratio });
            }
        }
        states.push(BoundState {
            energy,
            grid,
            nodes: count_nodes(&phi),
            wavefunction: phi,
            mass: lattice.mass(),
        });
    }
    Ok(states)
}

fn tail_ratio(grid: &Grid, phi: &[f64]) -> f64 {
    let n = grid.len();
    let edge = (n / 20).max(1);
    let peak = phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut tail = phi[n - 1 - edge..n - 1]
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if grid.domain() == Domain::FullLine {
        tail = tail.max(phi[1..=edge].iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    tail / peak
}

/// Analytic zero-range state `sqrt(μρ) e^{-μρ|x|}`, `E = -μρ²/2`, rescaled to
/// unit norm in the grid's quadrature.
pub fn zr_bound_state(rho: f64, mu: f64, grid: &Grid) -> Result<BoundState> {
    if !(rho > 0.0) || !(mu > 0.0) {
        return Err(invalid("zero-range strength and mass must be positive"));
    }
    let kappa = mu * rho;
    if kappa * grid.l_box() < 20.0 {
        return Err(Error::ZeroRangeBox(kappa * grid.l_box()));
    }
    let n = grid.len();
    let mut phi: Vec<f64> = (0..n)
        .map(|i| kappa.sqrt() * (-kappa * grid.x(i).abs()).exp())
        .collect();
    phi[n - 1] = 0.0;
    if grid.domain() == Domain::FullLine {
        phi[0] = 0.0;
    }
    let norm = grid.integrate(|i| phi[i] * phi[i]).sqrt();
    phi.iter_mut().for_each(|v| *v /= norm);
    Ok(BoundState {
        energy: -mu * rho * rho / 2.0,
        grid: *grid,
        wavefunction: phi,
        nodes: 0,
        mass: mu,
    })
}

/// Zero-energy solution of the infinite lattice, bounded (constant) on the
/// left: returns the samples across the support and the count of its zeros,
/// which equals the number of bound states.
fn zero_energy_solution(
    shape: &PotentialShape,
    rho: f64,
    width: f64,
    mu: f64,
    dx: f64,
) -> (Vec<f64>, Vec<f64>, usize) {
    let kinetic = 1.0 / (2.0 * mu * dx * dx);
    let reach = if shape.is_delta() {
        0.0
    } else {
        shape.half_width() * width
    };
    let j_hi = (reach / dx).ceil() as i64 + 2;
    let j_lo = -j_hi;
    let mut psi = Vec::with_capacity((j_hi - j_lo + 2) as usize);
    let mut cells = Vec::with_capacity(psi.capacity());
    let (mut prev, mut cur) = (1.0_f64, 1.0_f64);
    psi.push(cur);
    for j in j_lo..=j_hi {
        let x = j as f64 * dx;
        let c = if shape.is_delta() {
            if j == 0 {
                1.0 / dx
            } else {
                0.0
            }
        } else {
            shape.cell_average(x, dx, width)
        };
        cells.push(c);
        let next = 2.0 * cur - prev - rho * c / kinetic * cur;
        prev = cur;
        cur = next;
        psi.push(cur);
    }
    let mut zeros = count_sign_changes(&psi);
    let last = psi[psi.len() - 1];
    let slope = last - psi[psi.len() - 2];
    if last == 0.0 || last * slope < 0.0 {
        zeros += 1;
    }
    (psi, cells, zeros)
}

fn count_sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0_f64;
    let mut n = 0;
    for &x in v {
        if x == 0.0 {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            n += 1;
        }
        last = x;
    }
    n
}

/// Number of bound states of `rho W(x / width)` on an infinite lattice of
/// spacing `dx`, from the nodes of the zero-energy solution.
pub fn threshold_count(shape: &PotentialShape, rho: f64, width: f64, mu: f64, dx: f64) -> usize {
    if rho <= 0.0 {
        return 0;
    }
    zero_energy_solution(shape, rho, width, mu, dx).2
}

/// Coefficient `C` of the threshold law `E_n ≈ -C (rho - rho_c)^2` at unit
/// width, from the zero-energy solution at `rho_c`:
/// `κ ≈ 2μ δρ ∫Wψ₀² / (ψ₀(-∞)² + ψ₀(+∞)²)`.
pub fn threshold_coefficient(shape: &PotentialShape, rho_c: f64, mu: f64, dx: f64) -> f64 {
    let (psi, cells, _) = zero_energy_solution(shape, rho_c, 1.0, mu, dx);
    // psi[k] is the sample at the node of cells[k].
    let overlap: f64 = cells
        .iter()
        .enumerate()
        .map(|(k, c)| c * psi[k] * psi[k])
        .sum::<f64>()
        * dx;
    let left = psi[0];
    let right = psi[psi.len() - 1];
    let denom = left * left + right * right;
    2.0 * mu * overlap * overlap / (denom * denom)
}

/// Grid spacing relative to the trap width used by the adaptive solver.
const STATIC_POINTS_PER_WIDTH: f64 = 400.0;

/// State `n` of a static trap on a full-line grid with spacing
/// `width * a / STATIC_POINTS_PER_WIDTH`, enlarging the box until the tail
/// check passes.
pub fn adaptive_bound_state(
    shape: &PotentialShape,
    strength: f64,
    width: f64,
    mu: f64,
    n: usize,
) -> Result<BoundState> {
    if shape.is_delta() {
        return Err(invalid("adaptive solver needs a finite-range shape"));
    }
    let reach = shape.half_width() * width;
    let dx = reach / STATIC_POINTS_PER_WIDTH;
    let mut l_box = 4.0 * reach;
    for _ in 0..12 {
        let grid = Grid::with_spacing(Domain::FullLine, l_box, dx)?;
        match solve_bound_states(shape, strength, width, mu, &grid, &BoundStateOptions::lowest(n + 1)) {
            Ok(states) if states.len() > n => return Ok(states[n].clone()),
            Ok(_) => return Err(Error::StateMissing { state: n }),
            Err(Error::BoxTooSmall { .. }) => l_box *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BoxTooSmall { state: n, ratio: f64::NAN })
}

/// `(E_n(rho, L), γ^{-2} E_n(γ² rho, L'))` with `γ = L / L'`, each side from
/// its own adaptive solve.
pub fn static_energy_scaling_check(
    shape: &PotentialShape,
    rho: f64,
    l: f64,
    l_ref: f64,
    mu: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if shape.is_delta() {
        return Err(Error::SqueezingDelta);
    }
    if !(l > 0.0 && l_ref > 0.0) {
        return Err(invalid("widths must be positive"));
    }
    let gamma = l / l_ref;
    let direct = adaptive_bound_state(shape, rho, l, mu, n)?.energy;
    let scaled = adaptive_bound_state(shape, gamma * gamma * rho, l_ref, mu, n)?.energy;
    Ok((direct, scaled / (gamma * gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::ShapeKind;

    fn square() -> PotentialShape {
        PotentialShape::new(ShapeKind::Square, 1.0).unwrap()
    }

    #[test]
    fn sturm_counts_diagonal_matrix() {
        let d = [1.0, 2.0, 3.0];
        let e = [0.0, 0.0];
        assert_eq!(sturm_count(&d, &e, 0.5), 0);
        assert_eq!(sturm_count(&d, &e, 2.5), 2);
        assert_eq!(sturm_count(&d, &e, 10.0), 3);
    }

    #[test]
    fn narrow_square_well_matches_exact_even_state() {
        // depth 1/(2a) = 50, half width a: k tan(ka) = κ with k² + κ² = 100.
        let a = 0.01;
        let shape = PotentialShape::new(ShapeKind::Square, a).unwrap();
        let grid = Grid::with_spacing(Domain::FullLine, 30.0, 0.0005).unwrap();
        let states =
            solve_bound_states(&shape, 1.0, 1.0, 1.0, &grid, &BoundStateOptions::default()).unwrap();
        assert_eq!(states.len(), 1);
        let f = |kappa: f64| {
            let k = (100.0 - kappa * kappa).sqrt();
            k * (k * a).tan() - kappa
        };
        let (mut lo, mut hi) = (0.5, 1.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let exact = -0.5 * lo * lo;
        assert!((exact + 0.5).abs() < 0.01);
        assert!((states[0].energy - exact).abs() < 1e-4, "{} vs {exact}", states[0].energy);
    }

    #[test]
    fn two_states_between_thresholds() {
        let rho = std::f64::consts::PI.powi(2) / 4.0 * 2.0;
        let grid = Grid::with_spacing(Domain::FullLine, 40.0, 0.01).unwrap();
        let states =
            solve_bound_states(&square(), rho, 1.0, 1.0, &grid, &BoundStateOptions::default())
                .unwrap();
        assert_eq!(states.len(), 2);
        assert_eq!(states[0].nodes, 0);
        assert_eq!(states[1].nodes, 1);
        assert!(states[0].energy < states[1].energy && states[1].energy < 0.0);
    }

    #[test]
    fn weak_binding_limit() {
        // E ≈ -μ(∫V)²/2 = -μρ²/2 for ρ → 0.
        let rho = 0.01;
        let grid = Grid::with_spacing(Domain::FullLine, 3000.0, 0.02).unwrap();
        let states =
            solve_bound_states(&square(), rho, 1.0, 1.0, &grid, &BoundStateOptions::default())
                .unwrap();
        assert_eq!(states.len(), 1);
        let expected = -rho * rho / 2.0;
        assert!((states[0].energy / expected - 1.0).abs() < 0.02, "{}", states[0].energy);
    }

    #[test]
    fn zero_range_state() {
        let grid = Grid::half_line(40.0, 8001).unwrap();
        let s = zr_bound_state(1.0, 1.0, &grid).unwrap();
        assert_eq!(s.energy, -0.5);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        let s2 = zr_bound_state(2.0, 0.5, &grid).unwrap();
        assert_eq!(s2.energy, -1.0);
        assert!(matches!(
            zr_bound_state(0.1, 1.0, &grid),
            Err(Error::ZeroRangeBox(_))
        ));
    }

    #[test]
    fn robin_lattice_matches_embedded_delta() {
        let half = Grid::half_line(20.0, 2001).unwrap();
        let full = Grid::full_line(20.0, 4001).unwrap();
        let d = PotentialShape::delta();
        let opts = BoundStateOptions::default();
        let a = solve_bound_states(&d, 2.0, 1.0, 1.0, &half, &opts).unwrap();
        let b = solve_bound_states(&d, 2.0, 1.0, 1.0, &full, &opts).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(b.len(), 1);
        assert!((a[0].energy - b[0].energy).abs() < 1e-10 * a[0].energy.abs());
        assert!((a[0].energy + 2.0).abs() < 0.01);
    }

    #[test]
    fn box_too_small_is_reported() {
        let grid = Grid::with_spacing(Domain::FullLine, 3.0, 0.01).unwrap();
        let r = solve_bound_states(&square(), 0.5, 1.0, 1.0, &grid, &BoundStateOptions::default());
        assert!(matches!(r, Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn threshold_counts_match_square_well_thresholds() {
        let pi2 = std::f64::consts::PI.powi(2);
        let s = square();
        assert_eq!(threshold_count(&s, 0.1, 1.0, 1.0, 1e-3), 1);
        assert_eq!(threshold_count(&s, pi2 / 4.0 * 0.99, 1.0, 1.0, 1e-3), 1);
        assert_eq!(threshold_count(&s, pi2 / 4.0 * 1.01, 1.0, 1.0, 1e-3), 2);
        assert_eq!(threshold_count(&s, pi2 * 1.01, 1.0, 1.0, 1e-3), 3);
        assert_eq!(threshold_count(&PotentialShape::delta(), 3.0, 1.0, 1.0, 1e-2), 1);
    }

    #[test]
    fn zero_range_threshold_coefficient() {
        let c = threshold_coefficient(&square(), 0.0, 2.0, 1e-3);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_identity_trivial_and_delta() {
        let (a, b) = static_energy_scaling_check(&square(), 3.0, 1.0, 1.0, 1.0, 0).unwrap();
        assert_eq!(a, b);
        assert!(static_energy_scaling_check(&PotentialShape::delta(), 1.0, 1.0, 1.0, 1.0, 0).is_err());
    }
}
