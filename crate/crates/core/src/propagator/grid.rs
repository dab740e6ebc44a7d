use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0, L_box]`, representing a wave function even in `x`.
    HalfLine,
    /// `[-L_box, L_box]`, with a node at the origin.
    FullLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftBoundary {
    Dirichlet,
    /// Log-derivative `-mu * rho(t)` at `x = 0`, i.e. a zero-range well.
    Robin,
}

/// Uniform mesh with hard walls at the outer end(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    domain: Domain,
    left: LeftBoundary,
    n_points: usize,
    dx: f64,
    l_box: f64,
}

impl Grid {
    /// Half line with a Robin condition at the origin.
    pub fn half_line(l_box: f64, n_points: usize) -> Result<Self> {
        Self::build(Domain::HalfLine, LeftBoundary::Robin, l_box, n_points)
    }

    pub fn half_line_dirichlet(l_box: f64, n_points: usize) -> Result<Self> {
        Self::build(Domain::HalfLine, LeftBoundary::Dirichlet, l_box, n_points)
    }

    /// Full line; `n_points` is bumped to the next odd number so that `x = 0`
    /// is a node.
    pub fn full_line(l_box: f64, n_points: usize) -> Result<Self> {
        let n = if n_points % 2 == 0 { n_points + 1 } else { n_points };
        Self::build(Domain::FullLine, LeftBoundary::Dirichlet, l_box, n)
    }

    /// Grid with spacing `dx_max` and a box of at least `l_box`.
    pub fn with_spacing(domain: Domain, l_box: f64, dx_max: f64) -> Result<Self> {
        if !(dx_max > 0.0) {
            return Err(invalid("grid spacing must be positive"));
        }
        // The box grows to a whole number of cells so the spacing is exact.
        let cells = ((l_box / dx_max) * (1.0 - 1e-12)).ceil().max(2.0) as usize;
        let l_box = cells as f64 * dx_max;
        match domain {
            Domain::HalfLine => Self::half_line(l_box, cells + 1),
            Domain::FullLine => Self::full_line(l_box, 2 * cells + 1),
        }
    }

    fn build(domain: Domain, left: LeftBoundary, l_box: f64, n_points: usize) -> Result<Self> {
        if !(l_box > 0.0 && l_box.is_finite()) {
            return Err(invalid(format!("box size must be positive, got {l_box}")));
        }
        if n_points < 4 {
            return Err(invalid(format!("grid needs at least 4 points, got {n_points}")));
        }
        let span = match domain {
            Domain::HalfLine => l_box,
            Domain::FullLine => 2.0 * l_box,
        };
        Ok(Grid {
            domain,
            left,
            n_points,
            dx: span / (n_points - 1) as f64,
            l_box,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn left_boundary(&self) -> LeftBoundary {
        self.left
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn l_box(&self) -> f64 {
        self.l_box
    }

    pub fn x(&self, i: usize) -> f64 {
        match self.domain {
            Domain::HalfLine => i as f64 * self.dx,
            Domain::FullLine => -self.l_box + i as f64 * self.dx,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the origin node.
    pub fn origin(&self) -> usize {
        match self.domain {
            Domain::HalfLine => 0,
            Domain::FullLine => (self.n_points - 1) / 2,
        }
    }

    /// Index range of the unknowns (nodes not pinned by a wall).
    pub fn unknowns(&self) -> std::ops::Range<usize> {
        let first = match (self.domain, self.left) {
            (Domain::HalfLine, LeftBoundary::Robin) => 0,
            _ => 1,
        };
        first..self.n_points - 1
    }

    /// Trapezoid weight (in units of dx) of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5
        } else {
            1.0
        }
    }

    /// Factor converting a sum over the mesh into a full-line integral.
    pub fn symmetry_factor(&self) -> f64 {
        match self.domain {
            Domain::HalfLine => 2.0,
            Domain::FullLine => 1.0,
        }
    }

    /// `∫ f dx` over the whole line (even extension on the half line).
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let s: f64 = (0..self.n_points).map(|i| self.weight(i) * f(i)).sum();
        s * self.dx * self.symmetry_factor()
    }

    pub fn integrate_complex(&self, f: impl Fn(usize) -> Complex64) -> Complex64 {
        let s: Complex64 = (0..self.n_points).map(|i| f(i) * self.weight(i)).sum();
        s * (self.dx * self.symmetry_factor())
    }

    /// `⟨a|b⟩ = ∫ conj(a) b`.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        self.integrate_complex(|i| a[i].conj() * b[i])
    }

    /// Unconjugated product `∫ a b`.
    pub fn c_product(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        self.integrate_complex(|i| a[i] * b[i])
    }

    pub fn norm_sqr(&self, a: &[Complex64]) -> f64 {
        self.integrate(|i| a[i].norm_sqr())
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.domain == other.domain
            && self.n_points == other.n_points
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/{} points/dx {} vs {:?}/{} points/dx {}",
                self.domain, self.n_points, self.dx, other.domain, other.n_points, other.dx
            )))
        }
    }

    /// Fraction of `|psi|^2` in the outer `fraction` of the box.
    pub fn edge_probability(&self, psi: &[Complex64], fraction: f64) -> f64 {
        let n_edge = ((self.n_points as f64) * fraction).ceil() as usize;
        let n_edge = n_edge.max(1);
        let mut s = 0.0;
        for i in self.n_points - n_edge..self.n_points {
            s += self.weight(i) * psi[i].norm_sqr();
        }
        if self.domain == Domain::FullLine {
            for i in 0..n_edge {
                s += self.weight(i) * psi[i].norm_sqr();
            }
        }
        s * self.dx * self.symmetry_factor()
    }
}

/// Complex wave function samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub samples: Vec<Complex64>,
    pub time: f64,
    pub mass: f64,
}

impl WaveField {
    pub fn new(grid: Grid, samples: Vec<Complex64>, time: f64, mass: f64) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for {} grid points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(WaveField {
            grid,
            samples,
            time,
            mass,
        })
    }

    pub fn from_real(grid: Grid, values: &[f64], time: f64, mass: f64) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            time,
            mass,
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.norm_sqr(&self.samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_declared_domain() {
        let g = Grid::half_line(10.0, 101).unwrap();
        assert!((g.dx() * 100.0 - 10.0).abs() < 1e-12);
        assert_eq!(g.unknowns(), 0..100);
        let f = Grid::full_line(5.0, 100).unwrap();
        assert_eq!(f.len(), 101);
        assert!((f.x(f.origin())).abs() < 1e-14);
        assert!((f.x(100) - 5.0).abs() < 1e-12);
        assert_eq!(f.unknowns(), 1..100);
    }

    #[test]
    fn half_line_integrals_double() {
        let g = Grid::half_line(40.0, 4001).unwrap();
        // ∫ e^{-2|x|} dx = 1 on the full line
        let v = g.integrate(|i| (-2.0 * g.x(i)).exp());
        assert!((v - 1.0).abs() < 1e-4);
    }
}
