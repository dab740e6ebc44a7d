//! Finite-difference Hamiltonian of a trap on a [`Grid`].
//!
//! The operator is stored in weighted form `S = W H`, where `W` holds the
//! trapezoid weights of the unknowns. `S` is real symmetric tridiagonal with a
//! constant off-diagonal, so `H` is self-adjoint in the trapezoid inner
//! product. On the half line the zero-range well enters through the
//! ghost-point Robin row `S_00 = K - rho / (2 dx)`, which coincides with an
//! on-site `-rho / dx` delta on the full line restricted to even states.

use crate::error::{invalid, Result};
use crate::potentials::PotentialShape;
use crate::propagator::{Domain, Grid, LeftBoundary};

#[derive(Debug, Clone)]
pub struct TrapLattice {
    grid: Grid,
    shape: PotentialShape,
    mu: f64,
    kinetic: f64,
    /// Unit-width cell averages of `W` at the unknowns (empty for Robin).
    unit_cells: Vec<f64>,
    weights: Vec<f64>,
}

impl TrapLattice {
    pub fn new(grid: Grid, shape: &PotentialShape, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid(format!("mass must be positive, got {mu}")));
        }
        let robin = grid.left_boundary() == LeftBoundary::Robin;
        match (shape.is_delta(), grid.domain(), robin) {
            (true, Domain::HalfLine, true) | (_, Domain::FullLine, _) => {}
            (true, Domain::HalfLine, false) => {
                return Err(invalid("a zero-range well on the half line needs the Robin boundary"))
            }
            (false, Domain::HalfLine, _) => {
                return Err(invalid("finite-range wells are propagated on the full line"))
            }
        }
        let dx = grid.dx();
        let unknowns = grid.unknowns();
        let unit_cells = if robin {
            Vec::new()
        } else {
            unknowns
                .clone()
                .map(|i| shape.cell_average(grid.x(i), dx, 1.0))
                .collect()
        };
        let weights = unknowns.map(|i| grid.weight(i)).collect();
        Ok(TrapLattice {
            grid,
            shape: shape.clone(),
            mu,
            kinetic: 1.0 / (2.0 * mu * dx * dx),
            unit_cells,
            weights,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> &PotentialShape {
        &self.shape
    }

    pub fn mass(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_robin(&self) -> bool {
        self.unit_cells.is_empty()
    }

    /// Constant off-diagonal of `S`.
    pub fn hopping(&self) -> f64 {
        -self.kinetic
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Diagonal of `S` for the trap `-strength * W(x / width)`.
    pub fn diagonal_into(&self, strength: f64, width: f64, out: &mut [f64]) {
        let k2 = 2.0 * self.kinetic;
        if self.is_robin() {
            out.fill(k2);
            out[0] = self.kinetic - strength / (2.0 * self.grid.dx());
            return;
        }
        if width == 1.0 {
            for (o, c) in out.iter_mut().zip(&self.unit_cells) {
                *o = k2 - strength * c;
            }
            return;
        }
        out.fill(k2);
        if strength == 0.0 || width == 0.0 {
            return;
        }
        let dx = self.grid.dx();
        let first = self.grid.unknowns().start;
        let reach = self.shape.half_width() * width + dx;
        let lo = ((-reach - self.grid.x(0)) / dx).floor().max(first as f64) as usize;
        let hi = (((reach - self.grid.x(0)) / dx).ceil() as usize).min(self.grid.len() - 2);
        for i in lo..=hi {
            out[i - first] -= strength * self.shape.cell_average(self.grid.x(i), dx, width);
        }
    }

    pub fn diagonal(&self, strength: f64, width: f64) -> Vec<f64> {
        let mut d = vec![0.0; self.dim()];
        self.diagonal_into(strength, width, &mut d);
        d
    }

    /// Symmetric tridiagonal `W^{-1/2} S W^{-1/2}`: `(diag, offdiag)`.
    pub fn symmetric_form(&self, strength: f64, width: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.diagonal(strength, width);
        let w = &self.weights;
        let diag = d.iter().zip(w).map(|(di, wi)| di / wi).collect();
        let off = w
            .windows(2)
            .map(|p| self.hopping() / (p[0] * p[1]).sqrt())
            .collect();
        (diag, off)
    }
}
