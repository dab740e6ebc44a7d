use num_complex::Complex64;

use crate::lattice::TrapLattice;

/// Implicit-midpoint (Crank–Nicolson) stepper for `i ∂ψ/∂t = H ψ`.
///
/// One step solves `(W + i dt/2 S) ψ' = (W - i dt/2 S) ψ` with `S` evaluated at
/// the step midpoint. The propagator is the Cayley transform of a matrix that
/// is self-adjoint in the trapezoid inner product, hence exactly unitary there.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    diag: Vec<f64>,
    rhs: Vec<Complex64>,
    sweep: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(dim: usize) -> Self {
        CrankNicolson {
            diag: vec![0.0; dim],
            rhs: vec![Complex64::new(0.0, 0.0); dim],
            sweep: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Advances the unknowns `psi` by `dt` under the trap
    /// `-strength * W(x / width)`.
    pub fn step(
        &mut self,
        lattice: &TrapLattice,
        psi: &mut [Complex64],
        strength: f64,
        width: f64,
        dt: f64,
    ) {
        lattice.diagonal_into(strength, width, &mut self.diag);
        let w = lattice.weights();
        let n = psi.len();
        let tau = 0.5 * dt;
        let off = Complex64::new(0.0, tau * lattice.hopping());

        // rhs = (W - i tau S) psi
        for i in 0..n {
            let mut neighbours = Complex64::new(0.0, 0.0);
            if i > 0 {
                neighbours += psi[i - 1];
            }
            if i + 1 < n {
                neighbours += psi[i + 1];
            }
            self.rhs[i] = Complex64::new(w[i], -tau * self.diag[i]) * psi[i] - off * neighbours;
        }

        // Thomas sweep for (W + i tau S), constant off-diagonal `off`.
        let mut m = Complex64::new(w[0], tau * self.diag[0]);
        self.sweep[0] = off / m;
        psi[0] = self.rhs[0] / m;
        for i in 1..n {
            m = Complex64::new(w[i], tau * self.diag[i]) - off * self.sweep[i - 1];
            self.sweep[i] = off / m;
            psi[i] = (self.rhs[i] - off * psi[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            let next = psi[i + 1];
            psi[i] -= self.sweep[i] * next;
        }
    }
}
