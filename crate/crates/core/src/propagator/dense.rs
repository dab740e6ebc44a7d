use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::TrapLattice;
use crate::potentials::{PotentialShape, TrapSchedule};

use super::{check_time_span, lattice_for, step_count, WaveField};

/// Largest number of unknowns the dense oracle accepts.
pub const ORACLE_LIMIT: usize = 256;

/// Reference propagator: each step applies `exp(-i H(t_mid) dt)` exactly,
/// from a full eigendecomposition of the midpoint Hamiltonian.
///
/// Uses the same step sequence as [`super::propagate`], so the two differ only
/// by the Cayley-vs-exponential error of each step.
pub fn dense_oracle(
    psi: &WaveField,
    shape: &PotentialShape,
    schedule: &TrapSchedule,
    t_from: f64,
    t_to: f64,
    dt: f64,
) -> Result<WaveField> {
    let lattice = lattice_for(psi, shape, schedule)?;
    if lattice.dim() > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            n: lattice.dim(),
            limit: ORACLE_LIMIT,
        });
    }
    let mut out = psi.clone();
    if t_to == t_from {
        return Ok(out);
    }
    check_time_span(t_from, t_to, dt)?;
    let (steps, h) = step_count(t_from, t_to, dt);
    let first = psi.grid.unknowns().start;
    let w = lattice.weights();
    let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let dim = lattice.dim();

    let mut y_re = DVector::<f64>::zeros(dim);
    let mut y_im = DVector::<f64>::zeros(dim);
    for j in 0..dim {
        let v = psi.samples[first + j] * sqrt_w[j];
        y_re[j] = v.re;
        y_im[j] = v.im;
    }
    for k in 0..steps {
        let t = t_from + (k as f64 + 0.5) * h;
        let m = midpoint_matrix(&lattice, schedule.strength(t), schedule.width(t));
        let eig = m.symmetric_eigen();
        let v = &eig.eigenvectors;
        let c_re = v.transpose() * &y_re;
        let c_im = v.transpose() * &y_im;
        let mut r_re = DVector::<f64>::zeros(dim);
        let mut r_im = DVector::<f64>::zeros(dim);
        for j in 0..dim {
            let phase = Complex64::from_polar(1.0, -eig.eigenvalues[j] * h);
            let c = Complex64::new(c_re[j], c_im[j]) * phase;
            r_re[j] = c.re;
            r_im[j] = c.im;
        }
        y_re = v * r_re;
        y_im = v * r_im;
    }
    for j in 0..dim {
        out.samples[first + j] = Complex64::new(y_re[j], y_im[j]) / sqrt_w[j];
    }
    out.time = t_to;
    Ok(out)
}

fn midpoint_matrix(lattice: &TrapLattice, strength: f64, width: f64) -> DMatrix<f64> {
    let (d, e) = lattice.symmetric_form(strength, width);
    let n = d.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = d[i];
        if i + 1 < n {
            m[(i, i + 1)] = e[i];
            m[(i + 1, i)] = e[i];
        }
    }
    m
}
