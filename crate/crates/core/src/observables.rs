//! Retention probabilities and the energy distribution of emitted particles.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::potentials::TrapSchedule;
use crate::propagator::WaveField;
use crate::stationary::BoundState;

/// `|∫ Ψ(x,0)² dx|²`: the unconjugated square, valid for time-symmetric drives
/// started in a real state.
pub fn p_stay_symmetric(psi_at_zero: &WaveField, schedule: &TrapSchedule) -> Result<f64> {
    if !schedule.is_symmetric() {
        return Err(Error::AsymmetricSchedule);
    }
    let g = &psi_at_zero.grid;
    Ok(g.c_product(&psi_at_zero.samples, &psi_at_zero.samples).norm_sqr())
}

/// `|⟨φ_n(T)|Ψ(T)⟩|²`.
pub fn p_stay_direct(psi_at_plus_t: &WaveField, phi: &BoundState) -> Result<f64> {
    psi_at_plus_t.grid.check_same(&phi.grid)?;
    let g = &psi_at_plus_t.grid;
    let amp = g.integrate_complex(|i| psi_at_plus_t.samples[i] * phi.wavefunction[i]);
    Ok(amp.norm_sqr())
}

/// `|∫ Ψ(x,0,ν) Ψ(x,0,ν') dx|²` for fields driven with the approach exponent
/// on one side and the departure exponent on the other.
pub fn p_stay_asymmetric(psi_nu: &WaveField, psi_nu_after: &WaveField) -> Result<f64> {
    psi_nu.grid.check_same(&psi_nu_after.grid)?;
    if psi_nu.mass != psi_nu_after.mass {
        return Err(Error::GridMismatch(format!(
            "masses differ: {} vs {}",
            psi_nu.mass, psi_nu_after.mass
        )));
    }
    Ok(psi_nu
        .grid
        .c_product(&psi_nu.samples, &psi_nu_after.samples)
        .norm_sqr())
}

/// Sampled density `w(E)` of emitted particles.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    /// `(E, w)` pairs, `E > 0` ascending.
    pub samples: Vec<(f64, f64)>,
    pub total_yield: f64,
    /// False when the field had reached the box walls.
    pub valid: bool,
}

impl EnergySpectrum {
    /// Trapezoid `∫ w dE` over the samples.
    pub fn integral(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0))
            .sum()
    }

    /// Linear interpolation of `w`, zero outside the sampled range.
    pub fn density(&self, e: f64) -> f64 {
        let s = &self.samples;
        if s.is_empty() || e < s[0].0 || e > s[s.len() - 1].0 {
            return 0.0;
        }
        let k = s.partition_point(|p| p.0 <= e);
        if k == 0 {
            return s[0].1;
        }
        if k >= s.len() {
            return s[s.len() - 1].1;
        }
        let (e0, w0) = s[k - 1];
        let (e1, w1) = s[k];
        w0 + (w1 - w0) * (e - e0) / (e1 - e0)
    }

    /// `∫ |w - w_other| dE` on the union of both sample sets.
    pub fn l1_distance(&self, other: &EnergySpectrum) -> f64 {
        let mut es: Vec<f64> = self
            .samples
            .iter()
            .chain(other.samples.iter())
            .map(|p| p.0)
            .collect();
        es.sort_by(f64::total_cmp);
        es.dedup();
        es.windows(2)
            .map(|p| {
                let a = (self.density(p[0]) - other.density(p[0])).abs();
                let b = (self.density(p[1]) - other.density(p[1])).abs();
                0.5 * (a + b) * (p[1] - p[0])
            })
            .sum()
    }
}

/// Populations `|⟨φ_n|ψ⟩|²` of the given bound states.
pub fn bound_populations(psi: &WaveField, states: &[BoundState]) -> Vec<f64> {
    states
        .iter()
        .map(|s| {
            psi.grid
                .integrate_complex(|i| psi.samples[i] * s.wavefunction[i])
                .norm_sqr()
        })
        .collect()
}

/// `ψ` with every bound component removed.
pub fn continuum_part(psi: &WaveField, states: &[BoundState]) -> Vec<Complex64> {
    let mut cont = psi.samples.clone();
    for s in states {
        let amp = psi.grid.integrate_complex(|i| psi.samples[i] * s.wavefunction[i]);
        for (c, &p) in cont.iter_mut().zip(&s.wavefunction) {
            *c -= amp * p;
        }
    }
    cont
}

/// `∫ |φ(x)| |ψ_cont(x)| dx`: how much the emitted wave still sits on top of
/// the bound state.
pub fn spatial_overlap(phi: &BoundState, cont: &[Complex64]) -> f64 {
    phi.grid.integrate(|i| phi.wavefunction[i].abs() * cont[i].norm())
}

/// Energy distribution of the emitted part of `psi`, from its projection on the
/// box sine modes `sin(k_j (x - x_0))`, `k_j = jπ / span`.
pub fn energy_distribution(psi: &WaveField, bound_states: &[BoundState], mu: f64) -> Result<EnergySpectrum> {
    for s in bound_states {
        psi.grid.check_same(&s.grid)?;
    }
    let grid = &psi.grid;
    let cont = continuum_part(psi, bound_states);
    let m = grid.len() - 1;
    let span = m as f64 * grid.dx();
    let coeffs = sine_transform(&cont[..]);
    let factor = grid.symmetry_factor();
    let scale = grid.dx() * grid.dx() * 2.0 / span;
    let k1 = std::f64::consts::PI / span;
    let energy = |j: f64| (j * k1).powi(2) / (2.0 * mu);

    let mut samples = Vec::with_capacity(m - 1);
    let mut total = 0.0;
    for j in 1..m {
        let p = factor * scale * coeffs[j].norm_sqr();
        total += p;
        let jf = j as f64;
        let de = 0.5 * (energy(jf + 1.0) - energy(jf - 1.0));
        samples.push((energy(jf), p / de));
    }
    let edge = grid.edge_probability(&cont, 0.1);
    Ok(EnergySpectrum {
        samples,
        total_yield: total,
        valid: edge < 1e-5,
    })
}

/// `S_j = Σ_{i=1}^{M-1} f_i sin(π i j / M)` for `j = 0..M`, via an FFT of the
/// odd extension (length `2M`). `f` holds all `M + 1` nodes; the end nodes
/// are ignored.
fn sine_transform(f: &[Complex64]) -> Vec<Complex64> {
    let m = f.len() - 1;
    let len = 2 * m;
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = planner.plan_fft_forward(len);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for i in 1..m {
        buf[i] = f[i];
        buf[len - i] = -f[i];
    }
    fft.process(&mut buf);
    // G_j = -2i S_j
    buf.truncate(m + 1);
    buf.iter().map(|g| Complex64::new(0.0, 0.5) * g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialShape;
    use crate::propagator::Grid;
    use crate::stationary::{solve_bound_states, BoundStateOptions};

    #[test]
    fn sine_transform_matches_direct_sum() {
        let m = 12;
        let f: Vec<Complex64> = (0..=m)
            .map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64).sqrt()))
            .collect();
        let fast = sine_transform(&f);
        for j in 1..m {
            let direct: Complex64 = (1..m)
                .map(|i| f[i] * (std::f64::consts::PI * (i * j) as f64 / m as f64).sin())
                .sum();
            assert!((fast[j] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn real_bound_state_retained_fully() {
        let grid = Grid::half_line(30.0, 3001).unwrap();
        let s = &solve_bound_states(
            &PotentialShape::delta(),
            1.0,
            1.0,
            1.0,
            &grid,
            &BoundStateOptions::default(),
        )
        .unwrap()[0];
        let psi = s.to_wave_field(0.0);
        let sched = TrapSchedule::culling(0.0, 2.0, 1.0, 0).unwrap();
        assert!((p_stay_symmetric(&psi, &sched).unwrap() - 1.0).abs() < 1e-12);
        assert!((p_stay_direct(&psi, s).unwrap() - 1.0).abs() < 1e-12);
        let asym = sched.with_departure(3.0).unwrap();
        assert!(matches!(
            p_stay_symmetric(&psi, &asym),
            Err(Error::AsymmetricSchedule)
        ));
        let spec = energy_distribution(&psi, std::slice::from_ref(s), 1.0).unwrap();
        assert!(spec.total_yield < 1e-8);
        assert!(spec.samples.iter().all(|&(e, w)| e > 0.0 && w >= 0.0));
    }

    #[test]
    fn spectrum_completeness_for_free_packet() {
        let grid = Grid::full_line(50.0, 2001).unwrap();
        let xs = grid.xs();
        let vals: Vec<Complex64> = xs
            .iter()
            .map(|&x| Complex64::from_polar((-(x * x) / 2.0).exp(), 1.3 * x))
            .collect();
        let mut psi = WaveField::new(grid, vals, 0.0, 1.0).unwrap();
        let n = psi.norm_sqr().sqrt();
        psi.samples.iter_mut().for_each(|v| *v /= n);
        let spec = energy_distribution(&psi, &[], 1.0).unwrap();
        assert!((spec.total_yield - 1.0).abs() < 1e-10);
        // Mode weights sum exactly; the trapezoid misses the 1/sqrt(E) piece below E_1.
        let e1 = spec.samples[0].0;
        let summed: f64 = spec
            .samples
            .iter()
            .enumerate()
            .map(|(i, &(_, w))| w * 2.0 * (i + 1) as f64 * e1)
            .sum();
        assert!((summed - 1.0).abs() < 1e-10);
        assert!((spec.integral() - 1.0).abs() < 1e-2, "{}", spec.integral());
        // mean energy of the packet: (k0² + 1/2) / 2 with σ = 1
        let mean: f64 = spec
            .samples
            .windows(2)
            .map(|p| 0.5 * (p[0].0 * p[0].1 + p[1].0 * p[1].1) * (p[1].0 - p[0].0))
            .sum();
        assert!((mean - (1.3f64.powi(2) + 0.5) / 2.0).abs() < 1e-3, "{mean}");
    }

    #[test]
    fn asymmetric_of_identical_fields_is_symmetric() {
        let grid = Grid::half_line(10.0, 101).unwrap();
        let vals: Vec<Complex64> = grid
            .xs()
            .iter()
            .map(|&x| Complex64::from_polar((-x).exp(), x))
            .collect();
        let psi = WaveField::new(grid, vals, 0.0, 1.0).unwrap();
        let sched = TrapSchedule::culling(0.0, 2.0, 1.0, 0).unwrap();
        assert_eq!(
            p_stay_asymmetric(&psi, &psi).unwrap(),
            p_stay_symmetric(&psi, &sched).unwrap()
        );
        let other = WaveField::new(grid, psi.samples.clone(), 0.0, 2.0).unwrap();
        assert!(p_stay_asymmetric(&psi, &other).is_err());
    }
}
