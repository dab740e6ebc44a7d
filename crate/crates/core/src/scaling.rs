//! Time/length rescaling that maps a drive `(μ, v)` onto `(μ', v')` with the
//! same exponent, and the checks built on it.

use crate::error::{invalid, Result};
use crate::observables::EnergySpectrum;

/// Scale factors `t → α t`, `x → β x` taking `(μ, v)` to `(μ', v')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub alpha: f64,
    pub beta: f64,
    pub source: (f64, f64),
    pub target: (f64, f64),
    pub nu: f64,
}

/// `α = (μ'/μ)^{1/(2ν+1)} (v'/v)^{2ν/(2ν+1)}`,
/// `β = (μ'/μ)^{(ν+1)/(2ν+1)} (v'/v)^{ν/(2ν+1)}`.
pub fn scaling_params(mu: f64, v: f64, mu2: f64, v2: f64, nu: f64) -> Result<ScalingParams> {
    if [mu, v, mu2, v2, nu].iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(invalid("scaling parameters must all be positive"));
    }
    let d = 2.0 * nu + 1.0;
    let rm = mu2 / mu;
    let rv = v2 / v;
    Ok(ScalingParams {
        alpha: rm.powf(1.0 / d) * rv.powf(2.0 * nu / d),
        beta: rm.powf((nu + 1.0) / d) * rv.powf(nu / d),
        source: (mu, v),
        target: (mu2, v2),
        nu,
    })
}

impl ScalingParams {
    pub fn inverse(&self) -> Self {
        ScalingParams {
            alpha: 1.0 / self.alpha,
            beta: 1.0 / self.beta,
            source: self.target,
            target: self.source,
            nu: self.nu,
        }
    }

    /// `self` followed by `next` (target of `self` must be the source of `next`).
    pub fn then(&self, next: &ScalingParams) -> Result<Self> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !(close(self.target.0, next.source.0) && close(self.target.1, next.source.1))
            || self.nu != next.nu
        {
            return Err(invalid("scalings do not chain"));
        }
        Ok(ScalingParams {
            alpha: self.alpha * next.alpha,
            beta: self.beta * next.beta,
            source: self.source,
            target: next.target,
            nu: self.nu,
        })
    }
}

/// Predicted spectrum of the target system: `E → αE`, `w → w/α`.
pub fn rescale_spectrum(spec: &EnergySpectrum, params: &ScalingParams) -> EnergySpectrum {
    let a = params.alpha;
    EnergySpectrum {
        samples: spec.samples.iter().map(|&(e, w)| (a * e, w / a)).collect(),
        total_yield: spec.total_yield,
        valid: spec.valid,
    }
}

/// `max - min` of the retention probabilities.
pub fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let p = scaling_params(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!((p.alpha, p.beta), (1.0, 1.0));
        let p = scaling_params(1.0, 1.0, 8.0, 1.0, 1.0).unwrap();
        assert!((p.alpha - 2.0).abs() < 1e-14 && (p.beta - 4.0).abs() < 1e-14);
        let p = scaling_params(1.0, 1.0, 1.0, 32.0, 2.0).unwrap();
        assert!((p.alpha - 16.0).abs() < 1e-12 && (p.beta - 4.0).abs() < 1e-13);
        assert!(scaling_params(0.0, 1.0, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn rescaling_keeps_yield() {
        let spec = EnergySpectrum {
            samples: vec![(0.1, 1.0), (0.2, 2.0), (0.4, 0.5)],
            total_yield: 0.3,
            valid: true,
        };
        let id = scaling_params(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(rescale_spectrum(&spec, &id), spec);
        let p = scaling_params(1.0, 1.0, 3.0, 0.5, 1.5).unwrap();
        let r = rescale_spectrum(&spec, &p);
        assert_eq!(r.total_yield, spec.total_yield);
        assert!((r.integral() - spec.integral()).abs() < 1e-14);
    }

    #[test]
    fn spread_of_single_value_is_zero() {
        assert_eq!(spread(&[0.38]), 0.0);
        assert!((spread(&[0.3, 0.5, 0.4]) - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn composition_and_inverse(
            m1 in 0.1f64..10.0, v1 in 0.1f64..10.0,
            m2 in 0.1f64..10.0, v2 in 0.1f64..10.0,
            m3 in 0.1f64..10.0, v3 in 0.1f64..10.0,
            nu in 0.1f64..5.0,
        ) {
            let ab = scaling_params(m1, v1, m2, v2, nu).unwrap();
            let bc = scaling_params(m2, v2, m3, v3, nu).unwrap();
            let ac = scaling_params(m1, v1, m3, v3, nu).unwrap();
            let chained = ab.then(&bc).unwrap();
            prop_assert!((chained.alpha / ac.alpha - 1.0).abs() < 1e-12);
            prop_assert!((chained.beta / ac.beta - 1.0).abs() < 1e-12);
            let ba = scaling_params(m2, v2, m1, v1, nu).unwrap();
            let round = ab.then(&ba).unwrap();
            prop_assert!((round.alpha - 1.0).abs() < 1e-12);
            prop_assert!((round.beta - 1.0).abs() < 1e-12);
            let inv = ab.inverse();
            prop_assert!((inv.alpha / ba.alpha - 1.0).abs() < 1e-12);
        }
    }
}
