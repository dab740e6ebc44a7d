use crate::error::{invalid, Error, Result};
use crate::propagator::ApproachScales;
use crate::potentials::{
    find_critical_strength, find_critical_width, CriticalSearch, PotentialShape, TrapSchedule,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Strength `ρ_c + (v|t|)^ν` at unit width.
    Culling,
    /// Width `L_c + (v|t|)^ν` at fixed strength `depth`.
    Squeezing { depth: f64 },
}

impl Drive {
    pub fn name(&self) -> &'static str {
        match self {
            Drive::Culling => "culling",
            Drive::Squeezing { .. } => "squeezing",
        }
    }
}

/// One physical setup; the threshold offset (`ρ_c` or `L_c`) is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub shape: PotentialShape,
    pub drive: Drive,
    pub nu: f64,
    /// Exponent after `t = 0`; `None` for a time-symmetric drive.
    pub nu_after: Option<f64>,
    pub rate: f64,
    pub mu: f64,
    pub state: usize,
}

impl Scenario {
    pub fn zero_range(nu: f64, rate: f64, mu: f64) -> Self {
        Scenario {
            shape: PotentialShape::delta(),
            drive: Drive::Culling,
            nu,
            nu_after: None,
            rate,
            mu,
            state: 0,
        }
    }

    pub fn culling(shape: PotentialShape, nu: f64, rate: f64, mu: f64, state: usize) -> Self {
        Scenario {
            shape,
            drive: Drive::Culling,
            nu,
            nu_after: None,
            rate,
            mu,
            state,
        }
    }

    pub fn squeezing(
        shape: PotentialShape,
        depth: f64,
        nu: f64,
        rate: f64,
        mu: f64,
        state: usize,
    ) -> Self {
        Scenario {
            shape,
            drive: Drive::Squeezing { depth },
            nu,
            nu_after: None,
            rate,
            mu,
            state,
        }
    }

    pub fn with_departure(mut self, nu_after: f64) -> Self {
        self.nu_after = if nu_after == self.nu { None } else { Some(nu_after) };
        self
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn departure(&self) -> f64 {
        self.nu_after.unwrap_or(self.nu)
    }

    pub fn is_symmetric(&self) -> bool {
        self.nu_after.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(invalid(format!("mass must be positive, got {}", self.mu)));
        }
        if self.shape.is_delta() {
            if let Drive::Squeezing { .. } = self.drive {
                return Err(Error::SqueezingDelta);
            }
            if self.state > 0 {
                return Err(Error::StateMissing { state: self.state });
            }
        }
        TrapSchedule::culling(0.0, self.nu, self.rate, 0)?.with_departure(self.departure())?;
        Ok(())
    }

    /// The full schedule, with the threshold offset found on a lattice of
    /// spacing `dx` (or the default fine lattice).
    pub fn schedule(&self, dx: Option<f64>) -> Result<TrapSchedule> {
        self.validate()?;
        let search = match dx {
            Some(dx) if !self.shape.is_delta() => CriticalSearch::with_dx(dx, self.shape.half_width()),
            _ => CriticalSearch::default(),
        };
        let n = self.state;
        let sched = match self.drive {
            Drive::Culling => {
                let base = find_critical_strength(&self.shape, self.mu, n, &search)?;
                TrapSchedule::culling(base, self.nu, self.rate, n)?
            }
            Drive::Squeezing { depth } => {
                let base = if n == 0 {
                    0.0
                } else {
                    find_critical_width(&self.shape, depth, self.mu, n, &search)?
                };
                TrapSchedule::squeezing(base, depth, self.nu, self.rate, n)?
            }
        };
        sched.with_departure(self.departure())
    }

    /// Short tag for file names.
    /// Well range at `-t*` over the threshold length `ℓ*`, the larger of the
    /// two sides. Universal behaviour needs it small; zero for the delta.
    pub fn range_ratio(&self) -> Result<f64> {
        if self.shape.is_delta() {
            return Ok(0.0);
        }
        let sched = self.schedule(None)?;
        [sched, sched.mirrored_departure()]
            .iter()
            .map(|s| {
                let sc = ApproachScales::of(&self.shape, s, self.mu)?;
                Ok(self.shape.half_width() * s.width(-sc.time) / sc.length)
            })
            .try_fold(0.0, |m: f64, r: Result<f64>| Ok(m.max(r?)))
    }

    pub fn label(&self) -> String {
        let mut s = format!(
            "{}_{}_nu{}",
            self.shape.kind().name(),
            self.drive.name(),
            self.nu
        );
        if let Some(nu2) = self.nu_after {
            s.push_str(&format!("_to{nu2}"));
        }
        s.push_str(&format!("_n{}", self.state));
        s
    }
}
