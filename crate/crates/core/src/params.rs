//! Market/preference type vectors and habit parameters.

use crate::error::{Error, Result};

/// An agent's type `o = (μ, σ, p)`: drift and volatility of her dedicated
/// stock and the power-utility exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeVector {
    pub mu: f64,
    pub sigma: f64,
    pub p: f64,
}

impl TypeVector {
    pub fn new(mu: f64, sigma: f64, p: f64) -> Result<Self> {
        let o = Self { mu, sigma, p };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::config(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::config(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::config(format!("p must lie in (0,1), got {}", self.p)));
        }
        Ok(())
    }

    /// `a = μ²p / (2σ²(1−p)²)`.
    pub fn merton_rate(&self) -> f64 {
        let q = 1.0 - self.p;
        0.5 * self.mu * self.mu * self.p / (self.sigma * self.sigma * q * q)
    }

    /// Merton fraction `μ / ((1−p)σ²)`.
    pub fn merton_fraction(&self) -> f64 {
        self.mu / ((1.0 - self.p) * self.sigma * self.sigma)
    }

    /// Drift of the optimally invested surplus, `μ² / ((1−p)σ²)`.
    pub fn excess_growth(&self) -> f64 {
        self.mu * self.merton_fraction()
    }

    /// Volatility of the optimally invested surplus, `μ / ((1−p)σ)`.
    pub fn surplus_vol(&self) -> f64 {
        self.mu / ((1.0 - self.p) * self.sigma)
    }

    /// `1/(p−1)`, the exponent turning `g` into a consumption rate.
    pub fn inv_pm1(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }

    /// Componentwise sup-distance to another type vector.
    pub fn distance(&self, other: &TypeVector) -> f64 {
        (self.mu - other.mu)
            .abs()
            .max((self.sigma - other.sigma).abs())
            .max((self.p - other.p).abs())
    }
}

pub fn merton_rate(o: &TypeVector) -> f64 {
    o.merton_rate()
}

/// Habit preference family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Utility of the surplus `C − Z̄` (addictive).
    Linear,
    /// Utility of the ratio `C / Z̄^α` (non-addictive).
    Multiplicative,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Linear => "linear",
            Mode::Multiplicative => "multiplicative",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Mode::Linear),
            "multiplicative" | "mult" => Ok(Mode::Multiplicative),
            other => Err(Error::config(format!("mode must be linear or multiplicative, got {other:?}"))),
        }
    }
}

/// Habit parameters shared by the whole population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HabitSpec {
    pub x0: f64,
    pub z0: f64,
    pub delta: f64,
    pub alpha: f64,
    pub horizon: f64,
    /// Lower bound `ε < z0` used by the multiplicative problem.
    pub epsilon: f64,
}

impl HabitSpec {
    /// Spec with `α = 1` and the default `ε = min(z0/2, 0.01)`.
    pub fn new(x0: f64, z0: f64, delta: f64, horizon: f64) -> Self {
        Self { x0, z0, delta, alpha: 1.0, horizon, epsilon: default_epsilon(z0) }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    fn validate_common(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be > 0, got {v}")))
            }
        };
        pos("x0", self.x0)?;
        pos("z0", self.z0)?;
        pos("T", self.horizon)?;
        // δ = 0 is accepted as the degenerate no-feedback limit
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::config(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0,1], got {}", self.alpha)));
        }
        Ok(())
    }

    /// Linear habits need enough wealth to fund the initial habit forever:
    /// `x0 > z0*T`.
    pub fn validate_linear(&self) -> Result<()> {
        self.validate_common()?;
        if self.x0 <= self.z0 * self.horizon {
            return Err(Error::Infeasible(format!(
                "initial wealth cannot support addictive habit: need x0 > z0*T, got x0 = {} and z0*T = {}",
                self.x0,
                self.z0 * self.horizon
            )));
        }
        Ok(())
    }

    pub fn validate_mult(&self) -> Result<()> {
        self.validate_common()?;
        if !(self.epsilon > 0.0 && self.epsilon < self.z0) {
            return Err(Error::config(format!(
                "epsilon must satisfy 0 < epsilon < z0, got epsilon = {} and z0 = {}",
                self.epsilon, self.z0
            )));
        }
        Ok(())
    }

    /// `β = ε^{1/(1−p)}`.
    pub fn beta(&self, p: f64) -> f64 {
        self.epsilon.powf(1.0 / (1.0 - p))
    }
}

pub fn default_epsilon(z0: f64) -> f64 {
    (0.5 * z0).min(0.01)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn merton_rate_examples() {
        let o = TypeVector::new(0.2, 0.6, 0.5).unwrap();
        assert_relative_eq!(o.merton_rate(), 1.0 / 9.0, max_relative = 1e-14);
        assert_eq!(TypeVector::new(0.0, 1.0, 0.5).unwrap().merton_rate(), 0.0);
        assert_relative_eq!(merton_rate(&TypeVector::new(0.2, 0.2, 0.5).unwrap()), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn type_vector_invariants() {
        assert!(TypeVector::new(0.2, 0.0, 0.5).is_err());
        assert!(TypeVector::new(0.2, 0.2, 0.0).is_err());
        assert!(TypeVector::new(0.2, 0.2, 1.0).is_err());
        assert!(TypeVector::new(f64::NAN, 0.2, 0.5).is_err());
    }

    #[test]
    fn habit_feasibility() {
        let h = HabitSpec::new(5.0, 1.0, 0.1, 2.0);
        assert!(h.validate_linear().is_ok());
        let err = HabitSpec::new(1.0, 1.0, 0.1, 2.0).validate_linear().unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
        assert!(err.to_string().contains("x0 > z0*T"));
        assert!(HabitSpec::new(1.0, 1.0, 0.1, 2.0).with_alpha(1.5).validate_mult().is_err());
        assert!(HabitSpec::new(1.0, 1.0, 0.1, 2.0).with_alpha(0.0).validate_mult().is_err());
        let mut h = HabitSpec::new(3.0, 10.0, 0.1, 2.0);
        assert_eq!(h.epsilon, 0.01);
        assert!(h.validate_mult().is_ok());
        h.epsilon = 10.0;
        assert!(h.validate_mult().is_err());
    }

    #[test]
    fn beta_from_epsilon() {
        let h = HabitSpec::new(3.0, 10.0, 0.1, 2.0);
        assert_relative_eq!(h.beta(0.5), 1e-4, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn merton_rate_scale_invariant(mu in -1.0f64..1.0, sigma in 0.05f64..2.0, p in 0.05f64..0.95, c in 0.01f64..100.0) {
            let a = TypeVector::new(mu, sigma, p).unwrap().merton_rate();
            let b = TypeVector::new(c * mu, c * sigma, p).unwrap().merton_rate();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert!(a >= 0.0);
        }
    }
}
