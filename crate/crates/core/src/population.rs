//! Heterogeneous populations whose types approach a limit at rate `1/√n`.

use crate::error::{Error, Result};
use crate::params::TypeVector;
use crate::rng::RngStream;

pub const P_MIN: f64 = 0.05;
pub const P_MAX: f64 = 0.95;

/// How agent types are perturbed around the limit type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Homogeneous,
    /// `o_i = base + κ ζ_i / √n` with `ζ_i = (cos i, cos(2i+1), cos(3i+2))`.
    Shrinking { kappa: f64 },
    /// Same shrinkage with `ζ_i` uniform on `[-1,1]³`, drawn from the seed.
    SeededShrinking { kappa: f64 },
}

impl Scheme {
    pub fn kappa(&self) -> f64 {
        match *self {
            Scheme::Homogeneous => 0.0,
            Scheme::Shrinking { kappa } | Scheme::SeededShrinking { kappa } => kappa,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Homogeneous => "homogeneous",
            Scheme::Shrinking { .. } => "shrinking",
            Scheme::SeededShrinking { .. } => "seeded_shrinking",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<TypeVector>,
    pub base: TypeVector,
    pub scheme: Scheme,
    pub m_p_low: f64,
    pub m_p_high: f64,
}

impl Population {
    pub fn homogeneous(base: TypeVector, n: usize) -> Result<Self> {
        sample_population(base, n, Scheme::Homogeneous, 0)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// `max_i |o_i − base|` in the componentwise sup-norm.
    pub fn max_deviation(&self) -> f64 {
        self.agents.iter().map(|o| o.distance(&self.base)).fold(0.0, f64::max)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.agents.iter().all(|o| *o == self.base)
    }
}

pub fn sample_population(base: TypeVector, n: usize, scheme: Scheme, seed: u64) -> Result<Population> {
    base.validate()?;
    if n == 0 {
        return Err(Error::config("population size n must be at least 1"));
    }
    let kappa = scheme.kappa();
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::config(format!("kappa must be >= 0, got {kappa}")));
    }
    let scale = kappa / (n as f64).sqrt();
    // a dedicated stream well away from the (agent, path) simulation streams
    let mut rng = RngStream::new(seed, u64::MAX);
    let mut agents = Vec::with_capacity(n);
    for i in 1..=n {
        let zeta = match scheme {
            Scheme::Homogeneous => [0.0; 3],
            Scheme::Shrinking { .. } => {
                let x = i as f64;
                [x.cos(), (2.0 * x + 1.0).cos(), (3.0 * x + 2.0).cos()]
            }
            Scheme::SeededShrinking { .. } => {
                let mut z = [0.0; 3];
                for v in z.iter_mut() {
                    *v = uniform_pm1(&mut rng);
                }
                z
            }
        };
        let mu = base.mu + scale * zeta[0];
        let sigma = base.sigma + scale * zeta[1];
        let p = base.p + scale * zeta[2];
        if sigma <= 0.0 {
            return Err(Error::config(format!("perturbation drives sigma of agent {i} to {sigma} <= 0")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::config(format!("perturbation drives p of agent {i} to {p}, outside (0,1)")));
        }
        let p = if matches!(scheme, Scheme::Homogeneous) { p } else { p.clamp(P_MIN, P_MAX) };
        agents.push(TypeVector { mu, sigma, p });
    }
    let m_p_low = agents.iter().map(|o| o.p).fold(f64::INFINITY, f64::min);
    let m_p_high = agents.iter().map(|o| o.p).fold(f64::NEG_INFINITY, f64::max);
    Ok(Population { agents, base, scheme, m_p_low, m_p_high })
}

fn uniform_pm1(rng: &mut RngStream) -> f64 {
    2.0 * rng.uniform() - 1.0
}
