//! Reproducible Gaussian streams keyed by `(seed, agent, path)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent counter-based stream. The ChaCha stream id is
/// `(agent << 32) | path`, so adding agents or paths never reshuffles the
/// draws of existing ones.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    drawn: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, drawn: 0, rng }
    }

    pub fn for_agent_path(seed: u64, agent: u32, path: u32) -> Self {
        Self::new(seed, stream_index(agent, path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of normals drawn so far.
    pub fn counter(&self) -> u64 {
        self.drawn
    }

    pub fn normal(&mut self) -> f64 {
        self.drawn += 1;
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw on `[0, 1)`; not counted as a normal.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn fill_normals(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.rng.sample(StandardNormal);
        }
        self.drawn += out.len() as u64;
    }
}

pub fn stream_index(agent: u32, path: u32) -> u64 {
    ((agent as u64) << 32) | path as u64
}

pub fn gaussian_stream(rng: &mut RngStream, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    rng.fill_normals(&mut out);
    out
}
