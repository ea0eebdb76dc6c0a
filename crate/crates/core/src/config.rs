//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments run to the end of the line
//! mode = multiplicative
//! T = 2
//! delta_list = 0.1, 0.2, 0.3
//! sim.n_list = 8, 16, 32
//! ```
//!
//! `figure = <name>` pre-fills every model parameter from a named preset;
//! explicit keys override it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::multiplicative::{SolverMode, SolverOptions};
use crate::params::{default_epsilon, HabitSpec, Mode, TypeVector};
use crate::population::Scheme;
use crate::presets::{self, Preset, SweepKind};

const KEYS: &[&str] = &[
    "mode",
    "figure",
    "T",
    "n_steps",
    "mu",
    "sigma",
    "p",
    "x0",
    "z0",
    "delta",
    "alpha",
    "epsilon",
    "x_eval",
    "p_list",
    "delta_list",
    "alpha_list",
    "output_dir",
    "sim.n_list",
    "sim.M",
    "sim.gap_M",
    "sim.seed",
    "sim.n_steps",
    "sim.scheme",
    "sim.kappa",
    "sim.agent",
    "solver.tol",
    "solver.max_iter",
    "solver.damping",
    "solver.stitch_blocks",
];

const REQUIRED: &[&str] = &["mode", "T", "mu", "sigma", "p", "x0", "z0", "delta"];

pub const DEFAULT_N_STEPS: usize = 2000;
pub const DEFAULT_SEED: u64 = 42;

/// Monte Carlo block (`sim.*` keys).
#[derive(Debug, Clone, PartialEq)]
pub struct SimBlock {
    pub n_list: Vec<usize>,
    /// System replications for habit-deviation metrics.
    pub m: usize,
    /// Replications per population size for Nash gaps.
    pub gap_m: usize,
    pub seed: u64,
    pub n_steps: usize,
    pub scheme: Scheme,
    pub agent: usize,
}

impl Default for SimBlock {
    fn default() -> Self {
        Self {
            n_list: vec![8, 16, 32, 64, 128, 256],
            m: 200,
            gap_m: 2000,
            seed: DEFAULT_SEED,
            n_steps: 200,
            scheme: Scheme::Homogeneous,
            agent: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub figure: Option<String>,
    pub o: TypeVector,
    pub habit: HabitSpec,
    pub n_steps: usize,
    pub x_eval: f64,
    pub sweep: Option<(SweepKind, Vec<f64>)>,
    pub output_dir: PathBuf,
    pub sim: SimBlock,
    pub solver: SolverOptions,
    /// SHA-256 of the canonical rendering, excluding seed and output directory.
    pub hash: String,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.habit.horizon, self.n_steps)
    }

    pub fn sim_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.habit.horizon, self.sim.n_steps)
    }

    /// `(value, type, habit)` for every sweep value, or the base parameters
    /// alone when no sweep is configured.
    pub fn sweep_points(&self) -> Vec<(f64, TypeVector, HabitSpec)> {
        match &self.sweep {
            None => vec![(f64::NAN, self.o, self.habit)],
            Some((kind, values)) => values
                .iter()
                .map(|&v| {
                    let (o, h) = apply_sweep(*kind, v, self.o, self.habit);
                    (v, o, h)
                })
                .collect(),
        }
    }

    /// Name of the swept parameter, `"none"` without a sweep.
    pub fn sweep_name(&self) -> &'static str {
        self.sweep.as_ref().map_or("none", |(k, _)| k.name())
    }

    /// Canonical `key = value` rendering with every default filled in.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "mode = {}", self.mode.name());
        let _ = writeln!(s, "figure = {}", self.figure.as_deref().unwrap_or("none"));
        let _ = writeln!(s, "T = {:?}", self.habit.horizon);
        let _ = writeln!(s, "n_steps = {}", self.n_steps);
        let _ = writeln!(s, "mu = {:?}", self.o.mu);
        let _ = writeln!(s, "sigma = {:?}", self.o.sigma);
        let _ = writeln!(s, "p = {:?}", self.o.p);
        let _ = writeln!(s, "x0 = {:?}", self.habit.x0);
        let _ = writeln!(s, "z0 = {:?}", self.habit.z0);
        let _ = writeln!(s, "delta = {:?}", self.habit.delta);
        let _ = writeln!(s, "alpha = {:?}", self.habit.alpha);
        let _ = writeln!(s, "epsilon = {:?}", self.habit.epsilon);
        let _ = writeln!(s, "x_eval = {:?}", self.x_eval);
        if let Some((kind, values)) = &self.sweep {
            let _ = writeln!(s, "{}_list = {}", kind.name(), list(values));
        }
        let ns: Vec<String> = self.sim.n_list.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "sim.n_list = {}", ns.join(","));
        let _ = writeln!(s, "sim.M = {}", self.sim.m);
        let _ = writeln!(s, "sim.gap_M = {}", self.sim.gap_m);
        let _ = writeln!(s, "sim.n_steps = {}", self.sim.n_steps);
        let _ = writeln!(s, "sim.scheme = {}", self.sim.scheme.name());
        let _ = writeln!(s, "sim.kappa = {:?}", self.sim.scheme.kappa());
        let _ = writeln!(s, "sim.agent = {}", self.sim.agent);
        let _ = writeln!(s, "solver.tol = {:?}", self.solver.tol);
        let _ = writeln!(s, "solver.max_iter = {}", self.solver.max_iter);
        let _ = writeln!(s, "solver.damping = {:?}", self.solver.damping);
        let _ = writeln!(s, "solver.stitch_blocks = {}", self.solver.stitch_blocks);
        s
    }
}

fn apply_sweep(kind: SweepKind, v: f64, mut o: TypeVector, mut habit: HabitSpec) -> (TypeVector, HabitSpec) {
    match kind {
        SweepKind::P => o.p = v,
        SweepKind::Delta => habit.delta = v,
        SweepKind::Alpha => habit.alpha = v,
    }
    (o, habit)
}

pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw = parse_pairs(text)?;
    let preset = match raw.get("figure") {
        Some(name) => Some(
            presets::by_name(name).ok_or_else(|| Error::config(format!("figure: unknown preset {name:?}")))?,
        ),
        None => None,
    };
    if preset.is_none() {
        for key in REQUIRED {
            if !raw.contains_key(*key) {
                return Err(Error::config(format!("missing required key {key}")));
            }
        }
    }
    let r = Reader { raw: &raw };
    let base = preset.as_ref();
    let mode = match raw.get("mode") {
        Some(m) => m.parse::<Mode>().map_err(|e| Error::config(format!("mode: {e}")))?,
        None => base.map(|p| p.mode).expect("preset present"),
    };
    let from_preset = |f: fn(&Preset) -> f64| base.map(f);
    let o = TypeVector {
        mu: r.f64_or("mu", from_preset(|p| p.o.mu))?,
        sigma: r.f64_or("sigma", from_preset(|p| p.o.sigma))?,
        p: r.f64_or("p", from_preset(|p| p.o.p))?,
    };
    let z0 = r.f64_or("z0", from_preset(|p| p.habit.z0))?;
    let habit = HabitSpec {
        x0: r.f64_or("x0", from_preset(|p| p.habit.x0))?,
        z0,
        delta: r.f64_or("delta", from_preset(|p| p.habit.delta))?,
        alpha: r.f64_or("alpha", Some(base.map_or(1.0, |p| p.habit.alpha)))?,
        horizon: r.f64_or("T", from_preset(|p| p.habit.horizon))?,
        epsilon: r.f64_or("epsilon", Some(default_epsilon(z0)))?,
    };
    let n_steps = r.usize_or("n_steps", DEFAULT_N_STEPS)?;
    let x_eval = r.f64_or("x_eval", Some(base.map_or(habit.x0, |p| p.x_eval)))?;

    let mut lists = Vec::new();
    for (key, kind) in [("p_list", SweepKind::P), ("delta_list", SweepKind::Delta), ("alpha_list", SweepKind::Alpha)] {
        if let Some(v) = r.f64_list(key)? {
            lists.push((kind, v));
        }
    }
    if lists.len() > 1 {
        return Err(Error::config("at most one of p_list, delta_list, alpha_list may be given"));
    }
    let sweep = lists.pop().or_else(|| base.map(|p| (p.sweep, p.sweep_values.clone())));

    let defaults = SimBlock::default();
    let n_list = match r.get("sim.n_list") {
        Some(_) => r.usize_list("sim.n_list")?,
        None => defaults.n_list.clone(),
    };
    let kappa = r.f64_or("sim.kappa", Some(0.5))?;
    let scheme = match r.get("sim.scheme").unwrap_or("homogeneous") {
        "homogeneous" => Scheme::Homogeneous,
        "shrinking" => Scheme::Shrinking { kappa },
        "seeded_shrinking" => Scheme::SeededShrinking { kappa },
        other => {
            return Err(Error::config(format!(
                "sim.scheme must be homogeneous, shrinking or seeded_shrinking, got {other:?}"
            )))
        }
    };
    let sim = SimBlock {
        n_list,
        m: r.usize_or("sim.M", defaults.m)?,
        gap_m: r.usize_or("sim.gap_M", defaults.gap_m)?,
        seed: r.u64_or("sim.seed", DEFAULT_SEED)?,
        n_steps: r.usize_or("sim.n_steps", defaults.n_steps)?,
        scheme,
        agent: r.usize_or("sim.agent", 0)?,
    };
    let stock = SolverOptions::default();
    let solver = SolverOptions {
        tol: r.f64_or("solver.tol", Some(stock.tol))?,
        max_iter: r.usize_or("solver.max_iter", stock.max_iter)?,
        damping: r.f64_or("solver.damping", Some(stock.damping))?,
        stitch_blocks: r.usize_or("solver.stitch_blocks", stock.stitch_blocks)?,
        mode: SolverMode::Picard,
        ..stock
    };
    let output_dir = PathBuf::from(r.get("output_dir").unwrap_or("out"));

    let mut cfg = ExperimentConfig {
        mode,
        figure: raw.get("figure").cloned(),
        o,
        habit,
        n_steps,
        x_eval,
        sweep,
        output_dir,
        sim,
        solver,
        hash: String::new(),
    };
    validate(&cfg)?;
    let digest = Sha256::digest(cfg.canonical().as_bytes());
    cfg.hash = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    TimeGrid::new(cfg.habit.horizon, cfg.n_steps).map_err(|e| keyed("n_steps", e))?;
    TimeGrid::new(cfg.habit.horizon, cfg.sim.n_steps).map_err(|e| keyed("sim.n_steps", e))?;
    for (_, o, habit) in cfg.sweep_points() {
        o.validate()?;
        match cfg.mode {
            // an unfundable habit is a configuration mistake here, not a runtime event
            Mode::Linear => habit.validate_linear().map_err(|e| match e {
                Error::Infeasible(m) => Error::Config(m),
                e => e,
            })?,
            Mode::Multiplicative => habit.validate_mult()?,
        }
    }
    if !(cfg.x_eval.is_finite() && cfg.x_eval > 0.0) {
        return Err(Error::config(format!("x_eval must be > 0, got {}", cfg.x_eval)));
    }
    if cfg.sim.n_list.iter().any(|&n| n == 0) {
        return Err(Error::config("sim.n_list entries must be >= 1"));
    }
    if cfg.sim.m < 2 || cfg.sim.gap_m < 2 {
        return Err(Error::config("sim.M and sim.gap_M must be at least 2"));
    }
    if cfg.sim.agent >= *cfg.sim.n_list.iter().min().expect("non-empty n_list") {
        return Err(Error::config("sim.agent must index an agent of the smallest population"));
    }
    let kappa = cfg.sim.scheme.kappa();
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::config(format!("sim.kappa must be >= 0, got {kappa}")));
    }
    let s = &cfg.solver;
    if !(s.tol > 0.0) || s.max_iter == 0 || !(s.damping > 0.0 && s.damping <= 1.0) || s.stitch_blocks == 0 {
        return Err(Error::config(
            "solver settings need tol > 0, max_iter >= 1, damping in (0,1], stitch_blocks >= 1",
        ));
    }
    Ok(())
}

fn keyed(key: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{key}: {m}")),
        e => e,
    }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(format!("line {}: unknown key {key}", lineno + 1)));
        }
        if value.is_empty() {
            return Err(Error::config(format!("{key}: empty value")));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::config(format!("{key}: given more than once")));
        }
    }
    Ok(out)
}

struct Reader<'a> {
    raw: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn f64_or(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            Some(v) => parse_f64(key, v),
            None => default.ok_or_else(|| Error::config(format!("missing required key {key}"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| Error::config(format!("{key}: expected a non-negative integer, got {v:?}"))),
            None => Ok(default),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| Error::config(format!("{key}: expected an unsigned integer, got {v:?}"))),
            None => Ok(default),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let values = v.split(',').map(|s| parse_f64(key, s.trim())).collect::<Result<Vec<_>>>()?;
        Ok(Some(values))
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.get(key).unwrap_or("");
        v.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse().map_err(|_| Error::config(format!("{key}: expected integers, got {s:?}")))
            })
            .collect()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| Error::config(format!("{key}: malformed number {v:?}")))?;
    if !x.is_finite() {
        return Err(Error::config(format!("{key}: value must be finite, got {v}")));
    }
    Ok(x)
}
