//! The parameter sets behind the published figures.

use crate::params::{HabitSpec, Mode, TypeVector};

/// Which parameter a figure panel varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    P,
    Delta,
    Alpha,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::P => "p",
            SweepKind::Delta => "delta",
            SweepKind::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub mode: Mode,
    /// Base type; `p` is the value used when the set is run without a sweep.
    pub o: TypeVector,
    pub habit: HabitSpec,
    /// Wealth level at which feedback controls are plotted.
    pub x_eval: f64,
    pub sweep: SweepKind,
    pub sweep_values: Vec<f64>,
}

impl Preset {
    /// `(type, habit)` for one sweep value.
    pub fn at(&self, value: f64) -> (TypeVector, HabitSpec) {
        let mut o = self.o;
        let mut habit = self.habit;
        match self.sweep {
            SweepKind::P => o.p = value,
            SweepKind::Delta => habit.delta = value,
            SweepKind::Alpha => habit.alpha = value,
        }
        (o, habit)
    }
}

fn ty(mu: f64, sigma: f64, p: f64) -> TypeVector {
    TypeVector { mu, sigma, p }
}

/// Risk-aversion sweep under linear habits. The text lists p = 0.2, 0.3, 0.5
/// while the figure caption lists 0.2, 0.5, 0.7; the text values are used.
pub fn fig1_top() -> Preset {
    Preset {
        name: "fig1_top",
        mode: Mode::Linear,
        o: ty(0.2, 0.6, 0.5),
        habit: HabitSpec::new(5.0, 1.0, 0.1, 2.0),
        x_eval: 5.0,
        sweep: SweepKind::P,
        sweep_values: vec![0.2, 0.3, 0.5],
    }
}

pub const FIG1_TOP_CAPTION_P: [f64; 3] = [0.2, 0.5, 0.7];

pub fn fig1_bottom() -> Preset {
    Preset {
        name: "fig1_bottom",
        mode: Mode::Multiplicative,
        o: ty(0.2, 0.2, 0.5),
        habit: HabitSpec::new(5.0, 10.0, 0.1, 2.0),
        x_eval: 1.0,
        sweep: SweepKind::P,
        sweep_values: vec![0.2, 0.5, 0.7],
    }
}

pub fn fig2_top() -> Preset {
    Preset {
        name: "fig2_top",
        mode: Mode::Linear,
        o: ty(0.1, 0.1, 0.1),
        habit: HabitSpec::new(3.0, 0.5, 0.1, 2.0),
        x_eval: 2.0,
        sweep: SweepKind::Delta,
        sweep_values: vec![0.1, 0.2, 0.3],
    }
}

pub fn fig2_bottom() -> Preset {
    Preset {
        name: "fig2_bottom",
        mode: Mode::Multiplicative,
        o: ty(0.2, 0.2, 0.4),
        habit: HabitSpec::new(3.0, 10.0, 0.1, 2.0),
        x_eval: 1.0,
        sweep: SweepKind::Delta,
        sweep_values: vec![0.1, 0.2, 0.3],
    }
}

pub fn fig3() -> Preset {
    Preset {
        name: "fig3",
        mode: Mode::Multiplicative,
        o: ty(0.1, 0.8, 0.5),
        habit: HabitSpec::new(3.0, 0.2, 0.1, 2.0),
        x_eval: 1.0,
        sweep: SweepKind::Alpha,
        sweep_values: vec![0.5, 0.8, 1.0],
    }
}

pub fn all() -> Vec<Preset> {
    vec![fig1_top(), fig1_bottom(), fig2_top(), fig2_bottom(), fig3()]
}

pub fn by_name(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}
