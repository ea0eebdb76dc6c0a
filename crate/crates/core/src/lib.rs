//! Mean field equilibria for optimal consumption games with external habit
//! formation.
//!
//! Two preference families are covered:
//!
//! * **linear (addictive)** habits, where utility is taken of the surplus
//!   `C - Z̄` and consumption must stay above the population habit, and
//! * **multiplicative (non-addictive)** habits, where utility is taken of the
//!   ratio `C / Z̄^α`.
//!
//! For each family the crate computes the mean field equilibrium (value
//! function coefficients, feedback controls and the consistent habit curve
//! `Z̄`), simulates the finite-population game under the candidate strategies
//! built from that equilibrium, and measures how quickly the `n`-player
//! quantities approach their mean field limits.
//!
//! Module map:
//!
//! * [`grid`], [`params`], [`population`], [`rng`]: shared domain types,
//!   quadrature and random streams.
//! * [`linear`]: closed-form equilibrium under linear habits.
//! * [`multiplicative`]: Picard solver for the multiplicative equilibrium.
//! * [`game`]: Monte Carlo simulation of the `n`-player game.
//! * [`config`], [`table`], [`harness`]: configuration files, CSV output and
//!   the command implementations used by the `habitmfg` binary.

pub mod config;
pub mod error;
pub mod game;
pub mod grid;
pub mod harness;
pub mod linear;
pub mod multiplicative;
pub mod params;
pub mod population;
pub mod presets;
pub mod rng;
pub mod table;

pub use error::{Error, Result};
pub use grid::{make_grid, trapezoid_cumulative, HabitCurve, TimeGrid};
pub use params::{merton_rate, HabitSpec, Mode, TypeVector};
pub use population::{sample_population, Population, Scheme};
pub use rng::{gaussian_stream, RngStream};
