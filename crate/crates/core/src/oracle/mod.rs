//! Independent ground truth from the particle dynamics themselves: the
//! continuous-time Markov generator on a truncated window, its matrix
//! exponential by uniformization, and exact Gillespie trajectories.
//!
//! Dynamics: the particle at `x_i` with species `l` jumps right at rate
//! `b_l`. If `x_i + 1` is empty it moves there. If it holds a particle of
//! species `l' < l` the two exchange places; if `l' >= l` the jump is
//! suppressed.

mod generator;
mod gillespie;
mod uniformization;

pub use generator::{build_generator, default_window, moves, GeneratorWindow};
pub use gillespie::{gillespie, simulate_trajectory, EmpiricalDistribution, TrajectorySample};
pub use uniformization::{matrix_exponential_row, Uniformized};
