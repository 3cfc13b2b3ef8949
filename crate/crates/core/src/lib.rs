//! Generalized Godunov finite-volume solver for scalar conservation laws
//! `u_t + A(x, u)_x = 0` whose flux is discontinuous and degenerate in `x`,
//! written as `A(x, u) = g(beta(x, u))`.
//!
//! The crate is organised around the pipeline of a run:
//!
//! 1. [`flux`] describes the model and its bound constants.
//! 2. [`stationary`] computes the stationary states and the bound `M`.
//! 3. [`scheme`] owns the grid, the time step and the marching loop.
//! 4. [`diagnostics`] checks every discrete property along the way.
//! 5. [`reference`] provides two benchmark problems with exact solutions.
//! 6. [`config`], [`experiment`] and [`output`] drive runs, sweeps and reports
//!    from a TOML file; [`cli`] is the `adflux` command line.

pub mod cli;
pub mod coefficient;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod flux;
pub mod output;
pub mod reference;
pub mod scheme;
pub mod stationary;

pub use coefficient::{Breakpoints, SpatialCoefficient};
pub use error::{Error, Result};
pub use flux::{BoundSet, FluxModel, PlateauInfo};
pub use scheme::{Grid1D, Solver, SolverState, TimeStepping};
