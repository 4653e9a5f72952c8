//! Simulator and analysis toolkit for dynamical quantum phase transitions
//! of dipolar-coupled 13C nuclear spins controlled by an NV- center.
//!
//! The crate is organized in layers:
//! - [`spin`]: registers, states, operators, partial traces;
//! - [`hamiltonian`]: every model hamiltonian plus field schedules and the
//!   shipped hyperfine datasets;
//! - [`propagation`]: exact and time-dependent propagators, Lindblad
//!   dephasing, the central-spin quench;
//! - [`analysis`]: Loschmidt echo, rate function, critical times, phase
//!   diagrams, entanglement measures, Fisher information;
//! - [`config`], [`scenario`], [`output`], [`svg`]: the `dqpt-sim` CLI.

pub mod error;
pub mod linalg;
pub mod spin;
pub mod hamiltonian;
pub mod propagation;
pub mod analysis;
pub mod config;
pub mod output;
pub mod svg;
pub mod scenario;

pub use error::{Error, Result};
