//! Fixed-energy phase shifts of piecewise-constant spherically symmetric
//! potentials, and a multistart search for distinct potentials whose phase
//! shifts are practically the same.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward_solver;
pub mod global_search;
pub mod local_opt;
pub mod objective;
pub mod ode_oracle;
pub mod potential;
pub mod riccati_bessel;

pub use error::{BesselError, Error, Result};
pub use forward_solver::{phase_shift, phase_shift_table, PhaseShiftTable};
pub use potential::Potential;
