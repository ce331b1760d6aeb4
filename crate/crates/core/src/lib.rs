//! Finite-volume simulation and verification of a four-species granuloma
//! chemotaxis model with signal-dependent sensitivity.
//!
//! The crate is organised bottom up: [`model`] holds the constants and
//! nonlinearities, [`discretization`] the spatial operators, [`timestepper`]
//! the positivity-preserving integrator, [`functionals`] the energies and
//! dissipation terms, [`verify`] the numerical test suites and [`io`] the
//! configuration, snapshot and diagnostics formats.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod functionals;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod timestepper;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
