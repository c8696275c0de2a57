//! Classical and quantum (Nordheim) Boltzmann collision operators for hard
//! potentials, with the tooling around them: exact collision kinematics,
//! velocity grids and sphere rules, a numerical harness for weighted
//! convolution estimates, closed-form free transport, and a monotone
//! Kaniel-Shinbrot solver for the space-homogeneous equation.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{UnitVector, Vec3, Velocity};
