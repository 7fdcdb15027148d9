//! Discrete Schrödinger operators with δ and δ′-interactions on polygonal
//! partitions of the plane.
//!
//! The crate is `no_std` (with `alloc`) and contains the numerical core:
//!
//! * [`geometry`]: polygonal partitions, neighbour graphs, exact colourings and
//!   the unit-circle phases used to compare δ′- and δ-forms;
//! * [`mesh`]: conforming triangulations with tagged interface edges;
//! * [`forms`]: P1 assembly of the δ-form on `H¹` and of the δ′-form on the
//!   broken space, plus the phase unitary and analytic test functions;
//! * [`eigen`]: a block preconditioned eigensolver for `A v = λ M v` and a
//!   dense oracle;
//! * [`closedform`]: analytic thresholds, wedge trace bounds, the star-graph
//!   minimax constant and the one-dimensional δ′ interval problem.
//!
//! IO, configuration and the command line live in the `deltaprime` crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod closedform;
pub mod cutoff;
pub mod eigen;
mod error;
pub mod forms;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
pub(crate) use error::invalid;
pub use num_complex::Complex64;

/// A point of the plane.
pub type Point = [f64; 2];
