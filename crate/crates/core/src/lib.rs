//! Closed-form Neumann functions (second-kind Green functions) for the unit
//! disk, the planar annulus `{mu < |z| < 1}` and the unit ball in any
//! dimension `d >= 3`, together with discrete Neumann energies, the
//! associated quadratic form and a set of independent numerical checks.
//!
//! The crate is `no_std` (with `alloc`) unless the default `std` feature is
//! enabled. IO, the command-line front-end and file formats live in the
//! companion `neumann` crate.
//!
//! Module map:
//!
//! - [`special`]: fundamental solution, sphere areas, double factorials and
//!   the Jacobi theta function `theta_1`.
//! - [`geometry`]: cylindrical points, domains, circle families and charge
//!   configurations, including the symmetrized configuration.
//! - [`kernels`]: the Neumann kernels and their diagonal regular parts.
//! - [`energy`]: discrete Neumann energy, quadratic form, potential and
//!   expansion coefficients.
//! - [`verification`]: PDE-property checks and independent oracles.
//! - [`harness`]: randomized trials and simplex search probing the
//!   extremality of equally spaced configurations.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

mod error;
pub mod energy;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod optim;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use energy::{EnergyReport, EnergyMetadata};
pub use geometry::{Circle, Configuration, CylPoint, Domain, PointSet, Scheme};
pub use kernels::{Kernel, NeumannKernel};
pub use special::Nome;
