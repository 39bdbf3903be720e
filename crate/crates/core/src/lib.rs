//! Weighted equilibrium measures and L^p-optimal monic polynomials with
//! varying weights `w^n = exp(-n V)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: potentials, condensers, quadrature grids, discrete measures.
//! * [`equilibrium`]: the discrete weighted energy problem and Fekete points.
//! * [`lpopt`]: discrete orthonormal bases and the p = 2, 1 <= p < inf and
//!   p = inf optimal-polynomial solvers, plus weighted norms.
//! * [`geometry`]: roots, convex hulls, the contraction bound and
//!   root-localization reports.
//! * [`potential`]: logarithmic potentials, Green's functions, the
//!   `f_n` functional, moment checks, the gap certificate search and the
//!   restriction-ratio fit.
//! * [`harness`]: scenario configs, the experiment pipeline and reports.

pub mod domain;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lpopt;
pub mod potential;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
