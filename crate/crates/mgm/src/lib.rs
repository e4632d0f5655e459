//! Meshfree geometric multilevel solver for elliptic PDEs on surface point clouds.
//!
//! The library discretizes the Laplace-Beltrami operator on a point cloud with
//! either polyharmonic-spline RBF finite differences or generalized finite
//! differences, builds a multilevel hierarchy by Poisson-disk-style point
//! thinning with radial-basis transfer operators, and solves the resulting
//! sparse systems with a V-cycle iteration, standalone or as a right
//! preconditioner for GMRES and BiCGSTAB.

pub mod coarsen;
pub mod discretize;
pub mod error;
pub mod geom;
pub mod io;
pub mod krylov;
pub mod la;
pub mod multilevel;
pub mod transfer;

pub use error::{Error, Result};
