//! Reduced-model inversion toolbox.
//!
//! Two strategies for suppressing the clutter that a reduced forward model
//! introduces into inverse problems: statistical compensation through an
//! empirical approximation-error model, and orthogonal projection onto the
//! complement of the estimated clutter subspace (built either from error
//! samples or by sketching the clutter operator with prior draws).
//!
//! Two desk-scale pipelines exercise the machinery end to end: coarsened
//! fanbeam X-ray tomography ([`tomo`]) and complete-electrode-model EIT under
//! boundary-shape uncertainty ([`eit`]).
//!
//! See the `examples/` directory for runnable entry points, and the `modred`
//! binary for the command-line front end.

pub mod baecore;
pub mod cli;
pub mod eit;
pub mod numkit;
pub mod priors;
pub mod spotlight;
pub mod tomo;

mod error;

pub use error::{Error, Result};
