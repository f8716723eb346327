//! Brownian motion among Poissonian soft traps on hyperbolic space.
//!
//! The crate samples Feynman-Kac tilted path measures on `H^d` (hyperboloid
//! model), estimates survival constants, ground-state energies and eigenfunction
//! ratios by Monte Carlo, simulates the limiting Q-process by Doob transform, and
//! checks all of it against deterministic spectral computations on the radial
//! Schrodinger operator.
//!
//! Ensembles run on rayon when the `parallel` feature is on (default). Every
//! path draws from its own random stream, so results are identical with any
//! number of workers and without the feature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod feynman_kac;
pub mod fock;
pub mod geom;
pub mod interp;
pub mod par;
pub mod ppp;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use geom::{HPoint, Isometry, TangentVector};
pub use ppp::{Configuration, PotentialSpec, Profile};
pub use rng::StreamKey;
