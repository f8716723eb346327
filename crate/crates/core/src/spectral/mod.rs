//! Deterministic spectral computations for the radial Schrodinger operator
//! `H = -1/2 (d^2/dr^2 + (d-1) coth(r) d/dr) + V(r)` on `L^2(sinh^{d-1}(r) dr)`.
//!
//! The finite-volume discretization is symmetric in the weighted inner product,
//! so the ground state comes from a symmetric tridiagonal eigenproblem. The Born
//! series and the contour projector work on the same matrices.

mod born;
mod contour;
mod eigen;
mod export;
mod heat;
mod operator;
pub mod tridiag;

pub use born::{born_resolvent_apply, direct_resolvent_apply, BornResult};
pub use contour::{apply_projector, contour_projector, ContourResult};
pub use eigen::{solve_ground_state, RadialSpectrum};
pub use export::{read_eigenpair_csv, write_eigenpair_csv};
pub use heat::survival_profile;
pub use operator::{build_radial_operator, OuterBoundary, RadialOperator};
