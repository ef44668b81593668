//! Verified-numerics pipeline producing an existence certificate for the
//! Emden problem `-Δu = |u|^3` with Dirichlet conditions on an unbounded
//! L-shaped planar domain.

pub mod approx;
pub mod fem;
pub mod geometry;
pub mod gevp;
pub mod interval;
pub mod ivnewton;
pub mod quad;
pub mod residual;
pub mod singular;
pub mod sparse;
pub mod spectral;
