//! Numerical laboratory for geodesic integrals of joint eigenfunctions on
//! surfaces of revolution.
//!
//! The crate checks whether a geodesic arc is admissible for a moment map
//! `(p1, p2)`, computes joint eigenfunctions of the Laplacian and the
//! rotation generator, integrates them along arcs, and fits the decay of
//! `|∫_γ u_h ds|` in the semiclassical parameter `h`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod cli;
pub mod config;
pub mod eigensolve;
pub mod geometry;
pub mod lineintegral;
pub mod quadrature;
pub mod specfun;
pub mod sweep;
pub mod symbol;
