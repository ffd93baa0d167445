//! Numerical machinery for polynomials orthogonal on two arcs of the unit
//! circle with respect to generalized reciprocal-square-root weights and
//! optional point masses.
//!
//! The crate is organized around a conformal change of variables: a
//! rectangle in the `u`-plane is mapped onto the exterior of the two arcs
//! by an elliptic-function map, and everything downstream (Green's
//! function, moments, closed-form polynomial representations, zero
//! classification) is expressed through that frame.

pub mod arcs;
pub mod elliptic;
pub mod orthopoly;
pub mod poly;
pub mod theta_rep;
pub mod weight;
pub mod zeros;

pub use elliptic::{EllipticError, EllipticModulus, ThetaConfig};
