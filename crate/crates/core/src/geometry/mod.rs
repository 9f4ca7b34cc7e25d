//! Special functions, quadrature and rigid-transform algebra.

pub mod arc;
pub mod fresnel;
pub mod quadrature;
pub mod transform;

pub use arc::{affine_arc_integrals, SLOPE_SWITCH};
pub use fresnel::fresnel;
pub use quadrature::{adaptive_quadrature, adaptive_quadrature_vec, GaussLegendre};
pub use transform::{compose, geodesic_angle, rotation_from_alpha_phi, RigidTransform};
