//! Reduced-order statics of tendon-driven soft manipulators with piecewise
//! affine curvature, a constant-curvature baseline and a dense-rod reference
//! solver.

pub mod actuation;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod mechanics;
pub mod numdiff;
pub mod oracle;
pub mod solver;

pub use actuation::{TendonCommand, TendonRouting};
pub use error::{Error, NonConvergence, QuadratureError, Result};
pub use geometry::{adaptive_quadrature, affine_arc_integrals, compose, rotation_from_alpha_phi, RigidTransform};
pub use kinematics::{point_jacobian, robot_fk, segment_pose, ModelKind, RobotState, SegmentParams, SegmentState};
pub use mechanics::{GeneralizedForce, StiffnessModel};
pub use oracle::{DenseRod, ErrorReport};
pub use solver::{solve_statics, static_residual, PointLoad, SolverOptions, SolverReport, StaticsProblem};
