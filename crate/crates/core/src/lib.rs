//! Kinematics and dynamics for serial manipulators described by
//! Denavit-Hartenberg parameters, with the Baxter left arm built in.
//!
//! - [`model`]: robot models, validation and the JSON model format
//! - [`kinematics`]: forward kinematics, Jacobian, pseudoinverse, velocity kinematics
//! - [`ik_analytic6`]: closed-form IK for the arm with the E0 joint locked
//! - [`ik_iterative`]: pseudoinverse, random-restart and CCD solvers
//! - [`dynamics`]: Euler-Lagrange mass matrix, Coriolis and gravity terms
//! - [`workspace`]: Monte Carlo workspace sampling with manipulability bands
//! - [`trajectory`]: Cartesian waypoint paths resolved into joint space

pub mod dynamics;
pub mod error;
pub mod format;
pub mod ik_analytic6;
pub mod ik_iterative;
pub mod kinematics;
pub mod model;
pub mod pose;
pub mod trajectory;
pub mod workspace;

pub use error::{Error, Result};
pub use model::{builtin_baxter_left, builtin_planar_2r, load_model, RobotModel};
pub use pose::Pose;
