//! Tendon arrangement optimization for a two-disc mechanism with a ball-joint link.
//!
//! Designs are scored on two objectives: how often wires come within a threshold of
//! each other (or of the link) while the joint follows a trajectory, and how large a
//! torque ball the wires can produce about the joint at each waypoint.

pub mod geometry;
pub mod mechanism;
pub mod moo;
pub mod objectives;
pub mod torque_space;

pub use geometry::{crossing_during_motion, distance_at, segment_min_distance, MotionPair, Point3, Segment};
pub use mechanism::{
    anchor_world_positions, decode_genome, muscle_jacobian, ConfigError, DesignParams, Genome, JointAngles,
    JointAxis, MechanismConfig, MuscleJacobian,
};
pub use moo::{evolve, GaConfig, Objectives};
pub use objectives::{evaluate, Evaluation, EvaluationSettings, Evaluator, Trajectory};
pub use torque_space::{build_hull, inscribed_radius, TensionBounds, TorquePolytope, TorqueScore};
