//! Inverse dynamics of branched (tree-structured) robots by modular
//! composition of subsystem models, written in dual quaternion algebra.
//!
//! The crate is organized as:
//!
//! * [`dq`]: quaternion / dual quaternion arithmetic and poses;
//! * [`model`]: robot description (subsystem tree, DH + inertial
//!   parameters), file parsing, frame kinematics;
//! * [`serial`]: Newton–Euler recursions for one serial chain;
//! * [`composition`]: subsystem graph, twist/wrench propagation across
//!   connections, the interconnection matrix, and the composed inverse
//!   dynamics (including black-box subsystems fed by sensors);
//! * [`oracle`]: an independent monolithic Newton–Euler over the flattened
//!   tree plus a 3D statics oracle, used as ground truth in tests;
//! * [`control`]: wrench-driven end-effector pose control and the
//!   closed-loop error-dynamics integrator;
//! * [`metrics`]: RMSE and the coefficient of multiple correlation between
//!   waveforms;
//! * [`trajectory`]: analytic sinusoidal joint trajectories.

pub mod composition;
pub mod control;
pub mod dq;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod serial;
pub mod trajectory;
