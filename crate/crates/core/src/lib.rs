//! Multi-agent SE(2) pose synchronization.
//!
//! Agents share relative-pose estimates over a communication graph. The
//! [`consistency`] module reconciles them into one set of absolute poses by
//! alternating weighted t-distribution fits per node with closed-form edge
//! trust updates. [`harness`] runs the seeded simulation study.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consistency;
pub mod distributions;
pub mod em;
pub mod error;
pub mod graph;
pub mod harness;
pub mod overlap;
pub mod se2;
pub mod sim;
pub mod weighting;

pub use consistency::{icm_synchronize, ConsistencyConfig, SyncResult};
pub use em::{weighted_t_mle, EmConfig, NodeModel, Observation};
pub use error::{Error, Result};
pub use graph::{Edge, Node, PoseGraph, Provenance};
pub use se2::{Pose, PoseDelta};
