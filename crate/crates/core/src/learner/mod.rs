//! Top-down tree growth with online-trained linear routers.
//!
//! Training repeatedly picks the heaviest splittable leaf, fits a
//! [`NodeModel`] to the examples reaching it, and commits the partition its
//! router induces. After every split the three tree criteria are recomputed
//! and appended to the trace.

mod node;
mod trace;
mod train;
mod tree;

pub use node::{Direction, Hyperplane, NodeModel, RoutingStats};
pub use trace::{
    curves_to_csv, format_sig9, normalize_trace, trace_from_csv, trace_to_csv, TraceRecord,
    CURVES_HEADER, TRACE_HEADER,
};
pub use train::{train, train_with_test, TrainConfig, TrainOutput, MONOTONE_TOLERANCE};
pub use tree::{NodeKind, Tree, TreeNode, TREE_FORMAT_VERSION, TREE_MAGIC};
