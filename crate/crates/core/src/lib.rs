//! Multiclass top-down decision trees grown by online maximization of a
//! balanced, pure split objective.
//!
//! The crate has five parts:
//!
//! - [`objective`]: the split objective `J`, its purity and balancing
//!   factors and the inequalities tying them together.
//! - [`criteria`]: Shannon entropy, Gini and modified Gini of leaves and
//!   trees, their bounds and the decrease guaranteed by a split.
//! - [`bounds`]: how many splits reduce a criterion below a target.
//! - [`learner`]: the online node learner, tree growth and training traces.
//! - [`data`]: sparse dataset parsing, splitting and synthetic generation.
//!
//! [`verify`] checks the inequalities on random instances.
//!
//! ```
//! use lomboost::objective::{objective_value, ClassDistribution, SplitStatistics};
//!
//! let dist = ClassDistribution::new(vec![0.5, 0.5])?;
//! let stats = SplitStatistics::from_conditionals(&dist, vec![0.0, 1.0])?;
//! assert_eq!(objective_value(&dist, &stats)?, 1.0);
//! # Ok::<(), lomboost::Error>(())
//! ```

pub mod bounds;
pub mod criteria;
pub mod data;
mod error;
pub mod learner;
pub mod objective;
pub mod verify;

pub use error::{Error, Result};
