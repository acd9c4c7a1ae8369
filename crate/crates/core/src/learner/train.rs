use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::empirical_gamma;
use crate::criteria::{split_delta, strong_concavity_lower_bound, CriterionKind, GiniConstant};
use crate::data::Dataset;
use crate::error::{out_of_range, Error, Result};
use crate::objective::{objective_value, ClassDistribution, SplitStatistics};

use super::node::{Direction, NodeModel};
use super::trace::TraceRecord;
use super::tree::Tree;

/// Slack allowed when checking that criteria never increase.
pub const MONOTONE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of splits to commit.
    pub max_splits: usize,
    /// Passes over a leaf's examples when training its router.
    pub epochs_per_split: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub criterion_c: GiniConstant,
    /// Leaves reached by fewer examples are never split.
    pub min_node_examples: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_splits: 31,
            epochs_per_split: 20,
            learning_rate: 0.5,
            seed: 1,
            criterion_c: GiniConstant::default(),
            min_node_examples: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs_per_split == 0 {
            return Err(out_of_range("epochs_per_split", 0.0, "[1, inf)"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(out_of_range(
                "learning_rate",
                self.learning_rate,
                "(0, inf)",
            ));
        }
        if self.min_node_examples == 0 {
            return Err(out_of_range("min_node_examples", 0.0, "[1, inf)"));
        }
        Ok(())
    }
}

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub tree: Tree,
    /// One record for the root-only tree, then one per committed split.
    pub trace: Vec<TraceRecord>,
    pub warnings: Vec<String>,
}

pub fn train(data: &Dataset, config: &TrainConfig) -> Result<TrainOutput> {
    train_with_test(data, None, config)
}

/// Grows a tree on `data` by repeatedly splitting the heaviest splittable
/// leaf, recording the tree criteria (and the error on `test`, if given)
/// after every split.
///
/// Each split trains a fresh [`NodeModel`] for `epochs_per_split` shuffled
/// passes over the leaf's examples, then partitions them with the trained
/// router. A partition that leaves one side empty is discarded and the leaf
/// is frozen. Fails if a committed split ever increases a criterion or
/// undercuts its strong-concavity bound.
pub fn train_with_test(
    data: &Dataset,
    test: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::NoExamples);
    }
    let k = data.num_classes();
    let kinds = CriterionKind::all(config.criterion_c);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tree = Tree::new(data.class_counts(), data.num_features());
    let mut buffers: Vec<Vec<usize>> = vec![(0..data.len()).collect()];
    let mut warnings = Vec::new();

    let test_error = |tree: &Tree| -> Result<Option<f64>> {
        test.filter(|t| !t.is_empty())
            .map(|t| tree.evaluate(t))
            .transpose()
    };
    let criteria = |tree: &Tree| kinds.map(|kind| tree.criterion(kind));

    let mut current = criteria(&tree);
    let mut trace = vec![TraceRecord::root(current, test_error(&tree)?)];

    let present = tree.node(0).counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        warnings.push(format!(
            "dataset has {present} distinct label(s); returning the root-only tree"
        ));
        return Ok(TrainOutput {
            tree,
            trace,
            warnings,
        });
    }

    while trace.len() <= config.max_splits {
        let Some(leaf) = tree.split_next(config.min_node_examples) else {
            break;
        };
        let mut order = std::mem::take(&mut buffers[leaf]);
        let mut model = NodeModel::new(k, data.num_features());
        for _ in 0..config.epochs_per_split {
            order.shuffle(&mut rng);
            for &i in &order {
                model.update(&data.examples()[i], config.learning_rate);
            }
        }
        // restore the original arrival order so children buffers are
        // independent of the shuffles above
        order.sort_unstable();

        let mut sides = (Vec::new(), Vec::new());
        let mut left_counts = vec![0u64; k];
        let mut right_counts = vec![0u64; k];
        for &i in &order {
            let x = &data.examples()[i];
            match model.route(x) {
                Direction::Left => {
                    sides.0.push(i);
                    left_counts[x.class()] += 1;
                }
                Direction::Right => {
                    sides.1.push(i);
                    right_counts[x.class()] += 1;
                }
            }
        }
        if sides.0.is_empty() || sides.1.is_empty() {
            tree.freeze(leaf);
            warnings.push(format!(
                "leaf {leaf}: router sent all {} examples one way; leaf frozen",
                order.len()
            ));
            buffers[leaf] = order;
            continue;
        }

        let (j_value, gamma_hat) = split_objective(&tree.node(leaf).counts, &right_counts)?;
        let (left, right) = tree.split_leaf(leaf, model.into_plane(), left_counts, right_counts)?;
        buffers.resize(tree.nodes().len(), Vec::new());
        buffers[left] = sides.0;
        buffers[right] = sides.1;

        let next = criteria(&tree);
        check_split(&tree, leaf, &kinds, &current, &next)?;
        current = next;
        trace.push(TraceRecord {
            t: trace.len(),
            node: leaf,
            j_value: Some(j_value),
            gamma_hat: Some(gamma_hat),
            entropy: current[0],
            gini: current[1],
            modified_gini: current[2],
            test_error: test_error(&tree)?,
        });
    }

    Ok(TrainOutput {
        tree,
        trace,
        warnings,
    })
}

/// `J` and the empirical advantage of the partition sending `right[i]` of
/// `parent[i]` examples of each class right.
pub(crate) fn split_objective(parent: &[u64], right: &[u64]) -> Result<(f64, f64)> {
    let dist = ClassDistribution::from_counts(parent)?;
    let conditionals = parent
        .iter()
        .zip(right)
        .map(|(&n, &r)| if n == 0 { 0.0 } else { r as f64 / n as f64 })
        .collect();
    let stats = SplitStatistics::from_conditionals(&dist, conditionals)?;
    Ok((
        objective_value(&dist, &stats)?,
        empirical_gamma(&dist, &stats)?,
    ))
}

fn check_split(
    tree: &Tree,
    node: usize,
    kinds: &[CriterionKind; 3],
    before: &[f64; 3],
    after: &[f64; 3],
) -> Result<()> {
    let split = tree
        .decomposition(node)
        .ok_or_else(|| Error::Invariant(format!("node {node} did not split")))?;
    for (i, kind) in kinds.iter().enumerate() {
        if after[i] > before[i] + MONOTONE_TOLERANCE {
            return Err(Error::Invariant(format!(
                "{kind} increased from {} to {} when splitting node {node}",
                before[i], after[i]
            )));
        }
        let delta = split_delta(&split, *kind);
        let bound = strong_concavity_lower_bound(&split, *kind);
        if delta < bound - MONOTONE_TOLERANCE {
            return Err(Error::Invariant(format!(
                "{kind} decrease {delta} at node {node} is below its concavity bound {bound}"
            )));
        }
    }
    Ok(())
}
