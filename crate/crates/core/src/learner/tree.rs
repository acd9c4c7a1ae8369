use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::criteria::{leaf_criterion_slice, CriterionKind, SplitDecomposition};
use crate::data::{Dataset, Example};
use crate::error::{Error, Result};

use super::node::{Direction, Hyperplane};

/// First line of a serialized tree.
pub const TREE_MAGIC: &str = "LOMBOOST-TREE";
pub const TREE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf {
        /// Set when a split attempt at this leaf sent every example one way.
        frozen: bool,
    },
    Internal {
        plane: Hyperplane,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Training examples per class that reached this node.
    pub counts: Vec<u64>,
    pub kind: NodeKind,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Most frequent class label (1-based); ties go to the smallest label.
    pub fn majority_label(&self) -> u32 {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best as u32 + 1
    }

    fn distinct_labels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Binary tree of linear routers stored in an arena; node ids are arena
/// indices and the root is node 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    num_classes: usize,
    num_features: usize,
}

impl Tree {
    /// Root-only tree over the given class histogram.
    pub fn new(root_counts: Vec<u64>, num_features: usize) -> Self {
        let num_classes = root_counts.len();
        Self {
            nodes: vec![TreeNode {
                id: 0,
                parent: None,
                counts: root_counts,
                kind: NodeKind::Leaf { frozen: false },
            }],
            num_classes,
            num_features,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn num_internal(&self) -> usize {
        self.nodes.len() - self.leaves().count()
    }

    /// Number of training examples that reached the root.
    pub fn total_count(&self) -> u64 {
        self.nodes.first().map_or(0, TreeNode::total)
    }

    /// Fraction of training examples reaching node `id`.
    pub fn weight(&self, id: usize) -> f64 {
        self.nodes[id].total() as f64 / self.total_count() as f64
    }

    /// `(w_l, π_l)` for every leaf; empty leaves are skipped.
    pub fn leaf_distributions(&self) -> Vec<(f64, Vec<f64>)> {
        let total = self.total_count() as f64;
        self.leaves()
            .filter(|l| l.total() > 0)
            .map(|l| {
                let n = l.total() as f64;
                (n / total, l.counts.iter().map(|&c| c as f64 / n).collect())
            })
            .collect()
    }

    /// Tree-level criterion `Σ_l w_l G̃(π_l)` from the leaf histograms.
    pub fn criterion(&self, kind: CriterionKind) -> f64 {
        self.leaf_distributions()
            .iter()
            .map(|(w, probs)| w * leaf_criterion_slice(probs, kind))
            .sum()
    }

    /// Weight of the heaviest leaf.
    pub fn max_leaf_weight(&self) -> f64 {
        self.leaves().map(|l| self.weight(l.id)).fold(0.0, f64::max)
    }

    /// Whether `id` is a leaf that may still be split: not frozen, reached by
    /// at least `min_examples` examples of at least two classes.
    pub fn is_splittable(&self, id: usize, min_examples: u64) -> bool {
        let node = &self.nodes[id];
        matches!(node.kind, NodeKind::Leaf { frozen: false })
            && node.total() >= min_examples
            && node.distinct_labels() >= 2
    }

    /// Heaviest splittable leaf; ties go to the smallest id.
    pub fn split_next(&self, min_examples: u64) -> Option<usize> {
        let mut best: Option<&TreeNode> = None;
        for node in self
            .nodes
            .iter()
            .filter(|n| self.is_splittable(n.id, min_examples))
        {
            if best.is_none_or(|b| node.total() > b.total()) {
                best = Some(node);
            }
        }
        best.map(|n| n.id)
    }

    pub fn freeze(&mut self, id: usize) {
        if let NodeKind::Leaf { frozen } = &mut self.nodes[id].kind {
            *frozen = true;
        }
    }

    /// Turns leaf `id` into an internal node with two new leaf children and
    /// returns their ids `(left, right)`.
    ///
    /// The children's histograms must add up to the leaf's.
    pub fn split_leaf(
        &mut self,
        id: usize,
        plane: Hyperplane,
        left_counts: Vec<u64>,
        right_counts: Vec<u64>,
    ) -> Result<(usize, usize)> {
        if !self.nodes[id].is_leaf() {
            return Err(Error::Invariant(format!("node {id} is not a leaf")));
        }
        let matches_parent = left_counts.len() == self.num_classes
            && right_counts.len() == self.num_classes
            && left_counts
                .iter()
                .zip(&right_counts)
                .zip(&self.nodes[id].counts)
                .all(|((l, r), p)| l + r == *p);
        if !matches_parent {
            return Err(Error::Invariant(format!(
                "children histograms do not add up to node {id}"
            )));
        }
        let left = self.nodes.len();
        let right = left + 1;
        for (child, counts) in [(left, left_counts), (right, right_counts)] {
            self.nodes.push(TreeNode {
                id: child,
                parent: Some(id),
                counts,
                kind: NodeKind::Leaf { frozen: false },
            });
        }
        self.nodes[id].kind = NodeKind::Internal { plane, left, right };
        Ok((left, right))
    }

    /// Mixture decomposition of internal node `id` into its children.
    pub fn decomposition(&self, id: usize) -> Option<SplitDecomposition> {
        match &self.nodes[id].kind {
            NodeKind::Internal { left, right, .. } => SplitDecomposition::from_child_counts(
                &self.nodes[*left].counts,
                &self.nodes[*right].counts,
            )
            .ok(),
            NodeKind::Leaf { .. } => None,
        }
    }

    /// Leaf reached by `x`.
    ///
    /// # Panics
    /// If the tree has no nodes.
    pub fn leaf_for(&self, x: &Example) -> usize {
        let mut id = 0;
        while let NodeKind::Internal { plane, left, right } = &self.nodes[id].kind {
            id = match plane.route(x) {
                Direction::Left => *left,
                Direction::Right => *right,
            };
        }
        id
    }

    /// Majority label of the leaf reached by `x`.
    pub fn predict(&self, x: &Example) -> u32 {
        self.nodes[self.leaf_for(x)].majority_label()
    }

    /// Fraction of `data` that [`Tree::predict`] gets wrong.
    pub fn evaluate(&self, data: &Dataset) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyTree);
        }
        if data.is_empty() {
            return Err(Error::NoExamples);
        }
        let wrong = data
            .examples()
            .iter()
            .filter(|x| self.predict(x) != x.label)
            .count();
        Ok(wrong as f64 / data.len() as f64)
    }

    /// Versioned line-oriented text dump; see [`Tree::from_text`].
    ///
    /// ```text
    /// LOMBOOST-TREE 1
    /// classes 2
    /// features 3
    /// nodes 3
    /// node 0 - split 1 2 counts 5 5 bias -0.5 weights 1:1.25 3:-2
    /// node 1 0 leaf 0 counts 5 0
    /// node 2 0 leaf 1 counts 0 5
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{TREE_MAGIC} {TREE_FORMAT_VERSION}").unwrap();
        writeln!(out, "classes {}", self.num_classes).unwrap();
        writeln!(out, "features {}", self.num_features).unwrap();
        writeln!(out, "nodes {}", self.nodes.len()).unwrap();
        for node in &self.nodes {
            let parent = node.parent.map_or("-".to_string(), |p| p.to_string());
            write!(out, "node {} {parent} ", node.id).unwrap();
            match &node.kind {
                NodeKind::Leaf { frozen } => write!(out, "leaf {}", u8::from(*frozen)).unwrap(),
                NodeKind::Internal { left, right, .. } => {
                    write!(out, "split {left} {right}").unwrap()
                }
            }
            out.push_str(" counts");
            for c in &node.counts {
                write!(out, " {c}").unwrap();
            }
            if let NodeKind::Internal { plane, .. } = &node.kind {
                write!(out, " bias {} weights", plane.bias).unwrap();
                for (j, w) in plane.weights.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                    write!(out, " {}:{w}", j + 1).unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::TreeFormat(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let version = header
            .strip_prefix(TREE_MAGIC)
            .ok_or_else(|| bad(format!("missing {TREE_MAGIC} header")))?
            .trim();
        if version != TREE_FORMAT_VERSION.to_string() {
            return Err(bad(format!("unsupported format version {version:?}")));
        }
        let mut field = |name: &str| -> Result<usize> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {name}")))?;
            line.strip_prefix(name)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(format!("expected `{name} <n>`, got {line:?}")))
        };
        let num_classes = field("classes")?;
        let num_features = field("features")?;
        let count = field("nodes")?;
        let mut nodes = Vec::with_capacity(count);
        for (expected_id, line) in lines.by_ref().take(count).enumerate() {
            let node = parse_node(line, num_classes, num_features).map_err(bad)?;
            if node.id != expected_id {
                return Err(bad(format!("node ids out of order at {expected_id}")));
            }
            nodes.push(node);
        }
        if nodes.len() != count {
            return Err(bad(format!(
                "expected {count} nodes, found {}",
                nodes.len()
            )));
        }
        for node in &nodes {
            if let NodeKind::Internal { left, right, .. } = node.kind {
                if left >= count || right >= count {
                    return Err(bad(format!("node {} has a dangling child", node.id)));
                }
            }
        }
        Ok(Self {
            nodes,
            num_classes,
            num_features,
        })
    }
}

fn parse_node(
    line: &str,
    num_classes: usize,
    num_features: usize,
) -> std::result::Result<TreeNode, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let num = |i: usize| -> std::result::Result<usize, String> {
        tokens
            .get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("bad integer at token {i} of {line:?}"))
    };
    if tokens.first() != Some(&"node") {
        return Err(format!("expected node line, got {line:?}"));
    }
    let id = num(1)?;
    let parent = match tokens.get(2) {
        Some(&"-") => None,
        Some(_) => Some(num(2)?),
        None => return Err(format!("truncated node line {line:?}")),
    };
    let (mut kind, counts_at) = match tokens.get(3) {
        Some(&"leaf") => (
            NodeKind::Leaf {
                frozen: num(4)? == 1,
            },
            5,
        ),
        Some(&"split") => (
            NodeKind::Internal {
                plane: Hyperplane::new(num_features),
                left: num(4)?,
                right: num(5)?,
            },
            6,
        ),
        _ => return Err(format!("unknown node kind in {line:?}")),
    };
    if tokens.get(counts_at) != Some(&"counts") {
        return Err(format!("missing counts in {line:?}"));
    }
    let counts = (0..num_classes)
        .map(|c| num(counts_at + 1 + c).map(|v| v as u64))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let rest = &tokens[(counts_at + 1 + num_classes).min(tokens.len())..];
    if let NodeKind::Internal { plane, .. } = &mut kind {
        if rest.len() < 3 || rest[0] != "bias" || rest[2] != "weights" {
            return Err(format!("missing router in {line:?}"));
        }
        plane.bias = rest[1]
            .parse()
            .map_err(|_| format!("bad bias in {line:?}"))?;
        for pair in &rest[3..] {
            let (i, w) = pair
                .split_once(':')
                .ok_or_else(|| format!("bad weight {pair:?}"))?;
            let i: usize = i.parse().map_err(|_| format!("bad weight index {i:?}"))?;
            if i == 0 || i > num_features {
                return Err(format!("weight index {i} outside 1..={num_features}"));
            }
            plane.weights[i - 1] = w.parse().map_err(|_| format!("bad weight {w:?}"))?;
        }
    } else if !rest.is_empty() {
        return Err(format!("trailing tokens in {line:?}"));
    }
    Ok(TreeNode {
        id,
        parent,
        counts,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump() -> Tree {
        let mut tree = Tree::new(vec![5, 5], 3);
        let plane = Hyperplane::from_sparse(3, &[(1, 1.25), (3, -2.0)], -0.5);
        tree.split_leaf(0, plane, vec![5, 0], vec![0, 5]).unwrap();
        tree
    }

    #[test]
    fn fresh_tree_splits_root() {
        let tree = Tree::new(vec![3, 4], 2);
        assert_eq!(tree.split_next(2), Some(0));
        assert_eq!(Tree::new(vec![7, 0], 2).split_next(2), None);
        assert_eq!(Tree::new(vec![1, 0], 2).split_next(2), None);
    }

    #[test]
    fn heaviest_leaf_is_chosen() {
        let mut tree = Tree::new(vec![5, 5], 1);
        tree.split_leaf(0, Hyperplane::new(1), vec![4, 3], vec![1, 2])
            .unwrap();
        assert!((tree.weight(1) - 0.7).abs() < 1e-12);
        assert_eq!(tree.split_next(2), Some(1));
    }

    #[test]
    fn ties_go_to_smallest_id() {
        // root 0 -> (1, 2); 1 -> (3, 4); 2 -> (5, 6); 4 -> (7, 8)
        let mut tree = Tree::new(vec![6, 6, 2], 1);
        let p = Hyperplane::new(1);
        tree.split_leaf(0, p.clone(), vec![5, 5, 1], vec![1, 1, 1])
            .unwrap();
        tree.split_leaf(1, p.clone(), vec![2, 3, 0], vec![3, 2, 1])
            .unwrap();
        tree.split_leaf(2, p.clone(), vec![1, 0, 0], vec![0, 1, 1])
            .unwrap();
        tree.split_leaf(4, p, vec![0, 0, 1], vec![3, 2, 0]).unwrap();
        assert_eq!(tree.node(3).total(), 5);
        assert_eq!(tree.node(8).total(), 5);
        assert_eq!(tree.split_next(2), Some(3));
        tree.freeze(3);
        assert_eq!(tree.split_next(2), Some(8));
    }

    #[test]
    fn predicts_majority_with_low_label_ties() {
        let root = Tree::new(vec![10, 30], 1);
        assert_eq!(root.predict(&Example::new(1, vec![])), 2);
        let tie = Tree::new(vec![5, 5], 1);
        assert_eq!(tie.predict(&Example::new(2, vec![])), 1);
    }

    #[test]
    fn structure_invariants() {
        let tree = stump();
        assert_eq!(tree.num_internal(), 1);
        assert_eq!(tree.leaves().count(), 2);
        let total: f64 = tree.leaves().map(|l| tree.weight(l.id)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(tree.criterion(CriterionKind::Gini), 0.0);
    }

    #[test]
    fn split_leaf_checks_histograms() {
        let mut tree = Tree::new(vec![5, 5], 1);
        assert!(tree
            .split_leaf(0, Hyperplane::new(1), vec![5, 1], vec![0, 5])
            .is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut tree = stump();
        tree.freeze(1);
        let text = tree.to_text();
        assert!(text.starts_with("LOMBOOST-TREE 1\n"));
        assert_eq!(Tree::from_text(&text).unwrap(), tree);
    }

    #[test]
    fn rejects_foreign_or_future_files() {
        assert!(Tree::from_text("").is_err());
        assert!(Tree::from_text("hello\n").is_err());
        let future = stump().to_text().replacen("TREE 1", "TREE 2", 1);
        assert!(matches!(
            Tree::from_text(&future),
            Err(Error::TreeFormat(_))
        ));
        let truncated: String = stump()
            .to_text()
            .lines()
            .take(5)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(Tree::from_text(&truncated).is_err());
    }

    #[test]
    fn empty_tree_cannot_evaluate() {
        let data = Dataset::new(vec![Example::new(1, vec![(1, 1.0)])]).unwrap();
        assert!(matches!(
            Tree::default().evaluate(&data),
            Err(Error::EmptyTree)
        ));
    }
}
