use serde::{Deserialize, Serialize};

use crate::data::Example;

/// Side of a node an example is sent to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

/// Linear router `x ↦ dot(w, x) + b`; positive scores go right.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    /// Dense weights; entry `j` belongs to feature index `j + 1`.
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Hyperplane {
    pub fn new(num_features: usize) -> Self {
        Self {
            weights: vec![0.0; num_features],
            bias: 0.0,
        }
    }

    /// Builds a hyperplane from sparse `(index, weight)` pairs.
    pub fn from_sparse(num_features: usize, weights: &[(u32, f64)], bias: f64) -> Self {
        let mut plane = Self::new(num_features);
        for &(i, w) in weights {
            let slot = i as usize - 1;
            if slot >= plane.weights.len() {
                plane.weights.resize(slot + 1, 0.0);
            }
            plane.weights[slot] = w;
        }
        plane.bias = bias;
        plane
    }

    pub fn score(&self, x: &Example) -> f64 {
        x.features
            .iter()
            .filter_map(|&(i, v)| self.weights.get(i as usize - 1).map(|w| w * v))
            .sum::<f64>()
            + self.bias
    }

    /// Right iff the score is strictly positive.
    pub fn route(&self, x: &Example) -> Direction {
        if self.score(x) > 0.0 {
            Direction::Right
        } else {
            Direction::Left
        }
    }
}

/// Running routing statistics of one class (or of all examples).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoutingStats {
    pub count: u64,
    /// Running mean of the routing indicator (1 = right).
    pub right_rate: f64,
    /// Running mean of the post-update score.
    pub mean_score: f64,
}

impl RoutingStats {
    fn push(&mut self, indicator: f64, score: f64) {
        self.count += 1;
        let n = self.count as f64;
        self.right_rate += (indicator - self.right_rate) / n;
        self.mean_score += (score - self.mean_score) / n;
    }
}

/// Online learner for one node's router.
///
/// The router is pushed towards a binary target per example: `+1` when the
/// example's class is routed right at least as often as the node overall
/// (`m_y ≥ m`), `−1` otherwise. This raises `Σ π_i |P_i − β|` for the class
/// at hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeModel {
    plane: Hyperplane,
    per_class: Vec<RoutingStats>,
    marginal: RoutingStats,
}

/// Routing rates closer than this are treated as tied.
const TIE_TOLERANCE: f64 = 1e-12;

impl NodeModel {
    pub fn new(num_classes: usize, num_features: usize) -> Self {
        Self::with_plane(num_classes, Hyperplane::new(num_features))
    }

    pub fn with_plane(num_classes: usize, plane: Hyperplane) -> Self {
        Self {
            plane,
            per_class: vec![RoutingStats::default(); num_classes],
            marginal: RoutingStats::default(),
        }
    }

    pub fn plane(&self) -> &Hyperplane {
        &self.plane
    }

    pub fn into_plane(self) -> Hyperplane {
        self.plane
    }

    pub fn route(&self, x: &Example) -> Direction {
        self.plane.route(x)
    }

    pub fn class_stats(&self, class: usize) -> &RoutingStats {
        &self.per_class[class]
    }

    pub fn marginal_stats(&self) -> &RoutingStats {
        &self.marginal
    }

    /// Count-weighted mean of the per-class right rates; equals the marginal
    /// right rate up to rounding.
    pub fn pooled_right_rate(&self) -> f64 {
        let total: u64 = self.per_class.iter().map(|s| s.count).sum();
        if total == 0 {
            return 0.0;
        }
        self.per_class
            .iter()
            .map(|s| s.count as f64 * s.right_rate)
            .sum::<f64>()
            / total as f64
    }

    /// Regression target for `x` with zero-based class `class`, from the
    /// statistics gathered so far.
    ///
    /// The first example at a node gets `+1`. When the class and marginal
    /// right rates tie (or the class is new) the comparison falls back to
    /// mean scores, and equal scores go right.
    pub fn target(&self, x: &Example, class: usize) -> f64 {
        if self.marginal.count == 0 {
            return 1.0;
        }
        let stats = &self.per_class[class];
        let goes_right = if stats.count == 0 {
            self.plane.score(x) >= self.marginal.mean_score
        } else {
            let diff = stats.right_rate - self.marginal.right_rate;
            if diff.abs() > TIE_TOLERANCE {
                diff > 0.0
            } else {
                stats.mean_score >= self.marginal.mean_score
            }
        };
        if goes_right {
            1.0
        } else {
            -1.0
        }
    }

    /// One online step on `½(score − target)²`.
    ///
    /// The step is normalized by `1 + ‖x‖²` and capped so the example's own
    /// score never overshoots its target. Routing statistics are then updated
    /// with the side the updated router sends `x` to.
    pub fn update(&mut self, x: &Example, learning_rate: f64) {
        let class = x.class();
        let target = self.target(x, class);
        let residual = target - self.plane.score(x);
        let norm_sq: f64 = x.features.iter().map(|(_, v)| v * v).sum();
        let step = (learning_rate / (1.0 + norm_sq)).min(1.0) * residual;
        for &(i, v) in &x.features {
            let slot = i as usize - 1;
            if slot >= self.plane.weights.len() {
                self.plane.weights.resize(slot + 1, 0.0);
            }
            self.plane.weights[slot] += step * v;
        }
        self.plane.bias += step;

        let score = self.plane.score(x);
        let indicator = if score > 0.0 { 1.0 } else { 0.0 };
        self.per_class[class].push(indicator, score);
        self.marginal.push(indicator, score);
    }
}
