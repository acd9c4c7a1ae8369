//! The split objective `J(h)` and the purity and balancing factors of a
//! node hypothesis.
//!
//! A hypothesis at a node is summarized by [`SplitStatistics`]: the marginal
//! probability `β` that it routes an example right and, for each class `i`,
//! the conditional probability `P_i` of routing right given the class. Together
//! with the node's class distribution `π` these determine
//!
//! ```text
//! J(h) = 2 Σ_i π_i |β − P_i|        (objective_value)
//! α    = Σ_i π_i min(P_i, 1 − P_i)  (purity_factor)
//! ```
//!
//! `J` lies in `[0, 1]` and equals 1 exactly when every class is routed
//! entirely to one side and the two sides carry equal mass.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Absolute tolerance for probability sums and for `β = dot(π, P)`.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Probability vector over `k` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    probs: Vec<f64>,
}

impl ClassDistribution {
    /// Validates that every entry is in `[0, 1]` and that the entries sum to 1
    /// within [`PROB_TOLERANCE`]. Entries are stored as given.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no classes".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {p} is outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Empirical distribution of a class histogram.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("empty histogram".into()));
        }
        let total = total as f64;
        Self::new(counts.iter().map(|&c| c as f64 / total).collect())
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution needs at least one class");
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// All mass on class `index` (0-based).
    pub fn point_mass(k: usize, index: usize) -> Self {
        assert!(index < k, "class index {index} out of range for k = {k}");
        let mut probs = vec![0.0; k];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }
}

/// Routing statistics of a hypothesis at a node: `β = P(h(x) > 0)` and
/// `P_i = P(h(x) > 0 | i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStatistics {
    marginal: f64,
    conditionals: Vec<f64>,
}

impl SplitStatistics {
    /// Builds statistics from an explicit marginal. Consistency with a class
    /// distribution is checked when the statistics are used.
    pub fn new(marginal: f64, conditionals: Vec<f64>) -> Result<Self> {
        check_unit("marginal", marginal)?;
        for &p in &conditionals {
            check_unit("conditional", p)?;
        }
        Ok(Self {
            marginal,
            conditionals,
        })
    }

    /// Builds statistics whose marginal is `dot(π, P)`.
    pub fn from_conditionals(dist: &ClassDistribution, conditionals: Vec<f64>) -> Result<Self> {
        check_len(dist.num_classes(), conditionals.len())?;
        for &p in &conditionals {
            check_unit("conditional", p)?;
        }
        let marginal = dot(dist.probs(), &conditionals).clamp(0.0, 1.0);
        Ok(Self {
            marginal,
            conditionals,
        })
    }

    pub fn marginal(&self) -> f64 {
        self.marginal
    }

    pub fn conditionals(&self) -> &[f64] {
        &self.conditionals
    }

    /// Statistics of the same partition with left and right exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            marginal: 1.0 - self.marginal,
            conditionals: self.conditionals.iter().map(|p| 1.0 - p).collect(),
        }
    }

    /// Rejects statistics whose length or marginal disagree with `dist`.
    pub fn check_consistent(&self, dist: &ClassDistribution) -> Result<()> {
        check_len(dist.num_classes(), self.conditionals.len())?;
        let implied = dot(dist.probs(), &self.conditionals);
        if (implied - self.marginal).abs() > PROB_TOLERANCE {
            return Err(Error::InconsistentStatistics {
                marginal: self.marginal,
                implied,
            });
        }
        Ok(())
    }
}

/// `J(h) = 2 Σ π_i |β − P_i|`.
pub fn objective_value(dist: &ClassDistribution, stats: &SplitStatistics) -> Result<f64> {
    stats.check_consistent(dist)?;
    let beta = stats.marginal;
    let half: f64 = dist
        .probs()
        .iter()
        .zip(&stats.conditionals)
        .map(|(pi, p)| pi * (beta - p).abs())
        .sum();
    Ok((2.0 * half).clamp(0.0, 1.0))
}

/// `α = Σ π_i min(P_i, 1 − P_i)`, the expected minority-side mass per class.
pub fn purity_factor(dist: &ClassDistribution, stats: &SplitStatistics) -> Result<f64> {
    check_len(dist.num_classes(), stats.conditionals.len())?;
    Ok(dist
        .probs()
        .iter()
        .zip(&stats.conditionals)
        .map(|(pi, p)| pi * p.min(1.0 - p))
        .sum())
}

/// `β`, the fraction of mass routed right.
pub fn balancing_factor(stats: &SplitStatistics) -> f64 {
    stats.marginal
}

/// Interval that must contain `β` for a hypothesis with objective `j`:
/// `[½(1 − √(1 − j)), ½(1 + √(1 − j))]`.
pub fn balance_interval(j: f64) -> Result<(f64, f64)> {
    check_unit("j", j)?;
    let root = (1.0 - j).clamp(0.0, 1.0).sqrt();
    Ok((0.5 * (1.0 - root), 0.5 * (1.0 + root)))
}

/// `min((2 − j)/(4β) − β, ½)`.
///
/// The inequality `α ≤ purity_upper_bound(J, β)` holds when `β` is taken in
/// the orientation with `β ≤ ½`. For `β > ½` the first term can go negative
/// (a pure split with `β = 0.9` gives `−0.444`), so callers bounding an
/// arbitrary hypothesis should pass `min(β, 1 − β)`; `J` and `α` are
/// unchanged by swapping the two sides.
pub fn purity_upper_bound(j: f64, beta: f64) -> Result<f64> {
    check_unit("j", j)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(out_of_range("beta", beta, "(0, 1)"));
    }
    Ok(((2.0 - j) / (4.0 * beta) - beta).min(0.5))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(out_of_range(name, value, "[0, 1]"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist(p: &[f64]) -> ClassDistribution {
        ClassDistribution::new(p.to_vec()).unwrap()
    }

    fn stats(d: &ClassDistribution, p: &[f64]) -> SplitStatistics {
        SplitStatistics::from_conditionals(d, p.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        let d = dist(&[0.5, 0.5]);
        assert_abs_diff_eq!(objective_value(&d, &stats(&d, &[1.0, 0.0])).unwrap(), 1.0);

        let d = dist(&[0.3, 0.7]);
        for c in [0.0, 0.2, 0.5, 1.0] {
            assert_abs_diff_eq!(objective_value(&d, &stats(&d, &[c, c])).unwrap(), 0.0);
        }

        let d = dist(&[0.25, 0.75]);
        assert_abs_diff_eq!(
            objective_value(&d, &stats(&d, &[1.0, 0.0])).unwrap(),
            0.75,
            epsilon = 1e-15
        );
    }

    #[test]
    fn objective_rejects_bad_input() {
        let d = dist(&[0.5, 0.5]);
        let short = SplitStatistics::new(0.5, vec![0.5]).unwrap();
        assert!(matches!(
            objective_value(&d, &short),
            Err(Error::DimensionMismatch { .. })
        ));
        let inconsistent = SplitStatistics::new(0.9, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            objective_value(&d, &inconsistent),
            Err(Error::InconsistentStatistics { .. })
        ));
    }

    #[test]
    fn purity_examples() {
        let d = dist(&[0.5, 0.5]);
        assert_abs_diff_eq!(purity_factor(&d, &stats(&d, &[1.0, 0.0])).unwrap(), 0.0);
        let d = dist(&[0.1, 0.2, 0.7]);
        assert_abs_diff_eq!(
            purity_factor(&d, &stats(&d, &[0.5, 0.5, 0.5])).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let d = dist(&[0.25, 0.75]);
        assert_abs_diff_eq!(
            purity_factor(&d, &stats(&d, &[0.9, 0.2])).unwrap(),
            0.175,
            epsilon = 1e-15
        );
    }

    #[test]
    fn balancing_examples() {
        let d = dist(&[0.5, 0.5]);
        assert_abs_diff_eq!(balancing_factor(&stats(&d, &[1.0, 0.0])), 0.5);
        assert_abs_diff_eq!(balancing_factor(&stats(&d, &[0.0, 0.0])), 0.0);
        let d = dist(&[0.25, 0.75]);
        assert_abs_diff_eq!(balancing_factor(&stats(&d, &[1.0, 0.0])), 0.25);
    }

    #[test]
    fn balance_interval_examples() {
        assert_eq!(balance_interval(1.0).unwrap(), (0.5, 0.5));
        assert_eq!(balance_interval(0.0).unwrap(), (0.0, 1.0));
        assert_eq!(balance_interval(0.75).unwrap(), (0.25, 0.75));
        assert!(balance_interval(1.5).is_err());
        assert!(balance_interval(-0.1).is_err());
    }

    #[test]
    fn purity_bound_examples() {
        assert_abs_diff_eq!(purity_upper_bound(1.0, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(purity_upper_bound(0.0, 0.5).unwrap(), 0.5);
        assert_abs_diff_eq!(purity_upper_bound(0.75, 0.5).unwrap(), 0.125);
        assert!(purity_upper_bound(0.5, 0.0).is_err());
    }

    #[test]
    fn literal_purity_bound_fails_above_half() {
        // pure split with β = 0.9: α = 0 but the literal bound is negative.
        let d = dist(&[0.9, 0.1]);
        let s = stats(&d, &[1.0, 0.0]);
        let j = objective_value(&d, &s).unwrap();
        let alpha = purity_factor(&d, &s).unwrap();
        let literal = purity_upper_bound(j, s.marginal()).unwrap();
        assert!(alpha > literal);
        let oriented = purity_upper_bound(j, s.marginal().min(1.0 - s.marginal())).unwrap();
        assert!(alpha <= oriented);
    }

    #[test]
    fn zero_mass_classes_are_ignored() {
        let d = dist(&[0.5, 0.0, 0.5]);
        let a = stats(&d, &[1.0, 0.3, 0.0]);
        let b = stats(&d, &[1.0, 0.9, 0.0]);
        assert_eq!(
            objective_value(&d, &a).unwrap(),
            objective_value(&d, &b).unwrap()
        );
        assert_eq!(
            purity_factor(&d, &a).unwrap(),
            purity_factor(&d, &b).unwrap()
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(ClassDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ClassDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(ClassDistribution::new(vec![]).is_err());
        assert!(ClassDistribution::from_counts(&[0, 0]).is_err());
        let d = ClassDistribution::from_counts(&[1, 3]).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
    }
}
