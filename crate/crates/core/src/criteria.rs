//! Entropy-based tree criteria and the per-split decrease they undergo.
//!
//! Each criterion is a concave impurity `G̃(π)` of a leaf's class
//! distribution; the tree-level value is the leaf-weighted sum
//! `G_t = Σ_l w_l G̃(π_l)`. Splitting a leaf with weight `w` into children with
//! distributions `π₀` (left) and `π₁` (right) reduces `G_t` by
//! `w · [G̃(π) − (1 − β)G̃(π₀) − βG̃(π₁)]`, a Jensen gap that strong concavity
//! bounds from below by a multiple of `β(1 − β)‖π₀ − π₁‖²`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::objective::{check_len, ClassDistribution, SplitStatistics, PROB_TOLERANCE};

/// Default constant of the modified Gini criterion.
pub const DEFAULT_GINI_CONSTANT: f64 = 4.0;

/// Constant `C > 2` of the modified Gini criterion `Σ √(π_i(C − π_i))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct GiniConstant(f64);

impl GiniConstant {
    pub fn new(c: f64) -> Result<Self> {
        // NaN fails the comparison too.
        if !(c > 2.0 && c.is_finite()) {
            return Err(out_of_range("C", c, "(2, inf)"));
        }
        Ok(Self(c))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(C − 2)² / C³`, half the strong-concavity modulus.
    pub fn concavity_factor(self) -> f64 {
        let c = self.0;
        (c - 2.0).powi(2) / c.powi(3)
    }
}

impl Default for GiniConstant {
    fn default() -> Self {
        Self(DEFAULT_GINI_CONSTANT)
    }
}

impl TryFrom<f64> for GiniConstant {
    type Error = Error;

    fn try_from(c: f64) -> Result<Self> {
        Self::new(c)
    }
}

impl From<GiniConstant> for f64 {
    fn from(c: GiniConstant) -> f64 {
        c.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CriterionKind {
    ShannonEntropy,
    Gini,
    ModifiedGini(GiniConstant),
}

impl CriterionKind {
    pub fn modified_gini(c: f64) -> Result<Self> {
        GiniConstant::new(c).map(Self::ModifiedGini)
    }

    /// The three criteria tracked during training, modified Gini with constant `c`.
    pub fn all(c: GiniConstant) -> [Self; 3] {
        [Self::ShannonEntropy, Self::Gini, Self::ModifiedGini(c)]
    }

    /// Short name used in CSV headers and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Self::ShannonEntropy => "entropy",
            Self::Gini => "gini",
            Self::ModifiedGini(_) => "modified_gini",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ModifiedGini(c) => write!(f, "modified_gini(C={})", c.value()),
            other => f.write_str(other.name()),
        }
    }
}

/// Impurity `G̃(π)` of a single leaf.
///
/// Shannon entropy uses the natural logarithm with `0 · ln(1/0) = 0`.
pub fn leaf_criterion(dist: &ClassDistribution, kind: CriterionKind) -> f64 {
    leaf_criterion_slice(dist.probs(), kind)
}

pub(crate) fn leaf_criterion_slice(probs: &[f64], kind: CriterionKind) -> f64 {
    match kind {
        CriterionKind::ShannonEntropy => probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum(),
        CriterionKind::Gini => probs.iter().map(|&p| p * (1.0 - p)).sum(),
        CriterionKind::ModifiedGini(c) => {
            let c = c.value();
            probs.iter().map(|&p| (p * (c - p)).sqrt()).sum()
        }
    }
}

/// Tree-level criterion `Σ_l w_l G̃(π_l)`. Leaf weights must be non-negative
/// and sum to 1.
pub fn tree_criterion(leaves: &[(f64, ClassDistribution)], kind: CriterionKind) -> Result<f64> {
    if let Some((w, _)) = leaves.iter().find(|(w, _)| w.is_nan() || *w < 0.0) {
        return Err(out_of_range("leaf weight", *w, "[0, 1]"));
    }
    let total: f64 = leaves.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::Invariant(format!(
            "leaf weights sum to {total}, expected 1"
        )));
    }
    Ok(leaves
        .iter()
        .map(|(w, d)| w * leaf_criterion(d, kind))
        .sum())
}

/// Range of the tree-level criterion for a tree with `t` internal nodes over
/// `k` classes whose heaviest leaf has weight `w`:
///
/// | criterion     | lower      | upper                 |
/// |---------------|------------|-----------------------|
/// | entropy       | 0          | `(t+1) w ln k`        |
/// | Gini          | 0          | `(t+1) w (1 − 1/k)`   |
/// | modified Gini | `√(C − 1)` | `(t+1) w √(kC − 1)`   |
pub fn criterion_bounds(t: u64, k: usize, w: f64, kind: CriterionKind) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(out_of_range("k", k as f64, "[2, inf)"));
    }
    if !(w > 0.0 && w <= 1.0) {
        return Err(out_of_range("w", w, "(0, 1]"));
    }
    let leaves = (t + 1) as f64;
    let kf = k as f64;
    Ok(match kind {
        CriterionKind::ShannonEntropy => (0.0, leaves * w * kf.ln()),
        CriterionKind::Gini => (0.0, leaves * w * (1.0 - 1.0 / kf)),
        CriterionKind::ModifiedGini(c) => {
            let c = c.value();
            ((c - 1.0).sqrt(), leaves * w * (kf * c - 1.0).sqrt())
        }
    })
}

/// A parent distribution written as the mixture `π = (1 − β)π₀ + βπ₁` of the
/// distributions reaching its left and right children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDecomposition {
    parent: ClassDistribution,
    beta: f64,
    left: ClassDistribution,
    right: ClassDistribution,
}

impl SplitDecomposition {
    /// Validates the mixture identity entrywise within `1e-9`.
    pub fn new(
        parent: ClassDistribution,
        beta: f64,
        left: ClassDistribution,
        right: ClassDistribution,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(out_of_range("beta", beta, "[0, 1]"));
        }
        let k = parent.num_classes();
        check_len(k, left.num_classes())?;
        check_len(k, right.num_classes())?;
        for (class, ((p, l), r)) in parent
            .probs()
            .iter()
            .zip(left.probs())
            .zip(right.probs())
            .enumerate()
        {
            let mixture = (1.0 - beta) * l + beta * r;
            if (mixture - p).abs() > PROB_TOLERANCE {
                return Err(Error::MixtureViolated {
                    class,
                    parent: *p,
                    mixture,
                });
            }
        }
        Ok(Self {
            parent,
            beta,
            left,
            right,
        })
    }

    /// Child distributions induced by a hypothesis:
    /// `π₀,i = π_i(1 − P_i)/(1 − β)` and `π₁,i = π_i P_i / β`.
    ///
    /// A side that receives no mass inherits the parent distribution, so a
    /// degenerate split decomposes trivially.
    pub fn from_statistics(parent: &ClassDistribution, stats: &SplitStatistics) -> Result<Self> {
        stats.check_consistent(parent)?;
        let beta = stats.marginal();
        let pi = parent.probs();
        let p = stats.conditionals();
        let child = |mass: f64, f: &dyn Fn(usize) -> f64| -> Result<ClassDistribution> {
            let numerators: Vec<f64> = (0..pi.len()).map(f).collect();
            if mass <= 0.0 || numerators.iter().sum::<f64>() <= 0.0 {
                return Ok(parent.clone());
            }
            renormalized(
                numerators
                    .iter()
                    .map(|x| (x / mass).clamp(0.0, 1.0))
                    .collect(),
            )
        };
        let left = child(1.0 - beta, &|i| pi[i] * (1.0 - p[i]))?;
        let right = child(beta, &|i| pi[i] * p[i])?;
        Self::new(parent.clone(), beta, left, right)
    }

    /// Decomposition of a node from the class histograms of its two children.
    pub fn from_child_counts(left: &[u64], right: &[u64]) -> Result<Self> {
        check_len(left.len(), right.len())?;
        let parent: Vec<u64> = left.iter().zip(right).map(|(a, b)| a + b).collect();
        let parent = ClassDistribution::from_counts(&parent)?;
        let n_left: u64 = left.iter().sum();
        let n_right: u64 = right.iter().sum();
        let beta = n_right as f64 / (n_left + n_right) as f64;
        let left = if n_left == 0 {
            parent.clone()
        } else {
            ClassDistribution::from_counts(left)?
        };
        let right = if n_right == 0 {
            parent.clone()
        } else {
            ClassDistribution::from_counts(right)?
        };
        Self::new(parent, beta, left, right)
    }

    pub fn parent(&self) -> &ClassDistribution {
        &self.parent
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn left(&self) -> &ClassDistribution {
        &self.left
    }

    pub fn right(&self) -> &ClassDistribution {
        &self.right
    }

    fn is_degenerate(&self) -> bool {
        self.beta <= 0.0 || self.beta >= 1.0
    }

    fn separation_l1(&self) -> f64 {
        self.left
            .probs()
            .iter()
            .zip(self.right.probs())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    fn separation_l2_squared(&self) -> f64 {
        self.left
            .probs()
            .iter()
            .zip(self.right.probs())
            .map(|(a, b)| (a - b).powi(2))
            .sum()
    }
}

fn renormalized(mut raw: Vec<f64>) -> Result<ClassDistribution> {
    let sum: f64 = raw.iter().sum();
    if sum > 0.0 {
        raw.iter_mut().for_each(|x| *x /= sum);
    }
    ClassDistribution::new(raw)
}

/// Node-local Jensen gap `G̃(π) − (1 − β)G̃(π₀) − βG̃(π₁)`, without the leaf
/// weight factor.
///
/// Evaluated as a difference of criterion values; rounding noise below
/// `1e-12` is snapped to zero. Degenerate splits (`β ∈ {0, 1}`) give 0.
pub fn split_delta(split: &SplitDecomposition, kind: CriterionKind) -> f64 {
    if split.is_degenerate() {
        return 0.0;
    }
    let beta = split.beta;
    let gap = leaf_criterion(&split.parent, kind)
        - (1.0 - beta) * leaf_criterion(&split.left, kind)
        - beta * leaf_criterion(&split.right, kind);
    if gap < 0.0 && gap > -1e-12 {
        0.0
    } else {
        gap
    }
}

/// Lower bound on [`split_delta`] implied by strong concavity:
///
/// * entropy (modulus 1 in ℓ₁): `½ β(1 − β) ‖π₀ − π₁‖₁²`
/// * Gini (modulus 2 in ℓ₂): `β(1 − β) ‖π₀ − π₁‖₂²`
/// * modified Gini (modulus `2(C − 2)²/C³` in ℓ₂): `(C − 2)²/C³ · β(1 − β) ‖π₀ − π₁‖₂²`
pub fn strong_concavity_lower_bound(split: &SplitDecomposition, kind: CriterionKind) -> f64 {
    let spread = split.beta * (1.0 - split.beta);
    match kind {
        CriterionKind::ShannonEntropy => 0.5 * spread * split.separation_l1().powi(2),
        CriterionKind::Gini => spread * split.separation_l2_squared(),
        CriterionKind::ModifiedGini(c) => {
            c.concavity_factor() * spread * split.separation_l2_squared()
        }
    }
}

/// Guaranteed decrease of the tree-level criterion when the heaviest leaf of a
/// tree with `t` internal nodes and criterion value `g_t` is split by a
/// hypothesis with advantage `gamma`:
///
/// * entropy: `γ² G_t / (2(1 − γ)²(t + 1) ln k)`
/// * Gini: `γ² G_t / ((1 − γ)²(t + 1)(k − 1))`
/// * modified Gini: `γ² G_t / ((C³/(C − 2)²)(1 − γ)²(t + 1) k √(kC − 1))`
///
/// `j` is the objective of the splitting hypothesis and must be at least `2γ`.
pub fn objective_to_delta_bound(
    j: f64,
    gamma: f64,
    g_t: f64,
    t: u64,
    k: usize,
    kind: CriterionKind,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(out_of_range("gamma", gamma, "(0, 0.5]"));
    }
    if !(j >= 2.0 * gamma - PROB_TOLERANCE && j <= 1.0) {
        return Err(out_of_range("j", j, format!("[{}, 1]", 2.0 * gamma)));
    }
    if g_t.is_nan() || g_t < 0.0 {
        return Err(out_of_range("g_t", g_t, "[0, inf)"));
    }
    if k < 2 {
        return Err(out_of_range("k", k as f64, "[2, inf)"));
    }
    let leaves = (t + 1) as f64;
    let kf = k as f64;
    let scale = gamma * gamma * g_t / ((1.0 - gamma).powi(2) * leaves);
    Ok(match kind {
        CriterionKind::ShannonEntropy => scale / (2.0 * kf.ln()),
        CriterionKind::Gini => scale / (kf - 1.0),
        CriterionKind::ModifiedGini(c) => {
            let cv = c.value();
            scale * c.concavity_factor() / (kf * (kf * cv - 1.0).sqrt())
        }
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // oracle values are frozen as literals
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist(p: &[f64]) -> ClassDistribution {
        ClassDistribution::new(p.to_vec()).unwrap()
    }

    fn mg(c: f64) -> CriterionKind {
        CriterionKind::modified_gini(c).unwrap()
    }

    fn separating_split() -> SplitDecomposition {
        SplitDecomposition::new(dist(&[0.5, 0.5]), 0.5, dist(&[1.0, 0.0]), dist(&[0.0, 1.0]))
            .unwrap()
    }

    #[test]
    fn gini_constant_must_exceed_two() {
        assert!(GiniConstant::new(2.0).is_err());
        assert!(GiniConstant::new(1.5).is_err());
        assert!(GiniConstant::new(f64::NAN).is_err());
        assert!(GiniConstant::new(2.0001).is_ok());
        assert_eq!(GiniConstant::default().value(), 4.0);
        assert_eq!(GiniConstant::default().concavity_factor(), 1.0 / 16.0);
    }

    #[test]
    fn leaf_examples() {
        let u2 = ClassDistribution::uniform(2);
        assert_abs_diff_eq!(
            leaf_criterion(&u2, CriterionKind::ShannonEntropy),
            0.693147180559945,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            leaf_criterion(&ClassDistribution::point_mass(3, 1), mg(4.0)),
            1.7320508075688772,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            leaf_criterion(&dist(&[0.25, 0.75]), CriterionKind::Gini),
            0.375,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            leaf_criterion(&u2, mg(4.0)),
            2.6457513110645907,
            epsilon = 1e-12
        );
        // 0 · ln(1/0) = 0
        assert_eq!(
            leaf_criterion(
                &ClassDistribution::point_mass(4, 0),
                CriterionKind::ShannonEntropy
            ),
            0.0
        );
    }

    #[test]
    fn tree_examples() {
        let single = [(1.0, ClassDistribution::uniform(4))];
        assert_abs_diff_eq!(
            tree_criterion(&single, CriterionKind::ShannonEntropy).unwrap(),
            4f64.ln(),
            epsilon = 1e-12
        );
        let pure = [
            (0.5, ClassDistribution::point_mass(2, 0)),
            (0.5, ClassDistribution::point_mass(2, 1)),
        ];
        assert_eq!(tree_criterion(&pure, CriterionKind::Gini).unwrap(), 0.0);
        let mixed = [(0.25, dist(&[0.5, 0.5])), (0.75, dist(&[1.0, 0.0]))];
        assert_abs_diff_eq!(
            tree_criterion(&mixed, CriterionKind::Gini).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        let bad = [(0.5, dist(&[0.5, 0.5]))];
        assert!(tree_criterion(&bad, CriterionKind::Gini).is_err());
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = criterion_bounds(1, 10, 1.0, CriterionKind::ShannonEntropy).unwrap();
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 2.0 * 10f64.ln(), epsilon = 1e-12);
        let (lo, hi) = criterion_bounds(1, 10, 1.0, CriterionKind::Gini).unwrap();
        assert_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 1.8, epsilon = 1e-12);
        let (lo, hi) = criterion_bounds(3, 4, 0.5, mg(3.0)).unwrap();
        assert_abs_diff_eq!(lo, 1.4142135623730951, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 6.6332495807108, epsilon = 1e-12);
        assert!(criterion_bounds(1, 1, 1.0, CriterionKind::Gini).is_err());
        assert!(criterion_bounds(1, 2, 0.0, CriterionKind::Gini).is_err());
    }

    #[test]
    fn delta_examples() {
        let s = separating_split();
        assert_abs_diff_eq!(
            split_delta(&s, CriterionKind::ShannonEntropy),
            0.693147180559945,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(split_delta(&s, CriterionKind::Gini), 0.5, epsilon = 1e-15);

        let p = dist(&[0.2, 0.3, 0.5]);
        for beta in [0.1, 0.5, 0.9] {
            let s = SplitDecomposition::new(p.clone(), beta, p.clone(), p.clone()).unwrap();
            for kind in CriterionKind::all(GiniConstant::default()) {
                assert_eq!(split_delta(&s, kind), 0.0);
                assert_eq!(strong_concavity_lower_bound(&s, kind), 0.0);
            }
        }
    }

    #[test]
    fn concavity_examples() {
        let s = separating_split();
        assert_abs_diff_eq!(
            strong_concavity_lower_bound(&s, CriterionKind::ShannonEntropy),
            0.5,
            epsilon = 1e-15
        );
        assert!(split_delta(&s, CriterionKind::ShannonEntropy) >= 0.5);
        assert_abs_diff_eq!(
            strong_concavity_lower_bound(&s, mg(4.0)),
            0.03125,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mixture_identity_is_enforced() {
        let err =
            SplitDecomposition::new(dist(&[0.5, 0.5]), 0.5, dist(&[1.0, 0.0]), dist(&[1.0, 0.0]));
        assert!(matches!(err, Err(Error::MixtureViolated { .. })));
    }

    #[test]
    fn decomposition_from_statistics_matches_counts() {
        // left: 3 of class 0, 1 of class 1; right: 0 of class 0, 4 of class 1
        let from_counts = SplitDecomposition::from_child_counts(&[3, 1], &[0, 4]).unwrap();
        let parent = dist(&[3.0 / 8.0, 5.0 / 8.0]);
        let stats = SplitStatistics::from_conditionals(&parent, vec![0.0, 0.8]).unwrap();
        let from_stats = SplitDecomposition::from_statistics(&parent, &stats).unwrap();
        assert_abs_diff_eq!(from_counts.beta(), from_stats.beta(), epsilon = 1e-15);
        for (a, b) in from_counts
            .left()
            .probs()
            .iter()
            .zip(from_stats.left().probs())
        {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        for (a, b) in from_counts
            .right()
            .probs()
            .iter()
            .zip(from_stats.right().probs())
        {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn degenerate_split_has_zero_delta() {
        let s = SplitDecomposition::from_child_counts(&[3, 5], &[0, 0]).unwrap();
        assert_eq!(s.beta(), 0.0);
        for kind in CriterionKind::all(GiniConstant::default()) {
            assert_eq!(split_delta(&s, kind), 0.0);
        }
    }

    #[test]
    fn delta_bound_examples() {
        let g = 2.0 * 10f64.ln();
        let v =
            objective_to_delta_bound(0.5, 0.25, g, 1, 10, CriterionKind::ShannonEntropy).unwrap();
        assert_abs_diff_eq!(v, 0.05555555555555555, epsilon = 1e-12);
        let v = objective_to_delta_bound(1.0, 0.5, 0.0, 1, 2, CriterionKind::Gini).unwrap();
        assert_eq!(v, 0.0);
        let v = objective_to_delta_bound(1.0, 0.5, 1.0, 1, 2, CriterionKind::Gini).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        assert!(objective_to_delta_bound(1.0, 0.6, 1.0, 1, 2, CriterionKind::Gini).is_err());
        assert!(objective_to_delta_bound(1.0, 0.0, 1.0, 1, 2, CriterionKind::Gini).is_err());
    }
}
