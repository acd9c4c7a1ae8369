//! Randomized checks of the inequalities the library relies on.
//!
//! Every suite draws its instances from its own seeded stream, so a run is
//! reproducible from `(trials, seed)` and suites do not perturb each other.
//! A failing suite reports the first counterexample as JSON.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    admissible_range, empirical_gamma, log2_split_bound, recurrence_envelope_log2, splits_required,
    BoundQuery,
};
use crate::criteria::{
    criterion_bounds, leaf_criterion, objective_to_delta_bound, split_delta,
    strong_concavity_lower_bound, tree_criterion, CriterionKind, GiniConstant, SplitDecomposition,
};
use crate::objective::{
    balance_interval, objective_value, purity_factor, purity_upper_bound, ClassDistribution,
    SplitStatistics,
};

/// Class counts exercised by the objective suites.
pub const OBJECTIVE_KS: [usize; 5] = [2, 3, 5, 10, 50];
/// Modified Gini constants exercised by the concavity suite.
pub const CONCAVITY_CS: [f64; 4] = [2.5, 3.0, 4.0, 10.0];
/// Largest tree generated by the criterion-bound suites.
pub const MAX_LEAVES: usize = 64;
/// Largest class count of generated trees and splits.
pub const MAX_K: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Trials per suite (per class count or per constant where a suite sweeps
    /// one). Suites drawing whole random trees run a tenth of this.
    pub trials: usize,
    pub seed: u64,
    /// Multiplies every strong-concavity lower bound. Values above 1 inject a
    /// fault the concavity suite must catch.
    pub modulus_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
            modulus_scale: 1.0,
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    pub counterexample: Option<Value>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "{}: PASS ({} trials)", self.name, self.trials),
            Some(c) => write!(
                f,
                "{}: FAIL ({} trials) counterexample: {c}",
                self.name, self.trials
            ),
        }
    }
}

/// Runs every suite in a fixed order.
pub fn run_all(config: &VerifyConfig) -> Vec<SuiteReport> {
    vec![
        objective_range_suite(config),
        balance_interval_suite(config),
        purity_bound_suite(config),
        symmetry_suite(config),
        criterion_bounds_suite(config),
        modified_gini_floor_suite(config),
        mean_inequality_suite(config),
        strong_concavity_suite(config),
        per_split_decrease_suite(config),
        budget_consistency_suite(),
    ]
}

struct Suite {
    name: &'static str,
    trials: usize,
    counterexample: Option<Value>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            counterexample: None,
        }
    }

    /// Counts a trial and keeps the first failure.
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> Value) {
        self.trials += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(detail());
        }
    }

    fn failed(&self) -> bool {
        self.counterexample.is_some()
    }

    fn report(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            trials: self.trials,
            counterexample: self.counterexample,
        }
    }
}

fn tree_trials(config: &VerifyConfig) -> usize {
    config.trials.div_ceil(10)
}

fn stream(config: &VerifyConfig, suite: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(suite);
    rng
}

/// Random point of the simplex. The concentration is drawn per call so that
/// near-uniform, spiky and sparse (some exact zeros) vectors all occur.
pub(crate) fn random_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let shape = [0.1, 0.5, 1.0, 5.0][rng.random_range(0..4)];
    let gamma = Gamma::new(shape, 1.0).expect("positive shape");
    let sparse = rng.random_bool(0.2);
    loop {
        let mut v: Vec<f64> = (0..k)
            .map(|_| {
                if sparse && rng.random_bool(0.3) {
                    0.0
                } else {
                    gamma.sample(rng)
                }
            })
            .collect();
        let sum: f64 = v.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            v.iter_mut().for_each(|x| *x /= sum);
            return v;
        }
    }
}

fn random_conditionals(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => (0..k).map(|_| rng.random::<f64>()).collect(),
        1 => (0..k)
            .map(|_| f64::from(u8::from(rng.random_bool(0.5))))
            .collect(),
        _ => (0..k)
            .map(|_| {
                let side = f64::from(u8::from(rng.random_bool(0.5)));
                (side + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0)
            })
            .collect(),
    }
}

fn dist(probs: Vec<f64>) -> ClassDistribution {
    ClassDistribution::new(probs).expect("normalized by construction")
}

fn raw_objective(pi: &[f64], p: &[f64]) -> f64 {
    let beta: f64 = pi.iter().zip(p).map(|(a, b)| a * b).sum();
    2.0 * pi
        .iter()
        .zip(p)
        .map(|(a, b)| a * (beta - b).abs())
        .sum::<f64>()
}

/// A distribution split into two halves of mass exactly ½ each, routed
/// right on the first half: pure and balanced by construction.
fn pure_balanced(rng: &mut impl Rng, k: usize) -> (Vec<f64>, Vec<f64>) {
    let cut = rng.random_range(1..k);
    let mut pi = Vec::with_capacity(k);
    for (lo, hi) in [(0, cut), (cut, k)] {
        let part = random_simplex(rng, hi - lo);
        pi.extend(part.into_iter().map(|x| 0.5 * x));
    }
    let p = (0..k).map(|i| if i < cut { 1.0 } else { 0.0 }).collect();
    (pi, p)
}

/// `J ∈ [0, 1]`; `J = 1` exactly for pure balanced splits and only for them.
pub fn objective_range_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("objective_range");
    let mut rng = stream(config, 1);
    for &k in &OBJECTIVE_KS {
        for _ in 0..config.trials {
            let constructed = rng.random_bool(0.25);
            let (pi, p) = if constructed {
                pure_balanced(&mut rng, k)
            } else {
                (
                    random_simplex(&mut rng, k),
                    random_conditionals(&mut rng, k),
                )
            };
            let j = raw_objective(&pi, &p);
            let beta: f64 = pi.iter().zip(&p).map(|(a, b)| a * b).sum();
            let pure = pi
                .iter()
                .zip(&p)
                .all(|(&w, &q)| w == 0.0 || q.min(1.0 - q) <= 1e-6);
            let balanced = (beta - 0.5).abs() <= 1e-6;
            let in_range = (0.0..=1.0 + 1e-12).contains(&j);
            let forward = j < 1.0 - 1e-12 || (pure && balanced);
            let backward =
                !(constructed || (pure && (beta - 0.5).abs() <= 1e-12)) || (j - 1.0).abs() <= 1e-6;
            suite.check(
                in_range && forward && backward,
                || json!({"k": k, "pi": pi, "P": p, "J": j, "beta": beta}),
            );
        }
    }
    suite.report()
}

/// `β ∈ [½(1 − √(1 − J)), ½(1 + √(1 − J))]`.
pub fn balance_interval_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("balance_interval");
    let mut rng = stream(config, 2);
    for &k in &OBJECTIVE_KS {
        for _ in 0..config.trials {
            let d = dist(random_simplex(&mut rng, k));
            let s = SplitStatistics::from_conditionals(&d, random_conditionals(&mut rng, k))
                .expect("valid by construction");
            let j = objective_value(&d, &s).expect("consistent");
            let (lo, hi) = balance_interval(j).expect("J in range");
            let beta = s.marginal();
            // near J = 1 the square root amplifies rounding, so the
            // equivalent form (2β − 1)² ≤ 1 − J also counts
            let inside = (beta >= lo - 1e-12 && beta <= hi + 1e-12)
                || (2.0 * beta - 1.0).powi(2) <= 1.0 - j + 1e-12;
            suite.check(inside, || {
                json!({"k": k, "pi": d.probs(), "P": s.conditionals(), "J": j, "beta": beta, "interval": [lo, hi]})
            });
        }
    }
    suite.report()
}

/// `α ≤ min((2 − J)/(4β) − β, ½) + 1e-9`, with `β` taken in the orientation
/// `β ≤ ½` (left and right exchanged when needed).
pub fn purity_bound_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("purity_bound");
    let mut rng = stream(config, 3);
    for &k in &OBJECTIVE_KS {
        let mut done = 0;
        while done < config.trials {
            let d = dist(random_simplex(&mut rng, k));
            let mut s = SplitStatistics::from_conditionals(&d, random_conditionals(&mut rng, k))
                .expect("valid by construction");
            if !(s.marginal() > 0.0 && s.marginal() < 1.0) {
                continue;
            }
            done += 1;
            if s.marginal() > 0.5 {
                s = s.mirrored();
            }
            let j = objective_value(&d, &s).expect("consistent");
            let alpha = purity_factor(&d, &s).expect("same length");
            let bound = purity_upper_bound(j, s.marginal()).expect("beta in (0, 1)");
            suite.check(alpha <= bound + 1e-9, || {
                json!({"k": k, "pi": d.probs(), "P": s.conditionals(), "J": j, "beta": s.marginal(), "alpha": alpha, "bound": bound})
            });
        }
    }
    suite.report()
}

/// `J` is invariant under permuting classes and under exchanging sides.
pub fn symmetry_suite(config: &VerifyConfig) -> SuiteReport {
    use rand::seq::SliceRandom;
    let mut suite = Suite::new("objective_symmetry");
    let mut rng = stream(config, 4);
    for _ in 0..config.trials {
        let k = rng.random_range(2..=MAX_K);
        let pi = random_simplex(&mut rng, k);
        let p = random_conditionals(&mut rng, k);
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut rng);
        let d = dist(pi.clone());
        let s = SplitStatistics::from_conditionals(&d, p.clone()).expect("valid");
        let j = objective_value(&d, &s).expect("consistent");
        let dp = dist(perm.iter().map(|&i| pi[i]).collect());
        let sp = SplitStatistics::from_conditionals(&dp, perm.iter().map(|&i| p[i]).collect())
            .expect("valid");
        let j_perm = objective_value(&dp, &sp).expect("consistent");
        let sm = SplitStatistics::from_conditionals(&d, p.iter().map(|x| 1.0 - x).collect())
            .expect("valid");
        let j_mirror = objective_value(&d, &sm).expect("consistent");
        suite.check(
            (j - j_perm).abs() <= 1e-12 && (j - j_mirror).abs() <= 1e-12,
            || json!({"pi": pi, "P": p, "J": j, "J_permuted": j_perm, "J_mirrored": j_mirror}),
        );
    }
    suite.report()
}

/// Leaves of a random tree grown by splitting random leaves with random
/// hypotheses; weights are products of the routing fractions.
pub(crate) fn random_tree(rng: &mut impl Rng, k: usize, leaves: usize) -> Vec<(f64, Vec<f64>)> {
    let mut tree = vec![(1.0, random_simplex(rng, k))];
    while tree.len() < leaves {
        let at = rng.random_range(0..tree.len());
        let (w, pi) = tree[at].clone();
        let p = random_conditionals(rng, k);
        let beta: f64 = pi.iter().zip(&p).map(|(a, b)| a * b).sum();
        if !(beta > 1e-9 && beta < 1.0 - 1e-9) {
            continue;
        }
        let child = |mass: f64, f: &dyn Fn(usize) -> f64| -> Vec<f64> {
            let v: Vec<f64> = (0..k).map(|i| f(i) / mass).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        };
        let left = child(1.0 - beta, &|i| pi[i] * (1.0 - p[i]));
        let right = child(beta, &|i| pi[i] * p[i]);
        tree[at] = (w * (1.0 - beta), left);
        tree.push((w * beta, right));
    }
    tree
}

fn as_leaves(tree: &[(f64, Vec<f64>)]) -> Vec<(f64, ClassDistribution)> {
    // renormalize weights so the sum-to-one check sees exact-ish input
    let total: f64 = tree.iter().map(|(w, _)| w).sum();
    tree.iter()
        .map(|(w, p)| (w / total, dist(p.clone())))
        .collect()
}

/// Tree criteria lie within their `(t+1) w`-scaled bounds, `w` the heaviest
/// leaf weight.
pub fn criterion_bounds_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("criterion_bounds");
    let mut rng = stream(config, 5);
    let c = GiniConstant::default();
    for _ in 0..tree_trials(config) {
        let k = rng.random_range(2..=MAX_K);
        let n_leaves = rng.random_range(1..=MAX_LEAVES);
        let leaves = as_leaves(&random_tree(&mut rng, k, n_leaves));
        let w = leaves.iter().map(|(w, _)| *w).fold(0.0, f64::max);
        let t = (leaves.len() - 1) as u64;
        let mut bad = None;
        for kind in CriterionKind::all(c) {
            let g = tree_criterion(&leaves, kind).expect("weights sum to one");
            let (lo, hi) = criterion_bounds(t, k, w, kind).expect("valid");
            let slack = 1e-12 * hi.abs().max(1.0);
            if !(g >= lo - slack && g <= hi + slack) {
                bad = Some(
                    json!({"kind": kind.name(), "k": k, "t": t, "w": w, "G": g, "bounds": [lo, hi]}),
                );
                break;
            }
        }
        suite.check(bad.is_none(), || bad.unwrap());
    }
    suite.report()
}

/// `Σ √(π_i(C − π_i)) ≥ √(C − 1)` for every distribution.
pub fn modified_gini_floor_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("modified_gini_floor");
    let mut rng = stream(config, 6);
    for &c in &CONCAVITY_CS {
        let kind = CriterionKind::modified_gini(c).expect("C > 2");
        for _ in 0..config.trials {
            let k = rng.random_range(2..=MAX_K);
            let d = dist(random_simplex(&mut rng, k));
            let g = leaf_criterion(&d, kind);
            suite.check(
                g >= (c - 1.0).sqrt() * (1.0 - 1e-12),
                || json!({"C": c, "pi": d.probs(), "G": g}),
            );
        }
    }
    suite.report()
}

/// `Σ x_i² ≥ (Σ x_i)²/k` for non-negative `x`.
pub fn mean_inequality_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("mean_inequality");
    let mut rng = stream(config, 7);
    for _ in 0..config.trials {
        let k = rng.random_range(1..=MAX_K);
        let scale = 10f64.powi(rng.random_range(-3..4));
        let x: Vec<f64> = (0..k).map(|_| scale * rng.random::<f64>()).collect();
        let squares: f64 = x.iter().map(|v| v * v).sum();
        let sum: f64 = x.iter().sum();
        let rhs = sum * sum / k as f64;
        suite.check(
            squares >= rhs * (1.0 - 1e-12),
            || json!({"x": x, "sum_sq": squares, "rhs": rhs}),
        );
    }
    suite.report()
}

fn random_decomposition(rng: &mut impl Rng) -> SplitDecomposition {
    let k = rng.random_range(2..=MAX_K);
    let beta = rng.random_range(0.01..=0.99);
    let left = random_simplex(rng, k);
    let right = random_simplex(rng, k);
    let parent: Vec<f64> = left
        .iter()
        .zip(&right)
        .map(|(l, r)| (1.0 - beta) * l + beta * r)
        .collect();
    SplitDecomposition::new(dist(parent), beta, dist(left), dist(right))
        .expect("mixture holds by construction")
}

/// Jensen gap is non-negative and at least its strong-concavity bound, for
/// entropy, Gini and modified Gini at each constant in [`CONCAVITY_CS`].
pub fn strong_concavity_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("strong_concavity");
    let mut rng = stream(config, 8);
    let mut kinds = vec![CriterionKind::ShannonEntropy, CriterionKind::Gini];
    kinds.extend(
        CONCAVITY_CS
            .iter()
            .map(|&c| CriterionKind::modified_gini(c).expect("C > 2")),
    );
    for kind in kinds {
        for _ in 0..config.trials {
            let split = random_decomposition(&mut rng);
            let delta = split_delta(&split, kind);
            let bound = config.modulus_scale * strong_concavity_lower_bound(&split, kind);
            suite.check(delta >= 0.0 && delta >= bound - 1e-9, || {
                json!({"kind": kind.to_string(), "beta": split.beta(), "pi0": split.left().probs(), "pi1": split.right().probs(), "delta": delta, "bound": bound})
            });
            if suite.failed() {
                return suite.report();
            }
        }
    }
    suite.report()
}

/// Splitting the heaviest leaf of a random tree with a hypothesis of
/// advantage `γ̂` lowers each criterion by at least the guaranteed amount.
pub fn per_split_decrease_suite(config: &VerifyConfig) -> SuiteReport {
    let mut suite = Suite::new("per_split_decrease");
    let mut rng = stream(config, 9);
    let c = GiniConstant::default();
    let mut done = 0;
    while done < tree_trials(config) {
        let k = rng.random_range(2..=MAX_K);
        let n_leaves = rng.random_range(1..=MAX_LEAVES);
        let leaves = as_leaves(&random_tree(&mut rng, k, n_leaves));
        let (heaviest, _) = leaves
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("non-empty");
        let (w, pi) = leaves[heaviest].clone();
        let stats = SplitStatistics::from_conditionals(&pi, random_conditionals(&mut rng, k))
            .expect("valid");
        let gamma = empirical_gamma(&pi, &stats).expect("consistent");
        if gamma <= 0.0 {
            continue;
        }
        done += 1;
        let j = objective_value(&pi, &stats).expect("consistent");
        let split = SplitDecomposition::from_statistics(&pi, &stats).expect("consistent");
        let t = (leaves.len() - 1) as u64;
        let mut bad = None;
        for kind in CriterionKind::all(c) {
            let g_t = tree_criterion(&leaves, kind).expect("weights sum to one");
            let decrease = w * split_delta(&split, kind);
            let guaranteed = objective_to_delta_bound(j, gamma, g_t, t, k, kind).expect("valid");
            if decrease < guaranteed - 1e-12 {
                bad = Some(
                    json!({"kind": kind.name(), "k": k, "t": t, "w": w, "J": j, "gamma": gamma, "G_t": g_t, "decrease": decrease, "guaranteed": guaranteed}),
                );
                break;
            }
        }
        suite.check(bad.is_none(), || bad.unwrap());
    }
    suite.report()
}

pub const GRID_GAMMAS: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];
pub const GRID_KS: [usize; 8] = [2, 3, 5, 10, 20, 32, 50, 100];
/// Targets as fractions of the admissible range (from its lower end).
pub const GRID_ALPHA_FRACTIONS: [f64; 7] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0];

fn grid_kinds() -> [CriterionKind; 3] {
    CriterionKind::all(GiniConstant::default())
}

fn alpha_at(kind: CriterionKind, k: usize, fraction: f64) -> f64 {
    let (lo, hi) = admissible_range(kind, k).expect("k >= 2");
    lo + fraction * (hi - lo)
}

/// On the budget grid: the envelope at `budget − 1` is at most `α(1 + 1e-9)`,
/// budgets are monotone in `γ`, `α` and `k`, and the log-log slopes in `1/α`
/// grow like `ln k` (entropy) and `k − 1` (Gini).
pub fn budget_consistency_suite() -> SuiteReport {
    let mut suite = Suite::new("budget_consistency");
    for kind in grid_kinds() {
        for &k in &GRID_KS {
            for &gamma in &GRID_GAMMAS {
                for &f in &GRID_ALPHA_FRACTIONS {
                    let alpha = alpha_at(kind, k, f);
                    let q = BoundQuery::new(kind, k, gamma, alpha).expect("on grid");
                    let budget = splits_required(&q);
                    let envelope =
                        recurrence_envelope_log2(q.initial_value(), q.eta(), budget.log2());
                    suite.check(envelope <= alpha * (1.0 + 1e-9), || {
                        json!({"kind": kind.name(), "k": k, "gamma": gamma, "alpha": alpha, "budget": budget.to_string(), "envelope": envelope})
                    });
                }
            }
        }
    }
    for (name, ok, detail) in budget_monotonicity() {
        suite.check(ok, || json!({"monotonicity": name, "detail": detail}));
    }
    for &gamma in &GRID_GAMMAS {
        let (spread, detail) = slope_scaling(gamma);
        suite.check(
            spread.iter().all(|&s| s <= 1.1),
            || json!({"slope_scaling": detail, "gamma": gamma, "spreads": spread}),
        );
    }
    suite.report()
}

/// Max-over-min spreads, across [`GRID_KS`], of the entropy slope divided by
/// `ln k`, the Gini slope divided by `k − 1`, and their ratio divided by
/// `(k − 1)/ln k`. Each is 1 when the slopes scale as claimed.
pub fn slope_scaling(gamma: f64) -> ([f64; 3], String) {
    let mut series: [Vec<f64>; 3] = Default::default();
    for &k in &GRID_KS {
        let lnk = (k as f64).ln();
        let slope = |kind| {
            let (lo, hi) = admissible_range(kind, k).expect("k >= 2");
            budget_slope(kind, k, gamma, lo + 0.5 * (hi - lo), lo + 0.01 * (hi - lo))
        };
        let e = slope(CriterionKind::ShannonEntropy);
        let g = slope(CriterionKind::Gini);
        series[0].push(e / lnk);
        series[1].push(g / (k as f64 - 1.0));
        series[2].push((g / e) / ((k as f64 - 1.0) / lnk));
    }
    let spread = series.each_ref().map(|s| {
        let max = s.iter().copied().fold(f64::MIN, f64::max);
        let min = s.iter().copied().fold(f64::MAX, f64::min);
        max / min
    });
    (spread, format!("{series:?}"))
}

fn budget_log2(kind: CriterionKind, k: usize, gamma: f64, alpha: f64) -> f64 {
    splits_required(&BoundQuery::new(kind, k, gamma, alpha).expect("on grid")).log2()
}

/// `(check name, passed, detail)` for every monotonicity comparison on the grid.
pub fn budget_monotonicity() -> Vec<(&'static str, bool, String)> {
    let mut out = Vec::new();
    for kind in grid_kinds() {
        for &k in &GRID_KS {
            for &f in &GRID_ALPHA_FRACTIONS {
                let alpha = alpha_at(kind, k, f);
                for pair in GRID_GAMMAS.windows(2) {
                    let (a, b) = (
                        budget_log2(kind, k, pair[0], alpha),
                        budget_log2(kind, k, pair[1], alpha),
                    );
                    out.push((
                        "gamma",
                        b <= a,
                        format!(
                            "{} k={k} alpha={alpha} gamma {pair:?}: {a} -> {b}",
                            kind.name()
                        ),
                    ));
                }
            }
            for &gamma in &GRID_GAMMAS {
                for pair in GRID_ALPHA_FRACTIONS.windows(2) {
                    let (a, b) = (
                        budget_log2(kind, k, gamma, alpha_at(kind, k, pair[0])),
                        budget_log2(kind, k, gamma, alpha_at(kind, k, pair[1])),
                    );
                    out.push((
                        "alpha",
                        b <= a,
                        format!(
                            "{} k={k} gamma={gamma} fractions {pair:?}: {a} -> {b}",
                            kind.name()
                        ),
                    ));
                }
            }
        }
        // a target admissible at k = 2 stays admissible for every larger k
        for &gamma in &GRID_GAMMAS {
            for &f in &GRID_ALPHA_FRACTIONS {
                let alpha = alpha_at(kind, 2, f);
                for pair in GRID_KS.windows(2) {
                    let (a, b) = (
                        budget_log2(kind, pair[0], gamma, alpha),
                        budget_log2(kind, pair[1], gamma, alpha),
                    );
                    out.push((
                        "k",
                        b >= a,
                        format!(
                            "{} gamma={gamma} alpha={alpha} k {pair:?}: {a} -> {b}",
                            kind.name()
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// Log-log slope of the unrounded budget against `1/α`, measured between two
/// targets.
pub fn budget_slope(
    kind: CriterionKind,
    k: usize,
    gamma: f64,
    alpha_hi: f64,
    alpha_lo: f64,
) -> f64 {
    let at =
        |alpha: f64| log2_split_bound(&BoundQuery::new(kind, k, gamma, alpha).expect("in range"));
    (at(alpha_lo) - at(alpha_hi)) / (alpha_hi / alpha_lo).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            trials: 300,
            seed: 7,
            modulus_scale: 1.0,
        }
    }

    #[test]
    fn all_suites_pass_on_a_small_run() {
        for report in run_all(&small()) {
            assert!(report.passed(), "{report}");
            assert!(report.trials > 0);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        assert_eq!(run_all(&small()), run_all(&small()));
    }

    #[test]
    fn inflated_modulus_is_caught() {
        let config = VerifyConfig {
            modulus_scale: 50.0,
            ..small()
        };
        let report = strong_concavity_suite(&config);
        assert!(!report.passed());
        assert!(report.to_string().contains("FAIL"));
    }

    #[test]
    fn random_trees_have_unit_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for leaves in [1, 2, 17, 64] {
            let tree = random_tree(&mut rng, 5, leaves);
            assert_eq!(tree.len(), leaves);
            let total: f64 = tree.iter().map(|(w, _)| w).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
