//! Split budgets that drive a tree criterion below a target under the weak
//! hypothesis assumption.
//!
//! If every split attains advantage `γ` (`J/2 ≥ γ` with `γ ≤ min(β, 1 − β)`),
//! a criterion with per-split constant `η` obeys
//! `G_{t+1} ≤ G_1 exp(−η² log₂(t + 1)/32)`. Reaching `G ≤ α` from the
//! worst-case starting value `G_1` therefore takes `t + 1 ≥ (G_1/α)^{32/(η² log₂ e)}`
//! internal nodes. Exponents grow like `ln k` for entropy, `k` for Gini and
//! `k^{3/2}` for modified Gini, so budgets are computed in log space.

use std::f64::consts::LOG2_E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::criteria::{CriterionKind, GiniConstant};
use crate::error::{out_of_range, Result};
use crate::objective::{objective_value, ClassDistribution, SplitStatistics};

/// Budgets with `log₂` at or above this are reported as astronomical.
const MAX_FINITE_LOG2: f64 = 63.0;

/// A validated budget request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    kind: CriterionKind,
    k: usize,
    gamma: f64,
    alpha: f64,
}

impl BoundQuery {
    pub fn new(kind: CriterionKind, k: usize, gamma: f64, alpha: f64) -> Result<Self> {
        check_k(k)?;
        check_gamma(gamma)?;
        let (lo, hi) = admissible_range(kind, k)?;
        if !(alpha >= lo && alpha <= hi) {
            return Err(out_of_range("alpha", alpha, format!("[{lo}, {hi}]")));
        }
        Ok(Self {
            kind,
            k,
            gamma,
            alpha,
        })
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Worst-case criterion value after the first split (upper end of the
    /// admissible range).
    pub fn initial_value(&self) -> f64 {
        admissible_range(self.kind, self.k)
            .map(|(_, hi)| hi)
            .expect("validated at construction")
    }

    /// `η` of this query's criterion.
    pub fn eta(&self) -> f64 {
        let c = match self.kind {
            CriterionKind::ModifiedGini(c) => c,
            _ => GiniConstant::default(),
        };
        let etas = eta_constants(self.gamma, self.k, c.value()).expect("validated at construction");
        etas.for_kind(self.kind)
    }
}

/// Admissible targets `α` per criterion: `[0, 2 ln k]`, `[0, 2(1 − 1/k)]`
/// and `[√(C − 1), 2√(kC − 1)]`.
pub fn admissible_range(kind: CriterionKind, k: usize) -> Result<(f64, f64)> {
    check_k(k)?;
    let kf = k as f64;
    Ok(match kind {
        CriterionKind::ShannonEntropy => (0.0, 2.0 * kf.ln()),
        CriterionKind::Gini => (0.0, 2.0 * (1.0 - 1.0 / kf)),
        CriterionKind::ModifiedGini(c) => {
            let c = c.value();
            ((c - 1.0).sqrt(), 2.0 * (kf * c - 1.0).sqrt())
        }
    })
}

/// Number of splits sufficient to reach the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitBudget {
    Finite(u64),
    /// Too large for `u64`; carries `log₂` of the bound.
    Astronomical {
        log2_splits: f64,
    },
    /// Target 0 is never guaranteed.
    Infinite,
}

impl SplitBudget {
    /// `log₂` of the budget, for comparisons across the finite and
    /// astronomical regimes.
    pub fn log2(&self) -> f64 {
        match *self {
            Self::Finite(n) => (n as f64).log2(),
            Self::Astronomical { log2_splits } => log2_splits,
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for SplitBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "{n}"),
            Self::Astronomical { log2_splits } => {
                write!(f, "astronomical: log2(t) = {log2_splits:.6}")
            }
            Self::Infinite => f.write_str("infinite"),
        }
    }
}

/// `log₂` of the unrounded bound `(G_1/α)^{32/(η² log₂ e)}`; infinite for `α = 0`.
pub fn log2_split_bound(q: &BoundQuery) -> f64 {
    if q.alpha <= 0.0 {
        return f64::INFINITY;
    }
    let eta = q.eta();
    let exponent = 32.0 / (eta * eta * LOG2_E);
    exponent * (q.initial_value() / q.alpha).log2()
}

/// Budget of splits that guarantees the query's criterion is at most `α`.
///
/// Returns the ceiling of the bound (at least 1).
pub fn splits_required(q: &BoundQuery) -> SplitBudget {
    let log2 = log2_split_bound(q);
    if log2.is_infinite() {
        SplitBudget::Infinite
    } else if log2 >= MAX_FINITE_LOG2 {
        SplitBudget::Astronomical { log2_splits: log2 }
    } else {
        SplitBudget::Finite((log2.exp2().ceil() as u64).max(1))
    }
}

/// Per-split decrease constants of the three criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaConstants {
    pub eta_e: f64,
    pub eta_g: f64,
    pub eta_m: f64,
}

impl EtaConstants {
    pub fn for_kind(&self, kind: CriterionKind) -> f64 {
        match kind {
            CriterionKind::ShannonEntropy => self.eta_e,
            CriterionKind::Gini => self.eta_g,
            CriterionKind::ModifiedGini(_) => self.eta_m,
        }
    }
}

/// `η^e = 2√2 γ/((1 − γ)√(ln k))`, `η^g = 4γ/((1 − γ)√(k − 1))`,
/// `η^m = 4γ/((1 − γ)√((C³/(C − 2)²) k √(kC − 1)))`.
pub fn eta_constants(gamma: f64, k: usize, c: f64) -> Result<EtaConstants> {
    check_gamma(gamma)?;
    check_k(k)?;
    let c = GiniConstant::new(c)?;
    let kf = k as f64;
    let lead = gamma / (1.0 - gamma);
    let modified_scale = kf * (kf * c.value() - 1.0).sqrt() / c.concavity_factor();
    Ok(EtaConstants {
        eta_e: 2.0 * 2f64.sqrt() * lead / kf.ln().sqrt(),
        eta_g: 4.0 * lead / (kf - 1.0).sqrt(),
        eta_m: 4.0 * lead / modified_scale.sqrt(),
    })
}

/// `g1 · exp(−η² log₂(t + 1)/32)`, the criterion envelope after `t + 1`
/// internal nodes.
pub fn recurrence_envelope(g1: f64, eta: f64, t: u64) -> f64 {
    recurrence_envelope_log2(g1, eta, ((t + 1) as f64).log2())
}

/// [`recurrence_envelope`] parameterized by `log₂(t + 1)`, for budgets beyond `u64`.
pub fn recurrence_envelope_log2(g1: f64, eta: f64, log2_t_plus_one: f64) -> f64 {
    g1 * (-eta * eta * log2_t_plus_one / 32.0).exp()
}

/// Measured weak-learning advantage `min(J/2, β, 1 − β)` of a hypothesis.
pub fn empirical_gamma(dist: &ClassDistribution, stats: &SplitStatistics) -> Result<f64> {
    let j = objective_value(dist, stats)?;
    let beta = stats.marginal();
    Ok((j / 2.0).min(beta).min(1.0 - beta).clamp(0.0, 0.5))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(out_of_range("gamma", gamma, "(0, 0.5]"));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(out_of_range("k", k as f64, "[2, inf)"));
    }
    Ok(())
}
