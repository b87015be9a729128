//! Action progressive widening with VOO proposals, and UCB over the
//! children a node already has.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::space::{Action, ActionSpace};
use crate::voo::{voo_sample, VooConfig, VoronoiCenterSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VpwConfig {
    pub k_a: f64,
    pub alpha_a: f64,
    /// UCB exploration constant.
    pub c: f64,
    pub voo: VooConfig,
    /// Treat `k_a · N^alpha_a` as infinite: every selection is a fresh VOO draw.
    #[serde(default)]
    pub widen_unbounded: bool,
}

impl VpwConfig {
    pub fn validate(&self, space: &ActionSpace) -> Result<()> {
        if !(self.k_a > 0.0) {
            return Err(PlanError::InvalidConfig("k_a must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha_a) {
            return Err(PlanError::InvalidConfig("alpha_a outside [0, 1]".into()));
        }
        if !(self.c >= 0.0) {
            return Err(PlanError::InvalidConfig("c must be >= 0".into()));
        }
        self.voo.validate(space)
    }

    /// The same settings with uniform proposals only.
    pub fn as_pw(&self) -> VpwConfig {
        let mut cfg = self.clone();
        cfg.voo.omega = 1.0;
        cfg
    }

    /// Whether a node with `children` actions and `visits` visits may add one.
    pub fn may_widen(&self, children: usize, visits: u64) -> bool {
        children == 0
            || self.widen_unbounded
            || children as f64 <= self.k_a * (visits as f64).powf(self.alpha_a)
    }
}

/// Outcome of an action-layer selection.
#[derive(Debug, Clone, PartialEq)]
pub enum VpwChoice {
    /// A new action; the caller appends it to the node's children.
    New(Action),
    /// Index of an existing child picked by UCB.
    Existing(usize),
}

impl VpwChoice {
    pub fn is_new(&self) -> bool {
        matches!(self, VpwChoice::New(_))
    }
}

/// `argmax Q + c·sqrt(ln N / n)`, unvisited children first, ties to the lowest index.
///
/// # Panics
/// If `children` is empty or `visit_counts` has a different length.
pub fn ucb_select(
    children: &VoronoiCenterSet,
    visit_counts: &[u64],
    total_visits: u64,
    c: f64,
) -> usize {
    assert!(!children.is_empty(), "ucb_select needs at least one child");
    assert_eq!(children.len(), visit_counts.len());
    if let Some(i) = visit_counts.iter().position(|&n| n == 0) {
        return i;
    }
    let log_n = (total_visits.max(1) as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&q, &n)) in children.values().iter().zip(visit_counts).enumerate() {
        let score = if c == 0.0 {
            q
        } else {
            q + c * (log_n / n as f64).sqrt()
        };
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Voronoi progressive widening: a VOO draw while the widening criterion
/// holds, otherwise UCB among the existing children.
pub fn vpw_select<R: Rng + ?Sized>(
    children: &VoronoiCenterSet,
    counts: &[u64],
    total_visits: u64,
    space: &ActionSpace,
    cfg: &VpwConfig,
    rng: &mut R,
) -> VpwChoice {
    debug_assert_eq!(children.len(), counts.len());
    if cfg.may_widen(children.len(), total_visits) {
        VpwChoice::New(voo_sample(children, space, &cfg.voo, rng))
    } else {
        VpwChoice::Existing(ucb_select(children, counts, total_visits, cfg.c))
    }
}

/// Plain action progressive widening. This is `vpw_select` with
/// `omega = 1`, so the VOO coin is still flipped and both consume the
/// stream identically.
pub fn pw_select<R: Rng + ?Sized>(
    children: &VoronoiCenterSet,
    counts: &[u64],
    total_visits: u64,
    space: &ActionSpace,
    cfg: &VpwConfig,
    rng: &mut R,
) -> VpwChoice {
    vpw_select(children, counts, total_visits, space, &cfg.as_pw(), rng)
}
