//! Voronoi optimistic optimization over an [`ActionSpace`].
//!
//! A draw either explores uniformly (probability `omega`) or samples from
//! the Voronoi cell of the best-valued center by Gaussian rejection
//! sampling around that center, capped at `max_rejections` proposals.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::space::{uniform_action, Action, ActionSpace};

/// How `best_voronoi_cell` proposes candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalMode {
    /// Normal around the best center with per-dimension std `sigma`.
    #[default]
    Gaussian,
    /// Uniform over the whole space. This is the variant the convergence
    /// results assume; it is slow and meant for tests.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VooConfig {
    /// Probability of a uniform exploration draw.
    pub omega: f64,
    /// Proposal standard deviation per continuous dimension.
    pub sigma: Vec<f64>,
    pub max_rejections: usize,
    /// Proposals this close to the best center are accepted outright.
    pub accept_radius: f64,
    #[serde(default)]
    pub proposal: ProposalMode,
}

impl VooConfig {
    /// `accept_radius` defaults to a tenth of the mean proposal std.
    pub fn new(omega: f64, sigma: Vec<f64>) -> Self {
        let accept_radius = if sigma.is_empty() {
            0.0
        } else {
            sigma.iter().sum::<f64>() / sigma.len() as f64 / 10.0
        };
        VooConfig {
            omega,
            sigma,
            max_rejections: 20,
            accept_radius,
            proposal: ProposalMode::Gaussian,
        }
    }

    /// Builds the config from the diagonal of a covariance matrix.
    pub fn from_variances(omega: f64, variances: &[f64]) -> Self {
        Self::new(omega, variances.iter().map(|v| v.sqrt()).collect())
    }

    pub fn validate(&self, space: &ActionSpace) -> Result<()> {
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(PlanError::InvalidConfig(format!(
                "omega {} outside [0, 1]",
                self.omega
            )));
        }
        if self.sigma.len() != space.continuous_dims().len() {
            return Err(PlanError::InvalidConfig(format!(
                "sigma has {} entries for {} continuous dims",
                self.sigma.len(),
                space.continuous_dims().len()
            )));
        }
        if self.sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(PlanError::InvalidConfig("sigma entries must be > 0".into()));
        }
        if self.max_rejections == 0 {
            return Err(PlanError::InvalidConfig("max_rejections must be >= 1".into()));
        }
        if !(self.accept_radius >= 0.0) {
            return Err(PlanError::InvalidConfig("accept_radius must be >= 0".into()));
        }
        Ok(())
    }
}

/// Sampled actions with their current value estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VoronoiCenterSet {
    centers: Vec<Action>,
    values: Vec<f64>,
}

impl VoronoiCenterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(centers: Vec<Action>, values: Vec<f64>) -> Result<Self> {
        if centers.len() != values.len() {
            return Err(PlanError::LengthMismatch {
                left: centers.len(),
                right: values.len(),
            });
        }
        Ok(VoronoiCenterSet { centers, values })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Action] {
        &self.centers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn center(&self, i: usize) -> &Action {
        &self.centers[i]
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn push(&mut self, center: Action, value: f64) -> usize {
        self.centers.push(center);
        self.values.push(value);
        self.centers.len() - 1
    }

    pub fn set_value(&mut self, i: usize, value: f64) {
        self.values[i] = value;
    }

    /// Index of the largest value; ties go to the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        argmax(&self.values)
    }
}

pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if !(v > values[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// How a best-cell sample terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    /// Within `accept_radius` of the best center.
    Radius,
    /// At least as close to the best center as to every other center.
    Membership,
    /// No proposal was accepted; the closest one to the best center was returned.
    Capped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSample {
    pub action: Action,
    pub acceptance: Acceptance,
    pub best_index: usize,
    pub proposals: usize,
}

/// One VOO draw. The exploration coin is always flipped, even when the set
/// is empty, so the stream position does not depend on the branch.
pub fn voo_sample<R: Rng + ?Sized>(
    set: &VoronoiCenterSet,
    space: &ActionSpace,
    cfg: &VooConfig,
    rng: &mut R,
) -> Action {
    let u: f64 = rng.random();
    if u <= cfg.omega || set.is_empty() {
        uniform_action(space, rng)
    } else {
        best_voronoi_cell(set, space, cfg, rng)
    }
}

/// Rejection-sample the Voronoi cell of the best center.
///
/// # Panics
/// If `set` is empty.
pub fn best_voronoi_cell<R: Rng + ?Sized>(
    set: &VoronoiCenterSet,
    space: &ActionSpace,
    cfg: &VooConfig,
    rng: &mut R,
) -> Action {
    sample_best_cell(set, space, cfg, rng, None).action
}

/// [`best_voronoi_cell`] with termination details and an optional log of
/// every proposal.
pub fn sample_best_cell<R: Rng + ?Sized>(
    set: &VoronoiCenterSet,
    space: &ActionSpace,
    cfg: &VooConfig,
    rng: &mut R,
    mut log: Option<&mut Vec<Action>>,
) -> CellSample {
    let best = set.argmax().expect("best_voronoi_cell needs at least one center");
    let anchor = set.center(best);
    let mut closest: Option<(f64, Action)> = None;
    let budget = cfg.max_rejections.max(1);
    for n in 1..=budget {
        let candidate = propose(anchor, space, cfg, rng);
        if let Some(log) = log.as_deref_mut() {
            log.push(candidate.clone());
        }
        let to_best = space.distance(&candidate, anchor);
        if to_best <= cfg.accept_radius {
            return CellSample {
                action: candidate,
                acceptance: Acceptance::Radius,
                best_index: best,
                proposals: n,
            };
        }
        let inside = set
            .centers()
            .iter()
            .enumerate()
            .all(|(i, c)| i == best || to_best <= space.distance(&candidate, c));
        if inside {
            return CellSample {
                action: candidate,
                acceptance: Acceptance::Membership,
                best_index: best,
                proposals: n,
            };
        }
        if closest.as_ref().map_or(true, |(d, _)| to_best < *d) {
            closest = Some((to_best, candidate));
        }
    }
    CellSample {
        action: closest.map(|(_, a)| a).expect("at least one proposal"),
        acceptance: Acceptance::Capped,
        best_index: best,
        proposals: budget,
    }
}

fn propose<R: Rng + ?Sized>(
    anchor: &Action,
    space: &ActionSpace,
    cfg: &VooConfig,
    rng: &mut R,
) -> Action {
    match cfg.proposal {
        ProposalMode::Uniform => uniform_action(space, rng),
        ProposalMode::Gaussian => {
            let last = cfg.sigma.last().copied().unwrap_or(0.0);
            let continuous = anchor
                .continuous
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let z: f64 = rng.sample(StandardNormal);
                    x + cfg.sigma.get(i).copied().unwrap_or(last) * z
                })
                .collect();
            let mut a = Action {
                continuous,
                discrete: anchor.discrete.clone(),
            };
            space.project(&mut a);
            a
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn unit() -> ActionSpace {
        ActionSpace::boxed(&[(0.0, 1.0)])
    }

    #[test]
    fn accept_radius_defaults_to_tenth_of_sigma() {
        let cfg = VooConfig::new(0.5, vec![0.5, 0.3]);
        assert!((cfg.accept_radius - 0.04).abs() < 1e-15);
        assert_eq!(cfg.max_rejections, 20);
        let cfg = VooConfig::from_variances(0.8, &[0.25]);
        assert_eq!(cfg.sigma, vec![0.5]);
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let space = unit();
        assert!(VooConfig::new(0.5, vec![0.1]).validate(&space).is_ok());
        assert!(VooConfig::new(1.5, vec![0.1]).validate(&space).is_err());
        assert!(VooConfig::new(0.5, vec![0.0]).validate(&space).is_err());
        assert!(VooConfig::new(0.5, vec![0.1, 0.1]).validate(&space).is_err());
        let mut cfg = VooConfig::new(0.5, vec![0.1]);
        cfg.max_rejections = 0;
        assert!(cfg.validate(&space).is_err());
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax(&[]), None);
        assert_eq!(argmax(&[-1.0]), Some(0));
    }

    #[test]
    fn empty_set_draws_uniformly() {
        let space = unit();
        let cfg = VooConfig::new(0.0, vec![0.05]);
        let set = VoronoiCenterSet::new();
        let mut a = stream(5, 0);
        let mut b = stream(5, 0);
        let got = voo_sample(&set, &space, &cfg, &mut a);
        let _: f64 = b.random();
        assert_eq!(got, uniform_action(&space, &mut b));
    }

    #[test]
    fn single_center_accepts_first_proposal() {
        let space = ActionSpace::boxed(&[(0.0, 1.0), (0.0, 1.0)]);
        let mut cfg = VooConfig::new(0.0, vec![0.3, 0.3]);
        cfg.accept_radius = 0.0;
        let set = VoronoiCenterSet::from_parts(vec![Action::new(vec![0.5, 0.5])], vec![1.0]).unwrap();
        let mut rng = stream(6, 0);
        for _ in 0..200 {
            let s = sample_best_cell(&set, &space, &cfg, &mut rng, None);
            assert_eq!(s.proposals, 1);
            assert_ne!(s.acceptance, Acceptance::Capped);
        }
    }

    #[test]
    fn equidistant_proposal_is_inside() {
        // std tiny enough that every proposal sits on the anchor
        let space = unit();
        let mut cfg = VooConfig::new(0.0, vec![1e-300]);
        cfg.accept_radius = -1.0;
        let set = VoronoiCenterSet::from_parts(
            vec![Action::new(vec![0.5]), Action::new(vec![0.5])],
            vec![1.0, 0.0],
        )
        .unwrap();
        let s = sample_best_cell(&set, &space, &cfg, &mut stream(1, 0), None);
        assert_eq!(s.acceptance, Acceptance::Membership);
    }

    #[test]
    fn one_dimensional_cell_respects_midpoint() {
        let space = unit();
        let cfg = VooConfig::new(0.0, vec![0.05]);
        let set = VoronoiCenterSet::from_parts(
            vec![Action::new(vec![0.0]), Action::new(vec![1.0])],
            vec![1.0, 0.0],
        )
        .unwrap();
        let mut rng = stream(7, 0);
        for _ in 0..1000 {
            let s = sample_best_cell(&set, &space, &cfg, &mut rng, None);
            if s.acceptance != Acceptance::Capped {
                assert!(s.action.continuous[0] < 0.5);
            }
        }
    }

    #[test]
    fn capped_return_is_closest_proposal() {
        let space = unit();
        let mut cfg = VooConfig::new(0.0, vec![0.1]);
        cfg.accept_radius = 0.0;
        cfg.proposal = ProposalMode::Uniform;
        // the best cell is [0.495, 0.505]
        let set = VoronoiCenterSet::from_parts(
            vec![Action::new(vec![0.49]), Action::new(vec![0.5]), Action::new(vec![0.51])],
            vec![0.0, 1.0, 0.0],
        )
        .unwrap();
        let anchor = set.center(1).clone();
        let mut rng = stream(8, 0);
        let mut capped = 0;
        for _ in 0..1000 {
            let mut log = Vec::new();
            let s = sample_best_cell(&set, &space, &cfg, &mut rng, Some(&mut log));
            assert_eq!(log.len(), s.proposals);
            let d = space.distance(&s.action, &anchor);
            if s.acceptance == Acceptance::Capped {
                capped += 1;
                assert_eq!(log.len(), 20);
                assert!(log.iter().all(|p| d <= space.distance(p, &anchor)));
            }
        }
        assert!(capped > 0, "the cap path never fired");
    }

    #[test]
    fn uniform_branch_frequency_matches_omega() {
        let space = unit();
        let set = VoronoiCenterSet::from_parts(vec![Action::new(vec![0.5])], vec![0.0]).unwrap();
        for &omega in &[0.2, 0.7] {
            let cfg = VooConfig::new(omega, vec![0.05]);
            let mut rng = stream(9, 0);
            let n = 10_000;
            let mut uniform = 0;
            for _ in 0..n {
                let u: f64 = rng.random();
                if u <= cfg.omega {
                    uniform += 1;
                    let _ = uniform_action(&space, &mut rng);
                } else {
                    let _ = best_voronoi_cell(&set, &space, &cfg, &mut rng);
                }
            }
            let freq = uniform as f64 / n as f64;
            let tol = 3.0 * (omega * (1.0 - omega) / n as f64).sqrt();
            assert!((freq - omega).abs() <= tol, "omega {omega}: {freq}");
        }
    }

    #[test]
    fn uniform_proposal_mode_stays_in_cell() {
        let space = unit();
        let mut cfg = VooConfig::new(0.0, vec![0.05]);
        cfg.proposal = ProposalMode::Uniform;
        cfg.accept_radius = 0.0;
        let set = VoronoiCenterSet::from_parts(
            vec![Action::new(vec![0.2]), Action::new(vec![0.6])],
            vec![1.0, 0.0],
        )
        .unwrap();
        let mut rng = stream(10, 0);
        for _ in 0..500 {
            let s = sample_best_cell(&set, &space, &cfg, &mut rng, None);
            if s.acceptance == Acceptance::Membership {
                assert!(s.action.continuous[0] <= 0.4 + 1e-12);
            }
        }
    }
}
