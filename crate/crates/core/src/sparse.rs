//! Full-width sparse-sampling value estimators with VPW action selection.
//!
//! [`Vowss`] works on weighted particle beliefs and branches on every
//! generated observation, reweighting all next states by the observation
//! likelihood. [`Voss`] is the fully observable version on states.

use serde::{Deserialize, Serialize};

use crate::belief::{reweight_next_belief, weighted_mean_value, WeightedParticleBelief};
use crate::error::{PlanError, Result};
use crate::problem::Problem;
use crate::rng::SimRng;
use crate::space::{Action, ActionSpace};
use crate::voo::VoronoiCenterSet;
use crate::widening::{vpw_select, VpwChoice, VpwConfig};

/// Widths and depth of a sparse-sampling tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseConfig {
    /// Particles (or next-state samples) per node, `C_s`.
    pub state_width: usize,
    /// Action selections at the root, `C_a`.
    pub action_width: usize,
    /// Per-depth multiplier on the action width, `γ_a ∈ (0, 1]`.
    pub action_width_decay: f64,
    pub depth: usize,
    pub vpw: VpwConfig,
}

pub type VowssConfig = SparseConfig;
pub type VossConfig = SparseConfig;

impl SparseConfig {
    /// Action selections at `depth`: `max(1, round(C_a · γ_a^depth))`.
    pub fn action_width_at(&self, depth: usize) -> usize {
        let w = self.action_width as f64 * self.action_width_decay.powi(depth as i32);
        (w.round() as usize).max(1)
    }

    pub fn validate(&self, space: &ActionSpace) -> Result<()> {
        if self.state_width == 0 || self.action_width == 0 {
            return Err(PlanError::InvalidConfig(
                "state and action widths must be >= 1".into(),
            ));
        }
        if !(self.action_width_decay > 0.0 && self.action_width_decay <= 1.0) {
            return Err(PlanError::InvalidConfig(
                "action_width_decay must lie in (0, 1]".into(),
            ));
        }
        self.vpw.validate(space)
    }
}

/// A node value and the action that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub action: Option<Action>,
}

impl Estimate {
    fn leaf() -> Self {
        Estimate {
            value: 0.0,
            action: None,
        }
    }
}

/// Running VPW state of one tree node.
struct NodeActions {
    set: VoronoiCenterSet,
    counts: Vec<u64>,
    selections: u64,
}

impl NodeActions {
    fn new() -> Self {
        NodeActions {
            set: VoronoiCenterSet::new(),
            counts: Vec::new(),
            selections: 0,
        }
    }

    /// Runs `width` selections, evaluating each with `evaluate`.
    fn run<F>(
        mut self,
        width: usize,
        space: &ActionSpace,
        cfg: &VpwConfig,
        rng: &mut SimRng,
        mut evaluate: F,
    ) -> Result<Estimate>
    where
        F: FnMut(&Action, &mut SimRng) -> Result<f64>,
    {
        for _ in 0..width {
            let choice = vpw_select(&self.set, &self.counts, self.selections, space, cfg, rng);
            match choice {
                VpwChoice::New(action) => {
                    let q = evaluate(&action, rng)?;
                    self.set.push(action, q);
                    self.counts.push(1);
                }
                VpwChoice::Existing(i) => {
                    let action = self.set.center(i).clone();
                    let q = evaluate(&action, rng)?;
                    self.counts[i] += 1;
                    let mean = self.set.value(i) + (q - self.set.value(i)) / self.counts[i] as f64;
                    self.set.set_value(i, mean);
                }
            }
            self.selections += 1;
        }
        let best = self.set.argmax().expect("width >= 1");
        Ok(Estimate {
            value: self.set.value(best),
            action: Some(self.set.center(best).clone()),
        })
    }
}

/// Voronoi optimistic weighted sparse sampling for POMDPs.
pub struct Vowss<'a, P> {
    problem: &'a P,
    cfg: &'a SparseConfig,
}

impl<'a, P: Problem> Vowss<'a, P> {
    pub fn new(problem: &'a P, cfg: &'a SparseConfig) -> Self {
        Vowss { problem, cfg }
    }

    /// Max over `C_a·γ_a^depth` VPW-selected actions of their Q estimates.
    pub fn estimate_v(
        &self,
        belief: &WeightedParticleBelief<P::State>,
        depth: usize,
        rng: &mut SimRng,
    ) -> Result<Estimate> {
        if depth >= self.cfg.depth
            || belief.particles().iter().all(|s| self.problem.is_terminal(s))
        {
            return Ok(Estimate::leaf());
        }
        if belief.is_degenerate() {
            return Err(PlanError::DegenerateBelief);
        }
        NodeActions::new().run(
            self.cfg.action_width_at(depth),
            self.problem.action_space(),
            &self.cfg.vpw,
            rng,
            |a, rng| self.estimate_q(belief, a, depth, rng),
        )
    }

    /// Likelihood-weighted average of `r_i + γ·V(b a o_i)` over the
    /// particles, where child `i` holds every next state reweighted by
    /// `Z(o_i | a, s'_j)`.
    pub fn estimate_q(
        &self,
        belief: &WeightedParticleBelief<P::State>,
        action: &Action,
        depth: usize,
        rng: &mut SimRng,
    ) -> Result<f64> {
        let problem = self.problem;
        let gamma = problem.discount();
        let mut next_states = Vec::with_capacity(belief.len());
        let mut observations = Vec::with_capacity(belief.len());
        let mut rewards = Vec::with_capacity(belief.len());
        for (s, _) in belief.iter() {
            let t = problem.generate(s, action, rng);
            next_states.push(t.state);
            observations.push(t.observation);
            rewards.push(t.reward);
        }
        let mut returns = rewards.clone();
        if depth + 1 < self.cfg.depth {
            for (j, obs) in observations.iter().enumerate() {
                let w_j = belief.weights()[j];
                let child = match reweight_next_belief(belief, next_states.clone(), obs, action, problem) {
                    Ok(mut child) => {
                        // rescale so weight products do not underflow with depth
                        let top = child.weights().iter().cloned().fold(0.0, f64::max);
                        child.scale_weights(1.0 / top);
                        child
                    }
                    // a zero-weight branch does not enter the average
                    Err(PlanError::DegenerateBelief) if w_j == 0.0 => continue,
                    Err(e) => return Err(e),
                };
                let v = self.estimate_v(&child, depth + 1, rng)?;
                returns[j] += gamma * v.value;
            }
        }
        weighted_mean_value(&returns, belief.weights())
    }

    /// The maximizing root action.
    pub fn plan(
        &self,
        root: &WeightedParticleBelief<P::State>,
        rng: &mut SimRng,
    ) -> Result<Action> {
        if self.cfg.depth == 0 {
            return Err(PlanError::EmptyPlan);
        }
        self.estimate_v(root, 0, rng)?
            .action
            .ok_or(PlanError::EmptyPlan)
    }
}

/// Voronoi optimistic sparse sampling for (stochastic) MDPs.
pub struct Voss<'a, P> {
    problem: &'a P,
    cfg: &'a SparseConfig,
}

impl<'a, P: Problem> Voss<'a, P> {
    pub fn new(problem: &'a P, cfg: &'a SparseConfig) -> Self {
        Voss { problem, cfg }
    }

    pub fn estimate_v(&self, state: &P::State, depth: usize, rng: &mut SimRng) -> Result<Estimate> {
        if depth >= self.cfg.depth || self.problem.is_terminal(state) {
            return Ok(Estimate::leaf());
        }
        NodeActions::new().run(
            self.cfg.action_width_at(depth),
            self.problem.action_space(),
            &self.cfg.vpw,
            rng,
            |a, rng| self.estimate_q(state, a, depth, rng),
        )
    }

    /// `r + γ · mean_i V(s'_i)` over `C_s` next-state draws. The reward is
    /// the mean of the drawn rewards, which is the common value whenever
    /// the reward depends on `(s, a)` only.
    pub fn estimate_q(
        &self,
        state: &P::State,
        action: &Action,
        depth: usize,
        rng: &mut SimRng,
    ) -> Result<f64> {
        let problem = self.problem;
        let n = self.cfg.state_width;
        let mut next_states = Vec::with_capacity(n);
        let mut reward_sum = 0.0;
        for _ in 0..n {
            let t = problem.generate(state, action, rng);
            reward_sum += t.reward;
            next_states.push(t.state);
        }
        let reward = reward_sum / n as f64;
        if depth + 1 >= self.cfg.depth {
            return Ok(reward);
        }
        let mut value_sum = 0.0;
        for s in &next_states {
            value_sum += self.estimate_v(s, depth + 1, rng)?.value;
        }
        Ok(reward + problem.discount() * (value_sum / n as f64))
    }

    pub fn plan(&self, state: &P::State, rng: &mut SimRng) -> Result<Action> {
        if !self.problem.is_mdp() {
            return Err(PlanError::InvalidConfig(
                "VOSS needs a fully observable problem".into(),
            ));
        }
        if self.cfg.depth == 0 {
            return Err(PlanError::EmptyPlan);
        }
        self.estimate_v(state, 0, rng)?
            .action
            .ok_or(PlanError::EmptyPlan)
    }
}

pub fn vowss_plan<P: Problem>(
    root: &WeightedParticleBelief<P::State>,
    problem: &P,
    cfg: &SparseConfig,
    rng: &mut SimRng,
) -> Result<Action> {
    Vowss::new(problem, cfg).plan(root, rng)
}

pub fn voss_plan<P: Problem>(
    state: &P::State,
    problem: &P,
    cfg: &SparseConfig,
    rng: &mut SimRng,
) -> Result<Action> {
    Voss::new(problem, cfg).plan(state, rng)
}
