//! Anytime tree search with observation widening and weighted particle
//! collections. The action layer uses Voronoi progressive widening; with
//! `omega = 1` it is ordinary action progressive widening, so POMCPOW and
//! VOMCPOW run through the same code.

mod tree;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use tree::{ActionNode, Backup, BeliefNode, ObservationBranch, ParticleCollection, SearchTree};

use crate::belief::WeightedParticleBelief;
use crate::error::{PlanError, Result};
use crate::problem::{rollout, Policy, PolicyContext, Problem};
use crate::rng::SimRng;
use crate::space::Action;
use crate::widening::{vpw_select, VpwChoice, VpwConfig};

/// When a planning call stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    /// Number of simulations (tree queries).
    Queries(u64),
    /// Wall-clock seconds, checked between simulations.
    Seconds(f64),
}

impl Budget {
    pub fn kind(&self) -> &'static str {
        match self {
            Budget::Queries(_) => "queries",
            Budget::Seconds(_) => "seconds",
        }
    }

    pub fn amount(&self) -> String {
        match self {
            Budget::Queries(n) => n.to_string(),
            Budget::Seconds(s) => format!("{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig {
    pub vpw: VpwConfig,
    pub k_o: f64,
    pub alpha_o: f64,
    pub max_depth: usize,
    pub budget: Budget,
    /// The first child of every new belief node is the rollout policy's action.
    #[serde(default = "default_true")]
    pub first_action_from_rollout: bool,
    /// Keep every backed-up return in [`SearchTree::backups`].
    #[serde(default, skip_serializing)]
    pub record_backups: bool,
}

fn default_true() -> bool {
    true
}

impl MctsConfig {
    pub fn validate(&self, space: &crate::space::ActionSpace) -> Result<()> {
        if !(self.k_o > 0.0) || !(0.0..=1.0).contains(&self.alpha_o) {
            return Err(PlanError::InvalidConfig(
                "observation widening needs k_o > 0 and alpha_o in [0, 1]".into(),
            ));
        }
        if self.max_depth == 0 {
            return Err(PlanError::InvalidConfig("max_depth must be >= 1".into()));
        }
        self.vpw.validate(space)
    }

    /// The same search with uniform action proposals.
    pub fn as_pomcpow(&self) -> MctsConfig {
        let mut cfg = self.clone();
        cfg.vpw = cfg.vpw.as_pw();
        cfg
    }
}

/// A planner bound to a problem, a rollout policy and a configuration.
pub struct Mcts<'a, P, Pol: ?Sized> {
    problem: &'a P,
    policy: &'a Pol,
    cfg: &'a MctsConfig,
}

impl<'a, P, Pol> Mcts<'a, P, Pol>
where
    P: Problem,
    Pol: Policy<P> + ?Sized,
{
    pub fn new(problem: &'a P, policy: &'a Pol, cfg: &'a MctsConfig) -> Self {
        Mcts {
            problem,
            policy,
            cfg,
        }
    }

    /// Runs simulations from `root` until the budget is spent.
    pub fn search(
        &self,
        root: &WeightedParticleBelief<P::State>,
        rng: &mut SimRng,
    ) -> Result<SearchTree<P::State, P::Observation>> {
        if root.is_degenerate() {
            return Err(PlanError::DegenerateBelief);
        }
        let mut search = Search {
            problem: self.problem,
            policy: self.policy,
            cfg: self.cfg,
            root_belief: root,
            tree: SearchTree {
                belief_nodes: vec![BeliefNode::new(None, ParticleCollection::from_belief(root))],
                action_nodes: Vec::new(),
                simulations: 0,
                backups: Vec::new(),
            },
        };
        let start = Instant::now();
        loop {
            let more = match self.cfg.budget {
                Budget::Queries(n) => search.tree.simulations < n,
                Budget::Seconds(s) => start.elapsed() < Duration::from_secs_f64(s.max(0.0)),
            };
            if !more {
                break;
            }
            let i = search.tree.root().particles.sample(rng).ok_or(PlanError::DegenerateBelief)?;
            let state = search.tree.root().particles.particles()[i].clone();
            search.simulate(0, state, 0, rng);
            search.tree.simulations += 1;
        }
        Ok(search.tree)
    }

    /// The best visited root action.
    pub fn plan(&self, root: &WeightedParticleBelief<P::State>, rng: &mut SimRng) -> Result<Action> {
        let tree = self.search(root, rng)?;
        let best = tree.best_root_child().ok_or(PlanError::EmptyTree)?;
        Ok(tree.root().children.center(best).clone())
    }
}

struct Search<'a, P: Problem, Pol: ?Sized> {
    problem: &'a P,
    policy: &'a Pol,
    cfg: &'a MctsConfig,
    root_belief: &'a WeightedParticleBelief<P::State>,
    tree: SearchTree<P::State, P::Observation>,
}

impl<P, Pol> Search<'_, P, Pol>
where
    P: Problem,
    Pol: Policy<P> + ?Sized,
{
    fn add_child(&mut self, node: usize, action: Action) -> usize {
        self.tree.action_nodes.push(ActionNode::new());
        let id = self.tree.action_nodes.len() - 1;
        let bn = &mut self.tree.belief_nodes[node];
        bn.child_visits.push(0);
        bn.child_nodes.push(id);
        bn.children.push(action, 0.0)
    }

    fn select_action(&mut self, node: usize, rng: &mut SimRng) -> usize {
        let bn = &self.tree.belief_nodes[node];
        if bn.children.is_empty() && self.cfg.first_action_from_rollout {
            let context = match &bn.observation {
                Some(o) => PolicyContext::Observation(o),
                None => PolicyContext::Belief(self.root_belief),
            };
            let action = self.policy.action(self.problem, context, rng);
            return self.add_child(node, action);
        }
        let choice = vpw_select(
            &bn.children,
            &bn.child_visits,
            bn.visits,
            self.problem.action_space(),
            &self.cfg.vpw,
            rng,
        );
        match choice {
            VpwChoice::New(action) => self.add_child(node, action),
            VpwChoice::Existing(i) => i,
        }
    }

    /// One descent from `node` holding `state` at `depth`; returns the
    /// discounted return and backs it up along the way.
    fn simulate(&mut self, node: usize, state: P::State, depth: usize, rng: &mut SimRng) -> f64 {
        if depth >= self.cfg.max_depth || self.problem.is_terminal(&state) {
            return 0.0;
        }
        let problem = self.problem;
        let gamma = problem.discount();
        let child = self.select_action(node, rng);
        let action = self.tree.belief_nodes[node].children.center(child).clone();
        let action_id = self.tree.belief_nodes[node].child_nodes[child];
        let step = problem.generate(&state, &action, rng);

        let n_ha = self.tree.belief_nodes[node].child_visits[child];
        let an = &self.tree.action_nodes[action_id];
        let widen = an.branches.len() as f64 <= self.cfg.k_o * (n_ha as f64).powf(self.cfg.alpha_o);
        let (branch, is_new) = if widen {
            let mut particles = ParticleCollection::new();
            let w = problem.obs_density(&step.observation, &action, &step.state);
            particles.push(step.state.clone(), w);
            self.tree
                .belief_nodes
                .push(BeliefNode::new(Some(step.observation.clone()), particles));
            let child_node = self.tree.belief_nodes.len() - 1;
            self.tree.action_nodes[action_id].branches.push(ObservationBranch {
                observation: step.observation.clone(),
                node: child_node,
                count: 1,
            });
            (self.tree.action_nodes[action_id].branches.len() - 1, true)
        } else {
            let b = self.tree.action_nodes[action_id].sample_branch(rng);
            let br = &mut self.tree.action_nodes[action_id].branches[b];
            br.count += 1;
            let w = problem.obs_density(&br.observation, &action, &step.state);
            let child_node = br.node;
            self.tree.belief_nodes[child_node]
                .particles
                .push(step.state.clone(), w);
            (b, false)
        };
        let child_node = self.tree.action_nodes[action_id].branches[branch].node;

        let total = if is_new {
            let obs = self.tree.action_nodes[action_id].branches[branch].observation.clone();
            let future = rollout(
                problem,
                self.policy,
                &step.state,
                PolicyContext::Observation(&obs),
                depth + 1,
                self.cfg.max_depth,
                rng,
            );
            step.reward + gamma * future
        } else {
            let particles = &self.tree.belief_nodes[child_node].particles;
            let (next, reward) = match particles.sample(rng) {
                Some(i) => {
                    let s = particles.particles()[i].clone();
                    let r = problem.reward(&state, &action, &s);
                    (s, r)
                }
                // every weight underflowed: continue with the generated state
                None => (step.state, step.reward),
            };
            reward + gamma * self.simulate(child_node, next, depth + 1, rng)
        };

        let bn = &mut self.tree.belief_nodes[node];
        bn.visits += 1;
        bn.child_visits[child] += 1;
        let n = bn.child_visits[child] as f64;
        let q = bn.children.value(child);
        bn.children.set_value(child, q + (total - q) / n);
        if self.cfg.record_backups {
            self.tree.backups.push(Backup {
                node,
                child,
                value: total,
            });
        }
        total
    }
}

/// Plan with the configuration as given (VPW action layer).
pub fn mcts_plan<P, Pol>(
    root: &WeightedParticleBelief<P::State>,
    problem: &P,
    policy: &Pol,
    cfg: &MctsConfig,
    rng: &mut SimRng,
) -> Result<Action>
where
    P: Problem,
    Pol: Policy<P> + ?Sized,
{
    Mcts::new(problem, policy, cfg).plan(root, rng)
}

pub fn vomcpow_plan<P, Pol>(
    root: &WeightedParticleBelief<P::State>,
    problem: &P,
    policy: &Pol,
    cfg: &MctsConfig,
    rng: &mut SimRng,
) -> Result<Action>
where
    P: Problem,
    Pol: Policy<P> + ?Sized,
{
    mcts_plan(root, problem, policy, cfg, rng)
}

/// Plan with uniform action widening, ignoring `cfg.vpw.voo.omega`.
pub fn pomcpow_plan<P, Pol>(
    root: &WeightedParticleBelief<P::State>,
    problem: &P,
    policy: &Pol,
    cfg: &MctsConfig,
    rng: &mut SimRng,
) -> Result<Action>
where
    P: Problem,
    Pol: Policy<P> + ?Sized,
{
    mcts_plan(root, problem, policy, &cfg.as_pomcpow(), rng)
}
