//! The generative model interface shared by every solver.

use std::fmt::Debug;

use crate::belief::WeightedParticleBelief;
use crate::rng::SimRng;
use crate::space::{Action, ActionSpace};

/// One draw `(s', o, r) ~ G(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S, O> {
    pub state: S,
    pub observation: O,
    pub reward: f64,
}

/// A POMDP (or MDP) available only through sampling, plus an evaluable
/// observation density `Z(o | a, s')`.
///
/// `generate` draws the next state first and the observation second, each
/// from the same stream, so a fixed stream position fixes the whole triple.
pub trait Problem {
    type State: Clone + Debug;
    type Observation: Clone + Debug;

    fn action_space(&self) -> &ActionSpace;

    fn discount(&self) -> f64;

    /// Episode length cap, `None` when unbounded.
    fn horizon(&self) -> Option<usize>;

    /// When true the observation is the next state and `obs_density` is unused.
    fn is_mdp(&self) -> bool {
        false
    }

    fn initial_state(&self, rng: &mut SimRng) -> Self::State;

    fn next_state(&self, state: &Self::State, action: &Action, rng: &mut SimRng) -> Self::State;

    fn observe(&self, action: &Action, next: &Self::State, rng: &mut SimRng) -> Self::Observation;

    fn reward(&self, state: &Self::State, action: &Action, next: &Self::State) -> f64;

    fn obs_density(&self, obs: &Self::Observation, action: &Action, next: &Self::State) -> f64;

    fn is_terminal(&self, _state: &Self::State) -> bool {
        false
    }

    /// How a terminal state ended the episode, for result tables.
    fn terminal_label(&self, _state: &Self::State) -> &'static str {
        "terminal"
    }

    fn generate(
        &self,
        state: &Self::State,
        action: &Action,
        rng: &mut SimRng,
    ) -> Transition<Self::State, Self::Observation> {
        let next = self.next_state(state, action, rng);
        let observation = self.observe(action, &next, rng);
        let reward = self.reward(state, action, &next);
        Transition {
            state: next,
            observation,
            reward,
        }
    }
}

/// What a heuristic policy gets to look at.
pub enum PolicyContext<'a, P: Problem + ?Sized> {
    Belief(&'a WeightedParticleBelief<P::State>),
    Observation(&'a P::Observation),
}

impl<P: Problem + ?Sized> Clone for PolicyContext<'_, P> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<P: Problem + ?Sized> Copy for PolicyContext<'_, P> {}

/// A fixed heuristic used for rollouts and first actions at new nodes.
pub trait Policy<P: Problem + ?Sized> {
    fn action(&self, problem: &P, context: PolicyContext<'_, P>, rng: &mut SimRng) -> Action;
}

/// Runs an MDP through the POMDP interface: the observation is the next
/// state and every observation density is 1.
#[derive(Debug, Clone)]
pub struct MdpAsPomdp<P>(pub P);

impl<P: Problem> Problem for MdpAsPomdp<P> {
    type State = P::State;
    type Observation = P::State;

    fn action_space(&self) -> &ActionSpace {
        self.0.action_space()
    }

    fn discount(&self) -> f64 {
        self.0.discount()
    }

    fn horizon(&self) -> Option<usize> {
        self.0.horizon()
    }

    fn initial_state(&self, rng: &mut SimRng) -> Self::State {
        self.0.initial_state(rng)
    }

    fn next_state(&self, state: &Self::State, action: &Action, rng: &mut SimRng) -> Self::State {
        self.0.next_state(state, action, rng)
    }

    fn observe(&self, _action: &Action, next: &Self::State, _rng: &mut SimRng) -> Self::State {
        next.clone()
    }

    fn reward(&self, state: &Self::State, action: &Action, next: &Self::State) -> f64 {
        self.0.reward(state, action, next)
    }

    fn obs_density(&self, _obs: &Self::State, _action: &Action, _next: &Self::State) -> f64 {
        1.0
    }

    fn is_terminal(&self, state: &Self::State) -> bool {
        self.0.is_terminal(state)
    }

    fn terminal_label(&self, state: &Self::State) -> &'static str {
        self.0.terminal_label(state)
    }
}

/// Discounted return of following `policy` from `state` at `depth` until
/// `max_depth` or a terminal state. The first action is chosen from
/// `context`; later ones from the observations the rollout generates.
pub fn rollout<P, Pol>(
    problem: &P,
    policy: &Pol,
    state: &P::State,
    context: PolicyContext<'_, P>,
    depth: usize,
    max_depth: usize,
    rng: &mut SimRng,
) -> f64
where
    P: Problem,
    Pol: Policy<P> + ?Sized,
{
    if depth >= max_depth || problem.is_terminal(state) {
        return 0.0;
    }
    let gamma = problem.discount();
    let action = policy.action(problem, context, rng);
    let mut step = problem.generate(state, &action, rng);
    let mut total = step.reward;
    let mut scale = gamma;
    for _ in depth + 1..max_depth {
        if problem.is_terminal(&step.state) {
            break;
        }
        let action = policy.action(problem, PolicyContext::Observation(&step.observation), rng);
        let next = problem.generate(&step.state, &action, rng);
        total += scale * next.reward;
        scale *= gamma;
        step = next;
    }
    total
}
