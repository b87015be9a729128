#![allow(dead_code)]

use std::cell::Cell;

use vpw_core::{Action, ActionSpace, Policy, PolicyContext, Problem, SimRng, VooConfig, VpwConfig};

/// Wraps a problem and counts `next_state` calls (one per generate).
pub struct Counting<P> {
    pub inner: P,
    pub calls: Cell<usize>,
}

impl<P> Counting<P> {
    pub fn new(inner: P) -> Self {
        Counting {
            inner,
            calls: Cell::new(0),
        }
    }
}

impl<P: Problem> Problem for Counting<P> {
    type State = P::State;
    type Observation = P::Observation;

    fn action_space(&self) -> &ActionSpace {
        self.inner.action_space()
    }
    fn discount(&self) -> f64 {
        self.inner.discount()
    }
    fn horizon(&self) -> Option<usize> {
        self.inner.horizon()
    }
    fn is_mdp(&self) -> bool {
        self.inner.is_mdp()
    }
    fn initial_state(&self, rng: &mut SimRng) -> P::State {
        self.inner.initial_state(rng)
    }
    fn next_state(&self, s: &P::State, a: &Action, rng: &mut SimRng) -> P::State {
        self.calls.set(self.calls.get() + 1);
        self.inner.next_state(s, a, rng)
    }
    fn observe(&self, a: &Action, next: &P::State, rng: &mut SimRng) -> P::Observation {
        self.inner.observe(a, next, rng)
    }
    fn reward(&self, s: &P::State, a: &Action, next: &P::State) -> f64 {
        self.inner.reward(s, a, next)
    }
    fn obs_density(&self, o: &P::Observation, a: &Action, next: &P::State) -> f64 {
        self.inner.obs_density(o, a, next)
    }
    fn is_terminal(&self, s: &P::State) -> bool {
        self.inner.is_terminal(s)
    }
}

/// Stateless problem on `[-1, 1]²` with reward `-|a|²` and a fixed
/// per-step reward offset; the state counts steps.
pub struct Bowl {
    pub space: ActionSpace,
    pub gamma: f64,
    pub offset: f64,
}

impl Default for Bowl {
    fn default() -> Self {
        Bowl {
            space: ActionSpace::boxed(&[(-1.0, 1.0), (-1.0, 1.0)]),
            gamma: 1.0,
            offset: 0.0,
        }
    }
}

impl Problem for Bowl {
    type State = usize;
    type Observation = usize;

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }
    fn discount(&self) -> f64 {
        self.gamma
    }
    fn horizon(&self) -> Option<usize> {
        None
    }
    fn initial_state(&self, _rng: &mut SimRng) -> usize {
        0
    }
    fn next_state(&self, s: &usize, _a: &Action, _rng: &mut SimRng) -> usize {
        s + 1
    }
    fn observe(&self, _a: &Action, next: &usize, _rng: &mut SimRng) -> usize {
        *next
    }
    fn reward(&self, _s: &usize, a: &Action, _next: &usize) -> f64 {
        self.offset - a.continuous.iter().map(|x| x * x).sum::<f64>()
    }
    fn obs_density(&self, o: &usize, _a: &Action, next: &usize) -> f64 {
        if o == next {
            1.0
        } else {
            0.0
        }
    }
}

pub struct Origin;

impl<P: Problem> Policy<P> for Origin {
    fn action(&self, problem: &P, _context: PolicyContext<'_, P>, _rng: &mut SimRng) -> Action {
        Action::new(vec![0.0; problem.action_space().continuous_dims().len()])
    }
}

pub fn unbounded_vpw(omega: f64, sigma: Vec<f64>) -> VpwConfig {
    VpwConfig {
        k_a: 1.0,
        alpha_a: 0.5,
        c: 1.0,
        voo: VooConfig::new(omega, sigma),
        widen_unbounded: true,
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn stderr(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}
