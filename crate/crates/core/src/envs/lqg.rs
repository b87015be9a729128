//! Two-dimensional linear-quadratic-Gaussian control.
//!
//! `x' = x + u + v`, `y = x' + w`, with isotropic Gaussian `x_0`, `v`, `w`.
//! The reward is the negated stage cost `x'x + u'u`, and the step that
//! reaches the horizon also pays the terminal cost `x_N'x_N`.

use serde::{Deserialize, Serialize};

use super::{gaussian_density, normal};
use crate::problem::{Policy, PolicyContext, Problem};
use crate::rng::SimRng;
use crate::space::{Action, ActionSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LqgParams {
    pub initial_mean: [f64; 2],
    pub initial_sigma: f64,
    pub process_sigma: f64,
    pub observation_sigma: f64,
    pub horizon: usize,
    /// Actions live in `[-action_bound, action_bound]²`.
    pub action_bound: f64,
}

impl Default for LqgParams {
    fn default() -> Self {
        LqgParams {
            initial_mean: [-10.0, 10.0],
            initial_sigma: 0.1,
            process_sigma: 0.1,
            observation_sigma: 0.1,
            horizon: 2,
            action_bound: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqgState {
    pub x: [f64; 2],
    /// Time index; the state is terminal at `t == horizon`.
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqgObservation {
    pub y: [f64; 2],
    /// Time index of the observed state.
    pub t: usize,
}

#[derive(Debug, Clone)]
pub struct LqgProblem {
    params: LqgParams,
    space: ActionSpace,
}

impl LqgProblem {
    pub fn new(params: LqgParams) -> Self {
        let b = params.action_bound;
        LqgProblem {
            space: ActionSpace::boxed(&[(-b, b), (-b, b)]),
            params,
        }
    }

    pub fn params(&self) -> &LqgParams {
        &self.params
    }

    /// The exact first action for the mean initial state.
    pub fn optimal_first_action(&self) -> Action {
        lqg_exact_policy(self.params.horizon, self.params.initial_mean)
    }
}

impl Default for LqgProblem {
    fn default() -> Self {
        LqgProblem::new(LqgParams::default())
    }
}

impl Problem for LqgProblem {
    type State = LqgState;
    type Observation = LqgObservation;

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn discount(&self) -> f64 {
        1.0
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.params.horizon)
    }

    fn initial_state(&self, rng: &mut SimRng) -> LqgState {
        let m = self.params.initial_mean;
        let s = self.params.initial_sigma;
        LqgState {
            x: [m[0] + normal(rng, s), m[1] + normal(rng, s)],
            t: 0,
        }
    }

    fn next_state(&self, state: &LqgState, action: &Action, rng: &mut SimRng) -> LqgState {
        let u = &action.continuous;
        let s = self.params.process_sigma;
        LqgState {
            x: [
                state.x[0] + u[0] + normal(rng, s),
                state.x[1] + u[1] + normal(rng, s),
            ],
            t: state.t + 1,
        }
    }

    fn observe(&self, _action: &Action, next: &LqgState, rng: &mut SimRng) -> LqgObservation {
        let s = self.params.observation_sigma;
        LqgObservation {
            y: [next.x[0] + normal(rng, s), next.x[1] + normal(rng, s)],
            t: next.t,
        }
    }

    fn reward(&self, state: &LqgState, action: &Action, next: &LqgState) -> f64 {
        let u = &action.continuous;
        let mut cost = dot(&state.x, &state.x) + u[0] * u[0] + u[1] * u[1];
        if next.t >= self.params.horizon {
            cost += dot(&next.x, &next.x);
        }
        -cost
    }

    fn obs_density(&self, obs: &LqgObservation, _action: &Action, next: &LqgState) -> f64 {
        let s = self.params.observation_sigma;
        gaussian_density(&[obs.y[0] - next.x[0], obs.y[1] - next.x[1]], &[s, s])
    }

    fn is_terminal(&self, state: &LqgState) -> bool {
        state.t >= self.params.horizon
    }
}

fn dot(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Scalar cost-to-go weights `P_0..=P_N` of the backward Riccati recursion
/// with `A = B = Q = R = I` and `P_N = I`.
pub fn lqg_cost_to_go(horizon: usize) -> Vec<f64> {
    let mut p = vec![0.0; horizon + 1];
    p[horizon] = 1.0;
    for t in (0..horizon).rev() {
        let next = p[t + 1];
        p[t] = 1.0 + next - next * next / (1.0 + next);
    }
    p
}

/// Feedback gains `K_0..K_{N-1}`, `K_t = P_{t+1} / (1 + P_{t+1})`.
pub fn lqg_exact_gains(horizon: usize) -> Vec<f64> {
    let p = lqg_cost_to_go(horizon);
    (0..horizon).map(|t| p[t + 1] / (1.0 + p[t + 1])).collect()
}

/// `-K x̂` with the gain for `horizon_remaining` steps to go.
pub fn lqg_exact_policy(horizon_remaining: usize, estimate: [f64; 2]) -> Action {
    if horizon_remaining == 0 {
        return Action::new(vec![0.0, 0.0]);
    }
    let k = lqg_exact_gains(horizon_remaining)[0];
    Action::new(vec![-k * estimate[0], -k * estimate[1]])
}

/// Stationary gain `P/(1+P)` where `P` solves `P² - P - 1 = 0`.
pub fn lqg_riccati_gain() -> f64 {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    p / (1.0 + p)
}

pub fn lqg_riccati_policy(estimate: [f64; 2]) -> Action {
    let k = lqg_riccati_gain();
    Action::new(vec![-k * estimate[0], -k * estimate[1]])
}

/// Expected cost of the optimal full-state controller: the quadratic term
/// in the initial mean plus trace terms for the initial and process noise.
pub fn lqg_optimal_cost(initial_mean: [f64; 2], sigma: f64, horizon: usize) -> f64 {
    let p = lqg_cost_to_go(horizon);
    let var = sigma * sigma;
    let mut cost = p[0] * dot(&initial_mean, &initial_mean) + 2.0 * var * p[0];
    for t in 0..horizon {
        cost += 2.0 * var * p[t + 1];
    }
    cost
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LqgRollout {
    /// Time-varying finite-horizon gains.
    Exact,
    /// Stationary algebraic Riccati gain.
    Riccati,
}

/// Linear feedback on the current state estimate: the observation, or the
/// weighted mean of a belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqgPolicy {
    pub kind: LqgRollout,
}

impl LqgPolicy {
    pub fn exact() -> Self {
        LqgPolicy {
            kind: LqgRollout::Exact,
        }
    }

    pub fn riccati() -> Self {
        LqgPolicy {
            kind: LqgRollout::Riccati,
        }
    }

    pub fn act(&self, horizon: usize, t: usize, estimate: [f64; 2]) -> Action {
        match self.kind {
            LqgRollout::Exact => lqg_exact_policy(horizon.saturating_sub(t), estimate),
            LqgRollout::Riccati => lqg_riccati_policy(estimate),
        }
    }
}

impl Policy<LqgProblem> for LqgPolicy {
    fn action(
        &self,
        problem: &LqgProblem,
        context: PolicyContext<'_, LqgProblem>,
        _rng: &mut SimRng,
    ) -> Action {
        let (estimate, t) = match context {
            PolicyContext::Observation(o) => (o.y, o.t),
            PolicyContext::Belief(b) => {
                let total = b.total_weight();
                let mut m = [0.0; 2];
                for (s, w) in b.iter() {
                    m[0] += w * s.x[0];
                    m[1] += w * s.x[1];
                }
                let t = b.particles().first().map_or(0, |s| s.t);
                ([m[0] / total, m[1] / total], t)
            }
        };
        self.act(problem.params.horizon, t, estimate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{init_root_belief, reweight_next_belief, WeightedParticleBelief};
    use crate::rng::stream;

    #[test]
    fn exact_first_action() {
        let a = lqg_exact_policy(2, [-10.0, 10.0]);
        assert!((a.continuous[0] - 6.0).abs() < 1e-12);
        assert!((a.continuous[1] + 6.0).abs() < 1e-12);
        assert_eq!(lqg_exact_policy(2, [0.0, 0.0]).continuous, vec![0.0, 0.0]);
    }

    #[test]
    fn last_step_gain_is_half() {
        let gains = lqg_exact_gains(2);
        assert!((gains[1] - 0.5).abs() < 1e-15);
        assert!((gains[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn riccati_gain_and_action() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((phi * phi - phi - 1.0).abs() < 1e-12);
        assert!((lqg_riccati_gain() - phi / (1.0 + phi)).abs() < 1e-15);
        assert!((lqg_riccati_gain() - 0.6180).abs() < 1e-4);
        let a = lqg_riccati_policy([-10.0, 10.0]);
        assert!((a.continuous[0] - 6.18).abs() < 1e-2);
        assert!((a.continuous[1] + 6.18).abs() < 1e-2);
        assert_eq!(lqg_riccati_policy([0.0, 0.0]).continuous, vec![0.0, 0.0]);
    }

    #[test]
    fn exact_gain_is_linear_at_t0() {
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.5), (100.0, -7.0)] {
            let a = lqg_exact_policy(2, [x, y]);
            assert!((a.continuous[0] + 0.6 * x).abs() < 1e-12);
            assert!((a.continuous[1] + 0.6 * y).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_optimal_cost() {
        // brute force: roll the noise-free system under the exact gains
        let gains = lqg_exact_gains(2);
        let mut x = [-10.0f64, 10.0];
        let mut cost = 0.0;
        for k in gains {
            let u = [-k * x[0], -k * x[1]];
            cost += dot(&x, &x) + dot(&u, &u);
            x = [x[0] + u[0], x[1] + u[1]];
        }
        cost += dot(&x, &x);
        assert!((cost - 320.0).abs() < 1e-9);
        assert!((lqg_optimal_cost([-10.0, 10.0], 0.0, 2) - cost).abs() < 1e-9);
        assert!((lqg_cost_to_go(2)[0] - 1.6).abs() < 1e-15);
        assert_eq!(lqg_optimal_cost([0.0, 0.0], 0.0, 2), 0.0);
    }

    #[test]
    fn full_state_cost_matches_monte_carlo() {
        let p = LqgProblem::default();
        let n = 4000;
        let mut rng = stream(21, 0);
        let mut costs = Vec::with_capacity(n);
        for _ in 0..n {
            let mut s = p.initial_state(&mut rng);
            let mut total = 0.0;
            while !p.is_terminal(&s) {
                let a = lqg_exact_policy(2 - s.t, s.x);
                let next = p.next_state(&s, &a, &mut rng);
                total -= p.reward(&s, &a, &next);
                s = next;
            }
            costs.push(total);
        }
        let mean = costs.iter().sum::<f64>() / n as f64;
        let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let expected = lqg_optimal_cost([-10.0, 10.0], 0.1, 2);
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} ± {se}");
    }

    #[test]
    fn root_particles_near_initial_mean() {
        let p = LqgProblem::default();
        for seed in 0..1000 {
            let b = init_root_belief(&p, 10, &mut stream(seed, 0));
            assert_eq!(b.len(), 10);
            for (s, w) in b.iter() {
                assert_eq!(w, 0.1);
                assert!((s.x[0] + 10.0).abs() < 0.6 && (s.x[1] - 10.0).abs() < 0.6);
            }
        }
    }

    #[test]
    fn reweighting_ratio_is_exp_100() {
        let p = LqgProblem::default();
        let near = LqgState { x: [0.0, 0.0], t: 1 };
        let far = LqgState { x: [1.0, 1.0], t: 1 };
        let obs = LqgObservation { y: [0.0, 0.0], t: 1 };
        let zn = p.obs_density(&obs, &Action::default(), &near);
        let zf = p.obs_density(&obs, &Action::default(), &far);
        assert!(((zn / zf).ln() - 100.0).abs() < 1e-9);
        let b = WeightedParticleBelief::uniform(vec![near, far]);
        let c = reweight_next_belief(&b, vec![near, far], &obs, &Action::default(), &p).unwrap();
        assert!(c.weights()[1] / c.weights()[0] < 1e-40);
    }

    #[test]
    fn terminal_cost_is_paid_on_the_last_step() {
        let p = LqgProblem::default();
        let s = LqgState { x: [1.0, 0.0], t: 1 };
        let a = Action::new(vec![0.0, 1.0]);
        let n = LqgState { x: [1.0, 1.0], t: 2 };
        assert_eq!(p.reward(&s, &a, &n), -(1.0 + 1.0 + 2.0));
        let s0 = LqgState { x: [1.0, 0.0], t: 0 };
        let n0 = LqgState { x: [1.0, 1.0], t: 1 };
        assert_eq!(p.reward(&s0, &a, &n0), -2.0);
    }
}
