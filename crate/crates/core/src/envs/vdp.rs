//! Van der Pol tag: chase a target drifting along a Van der Pol flow.
//!
//! Actions are a heading in `[0, 2π)` and a look bit. Looking buys an
//! accurate relative-position observation at a higher cost. Four radial
//! barriers on the coordinate axes block the agent but not the target.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{gaussian_density, normal};
use crate::problem::{Policy, PolicyContext, Problem};
use crate::rng::SimRng;
use crate::space::{Action, ActionSpace};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VdpParams {
    pub mu: f64,
    pub dt: f64,
    pub substeps: usize,
    /// Agent displacement per step.
    pub agent_speed: f64,
    pub tag_radius: f64,
    pub tag_reward: f64,
    pub step_cost: f64,
    pub look_cost: f64,
    pub observation_sigma: f64,
    pub look_sigma: f64,
    pub process_sigma: f64,
    /// The arena is `[-bound, bound]²`.
    pub bound: f64,
    /// Barriers run along each half-axis between these radii.
    pub barrier_inner: f64,
    pub barrier_outer: f64,
    pub discount: f64,
    pub max_steps: usize,
}

impl Default for VdpParams {
    fn default() -> Self {
        VdpParams {
            mu: 2.0,
            dt: 0.5,
            substeps: 10,
            agent_speed: 1.0,
            tag_radius: 0.1,
            tag_reward: 100.0,
            step_cost: 1.0,
            look_cost: 5.0,
            observation_sigma: 2.0,
            look_sigma: 0.1,
            process_sigma: 0.05,
            bound: 4.0,
            barrier_inner: 0.2,
            barrier_outer: 2.8,
            discount: 0.95,
            max_steps: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdpState {
    pub agent: [f64; 2],
    pub target: [f64; 2],
    pub tagged: bool,
}

#[derive(Debug, Clone)]
pub struct VdpTagProblem {
    params: VdpParams,
    space: ActionSpace,
}

impl VdpTagProblem {
    pub fn new(params: VdpParams) -> Self {
        VdpTagProblem {
            params,
            space: ActionSpace::boxed(&[(0.0, 2.0 * PI)])
                .with_periodic(0)
                .with_discrete(2),
        }
    }

    pub fn params(&self) -> &VdpParams {
        &self.params
    }

    /// Barrier segments as `(start, end)` pairs.
    pub fn barriers(&self) -> [([f64; 2], [f64; 2]); 4] {
        let (a, b) = (self.params.barrier_inner, self.params.barrier_outer);
        [
            ([a, 0.0], [b, 0.0]),
            ([-a, 0.0], [-b, 0.0]),
            ([0.0, a], [0.0, b]),
            ([0.0, -a], [0.0, -b]),
        ]
    }

    /// Moves the agent one step along `heading`, or leaves it in place if
    /// the move would cross a barrier or leave the arena.
    pub fn agent_step(&self, agent: [f64; 2], heading: f64) -> [f64; 2] {
        let d = self.params.agent_speed;
        let to = [agent[0] + d * heading.cos(), agent[1] + d * heading.sin()];
        let bound = self.params.bound;
        if to[0].abs() > bound || to[1].abs() > bound {
            return agent;
        }
        if self
            .barriers()
            .iter()
            .any(|&(p, q)| segments_intersect(agent, to, p, q))
        {
            return agent;
        }
        to
    }

    fn sigma_for(&self, action: &Action) -> f64 {
        if looking(action) {
            self.params.look_sigma
        } else {
            self.params.observation_sigma
        }
    }
}

impl Default for VdpTagProblem {
    fn default() -> Self {
        VdpTagProblem::new(VdpParams::default())
    }
}

fn looking(action: &Action) -> bool {
    action.discrete.first().copied().unwrap_or(0) == 1
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
    r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
}

/// Closed-segment intersection, touching included.
pub(crate) fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn vdp_flow(mu: f64, s: [f64; 2]) -> [f64; 2] {
    let (x, y) = (s[0], s[1]);
    [mu * (x - x * x * x / 3.0 - y), x / mu]
}

/// Fixed-step RK4 of the Liénard-form Van der Pol flow over `dt`, clamped
/// to the arena. No process noise.
pub fn vdp_target_step(target: [f64; 2], mu: f64, dt: f64, substeps: usize, bound: f64) -> [f64; 2] {
    let h = dt / substeps.max(1) as f64;
    let mut s = target;
    let add = |s: [f64; 2], k: [f64; 2], c: f64| [s[0] + c * k[0], s[1] + c * k[1]];
    for _ in 0..substeps.max(1) {
        let k1 = vdp_flow(mu, s);
        let k2 = vdp_flow(mu, add(s, k1, h / 2.0));
        let k3 = vdp_flow(mu, add(s, k2, h / 2.0));
        let k4 = vdp_flow(mu, add(s, k3, h));
        s = [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    [s[0].clamp(-bound, bound), s[1].clamp(-bound, bound)]
}

impl Problem for VdpTagProblem {
    type State = VdpState;
    /// Target position relative to the agent, plus noise.
    type Observation = [f64; 2];

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn discount(&self) -> f64 {
        self.params.discount
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.params.max_steps)
    }

    fn initial_state(&self, rng: &mut SimRng) -> VdpState {
        let b = self.params.bound;
        VdpState {
            agent: [0.0, 0.0],
            target: [rng.random_range(-b..b), rng.random_range(-b..b)],
            tagged: false,
        }
    }

    fn next_state(&self, state: &VdpState, action: &Action, rng: &mut SimRng) -> VdpState {
        if state.tagged {
            return *state;
        }
        let p = &self.params;
        let agent = self.agent_step(state.agent, action.continuous[0]);
        let drift = vdp_target_step(state.target, p.mu, p.dt, p.substeps, p.bound);
        let target = [
            (drift[0] + normal(rng, p.process_sigma)).clamp(-p.bound, p.bound),
            (drift[1] + normal(rng, p.process_sigma)).clamp(-p.bound, p.bound),
        ];
        let gap = ((agent[0] - target[0]).powi(2) + (agent[1] - target[1]).powi(2)).sqrt();
        VdpState {
            agent,
            target,
            tagged: gap <= p.tag_radius,
        }
    }

    fn observe(&self, action: &Action, next: &VdpState, rng: &mut SimRng) -> [f64; 2] {
        let s = self.sigma_for(action);
        [
            next.target[0] - next.agent[0] + normal(rng, s),
            next.target[1] - next.agent[1] + normal(rng, s),
        ]
    }

    fn reward(&self, state: &VdpState, action: &Action, next: &VdpState) -> f64 {
        if state.tagged {
            return 0.0;
        }
        let mut r = if looking(action) {
            -self.params.look_cost
        } else {
            -self.params.step_cost
        };
        if next.tagged {
            r += self.params.tag_reward;
        }
        r
    }

    fn obs_density(&self, obs: &[f64; 2], action: &Action, next: &VdpState) -> f64 {
        let s = self.sigma_for(action);
        let rel = [next.target[0] - next.agent[0], next.target[1] - next.agent[1]];
        gaussian_density(&[obs[0] - rel[0], obs[1] - rel[1]], &[s, s])
    }

    fn is_terminal(&self, state: &VdpState) -> bool {
        state.tagged
    }

    fn terminal_label(&self, _state: &VdpState) -> &'static str {
        "tagged"
    }
}

/// Head toward the estimated target position without looking.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VdpPolicy;

impl Policy<VdpTagProblem> for VdpPolicy {
    fn action(
        &self,
        _problem: &VdpTagProblem,
        context: PolicyContext<'_, VdpTagProblem>,
        _rng: &mut SimRng,
    ) -> Action {
        let rel = match context {
            PolicyContext::Observation(o) => *o,
            PolicyContext::Belief(b) => {
                let mut m = [0.0; 2];
                for (s, w) in b.iter() {
                    m[0] += w * (s.target[0] - s.agent[0]);
                    m[1] += w * (s.target[1] - s.agent[1]);
                }
                m
            }
        };
        let heading = rel[1].atan2(rel[0]).rem_euclid(2.0 * PI);
        let heading = if heading >= 2.0 * PI { 0.0 } else { heading };
        Action::hybrid(vec![heading], vec![0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn origin_is_a_fixed_point() {
        assert_eq!(vdp_target_step([0.0, 0.0], 2.0, 0.5, 10, 4.0), [0.0, 0.0]);
    }

    #[test]
    fn rk4_substeps_converge() {
        let coarse = vdp_target_step([1.0, 1.0], 2.0, 0.5, 10, 4.0);
        let fine = vdp_target_step([1.0, 1.0], 2.0, 0.5, 100, 4.0);
        assert!((coarse[0] - fine[0]).abs() < 1e-4 && (coarse[1] - fine[1]).abs() < 1e-4);
    }

    #[test]
    fn orbit_settles_on_limit_cycle() {
        let mut s = [0.1, 0.0];
        let mut radii = Vec::new();
        for i in 0..1000 {
            s = vdp_target_step(s, 2.0, 0.5, 10, 4.0);
            if i >= 500 {
                radii.push((s[0] * s[0] + s[1] * s[1]).sqrt());
            }
        }
        let max = radii.iter().cloned().fold(0.0, f64::max);
        let min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        // bounded and not collapsed onto the unstable origin
        assert!(max < 4.0, "max radius {max}");
        assert!(max > 1.5, "max radius {max}");
        assert!(min > 0.0);
    }

    #[test]
    fn look_is_sharper_and_costlier() {
        let p = VdpTagProblem::default();
        let s = VdpState { agent: [-2.0, -2.0], target: [2.0, 2.0], tagged: false };
        let look = Action::hybrid(vec![0.0], vec![1]);
        let plain = Action::hybrid(vec![0.0], vec![0]);
        assert!(p.sigma_for(&look) < p.sigma_for(&plain));
        let n = s;
        assert_eq!(p.reward(&s, &look, &n), -5.0);
        assert_eq!(p.reward(&s, &plain, &n), -1.0);
    }

    #[test]
    fn tag_pays_bonus_and_terminates() {
        let p = VdpTagProblem::default();
        let s = VdpState { agent: [-2.0, -2.0], target: [2.0, 2.0], tagged: false };
        let n = VdpState { tagged: true, ..s };
        assert_eq!(p.reward(&s, &Action::hybrid(vec![0.0], vec![0]), &n), 99.0);
        assert!(p.is_terminal(&n));
    }

    #[test]
    fn agent_moves_fixed_distance_or_stays() {
        let p = VdpTagProblem::default();
        let mut rng = stream(4, 0);
        for _ in 0..10_000 {
            let from = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let heading = rng.random_range(0.0..2.0 * PI);
            let to = p.agent_step(from, heading);
            let d = ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt();
            assert!(d == 0.0 || (d - 1.0).abs() < 1e-12);
            for &(a, b) in &p.barriers() {
                if d > 0.0 {
                    assert!(!segments_intersect(from, to, a, b));
                }
            }
        }
    }

    #[test]
    fn barrier_blocks_crossing_move() {
        let p = VdpTagProblem::default();
        // straight up across the +x barrier
        assert_eq!(p.agent_step([1.0, -0.5], PI / 2.0), [1.0, -0.5]);
        let free = p.agent_step([3.5, -0.5], PI);
        assert!((free[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn policy_heads_at_target() {
        let p = VdpTagProblem::default();
        let a = VdpPolicy.action(&p, PolicyContext::Observation(&[0.0, 1.0]), &mut stream(0, 0));
        assert!((a.continuous[0] - PI / 2.0).abs() < 1e-12);
        assert_eq!(a.discrete, vec![0]);
        let a = VdpPolicy.action(&p, PolicyContext::Observation(&[0.0, -1.0]), &mut stream(0, 0));
        assert!((a.continuous[0] - 1.5 * PI).abs() < 1e-12);
        assert!(p.action_space().contains(&a));
    }
}
