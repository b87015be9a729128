//! Problems small enough to solve exactly by quadrature or grid search.

use serde::{Deserialize, Serialize};

use super::{gaussian_density, normal};
use crate::problem::Problem;
use crate::rng::SimRng;
use crate::space::{Action, ActionSpace};

/// One decision on a hidden `s ~ N(0, 1)`: reward `-(s - a)²`, observation
/// `o = s + N(0, obs_sigma²)`, actions in `[-2, 2]`, depth 1.
#[derive(Debug, Clone)]
pub struct OneStepGaussianPomdp {
    pub obs_sigma: f64,
    space: ActionSpace,
}

impl OneStepGaussianPomdp {
    pub fn new(obs_sigma: f64) -> Self {
        OneStepGaussianPomdp {
            obs_sigma,
            space: ActionSpace::boxed(&[(-2.0, 2.0)]),
        }
    }
}

impl Default for OneStepGaussianPomdp {
    fn default() -> Self {
        OneStepGaussianPomdp::new(0.5)
    }
}

impl Problem for OneStepGaussianPomdp {
    type State = f64;
    type Observation = f64;

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn discount(&self) -> f64 {
        1.0
    }

    fn horizon(&self) -> Option<usize> {
        Some(1)
    }

    fn initial_state(&self, rng: &mut SimRng) -> f64 {
        normal(rng, 1.0)
    }

    fn next_state(&self, state: &f64, _action: &Action, _rng: &mut SimRng) -> f64 {
        *state
    }

    fn observe(&self, _action: &Action, next: &f64, rng: &mut SimRng) -> f64 {
        next + normal(rng, self.obs_sigma)
    }

    fn reward(&self, state: &f64, action: &Action, _next: &f64) -> f64 {
        -(state - action.continuous[0]).powi(2)
    }

    fn obs_density(&self, obs: &f64, _action: &Action, next: &f64) -> f64 {
        gaussian_density(&[obs - next], &[self.obs_sigma])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadraticMdpParams {
    pub target: f64,
    pub horizon: usize,
    pub action_bound: f64,
    /// Std of additive noise on the next state.
    pub noise_sigma: f64,
    /// Weight of an extra `-state_cost · s'²` reward term.
    pub state_cost: f64,
}

impl Default for QuadraticMdpParams {
    fn default() -> Self {
        QuadraticMdpParams {
            target: 0.3,
            horizon: 2,
            action_bound: 1.0,
            noise_sigma: 0.0,
            state_cost: 0.0,
        }
    }
}

/// Fully observable `s' = s + a (+ noise)` with reward `-(a - 0.3)²`,
/// starting from `s = 0`.
#[derive(Debug, Clone)]
pub struct QuadraticMdp {
    pub params: QuadraticMdpParams,
    space: ActionSpace,
}

impl QuadraticMdp {
    pub fn new(params: QuadraticMdpParams) -> Self {
        let b = params.action_bound;
        QuadraticMdp {
            space: ActionSpace::boxed(&[(-b, b)]),
            params,
        }
    }
}

impl Default for QuadraticMdp {
    fn default() -> Self {
        QuadraticMdp::new(QuadraticMdpParams::default())
    }
}

/// State with its time index so the horizon is visible to solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedScalar {
    pub s: f64,
    pub t: usize,
}

impl Problem for QuadraticMdp {
    type State = TimedScalar;
    type Observation = TimedScalar;

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn discount(&self) -> f64 {
        1.0
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.params.horizon)
    }

    fn is_mdp(&self) -> bool {
        true
    }

    fn initial_state(&self, _rng: &mut SimRng) -> TimedScalar {
        TimedScalar { s: 0.0, t: 0 }
    }

    fn next_state(&self, state: &TimedScalar, action: &Action, rng: &mut SimRng) -> TimedScalar {
        TimedScalar {
            s: state.s + action.continuous[0] + normal(rng, self.params.noise_sigma),
            t: state.t + 1,
        }
    }

    fn observe(&self, _action: &Action, next: &TimedScalar, _rng: &mut SimRng) -> TimedScalar {
        *next
    }

    fn reward(&self, _state: &TimedScalar, action: &Action, next: &TimedScalar) -> f64 {
        -(action.continuous[0] - self.params.target).powi(2) - self.params.state_cost * next.s * next.s
    }

    fn obs_density(&self, _obs: &TimedScalar, _action: &Action, _next: &TimedScalar) -> f64 {
        1.0
    }

    fn is_terminal(&self, state: &TimedScalar) -> bool {
        state.t >= self.params.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn one_step_density_integrates_to_one() {
        let p = OneStepGaussianPomdp::default();
        let h = 1e-3;
        let total: f64 = (-6000..6000)
            .map(|i| p.obs_density(&(0.3 + i as f64 * h), &Action::new(vec![0.0]), &0.3) * h)
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_mdp_optimum_is_zero() {
        let p = QuadraticMdp::default();
        let mut rng = stream(0, 0);
        let a = Action::new(vec![0.3]);
        let s0 = p.initial_state(&mut rng);
        let t = p.generate(&s0, &a, &mut rng);
        assert_eq!(t.reward, 0.0);
        assert_eq!(t.observation, t.state);
        assert!((t.state.s - 0.3).abs() < 1e-15);
        assert!(p.is_mdp());
    }
}
