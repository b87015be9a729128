//! Planar lunar lander with partial observations.
//!
//! State `(x, y, θ, ẋ, ẏ, ω)`; action `(T, F_x, δ)` where `T` is the main
//! thrust along the body axis, `F_x` a lateral corrective thrust and `δ`
//! the offset of the main thrust, which produces torque `δ·T`. Only the
//! angular rate, horizontal speed and altitude are observed, with noise.

use serde::{Deserialize, Serialize};

use super::{gaussian_density, normal};
use crate::problem::{Policy, PolicyContext, Problem};
use crate::rng::SimRng;
use crate::space::{Action, ActionSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LanderParams {
    pub dt: f64,
    pub gravity: f64,
    pub mass: f64,
    pub inertia: f64,
    pub max_thrust: f64,
    pub max_lateral: f64,
    pub max_offset: f64,
    /// Std of random accelerations `(ẍ, ÿ, ω̇)` per step.
    pub process_sigma: [f64; 3],
    /// Observation noise on `(ω, ẋ, altitude)`.
    pub observation_sigma: [f64; 3],
    pub crash_penalty: f64,
    pub landing_reward: f64,
    /// Touchdown counts as a landing inside `|x| <= zone_half_width`.
    pub zone_half_width: f64,
    pub max_touchdown_vy: f64,
    pub max_touchdown_vx: f64,
    pub max_touchdown_angle: f64,
    /// Per-step cost per unit of normalized thrust.
    pub fuel_cost: f64,
    pub x_limit: f64,
    pub y_limit: f64,
    pub initial_mean: [f64; 6],
    pub initial_sigma: [f64; 6],
    pub discount: f64,
    pub max_steps: usize,
}

impl Default for LanderParams {
    fn default() -> Self {
        LanderParams {
            dt: 0.4,
            gravity: 9.0,
            mass: 1.0,
            inertia: 10.0,
            max_thrust: 15.0,
            max_lateral: 5.0,
            max_offset: 1.0,
            process_sigma: [0.1, 0.1, 0.01],
            observation_sigma: [0.05, 0.2, 1.0],
            crash_penalty: -1000.0,
            landing_reward: 100.0,
            zone_half_width: 10.0,
            max_touchdown_vy: 4.0,
            max_touchdown_vx: 2.0,
            max_touchdown_angle: 0.3,
            fuel_cost: 0.1,
            x_limit: 100.0,
            y_limit: 200.0,
            initial_mean: [0.0, 50.0, 0.0, 0.0, -5.0, 0.0],
            initial_sigma: [5.0, 2.0, 0.05, 1.0, 1.0, 0.02],
            discount: 0.99,
            max_steps: 250,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanderStatus {
    Flying,
    Landed,
    Crashed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub status: LanderStatus,
}

/// Noisy `(ω, ẋ, altitude)`.
pub type LanderObservation = [f64; 3];

#[derive(Debug, Clone)]
pub struct LanderProblem {
    params: LanderParams,
    space: ActionSpace,
}

impl LanderProblem {
    pub fn new(params: LanderParams) -> Self {
        let space = ActionSpace::boxed(&[
            (0.0, params.max_thrust),
            (-params.max_lateral, params.max_lateral),
            (-params.max_offset, params.max_offset),
        ]);
        LanderProblem { params, space }
    }

    pub fn params(&self) -> &LanderParams {
        &self.params
    }

    fn touchdown_status(&self, s: &LanderState) -> LanderStatus {
        let p = &self.params;
        let soft = s.vy.abs() <= p.max_touchdown_vy
            && s.vx.abs() <= p.max_touchdown_vx
            && s.theta.abs() <= p.max_touchdown_angle;
        if soft && s.x.abs() <= p.zone_half_width {
            LanderStatus::Landed
        } else {
            LanderStatus::Crashed
        }
    }
}

impl Default for LanderProblem {
    fn default() -> Self {
        LanderProblem::new(LanderParams::default())
    }
}

impl Problem for LanderProblem {
    type State = LanderState;
    type Observation = LanderObservation;

    fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    fn discount(&self) -> f64 {
        self.params.discount
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.params.max_steps)
    }

    fn initial_state(&self, rng: &mut SimRng) -> LanderState {
        let m = self.params.initial_mean;
        let s = self.params.initial_sigma;
        let mut v = [0.0; 6];
        for i in 0..6 {
            v[i] = m[i] + normal(rng, s[i]);
        }
        LanderState {
            x: v[0],
            y: v[1].max(1.0),
            theta: v[2],
            vx: v[3],
            vy: v[4],
            omega: v[5],
            status: LanderStatus::Flying,
        }
    }

    fn next_state(&self, s: &LanderState, action: &Action, rng: &mut SimRng) -> LanderState {
        if s.status != LanderStatus::Flying {
            return *s;
        }
        let p = &self.params;
        let thrust = action.continuous[0].clamp(0.0, p.max_thrust);
        let lateral = action.continuous[1].clamp(-p.max_lateral, p.max_lateral);
        let offset = action.continuous[2].clamp(-p.max_offset, p.max_offset);
        let (sin, cos) = s.theta.sin_cos();
        let ax = (thrust * sin + lateral * cos) / p.mass + normal(rng, p.process_sigma[0]);
        let ay = (thrust * cos - lateral * sin) / p.mass - p.gravity + normal(rng, p.process_sigma[1]);
        let alpha = offset * thrust / p.inertia + normal(rng, p.process_sigma[2]);
        let dt = p.dt;
        let vx = s.vx + ax * dt;
        let vy = s.vy + ay * dt;
        let omega = s.omega + alpha * dt;
        let mut next = LanderState {
            x: s.x + vx * dt,
            y: s.y + vy * dt,
            theta: s.theta + omega * dt,
            vx,
            vy,
            omega,
            status: LanderStatus::Flying,
        };
        if next.y <= 0.0 {
            next.y = 0.0;
            next.status = self.touchdown_status(&next);
        } else if next.x.abs() > p.x_limit || next.y > p.y_limit {
            next.status = LanderStatus::Crashed;
        }
        next
    }

    fn observe(&self, _action: &Action, next: &LanderState, rng: &mut SimRng) -> LanderObservation {
        let s = self.params.observation_sigma;
        [
            next.omega + normal(rng, s[0]),
            next.vx + normal(rng, s[1]),
            next.y + normal(rng, s[2]),
        ]
    }

    fn reward(&self, s: &LanderState, action: &Action, next: &LanderState) -> f64 {
        if s.status != LanderStatus::Flying {
            return 0.0;
        }
        let p = &self.params;
        match next.status {
            LanderStatus::Crashed => p.crash_penalty,
            LanderStatus::Landed => p.landing_reward - next.x.abs(),
            LanderStatus::Flying => {
                let t = action.continuous[0].abs() / p.max_thrust;
                let f = action.continuous[1].abs() / p.max_lateral;
                -p.fuel_cost * (t + f)
            }
        }
    }

    fn obs_density(&self, obs: &LanderObservation, _action: &Action, next: &LanderState) -> f64 {
        let s = self.params.observation_sigma;
        gaussian_density(
            &[obs[0] - next.omega, obs[1] - next.vx, obs[2] - next.y],
            &s,
        )
    }

    fn is_terminal(&self, s: &LanderState) -> bool {
        s.status != LanderStatus::Flying
    }

    fn terminal_label(&self, s: &LanderState) -> &'static str {
        match s.status {
            LanderStatus::Landed => "landed",
            _ => "crashed",
        }
    }
}

/// Proportional control on the observed rate, horizontal speed and
/// altitude: damp `ω` with the offset, damp `ẋ` with the lateral thruster,
/// and raise the main thrust above hover as the ground approaches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderPolicy {
    pub rate_gain: f64,
    pub speed_gain: f64,
    /// Altitude below which thrust ramps up to `1.5×` hover.
    pub flare_altitude: f64,
}

impl Default for LanderPolicy {
    fn default() -> Self {
        LanderPolicy {
            rate_gain: 1.0,
            speed_gain: 1.0,
            flare_altitude: 20.0,
        }
    }
}

impl LanderPolicy {
    pub fn act(&self, params: &LanderParams, obs: &LanderObservation) -> Action {
        let (omega, vx, altitude) = (obs[0], obs[1], obs[2]);
        let hover = params.mass * params.gravity;
        let ramp = ((self.flare_altitude - altitude) / self.flare_altitude).clamp(0.0, 1.0);
        let thrust = (hover * (1.0 + 0.5 * ramp)).clamp(0.0, params.max_thrust);
        let lateral = (-self.speed_gain * vx).clamp(-params.max_lateral, params.max_lateral);
        let offset = (-self.rate_gain * omega).clamp(-params.max_offset, params.max_offset);
        Action::new(vec![thrust, lateral, offset])
    }
}

impl Policy<LanderProblem> for LanderPolicy {
    fn action(
        &self,
        problem: &LanderProblem,
        context: PolicyContext<'_, LanderProblem>,
        _rng: &mut SimRng,
    ) -> Action {
        let obs = match context {
            PolicyContext::Observation(o) => *o,
            PolicyContext::Belief(b) => {
                let total = b.total_weight();
                let mut m = [0.0; 3];
                for (s, w) in b.iter() {
                    m[0] += w * s.omega;
                    m[1] += w * s.vx;
                    m[2] += w * s.y;
                }
                [m[0] / total, m[1] / total, m[2] / total]
            }
        };
        self.act(&problem.params, &obs)
    }
}
