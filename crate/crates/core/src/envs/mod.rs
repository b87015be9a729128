//! Benchmark problems and the tiny problems used as exact oracles.

pub mod lander;
pub mod lqg;
pub mod oracle;
pub mod vdp;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::problem::{Policy, PolicyContext, Problem};
use crate::rng::SimRng;
use crate::space::Action;

pub use lander::{LanderObservation, LanderParams, LanderPolicy, LanderProblem, LanderState, LanderStatus};
pub use lqg::{
    lqg_cost_to_go, lqg_exact_gains, lqg_exact_policy, lqg_optimal_cost, lqg_riccati_gain,
    lqg_riccati_policy, LqgObservation, LqgParams, LqgPolicy, LqgProblem, LqgRollout, LqgState,
};
pub use oracle::{OneStepGaussianPomdp, QuadraticMdp, QuadraticMdpParams, TimedScalar};
pub use vdp::{vdp_target_step, VdpParams, VdpPolicy, VdpState, VdpTagProblem};

/// Product of independent normal densities of `residual[i]` with std `sigma[i]`.
pub(crate) fn gaussian_density(residual: &[f64], sigma: &[f64]) -> f64 {
    let mut log_density = 0.0;
    for (r, s) in residual.iter().zip(sigma) {
        let z = r / s;
        log_density += -0.5 * z * z - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    log_density.exp()
}

pub(crate) fn normal(rng: &mut SimRng, std: f64) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    std * z
}

/// Always returns the same action.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPolicy(pub Action);

impl<P: Problem + ?Sized> Policy<P> for ConstantPolicy {
    fn action(&self, _problem: &P, _context: PolicyContext<'_, P>, _rng: &mut SimRng) -> Action {
        self.0.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_peak() {
        let d = gaussian_density(&[0.0], &[1.0]);
        assert!((d - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        let d2 = gaussian_density(&[0.0, 0.0], &[0.1, 0.1]);
        assert!((d2 - 1.0 / (2.0 * std::f64::consts::PI * 0.01)).abs() < 1e-9);
    }
}
