//! Bootstrap particle filter used between environment steps.

use crate::belief::WeightedParticleBelief;
use crate::error::{PlanError, Result};
use crate::problem::Problem;
use crate::rng::SimRng;
use crate::space::Action;

/// Propagates every particle through the transition model, weights it by
/// `Z(obs | action, s')`, normalizes, and resamples back to the same count
/// when the effective sample size drops below `threshold · N`.
pub fn bootstrap_update<P: Problem>(
    problem: &P,
    belief: &WeightedParticleBelief<P::State>,
    action: &Action,
    obs: &P::Observation,
    threshold: f64,
    rng: &mut SimRng,
) -> Result<WeightedParticleBelief<P::State>> {
    let n = belief.len();
    let mut particles = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (s, w) in belief.iter() {
        let next = problem.next_state(s, action, rng);
        weights.push(w * problem.obs_density(obs, action, &next));
        particles.push(next);
    }
    let mut next = WeightedParticleBelief::new(particles, weights)?;
    let total = next.total_weight();
    if !(total > 0.0) || !total.is_finite() {
        return Err(PlanError::DegenerateBelief);
    }
    next.scale_weights(1.0 / total);
    if next.effective_sample_size() < threshold * n as f64 {
        next = next.resample(n, rng)?;
    }
    Ok(next)
}
