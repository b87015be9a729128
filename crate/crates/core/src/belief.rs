//! Weighted particle beliefs and the likelihood reweighting used by the
//! sparse-sampling solvers.

use rand::Rng;

use crate::error::{PlanError, Result};
use crate::problem::Problem;
use crate::rng::SimRng;
use crate::space::Action;

/// Ordered `(state, weight)` pairs. Weights are unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedParticleBelief<S> {
    particles: Vec<S>,
    weights: Vec<f64>,
}

impl<S> WeightedParticleBelief<S> {
    pub fn new(particles: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        if particles.len() != weights.len() {
            return Err(PlanError::LengthMismatch {
                left: particles.len(),
                right: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(PlanError::InvalidWeight(w));
        }
        Ok(WeightedParticleBelief { particles, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(particles: Vec<S>) -> Self {
        let w = 1.0 / particles.len() as f64;
        let weights = vec![w; particles.len()];
        WeightedParticleBelief { particles, weights }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[S] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> {
        self.particles.iter().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.total_weight() > 0.0)
    }

    /// `(Σw)² / Σw²`.
    pub fn effective_sample_size(&self) -> f64 {
        let total = self.total_weight();
        let sq: f64 = self.weights.iter().map(|w| w * w).sum();
        if sq > 0.0 {
            total * total / sq
        } else {
            0.0
        }
    }

    /// Index drawn with probability proportional to weight, `None` if all weights are zero.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return None;
        }
        let mut target = rng.random::<f64>() * total;
        for (i, &w) in self.weights.iter().enumerate() {
            if target < w {
                return Some(i);
            }
            target -= w;
        }
        // rounding: fall back to the last particle with positive weight
        self.weights.iter().rposition(|&w| w > 0.0)
    }

    pub fn push(&mut self, particle: S, weight: f64) {
        debug_assert!(weight.is_finite() && weight >= 0.0);
        self.particles.push(particle);
        self.weights.push(weight);
    }

    /// Multiply every weight by `factor`.
    pub fn scale_weights(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w *= factor;
        }
    }

    pub fn into_parts(self) -> (Vec<S>, Vec<f64>) {
        (self.particles, self.weights)
    }
}

impl<S: Clone> WeightedParticleBelief<S> {
    /// Systematic resampling to `count` equally weighted particles.
    pub fn resample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Self> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return Err(PlanError::DegenerateBelief);
        }
        let step = total / count as f64;
        let mut target = rng.random::<f64>() * step;
        let mut out = Vec::with_capacity(count);
        let mut cumulative = self.weights[0];
        let mut i = 0;
        for _ in 0..count {
            while target >= cumulative && i + 1 < self.len() {
                i += 1;
                cumulative += self.weights[i];
            }
            out.push(self.particles[i].clone());
            target += step;
        }
        Ok(Self::uniform(out))
    }
}

/// `count` i.i.d. draws from the initial distribution, each weighted `1/count`.
pub fn init_root_belief<P: Problem>(
    problem: &P,
    count: usize,
    rng: &mut SimRng,
) -> WeightedParticleBelief<P::State> {
    assert!(count >= 1, "a root belief needs at least one particle");
    let particles = (0..count).map(|_| problem.initial_state(rng)).collect();
    WeightedParticleBelief::uniform(particles)
}

/// Pairs each next state with its parent's weight times `Z(obs | action, s'_i)`.
/// Order is preserved and nothing is normalized.
pub fn reweight_next_belief<P: Problem>(
    belief: &WeightedParticleBelief<P::State>,
    next_states: Vec<P::State>,
    obs: &P::Observation,
    action: &Action,
    problem: &P,
) -> Result<WeightedParticleBelief<P::State>> {
    if next_states.len() != belief.len() {
        return Err(PlanError::LengthMismatch {
            left: belief.len(),
            right: next_states.len(),
        });
    }
    let weights: Vec<f64> = belief
        .weights()
        .iter()
        .zip(&next_states)
        .map(|(w, s)| w * problem.obs_density(obs, action, s))
        .collect();
    let child = WeightedParticleBelief::new(next_states, weights)?;
    if child.is_degenerate() {
        return Err(PlanError::DegenerateBelief);
    }
    Ok(child)
}

/// `Σ wᵢvᵢ / Σ wᵢ`.
pub fn weighted_mean_value(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(PlanError::LengthMismatch {
            left: values.len(),
            right: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(PlanError::DegenerateBelief);
    }
    let num: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    Ok(num / total)
}
