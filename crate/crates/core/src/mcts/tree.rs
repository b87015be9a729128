use rand::Rng;

use crate::belief::WeightedParticleBelief;
use crate::voo::VoronoiCenterSet;

/// Weighted particles with a running cumulative sum for O(log n) draws.
#[derive(Debug, Clone, Default)]
pub struct ParticleCollection<S> {
    particles: Vec<S>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<S> ParticleCollection<S> {
    pub fn new() -> Self {
        ParticleCollection {
            particles: Vec::new(),
            weights: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn from_belief(belief: &WeightedParticleBelief<S>) -> Self
    where
        S: Clone,
    {
        let mut c = Self::new();
        for (s, w) in belief.iter() {
            c.push(s.clone(), w);
        }
        c
    }

    pub fn push(&mut self, particle: S, weight: f64) {
        let total = self.total_weight();
        self.particles.push(particle);
        self.weights.push(weight);
        self.cumulative.push(total + weight);
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn particles(&self) -> &[S] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index drawn proportionally to weight; `None` when all weights are zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return None;
        }
        let target = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= target);
        if i < self.len() && self.weights[i] > 0.0 {
            Some(i)
        } else {
            self.weights.iter().rposition(|&w| w > 0.0)
        }
    }
}

/// A belief/history node: the particles that reached it and its action children.
#[derive(Debug, Clone)]
pub struct BeliefNode<S, O> {
    /// Observation that created the node; `None` at the root.
    pub observation: Option<O>,
    pub particles: ParticleCollection<S>,
    /// Child actions with their running-mean Q values.
    pub children: VoronoiCenterSet,
    pub child_visits: Vec<u64>,
    pub child_nodes: Vec<usize>,
    pub visits: u64,
}

impl<S, O> BeliefNode<S, O> {
    pub fn new(observation: Option<O>, particles: ParticleCollection<S>) -> Self {
        BeliefNode {
            observation,
            particles,
            children: VoronoiCenterSet::new(),
            child_visits: Vec::new(),
            child_nodes: Vec::new(),
            visits: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObservationBranch<O> {
    pub observation: O,
    pub node: usize,
    /// Times this branch was generated or revisited.
    pub count: u64,
}

#[derive(Debug, Clone)]
pub struct ActionNode<O> {
    pub branches: Vec<ObservationBranch<O>>,
}

impl<O> ActionNode<O> {
    pub fn new() -> Self {
        ActionNode {
            branches: Vec::new(),
        }
    }

    /// Branch index drawn proportionally to insertion counts.
    pub fn sample_branch<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: u64 = self.branches.iter().map(|b| b.count).sum();
        let mut target = rng.random_range(0..total);
        for (i, b) in self.branches.iter().enumerate() {
            if target < b.count {
                return i;
            }
            target -= b.count;
        }
        self.branches.len() - 1
    }
}

impl<O> Default for ActionNode<O> {
    fn default() -> Self {
        Self::new()
    }
}

/// One return propagated through `(node, child)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backup {
    pub node: usize,
    pub child: usize,
    pub value: f64,
}

/// The search tree after a planning call. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct SearchTree<S, O> {
    pub belief_nodes: Vec<BeliefNode<S, O>>,
    pub action_nodes: Vec<ActionNode<O>>,
    pub simulations: u64,
    /// Filled only when the config asks for it.
    pub backups: Vec<Backup>,
}

impl<S, O> SearchTree<S, O> {
    pub fn root(&self) -> &BeliefNode<S, O> {
        &self.belief_nodes[0]
    }

    /// Child index of the best visited root action, ties to the lowest index.
    pub fn best_root_child(&self) -> Option<usize> {
        let root = self.root();
        let mut best: Option<usize> = None;
        for i in 0..root.children.len() {
            if root.child_visits[i] == 0 {
                continue;
            }
            match best {
                Some(b) if !(root.children.value(i) > root.children.value(b)) => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn collection_samples_by_weight() {
        let mut c = ParticleCollection::new();
        c.push('a', 0.0);
        c.push('b', 1.0);
        c.push('c', 3.0);
        let mut rng = stream(0, 0);
        let mut counts = [0usize; 3];
        for _ in 0..8000 {
            counts[c.sample(&mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!((counts[2] as f64 / 8000.0 - 0.75).abs() < 0.02);
        let mut empty: ParticleCollection<char> = ParticleCollection::new();
        assert!(empty.sample(&mut rng).is_none());
        empty.push('z', 0.0);
        assert!(empty.sample(&mut rng).is_none());
    }

    #[test]
    fn branch_sampling_follows_counts() {
        let mut a = ActionNode::new();
        a.branches.push(ObservationBranch { observation: 0, node: 1, count: 1 });
        a.branches.push(ObservationBranch { observation: 1, node: 2, count: 3 });
        let mut rng = stream(1, 0);
        let hits = (0..4000).filter(|_| a.sample_branch(&mut rng) == 1).count();
        assert!((hits as f64 / 4000.0 - 0.75).abs() < 0.03);
    }
}
