//! Action spaces: box-bounded continuous dimensions (optionally periodic)
//! times finite label sets, plus the distance used to build Voronoi cells.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A point in a hybrid action space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub continuous: Vec<f64>,
    pub discrete: Vec<usize>,
}

impl Action {
    pub fn new(continuous: Vec<f64>) -> Self {
        Action {
            continuous,
            discrete: Vec::new(),
        }
    }

    pub fn hybrid(continuous: Vec<f64>, discrete: Vec<usize>) -> Self {
        Action {
            continuous,
            discrete,
        }
    }

    /// Semicolon-joined components, continuous first.
    pub fn to_field(&self) -> String {
        let mut parts: Vec<String> = self.continuous.iter().map(|x| format!("{x}")).collect();
        parts.extend(self.discrete.iter().map(|l| l.to_string()));
        parts.join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousDim {
    pub lower: f64,
    pub upper: f64,
    /// Periodic dims wrap into `[lower, upper)`, e.g. headings.
    #[serde(default)]
    pub periodic: bool,
}

impl ContinuousDim {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Largest distance two points of this dim can be apart.
    fn extent(&self) -> f64 {
        if self.periodic {
            self.width() / 2.0
        } else {
            self.width()
        }
    }

    fn difference(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        if self.periodic && self.width() > 0.0 {
            let p = self.width();
            let d = d.rem_euclid(p);
            d.min(p - d)
        } else {
            d
        }
    }

    fn project(&self, x: f64) -> f64 {
        if self.periodic && self.width() > 0.0 {
            let y = self.lower + (x - self.lower).rem_euclid(self.width());
            // rem_euclid can round up to exactly the period
            if y >= self.upper {
                self.lower
            } else {
                y
            }
        } else {
            x.clamp(self.lower, self.upper)
        }
    }
}

/// Euclidean distance over continuous dims (wrapped on periodic dims) plus a
/// fixed penalty per mismatched discrete label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMetric {
    pub periodic_dims: Vec<usize>,
    pub discrete_penalty: f64,
}

/// The box of admissible actions together with its metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    continuous: Vec<ContinuousDim>,
    discrete: Vec<usize>,
    metric: DistanceMetric,
}

impl ActionSpace {
    /// Purely continuous box from `(lower, upper)` pairs.
    pub fn boxed(bounds: &[(f64, f64)]) -> Self {
        let continuous: Vec<ContinuousDim> = bounds
            .iter()
            .map(|&(lower, upper)| {
                assert!(lower <= upper, "inverted bounds [{lower}, {upper}]");
                ContinuousDim {
                    lower,
                    upper,
                    periodic: false,
                }
            })
            .collect();
        let mut space = ActionSpace {
            continuous,
            discrete: Vec::new(),
            metric: DistanceMetric {
                periodic_dims: Vec::new(),
                discrete_penalty: 0.0,
            },
        };
        space.metric.discrete_penalty = space.diameter();
        space
    }

    /// Marks continuous dim `dim` as periodic over its bounds.
    pub fn with_periodic(mut self, dim: usize) -> Self {
        self.continuous[dim].periodic = true;
        if !self.metric.periodic_dims.contains(&dim) {
            self.metric.periodic_dims.push(dim);
        }
        self.metric.discrete_penalty = self.diameter();
        self
    }

    /// Appends a discrete dimension with `labels` values `0..labels`.
    pub fn with_discrete(mut self, labels: usize) -> Self {
        assert!(labels > 0, "discrete dimension needs at least one label");
        self.discrete.push(labels);
        self
    }

    /// Overrides the mismatch penalty (defaults to the continuous diameter).
    pub fn with_discrete_penalty(mut self, penalty: f64) -> Self {
        self.metric.discrete_penalty = penalty;
        self
    }

    pub fn continuous_dims(&self) -> &[ContinuousDim] {
        &self.continuous
    }

    pub fn discrete_dims(&self) -> &[usize] {
        &self.discrete
    }

    pub fn metric(&self) -> &DistanceMetric {
        &self.metric
    }

    /// Largest continuous distance between two points of the box.
    pub fn diameter(&self) -> f64 {
        self.continuous
            .iter()
            .map(|d| d.extent().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, a: &Action, b: &Action) -> f64 {
        let cont: f64 = self
            .continuous
            .iter()
            .zip(a.continuous.iter().zip(&b.continuous))
            .map(|(dim, (x, y))| dim.difference(*x, *y).powi(2))
            .sum::<f64>()
            .sqrt();
        let mismatches = a
            .discrete
            .iter()
            .zip(&b.discrete)
            .filter(|(x, y)| x != y)
            .count();
        cont + self.metric.discrete_penalty * mismatches as f64
    }

    pub fn contains(&self, a: &Action) -> bool {
        a.continuous.len() == self.continuous.len()
            && a.discrete.len() == self.discrete.len()
            && self.continuous.iter().zip(&a.continuous).all(|(d, &x)| {
                if d.periodic && d.width() > 0.0 {
                    x >= d.lower && x < d.upper
                } else {
                    x >= d.lower && x <= d.upper
                }
            })
            && self.discrete.iter().zip(&a.discrete).all(|(&n, &l)| l < n)
    }

    /// Wrap periodic dims and clamp the rest into the box.
    pub fn project(&self, a: &mut Action) {
        for (dim, x) in self.continuous.iter().zip(a.continuous.iter_mut()) {
            *x = dim.project(*x);
        }
        for (&n, l) in self.discrete.iter().zip(a.discrete.iter_mut()) {
            *l = (*l).min(n - 1);
        }
    }
}

/// Independent uniform draw on every dimension.
pub fn uniform_action<R: Rng + ?Sized>(space: &ActionSpace, rng: &mut R) -> Action {
    let continuous = space
        .continuous
        .iter()
        .map(|d| {
            let u: f64 = rng.random();
            if d.width() == 0.0 {
                d.lower
            } else {
                // u < 1 keeps periodic draws inside [lower, upper)
                (d.lower + u * d.width()).min(d.upper)
            }
        })
        .collect();
    let discrete = space
        .discrete
        .iter()
        .map(|&n| rng.random_range(0..n))
        .collect();
    Action {
        continuous,
        discrete,
    }
}
