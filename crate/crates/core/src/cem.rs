//! Cross-entropy method over box-bounded hyperparameters.
//!
//! Each iteration samples a population from a diagonal Gaussian (in log
//! space for log-scaled parameters), scores it, and refits the Gaussian to
//! the elite members. Failed evaluations score `-inf` and never become elites.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::rng::{stream, substream, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub log_scale: bool,
}

impl ParamSpec {
    pub fn linear(name: &str, lower: f64, upper: f64) -> Self {
        ParamSpec {
            name: name.to_string(),
            lower,
            upper,
            log_scale: false,
        }
    }

    pub fn log(name: &str, lower: f64, upper: f64) -> Self {
        ParamSpec {
            name: name.to_string(),
            lower,
            upper,
            log_scale: true,
        }
    }

    fn to_internal(&self, x: f64) -> f64 {
        if self.log_scale {
            x.ln()
        } else {
            x
        }
    }

    fn to_external(&self, z: f64) -> f64 {
        if self.log_scale {
            z.exp().clamp(self.lower, self.upper)
        } else {
            z
        }
    }

    fn internal_bounds(&self) -> (f64, f64) {
        (self.to_internal(self.lower), self.to_internal(self.upper))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CemSpec {
    pub params: Vec<ParamSpec>,
    pub population: usize,
    pub elite_fraction: f64,
    pub iterations: usize,
    /// Starting mean in parameter units; defaults to the box center.
    pub initial_mean: Option<Vec<f64>>,
    /// Starting std in internal (log for log-scaled) units; defaults to half the width.
    pub initial_std: Option<Vec<f64>>,
    /// Lower bound on each std as a fraction of the internal width.
    pub std_floor: f64,
    /// Weight of the refit in `new = s·fit + (1 - s)·old`.
    pub smoothing: f64,
    /// Previous elites compete with each new population.
    pub keep_elites: bool,
}

impl Default for CemSpec {
    fn default() -> Self {
        CemSpec {
            params: Vec::new(),
            population: 50,
            elite_fraction: 0.2,
            iterations: 20,
            initial_mean: None,
            initial_std: None,
            std_floor: 0.01,
            smoothing: 0.7,
            keep_elites: true,
        }
    }
}

impl CemSpec {
    pub fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population as f64).round() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.params.is_empty() || self.population == 0 {
            return Err(PlanError::InvalidConfig(
                "CEM needs at least one parameter and a positive population".into(),
            ));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(PlanError::InvalidConfig("elite_fraction must lie in (0, 1]".into()));
        }
        for p in &self.params {
            if !(p.lower <= p.upper) || (p.log_scale && !(p.lower > 0.0)) {
                return Err(PlanError::InvalidConfig(format!("bad bounds for {}", p.name)));
            }
        }
        for v in [&self.initial_mean, &self.initial_std].into_iter().flatten() {
            if v.len() != self.params.len() {
                return Err(PlanError::InvalidConfig(
                    "initial mean/std length differs from the parameter count".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CemIteration {
    pub iteration: usize,
    /// Mean of the elite members, in parameter units.
    pub elite_mean: Vec<f64>,
    pub elite_objective: f64,
    pub best_objective: f64,
    /// Sampling distribution after the refit, in internal units.
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CemResult {
    pub best_params: Vec<f64>,
    /// `None` when no evaluation ran.
    pub best_objective: Option<f64>,
    pub history: Vec<CemIteration>,
}

#[derive(Clone)]
struct Scored {
    internal: Vec<f64>,
    external: Vec<f64>,
    value: f64,
}

/// Maximizes `objective`. Member `m` of iteration `i` is scored with its
/// own stream derived from `(seed, i, m)`; evaluations run in parallel.
pub fn cem_optimize<F>(spec: &CemSpec, objective: F, seed: u64) -> Result<CemResult>
where
    F: Fn(&[f64], &mut SimRng) -> f64 + Sync,
{
    spec.validate()?;
    let dims = spec.params.len();
    let mut mean: Vec<f64> = match &spec.initial_mean {
        Some(m) => spec.params.iter().zip(m).map(|(p, &x)| p.to_internal(x)).collect(),
        None => spec
            .params
            .iter()
            .map(|p| {
                let (lo, hi) = p.internal_bounds();
                (lo + hi) / 2.0
            })
            .collect(),
    };
    let floors: Vec<f64> = spec
        .params
        .iter()
        .map(|p| {
            let (lo, hi) = p.internal_bounds();
            spec.std_floor * (hi - lo)
        })
        .collect();
    let mut std: Vec<f64> = match &spec.initial_std {
        Some(s) => s.clone(),
        None => spec
            .params
            .iter()
            .map(|p| {
                let (lo, hi) = p.internal_bounds();
                (hi - lo) / 2.0
            })
            .collect(),
    };
    for (s, f) in std.iter_mut().zip(&floors) {
        *s = s.max(*f);
    }

    let mut best: Option<Scored> = None;
    let mut elites: Vec<Scored> = Vec::new();
    let mut history = Vec::with_capacity(spec.iterations);
    let mut sampler = stream(seed, crate::rng::role::TUNER);
    let elite_count = spec.elite_count();

    for iteration in 0..spec.iterations {
        let candidates: Vec<Vec<f64>> = (0..spec.population)
            .map(|_| {
                (0..dims)
                    .map(|d| {
                        let (lo, hi) = spec.params[d].internal_bounds();
                        let z: f64 = sampler.sample(StandardNormal);
                        (mean[d] + std[d] * z).clamp(lo, hi)
                    })
                    .collect()
            })
            .collect();
        let scored: Vec<Scored> = candidates
            .into_par_iter()
            .enumerate()
            .map(|(m, internal)| {
                let external: Vec<f64> = spec
                    .params
                    .iter()
                    .zip(&internal)
                    .map(|(p, &z)| p.to_external(z))
                    .collect();
                let key = (iteration as u64) << 32 | m as u64;
                let mut rng = substream(seed, crate::rng::role::TUNER, key);
                let v = objective(&external, &mut rng);
                Scored {
                    internal,
                    external,
                    value: if v.is_finite() { v } else { f64::NEG_INFINITY },
                }
            })
            .collect();

        for s in &scored {
            if s.value > f64::NEG_INFINITY && best.as_ref().map_or(true, |b| s.value > b.value) {
                best = Some(s.clone());
            }
        }

        let mut pool: Vec<Scored> = scored.into_iter().filter(|s| s.value > f64::NEG_INFINITY).collect();
        if spec.keep_elites {
            pool.extend(elites.drain(..));
        }
        if pool.is_empty() {
            // nothing usable this round: keep the distribution
            history.push(CemIteration {
                iteration,
                elite_mean: mean.iter().zip(&spec.params).map(|(&z, p)| p.to_external(z)).collect(),
                elite_objective: f64::NEG_INFINITY,
                best_objective: best.as_ref().map_or(f64::NEG_INFINITY, |b| b.value),
                mean: mean.clone(),
                std: std.clone(),
            });
            continue;
        }
        // stable sort: equal scores keep population order
        pool.sort_by(|a, b| b.value.total_cmp(&a.value));
        pool.truncate(elite_count);
        elites = pool;

        let n = elites.len() as f64;
        let mut fit_mean = vec![0.0; dims];
        let mut fit_std = vec![0.0; dims];
        for d in 0..dims {
            fit_mean[d] = elites.iter().map(|e| e.internal[d]).sum::<f64>() / n;
            let var = elites.iter().map(|e| (e.internal[d] - fit_mean[d]).powi(2)).sum::<f64>() / n;
            fit_std[d] = var.sqrt();
        }
        let s = spec.smoothing;
        for d in 0..dims {
            mean[d] = s * fit_mean[d] + (1.0 - s) * mean[d];
            std[d] = (s * fit_std[d] + (1.0 - s) * std[d]).max(floors[d]);
        }
        let elite_mean = (0..dims)
            .map(|d| elites.iter().map(|e| e.external[d]).sum::<f64>() / n)
            .collect();
        history.push(CemIteration {
            iteration,
            elite_mean,
            elite_objective: elites.iter().map(|e| e.value).sum::<f64>() / n,
            best_objective: best.as_ref().map_or(f64::NEG_INFINITY, |b| b.value),
            mean: mean.clone(),
            std: std.clone(),
        });
    }

    let (best_params, best_objective) = match best {
        Some(b) => (b.external, Some(b.value)),
        None => (
            mean.iter().zip(&spec.params).map(|(&z, p)| p.to_external(z)).collect(),
            None,
        ),
    };
    Ok(CemResult {
        best_params,
        best_objective,
        history,
    })
}

/// One CSV row per iteration: index, elite objective, best objective,
/// then the elite mean of each parameter.
pub fn write_history<W: std::io::Write>(spec: &CemSpec, result: &CemResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iteration".to_string(), "elite_objective".into(), "best_objective".into()];
    header.extend(spec.params.iter().map(|p| p.name.clone()));
    w.write_record(&header)?;
    for h in &result.history {
        let mut row = vec![
            h.iteration.to_string(),
            h.elite_objective.to_string(),
            h.best_objective.to_string(),
        ];
        row.extend(h.elite_mean.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> CemSpec {
        CemSpec {
            params: vec![ParamSpec::linear("x", 0.0, 1.0)],
            population: 50,
            iterations: 20,
            ..CemSpec::default()
        }
    }

    #[test]
    fn recovers_quadratic_optimum() {
        let r = cem_optimize(&quadratic(), |p, _| -(p[0] - 0.7).powi(2), 3).unwrap();
        assert!((r.best_params[0] - 0.7).abs() < 0.02, "{:?}", r.best_params);
        assert_eq!(r.history.len(), 20);
    }

    #[test]
    fn zero_iterations_returns_initial_mean() {
        let mut spec = quadratic();
        spec.iterations = 0;
        spec.initial_mean = Some(vec![0.25]);
        let r = cem_optimize(&spec, |p, _| -p[0], 1).unwrap();
        assert_eq!(r.best_params, vec![0.25]);
        assert!(r.best_objective.is_none());
    }

    #[test]
    fn full_elite_fraction_refits_to_population_mean() {
        let mut spec = quadratic();
        spec.elite_fraction = 1.0;
        spec.keep_elites = false;
        spec.smoothing = 1.0;
        spec.iterations = 1;
        spec.population = 10;
        let seen = std::sync::Mutex::new(Vec::new());
        let r = cem_optimize(
            &spec,
            |p, _| {
                seen.lock().unwrap().push(p[0]);
                -p[0]
            },
            5,
        )
        .unwrap();
        let xs = seen.into_inner().unwrap();
        let pop_mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((r.history[0].mean[0] - pop_mean).abs() < 1e-12);
    }

    #[test]
    fn elite_objective_never_decreases() {
        let spec = CemSpec {
            params: vec![ParamSpec::linear("x", -3.0, 3.0), ParamSpec::log("y", 0.01, 100.0)],
            ..CemSpec::default()
        };
        let r = cem_optimize(&spec, |p, _| -(p[0] - 1.0).powi(2) - (p[1].ln() - 1.0).powi(2), 9).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].elite_objective >= w[0].elite_objective);
        }
        for h in &r.history {
            assert!(h.std.iter().all(|&s| s >= 0.0));
            assert!(h.std[0] >= 0.01 * 6.0 - 1e-12);
        }
        assert!((r.best_params[1] - 1f64.exp()).abs() < 0.3);
    }

    #[test]
    fn failures_are_never_elite() {
        let r = cem_optimize(
            &quadratic(),
            |p, _| if p[0] > 0.5 { f64::NAN } else { -(p[0] - 0.7).powi(2) },
            2,
        )
        .unwrap();
        assert!(r.best_params[0] <= 0.5);
        assert!(r.best_objective.unwrap().is_finite());
    }

    #[test]
    fn bounds_are_respected() {
        let spec = CemSpec {
            params: vec![ParamSpec::linear("x", 0.0, 1.0)],
            iterations: 5,
            ..CemSpec::default()
        };
        let r = cem_optimize(
            &spec,
            |p, _| {
                assert!((0.0..=1.0).contains(&p[0]));
                p[0]
            },
            4,
        )
        .unwrap();
        assert!(r.best_params[0] <= 1.0);
    }

    #[test]
    fn history_csv_has_one_row_per_iteration() {
        let spec = quadratic();
        let r = cem_optimize(&spec, |p, _| -(p[0] - 0.7).powi(2), 3).unwrap();
        let mut buf = Vec::new();
        write_history(&spec, &r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 21);
        assert!(text.starts_with("iteration,elite_objective,best_objective,x"));
    }
}
