//! Two-phase tuning: CEM over POMCPOW's widening and UCB parameters, then
//! CEM over VOMCPOW's started from the POMCPOW optimum. Σ is never tuned.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cem::{cem_optimize, CemResult, CemSpec, ParamSpec};
use crate::mcts::MctsConfig;

use super::presets::SolverConfig;
use super::run::run_episodes;
use super::spec::{merge_json, ExperimentSpec, SolverId};
use super::{HarnessError, HarnessResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneSpec {
    pub population: usize,
    pub elite_fraction: f64,
    pub iterations: usize,
    /// Episodes per objective evaluation; every member sees the same seeds.
    pub eval_episodes: usize,
    pub seed: u64,
    /// Bounds for `c`, `k_a`, `alpha_a`, `k_o`, `alpha_o` (names must match).
    pub params: Vec<ParamSpec>,
    pub omega: ParamSpec,
    /// Phase-two starting std as a fraction of each internal width.
    pub refine_std: f64,
}

impl Default for TuneSpec {
    fn default() -> Self {
        TuneSpec {
            population: 16,
            elite_fraction: 0.25,
            iterations: 8,
            eval_episodes: 10,
            seed: 0,
            params: vec![
                ParamSpec::log("c", 1.0, 200.0),
                ParamSpec::log("k_a", 1.0, 50.0),
                ParamSpec::linear("alpha_a", 0.01, 1.0),
                ParamSpec::log("k_o", 1.0, 50.0),
                ParamSpec::linear("alpha_o", 0.01, 1.0),
            ],
            omega: ParamSpec::linear("omega", 0.5, 1.0),
            refine_std: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub pomcpow: CemResult,
    pub vomcpow: CemResult,
    pub pomcpow_spec: CemSpec,
    pub vomcpow_spec: CemSpec,
    pub pomcpow_config: MctsConfig,
    pub vomcpow_config: MctsConfig,
}

/// `solver_params` patch for named parameter values.
fn patch(names: &[ParamSpec], values: &[f64]) -> HarnessResult<Value> {
    let mut vpw = Map::new();
    let mut voo = Map::new();
    let mut top = Map::new();
    for (p, &v) in names.iter().zip(values) {
        match p.name.as_str() {
            "c" | "k_a" | "alpha_a" => {
                vpw.insert(p.name.clone(), json!(v));
            }
            "omega" => {
                voo.insert("omega".into(), json!(v));
            }
            "k_o" | "alpha_o" => {
                top.insert(p.name.clone(), json!(v));
            }
            other => return Err(HarnessError::Spec(format!("cannot tune `{other}`"))),
        }
    }
    if !voo.is_empty() {
        vpw.insert("voo".into(), Value::Object(voo));
    }
    if !vpw.is_empty() {
        top.insert("vpw".into(), Value::Object(vpw));
    }
    Ok(Value::Object(top))
}

fn with_params(base: &ExperimentSpec, solver: SolverId, names: &[ParamSpec], values: &[f64]) -> HarnessResult<ExperimentSpec> {
    let mut spec = base.clone();
    spec.solver = solver;
    spec.preset = None;
    merge_json(&mut spec.solver_params, &patch(names, values)?);
    Ok(spec)
}

fn tree_config(spec: &ExperimentSpec) -> HarnessResult<MctsConfig> {
    let (_, cfg) = spec.validate()?;
    match cfg {
        SolverConfig::Mcts(c) => Ok(c),
        _ => Err(HarnessError::Spec("tuning needs a tree solver".into())),
    }
}

/// Mean discounted reward over the fixed evaluation batch; `-inf` when the
/// assignment is invalid or any episode fails.
fn objective(base: &ExperimentSpec, solver: SolverId, names: &[ParamSpec], values: &[f64]) -> f64 {
    let Ok(spec) = with_params(base, solver, names, values) else {
        return f64::NEG_INFINITY;
    };
    match run_episodes(&spec) {
        Ok(rows) if !rows.is_empty() && rows.iter().all(|r| !r.is_error()) => {
            rows.iter().map(|r| r.total_reward).sum::<f64>() / rows.len() as f64
        }
        _ => f64::NEG_INFINITY,
    }
}

pub fn tune_two_phase(base: &ExperimentSpec, tune: &TuneSpec) -> HarnessResult<TuneOutcome> {
    let mut eval = base.clone();
    eval.episodes = tune.eval_episodes;
    eval.seed = tune.seed;
    eval.out = None;
    eval.preset = None;
    // the batch must have a single budget
    let budget = eval.budgets()[0];
    eval.queries.clear();
    eval.seconds.clear();
    match budget {
        crate::mcts::Budget::Queries(q) => eval.queries.push(q),
        crate::mcts::Budget::Seconds(s) => eval.seconds.push(s),
    }
    let pomcpow_base = ExperimentSpec {
        solver: SolverId::Pomcpow,
        ..eval.clone()
    };
    let vomcpow_base = ExperimentSpec {
        solver: SolverId::Vomcpow,
        ..eval.clone()
    };
    let start = tree_config(&pomcpow_base)?;
    let start_omega = tree_config(&vomcpow_base)?.vpw.voo.omega;
    let current = |name: &str| match name {
        "c" => start.vpw.c,
        "k_a" => start.vpw.k_a,
        "alpha_a" => start.vpw.alpha_a,
        "k_o" => start.k_o,
        _ => start.alpha_o,
    };

    let phase1 = CemSpec {
        params: tune.params.clone(),
        population: tune.population,
        elite_fraction: tune.elite_fraction,
        iterations: tune.iterations,
        initial_mean: Some(
            tune.params
                .iter()
                .map(|p| current(&p.name).clamp(p.lower, p.upper))
                .collect(),
        ),
        ..CemSpec::default()
    };
    let pomcpow = cem_optimize(
        &phase1,
        |v, _| objective(&pomcpow_base, SolverId::Pomcpow, &phase1.params, v),
        tune.seed,
    )?;

    let mut params2 = tune.params.clone();
    params2.push(tune.omega.clone());
    let mut mean2 = pomcpow.best_params.clone();
    mean2.push(start_omega.clamp(tune.omega.lower, tune.omega.upper));
    let std2 = params2
        .iter()
        .map(|p| {
            let (lo, hi) = if p.log_scale { (p.lower.ln(), p.upper.ln()) } else { (p.lower, p.upper) };
            tune.refine_std * (hi - lo)
        })
        .collect();
    let phase2 = CemSpec {
        params: params2,
        initial_mean: Some(mean2),
        initial_std: Some(std2),
        ..phase1.clone()
    };
    let vomcpow = cem_optimize(
        &phase2,
        |v, _| objective(&vomcpow_base, SolverId::Vomcpow, &phase2.params, v),
        tune.seed.wrapping_add(1),
    )?;

    let pomcpow_config = tree_config(&with_params(&pomcpow_base, SolverId::Pomcpow, &phase1.params, &pomcpow.best_params)?)?;
    let vomcpow_config = tree_config(&with_params(&vomcpow_base, SolverId::Vomcpow, &phase2.params, &vomcpow.best_params)?)?;
    Ok(TuneOutcome {
        pomcpow,
        vomcpow,
        pomcpow_spec: phase1,
        vomcpow_spec: phase2,
        pomcpow_config,
        vomcpow_config,
    })
}
