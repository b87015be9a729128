use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::envs::{
    LanderParams, LanderProblem, LqgParams, LqgProblem, OneStepGaussianPomdp, QuadraticMdp,
    QuadraticMdpParams, VdpParams, VdpTagProblem,
};
use crate::mcts::{Budget, MctsConfig};
use crate::problem::Problem;
use crate::space::ActionSpace;
use crate::sparse::SparseConfig;
use crate::voo::VooConfig;
use crate::widening::VpwConfig;

use super::presets::{default_preset, preset, SolverConfig};
use super::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvId {
    Lqg,
    Vdp,
    Lander,
    OneStepGaussian,
    QuadraticMdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverId {
    Vowss,
    Voss,
    Pomcpow,
    Vomcpow,
    RolloutOnly,
}

impl EnvId {
    pub const ALL: [EnvId; 5] = [
        EnvId::Lqg,
        EnvId::Vdp,
        EnvId::Lander,
        EnvId::OneStepGaussian,
        EnvId::QuadraticMdp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvId::Lqg => "lqg",
            EnvId::Vdp => "vdp",
            EnvId::Lander => "lander",
            EnvId::OneStepGaussian => "one-step-gaussian",
            EnvId::QuadraticMdp => "quadratic-mdp",
        }
    }
}

impl SolverId {
    pub const ALL: [SolverId; 5] = [
        SolverId::Vowss,
        SolverId::Voss,
        SolverId::Pomcpow,
        SolverId::Vomcpow,
        SolverId::RolloutOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverId::Vowss => "vowss",
            SolverId::Voss => "voss",
            SolverId::Pomcpow => "pomcpow",
            SolverId::Vomcpow => "vomcpow",
            SolverId::RolloutOnly => "rollout-only",
        }
    }

    pub fn is_tree(self) -> bool {
        matches!(self, SolverId::Pomcpow | SolverId::Vomcpow)
    }

    pub fn is_sparse(self) -> bool {
        matches!(self, SolverId::Vowss | SolverId::Voss)
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvId {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        EnvId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Spec(format!("unknown environment `{s}`")))
    }
}

impl FromStr for SolverId {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        SolverId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Spec(format!("unknown solver `{s}`")))
    }
}

/// Everything needed to reproduce a batch of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub env: EnvId,
    /// Partial environment parameters merged over the defaults.
    pub env_params: Value,
    pub solver: SolverId,
    /// Named hyperparameter set; defaults to the published set for the pair.
    pub preset: Option<String>,
    /// Partial solver configuration merged over the preset.
    pub solver_params: Value,
    /// Per-step query budgets (tree solvers).
    pub queries: Vec<u64>,
    /// Per-step wall-clock budgets in seconds (tree solvers).
    pub seconds: Vec<f64>,
    pub episodes: usize,
    pub seed: u64,
    /// LQG rollout policy: `riccati` or `exact`.
    pub rollout: Option<String>,
    /// Particles in the between-step filter.
    pub particles: usize,
    /// Step cap; defaults to the environment horizon.
    pub max_steps: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Write `plan_seconds_mean`; off makes reruns byte-identical.
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            env: EnvId::Lqg,
            env_params: json!({}),
            solver: SolverId::Vomcpow,
            preset: None,
            solver_params: json!({}),
            queries: Vec::new(),
            seconds: Vec::new(),
            episodes: 100,
            seed: 0,
            rollout: None,
            particles: 10_000,
            max_steps: None,
            threads: None,
            out: None,
            record_timing: true,
        }
    }
}

/// Recursively overlays the object `patch` onto `base`.
pub fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, p) => *slot = p.clone(),
    }
}

fn overlay<T: Serialize + DeserializeOwned>(base: &T, patch: &Value, what: &str) -> HarnessResult<T> {
    if patch.is_null() {
        return Ok(serde_json::from_value(serde_json::to_value(base)?)?);
    }
    if !patch.is_object() {
        return Err(HarnessError::Spec(format!("{what} must be a JSON object")));
    }
    let mut v = serde_json::to_value(base)?;
    let keys: Vec<String> = v.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
    for k in patch.as_object().into_iter().flat_map(|o| o.keys()) {
        if !keys.contains(k) {
            return Err(HarnessError::Spec(format!("unknown {what} key `{k}`")));
        }
    }
    merge_json(&mut v, patch);
    serde_json::from_value(v).map_err(|e| HarnessError::Spec(format!("bad {what}: {e}")))
}

/// One of the built-in problems with its resolved parameters.
#[derive(Debug, Clone)]
pub enum AnyEnv {
    Lqg(LqgProblem),
    Vdp(VdpTagProblem),
    Lander(LanderProblem),
    OneStepGaussian(OneStepGaussianPomdp),
    QuadraticMdp(QuadraticMdp),
}

impl AnyEnv {
    pub fn action_space(&self) -> &ActionSpace {
        match self {
            AnyEnv::Lqg(p) => p.action_space(),
            AnyEnv::Vdp(p) => p.action_space(),
            AnyEnv::Lander(p) => p.action_space(),
            AnyEnv::OneStepGaussian(p) => p.action_space(),
            AnyEnv::QuadraticMdp(p) => p.action_space(),
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            AnyEnv::Lqg(p) => p.horizon(),
            AnyEnv::Vdp(p) => p.horizon(),
            AnyEnv::Lander(p) => p.horizon(),
            AnyEnv::OneStepGaussian(p) => p.horizon(),
            AnyEnv::QuadraticMdp(p) => p.horizon(),
        }
    }

    pub fn is_mdp(&self) -> bool {
        matches!(self, AnyEnv::QuadraticMdp(_))
    }

    /// Resolved parameters, for provenance.
    pub fn params_json(&self) -> Value {
        let v = match self {
            AnyEnv::Lqg(p) => serde_json::to_value(p.params()),
            AnyEnv::Vdp(p) => serde_json::to_value(p.params()),
            AnyEnv::Lander(p) => serde_json::to_value(p.params()),
            AnyEnv::OneStepGaussian(p) => Ok(json!({ "obs_sigma": p.obs_sigma })),
            AnyEnv::QuadraticMdp(p) => serde_json::to_value(&p.params),
        };
        v.unwrap_or(Value::Null)
    }
}

/// Proposal std per dimension when no preset gives Σ: a twentieth of the width.
fn default_sigma(space: &ActionSpace) -> Vec<f64> {
    space
        .continuous_dims()
        .iter()
        .map(|d| ((d.upper - d.lower) / 20.0).max(1e-3))
        .collect()
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Spec(format!("config: {e}")))
    }

    pub fn build_env(&self) -> HarnessResult<AnyEnv> {
        let p = &self.env_params;
        Ok(match self.env {
            EnvId::Lqg => {
                let params: LqgParams = overlay(&LqgParams::default(), p, "env_params")?;
                if params.horizon == 0 {
                    return Err(HarnessError::Spec("LQG horizon must be >= 1".into()));
                }
                AnyEnv::Lqg(LqgProblem::new(params))
            }
            EnvId::Vdp => AnyEnv::Vdp(VdpTagProblem::new(overlay(&VdpParams::default(), p, "env_params")?)),
            EnvId::Lander => {
                AnyEnv::Lander(LanderProblem::new(overlay(&LanderParams::default(), p, "env_params")?))
            }
            EnvId::OneStepGaussian => {
                #[derive(Serialize, Deserialize)]
                #[serde(deny_unknown_fields)]
                struct OneStep {
                    obs_sigma: f64,
                }
                let o: OneStep = overlay(&OneStep { obs_sigma: 0.5 }, p, "env_params")?;
                if !(o.obs_sigma > 0.0) {
                    return Err(HarnessError::Spec("obs_sigma must be > 0".into()));
                }
                AnyEnv::OneStepGaussian(OneStepGaussianPomdp::new(o.obs_sigma))
            }
            EnvId::QuadraticMdp => AnyEnv::QuadraticMdp(QuadraticMdp::new(overlay(
                &QuadraticMdpParams::default(),
                p,
                "env_params",
            )?)),
        })
    }

    /// Preset (named, or the default for the pair) with `solver_params` applied.
    pub fn solver_config(&self, env: &AnyEnv) -> HarnessResult<SolverConfig> {
        if self.solver == SolverId::RolloutOnly {
            return Ok(SolverConfig::Rollout);
        }
        let base = match &self.preset {
            Some(name) => {
                let p = preset(name).ok_or_else(|| HarnessError::Spec(format!("unknown preset `{name}`")))?;
                if p.env != self.env {
                    return Err(HarnessError::Spec(format!(
                        "preset `{name}` is for {}, not {}",
                        p.env, self.env
                    )));
                }
                if p.solver.is_tree() != self.solver.is_tree() {
                    return Err(HarnessError::Spec(format!(
                        "preset `{name}` does not configure {}",
                        self.solver
                    )));
                }
                p.config
            }
            None => match default_preset(self.env, self.solver) {
                Some(p) => p.config,
                None => self.generic_config(env),
            },
        };
        let space = env.action_space();
        let cfg = match base {
            SolverConfig::Mcts(c) => {
                let c: MctsConfig = overlay(&c, &self.solver_params, "solver_params")?;
                c.validate(space)?;
                SolverConfig::Mcts(c)
            }
            SolverConfig::Sparse(c) => {
                let c: SparseConfig = overlay(&c, &self.solver_params, "solver_params")?;
                c.validate(space)?;
                SolverConfig::Sparse(c)
            }
            SolverConfig::Rollout => SolverConfig::Rollout,
        };
        Ok(cfg)
    }

    fn generic_config(&self, env: &AnyEnv) -> SolverConfig {
        let space = env.action_space();
        let horizon = env.horizon().unwrap_or(10);
        if self.solver.is_tree() {
            SolverConfig::Mcts(MctsConfig {
                vpw: VpwConfig {
                    k_a: 5.0,
                    alpha_a: 0.25,
                    c: 10.0,
                    voo: VooConfig::new(0.8, default_sigma(space)),
                    widen_unbounded: false,
                },
                k_o: 5.0,
                alpha_o: 0.25,
                max_depth: horizon.clamp(1, 50),
                budget: Budget::Queries(1000),
                first_action_from_rollout: true,
                record_backups: false,
            })
        } else {
            SolverConfig::Sparse(SparseConfig {
                state_width: if self.solver == SolverId::Voss { 1 } else { 10 },
                action_width: 50,
                action_width_decay: 1.0,
                depth: horizon.clamp(1, 3),
                vpw: VpwConfig {
                    k_a: 1.0,
                    alpha_a: 0.5,
                    c: 1.0,
                    voo: VooConfig::new(0.5, default_sigma(space)),
                    widen_unbounded: true,
                },
            })
        }
    }

    /// Budget grid for tree solvers: query counts then seconds, or 1000
    /// queries when neither is given.
    pub fn budgets(&self) -> Vec<Budget> {
        let mut b: Vec<Budget> = self.queries.iter().map(|&q| Budget::Queries(q)).collect();
        b.extend(self.seconds.iter().map(|&s| Budget::Seconds(s)));
        if b.is_empty() {
            b.push(Budget::Queries(1000));
        }
        b
    }

    /// Checks everything that can be checked without running an episode.
    pub fn validate(&self) -> HarnessResult<(AnyEnv, SolverConfig)> {
        if self.particles == 0 {
            return Err(HarnessError::Spec("particles must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Spec("threads must be >= 1".into()));
        }
        if self.max_steps == Some(0) {
            return Err(HarnessError::Spec("max_steps must be >= 1".into()));
        }
        if self.queries.contains(&0) {
            return Err(HarnessError::Spec("query budgets must be >= 1".into()));
        }
        if self.seconds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(HarnessError::Spec("time budgets must be positive".into()));
        }
        match (self.env, self.rollout.as_deref()) {
            (_, None) | (EnvId::Lqg, Some("riccati" | "exact")) => {}
            (_, Some("default")) => {}
            (env, Some(r)) => {
                return Err(HarnessError::Spec(format!("unknown rollout policy `{r}` for {env}")))
            }
        }
        let env = self.build_env()?;
        if self.solver == SolverId::Voss && !env.is_mdp() {
            return Err(HarnessError::Spec(format!(
                "voss needs a fully observable environment; {} is partially observable",
                self.env
            )));
        }
        let cfg = self.solver_config(&env).map_err(|e| match e {
            HarnessError::Plan(p) => HarnessError::Spec(p.to_string()),
            other => other,
        })?;
        Ok((env, cfg))
    }

    /// The spec with every default made explicit, for the output directory.
    pub fn resolved_json(&self) -> HarnessResult<Value> {
        let (env, cfg) = self.validate()?;
        let solver_config = match &cfg {
            SolverConfig::Mcts(c) => serde_json::to_value(c)?,
            SolverConfig::Sparse(c) => serde_json::to_value(c)?,
            SolverConfig::Rollout => Value::Null,
        };
        let budgets: Vec<Value> = if self.solver.is_tree() {
            self.budgets().iter().map(|b| serde_json::to_value(b).unwrap_or(Value::Null)).collect()
        } else {
            Vec::new()
        };
        Ok(json!({
            "spec": self,
            "env_params_resolved": env.params_json(),
            "solver_config_resolved": solver_config,
            "budgets": budgets,
        }))
    }
}
