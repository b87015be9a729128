use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::belief::{init_root_belief, WeightedParticleBelief};
use crate::envs::{ConstantPolicy, LanderPolicy, LqgPolicy, LqgRollout, VdpPolicy};
use crate::error::{PlanError, Result};
use crate::mcts::{mcts_plan, pomcpow_plan, Budget, MctsConfig};
use crate::problem::{Policy, PolicyContext, Problem};
use crate::rng::{role, stream, SimRng};
use crate::space::Action;
use crate::sparse::{voss_plan, vowss_plan};

use super::filter::bootstrap_update;
use super::presets::SolverConfig;
use super::spec::{AnyEnv, EnvId, ExperimentSpec, SolverId};
use super::summary::{summarize_results, write_summary};
use super::{HarnessError, HarnessResult};

pub const CSV_HEADER: [&str; 12] = [
    "episode",
    "seed",
    "env",
    "solver",
    "budget_kind",
    "budget",
    "total_reward",
    "plan_seconds_mean",
    "first_action",
    "distance_to_opt",
    "steps",
    "termination",
];

/// Resample the filter belief when its effective size falls below this fraction.
const RESAMPLE_THRESHOLD: f64 = 0.5;

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub episode: usize,
    pub seed: u64,
    pub env: String,
    pub solver: String,
    pub budget_kind: String,
    pub budget: String,
    /// Discounted return.
    pub total_reward: f64,
    pub plan_seconds_mean: Option<f64>,
    pub first_action: Option<Action>,
    /// Euclidean distance of the first action to the analytic optimum (LQG).
    pub distance_to_opt: Option<f64>,
    pub steps: usize,
    /// `terminal`, an environment label (`tagged`, `landed`, `crashed`),
    /// `max-steps`, or `error:<reason>`.
    pub termination: String,
}

impl EpisodeResult {
    fn record(&self) -> [String; 12] {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.episode.to_string(),
            self.seed.to_string(),
            self.env.clone(),
            self.solver.clone(),
            self.budget_kind.clone(),
            self.budget.clone(),
            self.total_reward.to_string(),
            opt(self.plan_seconds_mean),
            self.first_action.as_ref().map(|a| a.to_field()).unwrap_or_default(),
            opt(self.distance_to_opt),
            self.steps.to_string(),
            self.termination.clone(),
        ]
    }

    pub fn is_error(&self) -> bool {
        self.termination.starts_with("error")
    }
}

pub fn write_results<W: Write>(rows: &[EpisodeResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

fn error_label(e: &PlanError) -> &'static str {
    match e {
        PlanError::DegenerateBelief => "error:degenerate-belief",
        PlanError::LengthMismatch { .. } => "error:length-mismatch",
        PlanError::InvalidWeight(_) => "error:invalid-weight",
        PlanError::EmptyPlan => "error:empty-plan",
        PlanError::EmptyTree => "error:empty-tree",
        PlanError::InvalidConfig(_) => "error:invalid-config",
    }
}

/// What a batch needs besides the problem and the policy.
struct Batch<'a> {
    spec: &'a ExperimentSpec,
    solver: SolverId,
    cfg: &'a SolverConfig,
    /// Tree config with the batch budget filled in.
    tree: Option<MctsConfig>,
    budget_kind: String,
    budget: String,
    optimum: Option<Action>,
}

impl Batch<'_> {
    fn plan<P, Pol>(
        &self,
        problem: &P,
        policy: &Pol,
        belief: &WeightedParticleBelief<P::State>,
        state: &P::State,
        rng: &mut SimRng,
    ) -> Result<Action>
    where
        P: Problem,
        Pol: Policy<P>,
    {
        match (self.solver, self.cfg) {
            (SolverId::Vowss, SolverConfig::Sparse(c)) => {
                let root = belief.resample(c.state_width, rng)?;
                vowss_plan(&root, problem, c, rng)
            }
            (SolverId::Voss, SolverConfig::Sparse(c)) => voss_plan(state, problem, c, rng),
            (SolverId::Pomcpow, SolverConfig::Mcts(_)) => {
                pomcpow_plan(belief, problem, policy, self.tree.as_ref().expect("tree config"), rng)
            }
            (SolverId::Vomcpow, SolverConfig::Mcts(_)) => {
                mcts_plan(belief, problem, policy, self.tree.as_ref().expect("tree config"), rng)
            }
            (SolverId::RolloutOnly, _) => Ok(policy.action(problem, PolicyContext::Belief(belief), rng)),
            _ => Err(PlanError::InvalidConfig("solver and configuration disagree".into())),
        }
    }

    fn episode<P, Pol>(&self, problem: &P, policy: &Pol, episode: usize) -> EpisodeResult
    where
        P: Problem,
        Pol: Policy<P>,
    {
        let spec = self.spec;
        let seed = spec.seed.wrapping_add(episode as u64);
        let mut env_rng = stream(seed, role::ENVIRONMENT);
        let mut plan_rng = stream(seed, role::PLANNER);
        let mut filter_rng = stream(seed, role::FILTER);

        let mut state = problem.initial_state(&mut env_rng);
        let mdp = problem.is_mdp();
        let mut belief = if mdp {
            WeightedParticleBelief::uniform(vec![state.clone()])
        } else {
            init_root_belief(problem, spec.particles, &mut filter_rng)
        };
        let max_steps = spec.max_steps.or(problem.horizon()).unwrap_or(100);
        let gamma = problem.discount();

        let mut total = 0.0;
        let mut scale = 1.0;
        let mut steps = 0;
        let mut plan_seconds = Vec::new();
        let mut first_action = None;
        let mut termination = None;
        while steps < max_steps {
            if problem.is_terminal(&state) {
                break;
            }
            let start = Instant::now();
            let action = match self.plan(problem, policy, &belief, &state, &mut plan_rng) {
                Ok(a) => a,
                Err(e) => {
                    termination = Some(error_label(&e).to_string());
                    break;
                }
            };
            plan_seconds.push(start.elapsed().as_secs_f64());
            if first_action.is_none() {
                first_action = Some(action.clone());
            }
            let step = problem.generate(&state, &action, &mut env_rng);
            total += scale * step.reward;
            scale *= gamma;
            steps += 1;
            state = step.state;
            if steps == max_steps || problem.is_terminal(&state) {
                break;
            }
            belief = if mdp {
                WeightedParticleBelief::uniform(vec![state.clone()])
            } else {
                match bootstrap_update(
                    problem,
                    &belief,
                    &action,
                    &step.observation,
                    RESAMPLE_THRESHOLD,
                    &mut filter_rng,
                ) {
                    Ok(b) => b,
                    Err(e) => {
                        termination = Some(error_label(&e).to_string());
                        break;
                    }
                }
            };
        }
        let termination = termination.unwrap_or_else(|| {
            if problem.is_terminal(&state) {
                problem.terminal_label(&state).to_string()
            } else {
                "max-steps".to_string()
            }
        });
        let distance_to_opt = match (&self.optimum, &first_action) {
            (Some(opt), Some(a)) => Some(
                opt.continuous
                    .iter()
                    .zip(&a.continuous)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt(),
            ),
            _ => None,
        };
        let plan_seconds_mean = (spec.record_timing && !plan_seconds.is_empty())
            .then(|| plan_seconds.iter().sum::<f64>() / plan_seconds.len() as f64);
        EpisodeResult {
            episode,
            seed,
            env: spec.env.name().to_string(),
            solver: self.solver.name().to_string(),
            budget_kind: self.budget_kind.clone(),
            budget: self.budget.clone(),
            total_reward: total,
            plan_seconds_mean,
            first_action,
            distance_to_opt,
            steps,
            termination,
        }
    }

    fn run<P, Pol>(&self, problem: &P, policy: &Pol) -> Vec<EpisodeResult>
    where
        P: Problem + Sync,
        Pol: Policy<P> + Sync,
    {
        (0..self.spec.episodes)
            .into_par_iter()
            .map(|e| self.episode(problem, policy, e))
            .collect()
    }
}

fn dispatch(batch: &Batch<'_>, env: &AnyEnv) -> Vec<EpisodeResult> {
    match env {
        AnyEnv::Lqg(p) => {
            let kind = match batch.spec.rollout.as_deref() {
                Some("exact") => LqgRollout::Exact,
                _ => LqgRollout::Riccati,
            };
            batch.run(p, &LqgPolicy { kind })
        }
        AnyEnv::Vdp(p) => batch.run(p, &VdpPolicy),
        AnyEnv::Lander(p) => batch.run(p, &LanderPolicy::default()),
        AnyEnv::OneStepGaussian(p) => batch.run(p, &ConstantPolicy(Action::new(vec![0.0]))),
        AnyEnv::QuadraticMdp(p) => batch.run(p, &ConstantPolicy(Action::new(vec![0.0]))),
    }
}

/// Runs every (budget, episode) pair; rows come back in grid order.
pub fn run_episodes(spec: &ExperimentSpec) -> HarnessResult<Vec<EpisodeResult>> {
    let (env, cfg) = spec.validate()?;
    let optimum = match &env {
        AnyEnv::Lqg(p) if spec.env == EnvId::Lqg => Some(p.optimal_first_action()),
        _ => None,
    };
    let batches: Vec<(Option<MctsConfig>, String, String)> = match &cfg {
        SolverConfig::Mcts(c) => spec
            .budgets()
            .into_iter()
            .map(|b: Budget| {
                let mut c = c.clone();
                c.budget = b;
                (Some(c), b.kind().to_string(), b.amount())
            })
            .collect(),
        SolverConfig::Sparse(c) => vec![(
            None,
            "widths".to_string(),
            format!("{}x{}", c.state_width, c.action_width),
        )],
        SolverConfig::Rollout => vec![(None, "none".to_string(), String::new())],
    };
    let work = || {
        let mut rows = Vec::new();
        for (tree, budget_kind, budget) in batches {
            let batch = Batch {
                spec,
                solver: spec.solver,
                cfg: &cfg,
                tree,
                budget_kind,
                budget,
                optimum: optimum.clone(),
            };
            rows.extend(dispatch(&batch, &env));
        }
        rows
    };
    match spec.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Spec(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Runs the experiment and writes `results.csv` to `out` (or only returns
/// the rows when `out` is `None`).
pub fn run_experiment(spec: &ExperimentSpec) -> HarnessResult<Vec<EpisodeResult>> {
    match &spec.out {
        Some(dir) => run_to_dir(spec, dir),
        None => run_episodes(spec),
    }
}

/// Writes `config.json` (the resolved spec), `results.csv` and `summary.csv`.
pub fn run_to_dir(spec: &ExperimentSpec, dir: &Path) -> HarnessResult<Vec<EpisodeResult>> {
    let resolved = spec.resolved_json()?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&resolved)?)?;
    let rows = run_episodes(spec)?;
    write_results(&rows, fs::File::create(dir.join("results.csv"))?)?;
    let summary = summarize_results(&rows, &["env", "solver", "budget_kind", "budget"])?;
    write_summary(&summary, fs::File::create(dir.join("summary.csv"))?)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub state_width: usize,
    pub action_width: usize,
    pub episodes: usize,
    pub mean_distance: f64,
    /// Empty for fewer than two episodes.
    pub stderr: Option<f64>,
}

/// VOWSS on LQG over the grid `state_widths × action_widths`. Only the
/// first action matters, so each episode stops after one step.
pub fn vowss_width_sweep(
    base: &ExperimentSpec,
    state_widths: &[usize],
    action_widths: &[usize],
    episodes: usize,
    seed: u64,
) -> HarnessResult<(Vec<SweepRow>, Vec<EpisodeResult>)> {
    if state_widths.iter().chain(action_widths).any(|&w| w == 0) {
        return Err(HarnessError::Spec("widths must be >= 1".into()));
    }
    let mut rows = Vec::new();
    let mut episodes_out = Vec::new();
    for &cs in state_widths {
        for &ca in action_widths {
            let mut spec = base.clone();
            spec.env = EnvId::Lqg;
            spec.solver = SolverId::Vowss;
            spec.episodes = episodes;
            spec.seed = seed;
            spec.max_steps = Some(1);
            super::spec::merge_json(&mut spec.solver_params, &json!({"state_width": cs, "action_width": ca}));
            let results = run_episodes(&spec)?;
            let d: Vec<f64> = results.iter().filter_map(|r| r.distance_to_opt).collect();
            let n = d.len();
            let mean = d.iter().sum::<f64>() / n.max(1) as f64;
            let stderr = (n > 1).then(|| {
                let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            });
            rows.push(SweepRow {
                state_width: cs,
                action_width: ca,
                episodes: n,
                mean_distance: if n == 0 { f64::NAN } else { mean },
                stderr,
            });
            episodes_out.extend(results);
        }
    }
    Ok((rows, episodes_out))
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state_width", "action_width", "episodes", "mean_distance", "stderr"])?;
    for r in rows {
        w.write_record([
            r.state_width.to_string(),
            r.action_width.to_string(),
            r.episodes.to_string(),
            r.mean_distance.to_string(),
            r.stderr.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(env: EnvId, solver: SolverId) -> ExperimentSpec {
        ExperimentSpec {
            env,
            solver,
            episodes: 3,
            particles: 200,
            queries: vec![20],
            record_timing: false,
            solver_params: match solver {
                SolverId::Vowss | SolverId::Voss => json!({"state_width": 2, "action_width": 5}),
                _ => json!({}),
            },
            max_steps: Some(4),
            ..ExperimentSpec::default()
        }
    }

    fn csv_bytes(rows: &[EpisodeResult]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_results(rows, &mut buf).unwrap();
        buf
    }

    #[test]
    fn zero_episodes_writes_header_only() {
        let mut spec = small(EnvId::Lqg, SolverId::Vomcpow);
        spec.episodes = 0;
        let rows = run_episodes(&spec).unwrap();
        assert!(rows.is_empty());
        let text = String::from_utf8(csv_bytes(&rows)).unwrap();
        assert_eq!(text, CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn every_env_and_solver_runs() {
        for env in EnvId::ALL {
            for solver in SolverId::ALL {
                if solver == SolverId::Voss && env != EnvId::QuadraticMdp {
                    continue;
                }
                let rows = run_episodes(&small(env, solver)).unwrap();
                assert_eq!(rows.len(), 3, "{env} {solver}");
                for r in &rows {
                    assert!(r.total_reward.is_finite(), "{env} {solver}: {r:?}");
                    assert!(!r.is_error(), "{env} {solver}: {r:?}");
                    assert!(r.steps >= 1 && r.steps <= 4);
                    assert_eq!(r.distance_to_opt.is_some(), env == EnvId::Lqg);
                }
            }
        }
    }

    #[test]
    fn reruns_are_byte_identical_and_thread_independent() {
        let spec = small(EnvId::Lqg, SolverId::Vomcpow);
        let a = csv_bytes(&run_episodes(&spec).unwrap());
        let b = csv_bytes(&run_episodes(&spec).unwrap());
        assert_eq!(a, b);
        let serial = ExperimentSpec {
            threads: Some(1),
            ..spec.clone()
        };
        assert_eq!(a, csv_bytes(&run_episodes(&serial).unwrap()));
    }

    #[test]
    fn seeds_follow_episode_index() {
        let mut spec = small(EnvId::Lqg, SolverId::RolloutOnly);
        spec.seed = 40;
        let rows = run_episodes(&spec).unwrap();
        let seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![40, 41, 42]);
        assert_eq!(rows[0].budget_kind, "none");
    }

    #[test]
    fn budget_grid_multiplies_rows() {
        let mut spec = small(EnvId::Lqg, SolverId::Pomcpow);
        spec.queries = vec![5, 10];
        spec.seconds = vec![0.001];
        let rows = run_episodes(&spec).unwrap();
        assert_eq!(rows.len(), 9);
        let kinds: Vec<(&str, &str)> = rows.iter().map(|r| (r.budget_kind.as_str(), r.budget.as_str())).collect();
        assert_eq!(kinds[0], ("queries", "5"));
        assert_eq!(kinds[3], ("queries", "10"));
        assert_eq!(kinds[6], ("seconds", "0.001"));
    }

    #[test]
    fn lqg_rollout_only_hits_the_riccati_point() {
        let mut spec = small(EnvId::Lqg, SolverId::RolloutOnly);
        spec.particles = 10_000;
        let rows = run_episodes(&spec).unwrap();
        for r in rows {
            let d = r.distance_to_opt.unwrap();
            // |[6.18, -6.18] - [6, -6]| ≈ 0.255
            assert!((d - 0.255).abs() < 0.02, "{d}");
            assert_eq!(r.termination, "terminal");
            assert_eq!(r.steps, 2);
        }
    }

    #[test]
    fn sweep_has_one_row_per_cell() {
        let spec = ExperimentSpec {
            particles: 100,
            record_timing: false,
            ..ExperimentSpec::default()
        };
        let (rows, eps) = vowss_width_sweep(&spec, &[2], &[10], 10, 0).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(eps.len(), 10);
        assert_eq!(rows[0].episodes, 10);
        assert!(rows[0].mean_distance.is_finite());
        let (again, _) = vowss_width_sweep(&spec, &[2], &[10], 10, 0).unwrap();
        assert_eq!(rows, again);
        let (grid, _) = vowss_width_sweep(&spec, &[1, 2], &[3, 4, 5], 2, 0).unwrap();
        assert_eq!(grid.len(), 6);
    }
}
