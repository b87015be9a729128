//! `vpw`: run, sweep, tune and summarize planner experiments.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use vpw_core::cem::write_history;
use vpw_core::harness::{
    format_summary, run_experiment, summarize_csv, summarize_results, tune_two_phase, vowss_width_sweep, write_results,
    write_summary, write_sweep, ExperimentSpec, HarnessError, TuneSpec,
};

#[derive(Parser)]
#[command(name = "vpw", version, about = "Voronoi progressive widening planner experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded episodes of one solver on one environment.
    Run(ExperimentArgs),
    /// Sweep VOWSS state and action widths on LQG.
    SweepVowss {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        state_widths: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200")]
        action_widths: Vec<usize>,
    },
    /// Tune POMCPOW with CEM, then VOMCPOW starting from its optimum.
    Tune {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// JSON file with CEM settings (population, iterations, eval_episodes, ...).
        #[arg(long)]
        tune_config: Option<PathBuf>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        eval_episodes: Option<usize>,
    },
    /// Per-group mean and standard error of a results CSV.
    Summarize {
        csv: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "env,solver,budget_kind,budget")]
        group_by: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "total_reward,distance_to_opt")]
        metrics: Vec<String>,
        /// Also write the summary as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    /// Per-step query budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    queries: Option<Vec<u64>>,
    /// Per-step planning times in seconds, comma separated.
    #[arg(long, value_delimiter = ',')]
    time: Option<Vec<f64>>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    rollout: Option<String>,
    /// Leave `plan_seconds_mean` empty so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

impl ExperimentArgs {
    fn spec(&self) -> anyhow::Result<ExperimentSpec> {
        let mut value = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).map_err(|e| HarnessError::Spec(format!("{}: {e}", path.display())))?
            }
            None => json!({}),
        };
        let mut flags = Map::new();
        let mut set = |k: &str, v: Value| {
            flags.insert(k.to_string(), v);
        };
        if let Some(v) = &self.env {
            set("env", json!(v));
        }
        if let Some(v) = &self.solver {
            set("solver", json!(v));
        }
        if let Some(v) = &self.preset {
            set("preset", json!(v));
        }
        if let Some(v) = &self.queries {
            set("queries", json!(v));
        }
        if let Some(v) = &self.time {
            set("seconds", json!(v));
        }
        if let Some(v) = self.episodes {
            set("episodes", json!(v));
        }
        if let Some(v) = self.seed {
            set("seed", json!(v));
        }
        if let Some(v) = &self.out {
            set("out", json!(v));
        }
        if let Some(v) = self.threads {
            set("threads", json!(v));
        }
        if let Some(v) = self.particles {
            set("particles", json!(v));
        }
        if let Some(v) = &self.rollout {
            set("rollout", json!(v));
        }
        if self.no_timing {
            set("record_timing", json!(false));
        }
        vpw_core::harness::merge_json(&mut value, &Value::Object(flags));
        let spec = ExperimentSpec::from_json(&value.to_string())?;
        spec.validate()?;
        Ok(spec)
    }
}

fn echo_config(dir: &Path, name: &str, value: &Value) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(exp: &ExperimentArgs) -> anyhow::Result<()> {
    let spec = exp.spec()?;
    let rows = run_experiment(&spec)?;
    if spec.out.is_none() {
        write_results(&rows, io::stdout().lock())?;
    }
    let group = ["env", "solver", "budget_kind", "budget"];
    let summary = summarize_results(&rows, &group)?;
    eprint!("{}", format_summary(&summary, &group));
    let failed = rows.iter().filter(|r| r.is_error()).count();
    if failed > 0 {
        eprintln!("{failed} episode(s) ended with an error");
    }
    Ok(())
}

fn sweep(exp: &ExperimentArgs, state_widths: &[usize], action_widths: &[usize]) -> anyhow::Result<()> {
    let mut spec = exp.spec()?;
    // the sweep is VOWSS on LQG whatever the config says
    spec.env = vpw_core::harness::EnvId::Lqg;
    spec.solver = vpw_core::harness::SolverId::Vowss;
    spec.validate()?;
    let (rows, episodes) = vowss_width_sweep(&spec, state_widths, action_widths, spec.episodes, spec.seed)?;
    match &spec.out {
        Some(dir) => {
            let mut resolved = spec.resolved_json()?;
            resolved["state_widths"] = json!(state_widths);
            resolved["action_widths"] = json!(action_widths);
            echo_config(dir, "config.json", &resolved)?;
            write_sweep(&rows, fs::File::create(dir.join("sweep.csv"))?)?;
            write_results(&episodes, fs::File::create(dir.join("results.csv"))?)?;
        }
        None => write_sweep(&rows, io::stdout().lock())?,
    }
    for r in &rows {
        let se = r.stderr.map_or(String::new(), |s| format!(" ± {s:.4}"));
        eprintln!("C_s={:<4} C_a={:<5} distance {:.4}{se}", r.state_width, r.action_width, r.mean_distance);
    }
    Ok(())
}

fn tune(
    exp: &ExperimentArgs,
    tune_config: Option<&Path>,
    population: Option<usize>,
    iterations: Option<usize>,
    eval_episodes: Option<usize>,
) -> anyhow::Result<()> {
    let spec = exp.spec()?;
    let mut t: TuneSpec = match tune_config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
            .map_err(|e| HarnessError::Spec(format!("{}: {e}", p.display())))?,
        None => TuneSpec::default(),
    };
    t.seed = spec.seed;
    if let Some(v) = population {
        t.population = v;
    }
    if let Some(v) = iterations {
        t.iterations = v;
    }
    if let Some(v) = eval_episodes {
        t.eval_episodes = v;
    }
    let out = tune_two_phase(&spec, &t)?;
    let best = json!({
        "pomcpow": {"objective": out.pomcpow.best_objective, "config": out.pomcpow_config},
        "vomcpow": {"objective": out.vomcpow.best_objective, "config": out.vomcpow_config},
    });
    match &spec.out {
        Some(dir) => {
            let mut resolved = spec.resolved_json()?;
            resolved["tune"] = serde_json::to_value(&t)?;
            echo_config(dir, "config.json", &resolved)?;
            echo_config(dir, "best.json", &best)?;
            write_history(&out.pomcpow_spec, &out.pomcpow, fs::File::create(dir.join("pomcpow_history.csv"))?)?;
            write_history(&out.vomcpow_spec, &out.vomcpow, fs::File::create(dir.join("vomcpow_history.csv"))?)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&best)?),
    }
    Ok(())
}

fn summarize(csv: &Path, group_by: &[String], metrics: &[String], out: Option<&Path>) -> anyhow::Result<()> {
    let group: Vec<&str> = group_by.iter().map(String::as_str).collect();
    let metrics: Vec<&str> = metrics.iter().map(String::as_str).collect();
    let rows = summarize_csv(csv, &group, &metrics)?;
    print!("{}", format_summary(&rows, &group));
    if let Some(path) = out {
        write_summary(&rows, fs::File::create(path)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(exp) => run(exp),
        Command::SweepVowss {
            exp,
            state_widths,
            action_widths,
        } => sweep(exp, state_widths, action_widths),
        Command::Tune {
            exp,
            tune_config,
            population,
            iterations,
            eval_episodes,
        } => tune(exp, tune_config.as_deref(), *population, *iterations, *eval_episodes),
        Command::Summarize {
            csv,
            group_by,
            metrics,
            out,
        } => summarize(csv, group_by, metrics, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e
                .downcast_ref::<HarnessError>()
                .is_some_and(|h| h.is_validation() || matches!(h, HarnessError::Schema(_)));
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}
