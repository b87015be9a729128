//! Published hyperparameter sets, one per (environment, solver).

use crate::mcts::{Budget, MctsConfig};
use crate::sparse::SparseConfig;
use crate::voo::VooConfig;
use crate::widening::VpwConfig;

use super::spec::{EnvId, SolverId};

pub const PRESET_NAMES: [&str; 7] = [
    "lqg-pomcpow",
    "lqg-vomcpow",
    "lqg-vowss",
    "vdp-pomcpow",
    "vdp-vomcpow",
    "lander-pomcpow",
    "lander-vomcpow",
];

#[derive(Debug, Clone, PartialEq)]
pub enum SolverConfig {
    Mcts(MctsConfig),
    Sparse(SparseConfig),
    /// The rollout policy alone; nothing to configure.
    Rollout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub env: EnvId,
    pub solver: SolverId,
    pub config: SolverConfig,
}

#[allow(clippy::too_many_arguments)]
fn tree(
    c: f64,
    k_a: f64,
    alpha_a: f64,
    k_o: f64,
    alpha_o: f64,
    omega: f64,
    variances: &[f64],
    max_depth: usize,
) -> SolverConfig {
    SolverConfig::Mcts(MctsConfig {
        vpw: VpwConfig {
            k_a,
            alpha_a,
            c,
            voo: VooConfig::from_variances(omega, variances),
            widen_unbounded: false,
        },
        k_o,
        alpha_o,
        max_depth,
        budget: Budget::Queries(1000),
        first_action_from_rollout: true,
        record_backups: false,
    })
}

/// The named preset. POMCPOW rows have no Σ; they carry the matching
/// VOMCPOW Σ, which is unused at `ω = 1`.
pub fn preset(name: &str) -> Option<Preset> {
    let (env, solver, config) = match name {
        "lqg-pomcpow" => (
            EnvId::Lqg,
            SolverId::Pomcpow,
            tree(65.0, 30.0, 1.0 / 2.5, 30.0, 1.0 / 4.0, 1.0, &[0.5, 0.5], 3),
        ),
        "lqg-vomcpow" => (
            EnvId::Lqg,
            SolverId::Vomcpow,
            tree(60.0, 25.0, 1.0 / 5.5, 25.0, 1.0 / 2.5, 0.8, &[0.5, 0.5], 3),
        ),
        "lqg-vowss" => (
            EnvId::Lqg,
            SolverId::Vowss,
            SolverConfig::Sparse(SparseConfig {
                state_width: 10,
                action_width: 200,
                action_width_decay: 0.4,
                depth: 2,
                vpw: VpwConfig {
                    k_a: 1.0,
                    alpha_a: 0.5,
                    c: 1.0,
                    voo: VooConfig::from_variances(0.8, &[0.5, 0.5]),
                    widen_unbounded: true,
                },
            }),
        ),
        "vdp-pomcpow" => (
            EnvId::Vdp,
            SolverId::Pomcpow,
            tree(110.0, 30.0, 1.0 / 30.0, 5.0, 1.0 / 100.0, 1.0, &[0.1], 10),
        ),
        "vdp-vomcpow" => (
            EnvId::Vdp,
            SolverId::Vomcpow,
            tree(85.0, 30.0, 1.0 / 30.0, 2.5, 1.0 / 100.0, 0.7, &[0.1], 10),
        ),
        "lander-pomcpow" => (
            EnvId::Lander,
            SolverId::Pomcpow,
            tree(10.0, 3.0, 1.0 / 4.0, 2.0, 1.0 / 10.0, 1.0, &[0.2, 0.5, 0.05], 250),
        ),
        "lander-vomcpow" => (
            EnvId::Lander,
            SolverId::Vomcpow,
            tree(30.0, 4.0, 1.0 / 4.0, 1.5, 1.0 / 5.0, 0.9, &[0.2, 0.5, 0.05], 250),
        ),
        _ => return None,
    };
    let name = PRESET_NAMES.iter().find(|n| **n == name).copied()?;
    Some(Preset {
        name,
        env,
        solver,
        config,
    })
}

/// The preset used when none is named, if the pair has one.
pub fn default_preset(env: EnvId, solver: SolverId) -> Option<Preset> {
    let env_name = match env {
        EnvId::Lqg => "lqg",
        EnvId::Vdp => "vdp",
        EnvId::Lander => "lander",
        _ => return None,
    };
    let solver_name = match solver {
        SolverId::Pomcpow => "pomcpow",
        SolverId::Vomcpow => "vomcpow",
        SolverId::Vowss => "vowss",
        _ => return None,
    };
    preset(&format!("{env_name}-{solver_name}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mcts(name: &str) -> MctsConfig {
        match preset(name).unwrap().config {
            SolverConfig::Mcts(c) => c,
            _ => panic!("{name} is not a tree preset"),
        }
    }

    #[test]
    fn every_name_resolves() {
        for name in PRESET_NAMES {
            assert_eq!(preset(name).unwrap().name, name);
        }
        assert!(preset("lqg-bomcp").is_none());
    }

    #[test]
    fn lqg_vomcpow_row() {
        let c = mcts("lqg-vomcpow");
        assert_eq!(c.vpw.c, 60.0);
        assert_eq!(c.vpw.k_a, 25.0);
        assert_eq!(c.vpw.alpha_a, 1.0 / 5.5);
        assert_eq!(c.k_o, 25.0);
        assert_eq!(c.alpha_o, 1.0 / 2.5);
        assert_eq!(c.vpw.voo.omega, 0.8);
        // Σ = diag(0.5, 0.5) is a covariance
        assert_eq!(c.vpw.voo.sigma, vec![0.5f64.sqrt(); 2]);
        assert_eq!(c.max_depth, 3);
    }

    #[test]
    fn remaining_rows() {
        let rows: [(&str, [f64; 5], f64, usize); 6] = [
            ("lqg-pomcpow", [65.0, 30.0, 1.0 / 2.5, 30.0, 1.0 / 4.0], 1.0, 3),
            ("lqg-vomcpow", [60.0, 25.0, 1.0 / 5.5, 25.0, 1.0 / 2.5], 0.8, 3),
            ("vdp-pomcpow", [110.0, 30.0, 1.0 / 30.0, 5.0, 1.0 / 100.0], 1.0, 10),
            ("vdp-vomcpow", [85.0, 30.0, 1.0 / 30.0, 2.5, 1.0 / 100.0], 0.7, 10),
            ("lander-pomcpow", [10.0, 3.0, 1.0 / 4.0, 2.0, 1.0 / 10.0], 1.0, 250),
            ("lander-vomcpow", [30.0, 4.0, 1.0 / 4.0, 1.5, 1.0 / 5.0], 0.9, 250),
        ];
        for (name, [c, k_a, alpha_a, k_o, alpha_o], omega, depth) in rows {
            let cfg = mcts(name);
            assert_eq!(
                [cfg.vpw.c, cfg.vpw.k_a, cfg.vpw.alpha_a, cfg.k_o, cfg.alpha_o],
                [c, k_a, alpha_a, k_o, alpha_o],
                "{name}"
            );
            assert_eq!(cfg.vpw.voo.omega, omega, "{name}");
            assert_eq!(cfg.max_depth, depth, "{name}");
        }
        let lander = mcts("lander-vomcpow");
        let expect: Vec<f64> = [0.2f64, 0.5, 0.05].iter().map(|v| v.sqrt()).collect();
        assert_eq!(lander.vpw.voo.sigma, expect);
        assert_eq!(mcts("vdp-vomcpow").vpw.voo.sigma, vec![0.1f64.sqrt()]);
    }

    #[test]
    fn vowss_row() {
        let SolverConfig::Sparse(c) = preset("lqg-vowss").unwrap().config else {
            panic!("not sparse")
        };
        assert_eq!((c.state_width, c.action_width, c.action_width_decay), (10, 200, 0.4));
        assert_eq!(c.vpw.voo.omega, 0.8);
        assert!(c.vpw.widen_unbounded);
        assert_eq!(c.action_width_at(1), 80);
    }
}
