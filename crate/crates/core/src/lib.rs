//! Voronoi progressive widening for continuous-action POMDPs: VOO action
//! proposals, sparse-sampling planners (VOSS/VOWSS), tree search
//! (POMCPOW/VOMCPOW), benchmark problems, a CEM tuner and an experiment harness.

pub mod belief;
pub mod cem;
pub mod envs;
pub mod error;
pub mod harness;
pub mod mcts;
pub mod problem;
pub mod rng;
pub mod space;
pub mod sparse;
pub mod voo;
pub mod widening;

pub use belief::{init_root_belief, reweight_next_belief, weighted_mean_value, WeightedParticleBelief};
pub use error::{PlanError, Result};
pub use mcts::{mcts_plan, pomcpow_plan, vomcpow_plan, Budget, Mcts, MctsConfig, SearchTree};
pub use problem::{rollout, MdpAsPomdp, Policy, PolicyContext, Problem, Transition};
pub use rng::{stream, substream, SimRng};
pub use space::{uniform_action, Action, ActionSpace};
pub use sparse::{voss_plan, vowss_plan, Estimate, SparseConfig, Voss, VossConfig, Vowss, VowssConfig};
pub use voo::{best_voronoi_cell, voo_sample, ProposalMode, VooConfig, VoronoiCenterSet};
pub use widening::{pw_select, ucb_select, vpw_select, VpwChoice, VpwConfig};
