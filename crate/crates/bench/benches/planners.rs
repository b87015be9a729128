use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use vpw_core::envs::{LqgPolicy, LqgProblem};
use vpw_core::harness::{preset, SolverConfig};
use vpw_core::{init_root_belief, mcts_plan, stream, uniform_action, voo_sample, vowss_plan, VooConfig, VoronoiCenterSet};

fn voo(c: &mut Criterion) {
    let problem = LqgProblem::default();
    let space = vpw_core::Problem::action_space(&problem);
    let mut rng = stream(0, 0);
    let mut set = VoronoiCenterSet::new();
    for i in 0..100 {
        set.push(uniform_action(space, &mut rng), i as f64);
    }
    let cfg = VooConfig::new(0.0, vec![0.5f64.sqrt(); 2]);
    c.bench_function("voo_sample/100-centers", |b| b.iter(|| voo_sample(&set, space, &cfg, &mut rng)));
}

fn planners(c: &mut Criterion) {
    let problem = LqgProblem::default();
    let policy = LqgPolicy::riccati();
    let mut rng = stream(0, 2);
    let root = init_root_belief(&problem, 1000, &mut rng);

    let SolverConfig::Mcts(mut tree) = preset("lqg-vomcpow").unwrap().config else { unreachable!() };
    tree.budget = vpw_core::Budget::Queries(1000);
    let mut group = c.benchmark_group("lqg-plan");
    group.sample_size(20);
    group.bench_function("vomcpow/1000-queries", |b| {
        b.iter_batched(|| stream(1, 1), |mut r| mcts_plan(&root, &problem, &policy, &tree, &mut r).unwrap(), BatchSize::SmallInput)
    });
    let pw = tree.as_pomcpow();
    group.bench_function("pomcpow/1000-queries", |b| {
        b.iter_batched(|| stream(1, 1), |mut r| mcts_plan(&root, &problem, &policy, &pw, &mut r).unwrap(), BatchSize::SmallInput)
    });

    let SolverConfig::Sparse(mut sparse) = preset("lqg-vowss").unwrap().config else { unreachable!() };
    sparse.state_width = 5;
    sparse.action_width = 50;
    let small = vpw_core::WeightedParticleBelief::uniform(root.particles()[..5].to_vec());
    group.bench_function("vowss/cs5-ca50", |b| {
        b.iter_batched(|| stream(1, 1), |mut r| vowss_plan(&small, &problem, &sparse, &mut r).unwrap(), BatchSize::SmallInput)
    });
    group.finish();
}

criterion_group!(benches, voo, planners);
criterion_main!(benches);
