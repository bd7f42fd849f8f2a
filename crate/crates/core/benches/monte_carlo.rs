use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use marton::analysis::{
    run_experiment, simulate_synthetic, CodebookMode, CoveringParams, ExperimentConfig, ExperimentSetup, SyntheticArray,
};
use marton::channel::{ClassicalBroadcastChannel, InputDesign};
use marton::divergence::I0Method;
use marton::{Execution, JointPmf};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn covering(c: &mut Criterion) {
    let params = CoveringParams::new(256, 256, 2f64.powi(-8), 0.5).unwrap();
    let array = SyntheticArray::extremal(&params);
    let trials = 2000;
    let mut group = c.benchmark_group("covering");
    group.throughput(Throughput::Elements(trials));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| simulate_synthetic(&params, &array, trials, 1, exec))
        });
    }
    group.finish();
}

fn coding_trials(c: &mut Criterion) {
    let ch = ClassicalBroadcastChannel::binary_symmetric(0.05, 0.1).unwrap();
    let uv = JointPmf::new(labels("u", 2), labels("v", 2), vec![vec![0.35, 0.15], vec![0.15, 0.35]]).unwrap();
    let design = InputDesign::from_fn(uv, ch.x_alphabet(), |u, v| u ^ v).unwrap();
    let setup = ExperimentSetup::classical(&ch, &design, 8, 0.05, 0.0, I0Method::Greedy).unwrap();
    let params = setup.params_with_bands(1, 1, 3, 3, 0.2);
    let trials = 200;
    let mut group = c.benchmark_group("coding_trials");
    group.sample_size(10);
    group.throughput(Throughput::Elements(trials));
    for (name, execution) in MODES {
        let config = ExperimentConfig { trials, seed: 5, codebook: CodebookMode::Fresh, execution };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, config| {
            b.iter(|| run_experiment(&setup, &params, config).unwrap().counts)
        });
    }
    group.finish();
}

criterion_group!(benches, covering, coding_trials);
criterion_main!(benches);
