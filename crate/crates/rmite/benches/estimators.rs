use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmite::ansatz::hardware_efficient_circuit;
use rmite::ensembles::{EnsembleKind, UnitaryEnsemble};
use rmite::exec::ExecMode;
use rmite::fisher::{estimate_fisher, EstimatorConfig, EstimatorKind};
use rmite::state::StateVector;

fn bench_estimators(c: &mut Criterion) {
    let circuit = hardware_efficient_circuit(4, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let theta: Vec<f64> = (0..circuit.n_params())
        .map(|_| rand::Rng::gen::<f64>(&mut rng) * 2.0 - 1.0)
        .collect();
    let init = StateVector::zero(4);
    let ensemble = UnitaryEnsemble {
        kind: EnsembleKind::Haar,
        n_qubits: 4,
    };

    let mut group = c.benchmark_group("two_design_k64");
    for (label, mode) in [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)] {
        let mut config = EstimatorConfig::new(EstimatorKind::TwoDesign, ensemble.clone(), 64);
        config.exec = mode;
        group.bench_with_input(BenchmarkId::from_parameter(label), &config, |b, config| {
            b.iter(|| estimate_fisher(&circuit, &theta, &init, config, 7).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("average_cfim_k64");
    for (label, mode) in [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)] {
        let mut config = EstimatorConfig::new(EstimatorKind::AverageCfim, ensemble.clone(), 64);
        config.exec = mode;
        group.bench_with_input(BenchmarkId::from_parameter(label), &config, |b, config| {
            b.iter(|| estimate_fisher(&circuit, &theta, &init, config, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_estimators
}
criterion_main!(benches);
