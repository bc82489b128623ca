use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meshclass::bench::{evaluate, prepare, train};
use meshclass::dataset::{generate, SynthSpec};
use meshclass::models::{Model, ModelKind, RunConfig};
use meshclass::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn spec() -> SynthSpec {
    SynthSpec {
        template_level: 2,
        samples_per_class: [32, 32],
        ..SynthSpec::default()
    }
}

fn dataset_generation(c: &mut Criterion) {
    let spec = spec();
    let mut group = c.benchmark_group("generate");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| generate(&spec, exec).unwrap()));
    }
    group.finish();
}

fn training_and_evaluation(c: &mut Criterion) {
    let data = generate(&spec(), Exec::Parallel).unwrap();
    for kind in [ModelKind::SpiralNet, ModelKind::MeshNet] {
        let mut cfg = RunConfig::for_model(kind);
        cfg.epochs = 1;
        let template = kind.uses_template().then_some(&data.template);
        let model = Model::new(&cfg, template).unwrap();
        let prepared = prepare(&model, &data, Exec::Parallel).unwrap();

        let mut group = c.benchmark_group(format!("train_epoch/{}", kind.id()));
        group.sample_size(10);
        for (name, exec) in MODES {
            group.bench_function(BenchmarkId::from_parameter(name), |b| {
                b.iter(|| {
                    let mut m = Model::new(&cfg, template).unwrap();
                    train(&mut m, &prepared, exec).unwrap()
                })
            });
        }
        group.finish();

        let mut group = c.benchmark_group(format!("evaluate/{}", kind.id()));
        for (name, exec) in MODES {
            group.bench_function(BenchmarkId::from_parameter(name), |b| {
                b.iter(|| evaluate(&model, &prepared.test, &prepared.test_labels, exec).unwrap())
            });
        }
        group.finish();
    }
}

criterion_group!(benches, dataset_generation, training_and_evaluation);
criterion_main!(benches);
