use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use cage_core::data::{generate_synthetic, GeneratorConfig, GraspLabel};
use cage_core::eval::average_precision;
use cage_core::features::{EncodedExample, WideLayout};
use cage_core::geometry::{build_kdtree, nearest_point};
use cage_core::model::{encode_contexts, CageModel, ModelConfig};

fn fixture() -> (cage_core::Dataset, Vec<EncodedExample>) {
    let cfg = GeneratorConfig {
        objects_per_class: 2,
        ..GeneratorConfig::default()
    };
    let ds = generate_synthetic(&cfg, 1).unwrap().dataset;
    let layout = WideLayout::new(&ds.vocabularies, ModelConfig::default().crosses);
    let ids: Vec<String> = ds.contexts.iter().map(|c| c.context_id.clone()).collect();
    let examples = encode_contexts(&ds, &ids, &layout).unwrap();
    (ds, examples)
}

fn geometry(c: &mut Criterion) {
    let (ds, _) = fixture();
    let points: Vec<[f64; 3]> = ds.objects.iter().flat_map(|o| o.points.iter().copied()).collect();
    let tree = build_kdtree(&points).unwrap();
    c.bench_function("kdtree_build", |b| b.iter(|| build_kdtree(black_box(&points)).unwrap()));
    let queries: Vec<[f64; 3]> = ds.grasps.values().flatten().map(|g| g.position).take(256).collect();
    c.bench_function("kdtree_nearest_256", |b| {
        b.iter(|| {
            for q in &queries {
                black_box(nearest_point(&tree, q).unwrap());
            }
        })
    });
}

fn network(c: &mut Criterion) {
    let (ds, examples) = fixture();
    let model = CageModel::new(ModelConfig::default(), ds.vocabularies.clone()).unwrap();
    let ex = &examples[0];
    c.bench_function("predict", |b| b.iter(|| model.predict(black_box(&ex.wide), black_box(&ex.deep)).unwrap()));
    c.bench_function("forward_backward", |b| {
        b.iter_batched_ref(
            || model.clone(),
            |m| m.accumulate_gradients(black_box(ex), 1.0).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn metrics(c: &mut Criterion) {
    let labels: Vec<GraspLabel> = (0..20)
        .map(|i| match i % 3 {
            0 => GraspLabel::Suitable,
            1 => GraspLabel::Neutral,
            _ => GraspLabel::NotSuitable,
        })
        .collect();
    c.bench_function("average_precision_20", |b| b.iter(|| average_precision(black_box(&labels)).unwrap()));
}

criterion_group!(benches, geometry, network, metrics);
criterion_main!(benches);
