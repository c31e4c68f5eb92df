use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use msmortar::mortar_basis::basis_candidates;
use msmortar::solvers::{CoarseSpace, LocalSpace, TwoLevel};
use msmortar::{
    build_mortar_basis, pcg, realize_field, realize_source, BasisKind, Composition, FieldPreset, GridGeometry, InterfaceOperator,
    KrylovOptions, SourceKind,
};

fn kernels(c: &mut Criterion) {
    let geom = GridGeometry::new(5, 10).unwrap();
    let kappa = realize_field(&FieldPreset::Channels.spec(1e4), &geom).unwrap();
    let source = realize_source(SourceKind::Constant(1.0), &geom).unwrap();

    c.bench_function("block_factorization_5x10", |b| {
        b.iter(|| InterfaceOperator::new(black_box(&geom), black_box(&kappa)).unwrap())
    });

    let op = InterfaceOperator::new(&geom, &kappa).unwrap();
    let xi: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    c.bench_function("interface_apply_5x10", |b| b.iter(|| op.apply(black_box(&xi))));

    c.bench_function("snapshots_pod_case2_5x10", |b| {
        b.iter(|| basis_candidates(&geom, &kappa, BasisKind::Case2, 0).unwrap())
    });

    let cands = basis_candidates(&geom, &kappa, BasisKind::Case2, 0).unwrap();
    let coarse = CoarseSpace::new(&op, build_mortar_basis(&geom, &cands, 2).unwrap()).unwrap();
    let local = LocalSpace::new(&op, 1).unwrap();
    let prec = TwoLevel::new(&op, &coarse, &local, Composition::Hybrid);
    let rhs = op.rhs(&source);
    let opts = KrylovOptions::default();
    c.bench_function("pcg_hybrid_case2_5x10", |b| b.iter(|| pcg(&op, &prec, black_box(&rhs), None, &opts).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernels
}
criterion_main!(benches);
