use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chronocorr::bases::{pauli_basis, wigner_qutrit_basis};
use chronocorr::dynamics::{Channel, ChannelKind};
use chronocorr::optmeas::{maximize, SearchOptions};
use chronocorr::robustness::{
    er_ppt, make_assemblage, make_behavior, mub_pvms, ter_closed_form, ter_sdp, tnr, tsr, Measure,
};
use chronocorr::sot::build_pdo;
use chronocorr::HermitianOperator;

fn mixed(d: usize) -> HermitianOperator {
    HermitianOperator::identity(d).scale(1.0 / d as f64)
}

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("pdo");
    for d in [2, 3] {
        let basis = if d == 2 { pauli_basis() } else { wigner_qutrit_basis() };
        let ch = Channel::new(d, ChannelKind::AmplitudeDamping, 0.7).unwrap();
        let rho = mixed(d);
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| build_pdo(black_box(&rho), &ch, &basis).unwrap())
        });
    }
    g.finish();
}

fn entanglement(c: &mut Criterion) {
    let mut g = c.benchmark_group("entanglement");
    for d in [2, 3] {
        let basis = if d == 2 { pauli_basis() } else { wigner_qutrit_basis() };
        let ch = Channel::new(d, ChannelKind::Depolarizing, 0.5).unwrap();
        let r = build_pdo(&mixed(d), &ch, &basis).unwrap();
        g.bench_with_input(BenchmarkId::new("ter_closed_form", d), &d, |b, _| {
            b.iter(|| ter_closed_form(black_box(&r)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("ter_sdp", d), &d, |b, _| {
            b.iter(|| ter_sdp(black_box(&r)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("er_ppt", d), &d, |b, _| {
            b.iter(|| er_ppt(black_box(&r)).unwrap())
        });
    }
    g.finish();
}

fn steering_nonlocality(c: &mut Criterion) {
    let mut g = c.benchmark_group("steering_nonlocality");
    g.sample_size(20);
    for (d, settings) in [(2, 2), (3, 2), (3, 3)] {
        let ch = Channel::new(d, ChannelKind::PhaseDamping, 0.5).unwrap();
        let pvms = mub_pvms(d, settings).unwrap();
        let rho = mixed(d);
        let asm = make_assemblage(&rho, &ch, &pvms).unwrap();
        let beh = make_behavior(&rho, &ch, &pvms, &pvms).unwrap();
        let id = format!("d{d}_s{settings}");
        g.bench_function(BenchmarkId::new("tsr", &id), |b| {
            b.iter(|| tsr(black_box(&asm)).unwrap())
        });
        g.bench_function(BenchmarkId::new("tnr", &id), |b| {
            b.iter(|| tnr(black_box(&beh)).unwrap())
        });
    }
    g.finish();
}

fn optimization(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimize");
    g.sample_size(10);
    let ch = Channel::new(2, ChannelKind::Identity, 0.0).unwrap();
    let opts = SearchOptions {
        restarts: 2,
        max_evaluations: 60,
        ..SearchOptions::default()
    };
    g.bench_function("tsr_qubit", |b| {
        b.iter(|| maximize(Measure::Tsr, black_box(&mixed(2)), &ch, 2, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, construction, entanglement, steering_nonlocality, optimization);
criterion_main!(benches);
