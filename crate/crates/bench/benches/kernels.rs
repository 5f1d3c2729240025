use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recur_core::averages::{cube_average, Evaluation};
use recur_core::combinatorics::{behrend_set, count_aps_by_difference};
use recur_core::recurrence::triple_counterexample;
use recur_core::seminorms::{gowers_norm, gowers_u2_spectral, ComplexSignal};
use recur_core::sets::IntervalUnion;
use recur_core::systems::NilTranslation;
use recur_core::{iterate, Observable, SkewForm, SystemSpec, TorusCoord};

fn gowers(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut g = c.benchmark_group("gowers");
    for (n, k) in [(1024, 2), (256, 3), (64, 4)] {
        let f = ComplexSignal::random_disc(n, &mut rng).unwrap();
        g.bench_with_input(BenchmarkId::new(format!("recursive_u{k}"), n), &f, |b, f| b.iter(|| gowers_norm(f, k).unwrap()));
    }
    let f = ComplexSignal::random_disc(1 << 14, &mut rng).unwrap();
    g.bench_function("spectral_u2/16384", |b| b.iter(|| gowers_u2_spectral(&f)));
    g.finish();
}

fn iterate_closed_form(c: &mut Criterion) {
    let alpha = TorusCoord::GOLDEN;
    let systems = [
        ("skew", SystemSpec::SkewTorus { alpha, form: SkewForm::Plain }),
        ("skew3", SystemSpec::Skew3Torus { alpha }),
        (
            "heisenberg",
            SystemSpec::heisenberg(NilTranslation { a1: alpha, a2: TorusCoord::SQRT2_MINUS_1, a3: TorusCoord::SQRT3_MINUS_1.widen() }),
        ),
    ];
    let mut g = c.benchmark_group("iterate");
    for (name, sys) in &systems {
        let p = sys.origin();
        g.bench_function(*name, |b| b.iter(|| iterate(sys, &p, black_box(1_000_000_007)).unwrap()));
    }
    g.finish();
}

fn apcount(c: &mut Criterion) {
    let mut g = c.benchmark_group("apcount");
    for l in [729u64, 6561] {
        let e = behrend_set(l).unwrap();
        g.bench_with_input(BenchmarkId::new("behrend_k3", l), &e, |b, e| b.iter(|| count_aps_by_difference(e, 3).unwrap()));
    }
    g.bench_function("counterexample/16", |b| b.iter(|| triple_counterexample(black_box(16)).unwrap()));
    g.finish();
}

fn cube(c: &mut Criterion) {
    let sys = SystemSpec::rotation(TorusCoord::GOLDEN);
    let ind = Observable::arc_indicator(IntervalUnion::from_f64(0.0, 0.4).unwrap());
    let eval = Evaluation::Integrated { grid: 4096, base: Some(ind.clone()) };
    let fs = vec![ind; 3];
    let mut g = c.benchmark_group("cube");
    g.sample_size(10);
    for n in [200u64, 1000] {
        g.bench_with_input(BenchmarkId::new("arc_k2", n), &n, |b, &n| b.iter(|| cube_average(&sys, &fs, 2, n, &eval).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, gowers, iterate_closed_form, apcount, cube);
criterion_main!(benches);
