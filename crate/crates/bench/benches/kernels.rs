use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gelfand::fixtures::random_spec;
use gelfand::format::pair_to_text;
use gelfand::seed::stream;
use gelfand::verify::{functional_equation_residuals, sample_job_points, KernelMatrixJob};
use gelfand::{
    expand_kernel, gauss_jacobi, kernel_psd_check, sample_sphere_points, FieldSampler, GroupDescriptor, PairDescriptor,
};

fn quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("gauss_jacobi");
    for order in [8usize, 32, 128] {
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &k| {
            b.iter(|| gauss_jacobi(black_box(k), 0.5, -0.5).unwrap())
        });
    }
    group.finish();
}

fn expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("expand");
    let g = GroupDescriptor::Euclidean { k: 1 };
    for pair in [PairDescriptor::RealSphere { d: 3 }, PairDescriptor::ComplexSphere { q: 3 }] {
        let spec = random_spec(&pair, g, 15, 6, &mut stream(1)).unwrap();
        let indices = pair.enumerate_indices(6);
        let rule = pair.default_rule(6).unwrap();
        let us: Vec<_> = {
            let mut rng = stream(2);
            (0..5).map(|_| g.sample(&mut rng, 5.0)).collect()
        };
        group.bench_function(pair_to_text(&pair), |b| {
            b.iter(|| expand_kernel(&spec, black_box(&indices), &us, &rule).unwrap())
        });
    }
    group.finish();
}

fn psd_check(c: &mut Criterion) {
    let pair = PairDescriptor::RealSphere { d: 2 };
    let g = GroupDescriptor::Euclidean { k: 1 };
    let spec = random_spec(&pair, g, 8, 5, &mut stream(3)).unwrap();
    c.bench_function("kernel_psd_check 10x30", |b| {
        b.iter(|| {
            let job = KernelMatrixJob {
                kernel: &spec,
                n_points: 30,
                trials: 10,
                seed: black_box(4),
                group_half_width: None,
                tolerance: None,
            };
            kernel_psd_check(&job).unwrap()
        })
    });
}

fn simulation(c: &mut Criterion) {
    let pair = PairDescriptor::RealSphere { d: 2 };
    let g = GroupDescriptor::Euclidean { k: 1 };
    let spec = random_spec(&pair, g, 8, 5, &mut stream(5)).unwrap();
    let points = sample_job_points(&pair, g, 50, 5.0, 6);
    c.bench_function("field sampler factor 50", |b| {
        b.iter(|| FieldSampler::new(&spec, black_box(points.clone())).unwrap())
    });
    let sampler = FieldSampler::new(&spec, points).unwrap();
    c.bench_function("field draw 50", |b| b.iter(|| sampler.draw(black_box(7))));
}

fn product_formula(c: &mut Criterion) {
    let pair = PairDescriptor::RealSphere { d: 3 };
    let indices = pair.enumerate_indices(5);
    let xy = sample_sphere_points(&pair, 2, 8).unwrap();
    c.bench_function("functional equation 1e4 samples", |b| {
        b.iter(|| functional_equation_residuals(&pair, &indices, &xy[0], &xy[1], 10_000, black_box(9)).unwrap())
    });
}

criterion_group!(benches, quadrature, expansion, psd_check, simulation, product_formula);
criterion_main!(benches);
