use calibra::calibration_builder::{build_field, select_parameters, Variant};
use calibra::calibration_verify::{verify_field, VerifyOptions};
use calibra::counterexample::{default_eps, find_energy_decrease, solve_w0_at};
use calibra::fixtures;
use calibra::par::Exec;
use calibra::steklov_capacity::{compute_k, DomainSpec};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn verify(cr: &mut Criterion) {
    let c = fixtures::build_candidate(&fixtures::circle_arc()).unwrap();
    let p = select_parameters(&c, Variant::Dirichlet, 0.1, None).unwrap();
    let field = build_field(&c, p, 0.004).unwrap();
    let mut g = cr.benchmark_group("verify_field_16");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = VerifyOptions { grid: 16, st_samples: 16, exec, ..VerifyOptions::default() };
        g.bench_function(name, |b| b.iter(|| black_box(verify_field(&field, &opts)).pass));
    }
    g.finish();
}

fn steklov(cr: &mut Criterion) {
    let d = DomainSpec::rectangle(1.0, 1.0);
    let mut g = cr.benchmark_group("steklov_unit_square_h32");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| compute_k(black_box(&d), 1.0 / 32.0, exec).unwrap().k));
    }
    g.finish();
}

fn energy_sweep(cr: &mut Criterion) {
    let w = solve_w0_at(16).unwrap();
    let eps = default_eps();
    let mut g = cr.benchmark_group("energy_sweep");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| find_energy_decrease(9.55, 4.776, &w, black_box(&eps), exec).unwrap().slope));
    }
    g.finish();
}

criterion_group!(benches, verify, steklov, energy_sweep);
criterion_main!(benches);
