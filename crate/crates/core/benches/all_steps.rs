//! Sequential against rayon execution of the frequency-parallel parts.
//!
//! `cargo bench -p wavecouple`; with `--no-default-features` both variants
//! run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use std::sync::Arc;
use wavecouple::bem::{assemble_block, BoundarySpaces};
use wavecouple::coupled::{solve_reduction_to_boundary, SolverOptions};
use wavecouple::cq::{cq_weights, Contour, Scalar, TimeGrid};
use wavecouple::fem::{ConstantCoefficients, FemSystem};
use wavecouple::mesh::{extract_boundary, generate_square_mesh};
use wavecouple::parallel::{current_threads, Execution};
use wavecouple::scenarios::{plane_wave_incident, CausalSignal, PlaneWave};
use wavecouple::C64;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn reduction(c: &mut Criterion) {
    let mesh = generate_square_mesh(1);
    let bmesh = extract_boundary(&mesh).unwrap();
    let fem = Arc::new(FemSystem::assemble(&mesh, &bmesh, &ConstantCoefficients::diagonal(1.5, 0.75), 1).unwrap());
    let d = [1.0, 0.0];
    let wave = plane_wave_incident(d, CausalSignal::interior_default(), PlaneWave::min_delay(d, &bmesh)).unwrap();
    let grid = TimeGrid::from_final_time(2.0, 40).unwrap();
    let problem = wave.problem(fem, grid, vec![[1.5, 0.0]], Execution::Parallel).unwrap();

    let mut g = c.benchmark_group(format!("reduction_to_boundary/{}_threads", current_threads()));
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = SolverOptions {
            exec,
            ..Default::default()
        };
        g.bench_function(name, |b| b.iter(|| solve_reduction_to_boundary(black_box(&problem), &opts).unwrap()));
    }
    g.finish();
}

fn bem_block(c: &mut Criterion) {
    let mut g = c.benchmark_group("bem_block");
    g.sample_size(10);
    for level in [1u32, 2] {
        let b = extract_boundary(&generate_square_mesh(level)).unwrap();
        let sp = BoundarySpaces::new(&b, 1).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, b.n_panels()), &level, |bch, _| {
                bch.iter(|| assemble_block(&b, &sp, black_box(C64::new(1.0, 2.0)), exec).unwrap())
            });
        }
    }
    g.finish();
}

fn weights(c: &mut Criterion) {
    let grid = TimeGrid::new(0.01, 512).unwrap();
    let contour = Contour::for_weights(&grid);
    let f = Scalar::real(|s: C64| 1.0 / (s * s + 1.0).sqrt());
    let mut g = c.benchmark_group("cq_weights");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| cq_weights(&f, &grid, &contour, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, reduction, bem_block, weights);
criterion_main!(benches);
