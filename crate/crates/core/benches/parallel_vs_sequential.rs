//! Parallel vs sequential throughput of the three hot loops: sphere
//! quadrature, Monte Carlo volume sampling and the CG solve.
//!
//! With the `parallel` feature each workload runs on the default rayon pool
//! and on a one-thread pool; build with `--no-default-features` to time the
//! plain sequential code path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use startrace::coarea::{mc_volume_oracle, LevelFunction};
use startrace::dirichlet::{solve_lifted, DirichletProblem, Forcing};
use startrace::function_spaces::FunctionSpec;
use startrace::star_geometry::{BoundaryProfile, StarDomain, StarSurface};
use startrace::Dim;

type Workload = Box<dyn Fn() + Send + Sync>;

fn workloads() -> Vec<(&'static str, Workload)> {
    let trig = BoundaryProfile::new(Dim::Three, "trig:1,0.3,0.1".parse().unwrap()).unwrap();
    let q = trig.quadrature(256).unwrap();
    let surface = StarSurface::unit(trig.clone());
    let sphere = move || {
        black_box(
            surface
                .integrate(&q, |x| (x[0] * x[1]).cos() * (-x[2] * x[2]).exp())
                .unwrap(),
        );
    };

    let level = LevelFunction::new(BoundaryProfile::new(Dim::Two, "cusp:1,0,0.5".parse().unwrap()).unwrap());
    let mc = move || {
        black_box(mc_volume_oracle(&level, 1.0, 200_000, 3).unwrap());
    };

    let problem = DirichletProblem::new(
        StarDomain::new(BoundaryProfile::constant(Dim::Two, 1.0).unwrap()),
        Forcing::Field {
            function: FunctionSpec::Constant { value: 1.0 },
        },
        FunctionSpec::Constant { value: 0.0 },
    )
    .unwrap();
    let cg = move || {
        black_box(solve_lifted(&problem, 1.0 / 64.0, 1e-10).unwrap());
    };

    vec![
        ("sphere_integral", Box::new(sphere)),
        ("mc_volume", Box::new(mc)),
        ("cg_solve", Box::new(cg)),
    ]
}

#[cfg(feature = "parallel")]
fn bench(c: &mut Criterion) {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let threads = rayon::current_num_threads();
    for (name, work) in workloads() {
        let mut g = c.benchmark_group(name);
        g.sample_size(10);
        g.bench_function(criterion::BenchmarkId::new("global-pool", threads), |b| b.iter(&*work));
        g.bench_function("single-thread-pool", |b| b.iter(|| one.install(&*work)));
        g.finish();
    }
}

#[cfg(not(feature = "parallel"))]
fn bench(c: &mut Criterion) {
    for (name, work) in workloads() {
        let mut g = c.benchmark_group(name);
        g.sample_size(10);
        g.bench_function("sequential", |b| b.iter(&*work));
        g.finish();
    }
}

criterion_group!(benches, bench);
criterion_main!(benches);
