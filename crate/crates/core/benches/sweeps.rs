//! Sequential against parallel execution for the main sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hopflab::charts::ManifoldSpec;
use hopflab::complexgeom::{chern_ricci_and_scalar, volume, VolumeQuadrature};
use hopflab::convergence::c0_distance_check;
use hopflab::exec::{map_indexed, Execution};
use hopflab::field::VariationField;
use hopflab::sampling::random_points;
use hopflab::stability::{index_form_quadrature, stability_radius_scan, stability_spectrum, FiberInclusion, Ray};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn chern_sweep(c: &mut Criterion) {
    let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
    let points = random_points(&spec, 1, 2000, 3.0);
    let mut group = c.benchmark_group("chern_scalar_2000_points");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| map_indexed(exec, points.len(), |i| chern_ricci_and_scalar(&points[i], &spec).unwrap().scalar))
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let f = FiberInclusion::surface_like(ManifoldSpec::hopf_surface(1.0).unwrap(), 0.0, 2.0).unwrap();
    let mut group = c.benchmark_group("stability_spectrum_k8");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| stability_spectrum(&f, 8, exec).unwrap()));
    }
    group.finish();
}

fn quadrature(c: &mut Criterion) {
    let f = FiberInclusion::surface_like(ManifoldSpec::hopf_surface(0.5).unwrap(), 0.7, -1.1).unwrap();
    let v = VariationField::random(4, 8, 3, 0);
    let mut group = c.benchmark_group("index_form_quadrature_k8");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| index_form_quadrature(&f, &v, exec).unwrap()));
    }
    group.finish();
}

fn radius_scan(c: &mut Criterion) {
    let spec = ManifoldSpec::hopf_surface(1.0).unwrap();
    let mut group = c.benchmark_group("radius_scan_300_rows");
    group.sample_size(20);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| stability_radius_scan(&spec, Ray::along_imaginary(), 2, 0.01, 3.0, exec).unwrap())
        });
    }
    group.finish();
}

fn volume_and_c0(c: &mut Criterion) {
    let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
    let q = VolumeQuadrature { radial_nodes: 20_000, angular_nodes: 8, cutoff: 1e3 };
    let grid = random_points(&ManifoldSpec::hopf_surface(0.0).unwrap(), 2, 2000, 3.0);
    let mut group = c.benchmark_group("volume_and_c0");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("volume", name), |b| b.iter(|| volume(&spec, q, exec).unwrap()));
        group.bench_function(BenchmarkId::new("c0_2000_points", name), |b| {
            b.iter(|| c0_distance_check(&grid, 0.5, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, chern_sweep, spectrum, quadrature, radius_scan, volume_and_c0);
criterion_main!(benches);
