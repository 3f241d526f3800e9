use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geosat::genmodel::{sample_geometric_formula, sample_nonuniform_formula, GeometricParams};
use geosat::structure::{check_expansion_exact, incidence_graph, ExactOptions};
use geosat::voronoi::{count_regions_monte_carlo, CensusOptions};
use geosat::weights::{power_law_weights, WeightSequence};
use geosat::{Execution, GeometrySpec, WeightedSites};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn census(c: &mut Criterion) {
    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    let g = GeometrySpec::torus(2, 2).unwrap();
    let sites = WeightedSites::random(&WeightSequence::uniform(1000).unwrap(), 2, 1).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "n=1000,k=2,200k"), |b| {
            let opts = CensusOptions { execution: exec, ..Default::default() };
            b.iter(|| count_regions_monte_carlo(&sites, 2, 200_000, 7, &g, opts).unwrap().count)
        });
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generation");
    group.sample_size(10);
    let n = 100_000;
    let ws = power_law_weights(n, 2.5).unwrap();
    let params =
        GeometricParams { n: 10_000, m: 10_000, k: 3, geometry: GeometrySpec::torus(2, 2).unwrap(), temperature: 0.0 };
    let uniform = WeightSequence::uniform(10_000).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "power-law n=1e5,m=4e5"), |b| {
            b.iter(|| sample_nonuniform_formula(n, 4 * n, 3, &ws, 3, exec).unwrap().len())
        });
        group.bench_function(BenchmarkId::new(name, "geometric T=0 n=m=1e4"), |b| {
            b.iter(|| sample_geometric_formula(params, &uniform, 3, exec).unwrap().formula.len())
        });
        let warm = GeometricParams { n: 2000, m: 2000, temperature: 0.5, ..params };
        let uniform2k = WeightSequence::uniform(2000).unwrap();
        group.bench_function(BenchmarkId::new(name, "geometric T=0.5 n=m=2000"), |b| {
            b.iter(|| sample_geometric_formula(warm, &uniform2k, 3, exec).unwrap().formula.len())
        });
    }
    group.finish();
}

fn expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("expansion");
    group.sample_size(10);
    let f =
        sample_nonuniform_formula(40, 40, 3, &power_law_weights(40, 4.0).unwrap(), 5, Execution::Sequential).unwrap();
    let gph = incidence_graph(&f);
    for (name, exec) in MODES {
        let opts = ExactOptions { execution: exec, ..Default::default() };
        group.bench_function(BenchmarkId::new(name, "exact r=5 m=40"), |b| {
            b.iter(|| check_expansion_exact(&gph, 5, 0.5, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, census, generation, expansion);
criterion_main!(benches);
