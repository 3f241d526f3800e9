use geosat::voronoi::{
    compute_r_a, count_regions_monte_carlo, generate_worst_case_sites, relevance_certificate, CensusOptions, Relevance,
    DEFAULT_GRID_RESOLUTION, DEFAULT_RADII,
};
use geosat::weights::{power_law_weights, WeightSequence};
use geosat::{GeometrySpec, WeightedSites};

#[test]
fn worst_case_growth() {
    let g = GeometrySpec::torus(2, 2).unwrap();
    let count = |n: usize, k: usize| {
        let s = generate_worst_case_sites(n).unwrap();
        count_regions_monte_carlo(&s, k, 1_000_000, 1, &g, CensusOptions::default()).unwrap().count
    };
    let (c10, c20) = (count(10, 3), count(20, 3));
    assert!(c20 as f64 >= 3.0 * c10 as f64, "{c10} -> {c20}");
    assert!(count(20, 1) >= 20);
}

#[test]
fn monte_carlo_keys_are_relevant() {
    let g = GeometrySpec::torus(2, 2).unwrap();
    for (seed, ws) in [(1, WeightSequence::uniform(50).unwrap()), (2, power_law_weights(50, 2.5).unwrap())] {
        let sites = WeightedSites::random(&ws, 2, seed).unwrap();
        let census = count_regions_monte_carlo(&sites, 2, 50_000, seed, &g, CensusOptions::default()).unwrap();
        assert!(census.count as u64 <= 50 * 49 / 2);
        for (key, witness) in &census.regions {
            let cert = relevance_certificate(
                key,
                &sites,
                &g,
                DEFAULT_GRID_RESOLUTION,
                DEFAULT_RADII,
                std::slice::from_ref(&witness.point),
            )
            .unwrap();
            match cert {
                Relevance::Relevant { radius, .. } => assert!(radius >= compute_r_a(key, &sites, &g).unwrap()),
                Relevance::Unknown => panic!("{key} discovered but not certified"),
            }
        }
    }
}

#[test]
fn one_dimensional_region_count_is_n() {
    // on the circle the k nearest sites are always k consecutive ones, and
    // every run of k consecutive sites owns an interval: exactly n regions
    let g = GeometrySpec::torus(1, 2).unwrap();
    for n in [20, 40, 80] {
        let sites = WeightedSites::random(&WeightSequence::uniform(n).unwrap(), 1, n as u64).unwrap();
        for k in [2, 3] {
            let c = count_regions_monte_carlo(&sites, k, 1_000_000, 3, &g, CensusOptions::default()).unwrap();
            assert_eq!(c.count, n, "n = {n}, k = {k}");
        }
    }
}
