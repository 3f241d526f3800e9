use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::knn::TopK;
use super::{NearestSites, RegionKey, SearchStrategy, WeightedSites};
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::geometry::{GeometrySpec, TorusPoint};
use crate::rng::{stream, Domain};

/// Sample points per RNG stream. Fixed so that a longer run extends, rather
/// than reshuffles, a shorter one.
const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, Default)]
pub struct CensusOptions {
    pub execution: Execution,
    pub search: SearchStrategy,
}

/// First sample that landed in a region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionWitness {
    pub sample_index: u64,
    pub point: TorusPoint,
}

/// Distinct order-k regions hit by uniform sample points. A lower bound on
/// the number of non-empty regions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCensus {
    pub samples: u64,
    pub count: usize,
    /// Regions already discovered within the first half of the samples.
    pub half_budget_count: usize,
    pub regions: BTreeMap<RegionKey, RegionWitness>,
}

impl RegionCensus {
    /// `half_budget_count / count`; close to 1 when discovery has saturated.
    pub fn stability(&self) -> f64 {
        if self.count == 0 {
            1.0
        } else {
            self.half_budget_count as f64 / self.count as f64
        }
    }
}

/// Counts the distinct weighted order-k regions hit by `samples` uniform
/// random points. Deterministic per seed and independent of `opts.execution`.
pub fn count_regions_monte_carlo(
    sites: &WeightedSites,
    k: usize,
    samples: u64,
    seed: u64,
    g: &GeometrySpec,
    opts: CensusOptions,
) -> Result<RegionCensus> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    let engine = NearestSites::new(sites, *g, opts.search)?;
    engine.check_k(k)?;
    let dim = g.dim;
    let batches = samples.div_ceil(BATCH) as usize;

    let partial = opts.execution.map_indexed(batches, |b| {
        let start = b as u64 * BATCH;
        let end = (start + BATCH).min(samples);
        let mut rng = stream(seed, Domain::RegionSamples, b as u64);
        let mut top = TopK::new(k);
        let mut point = vec![0.0; dim];
        let mut found: HashMap<RegionKey, (u64, Vec<f64>)> = HashMap::new();
        for s in start..end {
            point.iter_mut().for_each(|c| *c = rng.random::<f64>());
            engine.query_into(&point, &mut top);
            found.entry(top.key()).or_insert_with(|| (s, point.clone()));
        }
        found
    });

    let mut merged: HashMap<RegionKey, (u64, Vec<f64>)> = HashMap::new();
    for part in partial {
        for (key, hit) in part {
            merged
                .entry(key)
                .and_modify(|cur| {
                    if hit.0 < cur.0 {
                        *cur = hit.clone();
                    }
                })
                .or_insert(hit);
        }
    }
    let half = samples / 2;
    let half_budget_count = merged.values().filter(|(s, _)| *s < half.max(1)).count();
    let regions: BTreeMap<RegionKey, RegionWitness> = merged
        .into_iter()
        .map(|(key, (sample_index, coords))| {
            let point = TorusPoint::new(coords).expect("uniform samples lie in [0,1)");
            (key, RegionWitness { sample_index, point })
        })
        .collect();
    Ok(RegionCensus { samples, count: regions.len(), half_budget_count, regions })
}
