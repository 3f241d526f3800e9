//! Weighted order-k Voronoi machinery: k-nearest queries, Monte Carlo region
//! counting, relevance certificates and the worst-case site construction.

mod census;
pub(crate) mod knn;
mod relevance;
mod worst_case;

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::geometry::TorusPoint;
use crate::rng::{stream, Domain};
use crate::weights::{normalize_min_one, WeightSequence};

pub use census::{count_regions_monte_carlo, CensusOptions, RegionCensus, RegionWitness};
pub use knn::{k_nearest_sites, NearestSites, Neighbors, SearchStrategy};
pub use relevance::{compute_r_a, relevance_certificate, Relevance, DEFAULT_GRID_RESOLUTION, DEFAULT_RADII};
pub use worst_case::{generate_worst_case_sites, generate_worst_case_sites_with, WorstCaseParams};

/// A canonically sorted set of distinct site (or variable) indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionKey(SmallVec<[u32; 4]>);

impl RegionKey {
    /// Sorts the indices; fails on duplicates.
    pub fn new(indices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut v: SmallVec<[u32; 4]> = indices.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("key", "indices must be distinct"));
        }
        Ok(RegionKey(v))
    }

    pub(crate) fn from_sorted(v: SmallVec<[u32; 4]>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        RegionKey(v)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

impl fmt::Display for RegionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (j, i) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// Sites with positions and multiplicative weights (minimum weight 1).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSites {
    dim: usize,
    positions: Vec<f64>,
    weights: Vec<f64>,
    omega: Vec<f64>,
    total: f64,
}

/// On-disk form of a site set.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteSetFile {
    dim: usize,
    positions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl WeightedSites {
    /// Builds a site set. Weights must be positive with minimum exactly 1.
    pub fn new(points: Vec<TorusPoint>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(invalid("weights", format!("{} points but {} weights", points.len(), weights.len())));
        }
        let mut positions = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            positions.extend_from_slice(p.coords());
        }
        Self::from_flat(dim, positions, weights)
    }

    pub(crate) fn from_flat(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        if weights.is_empty() {
            return Err(invalid("n", "need at least one site"));
        }
        if let Some(c) = positions.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::OutOfDomain { what: "site coordinate", value: *c, reason: "must lie in [0, 1)".into() });
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(invalid("weights", "site weights must be positive and finite"));
        }
        let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
        if (min - 1.0).abs() > 1e-12 {
            return Err(invalid("weights", format!("site weights must have minimum 1 (got {min}); normalize first")));
        }
        let omega = weights.iter().map(|w| w.powf(1.0 / dim as f64)).collect();
        let total = crate::weights::kahan_sum(weights.iter().copied());
        Ok(WeightedSites { dim, positions, weights, omega, total })
    }

    pub fn unweighted(points: Vec<TorusPoint>, dim: usize) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n], dim)
    }

    /// Uniform random positions with the given weights, min-normalized.
    pub fn random(weights: &WeightSequence, dim: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        let ws = normalize_min_one(weights);
        let mut rng = stream(seed, Domain::SitePositions, 0);
        let positions = (0..ws.len() * dim).map(|_| rng.random::<f64>()).collect();
        Self::from_flat(dim, positions, ws.weights().to_vec())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> TorusPoint {
        TorusPoint::new(self.position(i).to_vec()).expect("site coordinates are validated")
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized weight `ω_i = w_i^{1/d}`.
    pub fn omega(&self, i: usize) -> f64 {
        self.omega[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|w| *w == 1.0)
    }

    pub fn to_json(&self) -> String {
        let file = SiteSetFile {
            dim: self.dim,
            positions: (0..self.len()).map(|i| self.position(i).to_vec()).collect(),
            weights: self.weights.clone(),
        };
        serde_json::to_string_pretty(&file).expect("site sets serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SiteSetFile =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), reason: e.to_string() })?;
        let points = file.positions.into_iter().map(TorusPoint::new).collect::<Result<Vec<_>>>()?;
        Self::new(points, file.weights, file.dim)
    }
}
