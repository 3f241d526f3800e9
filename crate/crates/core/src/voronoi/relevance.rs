use super::{RegionKey, WeightedSites};
use crate::error::{invalid, Error, Result};
use crate::geometry::{GeometrySpec, TorusPoint};

pub const DEFAULT_GRID_RESOLUTION: usize = 64;
pub const DEFAULT_RADII: usize = 16;
/// Upper bound on grid points per radius, whatever the dimension.
const MAX_GRID_POINTS: usize = 1 << 18;

/// Outcome of a relevance search. `Unknown` is inconclusive, not a refutation.
#[derive(Debug, Clone, PartialEq)]
pub enum Relevance {
    Relevant { point: TorusPoint, radius: f64 },
    Unknown,
}

fn check_key(a: &RegionKey, sites: &WeightedSites, g: &GeometrySpec) -> Result<()> {
    if sites.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: sites.dim() });
    }
    if a.is_empty() {
        return Err(invalid("A", "key must be non-empty"));
    }
    if let Some(&i) = a.indices().iter().find(|&&i| i as usize >= sites.len()) {
        return Err(Error::IndexOutOfRange { index: i as usize, len: sites.len() });
    }
    Ok(())
}

/// Minimum-weight member of `a`, ties by smaller index.
fn anchor(a: &RegionKey, sites: &WeightedSites) -> usize {
    a.indices()
        .iter()
        .map(|&i| i as usize)
        .min_by(|&x, &y| sites.weight(x).total_cmp(&sites.weight(y)).then(x.cmp(&y)))
        .expect("non-empty key")
}

/// `max_i dist(s_1, s_i) / (ω_1 + ω_i)` over the key, `s_1` its lightest site.
pub fn compute_r_a(a: &RegionKey, sites: &WeightedSites, g: &GeometrySpec) -> Result<f64> {
    check_key(a, sites, g)?;
    let s1 = anchor(a, sites);
    Ok(a.indices()
        .iter()
        .map(|&i| i as usize)
        .map(|i| g.distance_unchecked(sites.position(s1), sites.position(i)) / (sites.omega(s1) + sites.omega(i)))
        .fold(0.0, f64::max))
}

/// Smallest admissible radius at `p`, if `p` witnesses relevance.
fn witness_radius(
    a: &RegionKey,
    s1: usize,
    r_a: f64,
    p: &[f64],
    sites: &WeightedSites,
    g: &GeometrySpec,
) -> Option<f64> {
    let radius = r_a.max(g.distance_unchecked(sites.position(s1), p) / sites.omega(s1));
    let outside_ok = (0..sites.len())
        .filter(|&i| !a.contains(i as u32))
        .all(|i| g.distance_unchecked(sites.position(i), p) > sites.omega(i) * radius);
    outside_ok.then_some(radius)
}

/// Searches for a point `p` and radius `r >= R_A` with `p` inside the weighted
/// ball of the key's lightest site and strictly outside the balls of every
/// non-member. Candidates are the `seeds`, the anchor site itself, then grid
/// points around it at radii `j·R_A`, `j = 1..=radii`. A returned certificate
/// has been checked against the exact conditions.
pub fn relevance_certificate(
    a: &RegionKey,
    sites: &WeightedSites,
    g: &GeometrySpec,
    grid_resolution: usize,
    radii: usize,
    seeds: &[TorusPoint],
) -> Result<Relevance> {
    check_key(a, sites, g)?;
    if grid_resolution == 0 {
        return Err(invalid("grid_resolution", "must be at least 1"));
    }
    let r_a = compute_r_a(a, sites, g)?;
    if r_a == 0.0 && a.len() >= 2 {
        return Err(Error::CoincidentPoints { what: format!("sites of key {a}") });
    }
    let s1 = anchor(a, sites);
    let found = |p: &[f64]| {
        witness_radius(a, s1, r_a, p, sites, g)
            .map(|radius| Relevance::Relevant { point: TorusPoint::wrapped(p.iter().copied()), radius })
    };

    for seed in seeds {
        if seed.dim() != g.dim {
            return Err(Error::DimensionMismatch { expected: g.dim, got: seed.dim() });
        }
        if let Some(hit) = found(seed.coords()) {
            return Ok(hit);
        }
    }
    if let Some(hit) = found(sites.position(s1)) {
        return Ok(hit);
    }
    if r_a == 0.0 {
        return Ok(Relevance::Unknown);
    }

    let dim = g.dim;
    let per_axis = grid_resolution.min((MAX_GRID_POINTS as f64).powf(1.0 / dim as f64) as usize).max(1);
    let center = sites.position(s1);
    let mut p = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    for j in 1..=radii {
        let extent = sites.omega(s1) * j as f64 * r_a;
        let pitch = 2.0 * extent / per_axis as f64;
        idx.iter_mut().for_each(|x| *x = 0);
        loop {
            for t in 0..dim {
                p[t] = (center[t] - extent + (idx[t] as f64 + 0.5) * pitch).rem_euclid(1.0);
            }
            if let Some(hit) = found(&p) {
                return Ok(hit);
            }
            let mut t = 0;
            while t < dim {
                idx[t] += 1;
                if idx[t] < per_axis {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == dim {
                break;
            }
        }
    }
    Ok(Relevance::Unknown)
}
