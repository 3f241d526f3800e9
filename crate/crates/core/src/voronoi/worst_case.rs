//! Weighted planar configuration with a quadratic number of order-3 regions.
//!
//! `n/2` heavy sites of equal weight sit on a short vertical segment at
//! `x = 0`; `n/2` light sites sit on the horizontal line through its middle.
//! Seen from far away the heavy sites are ordered by vertical offset alone,
//! so their order-2 diagram is a stack of horizontal bands. Each light site
//! owns a small disk (where it beats every heavy site) of a common radius
//! `R`; light weights grow towards the heavy segment to keep `R` fixed. The
//! segment is shorter than `2R`, so every disk meets every band, and inside
//! band `j` of disk `i` the three nearest sites are `{L_i, H_j, H_{j+1}}`:
//! `(n/2)·(n/2 - 1)` distinct order-3 regions.

use serde::{Deserialize, Serialize};

use super::WeightedSites;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseParams {
    /// Closest horizontal (torus) distance between a light site and the
    /// heavy segment.
    pub margin: f64,
    /// Disk radius as a fraction of the light-site spacing; below 1/2 the
    /// disks are disjoint.
    pub disk_fraction: f64,
    /// Heavy segment length as a fraction of the disk radius; below 2 every
    /// disk meets every band.
    pub span_fraction: f64,
    pub line_y: f64,
}

impl Default for WorstCaseParams {
    fn default() -> Self {
        WorstCaseParams { margin: 0.25, disk_fraction: 1.0 / 3.0, span_fraction: 1.2, line_y: 0.5 }
    }
}

/// [`generate_worst_case_sites_with`] using the default parameters.
pub fn generate_worst_case_sites(n: usize) -> Result<WeightedSites> {
    generate_worst_case_sites_with(n, &WorstCaseParams::default())
}

/// Builds the two-dimensional configuration for even `n >= 4`. Heavy sites
/// come first (indices `0..n/2`, bottom to top), then the light sites from
/// left to right.
pub fn generate_worst_case_sites_with(n: usize, params: &WorstCaseParams) -> Result<WeightedSites> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid("n", format!("worst-case construction needs even n >= 4 (got {n})")));
    }
    if !(params.margin > 0.0 && params.margin < 0.5) {
        return Err(invalid("margin", "must lie in (0, 0.5)"));
    }
    if !(params.disk_fraction > 0.0 && params.disk_fraction < 0.5) {
        return Err(invalid("disk_fraction", "must lie in (0, 0.5)"));
    }
    if !(params.span_fraction > 0.0 && params.span_fraction < 2.0) {
        return Err(invalid("span_fraction", "must lie in (0, 2)"));
    }
    let half = n / 2;
    let spacing = (1.0 - 2.0 * params.margin) / (half - 1) as f64;
    let xs: Vec<f64> = (0..half).map(|i| params.margin + spacing * i as f64).collect();
    let reach = |x: f64| x.min(1.0 - x);
    let far = xs.iter().copied().map(reach).fold(0.0, f64::max);
    let radius = params.disk_fraction * spacing;
    // a light site at distance X with normalized weight ω beats the heavy
    // sites within radius ≈ X·ω/ω_heavy
    let omega_heavy = far / radius;
    let span = params.span_fraction * radius;

    let mut positions = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(n);
    for j in 0..half {
        let y = params.line_y - span / 2.0 + span * j as f64 / (half - 1) as f64;
        positions.extend_from_slice(&[0.0, y]);
        weights.push(omega_heavy * omega_heavy);
    }
    for &x in &xs {
        let omega = far / reach(x);
        positions.extend_from_slice(&[x, params.line_y]);
        weights.push(omega * omega);
    }
    // the farthest light site has weight exactly 1
    let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    weights.iter_mut().for_each(|w| *w /= min);
    WeightedSites::from_flat(2, positions, weights)
}
