//! Balls-into-bins simulation.

use geosat::rng::{stream, Domain};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

/// Throws `balls` independent balls into bins with the given probabilities
/// and returns the largest bin occupancy.
pub fn balls_into_bins(balls: u64, probabilities: &[f64], seed: u64) -> anyhow::Result<u64> {
    if probabilities.is_empty() {
        anyhow::bail!("need at least one bin");
    }
    if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        anyhow::bail!("bin probabilities must be finite and non-negative");
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        anyhow::bail!("bin probabilities sum to {total}, expected 1 within 1e-9");
    }
    let mut load = vec![0u64; probabilities.len()];
    let mut rng = stream(seed, Domain::Experiment, 0);
    let first = probabilities[0];
    if probabilities.iter().all(|&p| p == first) {
        for _ in 0..balls {
            load[rng.random_range(0..probabilities.len())] += 1;
        }
    } else {
        let dist = WeightedIndex::new(probabilities)?;
        for _ in 0..balls {
            load[dist.sample(&mut rng)] += 1;
        }
    }
    Ok(load.into_iter().max().unwrap_or(0))
}

/// `⌈ln n / (2 ln ln n)⌉`, a conservative lower bound on the typical
/// maximum load of `n` balls in `n` uniform bins.
pub fn max_load_threshold(n: u64) -> u64 {
    let ln = (n as f64).ln();
    (ln / (2.0 * ln.ln())).ceil() as u64
}
