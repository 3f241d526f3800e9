//! Sequential weighted sampling without replacement.
//!
//! [`SumTree`] is a complete binary tree of partial sums over the item
//! weights. Every internal node is recomputed from its two children on
//! update, so removing an item and later restoring its weight reproduces the
//! original tree bit for bit. Draws and updates are `O(log n)`.

use rand::Rng;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(weights: &[f64]) -> Self {
        let leaves = weights.len().max(1).next_power_of_two();
        let mut nodes = vec![0.0; 2 * leaves];
        nodes[leaves..leaves + weights.len()].copy_from_slice(weights);
        for i in (1..leaves).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        SumTree { leaves, nodes }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, w: f64) {
        let mut node = self.leaves + i;
        self.nodes[node] = w;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Finds the item whose cumulative interval contains `target`,
    /// `0 <= target < total`. Never returns a zero-weight leaf while the
    /// total is positive.
    pub fn find(&self, mut target: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            node = if right <= 0.0 || (target < left && left > 0.0) {
                2 * node
            } else {
                target -= left;
                2 * node + 1
            };
        }
        node - self.leaves
    }

    /// Draws one item proportionally to the current weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total();
        if !(total > 0.0) {
            return None;
        }
        let u: f64 = rng.random();
        Some(self.find(u * total))
    }
}

/// Draws `k` distinct items, each proportionally to its weight among the
/// items not yet drawn. The result is in draw order.
pub fn weighted_draw_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(invalid("weights", format!("weights must be finite and non-negative (got {w})")));
    }
    let positive = weights.iter().filter(|w| **w > 0.0).count();
    if positive < k {
        return Err(Error::InsufficientMass { available: positive, requested: k });
    }
    let mut tree = SumTree::new(weights);
    Ok(draw_from_tree(&mut tree, k, rng))
}

/// Draws `k` items from `tree`, then restores the removed leaves.
pub(crate) fn draw_from_tree<R: Rng + ?Sized>(tree: &mut SumTree, k: usize, rng: &mut R) -> Vec<usize> {
    let mut drawn = Vec::with_capacity(k);
    let mut removed = Vec::with_capacity(k);
    for _ in 0..k {
        let Some(i) = tree.sample(rng) else { break };
        removed.push((i, tree.get(i)));
        tree.set(i, 0.0);
        drawn.push(i);
    }
    for &(i, w) in removed.iter().rev() {
        tree.set(i, w);
    }
    drawn
}
