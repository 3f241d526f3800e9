use smallvec::SmallVec;

use super::{RegionKey, WeightedSites};
use crate::error::{invalid, Error, Result};
use crate::geometry::{GeometrySpec, Ground, TorusPoint};

/// How [`NearestSites`] answers queries. Both strategies return identical
/// answers, including tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    FullScan,
    Grid,
    #[default]
    Auto,
}

/// The `k` weighted-nearest sites of a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub key: RegionKey,
    /// Site indices by increasing weighted distance, ties by smaller index.
    pub order: Vec<usize>,
    pub weighted_distances: Vec<f64>,
}

/// Bounded sorted buffer of `(weighted rank key, index)` pairs.
#[derive(Debug, Clone, Default)]
pub(crate) struct TopK {
    k: usize,
    items: SmallVec<[(f64, u32); 8]>,
}

#[inline]
fn less(a: (f64, u32), b: (f64, u32)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl TopK {
    pub(crate) fn new(k: usize) -> Self {
        TopK { k, items: SmallVec::with_capacity(k) }
    }

    fn clear(&mut self) {
        self.items.clear();
    }

    fn is_full(&self) -> bool {
        self.items.len() == self.k
    }

    fn worst(&self) -> f64 {
        self.items.last().map_or(f64::INFINITY, |x| x.0)
    }

    #[inline]
    fn offer(&mut self, key: f64, idx: u32) {
        let item = (key, idx);
        if self.items.len() < self.k {
            self.items.push(item);
        } else if less(item, *self.items.last().unwrap()) {
            *self.items.last_mut().unwrap() = item;
        } else {
            return;
        }
        let mut j = self.items.len() - 1;
        while j > 0 && less(self.items[j], self.items[j - 1]) {
            self.items.swap(j, j - 1);
            j -= 1;
        }
    }

    pub(crate) fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().map(|x| x.1)
    }

    pub(crate) fn key(&self) -> RegionKey {
        let mut v: SmallVec<[u32; 4]> = self.indices().collect();
        v.sort_unstable();
        RegionKey::from_sorted(v)
    }
}

#[derive(Debug, Clone)]
struct Grid {
    per_axis: usize,
    cell_width: f64,
    cell_start: Vec<u32>,
    cell_sites: Vec<u32>,
    heavy: Vec<u32>,
    /// Largest `ω^p` among sites stored in cells.
    light_omega_key: f64,
}

/// k-nearest query engine over a fixed site set.
#[derive(Debug, Clone)]
pub struct NearestSites<'a> {
    sites: &'a WeightedSites,
    g: GeometrySpec,
    omega_key: Vec<f64>,
    grid: Option<Grid>,
}

impl<'a> NearestSites<'a> {
    pub fn new(sites: &'a WeightedSites, g: GeometrySpec, strategy: SearchStrategy) -> Result<Self> {
        g.validate()?;
        if sites.dim() != g.dim {
            return Err(Error::DimensionMismatch { expected: g.dim, got: sites.dim() });
        }
        let omega_key: Vec<f64> = (0..sites.len()).map(|i| g.scale_to_key(sites.omega(i))).collect();
        let n = sites.len();
        let per_axis = ((n as f64 / 2.0).powf(1.0 / g.dim as f64).floor() as usize).max(1);
        let use_grid = match strategy {
            SearchStrategy::FullScan => false,
            SearchStrategy::Grid => per_axis >= 3,
            SearchStrategy::Auto => n >= 64 && per_axis >= 3,
        };
        let grid = use_grid.then(|| Self::build_grid(sites, &omega_key, per_axis));
        Ok(NearestSites { sites, g, omega_key, grid })
    }

    fn build_grid(sites: &WeightedSites, omega_key: &[f64], per_axis: usize) -> Grid {
        let n = sites.len();
        let dim = sites.dim();
        // the heaviest ~sqrt(n) sites are always scanned so the pruning bound
        // only has to account for the lighter ones
        let mut by_weight: Vec<u32> = (0..n as u32).collect();
        by_weight.sort_by(|&a, &b| omega_key[b as usize].total_cmp(&omega_key[a as usize]).then(a.cmp(&b)));
        let top = omega_key[by_weight[0] as usize];
        let heavy_count = if by_weight.iter().all(|&i| omega_key[i as usize] == top) {
            0
        } else {
            ((n as f64).sqrt().ceil() as usize).min(n - 1)
        };
        let heavy: Vec<u32> = by_weight[..heavy_count].to_vec();
        let light_omega_key = omega_key[by_weight[heavy_count] as usize];
        let mut is_heavy = vec![false; n];
        for &h in &heavy {
            is_heavy[h as usize] = true;
        }

        let cells = per_axis.pow(dim as u32);
        let cell_of = |i: usize| -> usize {
            sites.position(i).iter().rev().fold(0usize, |acc, &x| {
                let c = ((x * per_axis as f64) as usize).min(per_axis - 1);
                acc * per_axis + c
            })
        };
        let mut counts = vec![0u32; cells + 1];
        for i in (0..n).filter(|&i| !is_heavy[i]) {
            counts[cell_of(i) + 1] += 1;
        }
        for c in 0..cells {
            counts[c + 1] += counts[c];
        }
        let cell_start = counts.clone();
        let mut fill = counts;
        let mut cell_sites = vec![0u32; n - heavy_count];
        for i in (0..n).filter(|&i| !is_heavy[i]) {
            let c = cell_of(i);
            cell_sites[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Grid { per_axis, cell_width: 1.0 / per_axis as f64, cell_start, cell_sites, heavy, light_omega_key }
    }

    pub fn sites(&self) -> &WeightedSites {
        self.sites
    }

    pub fn geometry(&self) -> &GeometrySpec {
        &self.g
    }

    pub fn uses_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Weighted rank key of site `i` for point `p` (monotone in weighted distance).
    #[inline]
    pub(crate) fn weighted_key(&self, i: usize, p: &[f64]) -> f64 {
        self.g.rank_key(self.sites.position(i), p) / self.omega_key[i]
    }

    fn full_scan(&self, p: &[f64], top: &mut TopK) {
        top.clear();
        for i in 0..self.sites.len() {
            top.offer(self.weighted_key(i, p), i as u32);
        }
    }

    pub(crate) fn query_into(&self, p: &[f64], top: &mut TopK) {
        match &self.grid {
            None => self.full_scan(p, top),
            Some(grid) => self.grid_query(grid, p, top),
        }
    }

    fn grid_query(&self, grid: &Grid, p: &[f64], top: &mut TopK) {
        top.clear();
        for &i in &grid.heavy {
            top.offer(self.weighted_key(i as usize, p), i);
        }
        let dim = self.g.dim;
        let g_axis = grid.per_axis as i64;
        let h = grid.cell_width;
        let mut home: SmallVec<[i64; 4]> = SmallVec::with_capacity(dim);
        let mut margin = f64::INFINITY;
        for &x in p {
            let c = ((x * grid.per_axis as f64) as i64).min(g_axis - 1);
            let f = x - c as f64 * h;
            margin = margin.min(f.min(h - f)).max(0.0);
            home.push(c);
        }
        let torus = self.g.ground == Ground::Torus;
        let mut offset: SmallVec<[i64; 4]> = SmallVec::from_elem(0, dim);
        for r in 0i64.. {
            if torus && 2 * r + 1 > g_axis {
                self.full_scan(p, top);
                return;
            }
            if !torus && r >= g_axis {
                return;
            }
            if r >= 1 && top.is_full() {
                let lb = (r - 1) as f64 * h + margin;
                let lb_key = self.g.scale_to_key(lb) / grid.light_omega_key;
                if lb_key * (1.0 - 1e-9) > top.worst() {
                    return;
                }
            }
            // odometer over [-r, r]^dim, keeping only the shell max|o| = r
            offset.iter_mut().for_each(|o| *o = -r);
            'cells: loop {
                if offset.iter().any(|o| o.abs() == r) {
                    let mut cell = 0usize;
                    let mut inside = true;
                    for j in (0..dim).rev() {
                        let mut c = home[j] + offset[j];
                        if torus {
                            c = c.rem_euclid(g_axis);
                        } else if c < 0 || c >= g_axis {
                            inside = false;
                            break;
                        }
                        cell = cell * grid.per_axis + c as usize;
                    }
                    if inside {
                        let (s, e) = (grid.cell_start[cell] as usize, grid.cell_start[cell + 1] as usize);
                        for &i in &grid.cell_sites[s..e] {
                            top.offer(self.weighted_key(i as usize, p), i);
                        }
                    }
                }
                let mut j = 0;
                loop {
                    if j == dim {
                        break 'cells;
                    }
                    offset[j] += 1;
                    if offset[j] <= r {
                        break;
                    }
                    offset[j] = -r;
                    j += 1;
                }
            }
        }
    }

    /// The `k` weighted-nearest sites of `p`.
    pub fn query(&self, p: &TorusPoint, k: usize) -> Result<Neighbors> {
        if p.dim() != self.g.dim {
            return Err(Error::DimensionMismatch { expected: self.g.dim, got: p.dim() });
        }
        self.check_k(k)?;
        let mut top = TopK::new(k);
        self.query_into(p.coords(), &mut top);
        Ok(self.neighbors(&top, p.coords()))
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.sites.len() {
            return Err(invalid("k", format!("need 1 <= k <= n = {} (got {k})", self.sites.len())));
        }
        Ok(())
    }

    pub(crate) fn neighbors(&self, top: &TopK, p: &[f64]) -> Neighbors {
        let order: Vec<usize> = top.indices().map(|i| i as usize).collect();
        let weighted_distances =
            order.iter().map(|&i| self.g.distance_unchecked(self.sites.position(i), p) / self.sites.omega(i)).collect();
        Neighbors { key: top.key(), order, weighted_distances }
    }
}

/// The `k` sites of smallest weighted distance to `p`, by exhaustive scan.
pub fn k_nearest_sites(p: &TorusPoint, sites: &WeightedSites, k: usize, g: &GeometrySpec) -> Result<Neighbors> {
    NearestSites::new(sites, *g, SearchStrategy::FullScan)?.query(p, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use crate::weights::{power_law_weights, WeightSequence};
    use proptest::prelude::*;
    use rand::Rng;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn all_sites_when_k_equals_n() {
        let g = GeometrySpec::torus(2, 2).unwrap();
        let sites = WeightedSites::random(&WeightSequence::uniform(7).unwrap(), 2, 3).unwrap();
        let nb = k_nearest_sites(&pt(&[0.3, 0.3]), &sites, 7, &g).unwrap();
        assert_eq!(nb.key.indices(), &[0, 1, 2, 3, 4, 5, 6]);
        assert!(k_nearest_sites(&pt(&[0.3, 0.3]), &sites, 8, &g).is_err());
    }

    #[test]
    fn one_dimensional_examples() {
        let g = GeometrySpec::torus(1, 2).unwrap();
        let sites = WeightedSites::unweighted(vec![pt(&[0.0]), pt(&[0.5])], 1).unwrap();
        assert_eq!(k_nearest_sites(&pt(&[0.1]), &sites, 1, &g).unwrap().order, vec![0]);

        // 0.2 / 8 = 0.025 < 0.1
        let sites = WeightedSites::new(vec![pt(&[0.0]), pt(&[0.3])], vec![1.0, 8.0], 1).unwrap();
        let nb = k_nearest_sites(&pt(&[0.1]), &sites, 1, &g).unwrap();
        assert_eq!(nb.order, vec![1]);
        assert!((nb.weighted_distances[0] - 0.025).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_smaller_index() {
        let g = GeometrySpec::torus(1, 1).unwrap();
        let sites = WeightedSites::unweighted(vec![pt(&[0.25]), pt(&[0.75]), pt(&[0.0])], 1).unwrap();
        let nb = k_nearest_sites(&pt(&[0.5]), &sites, 1, &g).unwrap();
        assert_eq!(nb.order, vec![0]);
    }

    fn check_grid_matches_scan(sites: &WeightedSites, g: GeometrySpec, k: usize, queries: usize, seed: u64) {
        let scan = NearestSites::new(sites, g, SearchStrategy::FullScan).unwrap();
        let grid = NearestSites::new(sites, g, SearchStrategy::Grid).unwrap();
        assert!(grid.uses_grid());
        let mut rng = stream(seed, Domain::Experiment, 0);
        for _ in 0..queries {
            let p = pt(&(0..g.dim).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
            assert_eq!(scan.query(&p, k).unwrap(), grid.query(&p, k).unwrap());
        }
    }

    #[test]
    fn grid_matches_full_scan_unweighted() {
        for (d, norm) in [(1, 2), (2, 1), (2, 2), (3, 2), (3, 1)] {
            let g = GeometrySpec::torus(d, norm).unwrap();
            let sites = WeightedSites::random(&WeightSequence::uniform(300).unwrap(), d, d as u64).unwrap();
            for k in 1..=3 {
                check_grid_matches_scan(&sites, g, k, 300, 11);
            }
        }
        let g = GeometrySpec::torus_inf(2).unwrap();
        let sites = WeightedSites::random(&WeightSequence::uniform(300).unwrap(), 2, 5).unwrap();
        check_grid_matches_scan(&sites, g, 3, 300, 12);
    }

    #[test]
    fn grid_matches_full_scan_weighted_and_hypercube() {
        let ws = power_law_weights(500, 2.5).unwrap();
        let sites = WeightedSites::random(&ws, 2, 4).unwrap();
        check_grid_matches_scan(&sites, GeometrySpec::torus(2, 2).unwrap(), 2, 500, 13);
        let cube = GeometrySpec::torus(2, 2).unwrap().with_ground(Ground::Hypercube);
        check_grid_matches_scan(&sites, cube, 3, 500, 14);
    }

    #[test]
    fn grid_handles_lattice_ties() {
        // points on a lattice produce exact distance ties
        let g = GeometrySpec::torus(2, 1).unwrap();
        let pts: Vec<TorusPoint> = (0..100).map(|i| pt(&[(i % 10) as f64 / 10.0, (i / 10) as f64 / 10.0])).collect();
        let sites = WeightedSites::unweighted(pts, 2).unwrap();
        let scan = NearestSites::new(&sites, g, SearchStrategy::FullScan).unwrap();
        let grid = NearestSites::new(&sites, g, SearchStrategy::Grid).unwrap();
        for q in [[0.05, 0.05], [0.5, 0.5], [0.0, 0.95], [0.25, 0.75]] {
            for k in 1..=5 {
                assert_eq!(scan.query(&pt(&q), k).unwrap(), grid.query(&pt(&q), k).unwrap());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn key_separates_inside_from_outside(seed in any::<u64>(), k in 1usize..5, d in 1usize..4) {
            let g = GeometrySpec::torus(d, 2).unwrap();
            let ws = power_law_weights(40, 3.0).unwrap();
            let sites = WeightedSites::random(&ws, d, seed).unwrap();
            let mut rng = stream(seed, Domain::Experiment, 1);
            let p = pt(&(0..d).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
            let nb = k_nearest_sites(&p, &sites, k, &g).unwrap();
            let wd = |i: usize| g.distance_unchecked(sites.position(i), p.coords()) / sites.omega(i);
            let inner = nb.order.iter().map(|&i| wd(i)).fold(0.0, f64::max);
            for i in (0..sites.len()).filter(|i| !nb.key.contains(*i as u32)) {
                prop_assert!(wd(i) >= inner * (1.0 - 1e-12));
            }
        }
    }
}
