//! Random k-SAT samplers.
//!
//! The non-uniform model draws the `k` variables of each clause sequentially
//! without replacement with probability proportional to fixed variable
//! weights and negates each literal independently with probability 1/2; the
//! power-law model is its instantiation with [`power_law_weights`].
//!
//! The geometric model places variables and clauses uniformly on the torus.
//! At temperature `T > 0` a clause draws its variables proportionally to the
//! connection weights `X(c,v)`; at `T = 0` it takes the `k` variables of
//! smallest weighted distance. Sign patterns are assigned per variable set
//! without repetition until all `2^k` patterns are used.
//!
//! Clauses keep their draw order, which the niceness analysis depends on.
//!
//! [`power_law_weights`]: crate::weights::power_law_weights

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::geometry::{ln_connection_weight, GeometrySpec, TorusPoint};
use crate::rng::{stream, Domain};
use crate::sampling::{draw_from_tree, SumTree};
use crate::voronoi::knn::TopK;
use crate::voronoi::{NearestSites, RegionKey, SearchStrategy, WeightedSites};
use crate::weights::{normalize_min_one, WeightSequence};

/// Largest clause width for which sign patterns fit the ledger.
pub const MAX_K: usize = 31;

/// A variable (0-based) with its polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        Literal { var, negated }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Signed 1-based DIMACS integer.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(lit: i64) -> Result<Self> {
        if lit == 0 || lit.unsigned_abs() > u32::MAX as u64 {
            return Err(invalid("literal", format!("{lit} is not a DIMACS literal")));
        }
        Ok(Literal { var: (lit.unsigned_abs() - 1) as u32, negated: lit < 0 })
    }
}

/// Literals in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause {
    literals: SmallVec<[Literal; 4]>,
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        Clause { literals: literals.into_iter().collect() }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = u32> + '_ {
        self.literals.iter().map(|l| l.var)
    }

    /// The canonically sorted variable set.
    pub fn variable_set(&self) -> RegionKey {
        RegionKey::new(self.variables()).expect("clause variables are distinct")
    }

    /// Bit `j` is set iff the `j`th smallest variable appears negated.
    pub fn sign_pattern(&self) -> u32 {
        let mut lits: SmallVec<[Literal; 4]> = self.literals.clone();
        lits.sort_unstable();
        lits.iter().enumerate().fold(0, |acc, (j, l)| acc | ((l.negated as u32) << j))
    }
}

/// A k-CNF formula over variables `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    n: usize,
    k: usize,
    clauses: Vec<Clause>,
}

impl Formula {
    /// Validates width, distinctness and range of every clause.
    pub fn new(n: usize, k: usize, clauses: Vec<Clause>) -> Result<Self> {
        if k > MAX_K {
            return Err(invalid("k", format!("clause width is limited to {MAX_K}")));
        }
        for (ci, c) in clauses.iter().enumerate() {
            if c.len() != k {
                return Err(invalid("clause", format!("clause {ci} has {} literals, expected k = {k}", c.len())));
            }
            if let Some(v) = c.variables().find(|&v| v as usize >= n) {
                return Err(invalid("clause", format!("clause {ci} mentions variable {} > n = {n}", v as u64 + 1)));
            }
            let mut vars: SmallVec<[u32; 8]> = c.variables().collect();
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid("clause", format!("clause {ci} repeats a variable")));
            }
        }
        Ok(Formula { n, k, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause density `m / n`.
    pub fn density(&self) -> f64 {
        self.clauses.len() as f64 / self.n as f64
    }
}

/// Sign patterns already emitted per variable set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignLedger {
    k: usize,
    used: HashMap<RegionKey, Vec<u32>>,
}

impl SignLedger {
    pub fn new(k: usize) -> Self {
        SignLedger { k, used: HashMap::new() }
    }

    /// Picks a pattern for `set` uniformly among those not yet used, or
    /// uniformly among all `2^k` once every pattern has appeared.
    pub fn choose<R: Rng + ?Sized>(&mut self, set: &RegionKey, rng: &mut R) -> u32 {
        let total: u64 = 1 << self.k;
        let used = self.used.entry(set.clone()).or_default();
        let pattern = if used.len() as u64 >= total {
            rng.random_range(0..total) as u32
        } else if (used.len() as u64) * 2 <= total {
            loop {
                let p = rng.random_range(0..total) as u32;
                if used.binary_search(&p).is_err() {
                    break p;
                }
            }
        } else {
            let mut r = rng.random_range(0..total - used.len() as u64) as u32;
            let mut p = 0u32;
            loop {
                if used.binary_search(&p).is_err() {
                    if r == 0 {
                        break p;
                    }
                    r -= 1;
                }
                p += 1;
            }
        };
        if let Err(pos) = used.binary_search(&pattern) {
            used.insert(pos, pattern);
        }
        pattern
    }

    pub fn patterns(&self, set: &RegionKey) -> &[u32] {
        self.used.get(set).map_or(&[], Vec::as_slice)
    }

    pub fn sets(&self) -> usize {
        self.used.len()
    }
}

fn check_sizes(n: usize, m: usize, k: usize, ws: &WeightSequence) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid("k", format!("need 1 <= k <= n (got k = {k}, n = {n})")));
    }
    if k > MAX_K {
        return Err(invalid("k", format!("clause width is limited to {MAX_K}")));
    }
    if m == 0 {
        return Err(invalid("m", "need at least one clause"));
    }
    if ws.len() != n {
        return Err(invalid("weights", format!("{} weights for n = {n} variables", ws.len())));
    }
    Ok(())
}

fn chunk_size(m: usize, exec: Execution) -> usize {
    m.div_ceil(4 * exec.threads()).clamp(256, 1 << 16)
}

/// Draws `m` clauses of the non-uniform model.
pub fn sample_nonuniform_formula(
    n: usize,
    m: usize,
    k: usize,
    ws: &WeightSequence,
    seed: u64,
    exec: Execution,
) -> Result<Formula> {
    check_sizes(n, m, k, ws)?;
    let base = SumTree::new(ws.weights());
    let clauses = exec.map_chunks(m, chunk_size(m, exec), |range| {
        let mut tree = base.clone();
        range
            .map(|i| {
                let mut rng = stream(seed, Domain::ClauseDraw, i as u64);
                let vars = draw_from_tree(&mut tree, k, &mut rng);
                Clause::new(vars.into_iter().map(|v| Literal::new(v as u32, rng.random::<bool>())))
            })
            .collect()
    });
    Formula::new(n, k, clauses)
}

/// Parameters of the geometric model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub geometry: GeometrySpec,
    /// `T = 0` selects the threshold model.
    pub temperature: f64,
}

impl GeometricParams {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(invalid("T", format!("temperature must satisfy T >= 0 (got {})", self.temperature)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(invalid("k", format!("need 1 <= k <= n (got k = {}, n = {})", self.k, self.n)));
        }
        if self.k > MAX_K {
            return Err(invalid("k", format!("clause width is limited to {MAX_K}")));
        }
        if self.m == 0 {
            return Err(invalid("m", "need at least one clause"));
        }
        Ok(())
    }

    /// The proven regime for small cores and niceness is `T < 1`.
    pub fn in_low_temperature_regime(&self) -> bool {
        self.temperature < 1.0
    }
}

/// Variable/clause layout of a geometric instance, able to (re)draw any
/// clause's variables on its own.
#[derive(Debug, Clone)]
pub struct GeometricSampler {
    params: GeometricParams,
    seed: u64,
    sites: WeightedSites,
    clause_positions: Vec<TorusPoint>,
    search: SearchStrategy,
}

impl GeometricSampler {
    /// Random positions for `params.n` variables (weights `ws`, min-normalized)
    /// and `params.m` clauses.
    pub fn new(params: GeometricParams, ws: &WeightSequence, seed: u64) -> Result<Self> {
        params.validate()?;
        if ws.len() != params.n {
            return Err(invalid("weights", format!("{} weights for n = {} variables", ws.len(), params.n)));
        }
        let dim = params.geometry.dim;
        let mut rng = stream(seed, Domain::VariablePositions, 0);
        let positions = (0..params.n * dim).map(|_| rng.random::<f64>()).collect();
        let sites = WeightedSites::from_flat(dim, positions, normalize_min_one(ws).weights().to_vec())?;
        let mut rng = stream(seed, Domain::ClausePositions, 0);
        let clause_positions =
            (0..params.m).map(|_| TorusPoint::wrapped((0..dim).map(|_| rng.random::<f64>()))).collect();
        Ok(GeometricSampler { params, seed, sites, clause_positions, search: SearchStrategy::Auto })
    }

    /// Uses caller-supplied positions (e.g. hand-placed fixtures).
    pub fn with_positions(
        params: GeometricParams,
        sites: WeightedSites,
        clause_positions: Vec<TorusPoint>,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if sites.len() != params.n || clause_positions.len() != params.m {
            return Err(invalid("positions", "position counts must match n and m"));
        }
        if sites.dim() != params.geometry.dim {
            return Err(Error::DimensionMismatch { expected: params.geometry.dim, got: sites.dim() });
        }
        if let Some(p) = clause_positions.iter().find(|p| p.dim() != params.geometry.dim) {
            return Err(Error::DimensionMismatch { expected: params.geometry.dim, got: p.dim() });
        }
        Ok(GeometricSampler { params, seed, sites, clause_positions, search: SearchStrategy::Auto })
    }

    pub fn params(&self) -> &GeometricParams {
        &self.params
    }

    pub fn sites(&self) -> &WeightedSites {
        &self.sites
    }

    pub fn clause_position(&self, i: usize) -> &TorusPoint {
        &self.clause_positions[i]
    }

    pub fn clause_positions(&self) -> &[TorusPoint] {
        &self.clause_positions
    }

    /// Variables of clause `i` in draw order.
    pub fn clause_variables(&self, i: usize) -> Result<Vec<u32>> {
        Ok(self.draw_clauses(&[i], Execution::Sequential)?.remove(0))
    }

    /// Variables of the listed clauses in draw order, identical to what
    /// [`GeometricSampler::sample`] would produce for them.
    pub fn draw_clauses(&self, indices: &[usize], exec: Execution) -> Result<Vec<Vec<u32>>> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.params.m) {
            return Err(Error::IndexOutOfRange { index: i, len: self.params.m });
        }
        let engine = NearestSites::new(&self.sites, self.params.geometry, self.search)?;
        let draws = exec.map_chunks(indices.len(), 64, |range| {
            let mut scratch = Scratch::default();
            range.map(|j| self.draw_clause(&engine, indices[j], &mut scratch)).collect()
        });
        draws.into_iter().collect()
    }

    fn draw_clause(&self, engine: &NearestSites<'_>, i: usize, scratch: &mut Scratch) -> Result<Vec<u32>> {
        let k = self.params.k;
        let c = self.clause_positions[i].coords();
        if self.params.temperature == 0.0 {
            let mut top = TopK::new(k);
            engine.query_into(c, &mut top);
            return Ok(top.indices().collect());
        }
        let g = &self.params.geometry;
        let t = self.params.temperature;
        let n = self.params.n;
        scratch.log_weight.clear();
        for v in 0..n {
            let dist = g.distance_unchecked(c, self.sites.position(v));
            if dist == 0.0 {
                return Err(Error::CoincidentPoints { what: format!("clause {i} and variable {v}") });
            }
            scratch.log_weight.push(ln_connection_weight(self.sites.weight(v), dist, t, g.dim));
        }
        let mut rng = stream(self.seed, Domain::ClauseDraw, i as u64);
        let mut drawn: Vec<u32> = Vec::with_capacity(k);
        // weights are shifted by the running maximum; if everything left
        // underflows after a removal the tree is rebuilt with a new shift
        let mut tree: Option<SumTree> = None;
        while drawn.len() < k {
            let rebuild = tree.as_ref().is_none_or(|t| !(t.total() > 0.0));
            if rebuild {
                let shift = (0..n)
                    .filter(|v| !drawn.contains(&(*v as u32)))
                    .map(|v| scratch.log_weight[v])
                    .fold(f64::NEG_INFINITY, f64::max);
                scratch.weight.clear();
                scratch.weight.extend(scratch.log_weight.iter().map(|lx| (lx - shift).exp()));
                for &v in &drawn {
                    scratch.weight[v as usize] = 0.0;
                }
                tree = Some(SumTree::new(&scratch.weight));
            }
            let tr = tree.as_mut().expect("tree built above");
            let v = tr.sample(&mut rng).expect("positive total");
            tr.set(v, 0.0);
            drawn.push(v as u32);
        }
        Ok(drawn)
    }

    /// Draws every clause's variables (in parallel), then assigns sign
    /// patterns in clause order.
    pub fn sample(self, exec: Execution) -> Result<GeometricInstance> {
        let engine = NearestSites::new(&self.sites, self.params.geometry, self.search)?;
        let m = self.params.m;
        let draws: Vec<Result<Vec<u32>>> = exec.map_chunks(m, chunk_size(m, exec).min(4096), |range| {
            let mut scratch = Scratch::default();
            range.map(|i| self.draw_clause(&engine, i, &mut scratch)).collect()
        });
        let mut ledger = SignLedger::new(self.params.k);
        let mut clauses = Vec::with_capacity(m);
        for (i, vars) in draws.into_iter().enumerate() {
            let vars = vars?;
            let set = RegionKey::new(vars.iter().copied())?;
            let mut rng = stream(self.seed, Domain::ClauseSigns, i as u64);
            let pattern = ledger.choose(&set, &mut rng);
            let rank = |v: u32| set.indices().binary_search(&v).expect("member");
            clauses.push(Clause::new(vars.iter().map(|&v| Literal::new(v, pattern >> rank(v) & 1 == 1))));
        }
        drop(engine);
        let formula = Formula::new(self.params.n, self.params.k, clauses)?;
        Ok(GeometricInstance {
            formula,
            sites: self.sites,
            clause_positions: self.clause_positions,
            params: self.params,
            seed: self.seed,
        })
    }
}

#[derive(Default)]
struct Scratch {
    log_weight: Vec<f64>,
    weight: Vec<f64>,
}

/// A geometric formula together with the positions it was drawn from.
#[derive(Debug, Clone)]
pub struct GeometricInstance {
    pub formula: Formula,
    pub sites: WeightedSites,
    pub clause_positions: Vec<TorusPoint>,
    pub params: GeometricParams,
    pub seed: u64,
}

impl GeometricInstance {
    pub fn var_position(&self, v: usize) -> &[f64] {
        self.sites.position(v)
    }
}

/// Draws a geometric instance; `ws` is min-normalized internally.
pub fn sample_geometric_formula(
    params: GeometricParams,
    ws: &WeightSequence,
    seed: u64,
    exec: Execution,
) -> Result<GeometricInstance> {
    GeometricSampler::new(params, ws, seed)?.sample(exec)
}
