//! Clause-variable incidence analysis: expansion and resolution-width
//! conditions, unsatisfiable cores, and clause niceness.

mod expansion;
mod unsat;

pub use expansion::{
    check_expansion_exact, check_expansion_sampled, resolution_width_conditions, ExactOptions, ExpansionOutcome,
    ExpansionWitness, WidthCondition, WidthOutcome, WidthWitness, DEFAULT_ENUMERATION_CAP,
};
pub use unsat::{brute_force_sat, find_unsat_core, SatOutcome, UnsatCertificate, UnsatCore, BRUTE_FORCE_MAX_VARS};

use crate::error::{Error, Result};
use crate::genmodel::{Formula, GeometricInstance, GeometricSampler};
use crate::geometry::TorusPoint;
use crate::voronoi::knn::TopK;
use crate::voronoi::{NearestSites, SearchStrategy};

/// Bipartite clause-variable graph; signs are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGraph {
    n: usize,
    k: usize,
    clause_vars: Vec<u32>,
    var_offsets: Vec<usize>,
    var_clauses: Vec<u32>,
}

impl IncidenceGraph {
    pub fn new(f: &Formula) -> Self {
        let (n, k) = (f.num_vars(), f.width());
        let mut clause_vars = Vec::with_capacity(f.len() * k);
        for c in f.clauses() {
            clause_vars.extend_from_slice(c.variable_set().indices());
        }
        let mut var_offsets = vec![0usize; n + 1];
        for &v in &clause_vars {
            var_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            var_offsets[i + 1] += var_offsets[i];
        }
        let mut fill = var_offsets.clone();
        let mut var_clauses = vec![0u32; clause_vars.len()];
        // clauses are visited in order, so each variable's list comes out sorted
        for (ci, vars) in clause_vars.chunks_exact(k.max(1)).enumerate() {
            for &v in vars {
                var_clauses[fill[v as usize]] = ci as u32;
                fill[v as usize] += 1;
            }
        }
        IncidenceGraph { n, k, clause_vars, var_offsets, var_clauses }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clause_vars.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn width(&self) -> usize {
        self.k
    }

    /// Sorted variables of clause `c`.
    pub fn clause(&self, c: usize) -> &[u32] {
        &self.clause_vars[c * self.k..(c + 1) * self.k]
    }

    /// Sorted clauses containing variable `v`.
    pub fn clauses_of(&self, v: usize) -> &[u32] {
        &self.var_clauses[self.var_offsets[v]..self.var_offsets[v + 1]]
    }

    fn check_subset(&self, subset: &[u32]) -> Result<Vec<u32>> {
        if subset.is_empty() {
            return Err(crate::error::invalid("subset", "clause subset must be nonempty"));
        }
        let m = self.num_clauses();
        if let Some(&c) = subset.iter().find(|&&c| c as usize >= m) {
            return Err(Error::IndexOutOfRange { index: c as usize, len: m });
        }
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        Ok(s)
    }

    fn multiplicities(&self, subset: &[u32]) -> std::collections::BTreeMap<u32, u32> {
        let mut counts = std::collections::BTreeMap::new();
        for &c in subset {
            for &v in self.clause(c as usize) {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
        counts
    }

    /// `N(C')`, sorted.
    pub fn neighborhood(&self, subset: &[u32]) -> Result<Vec<u32>> {
        let s = self.check_subset(subset)?;
        Ok(self.multiplicities(&s).into_keys().collect())
    }
}

/// Shorthand for [`IncidenceGraph::new`].
pub fn incidence_graph(f: &Formula) -> IncidenceGraph {
    IncidenceGraph::new(f)
}

/// `δC'`: variables of `N(C')` contained in exactly one clause of `C'`.
pub fn unique_variable_boundary(gph: &IncidenceGraph, subset: &[u32]) -> Result<Vec<u32>> {
    let s = gph.check_subset(subset)?;
    Ok(gph.multiplicities(&s).into_iter().filter(|&(_, c)| c == 1).map(|(v, _)| v).collect())
}

/// Niceness queries against one geometric instance or sampler.
pub struct NicenessChecker<'a> {
    engine: NearestSites<'a>,
    positions: &'a [TorusPoint],
    k: usize,
    formula: Option<&'a Formula>,
}

impl<'a> NicenessChecker<'a> {
    pub fn new(inst: &'a GeometricInstance) -> Result<Self> {
        let engine = NearestSites::new(&inst.sites, inst.params.geometry, SearchStrategy::Auto)?;
        Ok(NicenessChecker {
            engine,
            positions: &inst.clause_positions,
            k: inst.params.k,
            formula: Some(&inst.formula),
        })
    }

    /// Checks draws produced by [`GeometricSampler::clause_variables`] or
    /// [`GeometricSampler::draw_clauses`] without generating the whole formula.
    pub fn for_sampler(sampler: &'a GeometricSampler) -> Result<Self> {
        let engine = NearestSites::new(sampler.sites(), sampler.params().geometry, SearchStrategy::Auto)?;
        Ok(NicenessChecker { engine, positions: sampler.clause_positions(), k: sampler.params().k, formula: None })
    }

    /// True iff the `j`th drawn variable of clause `i` has the `j`th largest
    /// connection weight for every `j`, ties going to the smaller index.
    ///
    /// Ranking by connection weight is ranking by weighted distance, so the
    /// check reduces to a k-nearest query.
    pub fn is_nice(&self, i: usize) -> Result<bool> {
        let f =
            self.formula.ok_or_else(|| crate::error::invalid("clause", "checker has no formula; use is_nice_draw"))?;
        if i >= f.len() {
            return Err(Error::IndexOutOfRange { index: i, len: f.len() });
        }
        let drawn: Vec<u32> = f.clauses()[i].variables().collect();
        self.is_nice_draw(i, &drawn)
    }

    /// Same as [`NicenessChecker::is_nice`] for an explicit draw sequence of
    /// clause `i`.
    pub fn is_nice_draw(&self, i: usize, drawn: &[u32]) -> Result<bool> {
        if i >= self.positions.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.positions.len() });
        }
        if drawn.len() != self.k {
            return Err(crate::error::invalid(
                "clause",
                format!("expected {} drawn variables, got {}", self.k, drawn.len()),
            ));
        }
        let mut top = TopK::new(self.k);
        self.engine.query_into(self.positions[i].coords(), &mut top);
        Ok(top.indices().eq(drawn.iter().copied()))
    }

    /// Fraction of nice clauses among `clauses`.
    pub fn nice_fraction(&self, clauses: impl IntoIterator<Item = usize>) -> Result<f64> {
        let (mut nice, mut total) = (0usize, 0usize);
        for i in clauses {
            nice += self.is_nice(i)? as usize;
            total += 1;
        }
        Ok(if total == 0 { 0.0 } else { nice as f64 / total as f64 })
    }
}

/// One-off niceness check; build a [`NicenessChecker`] to query many clauses.
pub fn is_nice(i: usize, inst: &GeometricInstance) -> Result<bool> {
    NicenessChecker::new(inst)?.is_nice(i)
}
