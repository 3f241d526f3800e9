use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genmodel::{Clause, Formula};
use crate::voronoi::RegionKey;

/// Default limit on distinct variables for [`brute_force_sat`].
pub const BRUTE_FORCE_MAX_VARS: usize = 25;

/// Result of exhaustive satisfiability checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// A model as (variable, value) pairs, sorted by variable.
    Sat(Vec<(u32, bool)>),
    Unsat,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }
}

/// Truth-table evaluation over the distinct variables of `clauses`.
pub fn brute_force_sat(clauses: &[Clause], max_vars: usize) -> Result<SatOutcome> {
    let mut vars: Vec<u32> = clauses.iter().flat_map(|c| c.variables()).collect();
    vars.sort_unstable();
    vars.dedup();
    if vars.len() > max_vars.min(63) {
        return Err(Error::TooManyVariables { count: vars.len(), max: max_vars.min(63) });
    }
    // a clause is falsified by `a` iff (a & mask) == neg
    let masks: Vec<(u64, u64)> = clauses
        .iter()
        .map(|c| {
            c.literals().iter().fold((0u64, 0u64), |(mask, neg), l| {
                let bit = 1u64 << vars.binary_search(&l.var()).expect("collected above");
                (mask | bit, if l.is_negated() { neg | bit } else { neg })
            })
        })
        .collect();
    for a in 0..1u64 << vars.len() {
        if masks.iter().all(|&(mask, neg)| a & mask != neg) {
            return Ok(SatOutcome::Sat(vars.iter().enumerate().map(|(j, &v)| (v, a >> j & 1 == 1)).collect()));
        }
    }
    Ok(SatOutcome::Unsat)
}

/// `2^k` clauses on one variable set carrying every sign pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsatCore {
    pub variables: RegionKey,
    /// Clause indices, ordered by pattern.
    pub clauses: Vec<usize>,
    /// `patterns[j]` is the sign pattern of `clauses[j]`.
    pub patterns: Vec<u32>,
}

/// JSON form of an [`UnsatCore`]; variables use DIMACS numbering and clause
/// indices are 0-based positions in the formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsatCertificate {
    pub variables: Vec<u64>,
    pub patterns: Vec<u32>,
    pub clause_indices: Vec<usize>,
}

impl UnsatCore {
    pub fn certificate(&self) -> UnsatCertificate {
        UnsatCertificate {
            variables: self.variables.indices().iter().map(|&v| v as u64 + 1).collect(),
            patterns: self.patterns.clone(),
            clause_indices: self.clauses.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.certificate()).expect("certificate serializes")
    }

    /// The core clauses as a standalone DIMACS formula over the original
    /// variable numbering.
    pub fn to_dimacs(&self, f: &Formula) -> String {
        let mut out = String::new();
        out.push_str(&format!("c unsat core: clauses {:?}\n", self.clauses));
        out.push_str(&format!("p cnf {} {}\n", f.num_vars(), self.clauses.len()));
        for &ci in &self.clauses {
            for l in f.clauses()[ci].literals() {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    /// Re-checks the structural invariants and, when small enough,
    /// unsatisfiability by brute force.
    pub fn verify(&self, f: &Formula) -> bool {
        let k = self.variables.len();
        if k > 31 || self.clauses.len() != 1 << k || self.patterns.len() != self.clauses.len() {
            return false;
        }
        let mut pats = self.patterns.clone();
        pats.sort_unstable();
        if pats.iter().enumerate().any(|(j, &p)| p != j as u32) {
            return false;
        }
        let ok = self.clauses.iter().zip(&self.patterns).all(|(&ci, &p)| {
            ci < f.len() && f.clauses()[ci].variable_set() == self.variables && f.clauses()[ci].sign_pattern() == p
        });
        if !ok {
            return false;
        }
        if k > BRUTE_FORCE_MAX_VARS {
            return true;
        }
        let core: Vec<Clause> = self.clauses.iter().map(|&ci| f.clauses()[ci].clone()).collect();
        matches!(brute_force_sat(&core, BRUTE_FORCE_MAX_VARS), Ok(SatOutcome::Unsat))
    }
}

/// Sorts clauses by variable set and returns a core for the smallest set
/// that carries all `2^k` sign patterns, or `None`.
pub fn find_unsat_core(f: &Formula) -> Option<UnsatCore> {
    let k = f.width();
    let full = 1usize << k;
    if f.len() < full {
        return None;
    }
    let mut keyed: Vec<(RegionKey, u32, usize)> =
        f.clauses().iter().enumerate().map(|(i, c)| (c.variable_set(), c.sign_pattern(), i)).collect();
    keyed.sort_unstable();
    let mut start = 0;
    while start < keyed.len() {
        let end = start + keyed[start..].partition_point(|e| e.0 == keyed[start].0);
        if end - start >= full {
            let mut patterns = Vec::with_capacity(full);
            let mut clauses = Vec::with_capacity(full);
            // within a run entries are sorted by pattern then clause index
            for e in &keyed[start..end] {
                if patterns.last() != Some(&e.1) {
                    patterns.push(e.1);
                    clauses.push(e.2);
                }
            }
            if patterns.len() == full {
                let core = UnsatCore { variables: keyed[start].0.clone(), clauses, patterns };
                if core.verify(f) {
                    return Some(core);
                }
            }
        }
        start = end;
    }
    None
}
