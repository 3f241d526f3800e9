use rand::seq::IndexedRandom;
use rand::Rng;

use super::IncidenceGraph;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::rng::{stream, Domain};

/// Default cap on the number of enumerated clause subsets.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Settings for the exhaustive checkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub cap: u128,
    pub execution: Execution,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { cap: DEFAULT_ENUMERATION_CAP, execution: Execution::default() }
    }
}

/// A clause subset violating `|N(C')| >= (1 + c)|C'|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionWitness {
    /// Sorted clause indices.
    pub clauses: Vec<u32>,
    pub neighborhood: usize,
    pub threshold: f64,
}

impl ExpansionWitness {
    /// Recomputes the neighborhood and checks the violation.
    pub fn confirm(&self, gph: &IncidenceGraph) -> bool {
        match gph.neighborhood(&self.clauses) {
            Ok(nb) => nb.len() == self.neighborhood && (nb.len() as f64) < self.threshold,
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpansionOutcome {
    /// Every subset up to the size bound expands.
    Pass,
    /// The randomized search found nothing; no guarantee.
    PassProbable {
        trials: usize,
    },
    Violated(ExpansionWitness),
}

impl ExpansionOutcome {
    pub fn witness(&self) -> Option<&ExpansionWitness> {
        match self {
            ExpansionOutcome::Violated(w) => Some(w),
            _ => None,
        }
    }
}

/// Which sufficient condition for large resolution width failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthCondition {
    /// `|N(C')| >= |C'|` for all `|C'| <= w`.
    Neighborhood,
    /// `|δC'| >= eps |C'|` for `w/3 <= |C'| <= 2w/3`.
    UniqueBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthWitness {
    pub condition: WidthCondition,
    pub clauses: Vec<u32>,
    pub neighborhood: usize,
    pub unique: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WidthOutcome {
    Pass,
    Violated(WidthWitness),
}

fn binomial_sum(m: usize, r: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for i in 1..=r.min(m) {
        term = term.saturating_mul((m - i + 1) as u128) / i as u128;
        total = total.saturating_add(term);
    }
    total
}

struct Counter {
    counts: Vec<u32>,
    neighborhood: usize,
    unique: usize,
}

impl Counter {
    fn new(n: usize) -> Self {
        Counter { counts: vec![0; n], neighborhood: 0, unique: 0 }
    }

    fn add(&mut self, vars: &[u32]) {
        for &v in vars {
            let c = &mut self.counts[v as usize];
            *c += 1;
            match *c {
                1 => {
                    self.neighborhood += 1;
                    self.unique += 1;
                }
                2 => self.unique -= 1,
                _ => {}
            }
        }
    }

    fn remove(&mut self, vars: &[u32]) {
        for &v in vars {
            let c = &mut self.counts[v as usize];
            match *c {
                1 => {
                    self.neighborhood -= 1;
                    self.unique -= 1;
                }
                2 => self.unique += 1,
                _ => {}
            }
            *c -= 1;
        }
    }
}

struct Found<T> {
    subset: Vec<u32>,
    neighborhood: usize,
    unique: usize,
    tag: T,
}

/// Smallest violating subset of size `<= max_size` (lexicographically first
/// among those of minimal size) under `violates(size, |N|, |δ|)`.
fn search<T, P>(gph: &IncidenceGraph, max_size: usize, opts: &ExactOptions, violates: P) -> Result<Option<Found<T>>>
where
    T: Send,
    P: Fn(usize, usize, usize) -> Option<T> + Sync,
{
    let m = gph.num_clauses();
    let max_size = max_size.min(m);
    let required = binomial_sum(m, max_size);
    if required > opts.cap {
        return Err(Error::BudgetExceeded { required, cap: opts.cap });
    }
    if max_size == 0 {
        return Ok(None);
    }
    let per_first = opts.execution.map_indexed(m, |first| {
        let mut counter = Counter::new(gph.num_vars());
        let mut stack = vec![first as u32];
        let mut limit = max_size;
        let mut best: Option<Found<T>> = None;
        counter.add(gph.clause(first));
        dfs(gph, &mut counter, &mut stack, &mut limit, &mut best, &violates);
        best
    });
    Ok(per_first.into_iter().flatten().min_by_key(|f| f.subset.len()))
}

fn dfs<T, P>(
    gph: &IncidenceGraph,
    counter: &mut Counter,
    stack: &mut Vec<u32>,
    limit: &mut usize,
    best: &mut Option<Found<T>>,
    violates: &P,
) where
    P: Fn(usize, usize, usize) -> Option<T>,
{
    let size = stack.len();
    if let Some(tag) = violates(size, counter.neighborhood, counter.unique) {
        *best = Some(Found { subset: stack.clone(), neighborhood: counter.neighborhood, unique: counter.unique, tag });
        *limit = size - 1;
        return;
    }
    if size >= *limit {
        return;
    }
    let next = *stack.last().expect("nonempty") as usize + 1;
    for c in next..gph.num_clauses() {
        if size >= *limit {
            break;
        }
        stack.push(c as u32);
        counter.add(gph.clause(c));
        dfs(gph, counter, stack, limit, best, violates);
        counter.remove(gph.clause(c));
        stack.pop();
    }
}

fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() || c < 0.0 {
        return Err(invalid("c", format!("expansion factor must be finite and >= 0 (got {c})")));
    }
    Ok(())
}

/// Exhaustively checks `|N(C')| >= (1 + c)|C'|` for all `|C'| <= r`.
pub fn check_expansion_exact(gph: &IncidenceGraph, r: usize, c: f64, opts: &ExactOptions) -> Result<ExpansionOutcome> {
    check_c(c)?;
    let found = search(gph, r, opts, |s, nb, _| ((nb as f64) < (1.0 + c) * s as f64).then_some(()))?;
    Ok(match found {
        None => ExpansionOutcome::Pass,
        Some(f) => ExpansionOutcome::Violated(ExpansionWitness {
            threshold: (1.0 + c) * f.subset.len() as f64,
            clauses: f.subset,
            neighborhood: f.neighborhood,
        }),
    })
}

/// Randomized search for expansion violations.
///
/// Each trial starts from a random clause and grows it to a random size up
/// to `r`, alternating at random between a walk step (a clause sharing a
/// variable with the current set) and a greedy step (the clause adding the
/// fewest new variables). Violations found along the way are sound.
pub fn check_expansion_sampled(
    gph: &IncidenceGraph,
    r: usize,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<ExpansionOutcome> {
    check_c(c)?;
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let m = gph.num_clauses();
    let r = r.min(m);
    if r == 0 {
        return Ok(ExpansionOutcome::PassProbable { trials });
    }
    let mut counter = Counter::new(gph.num_vars());
    let mut in_set = vec![false; m];
    let mut set: Vec<u32> = Vec::with_capacity(r);
    for trial in 0..trials {
        let mut rng = stream(seed, Domain::ExpansionTrials, trial as u64);
        let target = rng.random_range(1..=r);
        let first = rng.random_range(0..m);
        let mut witness = None;
        grow(gph, &mut counter, &mut in_set, &mut set, first);
        loop {
            if (counter.neighborhood as f64) < (1.0 + c) * set.len() as f64 {
                let mut clauses = set.clone();
                clauses.sort_unstable();
                witness = Some(ExpansionWitness {
                    clauses,
                    neighborhood: counter.neighborhood,
                    threshold: (1.0 + c) * set.len() as f64,
                });
                break;
            }
            if set.len() >= target {
                break;
            }
            let next = if rng.random::<bool>() { walk_step(gph, &in_set, &set, &mut rng) } else { None }
                .or_else(|| greedy_step(gph, &counter, &in_set, &set, &mut rng))
                .unwrap_or_else(|| {
                    let free = m - set.len();
                    let skip = rng.random_range(0..free);
                    (0..m).filter(|&c| !in_set[c]).nth(skip).expect("free clause")
                });
            grow(gph, &mut counter, &mut in_set, &mut set, next);
        }
        for &cl in &set {
            counter.remove(gph.clause(cl as usize));
            in_set[cl as usize] = false;
        }
        set.clear();
        if let Some(w) = witness {
            return Ok(ExpansionOutcome::Violated(w));
        }
    }
    Ok(ExpansionOutcome::PassProbable { trials })
}

fn grow(gph: &IncidenceGraph, counter: &mut Counter, in_set: &mut [bool], set: &mut Vec<u32>, c: usize) {
    counter.add(gph.clause(c));
    in_set[c] = true;
    set.push(c as u32);
}

fn walk_step<R: Rng>(gph: &IncidenceGraph, in_set: &[bool], set: &[u32], rng: &mut R) -> Option<usize> {
    let from = *set.choose(rng)? as usize;
    let v = *gph.clause(from).choose(rng)? as usize;
    let options: Vec<u32> = gph.clauses_of(v).iter().copied().filter(|&c| !in_set[c as usize]).collect();
    options.choose(rng).map(|&c| c as usize)
}

fn greedy_step<R: Rng>(
    gph: &IncidenceGraph,
    counter: &Counter,
    in_set: &[bool],
    set: &[u32],
    rng: &mut R,
) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    let mut ties = 0u32;
    for &s in set {
        for &v in gph.clause(s as usize) {
            for &cand in gph.clauses_of(v as usize) {
                if in_set[cand as usize] {
                    continue;
                }
                let fresh = gph.clause(cand as usize).iter().filter(|&&u| counter.counts[u as usize] == 0).count();
                match best {
                    Some((f, _)) if fresh > f => {}
                    Some((f, c)) if fresh == f => {
                        if c != cand as usize {
                            ties += 1;
                            if rng.random_range(0..=ties) == 0 {
                                best = Some((fresh, cand as usize));
                            }
                        }
                    }
                    _ => {
                        best = Some((fresh, cand as usize));
                        ties = 0;
                    }
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Checks the two sufficient conditions for resolution width above `w`.
pub fn resolution_width_conditions(
    gph: &IncidenceGraph,
    w: usize,
    eps: f64,
    opts: &ExactOptions,
) -> Result<WidthOutcome> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(invalid("eps", format!("must be finite and >= 0 (got {eps})")));
    }
    let lo = w.div_ceil(3);
    let hi = 2 * w / 3;
    let found = search(gph, w, opts, |s, nb, uq| {
        if nb < s {
            Some(WidthCondition::Neighborhood)
        } else if s >= lo && s <= hi && (uq as f64) < eps * s as f64 {
            Some(WidthCondition::UniqueBoundary)
        } else {
            None
        }
    })?;
    Ok(match found {
        None => WidthOutcome::Pass,
        Some(f) => WidthOutcome::Violated(WidthWitness {
            condition: f.tag,
            clauses: f.subset,
            neighborhood: f.neighborhood,
            unique: f.unique,
        }),
    })
}
