use std::collections::BTreeMap;

use geosat::exec::Execution;
use geosat::genmodel::{
    sample_geometric_formula, sample_nonuniform_formula, Clause, Formula, GeometricParams, Literal,
};
use geosat::structure::{
    brute_force_sat, check_expansion_exact, check_expansion_sampled, find_unsat_core, incidence_graph,
    resolution_width_conditions, unique_variable_boundary, ExactOptions, ExpansionOutcome, SatOutcome, WidthCondition,
    WidthOutcome,
};
use geosat::weights::{power_law_weights, WeightSequence};
use geosat::GeometrySpec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Neighborhood and unique-variable counts from scratch.
fn counts(f: &Formula, subset: &[usize]) -> (usize, usize) {
    let mut mult: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in subset {
        for v in f.clauses()[c].variables() {
            *mult.entry(v).or_default() += 1;
        }
    }
    (mult.len(), mult.values().filter(|&&x| x == 1).count())
}

/// All subsets of `0..m` with size `s`, in lexicographic order.
fn combinations(m: usize, s: usize, out: &mut dyn FnMut(&[usize]) -> bool) {
    fn rec(m: usize, s: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == s {
            return out(cur);
        }
        for i in start..m {
            cur.push(i);
            if !rec(m, s, i + 1, cur, out) {
                return false;
            }
            cur.pop();
        }
        true
    }
    rec(m, s, 0, &mut Vec::new(), out);
}

/// First subset (by size, then lexicographically) satisfying `bad`.
fn first_violation(f: &Formula, max: usize, bad: &dyn Fn(usize, usize, usize) -> bool) -> Option<Vec<u32>> {
    for s in 1..=max.min(f.len()) {
        let mut found = None;
        combinations(f.len(), s, &mut |sub| {
            let (nb, uq) = counts(f, sub);
            if bad(s, nb, uq) {
                found = Some(sub.iter().map(|&c| c as u32).collect());
                false
            } else {
                true
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn power_law_formula(n: usize, m: usize, k: usize, beta: f64, seed: u64) -> Formula {
    sample_nonuniform_formula(n, m, k, &power_law_weights(n, beta).unwrap(), seed, Execution::default()).unwrap()
}

#[test]
fn exact_expansion_matches_enumerator() {
    let opts = ExactOptions::default();
    for seed in 0..10 {
        let f = power_law_formula(30, 30, 3, 4.0, seed);
        let g = incidence_graph(&f);
        for (r, c) in [(4, 0.5), (3, 1.0), (2, 1.5)] {
            let got = check_expansion_exact(&g, r, c, &opts).unwrap();
            let want = first_violation(&f, r, &|s, nb, _| (nb as f64) < (1.0 + c) * s as f64);
            assert_eq!(got.witness().map(|w| w.clauses.clone()), want, "seed {seed} r {r} c {c}");
        }
    }
}

#[test]
fn width_conditions_match_enumerator() {
    let opts = ExactOptions::default();
    for seed in 0..3 {
        let f = power_law_formula(40, 40, 5, 5.0, seed);
        let g = incidence_graph(&f);
        let (w, eps) = (6, 0.5);
        let got = resolution_width_conditions(&g, w, eps, &opts).unwrap();
        let want = first_violation(&f, w, &|s, nb, uq| {
            nb < s || (3 * s >= w && 3 * s <= 2 * w && (uq as f64) < eps * s as f64)
        });
        match got {
            WidthOutcome::Pass => assert!(want.is_none()),
            WidthOutcome::Violated(wit) => assert_eq!(Some(wit.clauses), want),
        }
    }
    // a dense instance where the boundary condition must fail
    let f = power_law_formula(12, 40, 3, 2.2, 5);
    let g = incidence_graph(&f);
    let want = first_violation(&f, 6, &|s, nb, uq| nb < s || ((2..=4).contains(&s) && (uq as f64) < 1.0 * s as f64));
    match resolution_width_conditions(&g, 6, 1.0, &opts).unwrap() {
        WidthOutcome::Violated(wit) => {
            assert_eq!(Some(wit.clauses.clone()), want);
            let (nb, uq) = counts(&f, &wit.clauses.iter().map(|&c| c as usize).collect::<Vec<_>>());
            assert_eq!((nb, uq), (wit.neighborhood, wit.unique));
            if wit.condition == WidthCondition::Neighborhood {
                assert!(nb < wit.clauses.len());
            }
        }
        WidthOutcome::Pass => panic!("expected a violation"),
    }
}

#[test]
fn sampled_witnesses_are_sound() {
    for seed in 0..20 {
        let f = power_law_formula(30, 30, 3, 2.2, seed);
        let g = incidence_graph(&f);
        if let ExpansionOutcome::Violated(w) = check_expansion_sampled(&g, 4, 0.5, 300, seed).unwrap() {
            assert!(w.confirm(&g));
            let (nb, _) = counts(&f, &w.clauses.iter().map(|&c| c as usize).collect::<Vec<_>>());
            assert!((nb as f64) < 1.5 * w.clauses.len() as f64);
        }
    }
}

#[test]
fn sampled_recovers_planted_pairs() {
    let mut hits = 0;
    for seed in 0..100u64 {
        let mut f = power_law_formula(200, 100, 3, 4.0, seed).clauses().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (rng.random_range(0..100), rng.random_range(0..100));
        if a != b {
            f[b] = f[a].clone();
        }
        let f = Formula::new(200, 3, f).unwrap();
        let g = incidence_graph(&f);
        if let ExpansionOutcome::Violated(w) = check_expansion_sampled(&g, 2, 1.0, 10 * 100, seed).unwrap() {
            assert!(w.confirm(&g));
            hits += 1;
        }
    }
    assert!(hits >= 99, "{hits}");
}

fn all_patterns(vars: &[u32]) -> Vec<Clause> {
    (0..1u32 << vars.len())
        .map(|p| Clause::new(vars.iter().enumerate().map(|(j, &v)| Literal::new(v, p >> j & 1 == 1))))
        .collect()
}

#[test]
fn planted_cores_are_found_and_unsat() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..30 {
        let base = power_law_formula(500, 300, 3, 3.0, seed);
        let mut clauses = base.clauses().to_vec();
        let mut vars: Vec<u32> = Vec::new();
        while vars.len() < 3 {
            let v = rng.random_range(0..500);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.sort_unstable();
        for c in all_patterns(&vars) {
            let at = rng.random_range(0..=clauses.len());
            clauses.insert(at, c);
        }
        let f = Formula::new(500, 3, clauses).unwrap();
        let core = find_unsat_core(&f).expect("planted set saturates");
        assert!(core.verify(&f));
        let sub: Vec<Clause> = core.clauses.iter().map(|&i| f.clauses()[i].clone()).collect();
        assert_eq!(brute_force_sat(&sub, 25).unwrap(), SatOutcome::Unsat);
    }
}

#[test]
fn threshold_instance_has_core() {
    let (n, k) = (200, 2);
    let m = (1 << k) * 2 * k * (n - k) + 1;
    let params = GeometricParams { n, m, k, geometry: GeometrySpec::torus(2, 2).unwrap(), temperature: 0.0 };
    for seed in 0..5 {
        let inst =
            sample_geometric_formula(params, &WeightSequence::uniform(n).unwrap(), seed, Execution::default()).unwrap();
        let core = find_unsat_core(&inst.formula).expect("pigeonhole");
        assert!(core.verify(&inst.formula));
    }
}

fn small_formula() -> impl Strategy<Value = Formula> {
    (3usize..12, 1usize..12, any::<u64>()).prop_map(|(n, m, seed)| power_law_formula(n, m, 3, 2.5, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expansion_pass_is_monotone(f in small_formula(), r in 1usize..5, c in 0.0f64..2.0) {
        let g = incidence_graph(&f);
        let opts = ExactOptions::default();
        if check_expansion_exact(&g, r, c, &opts).unwrap() == ExpansionOutcome::Pass {
            for r2 in 1..=r {
                for c2 in [0.0, c / 2.0, c] {
                    prop_assert_eq!(check_expansion_exact(&g, r2, c2, &opts).unwrap(), ExpansionOutcome::Pass);
                }
            }
        }
    }

    #[test]
    fn boundary_inequality(f in small_formula(), mask in any::<u16>()) {
        let g = incidence_graph(&f);
        let sub: Vec<u32> = (0..f.len() as u32).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!sub.is_empty());
        let nb = g.neighborhood(&sub).unwrap();
        let delta = unique_variable_boundary(&g, &sub).unwrap();
        prop_assert!(delta.iter().all(|v| nb.binary_search(v).is_ok()));
        prop_assert!(delta.len() as i64 >= 2 * nb.len() as i64 - 3 * sub.len() as i64);
    }

    #[test]
    fn brute_force_models_satisfy(f in small_formula()) {
        if let SatOutcome::Sat(model) = brute_force_sat(f.clauses(), 25).unwrap() {
            let value = |v: u32| model.iter().find(|(u, _)| *u == v).unwrap().1;
            for c in f.clauses() {
                prop_assert!(c.literals().iter().any(|l| value(l.var()) != l.is_negated()));
            }
        }
    }
}
