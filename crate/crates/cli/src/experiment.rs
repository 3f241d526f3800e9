//! Experiment orchestration and JSON-lines reports.

use std::io::Write;
use std::time::Instant;

use anyhow::{anyhow, Context};
use geosat::genmodel::{
    sample_geometric_formula, sample_nonuniform_formula, Formula, GeometricParams, GeometricSampler,
};
use geosat::rng::{stream, Domain};
use geosat::structure::{
    check_expansion_exact, check_expansion_sampled, find_unsat_core, incidence_graph, resolution_width_conditions,
    ExactOptions, ExpansionOutcome, NicenessChecker, WidthCondition, WidthOutcome,
};
use geosat::voronoi::{count_regions_monte_carlo, CensusOptions};
use geosat::weights::{kahan_sum, power_law_weights, second_moment};
use geosat::{Error, Execution, WeightedSites};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bins::{balls_into_bins, max_load_threshold};
use crate::config::{ExperimentConfig, ExperimentKind, Model, Params};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One measured (parameter point, seed) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub kind: ExperimentKind,
    pub n: usize,
    pub seed: u64,
    pub params: Params,
    pub measured: Map<String, Value>,
    pub wall_time_s: f64,
    pub version: String,
}

impl ReportRecord {
    /// The single-point configuration that reproduces this record.
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.kind, vec![self.n], vec![self.seed], self.params.clone())
    }
}

/// Runs every (n, seed) point of `cfg`; records are ordered by ladder
/// position, then seed position.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> anyhow::Result<Vec<ReportRecord>> {
    cfg.validate()?;
    let points: Vec<(usize, u64)> = cfg.ladder.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect();
    let results = exec.map_indexed(points.len(), |i| {
        let (n, seed) = points[i];
        let start = Instant::now();
        run_point(cfg.kind, n, seed, &cfg.params, exec)
            .with_context(|| format!("{:?} at n = {n}, seed = {seed}", cfg.kind))
            .map(|measured| ReportRecord {
                kind: cfg.kind,
                n,
                seed,
                params: cfg.params.clone(),
                measured,
                wall_time_s: start.elapsed().as_secs_f64(),
                version: VERSION.to_string(),
            })
    });
    results.into_iter().collect()
}

/// Re-executes a record from its echoed parameters.
pub fn rerun(record: &ReportRecord, exec: Execution) -> anyhow::Result<ReportRecord> {
    run_experiment(&record.config(), exec)?.pop().ok_or_else(|| anyhow!("no record produced"))
}

pub fn write_json_lines<W: Write>(records: &[ReportRecord], mut out: W) -> anyhow::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_json_lines(text: &str) -> anyhow::Result<Vec<ReportRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("record {}", i + 1)))
        .collect()
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("measurements are JSON objects"),
    }
}

/// Generates the formula used by core detection and expansion probes.
pub fn generate_formula(
    kind: ExperimentKind,
    n: usize,
    seed: u64,
    p: &Params,
    exec: Execution,
) -> anyhow::Result<Formula> {
    let m = p.clauses_for(kind, n);
    let ws = p.weights(n)?;
    Ok(match p.model {
        Model::Nonuniform => sample_nonuniform_formula(n, m, p.k, &ws, seed, exec)?,
        Model::Geometric => {
            let params = GeometricParams { n, m, k: p.k, geometry: p.geometry()?, temperature: p.temperature };
            sample_geometric_formula(params, &ws, seed, exec)?.formula
        }
    })
}

pub fn run_point(
    kind: ExperimentKind,
    n: usize,
    seed: u64,
    p: &Params,
    exec: Execution,
) -> anyhow::Result<Map<String, Value>> {
    p.validate(kind)?;
    p.validate_point(kind, n)?;
    match kind {
        ExperimentKind::RegionScaling => region_scaling(n, seed, p, exec),
        ExperimentKind::NiceFraction => nice_fraction(n, seed, p, exec),
        ExperimentKind::CoreDetection => core_detection(n, seed, p, exec),
        ExperimentKind::ExpansionProbe => expansion_probe(n, seed, p, exec),
        ExperimentKind::BallsBins => balls_bins(n, seed, p),
        ExperimentKind::MomentCheck => moment_check(n, p),
    }
}

fn region_scaling(n: usize, seed: u64, p: &Params, exec: Execution) -> anyhow::Result<Map<String, Value>> {
    let g = p.geometry()?;
    let sites = WeightedSites::random(&p.weights(n)?, p.dim, seed)?;
    let samples = p.samples_for(n);
    let census = count_regions_monte_carlo(
        &sites,
        p.k,
        samples,
        seed,
        &g,
        CensusOptions { execution: exec, ..Default::default() },
    )?;
    let w = sites.total_weight();
    Ok(object(json!({
        "samples": samples,
        "regions": census.count,
        "half_budget_regions": census.half_budget_count,
        "total_weight": w,
        "regions_per_weight": census.count as f64 / w,
    })))
}

fn nice_fraction(n: usize, seed: u64, p: &Params, exec: Execution) -> anyhow::Result<Map<String, Value>> {
    let m = p.clauses_for(ExperimentKind::NiceFraction, n);
    let params = GeometricParams { n, m, k: p.k, geometry: p.geometry()?, temperature: p.temperature };
    let sampler = GeometricSampler::new(params, &p.weights(n)?, seed)?;
    let audited: Vec<usize> = if p.audit >= m {
        (0..m).collect()
    } else {
        let mut rng = stream(seed, Domain::Experiment, 1);
        let mut idx = rand::seq::index::sample(&mut rng, m, p.audit).into_vec();
        idx.sort_unstable();
        idx
    };
    let draws = sampler.draw_clauses(&audited, exec)?;
    let checker = NicenessChecker::for_sampler(&sampler)?;
    let mut nice = 0usize;
    for (&i, drawn) in audited.iter().zip(&draws) {
        nice += checker.is_nice_draw(i, drawn)? as usize;
    }
    Ok(object(json!({
        "m": m,
        "audited": audited.len(),
        "nice": nice,
        "fraction": if audited.is_empty() { 0.0 } else { nice as f64 / audited.len() as f64 },
    })))
}

fn core_detection(n: usize, seed: u64, p: &Params, exec: Execution) -> anyhow::Result<Map<String, Value>> {
    let f = generate_formula(ExperimentKind::CoreDetection, n, seed, p, exec)?;
    let core = find_unsat_core(&f);
    Ok(object(json!({
        "m": f.len(),
        "core_found": core.is_some(),
        "core_verified": core.as_ref().is_some_and(|c| c.verify(&f)),
        "core": core.map(|c| c.certificate()),
    })))
}

fn expansion_probe(n: usize, seed: u64, p: &Params, exec: Execution) -> anyhow::Result<Map<String, Value>> {
    let f = generate_formula(ExperimentKind::ExpansionProbe, n, seed, p, exec)?;
    let gph = incidence_graph(&f);
    let opts = ExactOptions { cap: p.enumeration_cap as u128, execution: exec };
    let (method, outcome) = match check_expansion_exact(&gph, p.r, p.c, &opts) {
        Ok(o) => ("exact", o),
        Err(Error::BudgetExceeded { .. }) => ("sampled", check_expansion_sampled(&gph, p.r, p.c, p.trials, seed)?),
        Err(e) => return Err(e.into()),
    };
    let (label, witness) = match &outcome {
        ExpansionOutcome::Pass => ("pass", Value::Null),
        ExpansionOutcome::PassProbable { .. } => ("pass_probable", Value::Null),
        ExpansionOutcome::Violated(w) => {
            ("violated", json!({ "clauses": w.clauses, "neighborhood": w.neighborhood, "threshold": w.threshold }))
        }
    };
    let mut out = object(json!({ "m": f.len(), "method": method, "outcome": label, "witness": witness }));
    if let Some(w) = p.width {
        let width = match resolution_width_conditions(&gph, w, p.eps, &opts) {
            Ok(WidthOutcome::Pass) => json!({ "outcome": "pass" }),
            Ok(WidthOutcome::Violated(wit)) => json!({
                "outcome": "violated",
                "condition": match wit.condition {
                    WidthCondition::Neighborhood => "neighborhood",
                    WidthCondition::UniqueBoundary => "unique_boundary",
                },
                "clauses": wit.clauses,
                "neighborhood": wit.neighborhood,
                "unique": wit.unique,
            }),
            Err(Error::BudgetExceeded { required, .. }) => {
                json!({ "outcome": "budget_exceeded", "required": required as f64 })
            }
            Err(e) => return Err(e.into()),
        };
        out.insert("width_conditions".into(), width);
    }
    Ok(out)
}

fn balls_bins(n: usize, seed: u64, p: &Params) -> anyhow::Result<Map<String, Value>> {
    let ws = p.weights(n)?;
    let balls = p.balls.unwrap_or(n as u64);
    let load = balls_into_bins(balls, &ws.probabilities(), seed)?;
    let threshold = max_load_threshold(n as u64);
    Ok(object(
        json!({ "balls": balls, "max_load": load, "threshold": threshold, "meets_threshold": load >= threshold }),
    ))
}

fn moment_check(n: usize, p: &Params) -> anyhow::Result<Map<String, Value>> {
    let beta = p.beta.ok_or_else(|| anyhow!("MOMENT_CHECK needs beta"))?;
    let ws = power_law_weights(n, beta)?;
    let sum = kahan_sum(ws.weights().iter().copied());
    let predicted = (beta - 1.0) / (beta - 2.0) * (n as f64).powf((beta - 2.0) / (beta - 1.0));
    let s2 = second_moment(&ws);
    Ok(object(json!({
        "weight_sum": sum,
        "predicted_sum": predicted,
        "sum_ratio": sum / predicted,
        "second_moment": s2,
        "scaled_second_moment": s2 * n as f64 / (n as f64).ln(),
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(kind: ExperimentKind, ladder: Vec<usize>, params: Params) -> Vec<ReportRecord> {
        run_experiment(&ExperimentConfig::new(kind, ladder, vec![1, 2], params), Execution::default()).unwrap()
    }

    #[test]
    fn records_are_ordered_and_reproducible() {
        let recs = run(
            ExperimentKind::RegionScaling,
            vec![50, 100],
            Params { k: 2, samples_per_site: 50, ..Default::default() },
        );
        assert_eq!(recs.iter().map(|r| (r.n, r.seed)).collect::<Vec<_>>(), vec![(50, 1), (50, 2), (100, 1), (100, 2)]);
        for r in &recs {
            assert_eq!(rerun(r, Execution::Sequential).unwrap().measured, r.measured);
        }
        let mut buf = Vec::new();
        write_json_lines(&recs, &mut buf).unwrap();
        let back = read_json_lines(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn moment_records() {
        let recs = run(ExperimentKind::MomentCheck, vec![10_000], Params { beta: Some(3.0), ..Default::default() });
        let m = &recs[0].measured;
        let s2 = m["second_moment"].as_f64().unwrap();
        let ws = power_law_weights(10_000, 3.0).unwrap();
        let direct: f64 = ws.weights().iter().map(|w| (w / ws.total()).powi(2)).sum();
        assert!((s2 - direct).abs() < 1e-12);
        assert!((m["scaled_second_moment"].as_f64().unwrap() - s2 * 10_000.0 / 10_000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn threshold_nice_fraction_is_one() {
        let recs = run(ExperimentKind::NiceFraction, vec![500], Params { temperature: 0.0, ..Default::default() });
        assert!(recs.iter().all(|r| r.measured["fraction"] == json!(1.0)));
    }

    #[test]
    fn threshold_core_detection() {
        let recs = run(ExperimentKind::CoreDetection, vec![60], Params { k: 2, ..Default::default() });
        assert!(recs
            .iter()
            .all(|r| r.measured["core_found"] == json!(true) && r.measured["core_verified"] == json!(true)));
    }

    #[test]
    fn expansion_probe_falls_back_to_sampling() {
        let p = Params {
            model: Model::Nonuniform,
            beta: Some(2.5),
            r: 4,
            enumeration_cap: 1000,
            trials: 200,
            ..Default::default()
        };
        let recs = run(ExperimentKind::ExpansionProbe, vec![100], p);
        assert!(recs.iter().all(|r| r.measured["method"] == json!("sampled")));
        let p = Params { model: Model::Nonuniform, beta: Some(4.0), width: Some(3), ..Default::default() };
        let recs = run(ExperimentKind::ExpansionProbe, vec![20], p);
        assert!(recs
            .iter()
            .all(|r| r.measured["method"] == json!("exact") && r.measured.contains_key("width_conditions")));
    }

    #[test]
    fn balls_bins_record() {
        let recs = run(ExperimentKind::BallsBins, vec![1000], Params::default());
        assert!(recs.iter().all(|r| r.measured["max_load"].as_u64().unwrap() >= 2));
    }
}
