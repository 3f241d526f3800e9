//! Experiment configuration.

use std::path::PathBuf;

use anyhow::{bail, Context};
use geosat::genmodel::MAX_K;
use geosat::weights::{power_law_weights, WeightSequence};
use geosat::{GeometrySpec, Ground, Norm};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[value(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    RegionScaling,
    NiceFraction,
    CoreDetection,
    ExpansionProbe,
    BallsBins,
    MomentCheck,
}

impl ExperimentKind {
    pub fn slug(self) -> &'static str {
        match self {
            ExperimentKind::RegionScaling => "region_scaling",
            ExperimentKind::NiceFraction => "nice_fraction",
            ExperimentKind::CoreDetection => "core_detection",
            ExperimentKind::ExpansionProbe => "expansion_probe",
            ExperimentKind::BallsBins => "balls_bins",
            ExperimentKind::MomentCheck => "moment_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Geometric,
    Nonuniform,
}

/// Everything about an experiment point except `n` and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub model: Model,
    /// Number of clauses; takes precedence over `density`.
    pub m: Option<usize>,
    /// Clause density; `m = round(density * n)`.
    pub density: Option<f64>,
    pub k: usize,
    /// Power-law exponent; unset means uniform weights.
    pub beta: Option<f64>,
    /// One weight per line, overriding `beta`.
    pub weights_file: Option<PathBuf>,
    pub dim: usize,
    pub p_norm: Norm,
    pub ground: Ground,
    pub temperature: f64,
    /// Monte Carlo samples per site for region counting.
    pub samples_per_site: u64,
    /// Absolute sample count, overriding `samples_per_site`.
    pub samples: Option<u64>,
    /// Clauses audited for niceness (all clauses when `m` is smaller).
    pub audit: usize,
    /// Subset size bound and expansion factor for expansion probes.
    pub r: usize,
    pub c: f64,
    /// Trials for the sampled checker when exhaustive search is too large.
    pub trials: usize,
    pub enumeration_cap: u64,
    /// Width bound and boundary fraction for the resolution-width
    /// conditions; skipped when `width` is unset.
    pub width: Option<usize>,
    pub eps: f64,
    /// Balls for balls-into-bins; defaults to `n`.
    pub balls: Option<u64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            model: Model::Geometric,
            m: None,
            density: None,
            k: 3,
            beta: None,
            weights_file: None,
            dim: 2,
            p_norm: Norm::P(2),
            ground: Ground::Torus,
            temperature: 0.0,
            samples_per_site: 200,
            samples: None,
            audit: 1000,
            r: 4,
            c: 0.5,
            trials: 10_000,
            enumeration_cap: 10_000_000,
            width: None,
            eps: 0.5,
            balls: None,
        }
    }
}

impl Params {
    pub fn geometry(&self) -> anyhow::Result<GeometrySpec> {
        Ok(GeometrySpec::new(self.dim, self.p_norm)?.with_ground(self.ground))
    }

    /// Clause count at `n` for `kind`: explicit `m`, then `density`, then
    /// the pigeonhole count `2^k·2k(n-k)+1` for core detection, else `n`.
    pub fn clauses_for(&self, kind: ExperimentKind, n: usize) -> usize {
        if let Some(m) = self.m {
            return m;
        }
        if let Some(d) = self.density {
            return (d * n as f64).round() as usize;
        }
        if kind == ExperimentKind::CoreDetection && self.k < 20 {
            return (1usize << self.k) * 2 * self.k * n.saturating_sub(self.k) + 1;
        }
        n
    }

    pub fn samples_for(&self, n: usize) -> u64 {
        self.samples.unwrap_or(self.samples_per_site * n as u64)
    }

    pub fn weights(&self, n: usize) -> anyhow::Result<WeightSequence> {
        if let Some(path) = &self.weights_file {
            let ws =
                WeightSequence::load(path).with_context(|| format!("reading weights from {}", path.display()))??;
            if ws.len() != n {
                bail!("{} holds {} weights but n = {n}", path.display(), ws.len());
            }
            return Ok(ws);
        }
        Ok(match self.beta {
            Some(beta) => power_law_weights(n, beta)?,
            None => WeightSequence::uniform(n)?,
        })
    }

    /// Checks every model constraint that does not depend on `n`.
    pub fn validate(&self, kind: ExperimentKind) -> anyhow::Result<()> {
        if let Some(beta) = self.beta {
            if !(beta > 2.0) || !beta.is_finite() {
                bail!("power-law exponent must satisfy beta > 2 for finite average weight (got {beta})");
            }
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            bail!("temperature must satisfy T >= 0 (got {})", self.temperature);
        }
        if self.p_norm == Norm::P(0) {
            bail!("the p-norm requires p >= 1 or p = inf (got p = 0)");
        }
        if self.dim == 0 {
            bail!("dimension must satisfy d >= 1");
        }
        if self.k == 0 || self.k > MAX_K {
            bail!("clause width must satisfy 1 <= k <= {MAX_K} (got k = {})", self.k);
        }
        if let Some(d) = self.density {
            if !(d > 0.0) || !d.is_finite() {
                bail!("clause density must be positive (got {d})");
            }
        }
        if !(self.c >= 0.0) || !(self.eps >= 0.0) {
            bail!("expansion factor c and boundary fraction eps must be >= 0");
        }
        if kind == ExperimentKind::ExpansionProbe && self.trials == 0 {
            bail!("expansion probes need trials >= 1");
        }
        if kind == ExperimentKind::MomentCheck && self.beta.is_none() {
            bail!("MOMENT_CHECK needs a power-law exponent beta");
        }
        Ok(())
    }

    /// Checks the constraints that involve `n`.
    pub fn validate_point(&self, kind: ExperimentKind, n: usize) -> anyhow::Result<()> {
        if n == 0 {
            bail!("need n >= 1");
        }
        let uses_k = matches!(
            kind,
            ExperimentKind::RegionScaling
                | ExperimentKind::NiceFraction
                | ExperimentKind::CoreDetection
                | ExperimentKind::ExpansionProbe
        );
        if uses_k && self.k > n {
            bail!("clause width must satisfy k <= n (got k = {}, n = {n})", self.k);
        }
        if matches!(kind, ExperimentKind::NiceFraction | ExperimentKind::CoreDetection | ExperimentKind::ExpansionProbe)
            && self.clauses_for(kind, n) == 0
        {
            bail!("need at least one clause at n = {n}");
        }
        Ok(())
    }
}

/// A full experiment: kind, `n` ladder, seeds and shared parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ladder: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, ladder: Vec<usize>, seeds: Vec<u64>, params: Params) -> Self {
        ExperimentConfig { kind, ladder, seeds, params, output: None }
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.ladder.is_empty() {
            bail!("the n ladder is empty");
        }
        if self.seeds.is_empty() {
            bail!("no seeds given");
        }
        self.params.validate(self.kind)?;
        for &n in &self.ladder {
            self.params.validate_point(self.kind, n)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_and_kind_names() {
        let cfg = ExperimentConfig::from_json(
            r#"{"kind": "NICE_FRACTION", "ladder": [1000], "seeds": [1], "params": {"temperature": 0.5, "p_norm": "inf"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::NiceFraction);
        assert_eq!(cfg.params.p_norm, Norm::Infinity);
        assert_eq!(cfg.params.k, 3);
        assert!(cfg.validate().is_ok());
        assert!(ExperimentConfig::from_json(
            r#"{"kind": "NICE_FRACTION", "ladder": [1], "seeds": [1], "params": {"tmp": 1}}"#
        )
        .is_err());
    }

    #[test]
    fn constraint_messages() {
        let cfg = |params: Params| ExperimentConfig::new(ExperimentKind::NiceFraction, vec![10], vec![1], params);
        let msg = |p: Params| cfg(p).validate().unwrap_err().to_string();
        assert!(msg(Params { beta: Some(2.0), ..Default::default() }).contains("beta > 2"));
        assert!(msg(Params { k: 11, ..Default::default() }).contains("k <= n"));
        assert!(msg(Params { temperature: -0.5, ..Default::default() }).contains("T >= 0"));
        assert!(msg(Params { p_norm: Norm::P(0), ..Default::default() }).contains("p >= 1"));
    }

    #[test]
    fn clause_counts() {
        let p = Params { k: 2, ..Default::default() };
        assert_eq!(p.clauses_for(ExperimentKind::CoreDetection, 200), 3169);
        assert_eq!(p.clauses_for(ExperimentKind::NiceFraction, 200), 200);
        let p = Params { density: Some(4.26), ..Default::default() };
        assert_eq!(p.clauses_for(ExperimentKind::NiceFraction, 100), 426);
    }
}
