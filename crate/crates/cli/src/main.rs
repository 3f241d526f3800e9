use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use geosat::genmodel::{sample_geometric_formula, sample_nonuniform_formula, GeometricParams};
use geosat::structure::find_unsat_core;
use geosat::voronoi::{count_regions_monte_carlo, CensusOptions};
use geosat::{Execution, Ground, Norm, WeightedSites};
use geosat_bench::config::{ExperimentConfig, ExperimentKind, Model, Params};
use geosat_bench::dimacs::{emit_dimacs, read_dimacs_file};
use geosat_bench::experiment::{run_experiment, write_json_lines};
use serde_json::json;

#[derive(Parser)]
#[command(name = "geosat", version, about = "Random k-SAT models, Voronoi region counting and structure checks")]
struct Cli {
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a formula and write it as DIMACS CNF.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        seed: u64,
        /// Output file (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Look for a constant-size unsatisfiable core and print its certificate.
    Core {
        /// DIMACS input; when absent a formula is generated from the model flags.
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, required_unless_present = "input")]
        seed: Option<u64>,
        /// Also write the core clauses as DIMACS.
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Monte Carlo count of non-empty order-k Voronoi regions.
    VoronoiCount {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        seed: u64,
        /// Site set as JSON (`{"dim", "positions", "weights"}`) instead of random sites.
        #[arg(long)]
        sites: Option<PathBuf>,
        /// Write the site set used as JSON.
        #[arg(long)]
        save_sites: Option<PathBuf>,
    },
    /// Run a configured experiment and write JSON-lines records.
    Experiment {
        /// JSON configuration; flags given here override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<ExperimentKind>,
        /// Comma-separated values of n.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        probe: ProbeArgs,
        /// Output file; defaults to `<out-dir>/<kind>.jsonl`, or stdout without an out-dir.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, env = "GEOSAT_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Power-law moment checks over an n ladder.
    Moments {
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000")]
        ladder: Vec<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    Norm::parse(s).map_err(|e| e.to_string())
}

fn parse_ground(s: &str) -> Result<Ground, String> {
    match s {
        "torus" => Ok(Ground::Torus),
        "hypercube" => Ok(Ground::Hypercube),
        _ => Err(format!("`{s}` is neither `torus` nor `hypercube`")),
    }
}

/// Model parameters; unset flags keep the config or default value.
#[derive(Args, Default)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Number of variables (or sites).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Clause density m/n.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Power-law exponent (> 2); uniform weights when omitted.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// One weight per line.
    #[arg(long)]
    weights_file: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// A positive integer or `inf`.
    #[arg(long, value_parser = parse_norm)]
    p_norm: Option<Norm>,
    /// `torus` or `hypercube`.
    #[arg(long, value_parser = parse_ground)]
    ground: Option<Ground>,
    #[arg(long, short = 't', allow_negative_numbers = true)]
    temperature: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    samples_per_site: Option<u64>,
}

/// Settings specific to niceness audits and expansion probes.
#[derive(Args, Default)]
struct ProbeArgs {
    #[arg(long)]
    audit: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    enumeration_cap: Option<u64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    balls: Option<u64>,
}

impl ModelArgs {
    fn apply(&self, p: &mut Params) {
        macro_rules! set {
            ($($field:ident),*) => {$( if let Some(v) = self.$field.clone() { p.$field = v; } )*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$( if self.$field.is_some() { p.$field = self.$field.clone(); } )*};
        }
        set!(model, k, dim, p_norm, ground, temperature, samples_per_site);
        set_opt!(m, density, beta, weights_file, samples);
    }

    fn params(&self) -> Params {
        let mut p = Params::default();
        self.apply(&mut p);
        p
    }

    fn require_n(&self) -> anyhow::Result<usize> {
        self.n.context("--n is required")
    }
}

impl ProbeArgs {
    fn apply(&self, p: &mut Params) {
        if let Some(v) = self.audit {
            p.audit = v;
        }
        if let Some(v) = self.r {
            p.r = v;
        }
        if let Some(v) = self.c {
            p.c = v;
        }
        if let Some(v) = self.trials {
            p.trials = v;
        }
        if let Some(v) = self.enumeration_cap {
            p.enumeration_cap = v;
        }
        if self.width.is_some() {
            p.width = self.width;
        }
        if let Some(v) = self.eps {
            p.eps = v;
        }
        if self.balls.is_some() {
            p.balls = self.balls;
        }
    }
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Generates a formula from model flags, returning it with DIMACS comments.
fn generate(
    model: &ModelArgs,
    seed: u64,
    kind: ExperimentKind,
    exec: Execution,
) -> anyhow::Result<(geosat::genmodel::Formula, Vec<String>)> {
    let n = model.require_n()?;
    let p = model.params();
    p.validate(kind)?;
    p.validate_point(kind, n)?;
    let m = p.clauses_for(kind, n);
    let ws = p.weights(n)?;
    let f = match p.model {
        Model::Nonuniform => sample_nonuniform_formula(n, m, p.k, &ws, seed, exec)?,
        Model::Geometric => {
            let params = GeometricParams { n, m, k: p.k, geometry: p.geometry()?, temperature: p.temperature };
            sample_geometric_formula(params, &ws, seed, exec)?.formula
        }
    };
    let mut comments = vec![format!("geosat {} seed {seed}", env!("CARGO_PKG_VERSION"))];
    let weights = match (&p.weights_file, p.beta) {
        (Some(path), _) => format!("weights file {}", path.display()),
        (None, Some(beta)) => format!("power-law beta {beta}"),
        (None, None) => "uniform weights".to_string(),
    };
    match p.model {
        Model::Nonuniform => comments.push(format!("model nonuniform n {n} m {m} k {} {weights}", p.k)),
        Model::Geometric => comments.push(format!(
            "model geometric n {n} m {m} k {} d {} p {} ground {:?} T {} {weights}",
            p.k, p.dim, p.p_norm, p.ground, p.temperature
        )),
    }
    Ok((f, comments))
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Generate { model, seed, output } => {
            let (f, comments) = generate(&model, seed, ExperimentKind::NiceFraction, exec)?;
            let mut out = open_output(output.as_deref())?;
            emit_dimacs(&f, &comments, &mut out)?;
            out.flush()?;
        }
        Command::Core { input, model, seed, dimacs } => {
            let f = match (&input, seed) {
                (Some(path), _) => read_dimacs_file(path)?,
                (None, Some(seed)) => generate(&model, seed, ExperimentKind::CoreDetection, exec)?.0,
                (None, None) => bail!("give --input or --seed"),
            };
            let core = find_unsat_core(&f);
            let report = match &core {
                Some(c) => json!({ "found": true, "verified": c.verify(&f), "certificate": c.certificate() }),
                None => json!({ "found": false }),
            };
            println!("{report}");
            if let (Some(path), Some(c)) = (dimacs, core) {
                std::fs::write(&path, c.to_dimacs(&f)).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::VoronoiCount { model, seed, sites, save_sites } => {
            let mut p = model.params();
            p.validate(ExperimentKind::RegionScaling)?;
            let site_set = match &sites {
                Some(path) => WeightedSites::from_json(&std::fs::read_to_string(path)?)?,
                None => {
                    let n = model.require_n()?;
                    WeightedSites::random(&p.weights(n)?, p.dim, seed)?
                }
            };
            if sites.is_some() {
                p.dim = site_set.dim();
            }
            p.validate_point(ExperimentKind::RegionScaling, site_set.len())?;
            let g = p.geometry()?;
            let samples = p.samples_for(site_set.len());
            let census = count_regions_monte_carlo(
                &site_set,
                p.k,
                samples,
                seed,
                &g,
                CensusOptions { execution: exec, ..Default::default() },
            )?;
            println!(
                "{}",
                json!({
                    "n": site_set.len(), "k": p.k, "seed": seed, "samples": samples,
                    "regions": census.count, "half_budget_regions": census.half_budget_count,
                    "total_weight": site_set.total_weight(),
                })
            );
            if let Some(path) = save_sites {
                std::fs::write(&path, site_set.to_json())?;
            }
        }
        Command::Experiment { config, kind, ladder, seeds, model, probe, output, out_dir } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => {
                    let kind = kind.context("--kind is required without --config")?;
                    ExperimentConfig::new(kind, vec![], vec![], Params::default())
                }
            };
            if let Some(k) = kind {
                cfg.kind = k;
            }
            if let Some(l) = ladder {
                cfg.ladder = l;
            } else if let Some(n) = model.n {
                cfg.ladder = vec![n];
            }
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            model.apply(&mut cfg.params);
            probe.apply(&mut cfg.params);
            if output.is_some() {
                cfg.output = output;
            }
            let target = cfg.output.clone().or_else(|| out_dir.map(|d| d.join(format!("{}.jsonl", cfg.kind.slug()))));
            let records = run_experiment(&cfg, exec)?;
            write_json_lines(&records, open_output(target.as_deref())?)?;
        }
        Command::Moments { beta, ladder, output } => {
            let mut out = open_output(output.as_deref())?;
            for b in beta {
                let params = Params { beta: Some(b), ..Default::default() };
                let cfg = ExperimentConfig::new(ExperimentKind::MomentCheck, ladder.clone(), vec![0], params);
                write_json_lines(&run_experiment(&cfg, exec)?, &mut out)?;
            }
        }
    }
    Ok(())
}
