//! Subcommands. Each failure is tagged with the stage it happened in; the binary maps
//! stages to exit codes.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use garp::mcmc::run_chains;
use garp::simulate::generate_scenario;
use garp::summary::summarize;
use garp::{ChainSample, GibbsPrior, LabeledDataset, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{load_config, parse_mode, RunConfig};
use crate::data::{read_dataset, to_csv, Dataset};
use crate::output::{
    coclustering_csv, kv_table, read_samples, scatter_svg, write_samples, Label, ParamsRecord, SamplesHeader,
    SummaryFile, SAMPLES_FORMAT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Data,
    Sampling,
    Summary,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Self::Config => "config",
            Self::Data => "data",
            Self::Sampling => "sampling",
            Self::Summary => "summary",
            Self::Output => "output",
        }
    }

    /// Clap reserves 2 for usage errors.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Config => 3,
            Self::Data => 4,
            Self::Sampling => 5,
            Self::Summary => 6,
            Self::Output => 7,
        }
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: anyhow::Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage failed: {:#}", self.stage.name(), self.error)
    }
}

impl std::error::Error for StageError {}

trait InStage<T> {
    fn stage(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> InStage<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            error: e.into(),
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "garp", version, about = "Graph-aligned random partition models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one of the built-in synthetic data sets.
    Simulate(SimulateArgs),
    /// Run the sampler on a CSV data set and summarize the draws.
    Fit(FitArgs),
    /// Summarize an existing sample stream.
    Summarize(SummarizeArgs),
    /// Closed-form and Monte Carlo checks of the prior.
    PriorCheck(PriorCheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    WellSpecified,
    Misspecified,
    NonConnected,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::WellSpecified => Scenario::WellSpecified,
            ScenarioArg::Misspecified => Scenario::Misspecified,
            ScenarioArg::NonConnected => Scenario::NonConnected,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives data.csv and truth.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides chain.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides chain.chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Overrides chain.mode: exact or paper.
    #[arg(long)]
    pub mode: Option<String>,
    /// The data file starts with a header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Replaces the config recorded in the sample header.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct PriorCheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of units.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a).map(|_| ()),
        Command::Summarize(a) => cmd_summarize(&a).map(|_| ()),
        Command::PriorCheck(a) => cmd_prior_check(&a).map(|r| print!("{}", r.text())),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), StageError> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .stage(Stage::Output)
}

fn create_dir(dir: &Path) -> Result<(), StageError> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .stage(Stage::Output)
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, StageError> {
    let mut s = serde_json::to_vec_pretty(v).stage(Stage::Output)?;
    s.push(b'\n');
    Ok(s)
}

#[derive(Serialize)]
struct Truth<'a> {
    scenario: Scenario,
    seed: u64,
    config_hash: String,
    partition: Vec<Label>,
    vertex_params: Vec<ParamsRecord>,
    adjacency: &'a [(usize, usize)],
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(), StageError> {
    let scenario: Scenario = a.scenario.into();
    let ds: LabeledDataset<f64> = generate_scenario(scenario, a.seed).stage(Stage::Data)?;
    let settings = serde_json::to_string(&(scenario, a.seed)).expect("serializes");
    let hash = hex::encode(Sha256::digest(settings.as_bytes()));
    let name = serde_json::to_value(scenario).expect("serializes");
    let csv = to_csv(&Dataset {
        comments: vec![format!(" garp simulate scenario={} seed={} config_hash={hash}", name.as_str().unwrap_or(""), a.seed)],
        header: None,
        points: ds.points.clone(),
    });
    create_dir(&a.out)?;
    write_file(&a.out.join("data.csv"), csv.as_bytes())?;
    let truth = Truth {
        scenario,
        seed: a.seed,
        config_hash: hash,
        partition: ds.true_assignments.iter().map(|&x| x.into()).collect(),
        vertex_params: ds.true_vertex_params.iter().map(Into::into).collect(),
        adjacency: &ds.adjacency,
    };
    write_file(&a.out.join("truth.json"), &to_json(&truth)?)?;
    Ok(())
}

#[derive(Serialize)]
struct ChainInfo {
    chain: usize,
    retained: usize,
    mh_acceptance: f64,
    elapsed_secs: f64,
}

#[derive(Serialize)]
struct RunInfo {
    config_hash: String,
    seed: u64,
    version: &'static str,
    data: String,
    n_units: usize,
    dim: usize,
    chains: Vec<ChainInfo>,
    sampling_secs: f64,
    summary_secs: f64,
    config: RunConfig,
}

/// What `fit` produced, for callers that drive it as a library.
pub struct FitOutcome {
    pub config: RunConfig,
    pub summary: SummaryFile,
    pub samples: Vec<ChainSample<f64>>,
}

pub fn resolve_fit_config(a: &FitArgs) -> Result<RunConfig> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg.chain.seed = s;
    }
    if let Some(c) = a.chains {
        if c == 0 {
            return Err(anyhow!("--chains must be at least 1"));
        }
        cfg.chains = c;
    }
    if let Some(m) = &a.mode {
        cfg.chain.mode = parse_mode(m)?;
    }
    if a.header {
        cfg.data_header = true;
    }
    Ok(cfg)
}

pub fn cmd_fit(a: &FitArgs) -> Result<FitOutcome, StageError> {
    let cfg = resolve_fit_config(a).stage(Stage::Config)?;
    let data = read_dataset(&a.data, cfg.data_header).stage(Stage::Data)?;
    let model = cfg.model(&data.points).stage(Stage::Config)?;
    let hash = cfg.hash();
    let seed = cfg.chain.seed;
    log::info!("config {hash}, {} units in {} dimensions", data.points.len(), data.dim());

    let start = Instant::now();
    let runs = run_chains(&cfg.chain, cfg.chains, &data.points, &model).stage(Stage::Sampling)?;
    let sampling_secs = start.elapsed().as_secs_f64();

    create_dir(&a.out)?;
    let header = SamplesHeader {
        format: SAMPLES_FORMAT.into(),
        config_hash: hash.clone(),
        seed,
        n_units: data.points.len(),
        dim: data.dim(),
        chains: cfg.chains,
        config: cfg.clone(),
    };
    let per_chain: Vec<Vec<ChainSample<f64>>> = runs.iter().map(|r| r.samples.clone()).collect();
    let path = a.out.join("samples.jsonl");
    let file = fs::File::create(&path)
        .with_context(|| format!("creating {}", path.display()))
        .stage(Stage::Output)?;
    write_samples(&mut BufWriter::new(file), &header, &per_chain).stage(Stage::Output)?;

    let samples: Vec<ChainSample<f64>> = per_chain.into_iter().flatten().collect();
    let start = Instant::now();
    let summary = write_summary(&cfg, &data.points, &samples, &a.out)?;
    let info = RunInfo {
        config_hash: hash,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        data: a.data.display().to_string(),
        n_units: data.points.len(),
        dim: data.dim(),
        chains: runs
            .iter()
            .enumerate()
            .map(|(chain, r)| ChainInfo {
                chain,
                retained: r.samples.len(),
                mh_acceptance: r.mh_acceptance,
                elapsed_secs: r.elapsed_secs,
            })
            .collect(),
        sampling_secs,
        summary_secs: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    write_file(&a.out.join("run_info.json"), &to_json(&info)?)?;
    Ok(FitOutcome {
        config: cfg,
        summary,
        samples,
    })
}

/// Writes summary.json, coclustering.csv and plot.svg into `out`.
fn write_summary(cfg: &RunConfig, data: &[Vec<f64>], samples: &[ChainSample<f64>], out: &Path) -> Result<SummaryFile, StageError> {
    let model = cfg.model(data).stage(Stage::Config)?;
    let s = summarize(samples, data, &model, &cfg.summary).stage(Stage::Summary)?;
    let hash = cfg.hash();
    let seed = cfg.chain.seed;
    let file = SummaryFile::new(&hash, seed, &s);
    create_dir(out)?;
    write_file(&out.join("summary.json"), &to_json(&file)?)?;
    write_file(
        &out.join("coclustering.csv"),
        coclustering_csv(&hash, seed, &s.vertex_units, &s.cocluster).as_bytes(),
    )?;
    write_file(&out.join("plot.svg"), scatter_svg(&hash, seed, data, &s).as_bytes())?;
    log::info!(
        "K_v = {}, {} edge units; K_v posterior:\n{}",
        file.k_v,
        file.n_edge_units,
        kv_table(&file.kv_posterior)
    );
    Ok(file)
}

pub fn cmd_summarize(a: &SummarizeArgs) -> Result<SummaryFile, StageError> {
    let f = fs::File::open(&a.samples)
        .with_context(|| format!("opening {}", a.samples.display()))
        .stage(Stage::Data)?;
    let (header, samples) = read_samples(BufReader::new(f))
        .with_context(|| format!("reading {}", a.samples.display()))
        .stage(Stage::Data)?;
    let mut cfg = match &a.config {
        Some(p) => load_config(Some(p)).stage(Stage::Config)?,
        None => header.config.clone(),
    };
    if a.header {
        cfg.data_header = true;
    }
    let data = read_dataset(&a.data, cfg.data_header).stage(Stage::Data)?;
    if data.points.len() != header.n_units {
        return Err(StageError {
            stage: Stage::Data,
            error: anyhow!(
                "samples describe {} units but the data have {} rows",
                header.n_units,
                data.points.len()
            ),
        });
    }
    let file = write_summary(&cfg, &data.points, &samples, &a.out)?;
    print!("{}", kv_table(&file.kv_posterior));
    Ok(file)
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleClusterRow {
    pub n_v: usize,
    pub g: f64,
    pub rate: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PriorReport {
    pub config_hash: String,
    pub seed: u64,
    pub prior: GibbsPrior<f64>,
    pub p_v: f64,
    pub n: usize,
    pub draws: usize,
    pub truncation_probability: f64,
    pub monte_carlo: f64,
    pub monte_carlo_se: f64,
    pub single_cluster: Vec<SingleClusterRow>,
    pub rate_ratios: Vec<SingleClusterRow>,
}

impl PriorReport {
    pub fn text(&self) -> String {
        let mut s = format!(
            "config_hash {}\nseed {}\nprior {:?}\np_v {}  N {}\ntruncation probability (closed form) {:.6}\ntruncation probability (Monte Carlo, {} draws) {:.6} +- {:.6}\n",
            self.config_hash, self.seed, self.prior, self.p_v, self.n, self.truncation_probability, self.draws, self.monte_carlo, self.monte_carlo_se
        );
        let table = |title: &str, rows: &[SingleClusterRow]| {
            let mut t = format!("\n{title}\n     n_v            g_n     leading rate     ratio\n");
            for r in rows {
                t.push_str(&format!("{:>8} {:>14.6e} {:>16.6e} {:>9.5}\n", r.n_v, r.g, r.rate, r.ratio));
            }
            t
        };
        s.push_str(&table("single-cluster probability", &self.single_cluster));
        s.push_str(&table("rate diagnostics", &self.rate_ratios));
        s
    }
}

/// Only the vertex indicators and the number of vertex-clusters decide the truncation
/// event, so the Monte Carlo skips the edge urn.
fn truncation_event_draw(rng: &mut ChaCha8Rng, prior: &GibbsPrior<f64>, p_v: f64, n: usize) -> bool {
    let mut counts: Vec<usize> = Vec::new();
    let mut n_e = 0;
    for _ in 0..n {
        if rng.random::<f64>() >= p_v {
            n_e += 1;
            continue;
        }
        let w = prior.gcrp_weights(&counts);
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut j = w.len() - 1;
        for (k, &x) in w.iter().enumerate() {
            if u < x {
                j = k;
                break;
            }
            u -= x;
        }
        if j == counts.len() {
            counts.push(1);
        } else {
            counts[j] += 1;
        }
    }
    n_e == 0 || counts.len() >= 2
}

pub fn cmd_prior_check(a: &PriorCheckArgs) -> Result<PriorReport, StageError> {
    let cfg = load_config(a.config.as_deref()).stage(Stage::Config)?;
    if a.n == 0 || a.draws == 0 {
        return Err(StageError {
            stage: Stage::Config,
            error: anyhow!("--n and --draws must be positive"),
        });
    }
    let prior = cfg.prior.clone();
    let p_v = cfg.hyper.p_v;
    let closed = prior.truncation_probability(p_v, a.n).stage(Stage::Sampling)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let hits = (0..a.draws)
        .filter(|_| truncation_event_draw(&mut rng, &prior, p_v, a.n))
        .count();
    let mc = hits as f64 / a.draws as f64;
    let row = |n_v: usize| -> Result<SingleClusterRow, StageError> {
        let g = prior.prob_single_cluster(n_v).stage(Stage::Sampling)?;
        let rate = prior.single_cluster_rate(n_v);
        Ok(SingleClusterRow {
            n_v,
            g,
            rate,
            ratio: g / rate,
        })
    };
    let mut grid: Vec<usize> = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000]
        .into_iter()
        .filter(|&x| x < a.n)
        .collect();
    grid.push(a.n);
    let report = PriorReport {
        config_hash: cfg.hash(),
        seed: a.seed,
        prior: prior.clone(),
        p_v,
        n: a.n,
        draws: a.draws,
        truncation_probability: closed,
        monte_carlo: mc,
        monte_carlo_se: (mc * (1.0 - mc) / a.draws as f64).sqrt(),
        single_cluster: grid.into_iter().map(row).collect::<Result<_, _>>()?,
        rate_ratios: [100, 1000, 10_000].into_iter().map(row).collect::<Result<_, _>>()?,
    };
    if let Some(p) = &a.out {
        write_file(p, &to_json(&report)?)?;
    }
    Ok(report)
}
