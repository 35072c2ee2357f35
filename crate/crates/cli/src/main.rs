//! Command-line front end: dataset generation, theorem verification,
//! clustering and estimation runners, and d-separation queries.
//!
//! Every command validates its configuration before touching the filesystem
//! and is deterministic given (config, seed): re-runs produce byte-identical
//! outputs. CSV output uses '.' decimals, '\n' line endings and a mandatory
//! header row.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wslb_core::bn::{classify_side_info, BayesNet, SideInfoRoles};
use wslb_core::channel::{
    sample_paths, sample_velocity_trajectory, synthesize_channel, VelocityScenario,
};
use wslb_core::clustering::{run_velocity_experiment, GmmOptions, KmeansOptions};
use wslb_core::dataset::write_dataset;
use wslb_core::estimation::run_estimation_experiment;
use wslb_core::moments::{verify_theorem1, BetaModel, MomentSummary};
use wslb_core::rng::ParamStreams;
use wslb_core::{ChannelConfig, PathPrior};

#[derive(Parser)]
#[command(name = "wslb", version, about = "Structured wireless-channel statistics toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a channel dataset in the binary format and print a JSON summary.
    GenData(RunArgs),
    /// Verify the conditional-moment claims by Monte Carlo; exit 0 iff all bounds hold.
    VerifyTheorem(VerifyArgs),
    /// Run the velocity-clustering experiment and write its CSV table.
    Cluster(RunArgs),
    /// Run the four-estimator SNR sweep and write its CSV table.
    Estimate(RunArgs),
    /// Classify a side-information graph and print the rationale trails.
    Dsep(DsepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sample phases from a spike at 0 instead of uniform; the run must fail.
    #[arg(long)]
    negative_control: bool,
    /// Overrides the tolerance from the config file.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct DsepArgs {
    /// Graph file: one "edge A B" line per directed edge, optional "node X" lines.
    #[arg(long)]
    graph: PathBuf,
    /// Node playing the phase role.
    #[arg(long, default_value = "beta")]
    beta: String,
    /// Node playing the path-parameter role.
    #[arg(long, default_value = "Xi")]
    xi: String,
    /// Node playing the channel role.
    #[arg(long, default_value = "H")]
    h: String,
    /// Node playing the side-information role.
    #[arg(long, default_value = "z")]
    z: String,
    /// Observed nodes, comma separated; defaults to "<xi>,<z>".
    #[arg(long, value_delimiter = ',')]
    observed: Option<Vec<String>>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::GenData(args) => cmd_gen_data(&args).map(|()| 0),
        Command::VerifyTheorem(args) => cmd_verify_theorem(&args),
        Command::Cluster(args) => cmd_cluster(&args).map(|()| 0),
        Command::Estimate(args) => cmd_estimate(&args).map(|()| 0),
        Command::Dsep(args) => cmd_dsep(&args).map(|()| 0),
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn out_dir(args: &RunArgs) -> Result<PathBuf> {
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

fn fmt_csv(value: f64) -> String {
    format!("{value}")
}

// ---------------------------------------------------------------------------
// gen-data

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenDataConfig {
    /// Number of records.
    n: usize,
    #[serde(default)]
    seed: u64,
    /// Unlabeled source: channel grid plus path prior.
    channel: Option<ChannelConfig>,
    prior: Option<PathPrior>,
    /// Labeled source: velocity scenario (mutually exclusive with the above).
    velocity: Option<VelocityScenario>,
}

#[derive(Serialize)]
struct GenDataSummary {
    n: usize,
    m: usize,
    seed: u64,
    labeled: bool,
    sha256: String,
    path: String,
}

fn cmd_gen_data(args: &RunArgs) -> Result<()> {
    let cfg: GenDataConfig = load_config(&args.config)?;
    if cfg.n == 0 {
        bail!("empty dataset: n must be >= 1");
    }
    let seed = args.seed.unwrap_or(cfg.seed);
    let mut streams = ParamStreams::new(seed);

    let (channel, records, labels) = match (&cfg.velocity, &cfg.channel, &cfg.prior) {
        (Some(sc), None, None) => {
            sc.validate()?;
            let mut records = Vec::with_capacity(cfg.n);
            let mut labels = Vec::with_capacity(cfg.n);
            for _ in 0..cfg.n {
                let (h, label) = sample_velocity_trajectory(sc, &mut streams)?;
                records.push(h);
                labels.push(label);
            }
            (sc.cfg.clone(), records, Some(labels))
        }
        (None, Some(channel), Some(prior)) => {
            channel.validate()?;
            prior.validate()?;
            let mut records = Vec::with_capacity(cfg.n);
            for _ in 0..cfg.n {
                let paths = sample_paths(prior, prior.num_paths, &mut streams)?;
                records.push(synthesize_channel(channel, &paths)?);
            }
            (channel.clone(), records, None)
        }
        _ => bail!("config must set either [velocity] or both [channel] and [prior]"),
    };

    let dir = out_dir(args)?;
    let path = dir.join("dataset.wslb");
    write_dataset(&path, &channel, &records, labels.as_deref())?;

    let bytes = std::fs::read(&path)?;
    let digest = Sha256::digest(&bytes);
    let mut sha256 = String::with_capacity(64);
    for b in digest {
        write!(sha256, "{b:02x}")?;
    }
    let summary = GenDataSummary {
        n: cfg.n,
        m: channel.total_dim(),
        seed,
        labeled: labels.is_some(),
        sha256,
        path: path.display().to_string(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

// ---------------------------------------------------------------------------
// verify-theorem

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    n_xi: usize,
    n_beta: usize,
    tol: f64,
    #[serde(default)]
    seed: u64,
    channel: ChannelConfig,
    prior: PathPrior,
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    negative_control: bool,
    tol: f64,
    n_xi: usize,
    n_beta: usize,
    seed: u64,
    reports: Vec<MomentSummary>,
}

fn cmd_verify_theorem(args: &VerifyArgs) -> Result<i32> {
    let cfg: VerifyConfig = load_config(&args.run.config)?;
    let seed = args.run.seed.unwrap_or(cfg.seed);
    let tol = args.tol.unwrap_or(cfg.tol);
    let beta_model = if args.negative_control { BetaModel::Spike(0.0) } else { BetaModel::Uniform };

    let mut streams = ParamStreams::new(seed);
    let outcome = verify_theorem1(
        &cfg.channel,
        &cfg.prior,
        cfg.n_xi,
        cfg.n_beta,
        &mut streams,
        tol,
        beta_model,
    )?;
    let report = VerifyReport {
        pass: outcome.pass,
        negative_control: args.negative_control,
        tol,
        n_xi: cfg.n_xi,
        n_beta: cfg.n_beta,
        seed,
        reports: outcome.reports.iter().map(|r| r.summary()).collect(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    let dir = out_dir(&args.run)?;
    std::fs::write(dir.join("verify.json"), format!("{json}\n"))?;
    println!("{json}");
    Ok(if report.pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// cluster

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterConfig {
    n_train: usize,
    n_test: usize,
    k_grid: Vec<usize>,
    #[serde(default)]
    seed: u64,
    /// Full scenario; defaults to the desk-scale four-region scenario.
    velocity: Option<VelocityScenario>,
    /// Paths per trajectory for the default scenario.
    paths: Option<usize>,
    gmm: Option<GmmConfig>,
    kmeans: Option<KmeansConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GmmConfig {
    max_iter: Option<usize>,
    rel_tol: Option<f64>,
    floor: Option<f64>,
    restarts: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KmeansConfig {
    max_iter: Option<usize>,
    restarts: Option<usize>,
}

fn cmd_cluster(args: &RunArgs) -> Result<()> {
    let cfg: ClusterConfig = load_config(&args.config)?;
    if cfg.velocity.is_some() && cfg.paths.is_some() {
        bail!("set either [velocity] or paths, not both");
    }
    let sc = cfg
        .velocity
        .clone()
        .unwrap_or_else(|| VelocityScenario::default_desk(cfg.paths.unwrap_or(40)));
    sc.validate()?;
    let seed = args.seed.unwrap_or(cfg.seed);

    let mut gmm_opts = GmmOptions { seed, ..Default::default() };
    if let Some(g) = &cfg.gmm {
        gmm_opts.max_iter = g.max_iter.unwrap_or(gmm_opts.max_iter);
        gmm_opts.rel_tol = g.rel_tol.unwrap_or(gmm_opts.rel_tol);
        gmm_opts.floor = g.floor.unwrap_or(gmm_opts.floor);
        gmm_opts.restarts = g.restarts.unwrap_or(gmm_opts.restarts);
    }
    let mut km_opts = KmeansOptions { seed, ..Default::default() };
    if let Some(k) = &cfg.kmeans {
        km_opts.max_iter = k.max_iter.unwrap_or(km_opts.max_iter);
        km_opts.restarts = k.restarts.unwrap_or(km_opts.restarts);
    }

    let mut streams = ParamStreams::new(seed);
    let rows = run_velocity_experiment(
        &sc,
        cfg.n_train,
        cfg.n_test,
        &cfg.k_grid,
        &gmm_opts,
        &km_opts,
        &mut streams,
    )?;

    let mut csv = String::from("k,mi_gmm_bits,mi_kmeans_bits,entropy_bits,seed\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{seed}",
            r.k,
            fmt_csv(r.mi_gmm_bits),
            fmt_csv(r.mi_kmeans_bits),
            fmt_csv(r.entropy_bits)
        )?;
    }
    let dir = out_dir(args)?;
    std::fs::write(dir.join("cluster.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    snr_grid_db: Vec<f64>,
    n_test: usize,
    n_train: usize,
    #[serde(default)]
    seed: u64,
    channel: ChannelConfig,
    prior: PathPrior,
}

fn cmd_estimate(args: &RunArgs) -> Result<()> {
    let cfg: EstimateConfig = load_config(&args.config)?;
    cfg.channel.validate()?;
    cfg.prior.validate()?;
    let seed = args.seed.unwrap_or(cfg.seed);

    let mut streams = ParamStreams::new(seed);
    let report = run_estimation_experiment(
        &cfg.channel,
        &cfg.prior,
        &cfg.snr_grid_db,
        cfg.n_test,
        cfg.n_train,
        &mut streams,
        seed,
    )?;

    let mut csv = String::from("snr_db,nmse_zero,nmse_sensing,nmse_pilot,nmse_joint,n_test,seed\n");
    for r in &report.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{seed}",
            fmt_csv(r.snr_db),
            fmt_csv(r.nmse_zero),
            fmt_csv(r.nmse_sensing),
            fmt_csv(r.nmse_pilot),
            fmt_csv(r.nmse_joint),
            cfg.n_test
        )?;
    }
    let dir = out_dir(args)?;
    std::fs::write(dir.join("estimate.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

// ---------------------------------------------------------------------------
// dsep

fn cmd_dsep(args: &DsepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.graph)
        .with_context(|| format!("cannot read graph {}", args.graph.display()))?;
    let bn = BayesNet::from_text(&text)?;
    let id = |name: &str| {
        bn.node_id(name)
            .with_context(|| format!("node '{name}' not present in the graph"))
    };
    let observed_names: Vec<String> = args
        .observed
        .clone()
        .unwrap_or_else(|| vec![args.xi.clone(), args.z.clone()]);
    let mut observed = BTreeSet::new();
    for name in &observed_names {
        observed.insert(id(name)?);
    }
    let roles = SideInfoRoles {
        beta: id(&args.beta)?,
        xi: id(&args.xi)?,
        h: id(&args.h)?,
        z: id(&args.z)?,
        observed,
    };
    let (class, trails) = classify_side_info(&bn, &roles)?;
    println!("{class}");
    for trail in &trails {
        println!("active trail: {}", bn.format_trail(trail));
    }
    Ok(())
}
