//! `reach`: simulation studies and single-cloud reach estimates.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use reach_core::bias::{bias_corrected_reach_with, DEFAULT_SPLIT};
use reach_core::estimator::{estimate_on_graph, EpsilonTheoryParams, EstimatorOptions};
use reach_core::experiment::{
    emit_report, run_ellipse_comparison, run_table1, ExperimentConfig, ExperimentReport, ReportFormat,
};
use reach_core::geometry::io as cloud_io;
use reach_core::models::ManifoldModel;
use reach_core::{build_graph, EpsilonRule, Exec, ReachError};

#[derive(Parser, Debug)]
#[command(name = "reach", version, about = "Reach estimation from point clouds")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "REACH_THREADS")]
    threads: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Annulus study: plain estimate over replicated samples.
    Table1(StudyArgs),
    /// Half-ellipse comparison of the tangent, plain and corrected estimates.
    Ellipse(StudyArgs),
    /// Estimate the reach of one point cloud (CSV or RKPC file).
    Estimate(EstimateArgs),
    /// Draw a sample from a model.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EpsRuleArg {
    Nn,
    Theory,
    Fixed,
}

#[derive(Args, Debug, Clone)]
struct EpsArgs {
    /// How ε is chosen.
    #[arg(long, value_enum, default_value = "nn")]
    eps_rule: EpsRuleArg,
    /// Multiplier (nn), constant c (theory) or ε itself (fixed).
    #[arg(long)]
    eps_c: Option<f64>,
    /// Standardness constant for the theory rule.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Dimension in the theory-rule exponent.
    #[arg(long)]
    eps_dim: Option<u32>,
}

impl EpsArgs {
    fn rule(&self, default_dim: u32) -> Result<EpsilonRule, ReachError> {
        let rule = match self.eps_rule {
            EpsRuleArg::Nn => EpsilonRule::NearestNeighbor { multiplier: self.eps_c.unwrap_or(1.0) },
            EpsRuleArg::Theory => {
                let c = self
                    .eps_c
                    .ok_or_else(|| ReachError::Config("--eps-rule theory needs --eps-c".into()))?;
                let p = EpsilonTheoryParams::new(c, self.eta, self.eps_dim.unwrap_or(default_dim));
                p.validate()?;
                EpsilonRule::Theory(p)
            }
            EpsRuleArg::Fixed => EpsilonRule::Fixed {
                epsilon: self
                    .eps_c
                    .ok_or_else(|| ReachError::Config("--eps-rule fixed needs --eps-c".into()))?,
            },
        };
        Ok(rule)
    }
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// Model id, repeatable (e.g. `annulus:r=0.25`, `half-ellipse`).
    #[arg(long)]
    model: Vec<String>,
    /// Sample sizes, repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 2023)]
    seed: u64,
    #[command(flatten)]
    eps: EpsArgs,
    /// Fraction of the sample used for the first stage of bias correction.
    #[arg(long, default_value_t = DEFAULT_SPLIT)]
    split: f64,
    /// δ = c·log(n)/n for the tangent estimate.
    #[arg(long, default_value_t = 1.0)]
    delta_c: f64,
    /// PCA neighbour count (default ⌈5 log n⌉).
    #[arg(long)]
    k: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Report formats to write.
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    format: Vec<String>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Point cloud file.
    input: PathBuf,
    #[command(flatten)]
    eps: EpsArgs,
    /// Apply split-sample bias correction.
    #[arg(long)]
    bias_correct: bool,
    #[arg(long, default_value_t = DEFAULT_SPLIT)]
    split: f64,
    /// Split seed for bias correction.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dump the neighborhood graph as `i,j,length` CSV.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `.rkpc` for binary, anything else for CSV. Stdout CSV when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config<E: Into<anyhow::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(ConfigFailure(e.into()))
}

/// Exit status 1: the request itself is wrong.
#[derive(Debug)]
struct ConfigFailure(anyhow::Error);

impl std::fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigFailure {}

fn is_config_error(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<ConfigFailure>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<ReachError>(),
        Some(
            ReachError::Config(_)
                | ReachError::InvalidParameter(_)
                | ReachError::UnknownModel(_)
                | ReachError::Io { .. }
                | ReachError::Csv(_)
                | ReachError::Format(_)
                | ReachError::DimensionMismatch { .. }
                | ReachError::NonFinite { .. }
        )
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    reach_core::par::init_threads(cli.threads);
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command, exec: Exec) -> anyhow::Result<()> {
    match command {
        Command::Table1(args) => {
            let cfg = study_config(&args, ExperimentConfig::table1(), 2)?;
            let report = run_table1(&cfg, exec).map_err(study_error)?;
            finish_study(&report, &args)
        }
        Command::Ellipse(args) => {
            let cfg = study_config(&args, ExperimentConfig::ellipse(), 1)?;
            let report = run_ellipse_comparison(&cfg, exec).map_err(study_error)?;
            finish_study(&report, &args)
        }
        Command::Estimate(args) => estimate(&args, exec),
        Command::Sample(args) => sample(&args),
    }
}

fn study_error(e: ReachError) -> anyhow::Error {
    match e {
        ReachError::Config(_) | ReachError::UnknownModel(_) => config(e),
        other => other.into(),
    }
}

fn study_config(args: &StudyArgs, base: ExperimentConfig, default_dim: u32) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = base;
    if !args.model.is_empty() {
        cfg.models = args.model.clone();
    }
    if !args.n.is_empty() {
        cfg.sizes = args.n.clone();
    }
    cfg.replicates = args.reps;
    cfg.seed = args.seed;
    cfg.epsilon = args.eps.rule(default_dim).map_err(config)?;
    cfg.split = args.split;
    cfg.delta_c = args.delta_c;
    cfg.pca_neighbors = args.k;
    cfg.validate().map_err(config)?;
    Ok(cfg)
}

fn finish_study(report: &ExperimentReport, args: &StudyArgs) -> anyhow::Result<()> {
    let formats: Vec<ReportFormat> =
        args.format.iter().map(|f| f.parse()).collect::<Result<_, ReachError>>().map_err(config)?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "model,n,estimator,mean,median,sd")?;
    for s in &report.series {
        let sum = s.summary();
        writeln!(stdout, "{},{},{},{:.4},{:.4},{:.4}", s.model, s.n, s.estimator, sum.mean, sum.median, sum.sd)?;
    }
    if report.warnings > 0 {
        warn!("{} estimator warnings across replicates", report.warnings);
    }
    for f in formats {
        for path in emit_report(report, f, &args.out)? {
            info!("wrote {}", path.display());
        }
    }
    writeln!(stdout, "# {} replicates per cell in {:.1}s", report.config.replicates, report.wall_clock_secs)?;
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(config),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn estimate(args: &EstimateArgs, exec: Exec) -> anyhow::Result<()> {
    let cloud = cloud_io::load(&args.input)?;
    let rule = args.eps.rule(cloud.ambient_dim() as u32).map_err(config)?;
    let opts = EstimatorOptions { exec, ..Default::default() };
    if let Some(path) = &args.edges {
        let eps = rule.epsilon(&cloud)?;
        let graph = build_graph(&cloud, eps)?;
        let file = fs::File::create(path).map_err(|e| config(anyhow::Error::new(e).context(path.display().to_string())))?;
        graph.write_edge_list(io::BufWriter::new(file))?;
    }
    let text = if args.bias_correct {
        if !(args.split > 0.0 && args.split < 1.0) {
            return Err(config(anyhow::anyhow!("--split must lie in (0, 1), got {}", args.split)));
        }
        let est = bias_corrected_reach_with(&cloud, args.split, args.seed, &rule, opts)?;
        for w in &est.warnings {
            warn!("{w}");
        }
        let text = serde_json::to_string_pretty(&est)? + "\n";
        if est.is_uncorrected() {
            write_output(args.out.as_deref(), &text)?;
            anyhow::bail!("first-stage estimate is infinite; correction undefined");
        }
        text
    } else {
        let eps = rule.epsilon(&cloud)?;
        let graph = build_graph(&cloud, eps)?;
        let est = estimate_on_graph(&cloud, &graph, opts)?;
        for w in &est.warnings {
            warn!("{w}");
        }
        serde_json::to_string_pretty(&est)? + "\n"
    };
    write_output(args.out.as_deref(), &text)
}

fn sample(args: &SampleArgs) -> anyhow::Result<()> {
    let model: ManifoldModel = args.model.parse().map_err(config)?;
    if args.n == 0 {
        return Err(config(anyhow::anyhow!("--n must be positive")));
    }
    let cloud = model.sample_seeded(args.n, args.seed);
    match &args.out {
        Some(p) => cloud_io::save(&cloud, p)?,
        None => cloud_io::write_csv(&cloud, io::stdout().lock())?,
    }
    Ok(())
}
