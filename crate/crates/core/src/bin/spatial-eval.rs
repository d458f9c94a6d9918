use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spatial_eval::config::{Config, ProviderKind};
use spatial_eval::dataset::{load_instances, write_jsonl, Instance};
use spatial_eval::harness::{
    provider_from_config, run_suite, PromptSetting, RetryPolicy, RunDir, RunOptions,
};
use spatial_eval::nav::generate_nav_dataset;
use spatial_eval::nlnav::{generate_nlnav_dataset, generate_ring_dataset, LANDMARKS};
use spatial_eval::report::{
    table1_markdown, table2_markdown, write_analysis, write_report, write_scores,
};
use spatial_eval::tiling::generate_tiling_dataset;
use spatial_eval::{Error, RenderPalette};

const EXIT_USAGE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_PROVIDER: u8 = 3;

/// Generate spatial reasoning datasets, collect model transcripts and score them.
#[derive(Debug, Parser)]
#[command(name = "spatial-eval", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a dataset as JSONL plus a distribution table.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Send every (instance, setting) prompt to a provider and store the transcripts.
    Run(RunArgs),
    /// Score final answers (writes scores/table3.md).
    Score(RunDirArg),
    /// Measure visual state tracking (writes scores/tracking.csv and scores/table4.md).
    Analyze(RunDirArg),
    /// Score, analyze and bundle everything into report.md.
    Report(RunDirArg),
}

#[derive(Debug, Args)]
struct GenCommon {
    /// Root seed; every random choice derives from it.
    #[arg(long)]
    seed: u64,
    /// Output JSONL file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Visual navigation maps with route-planning and next-step questions.
    Nav {
        /// Inclusive k range such as `2..7`, or a single k.
        #[arg(long, default_value = "2..7", value_parser = parse_k_range)]
        k: RangeInclusive<usize>,
        /// Glyph palette: ascii or emoji (defaults to the config palette).
        #[arg(long)]
        palette: Option<String>,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Masked 5x4 tiling questions.
    Tiling {
        /// Numbers of masked pieces, comma separated (1 to 3).
        #[arg(long, value_delimiter = ',', default_value = "2,3", value_parser = clap::value_parser!(u8).range(1..=3))]
        mask_counts: Vec<u8>,
        /// Glyph palette: ascii or emoji (defaults to the config palette).
        #[arg(long)]
        palette: Option<String>,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Natural-language navigation on 3x3 landmark maps.
    Nlnav {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        min_walk: usize,
        #[arg(long, default_value_t = 10)]
        max_walk: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Navigation on a ring of landmarks.
    Ring {
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Number of landmarks on the ring.
        #[arg(long, default_value_t = 12)]
        size: usize,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProviderArg {
    Http,
    Mock,
    Oracle,
}

impl From<ProviderArg> for ProviderKind {
    fn from(p: ProviderArg) -> Self {
        match p {
            ProviderArg::Http => ProviderKind::Http,
            ProviderArg::Mock => ProviderKind::Mock,
            ProviderArg::Oracle => ProviderKind::Oracle,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Dataset JSONL file (repeatable).
    #[arg(long, required = true)]
    dataset: Vec<PathBuf>,
    /// Run directory; reused runs resume where they stopped.
    #[arg(long)]
    out: PathBuf,
    /// Prompting settings, comma separated: cot, noviz, vot, vot_ascii.
    #[arg(long, value_delimiter = ',', default_value = "cot,noviz,vot")]
    settings: Vec<PromptSetting>,
    /// Provider, overriding the config file.
    #[arg(long, value_enum)]
    provider: Option<ProviderArg>,
    /// Concurrent requests, overriding the config file.
    #[arg(long)]
    workers: Option<usize>,
    /// Request starts per minute across workers (0 = unlimited).
    #[arg(long)]
    requests_per_minute: Option<u32>,
    /// Skip the response cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Debug, Args)]
struct RunDirArg {
    /// Run directory written by `run`.
    #[arg(long)]
    run: PathBuf,
}

enum Failure {
    Usage(String),
    Partial(String),
    Provider(String),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Provider(_) => Failure::Provider(e.to_string()),
            e => Failure::Other(e),
        }
    }
}

fn parse_k_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad k range `{s}`"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad k range `{s}`"))?;
    if lo < 2 || hi > 8 || lo > hi {
        return Err(format!("k range `{s}` must lie within 2..8"));
    }
    Ok(lo..=hi)
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::default()),
    }
}

fn palette(id: Option<&str>, cfg: &Config) -> Result<RenderPalette, Failure> {
    match id {
        Some(id) => RenderPalette::by_id(id).map_err(|e| Failure::Usage(e.to_string())),
        None => Ok(cfg.palette()?),
    }
}

fn out_path(common: &GenCommon, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Other(Error::io(path, e)))
}

fn stats_path(out: &Path) -> PathBuf {
    out.with_extension("stats.md")
}

fn gen(cmd: GenCommand, cfg: &Config) -> Result<(), Failure> {
    match cmd {
        GenCommand::Nav {
            k,
            palette: p,
            common,
        } => {
            let p = palette(p.as_deref(), cfg)?;
            let out = out_path(&common, "nav.jsonl");
            let ds = generate_nav_dataset(k).map_err(Error::from)?;
            write_jsonl(&out, &ds.records(&p).map_err(Error::from)?)?;
            let table = table1_markdown(&ds.stats);
            write_text(&stats_path(&out), &table)?;
            print!("{table}");
            eprintln!(
                "wrote {} instances to {}",
                ds.instances.len(),
                out.display()
            );
        }
        GenCommand::Tiling {
            mask_counts,
            palette: p,
            common,
        } => {
            let p = palette(p.as_deref(), cfg)?;
            let out = out_path(&common, "tiling.jsonl");
            let counts: Vec<usize> = mask_counts.into_iter().map(usize::from).collect();
            let ds = generate_tiling_dataset(common.seed, &counts);
            write_jsonl(&out, &ds.records(&p).map_err(Error::from)?)?;
            let table = table2_markdown(&ds.stats);
            write_text(&stats_path(&out), &table)?;
            print!("{table}");
            eprintln!(
                "wrote {} instances to {}",
                ds.instances.len(),
                out.display()
            );
        }
        GenCommand::Nlnav {
            count,
            min_walk,
            max_walk,
            common,
        } => {
            if min_walk == 0 || min_walk > max_walk {
                return Err(Failure::Usage(format!(
                    "walk length range {min_walk}..{max_walk} is empty"
                )));
            }
            let out = out_path(&common, "nlnav.jsonl");
            let recs = generate_nlnav_dataset(common.seed, count, min_walk..=max_walk, LANDMARKS)?;
            write_jsonl(&out, &recs)?;
            println!("nl_navigation: {} instances", recs.len());
        }
        GenCommand::Ring {
            count,
            size,
            common,
        } => {
            if size < 2 || size > LANDMARKS.len() {
                return Err(Failure::Usage(format!(
                    "ring size must lie within 2..={}",
                    LANDMARKS.len()
                )));
            }
            let out = out_path(&common, "ring.jsonl");
            let recs = generate_ring_dataset(common.seed, count, size, LANDMARKS)?;
            write_jsonl(&out, &recs)?;
            println!("ring_navigation: {} instances", recs.len());
        }
    }
    Ok(())
}

fn run(args: RunArgs, mut cfg: Config) -> Result<(), Failure> {
    if let Some(p) = args.provider {
        cfg.provider.kind = p.into();
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Failure::Usage("--workers must be at least 1".into()));
        }
        cfg.run.workers = w;
    }
    if let Some(r) = args.requests_per_minute {
        cfg.run.requests_per_minute = r;
    }
    cfg.validate()?;
    let mut instances: Vec<Instance> = Vec::new();
    for path in &args.dataset {
        if !path.is_file() {
            return Err(Failure::Usage(format!(
                "dataset {} does not exist",
                path.display()
            )));
        }
        instances.extend(load_instances(path)?);
    }
    let provider = provider_from_config(&cfg.provider)?;
    let mut opts = RunOptions::new(cfg.provider.clone(), args.settings);
    opts.workers = cfg.run.workers;
    opts.requests_per_minute = cfg.run.requests_per_minute;
    opts.cache = cfg.run.cache && !args.no_cache;
    opts.retry = RetryPolicy::from_config(&cfg.provider);
    let summary = run_suite(
        &RunDir::new(&args.out),
        &instances,
        provider.as_ref(),
        &opts,
    )?;
    eprintln!(
        "executed {}, skipped {}, failed {}, cache hits {}",
        summary.executed, summary.skipped, summary.failed, summary.cache_hits
    );
    if let Some(f) = summary.fatal {
        return Err(Failure::Provider(f));
    }
    if summary.failed > 0 {
        return Err(Failure::Partial(format!(
            "{} requests failed; rerun to retry them",
            summary.failed
        )));
    }
    Ok(())
}

fn open_run(arg: &RunDirArg) -> Result<RunDir, Failure> {
    RunDir::open(&arg.run).map_err(|e| Failure::Usage(e.to_string()))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(g) => gen(g, &cfg),
        Command::Run(r) => run(r, cfg),
        Command::Score(a) => {
            let dir = open_run(&a)?;
            write_scores(&dir)?;
            print!(
                "{}",
                std::fs::read_to_string(dir.scores_dir().join("table3.md")).unwrap_or_default()
            );
            Ok(())
        }
        Command::Analyze(a) => {
            let dir = open_run(&a)?;
            write_analysis(&dir)?;
            print!(
                "{}",
                std::fs::read_to_string(dir.scores_dir().join("table4.md")).unwrap_or_default()
            );
            Ok(())
        }
        Command::Report(a) => {
            let dir = open_run(&a)?;
            write_report(&dir)?;
            eprintln!("wrote {}", dir.report_path().display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Partial(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(Failure::Provider(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_PROVIDER)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
