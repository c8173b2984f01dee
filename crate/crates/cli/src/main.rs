mod github;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use usagescan_core::analyzer::AnalyzerRegistry;
use usagescan_core::report::{emit_chart, summarize};
use usagescan_core::runner::{self, RunConfig, DEFAULT_BATCH_SIZE, DEFAULT_IGNORE};

use crate::github::GithubLookup;

#[derive(Parser)]
#[command(name = "usagescan", version, about = "Count language-construct usage across a corpus of projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a corpus in batches and merge the results.
    Analyze(AnalyzeArgs),
    /// Merge the completed batch outputs in a run directory.
    Merge {
        #[arg(long)]
        output: PathBuf,
    },
    /// Summarize a merged CSV and optionally chart it.
    Report(ReportArgs),
    /// List the available analyzers and their columns.
    Analyzers,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Project list file, or a directory with one project per subdirectory.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    analyzers: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    /// Parallel file workers per project [default: available cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Skip batches completed by an earlier, interrupted run.
    #[arg(long)]
    resume: bool,
    /// Resolve renamed GitHub repositories before deduplicating.
    #[arg(long)]
    online_dedup: bool,
    /// Directory names to skip [default: .git,build,out,node_modules,.gradle,venv,__pycache__].
    #[arg(long, value_delimiter = ',')]
    ignore: Option<Vec<String>>,
    /// Where remote projects are cloned [default: <output>/.work].
    #[arg(long)]
    workdir: Option<PathBuf>,
    /// Stop after this many newly completed batches, without merging.
    #[arg(long)]
    max_batches: Option<usize>,
    /// Timeout in seconds for each repository lookup.
    #[arg(long, default_value_t = 10)]
    lookup_timeout: u64,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    group_by: Vec<String>,
    /// Write an SVG bar chart here.
    #[arg(long)]
    chart: Option<PathBuf>,
    /// Write the summary table as CSV here.
    #[arg(long)]
    table: Option<PathBuf>,
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    if args.batch_size == 0 {
        bail!("--batch-size must be at least 1");
    }
    if args.jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let ids: Vec<&str> = args.analyzers.iter().map(String::as_str).collect();
    let mut config = RunConfig::new(&args.input, &args.output, &ids);
    config.batch_size = args.batch_size;
    if let Some(j) = args.jobs {
        config.jobs = j;
    }
    config.resume = args.resume;
    config.online_dedup = args.online_dedup;
    config.ignore = args.ignore.unwrap_or_else(|| DEFAULT_IGNORE.iter().map(|s| s.to_string()).collect());
    config.workdir = args.workdir;
    config.max_batches = args.max_batches;

    let lookup = args.online_dedup.then(|| GithubLookup::from_env(Duration::from_secs(args.lookup_timeout)));
    let registry = AnalyzerRegistry::with_builtins();
    let manifest = runner::run(&config, &registry, lookup.as_ref().map(|l| l as _))?;

    let failed = manifest.failed_count();
    eprintln!(
        "{} projects, {} files analyzed, {} failed, {}/{} batches complete",
        manifest.projects.len(),
        manifest.files_analyzed(),
        failed,
        manifest.completed_batches.len(),
        manifest.total_batches,
    );
    if manifest.interrupted {
        eprintln!("stopped early; rerun with --resume to continue");
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn report(args: ReportArgs) -> Result<ExitCode> {
    let table =
        summarize(&args.input, &args.group_by).with_context(|| format!("summarizing {}", args.input.display()))?;
    println!("{table}");
    if let Some(path) = &args.table {
        table.write_csv(path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.chart {
        emit_chart(&table, path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Merge { output } => {
            let merged = runner::merge(&output)?;
            for dir in &merged.skipped_batches {
                eprintln!("skipped incomplete {}", dir.display());
            }
            for (id, rows) in &merged.analyzers {
                println!("{id}.csv: {rows} rows");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report(args) => report(args),
        Command::Analyzers => {
            let registry = AnalyzerRegistry::with_builtins();
            for id in registry.ids() {
                let a = registry.get(id).expect("listed id");
                let langs: Vec<_> = a.languages().iter().map(|l| l.name()).collect();
                println!("{id}\t{}\t{}", langs.join(","), a.columns().join(","));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
