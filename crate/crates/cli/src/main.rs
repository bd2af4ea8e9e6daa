use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tfim_cli::config::{Format, QmcOverrides, RunConfig};
use tfim_cli::reproduce::{self, Options, RECIPES};
use tfim_cli::run::{evaluate, result_table, Checkpointing};
use tfim_cli::{fit, CliError, Result, Table};

#[derive(Parser)]
#[command(name = "tfim", version, about = "Spin squeezing and quantum variance in the transverse-field Ising model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the observables at the single point described by a config file.
    Observables(RunArgs),
    /// Evaluate the observables over the config's g × T grid.
    Scan(RunArgs),
    /// Fit y = a·x^b to two columns of a results file.
    Fit(FitArgs),
    /// Run a desk-scale reproduction recipe and report its checks.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct Output {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json (default: from the --out extension, else csv).
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct Execution {
    /// Base QMC seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the scan.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for QMC checkpoints.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Resume QMC points from existing checkpoints.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    exec: Execution,
}

#[derive(Args)]
struct FitArgs {
    /// Results file (CSV or JSON).
    file: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Column holding the standard errors of y.
    #[arg(long)]
    err: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Recipe id, or "list".
    id: String,
    /// File with a [qmc] table overriding the recipe's QMC settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    exec: Execution,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Observables(args) => run(args, true),
        Command::Scan(args) => run(args, false),
        Command::Fit(args) => {
            let table = Table::read(&args.file)?;
            let (_, out) = fit::fit_table(&table, &args.x, &args.y, args.err.as_deref())?;
            emit(&out, &args.output, None, None)
        }
        Command::Reproduce(args) => reproduce_cmd(args),
    }
}

fn format_of(output: &Output, path: Option<&Path>, fallback: Option<Format>) -> Result<Format> {
    match &output.format {
        Some(f) => Format::parse(f).ok_or_else(|| CliError::Config(format!("--format: expected csv or json, got {f:?}"))),
        None => Ok(fallback.or_else(|| path.map(Format::for_path)).unwrap_or(Format::Csv)),
    }
}

fn emit(table: &Table, output: &Output, config_path: Option<&Path>, config_format: Option<Format>) -> Result<()> {
    let path = output.out.as_deref().or(config_path);
    let format = format_of(output, path, config_format)?;
    match path {
        Some(p) => table.write(p, format),
        None => {
            print!("{}", table.encode(format)?);
            Ok(())
        }
    }
}

fn checkpointing(exec: &Execution, configured: Option<&Path>, every: usize) -> Result<Option<Checkpointing>> {
    let dir = exec.checkpoint.as_deref().or(configured);
    match dir {
        Some(d) => Ok(Some(Checkpointing { dir: d.to_path_buf(), resume: exec.resume, every })),
        None if exec.resume => Err(CliError::Config("--resume needs a checkpoint directory (--checkpoint or qmc.checkpoint)".into())),
        None => Ok(None),
    }
}

fn workers(exec: &Execution) -> Result<usize> {
    match exec.workers {
        Some(0) => Err(CliError::Config("--workers: must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn run(args: RunArgs, single: bool) -> Result<()> {
    let mut config = RunConfig::load(&args.config)?;
    if single && config.points() != 1 {
        return Err(CliError::Config(format!("observables evaluates one point but the config has a {}×{} grid; use scan", config.g_grid.len(), config.t_grid.len())));
    }
    if let Some(seed) = args.exec.seed {
        config.qmc.seed = seed;
    }
    let checkpoint = checkpointing(&args.exec, config.checkpoint.as_deref(), config.qmc.checkpoint_every)?;
    if checkpoint.is_some() && !config.backend.is_stochastic() {
        return Err(CliError::Config("--checkpoint: only the qmc backend checkpoints".into()));
    }
    let results = evaluate(&config, workers(&args.exec)?, checkpoint.as_ref())?;
    let table = result_table(&config, &results);
    emit(&table, &args.output, config.output.as_deref(), config.format)?;
    let failed: Vec<String> = results
        .iter()
        .filter_map(|p| p.report.as_ref().err().map(|e| format!("g={} T={}: {e}", p.g, p.temperature)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{} of {} points failed; first: {}", failed.len(), results.len(), failed[0])))
    }
}

fn reproduce_cmd(args: ReproduceArgs) -> Result<()> {
    if args.id == "list" {
        for r in &RECIPES {
            println!("{:<8} {}", r.id, r.title);
        }
        return Ok(());
    }
    let recipe = reproduce::find(&args.id).ok_or_else(|| {
        CliError::Config(format!("unknown recipe {:?}; known: {}", args.id, RECIPES.iter().map(|r| r.id).collect::<Vec<_>>().join(", ")))
    })?;
    let overrides = match &args.config {
        Some(p) => QmcOverrides::load(p)?,
        None => QmcOverrides::default(),
    };
    let mut opts = Options::from_overrides(&overrides);
    if let Some(seed) = args.exec.seed {
        opts.seed = Some(seed);
    }
    opts.checkpoint = checkpointing(&args.exec, overrides.checkpoint.as_deref(), overrides.checkpoint_every.unwrap_or(10_000))?;
    if let Some(c) = &opts.checkpoint {
        std::fs::create_dir_all(&c.dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(&args.exec)?)
        .build()
        .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    let outcome = pool.install(|| (recipe.run)(&opts))?;
    if args.output.out.is_some() {
        emit(&outcome.table, &args.output, None, None)?;
    }
    eprintln!("{}: {}", recipe.id, recipe.title);
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    if !outcome.qmc_flags.is_empty() {
        return Err(CliError::Consistency(outcome.qmc_flags.join("; ")));
    }
    if !outcome.passed() {
        let n = outcome.checks.iter().filter(|c| c.gating && !c.passed).count();
        return Err(CliError::ChecksFailed(format!("{}: {n} check(s) failed", recipe.id)));
    }
    Ok(())
}
