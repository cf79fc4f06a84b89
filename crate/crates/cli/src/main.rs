use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use walkdir::WalkDir;

use eigenformats::harness::{
    build_references, emit_reports, prepare_general, prepare_graphs, read_outcomes, run_sweep, InputFile, RunConfig,
    Status, OUTCOMES_FILE,
};
use eigenformats::laplacian::ClassMap;
use eigenformats::matrix::{archive_read, archive_write, Class};
use eigenformats::Format;

mod config;

use config::ConfigFile;

/// Eigenvalue accuracy benchmark across number formats.
#[derive(Parser, Debug)]
#[command(name = "eigenformats", version, arg_required_else_help = true)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read matrix files and write the archive under `<out>/matrices`.
    Prepare(PrepareArgs),
    /// Compute missing reference solutions into `<out>/reference`.
    Reference(RunArgs),
    /// Run the sweep and write outcomes and reports to `<out>`.
    Run(RunArgs),
    /// Rewrite the reports from an existing `<out>/outcomes.csv`.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Edge lists or adjacency matrices, turned into normalized Laplacians.
    Graph,
    /// Matrices used as given; only symmetric ones are kept.
    General,
}

#[derive(Args, Debug)]
struct PrepareArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Extra `category class` lines for graph inputs.
    #[arg(long)]
    class_map: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Files or directories (searched recursively).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Comma-separated format names, e.g. `Posit16,Float16`.
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<Format>>,
    /// Comma-separated classes.
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<Class>>,
    /// Keep only formats of these bit widths.
    #[arg(long, value_delimiter = ',')]
    bits: Option<Vec<u32>>,
    /// Eigenpairs compared per matrix.
    #[arg(long)]
    count: Option<usize>,
    /// Extra eigenpairs computed beyond `count`.
    #[arg(long)]
    buffer: Option<usize>,
    /// Relative tolerance for 8-bit formats [default: 1e-2].
    #[arg(long = "tol-8")]
    tol_8: Option<String>,
    /// Relative tolerance for 16-bit formats [default: 1e-4]
    #[arg(long = "tol-16")]
    tol_16: Option<String>,
    /// Relative tolerance for 32-bit formats [default: 1e-8]
    #[arg(long = "tol-32")]
    tol_32: Option<String>,
    /// Relative tolerance for 64-bit formats [default: 1e-12]
    #[arg(long = "tol-64")]
    tol_64: Option<String>,
    /// Tolerance of the reference solves [default: 1e-20].
    #[arg(long = "tol-reference")]
    tol_reference: Option<String>,
    /// Start-vector seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel experiments [default: 1].
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::read(p),
        None => Ok(ConfigFile::default()),
    }
}

fn resolve_run(args: RunArgs) -> Result<RunConfig> {
    let file = load_config(args.config.as_deref())?;
    let mut cfg = RunConfig::default();
    if let Some(f) = args.formats.or(file.list("formats")?) {
        cfg.formats = f;
    }
    if let Some(b) = args.bits.or(file.list("bits")?) {
        cfg.formats.retain(|f| f.total_bits().is_some_and(|x| b.contains(&x)));
    }
    if let Some(c) = args.classes.or(file.list("classes")?) {
        cfg.classes = c;
    }
    if let Some(c) = args.count.or(file.get("count")?) {
        cfg.eigenvalue_count = c;
    }
    if let Some(b) = args.buffer.or(file.get("buffer")?) {
        cfg.eigenvalue_buffer_count = b;
    }
    let t = &mut cfg.tolerances;
    for (flag, key, slot) in [
        (args.tol_8, "tol-8", &mut t.bits8),
        (args.tol_16, "tol-16", &mut t.bits16),
        (args.tol_32, "tol-32", &mut t.bits32),
        (args.tol_64, "tol-64", &mut t.bits64),
        (args.tol_reference, "tol-reference", &mut t.reference),
    ] {
        if let Some(s) = flag.or(file.raw(key).map(str::to_owned)) {
            *slot = config::tolerance(key, &s)?;
        }
    }
    if let Some(s) = args.seed.or(file.get("seed")?) {
        cfg.seed = s;
    }
    if let Some(w) = args.workers.or(file.get("workers")?) {
        cfg.workers = w;
    }
    if let Some(o) = args.out.or(file.get("out")?) {
        cfg.out = o;
    }
    if cfg.eigenvalue_count == 0 {
        bail!("count must be positive");
    }
    if cfg.formats.is_empty() {
        bail!("no formats selected");
    }
    Ok(cfg)
}

fn out_dir(flag: Option<PathBuf>, file: &ConfigFile) -> Result<PathBuf> {
    Ok(flag.or(file.get("out")?).unwrap_or_else(|| RunConfig::default().out))
}

fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<InputFile>> {
    let mut files = Vec::new();
    for root in inputs {
        if root.is_file() {
            let parent = root.parent().unwrap_or(Path::new(""));
            files.push(InputFile::from_path(parent, root));
            continue;
        }
        if !root.is_dir() {
            bail!("{}: no such file or directory", root.display());
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            let entry = entry?;
            let hidden = entry.file_name().to_string_lossy().starts_with('.');
            if entry.file_type().is_file() && !hidden {
                files.push(InputFile::from_path(root, entry.path()));
            }
        }
    }
    Ok(files)
}

fn prepare(args: PrepareArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let kind = match args.kind {
        Some(k) => k,
        None => match file.raw("kind") {
            Some(s) => Kind::from_str(s, true).map_err(|e| anyhow::anyhow!("config `kind`: {e}"))?,
            None => Kind::Graph,
        },
    };
    let out = out_dir(args.out, &file)?;
    let class_map = match args.class_map.or(file.get("class-map")?) {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| p.display().to_string())?;
            ClassMap::with_overrides(&text)?
        }
        None => ClassMap::default(),
    };
    let files = collect_inputs(&args.inputs)?;
    let rep = match kind {
        Kind::Graph => prepare_graphs(&files, &class_map),
        Kind::General => prepare_general(&files),
    };
    archive_write(&rep.matrices, &out.join("matrices"))?;
    println!(
        "prepared {} matrices, skipped {} inputs",
        rep.matrices.len(),
        rep.skipped.len()
    );
    Ok(())
}

fn reference(args: RunArgs) -> Result<()> {
    let cfg = resolve_run(args)?;
    let set = archive_read(&cfg.matrices_dir())?;
    let refs = build_references(&set, &cfg)?;
    let failed = refs.entries.values().filter(|r| r.is_err()).count();
    for (name, r) in &refs.entries {
        if let Err(e) = r {
            eprintln!("{name}: {e}");
        }
    }
    println!("{} references, {failed} failed", refs.entries.len());
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = resolve_run(args)?;
    let set = archive_read(&cfg.matrices_dir())?;
    info!("{} matrices, {} formats", set.len(), cfg.formats.len());
    let refs = build_references(&set, &cfg)?;
    let outcomes = run_sweep(&set, &refs, &cfg)?;
    emit_reports(&outcomes, &cfg.out)?;
    let count = |s: Status| outcomes.iter().filter(|o| o.status == s).count();
    println!(
        "{} outcomes: {} ok, {} inf_omega, {} inf_sigma, {} prep_error",
        outcomes.len(),
        count(Status::Ok),
        count(Status::NonConvergence),
        count(Status::DynamicRange),
        count(Status::PrepError)
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let out = out_dir(args.out, &file)?;
    let outcomes = read_outcomes(&out.join(OUTCOMES_FILE))?;
    emit_reports(&outcomes, &out)?;
    println!("wrote reports for {} outcomes", outcomes.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let res = match cli.command {
        Command::Prepare(a) => prepare(a),
        Command::Reference(a) => reference(a),
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
