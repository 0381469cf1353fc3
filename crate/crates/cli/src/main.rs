//! spdd: solve singularly perturbed parabolic delay convection-diffusion
//! problems with degenerate convection and reproduce convergence studies.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 solver or
//! verification failure.

mod config;
mod export;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, Format, Resolved, RunConfig, SolveSetup};
use spdd_core::analysis::ConvergenceTable;
use spdd_core::extrapolation::richardson;
use spdd_core::solver::{self, SolveStats};
use spdd_core::verify;

#[derive(Parser)]
#[command(
    name = "spdd",
    version,
    about = "Hybrid-scheme solver for singularly perturbed parabolic delay \
             convection-diffusion problems with degenerate convection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve and export the solution field
    Solve(RunArgs),
    /// Run an (epsilon, N) sweep and export the convergence table
    Table(RunArgs),
    /// Run the sweep under all three schemes and export a stacked table
    Compare(RunArgs),
    /// Run the property suite and report pass/fail per property
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format, repeatable (overrides output.formats)
    #[arg(long = "format", value_enum)]
    formats: Vec<Format>,
    /// Sweep worker threads, 0 = auto (overrides threads)
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized checks (overrides seed)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional JSON run configuration; supplies the default seed
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the randomized properties
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(ConfigError),
    Compute(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(err) => write!(f, "{err}"),
            Failure::Compute(msg) => write!(f, "solver: {msg}"),
            Failure::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Failure::Config(err)
    }
}

fn compute(err: impl std::fmt::Display) -> Failure {
    Failure::Compute(err.to_string())
}

fn io_err(err: impl std::fmt::Display) -> Failure {
    Failure::Io(err.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Table(args) => cmd_table(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn load_with_flags(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = config::load(&args.config)?;
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.display().to_string();
    }
    if !args.formats.is_empty() {
        cfg.output.formats = args.formats.clone();
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.output.formats.is_empty() {
        return Err(ConfigError {
            path: String::from("output.formats"),
            message: String::from("must not be empty"),
        }
        .into());
    }
    let mut dedup = Vec::new();
    for &f in &cfg.output.formats {
        if !dedup.contains(&f) {
            dedup.push(f);
        }
    }
    cfg.output.formats = dedup;
    Ok(cfg)
}

fn out_dir(resolved: &Resolved) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&resolved.config.output.dir);
    fs::create_dir_all(&dir).map_err(io_err)?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, body: &[u8]) -> Result<(), Failure> {
    fs::write(dir.join(name), body).map_err(io_err)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn echo_config(dir: &Path, resolved: &Resolved) -> Result<(), Failure> {
    let mut body = serde_json::to_string_pretty(&resolved.config).map_err(io_err)?;
    body.push('\n');
    write_file(dir, "effective-config.json", body.as_bytes())
}

fn print_solve_summary(
    setup: &SolveSetup,
    resolved: &Resolved,
    stats: &SolveStats,
    diagnostic: f64,
) {
    let spec = &setup.spec;
    println!(
        "problem: {} p={} epsilon={}",
        spec.label,
        spec.p,
        export::sci(spec.epsilon)
    );
    println!(
        "scheme: {} extrapolate={}",
        resolved.config.scheme.label(),
        resolved.config.extrapolate
    );
    println!(
        "mesh: N={} sigma={} L={}",
        setup.mesh.n,
        export::sci(setup.mesh.sigma),
        export::sci(setup.mesh.l)
    );
    println!(
        "time: m_tau={} M={} dt={} levels {}..{}",
        setup.grid.delay_steps,
        setup.grid.steps,
        export::sci(setup.grid.dt),
        -(setup.grid.delay_steps as i64),
        setup.grid.steps
    );
    println!(
        "central set size: min={} max={} of {} interior rows",
        stats.i_set_min,
        stats.i_set_max,
        setup.mesh.n - 1
    );
    println!(
        "sign pattern: {} violations over {} admissible rows",
        stats.sign_violations, stats.rows_checked
    );
    println!(
        "stability: slack={} diagnostic={} (both <= 0 expected)",
        export::sci(stats.stability_slack(spec.horizon, spec.beta)),
        export::sci(diagnostic)
    );
}

fn cmd_solve(args: RunArgs) -> Result<ExitCode, Failure> {
    let mut resolved = config::resolve(load_with_flags(&args)?)?;
    let setup = config::resolve_solve(&mut resolved)?;
    let dir = out_dir(&resolved)?;

    let (coarse, stats) =
        solver::solve(&setup.spec, &setup.mesh, &setup.grid, resolved.scheme).map_err(compute)?;
    let diagnostic = solver::stability_diagnostic(&coarse, &setup.spec).map_err(compute)?;
    print_solve_summary(&setup, &resolved, &stats, diagnostic);

    let mut csv = Vec::new();
    let mut bin = Vec::new();
    if resolved.config.extrapolate {
        let (fine, _) = solver::solve(
            &setup.spec,
            &setup.mesh,
            &setup.grid.halved(),
            resolved.scheme,
        )
        .map_err(compute)?;
        let ext = richardson(&coarse, &fine).map_err(compute)?;
        export::solution_csv(&ext, &mut csv).map_err(io_err)?;
        export::solution_binary(&ext, &mut bin).map_err(io_err)?;
    } else {
        export::solution_csv(&coarse, &mut csv).map_err(io_err)?;
        export::solution_binary(&coarse, &mut bin).map_err(io_err)?;
    }
    let mut mesh_csv = Vec::new();
    export::mesh_csv(&setup.mesh, &mut mesh_csv).map_err(io_err)?;

    write_file(&dir, "solution.csv", &csv)?;
    write_file(&dir, "solution.spdd", &bin)?;
    write_file(&dir, "mesh.csv", &mesh_csv)?;
    echo_config(&dir, &resolved)?;
    Ok(ExitCode::SUCCESS)
}

fn write_tables(
    dir: &Path,
    stem: &str,
    formats: &[Format],
    tables: &[ConvergenceTable],
) -> Result<(), Failure> {
    for &format in formats {
        let mut body = Vec::new();
        let name = match format {
            Format::Csv => {
                if tables.len() == 1 {
                    export::table_csv(&tables[0], &mut body).map_err(io_err)?;
                } else {
                    export::compare_csv(tables, &mut body).map_err(io_err)?;
                }
                format!("{stem}.csv")
            }
            Format::Md => {
                export::compare_markdown(tables, &mut body).map_err(io_err)?;
                format!("{stem}.md")
            }
            Format::Json => {
                let doc = if tables.len() == 1 {
                    export::table_json(&tables[0])
                } else {
                    export::compare_json(tables)
                };
                body = serde_json::to_string_pretty(&doc)
                    .map_err(io_err)?
                    .into_bytes();
                body.push(b'\n');
                format!("{stem}.json")
            }
        };
        write_file(dir, &name, &body)?;
    }
    Ok(())
}

fn print_tables(tables: &[ConvergenceTable]) -> Result<(), Failure> {
    let mut text = Vec::new();
    export::compare_markdown(tables, &mut text).map_err(io_err)?;
    print!("{}", String::from_utf8_lossy(&text));
    Ok(())
}

fn cmd_table(args: RunArgs) -> Result<ExitCode, Failure> {
    let mut resolved = config::resolve(load_with_flags(&args)?)?;
    let sweep_cfg = config::resolve_sweep(&mut resolved)?;
    let dir = out_dir(&resolved)?;

    let table = sweep::run(&sweep_cfg, resolved.config.threads).map_err(compute)?;
    print_tables(std::slice::from_ref(&table))?;
    write_tables(
        &dir,
        "table",
        &resolved.config.output.formats,
        std::slice::from_ref(&table),
    )?;
    echo_config(&dir, &resolved)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: RunArgs) -> Result<ExitCode, Failure> {
    let mut resolved = config::resolve(load_with_flags(&args)?)?;
    let sweep_cfg = config::resolve_sweep(&mut resolved)?;
    let dir = out_dir(&resolved)?;

    let mut tables = Vec::new();
    for scheme in [
        spdd_core::scheme::SchemeKind::Hybrid,
        spdd_core::scheme::SchemeKind::UpwindShishkin,
        spdd_core::scheme::SchemeKind::UpwindUniform,
    ] {
        let mut cfg = sweep_cfg.clone();
        cfg.scheme = scheme;
        tables.push(sweep::run(&cfg, resolved.config.threads).map_err(compute)?);
    }
    print_tables(&tables)?;
    write_tables(&dir, "compare", &resolved.config.output.formats, &tables)?;
    echo_config(&dir, &resolved)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let seed = match (args.seed, &args.config) {
        (Some(seed), _) => seed,
        (None, Some(path)) => config::load(path)?.seed,
        (None, None) => 0,
    };
    let mut failed = 0usize;
    let reports = verify::run_all(seed);
    for report in &reports {
        let status = if report.passed { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", report.name, report.detail);
        if !report.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("error: {failed} of {} properties failed", reports.len());
        Ok(ExitCode::from(3))
    } else {
        println!("all {} properties passed (seed {seed})", reports.len());
        Ok(ExitCode::SUCCESS)
    }
}
