use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperdyn::harness::{
    brute_force_enumeration, build_catalog, catalog_names, catalog_system, emit_report, metric_selftest, parse_list,
    run_theorem_suite, select_theorems, HarnessConfig, HarnessError, Report, ReportFormat,
};
use hyperdyn::{build_system, Dist, Level, Property, System, SystemLevels, SystemSpec};

const EXIT_FINDING: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "hyperdyn", version, about = "Dynamics on symmetric products and their suspensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one property of one system at one level.
    Check(CheckArgs),
    /// Run the theorem suite over a catalog.
    Verify(VerifyArgs),
    /// Run the theorem suite over every self-map of a small cycle.
    Enumerate(EnumerateArgs),
    /// Check metric axioms, the suspension metric and the semiconjugacy.
    MetricSelftest(SelftestArgs),
}

#[derive(Args, Default)]
struct BudgetArgs {
    /// Flat key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma list of rationals such as `1/2,1/4`.
    #[arg(long)]
    delta_grid: Option<String>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    eps_grid: Option<String>,
    #[arg(long)]
    work_cap: Option<u64>,
}

#[derive(Args)]
struct CheckArgs {
    /// Catalog name (`rot5`, `shift2`, ...) or path to a system file.
    #[arg(long)]
    system: String,
    #[arg(long)]
    property: Property,
    #[arg(long, default_value = "base")]
    level: Level,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Print the verdict as json instead of text.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// `all`, or a list such as `T1,T5,T12-T14`.
    #[arg(long)]
    theorems: Option<String>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json, csv or markdown; inferred from the `--out` extension when absent.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// `default` or a comma list of catalog names.
    #[arg(long)]
    catalog: Option<String>,
    /// System files added to the catalog.
    #[arg(long = "system-file")]
    system_files: Vec<PathBuf>,
    /// Comma list of arities.
    #[arg(long)]
    n: Option<String>,
    #[command(flatten)]
    report: ReportArgs,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 3)]
    points: usize,
    #[command(flatten)]
    report: ReportArgs,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value = "default")]
    catalog: String,
    #[arg(long, default_value = "2,3")]
    n: String,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    System(#[from] hyperdyn::DynError),
    #[error("{0}")]
    Usage(String),
}

fn load_config(args: &BudgetArgs) -> Result<HarnessConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => HarnessConfig::from_file(path)?,
        None => HarnessConfig::default(),
    };
    let b = &mut cfg.budget;
    if let Some(v) = args.horizon {
        b.horizon = v;
    }
    if let Some(v) = args.m_max {
        b.m_max = v;
    }
    if let Some(v) = args.work_cap {
        b.work_cap = v;
    }
    if let Some(v) = &args.delta_grid {
        b.delta_grid = parse_list::<Dist>("delta-grid", v)?;
    }
    if let Some(v) = &args.eps_grid {
        b.eps_grid = parse_list::<Dist>("eps-grid", v)?;
    }
    b.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn resolve_system(name: &str) -> Result<System, CliError> {
    let spec = match catalog_system(name) {
        Ok(spec) => spec,
        Err(_) if Path::new(name).is_file() => SystemSpec::from_file(Path::new(name))?,
        Err(e) => return Err(e.into()),
    };
    Ok(build_system(&spec)?)
}

fn report_format(args: &ReportArgs) -> Result<ReportFormat, CliError> {
    if let Some(f) = &args.format {
        return Ok(f.parse()?);
    }
    let ext = args.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str());
    Ok(match ext {
        Some("csv") => ReportFormat::Csv,
        Some("md") => ReportFormat::Markdown,
        _ => ReportFormat::Json,
    })
}

fn deliver(report: &Report, args: &ReportArgs) -> Result<(), CliError> {
    let format = report_format(args)?;
    match &args.out {
        Some(path) => emit_report(report, format, path)?,
        None => print!("{}", report.render(format)),
    }
    let counts: Vec<String> = report.status_counts().iter().map(|(s, c)| format!("{} {c}", s.name())).collect();
    eprintln!("{} results: {}", report.results.len(), counts.join(", "));
    for c in report.counterexamples() {
        eprintln!(
            "COUNTEREXAMPLE {} {} n={} {}: {}",
            c.theorem,
            c.system,
            c.n,
            c.arrow.label(),
            c.witness.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

fn finding(report: &Report) -> u8 {
    if report.counterexamples().next().is_some() {
        EXIT_FINDING
    } else {
        0
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Check(args) => {
            let cfg = load_config(&args.budget)?;
            let system = resolve_system(&args.system)?;
            let levels = SystemLevels::build(&system, args.n);
            let verdict = levels.detect(args.level, args.property, &cfg.budget);
            if args.json {
                println!("{}", serde_json::to_string_pretty(&verdict).expect("verdict serializes"));
            } else {
                println!("{} {} {} (n={}): {verdict}", system.name(), args.level, args.property, args.n);
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let mut cfg = load_config(&args.budget)?;
            if let Some(c) = &args.catalog {
                cfg.catalog = catalog_names(c);
            }
            if let Some(n) = &args.n {
                cfg.ns = parse_list::<usize>("n", n)?;
            }
            if let Some(t) = &args.report.theorems {
                cfg.theorems = t.clone();
            }
            cfg.system_files.extend(args.system_files.iter().cloned());
            if cfg.ns.is_empty() {
                return Err(CliError::Usage("--n needs at least one arity".into()));
            }
            let theorems = select_theorems(&cfg.theorems)?;
            let mut systems = build_catalog(&cfg.catalog)?;
            for path in &cfg.system_files {
                systems.push(build_system(&SystemSpec::from_file(path)?)?);
            }
            let report = run_theorem_suite(&systems, &theorems, &cfg.ns, &cfg.budget);
            deliver(&report, &args.report)?;
            Ok(finding(&report))
        }
        Command::Enumerate(args) => {
            let cfg = load_config(&args.budget)?;
            let theorems = select_theorems(args.report.theorems.as_deref().unwrap_or("all"))?;
            let report = brute_force_enumeration(args.points, &theorems, &cfg.budget)?;
            deliver(&report, &args.report)?;
            if let Some(e) = &report.enumeration {
                eprintln!("{} maps on {} points, {} counterexamples", e.maps, e.point_count, e.counterexamples);
            }
            Ok(finding(&report))
        }
        Command::MetricSelftest(args) => {
            let systems = build_catalog(&catalog_names(&args.catalog))?;
            let ns = parse_list::<usize>("n", &args.n)?;
            let checks = metric_selftest(&systems, &ns);
            for c in &checks {
                println!("{} {} n={} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.system, c.n, c.check, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { EXIT_FINDING })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
