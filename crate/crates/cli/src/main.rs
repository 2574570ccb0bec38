mod ops;
mod report;
mod spec;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use loglattice::Settings;

use report::Report;
use spec::{Case, Overrides, SchemaError, Suite};

const EXIT_FAIL: u8 = 1;
const EXIT_SCHEMA: u8 = 2;

#[derive(Parser)]
#[command(
    name = "loglattice",
    version,
    about = "Logarithmic lattice computations for irregular connections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Number of window enlargements used to certify stabilization.
    #[arg(long, global = true, value_name = "K")]
    window_grow: Option<usize>,
    /// Tower depth, replacing the value in the document.
    #[arg(long, global = true, value_name = "N")]
    depth: Option<usize>,
    /// Twist multiplicities; a single value applies to every boundary component.
    #[arg(long, global = true, value_name = "M", num_args = 1.., value_delimiter = ',')]
    delta: Option<Vec<u32>>,
    /// Permute the evaluation order of suite items.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Seed of the randomized block catalog used by `verify`.
    #[arg(long, global = true, value_name = "S", default_value_t = verify::DEFAULT_CATALOG_SEED)]
    catalog_seed: u64,
    /// Treat warnings (search caps reached) as failures.
    #[arg(long, global = true)]
    strict_exit: bool,
    /// Write the JSON report here and print a summary instead.
    #[arg(long, short, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice tower (and the closed form on formal documents).
    Tower { spec: PathBuf },
    /// Irregularity per boundary point or block.
    Irregularity { spec: PathBuf },
    /// Graded-piece acyclicity and cohomology comparisons.
    Cohomology { spec: PathBuf },
    /// Both K-classes on a curve document.
    Kclass { spec: PathBuf },
    /// Rees module checks, Euler operators and localization on a formal document.
    Rees { spec: PathBuf },
    /// The acceptance suite, or the `suites` of the given documents.
    Verify { specs: Vec<PathBuf> },
    /// Pretty-print a stored report.
    Report { file: PathBuf },
}

enum Failure {
    Schema(SchemaError),
    Io(String),
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Schema(e)
    }
}

fn settings(flags: &Flags) -> Result<Settings, SchemaError> {
    let mut s = Settings::default();
    if let Some(k) = flags.window_grow {
        s.grow_rounds = k;
    }
    if let Ok(v) = std::env::var("LOGLATTICE_MAX_DIM") {
        s.max_dim = v
            .trim()
            .parse()
            .map_err(|e| SchemaError::new("env.LOGLATTICE_MAX_DIM", format!("`{v}`: {e}")))?;
    }
    Ok(s)
}

fn suites_for(command: &Command, case: &Case) -> Result<Vec<Suite>, SchemaError> {
    let formal = matches!(case, Case::Formal(_));
    let (suites, ok) = match command {
        Command::Tower { .. } => (vec![Suite::Tower], true),
        Command::Irregularity { .. } => (vec![Suite::Irregularity], true),
        Command::Cohomology { .. } if formal => (vec![Suite::Alpha, Suite::Beta], true),
        Command::Cohomology { .. } => (vec![Suite::Cohomology], true),
        Command::Kclass { .. } => (vec![Suite::Kclass, Suite::P0], !formal),
        Command::Rees { .. } => (vec![Suite::Euler, Suite::Localization, Suite::Rees], formal),
        _ => (case.suites().to_vec(), true),
    };
    if ok {
        Ok(suites)
    } else {
        let want = if formal { "curve" } else { "formal" };
        Err(SchemaError::new(
            "mode",
            format!("this command needs a {want} document"),
        ))
    }
}

fn with_suites(case: Case, suites: Vec<Suite>) -> Case {
    match case {
        Case::Formal(mut c) => {
            c.suites = suites;
            Case::Formal(c)
        }
        Case::Curve(mut c) => {
            c.suites = suites;
            Case::Curve(c)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Tower { .. } => "tower",
        Command::Irregularity { .. } => "irregularity",
        Command::Cohomology { .. } => "cohomology",
        Command::Kclass { .. } => "kclass",
        Command::Rees { .. } => "rees",
        Command::Verify { .. } => "verify",
        Command::Report { .. } => "report",
    }
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    let flags = &cli.flags;
    let s = settings(flags)?;
    let o = Overrides {
        depth: flags.depth,
        delta: flags.delta.clone(),
    };
    let start = Instant::now();
    let mut catalog_seed = None;
    let tasks = match &cli.command {
        Command::Verify { specs } if specs.is_empty() => {
            catalog_seed = Some(flags.catalog_seed);
            verify::acceptance_tasks(flags.catalog_seed, &o)?
        }
        Command::Verify { specs } => {
            let cases = specs.iter().map(|p| spec::load(p, &o)).collect::<Result<Vec<_>, _>>()?;
            verify::spec_tasks(cases)
        }
        Command::Report { .. } => unreachable!("handled by main"),
        cmd @ (Command::Tower { spec }
        | Command::Irregularity { spec }
        | Command::Cohomology { spec }
        | Command::Kclass { spec }
        | Command::Rees { spec }) => {
            let case = spec::load(spec, &o)?;
            let suites = suites_for(cmd, &case)?;
            verify::spec_tasks(vec![with_suites(case, suites)])
        }
    };
    let items = verify::run_tasks(tasks, &s, flags.seed);
    let mut report = Report::new(command_name(&cli.command), s, flags.seed, items, flags.strict_exit);
    if let Some(cs) = catalog_seed {
        report.catalog_seed = Some(cs);
        report.criteria = verify::criteria(&report.items);
        report.pass &= report.criteria.values().all(|&v| v);
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), String> {
    let json = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match out {
        Some(p) => {
            std::fs::write(p, json + "\n").map_err(|e| format!("cannot write {}: {e}", p.display()))?;
            print!("{}", report.render());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn show(file: &Path) -> Result<Report, Failure> {
    let text =
        std::fs::read_to_string(file).map_err(|e| Failure::Io(format!("cannot read {}: {e}", file.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Schema(SchemaError::new(
            if path == "." { String::new() } else { path },
            e.into_inner(),
        ))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Report { file } => show(file).inspect(|r| print!("{}", r.render())),
        _ => execute(&cli),
    };
    match result {
        Err(Failure::Schema(e)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_SCHEMA)
        }
        Err(Failure::Io(e)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_FAIL)
        }
        Ok(report) => {
            if !matches!(cli.command, Command::Report { .. }) {
                if let Err(e) = emit(&report, cli.flags.out.as_deref()) {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_FAIL);
                }
            }
            for i in report.items.iter().filter(|i| !i.pass) {
                match &i.error {
                    Some(e) => eprintln!("{}: {e}", i.name),
                    None => eprintln!("{}: check failed", i.name),
                }
            }
            if cli.flags.strict_exit {
                for i in report.items.iter().filter(|i| !i.warnings.is_empty()) {
                    eprintln!("{}: {}", i.name, i.warnings.join("; "));
                }
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
    }
}
