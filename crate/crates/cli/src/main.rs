use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minorbit::cache::{Cache, CACHE_DIR_ENV};
use minorbit::config::{Overrides, RunConfig};
use minorbit::constants::{constants_table, table_csv, table_json, ConstantsContext};
use minorbit::lie::build_named;
use minorbit::report::Status;
use minorbit::suites;

#[derive(Parser)]
#[command(name = "minorbit", version, about = "Exact verification of the star product on minimal nilpotent orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON-lines report.
    Verify(RunArgs),
    /// Print the table of scalar constants.
    Constants {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Print Gram pivots per degree as CSV.
    Gram(RunArgs),
    /// Compare the reproducing kernel with its closed form.
    Kernel {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
    },
    /// Inspect or manage the artifact cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// List cache files.
    List(CacheArgs),
    /// Delete all cache files.
    Clear(CacheArgs),
    /// Build ring components and Lambda slices into the cache.
    Build(RunArgs),
}

#[derive(Args)]
struct CacheArgs {
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples_margin: Option<f64>,
    #[arg(long)]
    float_tol: Option<f64>,
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Comma-separated: lie, scalars, moyal, lambda, star, gram, kernel, all.
    #[arg(long)]
    suites: Option<String>,
}

impl RunArgs {
    fn resolve(self) -> minorbit::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => Overrides::from_file(p)?,
            None => Overrides::default(),
        };
        file.layer(Overrides {
            algebra: self.algebra,
            max_degree: self.max_degree,
            seed: self.seed,
            samples_margin: self.samples_margin,
            float_tol: self.float_tol,
            cache_dir: self.cache_dir,
            report_path: self.report,
            suites: self.suites,
        })
        .resolve()
    }
}

fn fail(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn verify(config: RunConfig) -> ExitCode {
    let report = match suites::run(&config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Some(path) = &config.report_path {
        if let Err(e) = report.write(path) {
            return fail(e);
        }
    }
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Info => continue,
        };
        println!("{tag}  [{}] {}", c.suite, c.name);
    }
    let s = report.summary();
    println!("{} passed, {} failed, {} info", s.pass, s.fail, s.info);
    if s.fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = |run: RunArgs| run.resolve();
    match cli.command {
        Command::Verify(run) => match config(run) {
            Ok(c) => verify(c),
            Err(e) => fail(e),
        },
        Command::Constants { run, format } => {
            let c = match config(run) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let spec = match build_named(&c.algebra) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let rows = constants_table(&ConstantsContext::from_spec(&spec), c.max_degree);
            match format {
                Format::Csv => print!("{}", table_csv(&rows)),
                Format::Json => println!("{}", table_json(&rows)),
            }
            ExitCode::SUCCESS
        }
        Command::Gram(run) => {
            let reports = match config(run).and_then(|c| suites::gram_reports(&c)) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            print!("{}", suites::pivots_csv(&reports));
            if reports.iter().all(|r| r.positive && r.hermitian) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Kernel { run, pairs } => {
            let k = match config(run).and_then(|c| suites::kernel_report(&c, pairs)) {
                Ok(k) => k,
                Err(e) => return fail(e),
            };
            match serde_json::to_string_pretty(&k) {
                Ok(s) => println!("{s}"),
                Err(e) => return fail(e),
            }
            if k.exact_failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Cache { action } => match action {
            CacheAction::List(a) => match Cache::new(Some(a.cache_dir)).list() {
                Ok(entries) => {
                    for e in entries {
                        println!("{}\t{}", e.bytes, e.file);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            },
            CacheAction::Clear(a) => match Cache::new(Some(a.cache_dir)).clear() {
                Ok(n) => {
                    println!("removed {n} files");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            },
            CacheAction::Build(run) => {
                let c = match config(run) {
                    Ok(c) if c.cache_dir.is_some() => c,
                    Ok(_) => return fail(format!("cache build needs --cache-dir or {CACHE_DIR_ENV}")),
                    Err(e) => return fail(e),
                };
                match suites::warm_cache(&c) {
                    Ok(events) => {
                        for e in events {
                            println!("{}\t{}", e.outcome, e.entry);
                        }
                        ExitCode::SUCCESS
                    }
                    Err(e) => fail(e),
                }
            }
        },
    }
}
