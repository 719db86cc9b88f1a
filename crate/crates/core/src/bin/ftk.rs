use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ftk::exact::SolverLimits;
use ftk::harness::gen::{generate, GenKind};
use ftk::harness::io::{emit_instance, emit_tree, parse_instance, parse_norm_line, parse_tree, write_atomic};
use ftk::harness::render::render_svg;
use ftk::harness::{bench, bench_csv, compare, format_compare, prepare, solve, RunOptions};
use ftk::{check, FtkError, Norm};

#[derive(Parser)]
#[command(name = "ftk", version, about = "Freeze-tag wake-up trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Rescale the instance to unit radius (and allow l1_five on other norms).
    #[arg(long)]
    scale_to_unit: bool,
    /// Largest n handed to the exact solver.
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    /// Wall-clock budget for the exact solver.
    #[arg(long)]
    time_budget_ms: Option<u64>,
}

impl Common {
    fn options(&self) -> RunOptions {
        let mut limits = SolverLimits::default().with_max_n(self.max_n);
        if let Some(ms) = self.time_budget_ms {
            limits = limits.with_time_budget(Duration::from_millis(ms));
        }
        RunOptions { scale_to_unit: self.scale_to_unit, limits }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a tree with one strategy, print its makespan and write the tree file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "l1_five")]
        strategy: String,
        /// Tree file (defaults to the instance path with extension `.tree`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every applicable strategy and print a table.
    Compare {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Time a strategy on generated instances and write CSV.
    Bench {
        #[arg(long)]
        strategy: String,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value = "l2")]
        norm: String,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds per size.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate an instance: uniform_circle:N, random_disk:N, random_cone:N:W, cross4, square13_6[:EPS].
    Gen {
        kind: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a tree as SVG (from a tree file, or built with a strategy).
    Render {
        instance: PathBuf,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value = "l1_five")]
        strategy: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Contract(String),
    Bound(String),
}

impl From<FtkError> for Failure {
    fn from(e: FtkError) -> Self {
        Failure::Contract(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Contract(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text.as_bytes()).map_err(|e| Failure::Contract(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<ftk::Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::Contract(format!("{}: {e}", path.display())))
}

fn norm_arg(s: &str) -> Result<Norm, Failure> {
    Ok(parse_norm_line(1, &format!("norm {}", s.replace([':', ','], " ")))?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Solve { instance, strategy, out, common } => {
            let opts = common.options();
            let inst = prepare(&load(&instance)?, &opts);
            let o = solve(&strategy, &inst, &opts)?;
            println!("makespan {:.6}", o.makespan);
            println!("claimed_bound {:.6}", o.report.claimed_bound);
            let out = out.unwrap_or_else(|| instance.with_extension("tree"));
            write(&out, &emit_tree(&o.report.tree))?;
            if !o.within_bound {
                return Err(Failure::Bound(format!(
                    "{}: makespan {} exceeds claimed bound {}",
                    strategy, o.makespan, o.report.claimed_bound
                )));
            }
        }
        Cmd::Compare { instance, common } => {
            let opts = common.options();
            let inst = prepare(&load(&instance)?, &opts);
            let rows = compare(&inst, &opts);
            print!("{}", format_compare(&rows));
            if rows.iter().any(|r| matches!(&r.result, Ok(o) if !o.within_bound)) {
                return Err(Failure::Bound("a strategy exceeded its claimed bound".into()));
            }
        }
        Cmd::Bench { strategy, n, norm, seed, seeds, out, common } => {
            let norm = norm_arg(&norm)?;
            let seeds: Vec<u64> = (seed..seed + seeds).collect();
            let records = bench(&strategy, &norm, &n, &seeds, &common.options())?;
            emit(&out, &bench_csv(&records))?;
            if let Some(r) = records.iter().find(|r| !r.within_bound()) {
                return Err(Failure::Bound(format!(
                    "{} n={} seed={}: makespan {} exceeds claimed bound {}",
                    r.strategy_name, r.n, r.seed, r.makespan, r.claimed_bound
                )));
            }
        }
        Cmd::Gen { kind, norm, seed, out } => {
            let kind: GenKind = kind.parse()?;
            let inst = generate(kind, &norm_arg(&norm)?, seed)?;
            emit(&out, &emit_instance(&inst))?;
        }
        Cmd::Render { instance, tree, strategy, out, common } => {
            let opts = common.options();
            let inst = load(&instance)?;
            let tree = match tree {
                Some(p) => {
                    let t = parse_tree(&read(&p)?, inst.norm())?;
                    check(&t, &inst)?;
                    t
                }
                None => {
                    let inst = prepare(&inst, &opts);
                    solve(&strategy, &inst, &opts)?.report.tree
                }
            };
            let inst = if tree.position(0) == inst.p0() || !opts.scale_to_unit { inst } else { prepare(&inst, &opts) };
            emit(&out, &render_svg(&tree, &inst))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Contract(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Bound(m)) => {
            eprintln!("bound violation: {m}");
            ExitCode::from(3)
        }
    }
}
