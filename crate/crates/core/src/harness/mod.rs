//! Strategy registry, comparison tables and benchmarks behind the `ftk` binary.

pub mod gen;
pub mod io;
pub mod render;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cone::{
    enclosing_cone, general_norm_wakeup, heap_strategy, linear_split_strategy, split_cone_strategy, StrategyReport,
};
use crate::error::{FtkError, Result};
use crate::exact::{optimal_tree, SolverLimits};
use crate::l1::wake_l1_disk;
use crate::norm::Norm;
use crate::point::Point;
use crate::wakeup::{check, Instance, WakeupTree};

use self::gen::{generate, GenKind};
use self::io::{emit_norm, fmt17};

/// Names accepted by `--strategy`.
pub const STRATEGIES: [&str; 6] = ["l1_five", "heap", "split_cone", "linear_split", "general", "exact"];

/// Slack allowed between a makespan and its claimed bound.
pub const BOUND_SLACK: f64 = 1e-6;

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Rescale to unit radius first; also lets `l1_five` run on other norms via the enclosing ℓ1 disk.
    pub scale_to_unit: bool,
    pub limits: SolverLimits,
}

/// Applies `--scale-to-unit` to an instance.
pub fn prepare(instance: &Instance, opts: &RunOptions) -> Instance {
    let r = instance.radius();
    if opts.scale_to_unit && r > 0.0 {
        instance.normalized(1.0 / r)
    } else {
        instance.clone()
    }
}

/// Largest norm of the four ℓ1 unit vectors, so that `η(x) ≤ α·‖x‖₁`.
fn l1_domination(norm: &Norm) -> f64 {
    [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        .iter()
        .map(|&(x, y)| norm.eval(Point::new(x, y)))
        .fold(0.0, f64::max)
}

fn l1_five(instance: &Instance, opts: &RunOptions) -> Result<StrategyReport> {
    let started = Instant::now();
    if instance.norm().is_l1() {
        let tree = wake_l1_disk(instance)?;
        return Ok(StrategyReport {
            tree,
            claimed_bound: 5.0 * instance.radius(),
            construction_time: started.elapsed(),
            strategy_name: "l1_five",
        });
    }
    if !opts.scale_to_unit {
        return Err(FtkError::Inapplicable(format!(
            "l1_five requires the l1 norm (instance uses {}); pass --scale-to-unit to run it in the enclosing l1 disk",
            instance.norm().label()
        )));
    }
    let as_l1 = Instance::new(Norm::l1(), instance.p0(), instance.sleepers().to_vec())?;
    let t = wake_l1_disk(&as_l1)?;
    let parent = (0..t.len()).map(|v| t.parent(v)).collect();
    let paths = (0..t.len()).map(|v| t.path(v).to_vec()).collect();
    let tree = WakeupTree::from_parts(instance.positions(), parent, paths, instance.norm())?;
    Ok(StrategyReport {
        tree,
        claimed_bound: 5.0 * as_l1.radius() * l1_domination(instance.norm()),
        construction_time: started.elapsed(),
        strategy_name: "l1_five",
    })
}

fn exact(instance: &Instance, opts: &RunOptions) -> Result<StrategyReport> {
    let started = Instant::now();
    let sol = optimal_tree(instance, &opts.limits)?;
    Ok(StrategyReport {
        tree: sol.tree,
        claimed_bound: sol.optimum,
        construction_time: started.elapsed(),
        strategy_name: if sol.optimal { "exact" } else { "exact(budget)" },
    })
}

/// Runs one strategy on an (already prepared) instance.
pub fn run_strategy(name: &str, instance: &Instance, opts: &RunOptions) -> Result<StrategyReport> {
    if instance.n() == 0 && name != "exact" {
        return Ok(StrategyReport {
            tree: WakeupTree::trivial(instance.p0()),
            claimed_bound: 0.0,
            construction_time: Duration::ZERO,
            strategy_name: STRATEGIES.iter().find(|s| **s == name).copied().unwrap_or("trivial"),
        });
    }
    match name {
        "l1_five" => l1_five(instance, opts),
        "heap" => heap_strategy(instance),
        "split_cone" => split_cone_strategy(instance, &enclosing_cone(instance)?),
        "linear_split" => linear_split_strategy(instance, &enclosing_cone(instance)?),
        "general" => general_norm_wakeup(instance),
        "exact" => exact(instance, opts),
        other => Err(FtkError::InvalidInput(format!(
            "unknown strategy '{other}'; expected one of {}",
            STRATEGIES.join(", ")
        ))),
    }
}

/// Outcome of a validated run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: StrategyReport,
    pub makespan: f64,
    /// False when the makespan exceeds the claimed bound.
    pub within_bound: bool,
}

/// Runs a strategy, validates its tree against the instance and compares with its bound.
pub fn solve(name: &str, instance: &Instance, opts: &RunOptions) -> Result<Outcome> {
    let report = run_strategy(name, instance, opts)?;
    check(&report.tree, instance)?;
    let makespan = report.makespan();
    let within_bound = makespan <= report.claimed_bound + BOUND_SLACK;
    Ok(Outcome { report, makespan, within_bound })
}

/// One row of `ftk compare`.
#[derive(Clone, Debug)]
pub struct CompareRow {
    pub strategy: &'static str,
    pub result: std::result::Result<Outcome, String>,
}

/// Runs every strategy (exact only while `n ≤ max_n`).
pub fn compare(instance: &Instance, opts: &RunOptions) -> Vec<CompareRow> {
    STRATEGIES
        .iter()
        .map(|&name| {
            let result = if name == "exact" && instance.n() > opts.limits.max_n {
                Err(format!("skipped: n = {} exceeds max_n = {}", instance.n(), opts.limits.max_n))
            } else {
                solve(name, instance, opts).map_err(|e| e.to_string())
            };
            CompareRow { strategy: name, result }
        })
        .collect()
}

/// Fixed-width table of comparison rows.
pub fn format_compare(rows: &[CompareRow]) -> String {
    let mut s = format!("{:<14}{:>12}{:>14}{:>12}  {}\n", "strategy", "makespan", "claimed_bound", "time_ms", "note");
    for row in rows {
        match &row.result {
            Ok(o) => s.push_str(&format!(
                "{:<14}{:>12.6}{:>14.6}{:>12.3}  {}\n",
                row.strategy,
                o.makespan,
                o.report.claimed_bound,
                o.report.construction_time.as_secs_f64() * 1e3,
                if o.within_bound { "" } else { "BOUND VIOLATED" }
            )),
            Err(e) => s.push_str(&format!("{:<14}{:>12}{:>14}{:>12}  {}\n", row.strategy, "-", "-", "-", e)),
        }
    }
    s
}

/// One benchmark measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub strategy_name: String,
    pub n: usize,
    pub norm: String,
    pub makespan: f64,
    pub claimed_bound: f64,
    pub construct_time_ns: u128,
    pub seed: u64,
}

impl BenchRecord {
    pub const HEADER: &'static str = "strategy_name,n,norm,makespan,claimed_bound,construct_time_ns,seed";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.strategy_name,
            self.n,
            self.norm,
            fmt17(self.makespan),
            fmt17(self.claimed_bound),
            self.construct_time_ns,
            self.seed
        )
    }

    pub fn within_bound(&self) -> bool {
        self.makespan <= self.claimed_bound + BOUND_SLACK
    }
}

/// CSV text with header.
pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(BenchRecord::HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Instance family a strategy is benchmarked on: a quarter cone for cone strategies, the disk otherwise.
pub fn bench_kind(strategy: &str, n: usize, norm: &Norm) -> GenKind {
    match strategy {
        "heap" | "split_cone" | "linear_split" => GenKind::RandomCone(n, norm.circumference() / 4.0),
        _ => GenKind::RandomDisk(n),
    }
}

/// Benchmarks `strategy` for every `n` and seed; seeds of one size run in parallel.
pub fn bench(strategy: &str, norm: &Norm, ns: &[usize], seeds: &[u64], opts: &RunOptions) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &n in ns {
        let rows: Result<Vec<BenchRecord>> = seeds
            .par_iter()
            .map(|&seed| {
                let inst = prepare(&generate(bench_kind(strategy, n, norm), norm, seed)?, opts);
                let started = Instant::now();
                let report = run_strategy(strategy, &inst, opts)?;
                let elapsed = started.elapsed();
                check(&report.tree, &inst)?;
                Ok(BenchRecord {
                    strategy_name: strategy.to_string(),
                    n,
                    norm: emit_norm(norm),
                    makespan: report.makespan(),
                    claimed_bound: report.claimed_bound,
                    construct_time_ns: elapsed.as_nanos(),
                    seed,
                })
            })
            .collect();
        out.extend(rows?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_five_needs_l1_or_the_flag() {
        let inst = generate(GenKind::RandomDisk(30), &Norm::l2(), 1).unwrap();
        let e = run_strategy("l1_five", &inst, &RunOptions::default()).unwrap_err();
        assert!(matches!(e, FtkError::Inapplicable(_)));
        assert!(e.to_string().contains("l1"));
        let opts = RunOptions { scale_to_unit: true, ..Default::default() };
        let o = solve("l1_five", &prepare(&inst, &opts), &opts).unwrap();
        assert!(o.within_bound);
        assert!(o.report.claimed_bound <= 5.0 * 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn cross4_solves_to_five() {
        let inst = generate(GenKind::Cross4, &Norm::l1(), 0).unwrap();
        let o = solve("l1_five", &inst, &RunOptions::default()).unwrap();
        assert_eq!(format!("makespan {:.6}", o.makespan), "makespan 5.000000");
    }

    #[test]
    fn compare_rows_respect_bounds() {
        let inst = generate(GenKind::RandomDisk(7), &Norm::l1(), 5).unwrap();
        let rows = compare(&inst, &RunOptions::default());
        let opt = rows.iter().find(|r| r.strategy == "exact").unwrap().result.as_ref().unwrap().makespan;
        for row in &rows {
            if let Ok(o) = &row.result {
                assert!(o.within_bound, "{}", row.strategy);
                assert!(o.makespan >= opt - 1e-9, "{}", row.strategy);
            }
        }
        let table = format_compare(&rows);
        assert_eq!(table.lines().count(), 7);
    }

    #[test]
    fn unknown_strategy_is_rejected() {
        let inst = generate(GenKind::Cross4, &Norm::l1(), 0).unwrap();
        assert!(run_strategy("bogus", &inst, &RunOptions::default()).is_err());
    }

    #[test]
    fn bench_rows_are_within_bounds() {
        for s in ["l1_five", "heap", "split_cone", "linear_split", "general"] {
            let norm = if s == "l1_five" { Norm::l1() } else { Norm::l2() };
            let rows = bench(s, &norm, &[50, 200], &[1, 2, 3], &RunOptions::default()).unwrap();
            assert_eq!(rows.len(), 6);
            assert!(rows.iter().all(BenchRecord::within_bound), "{s}: {rows:?}");
            let csv = bench_csv(&rows);
            assert!(csv.starts_with(BenchRecord::HEADER));
            assert_eq!(csv.lines().count(), 7);
        }
    }
}
