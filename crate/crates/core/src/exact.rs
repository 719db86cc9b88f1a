//! Exact minimum-makespan wake-up trees for small instances.
//!
//! Depth-first branch and bound. A search state is a set of awake-robot
//! slots `(node, available_time)`: the root contributes one slot and every
//! woken robot two. The slot with the smallest available time is expanded
//! next, either retiring or waking one remaining sleeper. A partial state is
//! pruned when some remaining sleeper cannot be reached from any slot before
//! the incumbent makespan.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{FtkError, Result};
use crate::norm::Norm;
use crate::point::Point;
use crate::wakeup::{Instance, WakeupTree};

/// Search limits.
#[derive(Clone, Debug)]
pub struct SolverLimits {
    pub max_n: usize,
    pub time_budget: Option<Duration>,
    /// Number of parallel workers for the first branching level; 1 is deterministic.
    pub workers: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits { max_n: 12, time_budget: None, workers: 1 }
    }
}

impl SolverLimits {
    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n;
        self
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub tree: WakeupTree,
    pub optimum: f64,
    /// False when the time budget ran out before the search completed.
    pub optimal: bool,
    pub nodes_explored: u64,
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    node: usize,
    time: f64,
    /// Smallest sleeper this slot may wake (twin-slot symmetry breaking).
    min_target: usize,
}

struct Search<'a> {
    n: usize,
    dist: Vec<f64>,
    /// For each sleeper, the co-located sleeper of next lower index (if any).
    twin_below: Vec<Option<usize>>,
    /// Sleepers sorted by distance from each node.
    by_distance: Vec<Vec<usize>>,
    incumbent: &'a AtomicU64,
    best_parent: Vec<usize>,
    best_value: f64,
    parent: Vec<usize>,
    wake: Vec<f64>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: &'a AtomicBool,
}

const IMPROVE: f64 = 1e-12;

impl<'a> Search<'a> {
    fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * (self.n + 1) + b]
    }

    fn bound(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed)).min(self.best_value)
    }

    fn offer(&mut self, value: f64) {
        if value < self.best_value - IMPROVE {
            self.best_value = value;
            self.best_parent.clone_from(&self.parent);
            let bits = value.to_bits();
            self.incumbent.fetch_min(bits, Ordering::Relaxed);
        }
    }

    fn dfs(&mut self, slots: &mut Vec<Slot>, remaining: u32, current: f64) {
        self.nodes += 1;
        if self.nodes & 0x3ff == 0 {
            if let Some(dl) = self.deadline {
                if Instant::now() >= dl {
                    self.timed_out.store(true, Ordering::Relaxed);
                }
            }
        }
        if self.timed_out.load(Ordering::Relaxed) {
            return;
        }
        if remaining == 0 {
            self.offer(current);
            return;
        }
        let limit = self.bound() - IMPROVE;
        // every remaining sleeper must be reached from some slot
        let mut lb = current;
        let mut bits = remaining;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize + 1;
            bits &= bits - 1;
            let reach = slots.iter().map(|s| s.time + self.d(s.node, j)).fold(f64::INFINITY, f64::min);
            lb = lb.max(reach);
            if lb >= limit {
                return;
            }
        }
        if slots.is_empty() {
            return;
        }
        let k = (0..slots.len()).min_by(|&a, &b| slots[a].time.total_cmp(&slots[b].time)).unwrap();
        let slot = slots.swap_remove(k);
        // its twin (same node, same time) may only take a larger target
        let twin = slots.iter().position(|s| s.node == slot.node && s.time == slot.time && slot.node != 0);

        for idx in 0..self.by_distance[slot.node].len() {
            let j = self.by_distance[slot.node][idx];
            if j < slot.min_target || remaining & (1 << (j - 1)) == 0 {
                continue;
            }
            if let Some(t) = self.twin_below[j] {
                if remaining & (1 << (t - 1)) != 0 {
                    continue;
                }
            }
            let t = slot.time + self.d(slot.node, j);
            if t >= self.bound() - IMPROVE {
                // sorted by distance: every later target is at least as late
                break;
            }
            self.parent[j] = slot.node;
            self.wake[j] = t;
            let saved_twin = twin.map(|i| slots[i].min_target);
            if let Some(i) = twin {
                slots[i].min_target = j + 1;
            }
            let base = slots.len();
            slots.push(Slot { node: j, time: t, min_target: 1 });
            slots.push(Slot { node: j, time: t, min_target: 1 });
            self.dfs(slots, remaining & !(1 << (j - 1)), current.max(t));
            slots.truncate(base);
            if let (Some(i), Some(m)) = (twin, saved_twin) {
                slots[i].min_target = m;
            }
            if self.timed_out.load(Ordering::Relaxed) {
                break;
            }
        }
        // retire: the twin must retire as well
        if !self.timed_out.load(Ordering::Relaxed) {
            match twin {
                Some(i) => {
                    let other = slots.swap_remove(i);
                    self.dfs(slots, remaining, current);
                    slots.push(other);
                    let last = slots.len() - 1;
                    slots.swap(i, last);
                }
                None => self.dfs(slots, remaining, current),
            }
        }
        slots.push(slot);
        let last = slots.len() - 1;
        slots.swap(k, last);
    }
}

/// Greedy start: each slot, in time order, wakes the nearest remaining sleeper.
fn greedy_value(n: usize, dist: &[f64]) -> (f64, Vec<usize>) {
    let d = |a: usize, b: usize| dist[a * (n + 1) + b];
    let mut parent = vec![0usize; n + 1];
    let mut slots = vec![(0usize, 0.0f64)];
    let mut left: Vec<usize> = (1..=n).collect();
    let mut worst: f64 = 0.0;
    while !left.is_empty() {
        let k = (0..slots.len())
            .min_by(|&a, &b| {
                let ta = slots[a].1 + left.iter().map(|&j| d(slots[a].0, j)).fold(f64::INFINITY, f64::min);
                let tb = slots[b].1 + left.iter().map(|&j| d(slots[b].0, j)).fold(f64::INFINITY, f64::min);
                ta.total_cmp(&tb)
            })
            .unwrap();
        let (node, time) = slots.swap_remove(k);
        let li = (0..left.len()).min_by(|&a, &b| d(node, left[a]).total_cmp(&d(node, left[b]))).unwrap();
        let j = left.swap_remove(li);
        let t = time + d(node, j);
        parent[j] = node;
        worst = worst.max(t);
        slots.push((j, t));
        slots.push((j, t));
    }
    (worst, parent)
}

/// Minimum-makespan wake-up tree with straight edges.
pub fn optimal_tree(instance: &Instance, limits: &SolverLimits) -> Result<ExactSolution> {
    let n = instance.n();
    if n > limits.max_n {
        return Err(FtkError::Precondition(format!("exact search refused: n = {n} exceeds max_n = {}", limits.max_n)));
    }
    if n > 31 {
        return Err(FtkError::Precondition("exact search supports at most 31 sleepers".into()));
    }
    let positions = instance.positions();
    let norm = instance.norm();
    if n == 0 {
        return Ok(ExactSolution {
            tree: WakeupTree::trivial(positions[0]),
            optimum: 0.0,
            optimal: true,
            nodes_explored: 0,
        });
    }
    let mut dist = vec![0.0; (n + 1) * (n + 1)];
    for a in 0..=n {
        for b in 0..=n {
            dist[a * (n + 1) + b] = norm.distance(positions[a], positions[b]);
        }
    }
    let mut twin_below = vec![None; n + 1];
    for j in 1..=n {
        twin_below[j] = (1..j).rev().find(|&i| positions[i] == positions[j]);
    }
    let by_distance: Vec<Vec<usize>> = (0..=n)
        .map(|a| {
            let mut v: Vec<usize> = (1..=n).collect();
            v.sort_by(|&x, &y| dist[a * (n + 1) + x].total_cmp(&dist[a * (n + 1) + y]).then(x.cmp(&y)));
            v
        })
        .collect();
    let (greedy, greedy_parent) = greedy_value(n, &dist);
    let incumbent = AtomicU64::new((greedy * (1.0 + 1e-9) + 1e-12).to_bits());
    let timed_out = AtomicBool::new(false);
    let deadline = limits.time_budget.map(|b| Instant::now() + b);
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    let make_search = || Search {
        n,
        dist: dist.clone(),
        twin_below: twin_below.clone(),
        by_distance: by_distance.clone(),
        incumbent: &incumbent,
        best_parent: Vec::new(),
        best_value: f64::INFINITY,
        parent: vec![0; n + 1],
        wake: vec![0.0; n + 1],
        nodes: 0,
        deadline,
        timed_out: &timed_out,
    };

    let (value, parent_vec, nodes) = if limits.workers <= 1 {
        let mut s = make_search();
        s.dfs(&mut vec![Slot { node: 0, time: 0.0, min_target: 1 }], full, 0.0);
        (s.best_value, s.best_parent, s.nodes)
    } else {
        // fan out over the first sleeper woken; the incumbent is shared
        let firsts: Vec<usize> = by_distance[0].iter().copied().filter(|&j| twin_below[j].is_none()).collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(limits.workers)
            .build()
            .map_err(|e| FtkError::Internal(e.to_string()))?;
        let results: Vec<(f64, Vec<usize>, u64)> = pool.install(|| {
            firsts
                .par_iter()
                .map(|&j| {
                    let mut s = make_search();
                    let t = dist[j];
                    s.parent[j] = 0;
                    s.wake[j] = t;
                    let mut slots =
                        vec![Slot { node: j, time: t, min_target: 1 }, Slot { node: j, time: t, min_target: 1 }];
                    s.dfs(&mut slots, full & !(1 << (j - 1)), t);
                    (s.best_value, s.best_parent, s.nodes)
                })
                .collect()
        });
        let nodes = results.iter().map(|r| r.2).sum();
        let best = results.into_iter().filter(|r| !r.1.is_empty()).min_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((v, p, _)) => (v, p, nodes),
            None => (f64::INFINITY, Vec::new(), nodes),
        }
    };

    let (value, parent_vec) =
        if parent_vec.is_empty() || value > greedy { (greedy, greedy_parent) } else { (value, parent_vec) };
    let parents: Vec<Option<usize>> = (0..=n).map(|v| if v == 0 { None } else { Some(parent_vec[v]) }).collect();
    let tree = WakeupTree::from_parents(positions, parents, norm)?;
    let optimum = tree.makespan();
    debug_assert!((optimum - value).abs() < 1e-9);
    Ok(ExactSolution { tree, optimum, optimal: !timed_out.load(Ordering::Relaxed), nodes_explored: nodes })
}

/// `n` points equally spaced in arc length on the unit circle, the first at `(1, 0)`.
pub fn unif_points(n: usize, norm: &Norm) -> Vec<Point> {
    let total = norm.circumference();
    (0..n).map(|k| norm.point_at_arc(total * k as f64 / n as f64)).collect()
}

pub fn unif_instance(n: usize, norm: &Norm) -> Instance {
    Instance::new(norm.clone(), Point::ORIGIN, unif_points(n, norm)).expect("finite points")
}

/// Optimal makespan for `n` equally spaced points on the unit circle.
pub fn unif_makespan(n: usize, norm: &Norm, limits: &SolverLimits) -> Result<f64> {
    if n < 4 || n > limits.max_n {
        return Err(FtkError::Precondition(format!("unif_makespan needs 4 <= n <= {}, got {n}", limits.max_n)));
    }
    let sol = optimal_tree(&unif_instance(n, norm), limits)?;
    if !sol.optimal {
        return Err(FtkError::Precondition(format!("time budget exhausted before unif({n}) was proven optimal")));
    }
    Ok(sol.optimum)
}

/// Six sleepers in the square of diameter 1 with corners `A=(0,0)`, `B=(1/2,1/2)`,
/// `C=(1,0)`, `D=(1/2,-1/2)`; the awake robot sits at `A`. One sleeper is at `B`,
/// one at ℓ1 distance `ε` from `B` along `[BA]`, and four are spread evenly over `[CD]`.
pub fn square_13_6_instance(epsilon: f64) -> Result<Instance> {
    if !(0.0..=1.0 / 6.0).contains(&epsilon) {
        return Err(FtkError::Precondition(format!("epsilon must lie in [0, 1/6], got {epsilon}")));
    }
    let b = Point::new(0.5, 0.5);
    let c = Point::new(1.0, 0.0);
    let d = Point::new(0.5, -0.5);
    let p1 = Point::new(0.5 - 0.5 * epsilon, 0.5 - 0.5 * epsilon);
    let mut sleepers = vec![p1, b];
    sleepers.extend((0..4).map(|k| c.lerp(d, k as f64 / 3.0)));
    Instance::new(Norm::l1(), Point::ORIGIN, sleepers)
}

/// Optimal makespan of the six-sleeper square instance.
pub fn verify_13_6(epsilon: f64, limits: &SolverLimits) -> Result<f64> {
    let inst = square_13_6_instance(epsilon)?;
    Ok(optimal_tree(&inst, limits)?.optimum)
}
