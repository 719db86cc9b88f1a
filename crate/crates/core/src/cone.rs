//! Strategies for arbitrary norms: heap trees, the optimal line solver,
//! split-cone and linear-split trees, the cone decomposition of the whole
//! disk, the four-robot construction, and analytic bounds on the wake-up ratio.

use std::time::{Duration, Instant};

use crate::error::{FtkError, Result};
use crate::exact::{optimal_tree, SolverLimits};
use crate::norm::{Cone, Norm, NormKind, EPS};
use crate::point::Point;
use crate::wakeup::{Instance, WakeupTree};

/// The golden ratio.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

/// A tree together with the bound its construction guarantees.
#[derive(Clone, Debug)]
pub struct StrategyReport {
    pub tree: WakeupTree,
    pub claimed_bound: f64,
    pub construction_time: Duration,
    pub strategy_name: &'static str,
}

impl StrategyReport {
    pub fn makespan(&self) -> f64 {
        self.tree.makespan()
    }
}

/// Lower and upper bounds on `γ(η)` (or `γ_n(η)` when `n` is set).
#[derive(Clone, Debug, PartialEq)]
pub struct GammaBounds {
    pub lower: f64,
    pub upper: f64,
    pub norm: Norm,
    pub n: Option<usize>,
}

/// Parent links plus optional waypoints under construction; polylines are built at the end.
struct TreeParts {
    positions: Vec<Point>,
    parent: Vec<Option<usize>>,
    via: Vec<Option<Point>>,
}

impl TreeParts {
    fn new(instance: &Instance) -> Self {
        let positions = instance.positions();
        let n = positions.len();
        TreeParts { positions, parent: vec![None; n], via: vec![None; n] }
    }

    fn link(&mut self, parent: usize, child: usize) {
        self.parent[child] = Some(parent);
        self.via[child] = None;
    }

    fn link_via(&mut self, parent: usize, via: Point, child: usize) {
        self.parent[child] = Some(parent);
        self.via[child] = Some(via);
    }

    fn edge_length(&self, norm: &Norm, v: usize) -> f64 {
        let (a, b) = (self.positions[self.parent[v].unwrap()], self.positions[v]);
        match self.via[v] {
            None => norm.distance(a, b),
            Some(w) => norm.distance(a, w) + norm.distance(w, b),
        }
    }

    fn finish(self, norm: &Norm) -> Result<WakeupTree> {
        let n = self.positions.len();
        let mut start = Vec::with_capacity(n + 1);
        let mut pts = Vec::with_capacity(2 * n + self.via.iter().flatten().count());
        start.push(0);
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                pts.push(self.positions[p]);
                if let Some(w) = self.via[v] {
                    pts.push(w);
                }
                pts.push(self.positions[v]);
            }
            start.push(pts.len());
        }
        WakeupTree::from_flat(self.positions, self.parent, start, pts, norm)
    }
}

fn report(tree: WakeupTree, claimed_bound: f64, started: Instant, strategy_name: &'static str) -> StrategyReport {
    StrategyReport { tree, claimed_bound, construction_time: started.elapsed(), strategy_name }
}

/// Binary min-heap by `(key, index)`, built bottom-up in linear time.
pub fn build_min_heap(items: &mut [(f64, usize)]) {
    let n = items.len();
    for i in (0..n / 2).rev() {
        sift_down(items, i);
    }
}

fn less(a: &(f64, usize), b: &(f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn sift_down(items: &mut [(f64, usize)], mut i: usize) {
    let n = items.len();
    loop {
        let (l, r) = (2 * i + 1, 2 * i + 2);
        let mut m = i;
        if l < n && less(&items[l], &items[m]) {
            m = l;
        }
        if r < n && less(&items[r], &items[m]) {
            m = r;
        }
        if m == i {
            return;
        }
        items.swap(i, m);
        i = m;
    }
}

/// Links `root → heap top` and heap parents to heap children.
fn attach_heap(parts: &mut TreeParts, root: usize, heap: &[(f64, usize)]) {
    if heap.is_empty() {
        return;
    }
    parts.link(root, heap[0].1);
    for i in 1..heap.len() {
        parts.link(heap[(i - 1) / 2].1, heap[i].1);
    }
}

fn floor_log2(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as f64
    }
}

/// Smallest cone (arc length and start position) holding every sleeper direction.
fn enclosing_arc(instance: &Instance) -> (f64, f64) {
    let norm = instance.norm();
    let total = norm.circumference();
    let mut pos: Vec<f64> = instance
        .sleepers()
        .iter()
        .map(|&p| p - instance.p0())
        .filter(|u| norm.eval(*u) > 0.0)
        .map(|u| norm.arc_position(u))
        .collect();
    if pos.is_empty() {
        return (0.0, 0.0);
    }
    pos.sort_by(f64::total_cmp);
    let mut best_gap = pos[0] + total - pos[pos.len() - 1];
    let mut start = pos[0];
    for w in pos.windows(2) {
        if w[1] - w[0] > best_gap {
            best_gap = w[1] - w[0];
            start = w[1];
        }
    }
    ((total - best_gap).max(0.0), start)
}

/// Narrowest cone at `p0` holding every sleeper direction.
pub fn enclosing_cone(instance: &Instance) -> Result<Cone> {
    let (w, start) = enclosing_arc(instance);
    Cone::from_position(instance.norm(), start, w)
}

/// Heap tree keyed by distance from `p0`.
pub fn heap_strategy(instance: &Instance) -> Result<StrategyReport> {
    let started = Instant::now();
    let n = instance.n();
    if n == 0 {
        return Err(FtkError::Precondition("heap strategy needs at least one sleeper".into()));
    }
    let mut heap: Vec<(f64, usize)> = (1..=n).map(|i| (instance.dist(0, i), i)).collect();
    build_min_heap(&mut heap);
    let mut parts = TreeParts::new(instance);
    attach_heap(&mut parts, 0, &heap);
    let tree = parts.finish(instance.norm())?;
    let (w, _) = enclosing_arc(instance);
    let r = instance.radius();
    Ok(report(tree, r * (1.0 + w * floor_log2(n)), started, "heap"))
}

/// True when every robot lies on one line (within `EPS` relative to the extent).
pub fn is_collinear(instance: &Instance) -> bool {
    let pts = instance.positions();
    let far = pts.iter().max_by(|a, b| (**a - pts[0]).l2().total_cmp(&(**b - pts[0]).l2())).copied().unwrap();
    let dir = far - pts[0];
    let len = dir.l2();
    if len == 0.0 {
        return true;
    }
    pts.iter().all(|&p| (dir.cross(p - pts[0]) / len).abs() <= EPS * len.max(1.0))
}

/// Optimal tree for collinear robots: two heap trees on the two sides of `p0`,
/// joined through whichever nearest point gives the smaller makespan.
pub fn line_optimal(instance: &Instance) -> Result<StrategyReport> {
    let started = Instant::now();
    let n = instance.n();
    if !is_collinear(instance) {
        return Err(FtkError::Precondition("line_optimal needs collinear robots".into()));
    }
    if n == 0 {
        return Ok(report(WakeupTree::trivial(instance.p0()), 0.0, started, "line_optimal"));
    }
    let p0 = instance.p0();
    let far = (1..=n).max_by(|&a, &b| instance.dist(0, a).total_cmp(&instance.dist(0, b))).unwrap();
    let dir = instance.position(far) - p0;
    let mut side_a: Vec<(f64, usize)> = Vec::new();
    let mut side_b: Vec<(f64, usize)> = Vec::new();
    for i in 1..=n {
        let key = instance.dist(0, i);
        if (instance.position(i) - p0).dot(dir) >= 0.0 {
            side_a.push((key, i));
        } else {
            side_b.push((key, i));
        }
    }
    let nearest = |s: &[(f64, usize)]| s.iter().copied().reduce(|a, b| if less(&b, &a) { b } else { a });
    let farthest = |s: &[(f64, usize)]| s.iter().map(|x| x.0).fold(0.0, f64::max);
    let mut parts = TreeParts::new(instance);
    let value;
    match (nearest(&side_a), nearest(&side_b)) {
        (Some(_), None) | (None, Some(_)) => {
            let mut heap = if side_b.is_empty() { side_a } else { side_b };
            build_min_heap(&mut heap);
            attach_heap(&mut parts, 0, &heap);
            value = farthest(&heap);
        }
        (Some(a), Some(b)) => {
            let (fa, fb) = (farthest(&side_a), farthest(&side_b));
            // via a: reach b' at a + (a + fb); a' at fa
            let via_a = a.0 + (fa - a.0).max(a.0 + fb);
            let via_b = b.0 + (fb - b.0).max(b.0 + fa);
            let (first, first_side, other, other_side) =
                if via_a <= via_b { (a, side_a, b, side_b) } else { (b, side_b, a, side_a) };
            value = via_a.min(via_b);
            parts.link(0, first.1);
            let mut h1: Vec<(f64, usize)> = first_side.into_iter().filter(|x| x.1 != first.1).collect();
            build_min_heap(&mut h1);
            attach_heap(&mut parts, first.1, &h1);
            parts.link(first.1, other.1);
            let mut h2: Vec<(f64, usize)> = other_side.into_iter().filter(|x| x.1 != other.1).collect();
            build_min_heap(&mut h2);
            attach_heap(&mut parts, other.1, &h2);
        }
        (None, None) => unreachable!(),
    }
    let tree = parts.finish(instance.norm())?;
    Ok(report(tree, value, started, "line_optimal"))
}

/// Per-node bookkeeping of a split-cone construction, in arc offsets from the cone start.
#[derive(Clone, Debug)]
pub struct SplitTrace {
    /// Sleeper index → `(lo, hi)` of the subcone the node was chosen in.
    pub cone_of: Vec<Option<(f64, f64)>>,
}

fn split_cone_parts(
    instance: &Instance,
    cone: &Cone,
    parts: &mut TreeParts,
    root: usize,
    members: &[usize],
    mut trace: Option<&mut SplitTrace>,
) -> Result<()> {
    if members.is_empty() {
        return Ok(());
    }
    let p0 = instance.p0();
    let w = cone.arc_length();
    let offset: Vec<(usize, f64)> =
        members.iter().map(|&i| (i, cone.offset_of(instance.position(i) - p0).min(w))).collect();
    let mut sorted = offset;
    sorted.sort_by(|a, b| instance.dist(0, a.0).total_cmp(&instance.dist(0, b.0)).then(a.0.cmp(&b.0)));
    let c = 1.0 / GOLDEN;
    // (parent, lo, hi, members sorted by distance)
    let first = sorted[0];
    parts.link(root, first.0);
    if let Some(t) = trace.as_deref_mut() {
        t.cone_of[first.0] = Some((0.0, w));
    }
    let mut stack = vec![(first.0, first.1, 0.0, w, sorted[1..].to_vec())];
    while let Some((node, off, lo, hi, rest)) = stack.pop() {
        if rest.is_empty() {
            continue;
        }
        let x = hi - lo;
        let ((clo, chi), (olo, ohi)) =
            if off <= lo + c * x { ((lo, lo + c * x), (lo + c * x, hi)) } else { ((hi - c * x, hi), (lo, hi - c * x)) };
        let (same, other): (Vec<_>, Vec<_>) = rest.into_iter().partition(|&(_, o)| o >= clo && o <= chi);
        for (sub, slo, shi) in [(same, clo, chi), (other, olo, ohi)] {
            if let Some(&(b, boff)) = sub.first() {
                parts.link(node, b);
                if let Some(t) = trace.as_deref_mut() {
                    t.cone_of[b] = Some((slo, shi));
                }
                stack.push((b, boff, slo, shi, sub[1..].to_vec()));
            }
        }
    }
    Ok(())
}

fn check_in_cone(instance: &Instance, cone: &Cone) -> Result<()> {
    let p0 = instance.p0();
    if let Some(p) = instance.sleepers().iter().find(|&&p| !cone.contains_direction(p - p0)) {
        return Err(FtkError::Precondition(format!("sleeper {p} lies outside the cone")));
    }
    Ok(())
}

/// Split-cone tree together with its per-node subcones.
pub fn split_cone_traced(instance: &Instance, cone: &Cone) -> Result<(StrategyReport, SplitTrace)> {
    let started = Instant::now();
    check_in_cone(instance, cone)?;
    let n = instance.n();
    let mut parts = TreeParts::new(instance);
    let mut trace = SplitTrace { cone_of: vec![None; n + 1] };
    let members: Vec<usize> = (1..=n).collect();
    split_cone_parts(instance, cone, &mut parts, 0, &members, Some(&mut trace))?;
    let tree = parts.finish(instance.norm())?;
    let r = instance.radius();
    let bound = r * (1.0 + GOLDEN * cone.arc_length());
    Ok((report(tree, bound, started, "split_cone"), trace))
}

/// Each node splits its subcone at ratio `1/φ`, the larger part holding the node,
/// and wakes the closest robot of both parts.
pub fn split_cone_strategy(instance: &Instance, cone: &Cone) -> Result<StrategyReport> {
    Ok(split_cone_traced(instance, cone)?.0)
}

/// Bound proved for the linear-split tree on `n` robots in a cone of arc length `w`
/// (unit radius).
pub fn linear_split_bound(n: usize, w: f64) -> f64 {
    if n < 2 {
        return 1.0;
    }
    let log = (n as f64).log2();
    let k = (n as f64 / log).ceil();
    1.0 + GOLDEN * w + 4.0 * w * floor_log2(n) / k.powf(GOLDEN.log2())
}

fn linear_split_parts(
    instance: &Instance,
    cone: &Cone,
    parts: &mut TreeParts,
    root: usize,
    members: &[usize],
) -> Result<()> {
    let m = members.len();
    if m < 2 {
        if let Some(&i) = members.first() {
            parts.link(root, i);
        }
        return Ok(());
    }
    let p0 = instance.p0();
    let w = cone.arc_length();
    let k = ((m as f64) / (m as f64).log2()).ceil() as usize;
    let k = k.clamp(1, m);
    // (distance, index, offset in the cone), computed in one sequential pass
    let mut keyed: Vec<(f64, usize, f64)> = members
        .iter()
        .map(|&i| {
            let u = instance.position(i) - p0;
            (instance.norm().eval(u), i, cone.offset_of(u).min(w))
        })
        .collect();
    if k < m {
        keyed.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }
    let (near, far) = keyed.split_at(k);
    let near_ids: Vec<usize> = near.iter().map(|x| x.1).collect();
    split_cone_parts(instance, cone, parts, root, &near_ids, None)?;
    if far.is_empty() {
        return Ok(());
    }
    let s = 4.0 * w / (k as f64).powf(GOLDEN.log2());
    let buckets = if s > 0.0 { ((w / s).ceil() as usize).max(1) } else { 1 };
    let bucket_of = |p: Point| -> usize {
        if s <= 0.0 {
            return 0;
        }
        ((cone.offset_of(p - p0).min(w) / s) as usize).min(buckets - 1)
    };
    // leaves of the split-cone tree with their depth, grouped by subcone
    let mut child_count = vec![0u8; instance.n() + 1];
    for &i in &near_ids {
        if let Some(p) = parts.parent[i] {
            if p != root {
                child_count[p] += 1;
            }
        }
    }
    let depth_of = |i: usize, parts: &TreeParts| {
        let mut d = 0;
        let mut v = i;
        while v != root {
            v = parts.parent[v].unwrap();
            d += 1;
        }
        d
    };
    let mut leaf_for: Vec<Option<(usize, usize)>> = vec![None; buckets];
    for &i in &near_ids {
        if child_count[i] == 0 {
            let b = bucket_of(instance.position(i));
            let d = depth_of(i, parts);
            let better = match leaf_for[b] {
                None => true,
                Some((bd, bi)) => d > bd || (d == bd && i < bi),
            };
            if better {
                leaf_for[b] = Some((d, i));
            }
        }
    }
    let mut groups: Vec<Vec<(f64, usize)>> = vec![Vec::new(); buckets];
    for &(key, i, off) in far {
        let b = if s > 0.0 { ((off / s) as usize).min(buckets - 1) } else { 0 };
        groups[b].push((key, i));
    }
    let mut free: Vec<u8> = vec![2; instance.n() + 1];
    for &i in &near_ids {
        free[i] = 2 - child_count[i];
    }
    for (b, mut group) in groups.into_iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let host = match leaf_for[b] {
            Some((_, leaf)) if free[leaf] > 0 => leaf,
            // no split-cone leaf in this subcone: nearest node (by offset) with a free slot
            _ => {
                let mid = (b as f64 + 0.5) * s;
                near_ids
                    .iter()
                    .copied()
                    .filter(|&i| free[i] > 0)
                    .min_by(|&x, &y| {
                        let ox = (cone.offset_of(instance.position(x) - p0) - mid).abs();
                        let oy = (cone.offset_of(instance.position(y) - p0) - mid).abs();
                        ox.total_cmp(&oy).then(x.cmp(&y))
                    })
                    .ok_or_else(|| FtkError::Internal("no free slot in the split-cone tree".into()))?
            }
        };
        free[host] -= 1;
        build_min_heap(&mut group);
        attach_heap(parts, host, &group);
    }
    Ok(())
}

/// Split-cone on the `⌈n/log₂n⌉` closest robots, heap trees on thin subcones for the rest.
pub fn linear_split_strategy(instance: &Instance, cone: &Cone) -> Result<StrategyReport> {
    let started = Instant::now();
    check_in_cone(instance, cone)?;
    let n = instance.n();
    let mut parts = TreeParts::new(instance);
    let members: Vec<usize> = (1..=n).collect();
    linear_split_parts(instance, cone, &mut parts, 0, &members)?;
    let tree = parts.finish(instance.norm())?;
    let bound = instance.radius() * linear_split_bound(n, cone.arc_length());
    Ok(report(tree, bound, started, "linear_split"))
}

/// Default size below which [`general_norm_wakeup`] solves exactly.
pub const DEFAULT_EXACT_THRESHOLD: usize = 9;

/// Cone decomposition of the disk: wake the densest of `⌈√n⌉` equal cones with
/// linear-split, return to `p0`, then wake every other cone in parallel.
pub fn general_norm_wakeup(instance: &Instance) -> Result<StrategyReport> {
    general_norm_wakeup_with(instance, DEFAULT_EXACT_THRESHOLD)
}

pub fn general_norm_wakeup_with(instance: &Instance, exact_below: usize) -> Result<StrategyReport> {
    let started = Instant::now();
    let n = instance.n();
    if n == 0 {
        return Ok(report(WakeupTree::trivial(instance.p0()), 0.0, started, "general"));
    }
    if n < exact_below {
        let sol = optimal_tree(instance, &SolverLimits::default().with_max_n(exact_below))?;
        let bound = sol.optimum;
        return Ok(report(sol.tree, bound, started, "general"));
    }
    let norm = instance.norm();
    let p0 = instance.p0();
    let k = ((n as f64).sqrt().ceil() as usize).max(1);
    let total = norm.circumference();
    let w = total / k as f64;
    let cones: Vec<Cone> = (0..k).map(|i| Cone::from_position(norm, w * i as f64, w)).collect::<Result<_>>()?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 1..=n {
        let u = instance.position(i) - p0;
        let c = if norm.eval(u) == 0.0 { 0 } else { ((norm.arc_position(u) / w) as usize).min(k - 1) };
        members[c].push(i);
    }
    let densest = (0..k).max_by(|&a, &b| members[a].len().cmp(&members[b].len()).then(b.cmp(&a))).unwrap();
    let mut parts = TreeParts::new(instance);
    linear_split_parts(instance, &cones[densest], &mut parts, 0, &members[densest])?;

    // free slots of the first-phase robots, earliest first
    let first_tree_nodes = &members[densest];
    let mut used = vec![0u8; n + 1];
    for &i in first_tree_nodes {
        if let Some(p) = parts.parent[i] {
            used[p] += 1;
        }
    }
    let wake_time = {
        let mut t = vec![0.0; n + 1];
        let mut order: Vec<usize> = first_tree_nodes.clone();
        order.sort_by(|&a, &b| instance.dist(0, a).total_cmp(&instance.dist(0, b)));
        // parents are always closer (non-decreasing tree), so distance order is topological
        for &i in &order {
            let p = parts.parent[i].unwrap();
            t[i] = t[p] + parts.edge_length(norm, i);
        }
        t
    };
    let mut robots: Vec<(f64, usize)> = Vec::new();
    for &i in first_tree_nodes {
        for _ in used[i]..2 {
            robots.push((wake_time[i], i));
        }
    }
    robots.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut robots = robots.into_iter();
    for c in (0..k).filter(|&c| c != densest && !members[c].is_empty()) {
        let (_, host) = robots.next().ok_or_else(|| FtkError::Internal("fewer returning robots than cones".into()))?;
        let mut sub = TreeParts::new(instance);
        linear_split_parts(instance, &cones[c], &mut sub, 0, &members[c])?;
        for &i in &members[c] {
            let p = sub.parent[i].unwrap();
            if p == 0 {
                parts.link_via(host, p0, i);
            } else {
                parts.parent[i] = Some(p);
                parts.via[i] = sub.via[i];
            }
        }
    }
    let tree = parts.finish(norm)?;
    let phase = linear_split_bound(n, w);
    let bound = instance.radius() * (2.0 * phase + 1.0);
    Ok(report(tree, bound, started, "general"))
}

/// Wake the closest robot, return to `p0` with both robots, then split-cone each half disk.
pub fn half_disk_strategy(instance: &Instance) -> Result<StrategyReport> {
    let started = Instant::now();
    let n = instance.n();
    let norm = instance.norm();
    let p0 = instance.p0();
    if n == 0 {
        return Ok(report(WakeupTree::trivial(p0), 0.0, started, "half_disks"));
    }
    let first = (1..=n).min_by(|&a, &b| instance.dist(0, a).total_cmp(&instance.dist(0, b)).then(a.cmp(&b))).unwrap();
    let half = norm.half_circumference();
    let mut parts = TreeParts::new(instance);
    parts.link(0, first);
    let mut halves: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in (1..=n).filter(|&i| i != first) {
        let u = instance.position(i) - p0;
        let h = if norm.eval(u) == 0.0 { 0 } else { usize::from(norm.arc_position(u) >= half) };
        halves[h].push(i);
    }
    for (h, group) in halves.iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let cone = Cone::from_position(norm, half * h as f64, half * (1.0 - 1e-15))?;
        let mut sub = TreeParts::new(instance);
        split_cone_parts(instance, &cone, &mut sub, 0, group, None)?;
        for &i in group {
            let p = sub.parent[i].unwrap();
            if p == 0 {
                parts.link_via(first, p0, i);
            } else {
                parts.parent[i] = Some(p);
                parts.via[i] = sub.via[i];
            }
        }
    }
    let tree = parts.finish(norm)?;
    let bound = instance.radius() * (3.0 + GOLDEN * half);
    Ok(report(tree, bound, started, "half_disks"))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Convex hull boundary (anticlockwise) keeping points on edges; `None` when some
/// point is strictly inside.
fn convex_cycle(points: &[Point]) -> Option<Vec<usize>> {
    let n = points.len();
    let centroid = points.iter().fold(Point::ORIGIN, |s, &p| s + p) * (1.0 / n as f64);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (points[a] - centroid).angle().total_cmp(&(points[b] - centroid).angle()));
    let scale = points.iter().map(|p| (*p - centroid).l2()).fold(0.0, f64::max).max(1e-300);
    for k in 0..n {
        let (a, b, c) = (points[order[k]], points[order[(k + 1) % n]], points[order[(k + 2) % n]]);
        if orient(a, b, c) < -EPS * scale * scale {
            return None;
        }
    }
    Some(order)
}

/// Best racquet tree: wake one hull vertex, then two robots walk the hull in opposite directions.
fn racquet(instance: &Instance, cycle: &[usize]) -> (f64, Vec<(usize, usize)>) {
    let m = cycle.len();
    let mut best = (f64::INFINITY, Vec::new());
    for s in 0..m {
        let v = |k: usize| cycle[(s + k) % m];
        for split in 1..m {
            // one robot walks v1..v_split, the other v_{m-1}..v_{split+1}
            let mut edges = vec![(0, v(0))];
            let mut t1 = instance.dist(0, v(0));
            let mut prev = v(0);
            for k in 1..=split {
                t1 += instance.dist(prev, v(k));
                edges.push((prev, v(k)));
                prev = v(k);
            }
            let mut t2 = instance.dist(0, v(0));
            let mut prev = v(0);
            for k in (split + 1..m).rev() {
                t2 += instance.dist(prev, v(k));
                edges.push((prev, v(k)));
                prev = v(k);
            }
            let value = t1.max(t2);
            if value < best.0 {
                best = (value, edges);
            }
        }
    }
    best
}

/// Four sleepers with makespan at most `(1 + Λ(η))·r`.
pub fn wake_four_general(instance: &Instance) -> Result<StrategyReport> {
    let started = Instant::now();
    if instance.n() != 4 {
        return Err(FtkError::Precondition(format!(
            "wake_four_general needs exactly 4 sleepers, got {}",
            instance.n()
        )));
    }
    let norm = instance.norm();
    let bound = instance.radius() * (1.0 + norm.half_parallelogram_perimeter());
    if is_collinear(instance) {
        let mut r = line_optimal(instance)?;
        r.claimed_bound = bound;
        r.strategy_name = "four_general";
        r.construction_time = started.elapsed();
        return Ok(r);
    }
    let p0 = instance.p0();
    let sleepers: Vec<Point> = (1..=4).map(|i| instance.position(i)).collect();
    let mut candidates: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    let edges_value = |edges: &[(usize, usize)]| -> f64 {
        let mut t = [0.0f64; 5];
        for &(p, c) in edges {
            t[c] = t[p] + instance.dist(p, c);
        }
        t.iter().copied().fold(0.0, f64::max)
    };
    if let Some(cycle) = convex_cycle(&sleepers) {
        // the origin is not needed on the hull: racquet
        let cycle: Vec<usize> = cycle.into_iter().map(|k| k + 1).collect();
        candidates.push(racquet(instance, &cycle));
    } else {
        // one sleeper is inside the triangle of the others, so the origin completes
        // a convex quadrilateral O A B C with the fourth sleeper D left over
        for d in 1..=4 {
            let rest: Vec<usize> = (1..=4).filter(|&x| x != d).collect();
            let pts = [p0, instance.position(rest[0]), instance.position(rest[1]), instance.position(rest[2])];
            let Some(cycle) = convex_cycle(&pts) else { continue };
            let at = cycle.iter().position(|&k| k == 0).unwrap();
            let label = |k: usize| if cycle[(at + k) % 4] == 0 { 0 } else { rest[cycle[(at + k) % 4] - 1] };
            let (a, b, c) = (label(1), label(2), label(3));
            for (a, b, c) in [(a, b, c), (c, b, a)] {
                let (pa, pb, pc) = (instance.position(a) - p0, instance.position(b) - p0, instance.position(c) - p0);
                let abar = -pa;
                let c_extreme = convex_cycle(&[pa, pb, pc, abar]).is_some();
                let edges =
                    if c_extreme { vec![(0, a), (a, d), (a, b), (b, c)] } else { vec![(0, c), (c, d), (c, b), (b, a)] };
                let v = edges_value(&edges);
                candidates.push((v, edges));
            }
        }
    }
    let (_, edges) = candidates
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .ok_or_else(|| FtkError::Internal("no convex quadrilateral among five points".into()))?;
    let mut parts = TreeParts::new(instance);
    for (p, c) in edges {
        parts.link(p, c);
    }
    let tree = parts.finish(norm)?;
    Ok(report(tree, bound, started, "four_general"))
}

/// Analytic bounds on the wake-up ratio of `norm` (of `γ_n` when `n` is given).
pub fn gamma_bounds(norm: &Norm, n: Option<usize>) -> GammaBounds {
    let lambda = norm.half_parallelogram_perimeter();
    let pi = norm.half_circumference();
    let exact_small = |n: usize| match n {
        0 => Some(0.0),
        1 => Some(1.0),
        2 | 3 => Some(3.0),
        4 => Some(1.0 + lambda),
        _ => None,
    };
    let lower = match n.and_then(exact_small) {
        Some(v) => v,
        None => 1.0 + lambda,
    };
    let mut upper = 3.0 + GOLDEN * pi;
    if let NormKind::Lp(p) = norm.kind() {
        let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
        upper = upper.min(5.0 * 2f64.powf(inv.min(1.0 - inv)));
    }
    if let Some(n) = n {
        let k = (1.0 + ((1 + n) as f64).sqrt()).ceil();
        upper = upper.min(3.0 + 4.0 * GOLDEN * pi / k);
        if let Some(v) = exact_small(n) {
            upper = v;
        }
    }
    GammaBounds { lower, upper, norm: norm.clone(), n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wakeup::validate;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn inst(norm: Norm, pts: &[(f64, f64)]) -> Instance {
        Instance::new(norm, Point::ORIGIN, pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn non_decreasing(tree: &WakeupTree, instance: &Instance) -> bool {
        (1..tree.len()).all(|v| {
            let p = tree.parent(v).unwrap();
            instance.dist(0, p) <= instance.dist(0, v) + 1e-9
        })
    }

    #[test]
    fn heap_root_child_is_nearest() {
        let i = inst(Norm::l2(), &[(0.5, 0.0), (0.0, 0.9), (0.2, 0.0)]);
        let r = heap_strategy(&i).unwrap();
        assert_eq!(r.tree.children(0), vec![3]);
        assert!(validate(&r.tree, &i).is_empty());
        assert!(non_decreasing(&r.tree, &i));
        let one = inst(Norm::l1(), &[(0.3, -0.4)]);
        assert!((heap_strategy(&one).unwrap().makespan() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn build_heap_orders_keys() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut v: Vec<(f64, usize)> = (0..1000).map(|i| (rng.gen::<f64>(), i)).collect();
        build_min_heap(&mut v);
        for i in 1..v.len() {
            assert!(!less(&v[i], &v[(i - 1) / 2]));
        }
    }

    #[test]
    fn line_examples() {
        let r = line_optimal(&inst(Norm::l2(), &[(1.0, 0.0), (-1.0, 0.0)])).unwrap();
        assert!((r.makespan() - 3.0).abs() < 1e-12);
        let i = inst(Norm::l1(), &[(0.5, 0.0), (0.9, 0.0), (-0.2, 0.0)]);
        let r = line_optimal(&i).unwrap();
        assert!((r.makespan() - 1.2).abs() < 1e-12, "{}", r.makespan());
        assert!(validate(&r.tree, &i).is_empty());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let pts: Vec<(f64, f64)> = (0..rng.gen_range(1..8)).map(|_| (rng.gen_range(-1.0..1.0), 0.0)).collect();
            let i = inst(Norm::l2(), &pts);
            let exact = optimal_tree(&i, &SolverLimits::default()).unwrap().optimum;
            let r = line_optimal(&i).unwrap();
            assert!(validate(&r.tree, &i).is_empty());
            assert!((r.makespan() - exact).abs() < 1e-9, "{} vs {exact}", r.makespan());
        }
        let r = line_optimal(&inst(Norm::l2(), &[(0.4, 0.0)])).unwrap();
        assert!((r.makespan() - 0.4).abs() < 1e-12);
        assert!(line_optimal(&inst(Norm::l2(), &[(0.4, 0.0), (0.0, 1.0)])).is_err());
    }

    #[test]
    fn split_cone_degenerate_ray_and_single() {
        let norm = Norm::l2();
        let ray = Cone::new(&norm, Point::new(1.0, 0.0), 0.0).unwrap();
        let i = inst(norm.clone(), &[(0.2, 0.0), (0.9, 0.0), (0.5, 0.0)]);
        let r = split_cone_strategy(&i, &ray).unwrap();
        assert!((r.makespan() - 0.9).abs() < 1e-12);
        let quarter = Cone::new(&norm, Point::new(1.0, 0.0), PI / 2.0).unwrap();
        let one = inst(norm.clone(), &[(0.3, 0.3)]);
        let r = split_cone_strategy(&one, &quarter).unwrap();
        assert!((r.makespan() - 0.3 * 2f64.sqrt()).abs() < 1e-12);
        let outside = inst(norm, &[(-0.3, 0.3)]);
        assert!(split_cone_strategy(&outside, &quarter).is_err());
    }

    #[test]
    fn split_cone_quarter_disk_bound_and_arc_recursion() {
        let norm = Norm::l2();
        let quarter = Cone::new(&norm, Point::new(1.0, 0.0), PI / 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let pts: Vec<(f64, f64)> = (0..64)
                .map(|_| {
                    let a = rng.gen_range(0.0..PI / 2.0);
                    let r = rng.gen::<f64>().sqrt();
                    (r * a.cos(), r * a.sin())
                })
                .collect();
            let i = inst(norm.clone(), &pts);
            let (r, trace) = split_cone_traced(&i, &quarter).unwrap();
            assert!(validate(&r.tree, &i).is_empty());
            assert!(r.makespan() <= 1.0 + GOLDEN * PI / 2.0 + 1e-6);
            assert!(non_decreasing(&r.tree, &i));
            // arc charge along every branch stays below φ·w
            for v in 1..r.tree.len() {
                let mut charge = 0.0;
                let mut u = v;
                while let Some(p) = r.tree.parent(u) {
                    if p == 0 {
                        break;
                    }
                    let (plo, phi) = trace.cone_of[p].unwrap();
                    let (clo, chi) = trace.cone_of[u].unwrap();
                    let contained_in_parent_part = (chi - clo) > (1.0 / GOLDEN) * (phi - plo) - 1e-12;
                    charge += if contained_in_parent_part { chi - clo } else { phi - plo };
                    u = p;
                }
                assert!(charge < GOLDEN * PI / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn linear_split_small_and_bound() {
        let norm = Norm::l2();
        let cone = Cone::new(&norm, Point::new(1.0, 0.0), PI / 4.0).unwrap();
        let two = inst(norm.clone(), &[(0.5, 0.1), (0.2, 0.05)]);
        let r = linear_split_strategy(&two, &cone).unwrap();
        assert!(validate(&r.tree, &two).is_empty());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<(f64, f64)> = (0..10_000)
            .map(|_| {
                let a = rng.gen_range(0.0..PI / 4.0);
                let r = rng.gen::<f64>().sqrt();
                (r * a.cos(), r * a.sin())
            })
            .collect();
        let i = inst(norm, &pts);
        let r = linear_split_strategy(&i, &cone).unwrap();
        assert!(validate(&r.tree, &i).is_empty());
        assert!(non_decreasing(&r.tree, &i));
        let explicit = 1.0
            + GOLDEN * PI / 4.0
            + 4.0 * (PI / 4.0) * 13.0 / (10_000f64 / 10_000f64.log2()).ceil().powf(GOLDEN.log2());
        assert!(r.makespan() <= explicit * i.radius() + 1e-6, "{} > {explicit}", r.makespan());
        assert!(r.makespan() <= r.claimed_bound + 1e-6);
    }

    #[test]
    fn general_small_branch_is_exact() {
        let s = 0.5f64.sqrt();
        let i = inst(Norm::l2(), &[(s, s), (-s, s), (-s, -s), (s, -s)]);
        let r = general_norm_wakeup(&i).unwrap();
        assert!((r.makespan() - (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-9);
        assert_eq!(general_norm_wakeup(&inst(Norm::l2(), &[])).unwrap().makespan(), 0.0);
    }

    #[test]
    fn general_large_branch_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for norm in [Norm::l1(), Norm::l2(), Norm::regular_hexagon()] {
            let pts: Vec<Point> = (0..2000)
                .map(|_| {
                    let p = norm.point_at_arc(rng.gen_range(0.0..norm.circumference()));
                    p * rng.gen::<f64>().sqrt()
                })
                .collect();
            let i = Instance::new(norm.clone(), Point::ORIGIN, pts).unwrap();
            let r = general_norm_wakeup(&i).unwrap();
            assert!(validate(&r.tree, &i).is_empty(), "{:?}", validate(&r.tree, &i));
            assert!(r.makespan() <= r.claimed_bound + 1e-6);
            let h = half_disk_strategy(&i).unwrap();
            assert!(validate(&h.tree, &i).is_empty());
            assert!(h.makespan() <= h.claimed_bound + 1e-6);
        }
    }

    #[test]
    fn four_general_examples() {
        let cross = inst(Norm::l1(), &[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]);
        let r = wake_four_general(&cross).unwrap();
        assert!((r.makespan() - 5.0).abs() < 1e-9);
        let s = 0.5f64.sqrt();
        let sq = inst(Norm::l2(), &[(s, s), (-s, s), (-s, -s), (s, -s)]);
        let r = wake_four_general(&sq).unwrap();
        assert!(r.makespan() <= 1.0 + 2.0 * 2f64.sqrt() + 1e-9);
        let cluster = inst(Norm::l2(), &[(0.1, 0.1), (0.11, 0.1), (0.1, 0.12), (0.09, 0.1)]);
        let r = wake_four_general(&cluster).unwrap();
        assert!(validate(&r.tree, &cluster).is_empty());
        assert!(r.makespan() < 0.5);
        assert!(wake_four_general(&inst(Norm::l2(), &[(0.1, 0.1)])).is_err());
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_bounds(&Norm::l1(), None);
        assert!((g.lower - 5.0).abs() < 1e-12 && (g.upper - 5.0).abs() < 1e-12);
        let g = gamma_bounds(&Norm::l2(), None);
        assert!((g.lower - 3.828427).abs() < 1e-6);
        assert!((g.upper - 7.071068).abs() < 1e-6);
        assert_eq!(gamma_bounds(&Norm::l2(), Some(0)).upper, 0.0);
        assert_eq!(gamma_bounds(&Norm::l2(), Some(3)).lower, 3.0);
        assert!(gamma_bounds(&Norm::l2(), Some(529)).upper < 1.0 + 2.0 * 2f64.sqrt());
    }

    #[test]
    fn general_stays_below_the_cone_decomposition_gamma_bound() {
        use crate::harness::gen::{generate, GenKind};
        let mut checked = 0;
        for norm in [Norm::l1(), Norm::l2(), Norm::linf(), Norm::regular_hexagon()] {
            let pi = norm.half_circumference();
            for n in [150usize, 400, 1500] {
                let k = (1.0 + ((1 + n) as f64).sqrt()).ceil();
                let cone_bound = 3.0 + 4.0 * GOLDEN * pi / k;
                let g = gamma_bounds(&norm, Some(n));
                // only where this term is the active upper bound
                if cone_bound > g.upper + 1e-12 {
                    continue;
                }
                for seed in 0..4 {
                    let inst = generate(GenKind::RandomDisk(n), &norm, seed).unwrap();
                    let r = general_norm_wakeup(&inst).unwrap();
                    assert!(r.makespan() <= g.upper * inst.radius() + 1e-6, "{} n={n}", norm.label());
                    checked += 1;
                }
            }
        }
        assert!(checked >= 40);
    }
}
