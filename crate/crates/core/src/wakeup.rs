//! Instances, wake-up trees, schedules and their validation.
//!
//! Node `0` of a tree is the initially awake robot; node `i ≥ 1` is the i-th
//! sleeper of the instance. Each non-root edge stores the polyline travelled
//! by the waking robot, so strategies may route through waypoints while the
//! tree stays node-minimal.

use std::sync::OnceLock;

use crate::error::{FtkError, Result};
use crate::norm::{Norm, EPS};
use crate::point::Point;

/// Validation tolerance; `FTK_EPS` overrides the default of `1e-9`.
pub fn validation_eps() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| {
        std::env::var("FTK_EPS")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|e| e.is_finite() && *e > 0.0)
            .unwrap_or(EPS)
    })
}

/// One awake robot at `p0` and a multiset of sleeping robots.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    norm: Norm,
    p0: Point,
    sleepers: Vec<Point>,
    radius: f64,
}

impl Instance {
    pub fn new(norm: Norm, p0: Point, sleepers: Vec<Point>) -> Result<Self> {
        if !p0.is_finite() || sleepers.iter().any(|p| !p.is_finite()) {
            return Err(FtkError::InvalidInput("non-finite robot position".into()));
        }
        let radius = sleepers.iter().map(|&p| norm.distance(p0, p)).fold(0.0, f64::max);
        Ok(Instance { norm, p0, sleepers, radius })
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn p0(&self) -> Point {
        self.p0
    }

    pub fn sleepers(&self) -> &[Point] {
        &self.sleepers
    }

    /// Number of sleeping robots.
    pub fn n(&self) -> usize {
        self.sleepers.len()
    }

    /// `max_i dist(p0, p_i)`, zero when there are no sleepers.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Position of node `i` (0 is the awake robot).
    pub fn position(&self, i: usize) -> Point {
        if i == 0 {
            self.p0
        } else {
            self.sleepers[i - 1]
        }
    }

    pub fn positions(&self) -> Vec<Point> {
        std::iter::once(self.p0).chain(self.sleepers.iter().copied()).collect()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.norm.distance(self.position(i), self.position(j))
    }

    /// Same instance with every position mapped by `p ↦ (p − p0)·s`.
    pub fn normalized(&self, s: f64) -> Instance {
        let map = |p: Point| (p - self.p0) * s;
        Instance {
            norm: self.norm.clone(),
            p0: Point::ORIGIN,
            sleepers: self.sleepers.iter().map(|&p| map(p)).collect(),
            radius: self.radius * s,
        }
    }
}

/// Rooted wake-up tree over robot indices with polyline edges.
#[derive(Clone, Debug, PartialEq)]
pub struct WakeupTree {
    positions: Vec<Point>,
    parent: Vec<Option<usize>>,
    // edge polyline of v is path_pts[path_start[v]..path_start[v + 1]]
    path_start: Vec<usize>,
    path_pts: Vec<Point>,
    wake_time: Vec<f64>,
}

impl WakeupTree {
    /// Tree with no sleepers.
    pub fn trivial(p0: Point) -> Self {
        WakeupTree {
            positions: vec![p0],
            parent: vec![None],
            path_start: vec![0, 0],
            path_pts: Vec::new(),
            wake_time: vec![0.0],
        }
    }

    /// Builds a tree from parent links and edge polylines; wake times are derived.
    /// `paths[0]` is ignored. Fails if the parent links do not form a tree rooted at 0.
    pub fn from_parts(
        positions: Vec<Point>,
        parent: Vec<Option<usize>>,
        mut paths: Vec<Vec<Point>>,
        norm: &Norm,
    ) -> Result<Self> {
        if let Some(p) = paths.first_mut() {
            p.clear();
        }
        let mut path_start = Vec::with_capacity(paths.len() + 1);
        path_start.push(0);
        let mut path_pts = Vec::with_capacity(paths.iter().map(Vec::len).sum());
        for p in &paths {
            path_pts.extend_from_slice(p);
            path_start.push(path_pts.len());
        }
        Self::from_flat(positions, parent, path_start, path_pts, norm)
    }

    /// Like [`WakeupTree::from_parts`], with the polyline of `v` stored as
    /// `path_pts[path_start[v]..path_start[v + 1]]`; the root's range must be empty.
    pub fn from_flat(
        positions: Vec<Point>,
        parent: Vec<Option<usize>>,
        path_start: Vec<usize>,
        path_pts: Vec<Point>,
        norm: &Norm,
    ) -> Result<Self> {
        let n = positions.len();
        if parent.len() != n || path_start.len() != n + 1 || n == 0 {
            return Err(FtkError::InvalidInput("tree arrays have mismatched lengths".into()));
        }
        if path_start[0] != path_start[1]
            || path_start.windows(2).any(|w| w[0] > w[1])
            || path_start[n] != path_pts.len()
        {
            return Err(FtkError::InvalidInput("malformed path offsets".into()));
        }
        if parent[0].is_some() {
            return Err(FtkError::Validation(vec!["root has a parent".into()]));
        }
        let len = |v: usize| norm.path_length(&path_pts[path_start[v]..path_start[v + 1]]);
        let wake_time = wake_times_of(&parent, len)
            .ok_or_else(|| FtkError::Validation(vec!["parent links do not form a tree rooted at 0".into()]))?;
        Ok(WakeupTree { positions, parent, path_start, path_pts, wake_time })
    }

    /// Tree with straight edges.
    pub fn from_parents(positions: Vec<Point>, parent: Vec<Option<usize>>, norm: &Norm) -> Result<Self> {
        let paths = parent
            .iter()
            .enumerate()
            .map(|(v, p)| match p {
                Some(p) if *p < positions.len() => vec![positions[*p], positions[v]],
                _ => Vec::new(),
            })
            .collect();
        Self::from_parts(positions, parent, paths, norm)
    }

    /// Number of nodes including the root.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.len() <= 1
    }

    pub fn position(&self, v: usize) -> Point {
        self.positions[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn path(&self, v: usize) -> &[Point] {
        &self.path_pts[self.path_start[v]..self.path_start[v + 1]]
    }

    pub fn wake_time(&self, v: usize) -> f64 {
        self.wake_time[v]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parent[c] == Some(v)).collect()
    }

    /// Children lists of every node, in increasing index order.
    pub fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                out[p].push(v);
            }
        }
        out
    }

    /// Largest wake time.
    pub fn makespan(&self) -> f64 {
        self.wake_time.iter().copied().fold(0.0, f64::max)
    }

    /// Number of edges on the path from the root to `v`.
    pub fn depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[v] {
            v = p;
            d += 1;
        }
        d
    }

    /// Checks the structural invariants that do not refer to an instance.
    pub fn structural_violations(&self, norm: &Norm) -> Vec<String> {
        let eps = validation_eps();
        let n = self.len();
        let mut out = Vec::new();
        if self.parent[0].is_some() {
            out.push("root has a parent".to_string());
        }
        let mut degree = vec![0usize; n];
        for v in 1..n {
            match self.parent[v] {
                None => out.push(format!("node {v} has no parent")),
                Some(p) if p >= n => out.push(format!("node {v} has out-of-range parent {p}")),
                Some(p) => degree[p] += 1,
            }
        }
        if topological_order(&self.parent).is_none() {
            out.push("parent links contain a cycle or unreachable node".to_string());
        }
        if n > 1 && degree[0] != 1 {
            out.push(format!("root out-degree is {} (must be 1)", degree[0]));
        }
        for (v, &d) in degree.iter().enumerate().skip(1) {
            if d > 2 {
                out.push(format!("node {v} out-degree is {d} (at most 2)"));
            }
        }
        let scale = 1.0 + self.makespan().abs();
        for v in 1..n {
            let Some(p) = self.parent[v].filter(|&p| p < n) else { continue };
            let path = self.path(v);
            if path.len() < 2 {
                out.push(format!("edge {p}->{v} has fewer than two path points"));
                continue;
            }
            if !path[0].approx_eq(self.positions[p], eps * scale) {
                out.push(format!("edge {p}->{v} path does not start at the parent"));
            }
            if !path[path.len() - 1].approx_eq(self.positions[v], eps * scale) {
                out.push(format!("edge {p}->{v} path does not end at the child"));
            }
            let len = norm.path_length(path);
            let direct = norm.distance(self.positions[p], self.positions[v]);
            if len < direct - eps * scale {
                out.push(format!("sub-metric edge {p}->{v}: length {len} < distance {direct}"));
            }
            let expected = self.wake_time[p] + len;
            if (self.wake_time[v] - expected).abs() > eps * scale {
                out.push(format!(
                    "wake time of node {v} is {} but parent time plus edge length is {expected}",
                    self.wake_time[v]
                ));
            }
        }
        if self.wake_time[0] != 0.0 {
            out.push("root wake time is not zero".to_string());
        }
        out
    }
}

/// Wake time of every node, resolving ancestors on demand in index order;
/// `None` if some node does not descend from 0.
fn wake_times_of(parent: &[Option<usize>], edge_len: impl Fn(usize) -> f64) -> Option<Vec<f64>> {
    let n = parent.len();
    let mut time = vec![f64::NAN; n];
    // 0 = pending, 1 = on the current chain, 2 = done
    let mut state = vec![0u8; n];
    time[0] = 0.0;
    state[0] = 2;
    let mut chain = Vec::new();
    for v in 0..n {
        let mut u = v;
        while state[u] == 0 {
            state[u] = 1;
            chain.push(u);
            u = match parent[u] {
                Some(p) if p < n => p,
                _ => return None,
            };
        }
        if state[u] == 1 {
            return None;
        }
        while let Some(w) = chain.pop() {
            time[w] = time[parent[w].unwrap()] + edge_len(w);
            state[w] = 2;
        }
    }
    Some(time)
}

/// BFS order from the root, or `None` if some node is unreachable.
fn topological_order(parent: &[Option<usize>]) -> Option<Vec<usize>> {
    let n = parent.len();
    // children in compressed rows: start[p]..start[p + 1]
    let mut start = vec![0usize; n + 1];
    for p in parent.iter().flatten() {
        if *p >= n {
            return None;
        }
        start[p + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut kids = vec![0usize; start[n]];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            kids[fill[p]] = v;
            fill[p] += 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    order.push(0);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        order.extend_from_slice(&kids[start[v]..start[v + 1]]);
        if order.len() > n {
            return None;
        }
    }
    (order.len() == n).then_some(order)
}

/// Makespan of a structurally valid tree.
pub fn makespan(tree: &WakeupTree, norm: &Norm) -> Result<f64> {
    let v = tree.structural_violations(norm);
    if v.is_empty() {
        Ok(tree.makespan())
    } else {
        Err(FtkError::Validation(v))
    }
}

/// Every violated invariant of `tree` with respect to `instance`; empty means valid.
pub fn validate(tree: &WakeupTree, instance: &Instance) -> Vec<String> {
    let eps = validation_eps();
    if tree.len() != instance.n() + 1 {
        return vec![format!("tree has {} nodes but the instance has {} robots", tree.len(), instance.n() + 1)];
    }
    let mut out = tree.structural_violations(instance.norm());
    let scale = 1.0 + instance.radius();
    for v in 0..tree.len() {
        if !tree.position(v).approx_eq(instance.position(v), eps * scale) {
            out.push(format!("node {v} is at {} but robot {v} is at {}", tree.position(v), instance.position(v)));
        }
    }
    out
}

/// `Ok` when `tree` is valid for `instance`, otherwise the list of violations.
pub fn check(tree: &WakeupTree, instance: &Instance) -> Result<()> {
    let v = validate(tree, instance);
    if v.is_empty() {
        Ok(())
    } else {
        Err(FtkError::Validation(v))
    }
}

/// `max(r, min_u [dist(p0,u) + max_{v≠u} dist(u,v)])`; the second term applies for `n ≥ 2`.
pub fn trivial_lower_bound(instance: &Instance) -> f64 {
    let n = instance.n();
    if n == 0 {
        return 0.0;
    }
    let mut bound = instance.radius();
    if n >= 2 {
        let first_edge = (1..=n)
            .map(|u| {
                let far = (1..=n).filter(|&v| v != u).map(|v| instance.dist(u, v)).fold(0.0, f64::max);
                instance.dist(0, u) + far
            })
            .fold(f64::INFINITY, f64::min);
        bound = bound.max(first_edge);
    }
    bound
}

/// One movement of a robot: leaves at `departure`, follows `path`, and wakes
/// `target` on arrival if set.
#[derive(Clone, Debug, PartialEq)]
pub struct Leg {
    pub departure: f64,
    pub path: Vec<Point>,
    pub target: Option<usize>,
}

/// Movements of one robot, identified by the node at which it was woken.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotRoute {
    pub robot: usize,
    pub legs: Vec<Leg>,
}

/// Execution trace: what every robot does and when.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    positions: Vec<Point>,
    routes: Vec<RobotRoute>,
    awake: usize,
}

impl Schedule {
    pub fn routes(&self) -> &[RobotRoute] {
        &self.routes
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Wake times per node, `None` for nodes never woken.
    pub fn wake_times(&self, norm: &Norm) -> Vec<Option<f64>> {
        let mut t = vec![None; self.positions.len()];
        for x in t.iter_mut().take(self.awake) {
            *x = Some(0.0);
        }
        for r in &self.routes {
            for leg in &r.legs {
                if let Some(x) = leg.target {
                    t[x] = Some(leg.departure + norm.path_length(&leg.path));
                }
            }
        }
        t
    }

    /// Largest wake time.
    pub fn makespan(&self, norm: &Norm) -> f64 {
        self.wake_times(norm).into_iter().flatten().fold(0.0, f64::max)
    }

    /// Time at which the last robot stops moving.
    pub fn completion_time(&self, norm: &Norm) -> f64 {
        self.routes
            .iter()
            .flat_map(|r| r.legs.iter())
            .map(|l| l.departure + norm.path_length(&l.path))
            .fold(0.0, f64::max)
    }

    /// Final position of every robot that was woken (and of the initial robot).
    pub fn final_positions(&self) -> Vec<(usize, Point)> {
        self.routes
            .iter()
            .map(|r| {
                let p = r.legs.last().and_then(|l| l.path.last().copied()).unwrap_or(self.positions[r.robot]);
                (r.robot, p)
            })
            .collect()
    }

    /// Timing and coincidence violations of the trace.
    pub fn violations(&self, norm: &Norm) -> Vec<String> {
        let eps = validation_eps();
        let times = self.wake_times(norm);
        let scale = 1.0 + self.completion_time(norm);
        let mut out = Vec::new();
        let mut woken_by = vec![0usize; self.positions.len()];
        for r in &self.routes {
            let Some(start) = times[r.robot] else {
                out.push(format!("robot {} moves but is never woken", r.robot));
                continue;
            };
            let mut clock = start;
            let mut at = self.positions[r.robot];
            for leg in &r.legs {
                if leg.departure < clock - eps * scale {
                    out.push(format!("robot {} departs at {} before {clock}", r.robot, leg.departure));
                }
                if leg.path.first().is_none_or(|p| !p.approx_eq(at, eps * scale)) {
                    out.push(format!("robot {} leg does not start where the robot is", r.robot));
                }
                clock = leg.departure + norm.path_length(&leg.path);
                at = leg.path.last().copied().unwrap_or(at);
                if let Some(x) = leg.target {
                    woken_by[x] += 1;
                    if !at.approx_eq(self.positions[x], eps * scale) {
                        out.push(format!("robot {} wakes {x} from a distance", r.robot));
                    }
                }
            }
        }
        for (x, &k) in woken_by.iter().enumerate().skip(self.awake) {
            if k > 1 {
                out.push(format!("robot {x} is woken {k} times"));
            }
        }
        out
    }

    /// Tree view of the trace (tails without targets are dropped).
    pub fn to_tree(&self, norm: &Norm) -> Result<WakeupTree> {
        let n = self.positions.len();
        let mut parent = vec![None; n];
        let mut paths = vec![Vec::new(); n];
        for r in &self.routes {
            let mut node = r.robot;
            let mut acc: Vec<Point> = vec![self.positions[node]];
            for leg in &r.legs {
                acc.extend(leg.path.iter().skip(1).copied());
                if let Some(x) = leg.target {
                    parent[x] = Some(node);
                    paths[x] = std::mem::replace(&mut acc, vec![self.positions[x]]);
                    node = x;
                }
            }
        }
        WakeupTree::from_parts(self.positions.clone(), parent, paths, norm)
    }

    /// Trace of a tree: at each node the arriving robot takes the first child
    /// and the newly woken robot takes the second.
    pub fn from_tree(tree: &WakeupTree) -> Schedule {
        let children = tree.children_lists();
        let mut routes: Vec<RobotRoute> = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        let mut route_of = std::collections::HashMap::new();
        routes.push(RobotRoute { robot: 0, legs: Vec::new() });
        route_of.insert(0usize, 0usize);
        while let Some((node, robot)) = stack.pop() {
            let kids = &children[node];
            let owners: Vec<usize> = if node == 0 { vec![0] } else { vec![robot, node] };
            for (k, &c) in kids.iter().enumerate() {
                let owner = owners[k.min(owners.len() - 1)];
                let ri = *route_of.entry(owner).or_insert_with(|| {
                    routes.push(RobotRoute { robot: owner, legs: Vec::new() });
                    routes.len() - 1
                });
                routes[ri].legs.push(Leg {
                    departure: tree.wake_time(node),
                    path: tree.path(c).to_vec(),
                    target: Some(c),
                });
                stack.push((c, owner));
            }
            if node != 0 && !route_of.contains_key(&node) {
                routes.push(RobotRoute { robot: node, legs: Vec::new() });
                route_of.insert(node, routes.len() - 1);
            }
        }
        routes.sort_by_key(|r| r.robot);
        Schedule { positions: (0..tree.len()).map(|v| tree.position(v)).collect(), routes, awake: 1 }
    }
}

/// A robot available to a strategy under construction: the node it last
/// occupied, the route travelled since, and the current clock.
#[derive(Clone, Debug)]
pub struct Agent {
    robot: usize,
    path: Vec<Point>,
    departure: f64,
    time: f64,
}

impl Agent {
    pub fn position(&self) -> Point {
        *self.path.last().unwrap()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn robot(&self) -> usize {
        self.robot
    }
}

/// Incremental construction of a schedule by moving agents and waking robots.
pub struct ScheduleBuilder {
    norm: Norm,
    positions: Vec<Point>,
    woken: Vec<bool>,
    routes: Vec<RobotRoute>,
    awake: usize,
}

impl ScheduleBuilder {
    /// `positions[0]` is the awake robot.
    pub fn new(norm: &Norm, positions: Vec<Point>) -> Self {
        Self::with_awake(norm, positions, 1)
    }

    /// The first `awake` positions hold robots awake at time 0.
    pub fn with_awake(norm: &Norm, positions: Vec<Point>, awake: usize) -> Self {
        let n = positions.len();
        let woken = (0..n).map(|i| i < awake).collect();
        ScheduleBuilder {
            norm: norm.clone(),
            positions,
            woken,
            routes: (0..n).map(|r| RobotRoute { robot: r, legs: Vec::new() }).collect(),
            awake,
        }
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn position(&self, i: usize) -> Point {
        self.positions[i]
    }

    pub fn is_woken(&self, i: usize) -> bool {
        self.woken[i]
    }

    /// The awake robot at time 0.
    pub fn root_agent(&self) -> Agent {
        self.initial_agent(0)
    }

    /// Robot `i < awake` at time 0.
    pub fn initial_agent(&self, i: usize) -> Agent {
        assert!(i < self.awake, "robot {i} is not initially awake");
        Agent { robot: i, path: vec![self.positions[i]], departure: 0.0, time: 0.0 }
    }

    /// Moves the agent to `p` along a straight segment.
    pub fn move_to(&self, agent: &mut Agent, p: Point) {
        let here = agent.position();
        if here != p {
            agent.time += self.norm.distance(here, p);
            agent.path.push(p);
        }
    }

    /// Moves the agent to sleeper `target` and wakes it; returns the two robots now there.
    pub fn wake(&mut self, mut agent: Agent, target: usize) -> Result<(Agent, Agent)> {
        if self.woken[target] {
            return Err(FtkError::Internal(format!("robot {target} woken twice")));
        }
        let p = self.positions[target];
        self.move_to(&mut agent, p);
        if agent.path.len() == 1 {
            agent.path.push(p);
        }
        self.woken[target] = true;
        self.routes[agent.robot].legs.push(Leg {
            departure: agent.departure,
            path: std::mem::take(&mut agent.path),
            target: Some(target),
        });
        let t = agent.time;
        let fresh = |robot| Agent { robot, path: vec![p], departure: t, time: t };
        Ok((fresh(agent.robot), fresh(target)))
    }

    /// Records the agent's pending movement as a final leg.
    pub fn park(&mut self, agent: Agent) {
        if agent.path.len() > 1 {
            self.routes[agent.robot].legs.push(Leg { departure: agent.departure, path: agent.path, target: None });
        }
    }

    pub fn all_woken(&self) -> bool {
        self.woken.iter().all(|&w| w)
    }

    pub fn finish(self) -> Schedule {
        Schedule {
            positions: self.positions,
            routes: self.routes.into_iter().filter(|r| !r.legs.is_empty() || r.robot < self.awake).collect(),
            awake: self.awake,
        }
    }
}
