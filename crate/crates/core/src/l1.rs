//! Wake-up trees of makespan at most `5r` in the ℓ1 plane.
//!
//! The unit ℓ1 disk is cut into four squares (East, North, West, South), each
//! of diameter 1 with the origin at a corner, and each square into two
//! isosceles right triangles.  Depending on how many sleepers the densest
//! square holds, a team is recruited there and then sent to the other regions.
//!
//! Every region is handled in a canonical local frame: squares with the start
//! at the left corner `(0,0)` and opposite corner `(1,0)`, triangles with
//! hypotenuse corners `B = (0,0)`, `C = (1,0)` and apex `A = (1/2,1/2)`.  The
//! frame maps local points to the world by an axis-preserving similarity.

use crate::error::{FtkError, Result};
use crate::norm::Norm;
use crate::point::Point;
use crate::wakeup::{Agent, Instance, Schedule, ScheduleBuilder, WakeupTree};

/// Slack for comparisons in local (unit-diameter) coordinates.
const TOL: f64 = 1e-9;

const A: Point = Point { x: 0.5, y: 0.5 };
const B: Point = Point { x: 0.0, y: 0.0 };
const C: Point = Point { x: 1.0, y: 0.0 };
const D: Point = Point { x: 0.5, y: 0.0 };
const E: Point = Point { x: 0.75, y: 0.25 };
const F: Point = Point { x: 0.25, y: 0.25 };

/// Similarity `local ↦ origin + scale·(x·u + y·v)` with `u`, `v` signed unit axis vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    origin: Point,
    scale: f64,
    u: Point,
    v: Point,
}

fn axis(p: Point) -> Point {
    Point::new(p.x.round(), p.y.round())
}

impl Frame {
    pub fn new(origin: Point, scale: f64, u: Point, v: Point) -> Self {
        Frame { origin, scale, u: axis(u), v: axis(v) }
    }

    /// The `k`-th element (`k < 8`) of the symmetry group of the square, as a frame at `origin`.
    pub fn dihedral(origin: Point, scale: f64, k: usize) -> Self {
        let rot = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k % 4];
        let u = Point::new(rot.0, rot.1);
        let v = if k < 4 { Point::new(-rot.1, rot.0) } else { Point::new(rot.1, -rot.0) };
        Frame::new(origin, scale, u, v)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn to_world(&self, p: Point) -> Point {
        self.origin + (self.u * p.x + self.v * p.y) * self.scale
    }

    pub fn to_local(&self, w: Point) -> Point {
        let d = w - self.origin;
        Point::new(d.dot(self.u), d.dot(self.v)) * (1.0 / self.scale)
    }

    fn dir(&self, p: Point) -> Point {
        self.u * p.x + self.v * p.y
    }

    /// Frame of the sub-triangle with hypotenuse corners `b`, `c` and apex `a` (local points).
    pub fn triangle(&self, b: Point, c: Point, a: Point) -> Frame {
        let h = c - b;
        let len = h.l1();
        if len <= 0.0 {
            return Frame { origin: self.to_world(b), scale: 0.0, u: self.u, v: self.v };
        }
        let u = axis(h * (1.0 / len));
        let v = axis(((a - b) * 2.0 - h) * (1.0 / len));
        Frame { origin: self.to_world(b), scale: self.scale * len, u: axis(self.dir(u)), v: axis(self.dir(v)) }
    }

    /// Mirror image `(x, y) ↦ (x, −y)` in local coordinates.
    fn flip_y(&self) -> Frame {
        Frame { v: self.v * -1.0, ..*self }
    }
}

/// True when every step of `path` moves in one closed quadrant direction.
pub fn is_monotone(path: &[Point]) -> bool {
    let (mut sx, mut sy) = (0i8, 0i8);
    for w in path.windows(2) {
        let d = w[1] - w[0];
        for (delta, s) in [(d.x, &mut sx), (d.y, &mut sy)] {
            let t = if delta > TOL {
                1
            } else if delta < -TOL {
                -1
            } else {
                0
            };
            if t != 0 {
                if *s == -t {
                    return false;
                }
                *s = t;
            }
        }
    }
    true
}

/// Fewest monotone pieces `path` splits into.
pub fn monotone_pieces(path: &[Point]) -> usize {
    if path.len() < 2 {
        return 0;
    }
    let mut pieces = 1;
    let mut start = 0;
    for end in 2..path.len() {
        if !is_monotone(&path[start..=end]) {
            pieces += 1;
            start = end - 1;
        }
    }
    pieces
}

fn by_x(pts: &[(usize, Point)]) -> Vec<(usize, Point)> {
    let mut v = pts.to_vec();
    v.sort_by(|a, b| a.1.x.total_cmp(&b.1.x).then(a.1.y.total_cmp(&b.1.y)).then(a.0.cmp(&b.0)));
    v
}

/// Indices `(i, j, k)` such that `points[i] → points[j] → points[k]` is monotone.
pub fn monotone_triple(points: &[Point]) -> Result<(usize, usize, usize)> {
    if points.len() < 5 {
        return Err(FtkError::Precondition(format!("a monotone triple needs at least 5 points, got {}", points.len())));
    }
    let sorted = by_x(&points.iter().copied().enumerate().collect::<Vec<_>>());
    let m = sorted.len();
    // prefix argmin / argmax of y, suffix argmax / argmin of y
    let mut pre_min = vec![0; m];
    let mut pre_max = vec![0; m];
    for t in 1..m {
        pre_min[t] = if sorted[t].1.y < sorted[pre_min[t - 1]].1.y { t } else { pre_min[t - 1] };
        pre_max[t] = if sorted[t].1.y > sorted[pre_max[t - 1]].1.y { t } else { pre_max[t - 1] };
    }
    for j in 1..m - 1 {
        let yj = sorted[j].1.y;
        let (lo, hi) = (pre_min[j - 1], pre_max[j - 1]);
        if sorted[lo].1.y <= yj + TOL {
            if let Some(k) = (j + 1..m).find(|&k| sorted[k].1.y >= yj - TOL) {
                return Ok((sorted[lo].0, sorted[j].0, sorted[k].0));
            }
        }
        if sorted[hi].1.y >= yj - TOL {
            if let Some(k) = (j + 1..m).find(|&k| sorted[k].1.y <= yj + TOL) {
                return Ok((sorted[hi].0, sorted[j].0, sorted[k].0));
            }
        }
    }
    Err(FtkError::Internal("no monotone triple among five or more points".into()))
}

/// Axis-parallel square of ℓ1 diameter `diagonal`, given by its leftmost corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareRegion {
    pub corner_left: Point,
    pub diagonal: f64,
}

impl SquareRegion {
    pub fn new(corner_left: Point, diagonal: f64) -> Result<Self> {
        if !(diagonal > 0.0 && diagonal.is_finite() && corner_left.is_finite()) {
            return Err(FtkError::InvalidInput(format!("square diagonal must be positive, got {diagonal}")));
        }
        Ok(SquareRegion { corner_left, diagonal })
    }

    /// Left, top, right and bottom corners.
    pub fn corners(&self) -> [Point; 4] {
        let (p, h) = (self.corner_left, self.diagonal / 2.0);
        [p, p + Point::new(h, h), p + Point::new(2.0 * h, 0.0), p + Point::new(h, -h)]
    }

    pub fn contains(&self, p: Point) -> bool {
        let q = (p - self.corner_left) * (1.0 / self.diagonal);
        q.y.abs() <= q.x + TOL && q.y.abs() <= 1.0 - q.x + TOL
    }

    /// Frame in which `corner` is the local origin and the square is canonical.
    fn frame_at(&self, corner: Point) -> Result<Frame> {
        let tol = TOL * self.diagonal.max(1.0);
        let k = self
            .corners()
            .iter()
            .position(|c| c.approx_eq(corner, tol))
            .ok_or_else(|| FtkError::Precondition(format!("start {corner} is not a corner of the square")))?;
        Ok(Frame::dihedral(self.corners()[k], self.diagonal, [0, 3, 2, 1][k]))
    }
}

/// Isosceles right triangle with axis-parallel hypotenuse `[b c]` and apex `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleRegion {
    pub b: Point,
    pub c: Point,
    pub a: Point,
}

/// Where the awake robots of a triangle start.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StartConfig {
    ApexA,
    CornerB,
    CornerC,
    /// Two robots at one point of a leg `[a b]` or `[a c]`.
    TwoOnLeg(Point),
}

impl TriangleRegion {
    pub fn new(b: Point, c: Point, a: Point) -> Result<Self> {
        let h = c - b;
        let len = h.l1();
        let axis_parallel = h.x == 0.0 || h.y == 0.0;
        let mid = b.midpoint(c);
        let perp = a - mid;
        let ok = len > 0.0
            && axis_parallel
            && (perp.l1() - len / 2.0).abs() <= TOL * len
            && perp.dot(h).abs() <= TOL * len * len;
        if !ok {
            return Err(FtkError::InvalidInput(format!(
                "({b}, {c}, {a}) is not an isosceles right triangle with axis-parallel hypotenuse"
            )));
        }
        Ok(TriangleRegion { b, c, a })
    }

    /// The canonical triangle scaled by `diameter` with `B` at `b`.
    pub fn canonical(b: Point, diameter: f64) -> Result<Self> {
        TriangleRegion::new(b, b + Point::new(diameter, 0.0), b + Point::new(diameter / 2.0, diameter / 2.0))
    }

    pub fn diameter(&self) -> f64 {
        (self.c - self.b).l1()
    }

    fn frame(&self) -> Frame {
        Frame::new(B, 1.0, Point::new(1.0, 0.0), Point::new(0.0, 1.0)).triangle(self.b, self.c, self.a)
    }

    pub fn contains(&self, p: Point) -> bool {
        let q = self.frame().to_local(p);
        q.y >= -TOL && q.y <= q.x + TOL && q.y <= 1.0 - q.x + TOL
    }
}

/// Which of the four sub-triangles of the canonical triangle a local point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    TA,
    TB,
    TC,
    T0,
}

fn part(p: Point) -> Part {
    if p.y >= 0.25 - TOL {
        Part::TA
    } else if p.x + p.y <= 0.5 + TOL {
        Part::TB
    } else if p.x - p.y >= 0.5 - TOL {
        Part::TC
    } else {
        Part::T0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Start {
    Apex,
    Corner,
    Leg(f64),
}

impl Start {
    fn local(self) -> Point {
        match self {
            Start::Apex => A,
            Start::Corner => B,
            Start::Leg(t) => Point::new(t, t),
        }
    }
}

struct Task {
    frame: Frame,
    start: Start,
    agents: Vec<Agent>,
    sleepers: Vec<usize>,
    depth: usize,
}

/// Recursive triangle construction driven by an explicit work stack.
struct Engine {
    b: ScheduleBuilder,
    stack: Vec<Task>,
    done: Vec<Agent>,
    guard: usize,
}

type Pts = Vec<(usize, Point)>;

impl Engine {
    fn new(norm: &Norm, positions: Vec<Point>, awake: usize) -> Self {
        let n = positions.len().max(2) as f64;
        let guard = ((10.0 * n.log2()) as usize + 64).max(2 * positions.len() + 8);
        Engine { b: ScheduleBuilder::with_awake(norm, positions, awake), stack: Vec::new(), done: Vec::new(), guard }
    }

    fn go(&self, agent: &mut Agent, frame: &Frame, p: Point) {
        self.b.move_to(agent, frame.to_world(p));
    }

    fn wake(&mut self, agent: Agent, target: usize) -> Result<(Agent, Agent)> {
        self.b.wake(agent, target)
    }

    /// Local coordinates clamped into the canonical triangle, so rounding cannot compound.
    fn local(&self, frame: &Frame, ids: &[usize]) -> Pts {
        ids.iter()
            .map(|&i| {
                let q = frame.to_local(self.b.position(i));
                let x = q.x.clamp(0.0, 1.0);
                (i, Point::new(x, q.y.max(0.0).min(x).min(1.0 - x)))
            })
            .collect()
    }

    /// Sends `agents` to the start of a sub-triangle and queues it; idle agents if it is empty.
    fn spawn(&mut self, mut agents: Vec<Agent>, frame: Frame, start: Start, sleepers: Vec<usize>, depth: usize) {
        if sleepers.is_empty() {
            self.done.extend(agents);
            return;
        }
        let target = start.local();
        for a in agents.iter_mut() {
            self.go(a, &frame, target);
        }
        self.stack.push(Task { frame, start, agents, sleepers, depth: depth + 1 });
    }

    fn spawn1(&mut self, agent: Agent, frame: Frame, start: Start, sleepers: Vec<usize>, depth: usize) {
        self.spawn(vec![agent], frame, start, sleepers, depth);
    }

    /// Runs queued triangle tasks to completion; returns the agents left over.
    fn run(&mut self) -> Result<Vec<Agent>> {
        while let Some(task) = self.stack.pop() {
            self.step(task)?;
        }
        Ok(std::mem::take(&mut self.done))
    }

    /// Wakes `sleepers` greedily with `agents`; used for single sleepers and degenerate regions.
    fn wake_greedy(&mut self, agents: Vec<Agent>, sleepers: &[usize]) -> Result<()> {
        let mut pool = agents;
        for &s in sleepers {
            let p = self.b.position(s);
            let k = (0..pool.len())
                .min_by(|&x, &y| {
                    let tx = pool[x].time() + (pool[x].position() - p).l1();
                    let ty = pool[y].time() + (pool[y].position() - p).l1();
                    tx.total_cmp(&ty)
                })
                .ok_or_else(|| FtkError::Internal("no agent left".into()))?;
            let a = pool.swap_remove(k);
            let (x, y) = self.wake(a, s)?;
            pool.push(x);
            pool.push(y);
        }
        self.done.extend(pool);
        Ok(())
    }

    /// Wakes co-located sleepers breadth-first.
    fn wake_cluster(&mut self, agents: Vec<Agent>, sleepers: &[usize]) -> Result<()> {
        let mut queue: std::collections::VecDeque<Agent> = agents.into();
        for &s in sleepers {
            let a = queue.pop_front().ok_or_else(|| FtkError::Internal("no agent left".into()))?;
            let (x, y) = self.wake(a, s)?;
            queue.push_back(x);
            queue.push_back(y);
        }
        self.done.extend(queue);
        Ok(())
    }

    fn step(&mut self, task: Task) -> Result<()> {
        let Task { frame, start, agents, sleepers, depth } = task;
        if sleepers.is_empty() {
            self.done.extend(agents);
            return Ok(());
        }
        if depth > self.guard {
            return Err(FtkError::Internal(format!("triangle recursion exceeded depth {}", self.guard)));
        }
        if frame.scale() <= 0.0 {
            return self.wake_cluster(agents, &sleepers);
        }
        if sleepers.len() == 1 {
            return self.wake_greedy(agents, &sleepers);
        }
        let pts = self.local(&frame, &sleepers);
        let mut agents = agents.into_iter();
        match start {
            Start::Apex => self.case_a(frame, agents.next().unwrap(), pts, depth),
            Start::Corner => self.case_b(frame, agents.next().unwrap(), pts, depth),
            Start::Leg(t) => {
                let r1 = agents.next().unwrap();
                let r2 = agents.next().ok_or_else(|| FtkError::Internal("leg start needs two robots".into()))?;
                self.case_c(frame, [r1, r2], t, pts, depth)
            }
        }
    }

    /// Apex start: wake the closest sleeper, then recurse from two shrunken apices.
    fn case_a(&mut self, frame: Frame, agent: Agent, pts: Pts, depth: usize) -> Result<()> {
        let (k, &(p1, q1)) = pts
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 .1 - A).l1().total_cmp(&(y.1 .1 - A).l1()).then(x.1 .0.cmp(&y.1 .0)))
            .unwrap();
        let d = (q1 - A).l1().min(1.0);
        let (r1, r2) = self.wake(agent, p1)?;
        let a1 = Point::new(0.5 - d / 2.0, 0.5 - d / 2.0);
        let a2 = Point::new(0.5 + d / 2.0, 0.5 - d / 2.0);
        let t1 = frame.triangle(B, Point::new(1.0 - d, 0.0), a1);
        let t2 = frame.triangle(Point::new(d, 0.0), C, a2);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (i, &(s, q)) in pts.iter().enumerate() {
            if i == k {
                continue;
            }
            let in_left = q.x + q.y <= 1.0 - d;
            let in_right = q.x - q.y >= d;
            if in_left || (!in_right && q.x + q.y - (1.0 - d) <= d - (q.x - q.y)) {
                left.push(s);
            } else {
                right.push(s);
            }
        }
        self.spawn1(r1, t1, Start::Apex, left, depth);
        self.spawn1(r2, t2, Start::Apex, right, depth);
        Ok(())
    }

    fn case_b(&mut self, frame: Frame, agent: Agent, pts: Pts, depth: usize) -> Result<()> {
        let pb: Pts = pts.iter().copied().filter(|p| matches!(part(p.1), Part::TB | Part::T0)).collect();
        let tb: Pts = pb.iter().copied().filter(|p| part(p.1) == Part::TB).collect();
        match pb.len() {
            0 => self.case_b0(frame, agent, pts, depth),
            1 | 2 => self.case_b12(frame, agent, pts, pb, depth),
            _ if tb.len() >= 3 => self.case_b33(frame, agent, pts, tb, depth),
            _ if tb.len() == 2 => self.case_b32(frame, agent, pts, tb, depth),
            _ => self.case_b31(frame, agent, pts, pb, tb.first().map(|p| p.0), depth),
        }
    }

    /// Empty parallelogram: grow it from `B` until it meets a sleeper.
    fn case_b0(&mut self, frame: Frame, agent: Agent, pts: Pts, depth: usize) -> Result<()> {
        let grow = |q: Point| (4.0 * q.y).max(2.0 * (q.x - q.y));
        let &(p1, q1) = pts.iter().min_by(|x, y| grow(x.1).total_cmp(&grow(y.1)).then(x.0.cmp(&y.0))).unwrap();
        let s = grow(q1).clamp(1.0, 2.0);
        let c1 = Point::new(1.0 - s / 4.0, s / 4.0);
        let a1 = Point::new(0.5 + s / 4.0, 0.5 - s / 4.0);
        let top = frame.triangle(c1, Point::new(s / 4.0, s / 4.0), A);
        let right = frame.triangle(Point::new(s / 2.0, 0.0), C, a1);
        let (r1, r2) = self.wake(agent, p1)?;
        let (mut up, mut side) = (Vec::new(), Vec::new());
        for &(i, q) in &pts {
            if i == p1 {
                continue;
            }
            if q.y >= s / 4.0 - TOL {
                up.push(i);
            } else {
                side.push(i);
            }
        }
        self.spawn1(r1, top, Start::Corner, up, depth);
        self.spawn1(r2, right, Start::Apex, side, depth);
        Ok(())
    }

    /// One or two sleepers in the parallelogram.
    fn case_b12(&mut self, frame: Frame, agent: Agent, pts: Pts, pb: Pts, depth: usize) -> Result<()> {
        let pb = by_x(&pb);
        let rest = |skip: &[usize], want: Part| -> Vec<usize> {
            pts.iter().filter(|p| !skip.contains(&p.0) && part(p.1) == want).map(|p| p.0).collect()
        };
        let skip: Vec<usize> = pb.iter().map(|p| p.0).collect();
        let ta = rest(&skip, Part::TA);
        let tc = rest(&skip, Part::TC);
        let (r0, r1) = self.wake(agent, pb[0].0)?;
        self.spawn1(r0, frame.triangle(E, F, A), Start::Corner, ta, depth);
        if pb.len() == 1 {
            self.spawn1(r1, frame.triangle(D, C, E), Start::Apex, tc, depth);
            return Ok(());
        }
        let (r2, r3) = self.wake(r1, pb[1].0)?;
        if pb[0].1.y <= pb[1].1.y + TOL {
            self.spawn1(r2, frame.triangle(D, C, E), Start::Apex, tc, depth);
            self.done.push(r3);
        } else {
            let q2 = pb[1].1;
            let cstar = Point::new(q2.y + 0.5, q2.y);
            let sub = frame.triangle(D, C, E);
            let t = leg_parameter(&sub, frame.to_world(cstar));
            self.spawn(vec![r2, r3], sub, Start::Leg(t), tc, depth);
        }
        Ok(())
    }

    /// At least three sleepers in `T_B`: gather four robots at `D`.
    fn case_b33(&mut self, frame: Frame, agent: Agent, pts: Pts, tb: Pts, depth: usize) -> Result<()> {
        let tb = by_x(&tb);
        let (p1, p2, p3) = (tb[0].0, tb[1].0, tb[2].0);
        let (r0, r1) = self.wake(agent, p1)?;
        let (a, b) = self.wake(r0, p2)?;
        let (c, d) = self.wake(r1, p3)?;
        let mut groups: [Vec<usize>; 4] = Default::default();
        for &(i, q) in &pts {
            if [p1, p2, p3].contains(&i) {
                continue;
            }
            let g = match part(q) {
                Part::TB => 0,
                Part::TC => 1,
                _ if q.x <= 0.5 + TOL => 2,
                _ => 3,
            };
            groups[g].push(i);
        }
        let [gb, gc, gl, gr] = groups;
        self.spawn1(a, frame.triangle(D, B, F), Start::Corner, gb, depth);
        self.spawn1(b, frame.triangle(D, C, E), Start::Corner, gc, depth);
        self.spawn1(c, frame.triangle(D, A, F), Start::Corner, gl, depth);
        self.spawn1(d, frame.triangle(D, A, E), Start::Corner, gr, depth);
        Ok(())
    }

    /// Exactly two sleepers in `T_B`.
    fn case_b32(&mut self, frame: Frame, agent: Agent, pts: Pts, tb: Pts, depth: usize) -> Result<()> {
        let tb = by_x(&tb);
        let (p1, p2) = (tb[0].0, tb[1].0);
        let (r0, r1) = self.wake(agent, p1)?;
        let (r2, r3) = self.wake(r1, p2)?;
        let (ta, t0, tc) = split3(&pts, &[p1, p2]);
        self.spawn1(r0, frame.triangle(E, F, A), Start::Corner, ta, depth);
        self.spawn1(r2, frame.triangle(F, E, D), Start::Apex, t0, depth);
        self.spawn1(r3, frame.triangle(D, C, E), Start::Corner, tc, depth);
        Ok(())
    }

    /// At least three sleepers in the parallelogram but at most one in `T_B`.
    fn case_b31(
        &mut self,
        frame: Frame,
        agent: Agent,
        pts: Pts,
        pb: Pts,
        q: Option<usize>,
        depth: usize,
    ) -> Result<()> {
        let s = by_x(&pb);
        let (s1, s2, s3) = (s[0], s[1], s[2]);
        let all_pb: Vec<usize> = pb.iter().map(|p| p.0).collect();
        let of = |want: Part| -> Vec<usize> { pts.iter().filter(|p| part(p.1) == want).map(|p| p.0).collect() };
        let (ta, tc) = (of(Part::TA), of(Part::TC));

        // increasing pair: three robots meet at E
        let pair = if s1.1.y <= s2.1.y + TOL {
            Some((s1, s2))
        } else if s1.1.y <= s3.1.y + TOL {
            Some(if q == Some(s2.0) { (s2, s3) } else { (s1, s3) })
        } else {
            None
        };
        if let Some((a, b)) = pair {
            let extra = q.filter(|&i| i != a.0 && i != b.0);
            let t0: Vec<usize> = all_pb.iter().copied().filter(|&i| i != a.0 && i != b.0 && Some(i) != extra).collect();
            let (r0, r1) = self.wake(agent, a.0)?;
            let (r2, r3) = self.wake(r1, b.0)?;
            self.spawn1(r0, frame.triangle(E, F, A), Start::Corner, ta, depth);
            self.spawn1(r2, frame.triangle(D, C, E), Start::Apex, tc, depth);
            match extra {
                None => self.spawn1(r3, frame.triangle(E, F, D), Start::Corner, t0, depth),
                Some(x) => {
                    let (r4, r5) = self.wake(r3, x)?;
                    self.spawn1(r4, frame.triangle(F, E, D), Start::Apex, t0, depth);
                    self.done.push(r5);
                }
            }
            return Ok(());
        }

        if s2.1.y >= s3.1.y - TOL {
            // decreasing triple: shrink T_0 towards E so its apex is reachable
            let t3 = match q {
                Some(i) if i != s1.0 && i != s2.0 => *pb.iter().find(|p| p.0 == i).unwrap(),
                _ => s3,
            };
            let rest: Pts = pb.iter().copied().filter(|p| ![s1.0, s2.0, t3.0].contains(&p.0)).collect();
            let mu_r = rest.iter().map(|p| (p.1.x + p.1.y - 0.5) / 2.0).fold(f64::INFINITY, f64::min);
            let mu = mu_r.min(s2.1.y).min(0.25).max((s2.1.x - 0.5).max(0.0));
            let apex = Point::new(0.5 + mu, mu);
            let shrunk = frame.triangle(Point::new(0.25 + 2.0 * mu, 0.25), E, apex);
            let cstar = Point::new(t3.1.y + 0.5, t3.1.y);
            let sub = frame.triangle(D, C, E);
            let t = leg_parameter(&sub, frame.to_world(cstar));
            let (r0, r1) = self.wake(agent, s1.0)?;
            let (r2, r3) = self.wake(r1, s2.0)?;
            let (r4, r5) = self.wake(r3, t3.0)?;
            self.spawn1(r0, frame.triangle(E, F, A), Start::Corner, ta, depth);
            self.spawn1(r2, shrunk, Start::Apex, rest.iter().map(|p| p.0).collect(), depth);
            self.spawn(vec![r4, r5], sub, Start::Leg(t), tc, depth);
            return Ok(());
        }

        // alternating: s2 is lowest, s3 between s2 and s1
        let (r0, r1) = self.wake(agent, s2.0)?;
        let (r2, r3) = self.wake(r0, s3.0)?;
        self.spawn1(r2, frame.triangle(E, F, A), Start::Corner, ta, depth);
        self.spawn1(r3, frame.triangle(D, C, E), Start::Apex, tc, depth);
        let rest: Pts = pb.iter().copied().filter(|p| ![s1.0, s2.0, s3.0].contains(&p.0)).collect();
        if rest.is_empty() {
            let (x, y) = self.wake(r1, s1.0)?;
            self.done.extend([x, y]);
            return Ok(());
        }
        let &(p4, q4) =
            rest.iter().min_by(|x, y| (x.1.x + x.1.y).total_cmp(&(y.1.x + y.1.y)).then(x.0.cmp(&y.0))).unwrap();
        let mu = ((q4.x + q4.y - 0.5) / 2.0).clamp(0.0, 0.25);
        let apex = Point::new(0.5 + mu, mu);
        let shrunk = frame.triangle(Point::new(0.25 + 2.0 * mu, 0.25), E, apex);
        let (r4, r5) = self.wake(r1, p4)?;
        let inner: Vec<usize> = rest.iter().map(|p| p.0).filter(|&i| i != p4).collect();
        self.spawn1(r4, shrunk, Start::Apex, inner, depth);
        let (x, y) = self.wake(r5, s1.0)?;
        self.done.extend([x, y]);
        Ok(())
    }

    /// Two robots at `(t, t)` on the leg `[A B]`.
    fn case_c(&mut self, frame: Frame, robots: [Agent; 2], t: f64, pts: Pts, depth: usize) -> Result<()> {
        let [r1, r2] = robots;
        let lower = t <= 0.25 + TOL;
        let own_part = if lower { Part::TB } else { Part::TA };
        let in_p = |q: Point| part(q) == own_part || part(q) == Part::T0;
        let p_count = pts.iter().filter(|p| in_p(p.1)).count();
        let here = Point::new(t, t);
        let mut own: Pts = pts.iter().copied().filter(|p| part(p.1) == own_part).collect();
        own.sort_by(|x, y| (x.1 - here).l1().total_cmp(&(y.1 - here).l1()).then(x.0.cmp(&y.0)));
        let groups = |skip: &[usize]| -> [Vec<usize>; 4] {
            let mut g: [Vec<usize>; 4] = Default::default();
            for &(i, q) in &pts {
                if !skip.contains(&i) {
                    g[part(q) as usize].push(i);
                }
            }
            g
        };
        let ta_b = frame.triangle(F, E, A);
        let ta_e = frame.triangle(E, F, A);
        let tb_apex = frame.triangle(B, D, F);
        let tc = frame.triangle(D, C, E);
        let t0_apex = frame.triangle(F, E, D);
        let t0_e = frame.triangle(E, F, D);

        if p_count == 0 {
            let [ga, gb, gc, _] = groups(&[]);
            if lower {
                self.spawn1(r1, tc, Start::Corner, gc, depth);
                self.spawn1(r2, ta_b, Start::Corner, ga, depth);
            } else {
                self.spawn1(r1, tc, Start::Apex, gc, depth);
                self.spawn1(r2, tb_apex, Start::Apex, gb, depth);
            }
            return Ok(());
        }
        match own.len() {
            0 => {
                let mut t0: Pts = pts.iter().copied().filter(|p| part(p.1) == Part::T0).collect();
                t0.sort_by(|x, y| (x.1 - here).l1().total_cmp(&(y.1 - here).l1()).then(x.0.cmp(&y.0)));
                let p1 = t0[0].0;
                let [ga, gb, gc, g0] = groups(&[p1]);
                let (a, b) = self.wake(r2, p1)?;
                if lower {
                    self.spawn1(r1, ta_e, Start::Corner, ga, depth);
                    self.spawn1(a, t0_e, Start::Corner, g0, depth);
                    self.spawn1(b, tc, Start::Apex, gc, depth);
                } else {
                    self.spawn1(r1, tb_apex, Start::Apex, gb, depth);
                    self.spawn1(a, t0_apex, Start::Apex, g0, depth);
                    self.spawn1(b, tc, Start::Corner, gc, depth);
                }
            }
            1 => {
                let p1 = own[0].0;
                let [ga, gb, gc, g0] = groups(&[p1]);
                let (a, b) = self.wake(r2, p1)?;
                if lower {
                    self.spawn1(r1, ta_b, Start::Corner, ga, depth);
                    self.spawn1(a, t0_apex, Start::Apex, g0, depth);
                    self.spawn1(b, tc, Start::Corner, gc, depth);
                } else {
                    self.spawn1(r1, tc, Start::Apex, gc, depth);
                    self.spawn1(a, tb_apex, Start::Apex, gb, depth);
                    self.spawn1(b, t0_e, Start::Corner, g0, depth);
                }
            }
            _ => {
                let (p1, p2) = (own[0].0, own[1].0);
                let [ga, gb, gc, g0] = groups(&[p1, p2]);
                let (a, b) = self.wake(r1, p1)?;
                let (c, d) = self.wake(r2, p2)?;
                self.spawn1(a, ta_b, Start::Corner, ga, depth);
                self.spawn1(c, tb_apex, Start::Apex, gb, depth);
                if lower {
                    self.spawn1(b, t0_apex, Start::Apex, g0, depth);
                    self.spawn1(d, tc, Start::Corner, gc, depth);
                } else {
                    self.spawn1(b, t0_e, Start::Corner, g0, depth);
                    self.spawn1(d, tc, Start::Apex, gc, depth);
                }
            }
        }
        Ok(())
    }

    /// Up to five sleepers of a square, starting at its local origin; returns every robot.
    fn square5(&mut self, frame: Frame, agent: Agent, sleepers: &[usize]) -> Result<Vec<Agent>> {
        let n = sleepers.len();
        if n > 5 {
            return Err(FtkError::Precondition(format!("a square takes at most 5 sleepers here, got {n}")));
        }
        let mut out = Vec::new();
        match n {
            0 => out.push(agent),
            1..=3 => {
                let (a, b) = self.wake(agent, sleepers[0])?;
                for (r, s) in [(a, sleepers.get(1)), (b, sleepers.get(2))] {
                    match s {
                        Some(&s) => {
                            let (x, y) = self.wake(r, s)?;
                            out.extend([x, y]);
                        }
                        None => out.push(r),
                    }
                }
            }
            4 => {
                let mut pts = vec![B];
                pts.extend(sleepers.iter().map(|&s| frame.to_local(self.b.position(s))));
                let (mut i, mut j, mut k) = monotone_triple(&pts)?;
                if j == 0 {
                    // a sleeper sits on the start: put it in the middle instead
                    j = i;
                    i = 0;
                }
                if k == 0 {
                    std::mem::swap(&mut i, &mut k);
                }
                let node = |x: usize| sleepers[x - 1];
                let others: Vec<usize> = (1..=4).filter(|&x| x != i && x != j && x != k).map(node).collect();
                if i == 0 {
                    let (a, b) = self.wake(agent, node(j))?;
                    out.push(b);
                    let (c, d) = self.wake(a, node(k))?;
                    let (e, f) = self.wake(c, others[0])?;
                    let (g, h) = self.wake(d, others[1])?;
                    out.extend([e, f, g, h]);
                } else {
                    let (a, b) = self.wake(agent, node(i))?;
                    let (c, d) = self.wake(a, node(j))?;
                    out.push(d);
                    let (e, f) = self.wake(c, node(k))?;
                    let (g, h) = self.wake(b, others[0])?;
                    out.extend([e, f, g, h]);
                }
            }
            _ => {
                let pts: Pts = sleepers.iter().map(|&s| (s, frame.to_local(self.b.position(s)))).collect();
                let from_start = pts.iter().enumerate().find_map(|(x, &(_, qa))| {
                    pts.iter()
                        .enumerate()
                        .find(|&(y, &(_, qb))| y != x && is_monotone(&[B, qa, qb]))
                        .map(|(y, _)| (x, y))
                });
                if let Some((x, y)) = from_start {
                    let (r0, r1) = self.wake(agent, pts[x].0)?;
                    let (r2, r3) = self.wake(r1, pts[y].0)?;
                    let rest: Vec<usize> = (0..5).filter(|&z| z != x && z != y).map(|z| pts[z].0).collect();
                    for (r, s) in [(r0, rest[0]), (r2, rest[1]), (r3, rest[2])] {
                        let (u, v) = self.wake(r, s)?;
                        out.extend([u, v]);
                    }
                } else {
                    let top = pts.iter().copied().max_by(|a, b| a.1.y.total_cmp(&b.1.y)).unwrap();
                    let bottom = pts.iter().copied().min_by(|a, b| a.1.y.total_cmp(&b.1.y)).unwrap();
                    let mid: Pts =
                        by_x(&pts.iter().copied().filter(|p| p.0 != top.0 && p.0 != bottom.0).collect::<Vec<_>>());
                    let p1 = mid[0];
                    let p1_on_top = mid[1..].iter().all(|p| p1.1.y >= p.1.y - TOL);
                    let (first, second) = if p1_on_top { (top, bottom) } else { (bottom, top) };
                    let (r0, r1) = self.wake(agent, first.0)?;
                    let (r2, r3) = self.wake(r0, second.0)?;
                    let (r4, r5) = self.wake(r1, p1.0)?;
                    let (r6, r7) = self.wake(r4, mid[1].0)?;
                    let (r8, r9) = self.wake(r5, mid[2].0)?;
                    out.extend([r2, r3, r6, r7, r8, r9]);
                }
            }
        }
        Ok(out)
    }

    /// Exactly six sleepers of a square from its local origin; all seven robots end at the origin.
    fn square6_return(&mut self, frame: Frame, agent: Agent, sleepers: &[usize]) -> Result<Vec<Agent>> {
        if sleepers.len() != 6 {
            return Err(FtkError::Precondition(format!("expected exactly 6 sleepers, got {}", sleepers.len())));
        }
        let pts: Pts = sleepers.iter().map(|&s| (s, frame.to_local(self.b.position(s)))).collect();
        let plan = s6_plan(&pts)?;
        let mut out = Vec::new();
        match plan {
            S6Plan::Chain { a, b, c, rest } => {
                let (mut r0, r1) = self.wake(agent, a)?;
                let (mut r2, r3) = self.wake(r1, b)?;
                let (r4, r5) = self.wake(r3, c)?;
                let pc = self.b.position(c);
                self.b.move_to(&mut r0, pc);
                self.b.move_to(&mut r2, pc);
                for (r, s) in [(r0, rest[0]), (r2, rest[1]), (r4, rest[2])] {
                    let (u, v) = self.wake(r, s)?;
                    out.extend([u, v]);
                }
                out.push(r5);
            }
            S6Plan::Through { pi, pj, from_j, p, p2, last } => {
                let (r0, r1) = self.wake(agent, pi)?;
                let (r2, r3) = self.wake(r1, pj)?;
                let (walker, others) = if from_j { (r2, [r3, r0]) } else { (r0, [r2, r3]) };
                let (w, x) = self.wake(walker, p)?;
                let (y, z) = self.wake(w, p2)?;
                out.extend([x, y, z]);
                for (r, s) in others.into_iter().zip(last) {
                    let (u, v) = self.wake(r, s)?;
                    out.extend([u, v]);
                }
            }
            S6Plan::Sweep { pk, pj, pi, upper, lower } => {
                let (ra, rb) = self.wake(agent, pk)?;
                let (ra, rj) = self.wake(ra, pj)?;
                let mut ra = ra;
                if let Some(u) = upper {
                    let (x, y) = self.wake(ra, u)?;
                    out.push(y);
                    ra = x;
                }
                out.push(ra);
                let (x, y) = self.wake(rj, pi)?;
                out.extend([x, y]);
                let mut rb = rb;
                for s in lower {
                    let (x, y) = self.wake(rb, s)?;
                    out.push(y);
                    rb = x;
                }
                out.push(rb);
            }
            S6Plan::Fan { first, upper, lower } => {
                let (ra, rb) = self.wake(agent, first)?;
                for (mut r, chain) in [(ra, upper), (rb, lower)] {
                    for s in chain {
                        let (x, y) = self.wake(r, s)?;
                        out.push(y);
                        r = x;
                    }
                    out.push(r);
                }
            }
        }
        let home = frame.to_world(B);
        for r in out.iter_mut() {
            self.b.move_to(r, home);
        }
        Ok(out)
    }
}

/// Position of a world point on the leg `[A B]` of a triangle frame, as `t` in `(t, t)`.
fn leg_parameter(frame: &Frame, w: Point) -> f64 {
    let q = frame.to_local(w);
    ((q.x + q.y) / 2.0).clamp(0.0, 0.5)
}

fn split3(pts: &Pts, skip: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut ta, mut t0, mut tc) = (Vec::new(), Vec::new(), Vec::new());
    for &(i, q) in pts {
        if skip.contains(&i) {
            continue;
        }
        match part(q) {
            Part::TA => ta.push(i),
            Part::TC => tc.push(i),
            _ => t0.push(i),
        }
    }
    (ta, t0, tc)
}

/// How six sleepers of a square are woken before returning to the start.
#[derive(Clone, Debug, PartialEq)]
enum S6Plan {
    /// A monotone path `start → a → b → c` exists.
    Chain { a: usize, b: usize, c: usize, rest: Vec<usize> },
    /// A path `start → pi → pj` exists and a pair can be collected on a 2-monotone way home.
    Through { pi: usize, pj: usize, from_j: bool, p: usize, p2: usize, last: Vec<usize> },
    /// A path `start → pi → pj` exists but no such pair: sweep from the rightmost low robot.
    Sweep { pk: usize, pj: usize, pi: usize, upper: Option<usize>, lower: Vec<usize> },
    /// No monotone path of two sleepers from the start.
    Fan { first: usize, upper: Vec<usize>, lower: Vec<usize> },
}

/// Case of the six-sleeper construction (1, 2 or 3) for local points.
pub fn s6_case(points: &[Point]) -> Result<u8> {
    let pts: Pts = points.iter().copied().enumerate().collect();
    Ok(match s6_plan(&pts)? {
        S6Plan::Chain { .. } => 1,
        S6Plan::Through { .. } | S6Plan::Sweep { .. } => 2,
        S6Plan::Fan { .. } => 3,
    })
}

fn s6_plan(pts: &Pts) -> Result<S6Plan> {
    let n = pts.len();
    let ids = |skip: &[usize]| -> Vec<usize> { (0..n).filter(|k| !skip.contains(k)).collect() };
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a != b && b != c && a != c && is_monotone(&[B, pts[a].1, pts[b].1, pts[c].1]) {
                    let rest = ids(&[a, b, c]).into_iter().map(|k| pts[k].0).collect();
                    return Ok(S6Plan::Chain { a: pts[a].0, b: pts[b].0, c: pts[c].0, rest });
                }
            }
        }
    }
    let mut best: Option<(usize, usize)> = None;
    for a in 0..n {
        for b in 0..n {
            if a == b || !is_monotone(&[B, pts[a].1, pts[b].1]) {
                continue;
            }
            let better = match best {
                None => true,
                Some((ba, bb)) => {
                    let (xb, xa) = (pts[bb].1.x, pts[b].1.x);
                    xa > xb + TOL || (xa >= xb - TOL && pts[a].1.y.abs() < pts[ba].1.y.abs() - TOL)
                }
            };
            if better {
                best = Some((a, b));
            }
        }
    }
    let Some((i, j)) = best else {
        let first = (0..n).max_by(|&a, &b| pts[a].1.x.total_cmp(&pts[b].1.x).then(b.cmp(&a))).unwrap();
        let mut up: Pts = Vec::new();
        let mut down: Pts = Vec::new();
        for k in ids(&[first]) {
            if pts[k].1.y > 0.0 {
                up.push(pts[k]);
            } else {
                down.push(pts[k]);
            }
        }
        let chain = |v: Pts| -> Vec<usize> { by_x(&v).into_iter().rev().map(|p| p.0).collect() };
        return Ok(S6Plan::Fan { first: pts[first].0, upper: chain(up), lower: chain(down) });
    };
    // reflect so that start → pi → pj heads north-east
    let flip = pts[j].1.y < -TOL || (pts[j].1.y <= TOL && pts[i].1.y < -TOL);
    let q = |k: usize| if flip { Point::new(pts[k].1.x, -pts[k].1.y) } else { pts[k].1 };
    let (qi, qj) = (q(i), q(j));
    let rem = ids(&[i, j]);
    for (from_j, head) in [(false, qi), (true, qj)] {
        for &p in &rem {
            for &p2 in &rem {
                if p != p2 && monotone_pieces(&[head, q(p), q(p2), B]) <= 2 {
                    let last = rem.iter().copied().filter(|&k| k != p && k != p2).map(|k| pts[k].0).collect();
                    return Ok(S6Plan::Through {
                        pi: pts[i].0,
                        pj: pts[j].0,
                        from_j,
                        p: pts[p].0,
                        p2: pts[p2].0,
                        last,
                    });
                }
            }
        }
    }
    let is_lower = |k: usize| {
        let p = q(k);
        p.y < -TOL || (p.x >= qj.x - TOL && p.y < qi.y - TOL)
    };
    let lower_right: Vec<usize> = rem.iter().copied().filter(|&k| is_lower(k) && q(k).x >= qj.x - TOL).collect();
    let lower_left: Vec<usize> = rem.iter().copied().filter(|&k| is_lower(k) && q(k).x < qj.x - TOL).collect();
    let upper: Vec<usize> = rem.iter().copied().filter(|&k| !is_lower(k)).collect();
    if lower_right.is_empty() || upper.len() > 1 || lower_left.len() > 1 {
        return Err(FtkError::Internal(format!(
            "six-sleeper layout outside the case analysis: {} upper, {} lower-left, {} lower-right",
            upper.len(),
            lower_left.len(),
            lower_right.len()
        )));
    }
    let mut lr: Pts = lower_right.iter().map(|&k| (k, q(k))).collect();
    lr = by_x(&lr);
    lr.reverse();
    let pk = lr[0].0;
    let mut lower: Vec<usize> = lr[1..].iter().map(|p| pts[p.0].0).collect();
    lower.extend(lower_left.iter().map(|&k| pts[k].0));
    Ok(S6Plan::Sweep { pk: pts[pk].0, pj: pts[j].0, pi: pts[i].0, upper: upper.first().map(|&k| pts[k].0), lower })
}

/// The four squares of the ℓ1 disk, in tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrant {
    East,
    North,
    West,
    South,
}

pub const QUADRANTS: [Quadrant; 4] = [Quadrant::East, Quadrant::North, Quadrant::West, Quadrant::South];

impl Quadrant {
    /// Frame mapping the canonical square onto this quadrant of the disk of radius `r` at `p0`.
    pub fn frame(self, p0: Point, r: f64) -> Frame {
        let k = match self {
            Quadrant::East => 0,
            Quadrant::North => 1,
            Quadrant::West => 2,
            Quadrant::South => 3,
        };
        Frame::dihedral(p0, r, k)
    }

    /// Quadrant of a displacement from the centre (closed squares, first match wins).
    pub fn of(d: Point) -> Quadrant {
        let tol = TOL * d.l1();
        if d.x >= d.y.abs() - tol {
            Quadrant::East
        } else if d.y >= d.x.abs() - tol {
            Quadrant::North
        } else if -d.x >= d.y.abs() - tol {
            Quadrant::West
        } else {
            Quadrant::South
        }
    }
}

/// Sleeper indices (1-based) per quadrant, in the order East, North, West, South.
pub fn square_partition(instance: &Instance) -> [Vec<usize>; 4] {
    let mut out: [Vec<usize>; 4] = Default::default();
    for i in 1..=instance.n() {
        let q = Quadrant::of(instance.position(i) - instance.p0());
        out[QUADRANTS.iter().position(|&x| x == q).unwrap()].push(i);
    }
    out
}

/// The densest quadrant (first in order on ties).
pub fn densest_square(instance: &Instance) -> Quadrant {
    let parts = square_partition(instance);
    let mut best = 0;
    for k in 1..4 {
        if parts[k].len() > parts[best].len() {
            best = k;
        }
    }
    QUADRANTS[best]
}

fn check_l1(norm: &Norm) -> Result<()> {
    if norm.is_l1() {
        Ok(())
    } else {
        Err(FtkError::Precondition(format!("the ℓ1 construction needs the l1 norm, got {}", norm.label())))
    }
}

/// Up to five sleepers of `square`, starting at its corner `start`.
pub fn wake_square5(square: &SquareRegion, sleepers: &[Point], start: Point) -> Result<Schedule> {
    let frame = square.frame_at(start)?;
    if sleepers.len() > 5 {
        return Err(FtkError::Precondition(format!("at most 5 sleepers, got {}", sleepers.len())));
    }
    check_inside(sleepers, |p| square.contains(p))?;
    let mut positions = vec![start];
    positions.extend_from_slice(sleepers);
    let mut e = Engine::new(&Norm::l1(), positions, 1);
    let root = e.b.root_agent();
    let ids: Vec<usize> = (1..=sleepers.len()).collect();
    for a in e.square5(frame, root, &ids)? {
        e.b.park(a);
    }
    Ok(e.b.finish())
}

/// Six sleepers of `square` woken from the left corner `start`, with every robot back at `start`.
pub fn wake_square6_return(square: &SquareRegion, sleepers: &[Point], start: Point) -> Result<Schedule> {
    let frame = square.frame_at(start)?;
    if sleepers.len() != 6 {
        return Err(FtkError::Precondition(format!("expected exactly 6 sleepers, got {}", sleepers.len())));
    }
    check_inside(sleepers, |p| square.contains(p))?;
    let mut positions = vec![start];
    positions.extend_from_slice(sleepers);
    let mut e = Engine::new(&Norm::l1(), positions, 1);
    let root = e.b.root_agent();
    let ids: Vec<usize> = (1..=6).collect();
    for a in e.square6_return(frame, root, &ids)? {
        e.b.park(a);
    }
    Ok(e.b.finish())
}

fn check_inside(sleepers: &[Point], inside: impl Fn(Point) -> bool) -> Result<()> {
    match sleepers.iter().find(|&&p| !inside(p)) {
        Some(p) => Err(FtkError::Precondition(format!("sleeper {p} lies outside the region"))),
        None => Ok(()),
    }
}

/// Wakes every sleeper of `tri` within twice its diameter.
pub fn wake_triangle(tri: &TriangleRegion, sleepers: &[Point], start: StartConfig) -> Result<Schedule> {
    check_inside(sleepers, |p| tri.contains(p))?;
    let diam = tri.diameter();
    let (frame, local_start, awake) = match start {
        StartConfig::ApexA => (tri.frame(), Start::Apex, 1),
        StartConfig::CornerB => (tri.frame(), Start::Corner, 1),
        StartConfig::CornerC => (TriangleRegion { b: tri.c, c: tri.b, a: tri.a }.frame(), Start::Corner, 1),
        StartConfig::TwoOnLeg(p) => {
            let on = |s: Point| {
                let (len, along) = ((tri.a - s).l1(), (p - s).l1() + (tri.a - p).l1());
                (along - len).abs() <= TOL * diam && ((p - s).cross(tri.a - s)).abs() <= TOL * diam * diam
            };
            let frame = if on(tri.b) {
                tri.frame()
            } else if on(tri.c) {
                TriangleRegion { b: tri.c, c: tri.b, a: tri.a }.frame()
            } else {
                return Err(FtkError::Precondition(format!("start {p} is not on a leg of the triangle")));
            };
            (frame, Start::Leg(leg_parameter(&frame, p)), 2)
        }
    };
    let p0 = frame.to_world(local_start.local());
    let mut positions = vec![p0; awake];
    positions.extend_from_slice(sleepers);
    let mut e = Engine::new(&Norm::l1(), positions, awake);
    let agents: Vec<Agent> = (0..awake).map(|i| e.b.initial_agent(i)).collect();
    let ids: Vec<usize> = (awake..awake + sleepers.len()).collect();
    e.stack.push(Task { frame, start: local_start, agents, sleepers: ids, depth: 0 });
    for a in e.run()? {
        e.b.park(a);
    }
    Ok(e.b.finish())
}

/// Wake-up tree of makespan at most `5·r` for an ℓ1 instance of radius `r`.
pub fn wake_l1_disk(instance: &Instance) -> Result<WakeupTree> {
    l1_schedule(instance)?.to_tree(instance.norm())
}

/// The same construction as a robot-level trace.
pub fn l1_schedule(instance: &Instance) -> Result<Schedule> {
    check_l1(instance.norm())?;
    let n = instance.n();
    let p0 = instance.p0();
    let r = instance.radius();
    let mut e = Engine::new(instance.norm(), instance.positions(), 1);
    let root = e.b.root_agent();
    if n == 0 {
        return Ok(e.b.finish());
    }
    let all: Vec<usize> = (1..=n).collect();
    if r <= 0.0 {
        e.wake_cluster(vec![root], &all)?;
        return Ok(e.b.finish());
    }
    let parts = square_partition(instance);
    let dense = QUADRANTS.iter().position(|&q| q == densest_square(instance)).unwrap();
    let frames: Vec<Frame> = QUADRANTS.iter().map(|q| q.frame(p0, r)).collect();
    let n0 = parts[dense].len();
    let others: Vec<usize> = (0..4).filter(|&k| k != dense).collect();

    match n0 {
        1 => {
            let order: Vec<usize> = parts.iter().flatten().copied().collect();
            let (a, b) = e.wake(root, order[0])?;
            let mut pool = vec![a, b];
            for (k, &s) in order.iter().enumerate().skip(1) {
                let agent = if k < 3 {
                    pool.remove(0)
                } else {
                    let p = e.b.position(s);
                    let best = (0..pool.len())
                        .min_by(|&x, &y| {
                            let tx = pool[x].time() + (pool[x].position() - p).l1();
                            let ty = pool[y].time() + (pool[y].position() - p).l1();
                            tx.total_cmp(&ty)
                        })
                        .unwrap();
                    pool.remove(best)
                };
                let (x, y) = e.wake(agent, s)?;
                pool.extend([x, y]);
            }
        }
        2..=5 => {
            let mut team = e.square5(frames[dense], root, &parts[dense])?;
            for a in team.iter_mut() {
                e.b.move_to(a, p0);
            }
            for &k in &others {
                if parts[k].is_empty() {
                    continue;
                }
                let a = team.pop().ok_or_else(|| FtkError::Internal("team too small".into()))?;
                e.square5(frames[k], a, &parts[k])?;
            }
        }
        6..=10 => {
            let (first, rest) = parts[dense].split_at(6);
            let mut team = e.square6_return(frames[dense], root, first)?;
            let a = team.pop().unwrap();
            e.square5(frames[dense], a, rest)?;
            for &k in &others {
                let half = parts[k].len().div_ceil(2);
                let (x, y) = parts[k].split_at(half);
                for group in [x, y] {
                    if group.is_empty() {
                        continue;
                    }
                    let a = team.pop().ok_or_else(|| FtkError::Internal("team too small".into()))?;
                    e.square5(frames[k], a, group)?;
                }
            }
        }
        _ => {
            let triangles: Vec<(Frame, Vec<usize>)> = (0..4)
                .flat_map(|k| {
                    let f = frames[k];
                    let (up, down): (Vec<usize>, Vec<usize>) =
                        parts[k].iter().partition(|&&i| f.to_local(instance.position(i)).y >= -TOL);
                    [(f.triangle(B, C, A), up), (f.flip_y().triangle(B, C, A), down)]
                })
                .collect();
            let first = 2 * dense + usize::from(triangles[2 * dense + 1].1.len() > triangles[2 * dense].1.len());
            let (f, s) = triangles[first].clone();
            e.stack.push(Task { frame: f, start: Start::Corner, agents: vec![root], sleepers: s, depth: 0 });
            let mut team = e.run()?;
            team.sort_by(|x, y| {
                let tx = x.time() + (x.position() - p0).l1();
                let ty = y.time() + (y.position() - p0).l1();
                ty.total_cmp(&tx)
            });
            for (k, (f, s)) in triangles.into_iter().enumerate() {
                if k == first || s.is_empty() {
                    continue;
                }
                let a = team.pop().ok_or_else(|| FtkError::Internal("team too small".into()))?;
                e.spawn1(a, f, Start::Corner, s, 0);
            }
            e.run()?;
        }
    }
    if !e.b.all_woken() {
        return Err(FtkError::Internal("some sleeper was never assigned".into()));
    }
    Ok(e.b.finish())
}
