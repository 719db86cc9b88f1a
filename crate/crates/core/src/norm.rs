//! Planar norms, unit-circle arc arithmetic and cones.
//!
//! A [`Norm`] is either an `ℓp` norm or a polygonal norm whose unit circle is
//! a centrally symmetric convex polygon. Every norm exposes an arc-length
//! parametrisation of its unit circle, measured in the norm itself and
//! oriented anticlockwise from the boundary point in direction `(1, 0)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::error::{FtkError, Result};
use crate::point::Point;

/// Tolerance for geometric predicates.
pub const EPS: f64 = 1e-9;
/// Tolerance for iteratively computed constants.
pub const CONST_TOL: f64 = 1e-6;

/// Number of tabulated angles used for the arc parametrisation of general `ℓp` norms.
const LP_TABLE_SIZE: usize = 1024;
/// Halting threshold of the adaptive chordal subdivision.
const CHORD_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    /// `ℓp` with `p ∈ [1, ∞]`; use `f64::INFINITY` for the max norm.
    Lp(f64),
    /// Unit circle given by its vertices, anticlockwise.
    Polygon(Vec<Point>),
}

#[derive(Clone)]
pub struct Norm {
    kind: NormKind,
    shape: Shape,
}

#[derive(Clone)]
enum Shape {
    L1(Arc<PolyData>),
    L2,
    LInf(Arc<PolyData>),
    Lp(f64, Arc<LpTable>),
    Poly(Arc<PolyData>),
}

impl PartialEq for Norm {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Debug for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Norm({})", self.label())
    }
}

/// Polygonal unit circle, rotated so that vertex angles increase from index 0.
struct PolyData {
    verts: Vec<Point>,
    angles: Vec<f64>,
    normals: Vec<Point>,
    offsets: Vec<f64>,
    /// Arc position of each vertex measured from vertex 0.
    cumulative: Vec<f64>,
    total: f64,
    /// Arc position (from vertex 0) of the boundary point in direction (1,0).
    zero_offset: f64,
}

impl PolyData {
    fn new(vertices: &[Point]) -> Result<Self> {
        let m = vertices.len();
        if m < 4 {
            return Err(FtkError::InvalidInput(format!("polygon norm needs at least 4 vertices, got {m}")));
        }
        if vertices.iter().any(|v| !v.is_finite() || v.l2() < EPS) {
            return Err(FtkError::InvalidInput("polygon vertices must be finite and nonzero".into()));
        }
        let start = (0..m).min_by(|&a, &b| vertices[a].angle().total_cmp(&vertices[b].angle())).unwrap();
        let verts: Vec<Point> = (0..m).map(|k| vertices[(start + k) % m]).collect();
        let angles: Vec<f64> = verts.iter().map(|v| v.angle()).collect();
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FtkError::InvalidInput(
                "polygon vertices must be listed anticlockwise around the origin".into(),
            ));
        }
        for k in 0..m {
            let (a, b, c) = (verts[k], verts[(k + 1) % m], verts[(k + 2) % m]);
            if (b - a).cross(c - b) <= 0.0 {
                return Err(FtkError::InvalidInput("polygon must be strictly convex".into()));
            }
        }
        let scale = verts.iter().map(|v| v.l2()).fold(0.0, f64::max);
        for v in &verts {
            let neg = -*v;
            if !verts.iter().any(|w| w.approx_eq(neg, 1e-9 * scale.max(1.0))) {
                return Err(FtkError::InvalidInput("polygon must be centrally symmetric about the origin".into()));
            }
        }
        let mut normals = Vec::with_capacity(m);
        let mut offsets = Vec::with_capacity(m);
        for k in 0..m {
            let e = verts[(k + 1) % m] - verts[k];
            let n = Point::new(e.y, -e.x);
            offsets.push(n.dot(verts[k]));
            normals.push(n);
        }
        let mut data =
            PolyData { verts, angles, normals, offsets, cumulative: vec![0.0; m + 1], total: 0.0, zero_offset: 0.0 };
        for k in 0..m {
            let e = data.verts[(k + 1) % m] - data.verts[k];
            data.cumulative[k + 1] = data.cumulative[k] + data.eval(e);
        }
        data.total = data.cumulative[m];
        data.zero_offset = data.position_from_first(Point::new(1.0, 0.0));
        Ok(data)
    }

    /// Edge whose angular sector contains direction `u`.
    fn edge_of(&self, u: Point) -> usize {
        let a = u.angle();
        let m = self.verts.len();
        if a < self.angles[0] || a >= self.angles[m - 1] {
            return m - 1;
        }
        // last index with angles[i] <= a
        self.angles.partition_point(|&t| t <= a) - 1
    }

    fn eval(&self, u: Point) -> f64 {
        if u.x == 0.0 && u.y == 0.0 {
            return 0.0;
        }
        let i = self.edge_of(u);
        (self.normals[i].dot(u) / self.offsets[i]).max(0.0)
    }

    fn position_from_first(&self, dir: Point) -> f64 {
        let i = self.edge_of(dir);
        let b = dir * (1.0 / self.eval(dir));
        let s = self.cumulative[i] + self.eval(b - self.verts[i]);
        s.min(self.cumulative[i + 1])
    }

    fn position(&self, dir: Point) -> f64 {
        wrap(self.position_from_first(dir) - self.zero_offset, self.total)
    }

    fn point_at(&self, s: f64) -> Point {
        let t = wrap(s + self.zero_offset, self.total);
        let m = self.verts.len();
        let i = (self.cumulative.partition_point(|&c| c <= t).max(1) - 1).min(m - 1);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        let frac = if len > 0.0 { ((t - self.cumulative[i]) / len).clamp(0.0, 1.0) } else { 0.0 };
        self.verts[i].lerp(self.verts[(i + 1) % m], frac)
    }
}

/// Tabulated cumulative arc length of a general `ℓp` unit circle.
struct LpTable {
    p: f64,
    cumulative: Vec<f64>,
    total: f64,
}

impl LpTable {
    fn new(p: f64) -> Self {
        let mut cumulative = Vec::with_capacity(LP_TABLE_SIZE + 1);
        cumulative.push(0.0);
        for k in 0..LP_TABLE_SIZE {
            let (t0, t1) = (table_angle(k), table_angle(k + 1));
            let seg = adaptive_arc(p, t0, t1);
            cumulative.push(cumulative[k] + seg);
        }
        let total = cumulative[LP_TABLE_SIZE];
        LpTable { p, cumulative, total }
    }

    fn position_of_angle(&self, theta: f64) -> f64 {
        let theta = wrap(theta, TAU);
        let k = ((theta / TAU * LP_TABLE_SIZE as f64) as usize).min(LP_TABLE_SIZE - 1);
        self.cumulative[k] + adaptive_arc(self.p, table_angle(k), theta)
    }

    fn angle_at(&self, s: f64) -> f64 {
        let s = wrap(s, self.total);
        let k = (self.cumulative.partition_point(|&c| c <= s).max(1) - 1).min(LP_TABLE_SIZE - 1);
        let (mut lo, mut hi) = (table_angle(k), table_angle(k + 1));
        let base = self.cumulative[k];
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if base + adaptive_arc(self.p, table_angle(k), mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn table_angle(k: usize) -> f64 {
    TAU * k as f64 / LP_TABLE_SIZE as f64
}

fn lp_eval(p: f64, u: Point) -> f64 {
    let (ax, ay) = (u.x.abs(), u.y.abs());
    let m = ax.max(ay);
    if m == 0.0 {
        return 0.0;
    }
    let (rx, ry) = (ax / m, ay / m);
    m * (rx.powf(p) + ry.powf(p)).powf(1.0 / p)
}

fn lp_boundary(p: f64, theta: f64) -> Point {
    let d = Point::new(theta.cos(), theta.sin());
    d * (1.0 / lp_eval(p, d))
}

/// Arc length of the `ℓp` unit circle between two angles, by chordal subdivision
/// refined until successive estimates agree.
fn adaptive_arc(p: f64, t0: f64, t1: f64) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    let a = lp_boundary(p, t0);
    let b = lp_boundary(p, t1);
    let chord = lp_eval(p, b - a);
    refine_arc(p, t0, a, t1, b, chord, 0)
}

fn refine_arc(p: f64, t0: f64, a: Point, t1: f64, b: Point, chord: f64, depth: u32) -> f64 {
    let tm = 0.5 * (t0 + t1);
    let m = lp_boundary(p, tm);
    let left = lp_eval(p, m - a);
    let right = lp_eval(p, b - m);
    let refined = left + right;
    if (refined - chord).abs() < CHORD_TOL || depth > 40 {
        // chord error decays quadratically
        return refined + (refined - chord) / 3.0;
    }
    refine_arc(p, t0, a, tm, m, left, depth + 1) + refine_arc(p, tm, m, t1, b, right, depth + 1)
}

fn wrap(s: f64, period: f64) -> f64 {
    let r = s.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

fn axis_polygon(vertices: [(f64, f64); 4]) -> Arc<PolyData> {
    let v: Vec<Point> = vertices.iter().map(|&(x, y)| Point::new(x, y)).collect();
    Arc::new(PolyData::new(&v).expect("built-in polygon is valid"))
}

impl Norm {
    pub fn l1() -> Self {
        Norm {
            kind: NormKind::Lp(1.0),
            shape: Shape::L1(axis_polygon([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])),
        }
    }

    pub fn l2() -> Self {
        Norm { kind: NormKind::Lp(2.0), shape: Shape::L2 }
    }

    pub fn linf() -> Self {
        Norm {
            kind: NormKind::Lp(f64::INFINITY),
            shape: Shape::LInf(axis_polygon([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)])),
        }
    }

    pub fn lp(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(FtkError::InvalidInput(format!("lp exponent must be in [1, inf], got {p}")));
        }
        Ok(if p == 1.0 {
            Norm::l1()
        } else if p == 2.0 {
            Norm::l2()
        } else if p.is_infinite() {
            Norm::linf()
        } else {
            Norm { kind: NormKind::Lp(p), shape: Shape::Lp(p, Arc::new(LpTable::new(p))) }
        })
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        let data = PolyData::new(&vertices)?;
        Ok(Norm { kind: NormKind::Polygon(vertices), shape: Shape::Poly(Arc::new(data)) })
    }

    /// Regular hexagon with vertices on the Euclidean unit circle, one at `(1, 0)`.
    pub fn regular_hexagon() -> Self {
        let v = (0..6)
            .map(|k| {
                let a = PI / 3.0 * k as f64;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        Norm::polygon(v).expect("regular hexagon is a valid norm")
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn is_l1(&self) -> bool {
        matches!(self.shape, Shape::L1(_))
    }

    /// Short human-readable label (`l1`, `l2`, `linf`, `lp3`, `polygon6`).
    pub fn label(&self) -> String {
        match (&self.shape, &self.kind) {
            (Shape::L1(_), _) => "l1".into(),
            (Shape::L2, _) => "l2".into(),
            (Shape::LInf(_), _) => "linf".into(),
            (Shape::Lp(p, _), _) => format!("lp{p}"),
            (Shape::Poly(_), NormKind::Polygon(v)) => format!("polygon{}", v.len()),
            _ => unreachable!(),
        }
    }

    /// Norm of a vector.
    #[inline]
    pub fn eval(&self, u: Point) -> f64 {
        match &self.shape {
            Shape::L1(_) => u.l1(),
            Shape::L2 => u.l2(),
            Shape::LInf(_) => u.x.abs().max(u.y.abs()),
            Shape::Lp(p, _) => lp_eval(*p, u),
            Shape::Poly(d) => d.eval(u),
        }
    }

    /// Distance `η(v − u)` without input checks.
    #[inline]
    pub fn distance(&self, u: Point, v: Point) -> f64 {
        self.eval(v - u)
    }

    /// Checked distance.
    pub fn dist(&self, u: Point, v: Point) -> Result<f64> {
        if !u.is_finite() || !v.is_finite() {
            return Err(FtkError::InvalidInput(format!("non-finite coordinates in {u} or {v}")));
        }
        Ok(self.distance(u, v))
    }

    /// Length of a polyline.
    pub fn path_length(&self, path: &[Point]) -> f64 {
        path.windows(2).map(|w| self.distance(w[0], w[1])).sum()
    }

    /// Half the perimeter of the largest inscribed parallelogram, `Λ(η)`.
    ///
    /// Closed form for `ℓp`. For polygons the supremum of `η(u+v)+η(u−v)` over the
    /// disk is attained at vertex pairs (the objective is convex in each argument),
    /// so it is enumerated exactly.
    pub fn half_parallelogram_perimeter(&self) -> f64 {
        match &self.kind {
            NormKind::Lp(p) => {
                let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
                2f64.powf(1.0 + inv.max(1.0 - inv))
            }
            NormKind::Polygon(v) => {
                let mut best: f64 = 0.0;
                for &a in v {
                    for &b in v {
                        best = best.max(self.eval(a + b) + self.eval(a - b));
                    }
                }
                best
            }
        }
    }

    /// Half the circumference of the unit circle, `π(η)`.
    pub fn half_circumference(&self) -> f64 {
        0.5 * self.circumference()
    }

    pub fn circumference(&self) -> f64 {
        match &self.shape {
            Shape::L2 => TAU,
            Shape::L1(d) | Shape::LInf(d) | Shape::Poly(d) => d.total,
            Shape::Lp(_, t) => t.total,
        }
    }

    /// Boundary point of the unit circle in the direction of `u` (nonzero).
    pub fn project_to_circle(&self, u: Point) -> Point {
        u * (1.0 / self.eval(u))
    }

    /// Arc position of the direction of `u` (nonzero) in `[0, 2π(η))`, anticlockwise
    /// from the boundary point in direction `(1, 0)`.
    pub fn arc_position(&self, u: Point) -> f64 {
        match &self.shape {
            Shape::L2 => u.angle(),
            Shape::L1(d) | Shape::LInf(d) | Shape::Poly(d) => d.position(u),
            Shape::Lp(_, t) => t.position_of_angle(u.angle()),
        }
    }

    /// Unit-circle point at arc position `s` (taken modulo the circumference).
    pub fn point_at_arc(&self, s: f64) -> Point {
        match &self.shape {
            Shape::L2 => {
                let a = wrap(s, TAU);
                Point::new(a.cos(), a.sin())
            }
            Shape::L1(d) | Shape::LInf(d) | Shape::Poly(d) => d.point_at(s),
            Shape::Lp(p, t) => lp_boundary(*p, t.angle_at(s)),
        }
    }

    /// Anticlockwise arc length from unit-circle point `a` to `b`, in `[0, 2π(η))`.
    pub fn arc_length(&self, a: Point, b: Point) -> f64 {
        let total = self.circumference();
        let d = wrap(self.arc_position(b) - self.arc_position(a), total);
        if total - d < EPS {
            0.0
        } else {
            d
        }
    }

    fn check_on_circle(&self, a: Point) -> Result<()> {
        if !a.is_finite() || (self.eval(a) - 1.0).abs() > EPS {
            return Err(FtkError::Domain(format!("{a} is not on the unit circle of {}", self.label())));
        }
        Ok(())
    }

    /// Point reached from `a` by walking anticlockwise an arc of length `w`.
    pub fn arc_walk(&self, a: Point, w: f64) -> Result<Point> {
        self.check_on_circle(a)?;
        let total = self.circumference();
        if !(0.0..total).contains(&w) {
            return Err(FtkError::Domain(format!("arc length {w} outside [0, {total})")));
        }
        if w == 0.0 {
            return Ok(a);
        }
        Ok(self.point_at_arc(self.arc_position(a) + w))
    }
}

/// Sector of the unit disk spanned by the anticlockwise arc of length
/// `arc_length` starting at unit-circle point `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cone {
    start: Point,
    arc_length: f64,
    norm: Norm,
    start_position: f64,
}

impl Cone {
    pub fn new(norm: &Norm, start: Point, arc_length: f64) -> Result<Self> {
        norm.check_on_circle(start)?;
        let total = norm.circumference();
        if !(0.0..total).contains(&arc_length) {
            return Err(FtkError::Domain(format!("cone arc length {arc_length} outside [0, {total})")));
        }
        Ok(Cone { start, arc_length, norm: norm.clone(), start_position: norm.arc_position(start) })
    }

    /// Cone starting at arc position `start_position`.
    pub fn from_position(norm: &Norm, start_position: f64, arc_length: f64) -> Result<Self> {
        let start = norm.point_at_arc(start_position);
        let mut cone = Cone::new(norm, norm.project_to_circle(start), arc_length)?;
        cone.start_position = wrap(start_position, norm.circumference());
        Ok(cone)
    }

    pub fn start(&self) -> Point {
        self.start
    }

    pub fn start_position(&self) -> f64 {
        self.start_position
    }

    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    /// Arc offset of the direction of `p` from the cone start, in `[0, 2π(η))`.
    /// Values just below a full turn are folded to 0 so the start ray is inclusive.
    pub fn offset_of(&self, p: Point) -> f64 {
        let total = self.norm.circumference();
        let d = wrap(self.norm.arc_position(p) - self.start_position, total);
        if total - d < EPS {
            0.0
        } else {
            d
        }
    }

    /// Membership test on directions only (any radius).
    pub fn contains_direction(&self, p: Point) -> bool {
        if p.x == 0.0 && p.y == 0.0 {
            return true;
        }
        self.offset_of(p) <= self.arc_length + EPS
    }

    /// Membership test for points of the unit disk.
    pub fn contains(&self, p: Point) -> Result<bool> {
        if !p.is_finite() || self.norm.eval(p) > 1.0 + EPS {
            return Err(FtkError::Domain(format!("{p} lies outside the unit disk")));
        }
        Ok(self.contains_direction(p))
    }
}
