//! SVG drawings of wake-up trees.

use std::fmt::Write;

use crate::norm::NormKind;
use crate::point::Point;
use crate::wakeup::{Instance, WakeupTree};

/// Pixels per unit of the instance radius.
pub const PX_PER_RADIUS: f64 = 512.0;
const MARGIN: f64 = 24.0;
const SAMPLES: usize = 256;

/// Longest common prefix of two polylines, as a polyline (at least two points or empty).
fn shared_prefix(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut out = Vec::new();
    for (p, q) in a.iter().zip(b) {
        if p != q {
            break;
        }
        out.push(*p);
    }
    // the next segments may still overlap along one direction
    let k = out.len();
    if k >= 1 && k < a.len() && k < b.len() {
        let (o, pa, pb) = (a[k - 1], a[k], b[k]);
        let (da, db) = (pa - o, pb - o);
        if da.cross(db).abs() <= 1e-12 * da.l2() * db.l2() && da.dot(db) > 0.0 {
            out.push(if da.l2() <= db.l2() { pa } else { pb });
        }
    }
    if out.len() < 2 {
        out.clear();
    }
    out
}

/// Renders the disk boundary, robots and tree edges.
///
/// Edges carry arrowheads; stretches along which both robots of a wake-up
/// travel together are drawn thick.
pub fn render_svg(tree: &WakeupTree, instance: &Instance) -> String {
    let r = instance.radius();
    let r = if r > 0.0 { r } else { 1.0 };
    let scale = PX_PER_RADIUS / r;
    let p0 = instance.p0();
    let half = PX_PER_RADIUS + MARGIN;
    let size = 2.0 * half;
    let px = |p: Point| (half + (p.x - p0.x) * scale, half - (p.y - p0.y) * scale);
    let pt = |p: Point| {
        let (x, y) = px(p);
        format!("{x:.3},{y:.3}")
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}">"#
    );
    s.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" \
         orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333\"/></marker></defs>\n",
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let norm = instance.norm();
    let boundary: Vec<Point> = match norm.kind() {
        NormKind::Lp(p) if *p == 1.0 => {
            [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)].iter().map(|&(x, y)| p0 + Point::new(x, y) * r).collect()
        }
        NormKind::Lp(p) if p.is_infinite() => [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .iter()
            .map(|&(x, y)| p0 + Point::new(x, y) * r)
            .collect(),
        NormKind::Polygon(v) => v.iter().map(|&q| p0 + norm.project_to_circle(q) * r).collect(),
        NormKind::Lp(_) => {
            let total = norm.circumference();
            (0..SAMPLES).map(|k| p0 + norm.point_at_arc(total * k as f64 / SAMPLES as f64) * r).collect()
        }
    };
    let poly: Vec<String> = boundary.iter().map(|&q| pt(q)).collect();
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="none" stroke="#999" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
        poly.join(" ")
    );

    let children = tree.children_lists();
    for v in 1..tree.len() {
        let path: Vec<String> = tree.path(v).iter().map(|&q| pt(q)).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#333" stroke-width="1.2" marker-end="url(#arrow)"/>"##,
            path.join(" ")
        );
    }
    for kids in &children {
        if let [a, b] = kids[..] {
            let shared = shared_prefix(tree.path(a), tree.path(b));
            if !shared.is_empty() {
                let pts: Vec<String> = shared.iter().map(|&q| pt(q)).collect();
                let _ = writeln!(
                    s,
                    r##"<polyline points="{}" fill="none" stroke="#333" stroke-width="4"/>"##,
                    pts.join(" ")
                );
            }
        }
    }
    for v in 0..tree.len() {
        let (x, y) = px(tree.position(v));
        let (fill, rad) = if v == 0 { ("#c0392b", 6.0) } else { ("#2c7fb8", 3.5) };
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{rad}" fill="{fill}"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Norm;

    #[test]
    fn l1_disk_is_a_rotated_square_and_output_is_stable() {
        let inst = Instance::new(Norm::l1(), Point::ORIGIN, vec![Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
        let pos = inst.positions();
        let tree = WakeupTree::from_parts(
            pos.clone(),
            vec![None, Some(0), Some(1)],
            vec![vec![], vec![pos[0], pos[1]], vec![pos[1], pos[2]]],
            inst.norm(),
        )
        .unwrap();
        let a = render_svg(&tree, &inst);
        assert_eq!(a, render_svg(&tree, &inst));
        assert!(a.contains(r#"points="1048.000,536.000 536.000,24.000 24.000,536.000 536.000,1048.000""#), "{a}");
        assert_eq!(a.matches("marker-end").count(), 2);
    }

    #[test]
    fn shared_paths_are_thick() {
        let o = Point::ORIGIN;
        let m = Point::new(0.5, 0.0);
        let a = shared_prefix(&[o, m, Point::new(1.0, 0.0)], &[o, m, Point::new(0.5, 1.0)]);
        assert_eq!(a, vec![o, m]);
        let b = shared_prefix(&[o, Point::new(1.0, 0.0)], &[o, Point::new(0.4, 0.0)]);
        assert_eq!(b, vec![o, Point::new(0.4, 0.0)]);
        assert!(shared_prefix(&[o, Point::new(1.0, 0.0)], &[o, Point::new(0.0, 1.0)]).is_empty());
    }
}
