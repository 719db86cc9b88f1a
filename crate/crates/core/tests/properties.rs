use ftk::harness::io::{emit_instance, emit_tree, parse_instance, parse_tree};
use ftk::harness::{solve, RunOptions};
use ftk::l1::{wake_l1_disk, wake_triangle, Frame, StartConfig, TriangleRegion};
use ftk::{check, Instance, Norm, Point};
use proptest::prelude::*;

const SLACK: f64 = 1e-9;

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![
        Just(Norm::l1()),
        Just(Norm::l2()),
        Just(Norm::linf()),
        (1.1f64..6.0).prop_map(|p| Norm::lp(p).unwrap()),
        Just(Norm::regular_hexagon()),
    ]
}

/// Coordinate in [0, 1], snapped to a coarse grid half of the time so that ties and boundary hits occur.
fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![0.0f64..=1.0, (0u32..=8).prop_map(|k| k as f64 / 8.0)]
}

/// Point of the canonical triangle B=(0,0), C=(1,0), A=(1/2,1/2).
fn in_triangle() -> impl Strategy<Value = Point> {
    (unit(), unit()).prop_map(|(u, v)| {
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        Point::new(u + v / 2.0, v / 2.0)
    })
}

/// Point of the unit ℓ1 disk.
fn in_l1_disk() -> impl Strategy<Value = Point> {
    (unit(), unit()).prop_map(|(u, v)| {
        let (u, v) = (2.0 * u - 1.0, 2.0 * v - 1.0);
        Point::new((u + v) / 2.0, (u - v) / 2.0)
    })
}

fn start() -> impl Strategy<Value = StartConfig> {
    prop_oneof![
        Just(StartConfig::ApexA),
        Just(StartConfig::CornerB),
        Just(StartConfig::CornerC),
        (0.0f64..=0.5).prop_map(|t| StartConfig::TwoOnLeg(Point::new(t, t))),
        (0.0f64..=0.5).prop_map(|t| StartConfig::TwoOnLeg(Point::new(1.0 - t, t))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn instance_text_round_trips_exactly(
        norm in norm(),
        p0 in (-1e3f64..1e3, -1e3f64..1e3),
        pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..30),
    ) {
        let inst = Instance::new(
            norm,
            Point::new(p0.0, p0.1),
            pts.iter().map(|&(x, y)| Point::new(x, y)).collect(),
        ).unwrap();
        prop_assert_eq!(parse_instance(&emit_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn tree_file_round_trips_exactly(
        pts in prop::collection::vec(in_l1_disk(), 0..60),
        scale in 0.01f64..100.0,
    ) {
        let inst = Instance::new(Norm::l1(), Point::new(0.3, -0.7), pts.iter().map(|&p| p * scale).collect()).unwrap();
        let tree = wake_l1_disk(&inst).unwrap();
        let back = parse_tree(&emit_tree(&tree), inst.norm()).unwrap();
        check(&back, &inst).unwrap();
        prop_assert_eq!(back, tree);
    }

    #[test]
    fn triangle_makespan_is_at_most_twice_the_diameter(
        pts in prop::collection::vec(in_triangle(), 0..40),
        start in start(),
        k in 0usize..8,
        scale in 0.1f64..10.0,
    ) {
        let frame = Frame::dihedral(Point::new(1.5, -0.5), scale, k);
        let tri = TriangleRegion::new(
            frame.to_world(Point::new(0.0, 0.0)),
            frame.to_world(Point::new(1.0, 0.0)),
            frame.to_world(Point::new(0.5, 0.5)),
        ).unwrap();
        let world: Vec<Point> = pts.iter().map(|&p| frame.to_world(p)).collect();
        let start = match start {
            StartConfig::TwoOnLeg(p) => StartConfig::TwoOnLeg(frame.to_world(p)),
            s => s,
        };
        let norm = Norm::l1();
        let s = wake_triangle(&tri, &world, start).unwrap();
        prop_assert!(s.violations(&norm).is_empty());
        prop_assert!(s.makespan(&norm) <= 2.0 * tri.diameter() * (1.0 + SLACK));
    }

    #[test]
    fn l1_disk_makespan_is_at_most_five_radii(
        pts in prop::collection::vec(in_l1_disk(), 1..120),
        scale in 0.01f64..100.0,
    ) {
        let inst = Instance::new(Norm::l1(), Point::new(-4.0, 2.0), pts.iter().map(|&p| Point::new(-4.0, 2.0) + p * scale).collect()).unwrap();
        let o = solve("l1_five", &inst, &RunOptions::default()).unwrap();
        prop_assert!(o.within_bound);
        prop_assert!(o.makespan <= 5.0 * inst.radius() * (1.0 + SLACK));
    }

    #[test]
    fn strategies_stay_within_their_claims(
        norm in norm(),
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..80),
    ) {
        let inst = Instance::new(norm, Point::ORIGIN, pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap();
        for s in ["heap", "split_cone", "linear_split", "general"] {
            let o = solve(s, &inst, &RunOptions::default()).unwrap();
            prop_assert!(o.within_bound, "{}: {} > {}", s, o.makespan, o.report.claimed_bound);
        }
    }
}
