use ftk::exact::{optimal_tree, SolverLimits};
use ftk::l1::*;
use ftk::{check, makespan, Instance, Norm, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLACK: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the canonical triangle B=(0,0), C=(1,0), A=(1/2,1/2).
fn in_triangle(r: &mut ChaCha8Rng) -> Point {
    loop {
        let p = Point::new(r.gen::<f64>(), r.gen::<f64>() * 0.5);
        if p.y <= p.x && p.y <= 1.0 - p.x {
            return p;
        }
    }
}

/// Point of the triangle on a coarse grid, so that ties and boundary hits are frequent.
fn on_grid(r: &mut ChaCha8Rng, k: i32) -> Point {
    loop {
        let p = Point::new(r.gen_range(0..=2 * k) as f64 / (2 * k) as f64, r.gen_range(0..=k) as f64 / (2 * k) as f64);
        if p.y <= p.x + 1e-12 && p.y <= 1.0 - p.x + 1e-12 {
            return p;
        }
    }
}

fn in_square(r: &mut ChaCha8Rng, grid: Option<i32>) -> Point {
    loop {
        let p = match grid {
            None => Point::new(r.gen::<f64>(), r.gen::<f64>() - 0.5),
            Some(k) => Point::new(r.gen_range(0..=k) as f64 / k as f64, r.gen_range(-k..=k) as f64 / (2 * k) as f64),
        };
        if p.y.abs() <= p.x && p.y.abs() <= 1.0 - p.x {
            return p;
        }
    }
}

fn triangle_sample(seed: u64, n: usize) -> Vec<Point> {
    let mut r = rng(seed);
    match seed % 4 {
        0 => (0..n).map(|_| in_triangle(&mut r)).collect(),
        1 => (0..n).map(|_| on_grid(&mut r, 4)).collect(),
        2 => (0..n).map(|_| on_grid(&mut r, 8)).collect(),
        _ => {
            let c = in_triangle(&mut r);
            (0..n)
                .map(|_| {
                    let q = c + Point::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5) * 0.1;
                    let q = Point::new(q.x.clamp(0.0, 1.0), q.y.max(0.0));
                    Point::new(q.x, q.y.min(q.x).min(1.0 - q.x))
                })
                .collect()
        }
    }
}

fn assert_triangle(tri: &TriangleRegion, pts: &[Point], start: StartConfig) {
    let s = wake_triangle(tri, pts, start).unwrap_or_else(|e| panic!("{start:?} {pts:?}: {e}"));
    let norm = Norm::l1();
    let v = s.violations(&norm);
    assert!(v.is_empty(), "{v:?}");
    let m = s.makespan(&norm);
    assert!(m <= 2.0 * tri.diameter() * (1.0 + SLACK), "makespan {m} > 2 for {start:?} with {pts:?}");
}

#[test]
fn monotone_triple_examples() {
    let pts =
        [Point::new(0.0, 0.0), Point::new(0.5, 0.5), Point::new(1.0, 1.0), Point::new(2.0, -5.0), Point::new(3.0, 7.0)];
    let (i, j, k) = monotone_triple(&pts).unwrap();
    assert_eq!((i, j, k), (0, 1, 2));
    assert!(monotone_triple(&pts[..4]).is_err());
}

#[test]
fn monotone_triple_matches_brute_force() {
    let mut r = rng(7);
    for round in 0..500 {
        let n = 5 + round % 6;
        let k = if round % 2 == 0 { 3 } else { 1000 };
        let pts: Vec<Point> = (0..n).map(|_| Point::new(r.gen_range(0..k) as f64, r.gen_range(0..k) as f64)).collect();
        let (i, j, l) = monotone_triple(&pts).unwrap();
        assert!(i != j && j != l && i != l);
        assert!(is_monotone(&[pts[i], pts[j], pts[l]]), "{pts:?}");
    }
}

#[test]
fn monotone_pieces_counts() {
    let z = |x: f64, y: f64| Point::new(x, y);
    assert_eq!(monotone_pieces(&[z(0.0, 0.0), z(1.0, 1.0), z(2.0, 3.0)]), 1);
    assert_eq!(monotone_pieces(&[z(0.0, 0.0), z(1.0, 1.0), z(2.0, 0.0)]), 2);
    assert_eq!(monotone_pieces(&[z(0.0, 0.0), z(1.0, 1.0), z(2.0, 0.0), z(3.0, 1.0)]), 3);
}

#[test]
fn square5_rejects_six() {
    let sq = SquareRegion::new(Point::ORIGIN, 1.0).unwrap();
    let pts = vec![Point::new(0.5, 0.0); 6];
    assert!(wake_square5(&sq, &pts, Point::ORIGIN).is_err());
}

#[test]
fn square5_within_two() {
    let norm = Norm::l1();
    for seed in 0..3000u64 {
        let mut r = rng(seed);
        let n = 1 + (seed % 5) as usize;
        let grid = match seed % 3 {
            0 => None,
            1 => Some(2),
            _ => Some(4),
        };
        let pts: Vec<Point> = (0..n).map(|_| in_square(&mut r, grid)).collect();
        let corner = Point::new(3.0, -1.0);
        let diag = 2.5;
        let sq = SquareRegion::new(corner, diag).unwrap();
        let world: Vec<Point> = pts.iter().map(|&p| corner + p * diag).collect();
        // every corner is a valid start
        for start in sq.corners() {
            let s = wake_square5(&sq, &world, start).unwrap_or_else(|e| panic!("{world:?}: {e}"));
            assert!(s.violations(&norm).is_empty());
            let m = s.makespan(&norm);
            assert!(m <= 2.0 * diag * (1.0 + SLACK), "{m} for {world:?} from {start}");
        }
    }
}

#[test]
fn square5_not_worse_than_twice_optimum_lower_bound() {
    let norm = Norm::l1();
    for seed in 0..40u64 {
        let mut r = rng(1000 + seed);
        let pts: Vec<Point> = (0..5).map(|_| in_square(&mut r, None)).collect();
        let sq = SquareRegion::new(Point::ORIGIN, 1.0).unwrap();
        let ours = wake_square5(&sq, &pts, Point::ORIGIN).unwrap().makespan(&norm);
        let inst = Instance::new(Norm::l1(), Point::ORIGIN, pts).unwrap();
        let opt = optimal_tree(&inst, &SolverLimits::default()).unwrap().optimum;
        assert!(opt <= ours + 1e-9, "exact {opt} above constructive {ours}");
    }
}

#[test]
fn square6_cases_and_return() {
    let norm = Norm::l1();
    let z = |x: f64, y: f64| Point::new(x, y);
    // staircase: case 1
    let c1 = [z(0.1, 0.05), z(0.2, 0.1), z(0.3, 0.2), z(0.5, -0.3), z(0.6, 0.1), z(0.7, -0.2)];
    assert_eq!(s6_case(&c1).unwrap(), 1);
    // alternating fan around the x-axis with nothing monotone of length two: case 3
    let c3 = [z(0.2, 0.19), z(0.2, -0.19), z(0.5, 0.0), z(0.3, 0.05), z(0.35, -0.3), z(0.1, -0.05)];
    let sq = SquareRegion::new(Point::ORIGIN, 1.0).unwrap();
    for pts in [&c1[..], &c3[..]] {
        let s = wake_square6_return(&sq, pts, Point::ORIGIN).unwrap();
        assert!(s.violations(&norm).is_empty());
        assert!(s.completion_time(&norm) <= 3.0 + SLACK);
        let fin = s.final_positions();
        assert_eq!(fin.len(), 7);
        assert!(fin.iter().all(|(_, p)| p.approx_eq(Point::ORIGIN, 1e-12)));
    }
}

#[test]
fn square6_random_return_within_three() {
    let norm = Norm::l1();
    let mut seen = [0usize; 4];
    for seed in 0..20000u64 {
        let mut r = rng(50_000 + seed);
        let grid = match seed % 3 {
            0 => None,
            1 => Some(4),
            _ => Some(8),
        };
        let pts: Vec<Point> = (0..6).map(|_| in_square(&mut r, grid)).collect();
        seen[s6_case(&pts).unwrap_or_else(|e| panic!("{pts:?}: {e}")) as usize] += 1;
        let sq = SquareRegion::new(Point::ORIGIN, 1.0).unwrap();
        let s = wake_square6_return(&sq, &pts, Point::ORIGIN).unwrap_or_else(|e| panic!("{pts:?}: {e}"));
        assert!(s.violations(&norm).is_empty());
        let t = s.completion_time(&norm);
        assert!(t <= 3.0 + SLACK, "{t} for {pts:?}");
        assert!(s.final_positions().iter().all(|(_, p)| p.approx_eq(Point::ORIGIN, 1e-12)));
    }
    assert!(seen[1] > 0 && seen[2] > 0, "{seen:?}");
}

#[test]
fn triangle_empty_and_single() {
    let tri = TriangleRegion::canonical(Point::ORIGIN, 1.0).unwrap();
    let norm = Norm::l1();
    let s = wake_triangle(&tri, &[], StartConfig::CornerB).unwrap();
    assert_eq!(s.makespan(&norm), 0.0);
    let s = wake_triangle(&tri, &[Point::new(0.5, 0.5)], StartConfig::ApexA).unwrap();
    assert_eq!(s.makespan(&norm), 0.0);
    let s = wake_triangle(&tri, &[Point::new(1.0, 0.0)], StartConfig::CornerB).unwrap();
    assert!((s.makespan(&norm) - 1.0).abs() < 1e-12);
}

#[test]
fn triangle_rejects_outside() {
    let tri = TriangleRegion::canonical(Point::ORIGIN, 1.0).unwrap();
    assert!(wake_triangle(&tri, &[Point::new(0.5, 0.6)], StartConfig::CornerB).is_err());
    assert!(wake_triangle(&tri, &[], StartConfig::TwoOnLeg(Point::new(0.5, 0.1))).is_err());
}

#[test]
fn triangle_random_all_starts() {
    for seed in 0..4000u64 {
        let n = 1 + (seed as usize * 7) % 40;
        let local = triangle_sample(seed, n);
        // a rotated, reflected and scaled copy
        let frame = Frame::dihedral(Point::new(-2.0, 1.5), 3.0, (seed % 8) as usize);
        let tri = TriangleRegion::new(
            frame.to_world(Point::new(0.0, 0.0)),
            frame.to_world(Point::new(1.0, 0.0)),
            frame.to_world(Point::new(0.5, 0.5)),
        )
        .unwrap();
        let pts: Vec<Point> = local.iter().map(|&p| frame.to_world(p)).collect();
        let t = (seed % 11) as f64 / 20.0;
        let leg_point = if seed % 2 == 0 { Point::new(t, t) } else { Point::new(1.0 - t, t) };
        for start in [
            StartConfig::ApexA,
            StartConfig::CornerB,
            StartConfig::CornerC,
            StartConfig::TwoOnLeg(frame.to_world(leg_point)),
        ] {
            assert_triangle(&tri, &pts, start);
        }
    }
}

#[test]
fn triangle_large_instances() {
    for seed in 0..40u64 {
        let pts = triangle_sample(seed, 2000);
        let tri = TriangleRegion::canonical(Point::ORIGIN, 1.0).unwrap();
        assert_triangle(&tri, &pts, StartConfig::CornerB);
        assert_triangle(&tri, &pts, StartConfig::ApexA);
    }
}

#[test]
fn triangle_collinear_chain_does_not_trip_depth_guard() {
    let pts: Vec<Point> = (1..=3000).map(|k| Point::new(0.5 - k as f64 / 6001.0, 0.5 - k as f64 / 6001.0)).collect();
    let tri = TriangleRegion::canonical(Point::ORIGIN, 1.0).unwrap();
    assert_triangle(&tri, &pts, StartConfig::ApexA);
}

fn disk_points(seed: u64, n: usize) -> Vec<Point> {
    let mut r = rng(seed);
    let grid = seed % 3 == 1;
    (0..n)
        .map(|_| loop {
            let p = if grid {
                Point::new(r.gen_range(-4..=4) as f64 / 4.0, r.gen_range(-4..=4) as f64 / 4.0)
            } else {
                Point::new(r.gen::<f64>() * 2.0 - 1.0, r.gen::<f64>() * 2.0 - 1.0)
            };
            if p.l1() <= 1.0 {
                break p;
            }
        })
        .collect()
}

fn disk_check(pts: Vec<Point>) -> f64 {
    let inst = Instance::new(Norm::l1(), Point::ORIGIN, pts).unwrap();
    let tree = wake_l1_disk(&inst).unwrap_or_else(|e| panic!("{:?}: {e}", inst.sleepers()));
    check(&tree, &inst).unwrap();
    let m = makespan(&tree, inst.norm()).unwrap();
    assert!(m <= 5.0 * inst.radius() * (1.0 + SLACK), "{m} for {:?}", inst.sleepers());
    m
}

#[test]
fn disk_cross_is_exactly_five() {
    let pts = vec![Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(-1.0, 0.0), Point::new(0.0, -1.0)];
    assert!((disk_check(pts) - 5.0).abs() < 1e-12);
}

#[test]
fn disk_single_point() {
    assert!((disk_check(vec![Point::new(0.3, 0.2)]) - 0.5).abs() < 1e-12);
}

#[test]
fn disk_every_team_size() {
    for n in 0..=60 {
        for seed in 0..60u64 {
            disk_check(disk_points(seed * 1000 + n as u64, n));
        }
    }
}

#[test]
fn disk_thousand_points() {
    for seed in 0..120u64 {
        disk_check(disk_points(seed, 1000));
    }
}

#[test]
fn disk_rejects_other_norms() {
    let inst = Instance::new(Norm::l2(), Point::ORIGIN, vec![Point::new(0.5, 0.0)]).unwrap();
    assert!(wake_l1_disk(&inst).is_err());
}

#[test]
fn disk_never_beats_optimum() {
    for seed in 0..30u64 {
        let n = 1 + (seed % 8) as usize;
        let pts = disk_points(9000 + seed, n);
        let ours = disk_check(pts.clone());
        let inst = Instance::new(Norm::l1(), Point::ORIGIN, pts).unwrap();
        let opt = optimal_tree(&inst, &SolverLimits::default()).unwrap().optimum;
        assert!(opt <= ours + 1e-9, "exact {opt} above constructive {ours}");
    }
}

#[test]
fn densest_square_ties_prefer_east() {
    let pts = vec![Point::new(0.5, 0.0), Point::new(0.0, 0.5), Point::new(0.5, 0.5)];
    let inst = Instance::new(Norm::l1(), Point::ORIGIN, pts).unwrap();
    // (0.5, 0.5) lies on the shared boundary and counts for East
    assert_eq!(square_partition(&inst)[0].len(), 2);
    assert_eq!(densest_square(&inst), Quadrant::East);
}
