//! Instance generators, deterministic per seed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FtkError, Result};
use crate::exact::{square_13_6_instance, unif_points};
use crate::norm::{Norm, NormKind};
use crate::point::Point;
use crate::wakeup::Instance;

/// Instance families understood by [`generate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenKind {
    /// `n` points equally spaced in arc length on the unit circle.
    UniformCircle(usize),
    /// `n` points uniform in the unit disk.
    RandomDisk(usize),
    /// `n` points in the cone of arc length `w` starting at `(1, 0)`.
    RandomCone(usize, f64),
    /// The four unit vectors `(1,0)`, `(−1,0)`, `(0,1)`, `(0,−1)`.
    Cross4,
    /// Six sleepers in an ℓ1 square that need `13/6` of its diameter.
    Square13_6(f64),
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenKind::UniformCircle(n) => write!(f, "uniform_circle:{n}"),
            GenKind::RandomDisk(n) => write!(f, "random_disk:{n}"),
            GenKind::RandomCone(n, w) => write!(f, "random_cone:{n}:{w}"),
            GenKind::Cross4 => write!(f, "cross4"),
            GenKind::Square13_6(e) => write!(f, "square13_6:{e}"),
        }
    }
}

impl FromStr for GenKind {
    type Err = FtkError;

    /// `uniform_circle:N`, `random_disk:N`, `random_cone:N:W`, `cross4`, `square13_6[:EPS]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || FtkError::InvalidInput(format!("bad generator '{s}'"));
        let int = |k: usize| parts.get(k).ok_or_else(bad)?.parse::<usize>().map_err(|_| bad());
        let real = |k: usize| parts.get(k).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
        let kind = match parts[0] {
            "uniform_circle" => GenKind::UniformCircle(int(1)?),
            "random_disk" => GenKind::RandomDisk(int(1)?),
            "random_cone" => GenKind::RandomCone(int(1)?, real(2)?),
            "cross4" => GenKind::Cross4,
            "square13_6" => GenKind::Square13_6(if parts.len() > 1 { real(1)? } else { 1.0 / 6.0 }),
            other => return Err(FtkError::InvalidInput(format!("unknown generator '{other}'"))),
        };
        let arity = match kind {
            GenKind::Cross4 => 1,
            GenKind::RandomCone(..) => 3,
            GenKind::Square13_6(_) => parts.len().max(1),
            _ => 2,
        };
        if parts.len() != arity {
            return Err(bad());
        }
        Ok(kind)
    }
}

/// Half-width of the axis box holding the unit disk of `norm`.
fn box_radius(norm: &Norm) -> f64 {
    match norm.kind() {
        NormKind::Lp(_) => 1.0,
        NormKind::Polygon(v) => v.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max),
    }
}

/// Draws an instance centred at the origin.
pub fn generate(kind: GenKind, norm: &Norm, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sleepers = match kind {
        GenKind::UniformCircle(n) => unif_points(n, norm),
        GenKind::RandomDisk(n) => {
            let r = box_radius(norm);
            (0..n)
                .map(|_| loop {
                    let p = Point::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r));
                    if norm.eval(p) <= 1.0 {
                        break p;
                    }
                })
                .collect()
        }
        GenKind::RandomCone(n, w) => {
            let total = norm.circumference();
            if !(0.0..total).contains(&w) {
                return Err(FtkError::InvalidInput(format!("cone width {w} outside [0, {total})")));
            }
            (0..n)
                .map(|_| {
                    let s = rng.gen_range(0.0..=w);
                    norm.point_at_arc(s) * rng.gen::<f64>().sqrt()
                })
                .collect()
        }
        GenKind::Cross4 => [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
            .iter()
            .map(|&(x, y)| norm.project_to_circle(Point::new(x, y)))
            .collect(),
        GenKind::Square13_6(eps) => return square_13_6_instance(eps),
    };
    Instance::new(norm.clone(), Point::ORIGIN, sleepers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross4_l1() {
        let i = generate(GenKind::Cross4, &Norm::l1(), 0).unwrap();
        let want = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
        for (p, w) in i.sleepers().iter().zip(want) {
            assert_eq!((p.x, p.y), w);
        }
    }

    #[test]
    fn uniform_circle_four_in_l2() {
        let i = generate(GenKind::UniformCircle(4), &Norm::l2(), 0).unwrap();
        for (k, p) in i.sleepers().iter().enumerate() {
            let a = std::f64::consts::FRAC_PI_2 * k as f64;
            assert!(p.approx_eq(Point::new(a.cos(), a.sin()), 1e-12), "{p}");
        }
    }

    #[test]
    fn random_disk_is_deterministic_and_inside() {
        for norm in [Norm::l1(), Norm::l2(), Norm::linf(), Norm::lp(3.0).unwrap(), Norm::regular_hexagon()] {
            let a = generate(GenKind::RandomDisk(100), &norm, 7).unwrap();
            let b = generate(GenKind::RandomDisk(100), &norm, 7).unwrap();
            assert_eq!(a, b);
            assert!(a.radius() <= 1.0);
            let c = generate(GenKind::RandomDisk(100), &norm, 8).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn random_cone_stays_in_cone() {
        let norm = Norm::l2();
        let i = generate(GenKind::RandomCone(500, 0.5), &norm, 3).unwrap();
        assert!(i.sleepers().iter().all(|p| p.angle() <= 0.5 + 1e-12 && norm.eval(*p) <= 1.0 + 1e-12));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("cross4".parse::<GenKind>().unwrap(), GenKind::Cross4);
        assert_eq!("random_disk:12".parse::<GenKind>().unwrap(), GenKind::RandomDisk(12));
        assert_eq!("random_cone:5:0.25".parse::<GenKind>().unwrap(), GenKind::RandomCone(5, 0.25));
        assert_eq!("square13_6".parse::<GenKind>().unwrap(), GenKind::Square13_6(1.0 / 6.0));
        assert!("random_disk".parse::<GenKind>().is_err());
        assert!("spiral:3".parse::<GenKind>().is_err());
        for k in [GenKind::UniformCircle(6), GenKind::RandomCone(3, 0.5), GenKind::Square13_6(0.1)] {
            assert_eq!(k.to_string().parse::<GenKind>().unwrap(), k);
        }
    }
}
