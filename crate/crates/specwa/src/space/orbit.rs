use serde::{Deserialize, Serialize};

use super::{Dynamics, Point};
use crate::error::{Error, Result};

/// φ⁰s, φ¹s, …, φⁿs (or the inverse orbit for n < 0).
pub fn orbit(dynamics: &Dynamics, s: &Point, n: i64) -> Result<Vec<Point>> {
    let len = n.unsigned_abs();
    dynamics.check_orbit_len(len)?;
    let step = n.signum();
    Ok((0..=len as i64).map(|k| dynamics.iterate(s, k * step)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    /// Smallest p ≤ horizon with sup over the net of d(φᵖx, x) < tol.
    pub period: Option<u64>,
    pub horizon: u64,
    pub tol: f64,
    /// Minimal (p, tol)-period of each net point, if any.
    #[serde(skip)]
    pub point_periods: Vec<Option<u64>>,
    /// Fraction of net points whose minimal period is p, for each p that occurs.
    pub periodic_fractions: Vec<(u64, f64)>,
    /// Fraction of net points with some period ≤ horizon.
    pub periodic_fraction: f64,
}

pub fn detect_period(dynamics: &Dynamics, horizon: u64, tol: f64) -> PeriodReport {
    let space = dynamics.space();
    let pts = space.points();
    let mut worst = vec![0.0f64; horizon as usize + 1];
    let mut point_periods = Vec::with_capacity(pts.len());
    for x in pts {
        let mut own = None;
        for p in 1..=horizon {
            let d = space.distance(&dynamics.iterate(x, p as i64), x);
            if d > worst[p as usize] {
                worst[p as usize] = d;
            }
            if own.is_none() && d < tol {
                own = Some(p);
            }
        }
        point_periods.push(own);
    }
    let period = (1..=horizon).find(|&p| worst[p as usize] < tol);

    let mut counts = std::collections::BTreeMap::new();
    for p in point_periods.iter().flatten() {
        *counts.entry(*p).or_insert(0usize) += 1;
    }
    let n = pts.len() as f64;
    let periodic_fractions: Vec<(u64, f64)> =
        counts.into_iter().map(|(p, c)| (p, c as f64 / n)).collect();
    let periodic_fraction = periodic_fractions.iter().fold(0.0, |acc, (_, f)| acc + f);
    PeriodReport {
        period,
        horizon,
        tol,
        point_periods,
        periodic_fractions,
        periodic_fraction,
    }
}

/// Finite-horizon wandering certificate for a single point.
///
/// The compactum notion quantifies over every n ∈ ℤ and every neighbourhood;
/// this only looks at one radius and |n| ≤ horizon, so it is labelled
/// horizon-limited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WanderingCertificate {
    pub wandering: bool,
    pub radius: f64,
    pub horizon: u64,
    /// Smallest distance found between two distinct images of the ball.
    pub min_separation: f64,
    /// First colliding pair of iterates, when not wandering.
    pub collision: Option<(i64, i64)>,
    pub horizon_limited: bool,
}

pub fn detect_wandering(
    dynamics: &Dynamics,
    s: &Point,
    radius: f64,
    horizon: u64,
) -> Result<WanderingCertificate> {
    let space = dynamics.space();
    let h = space.resolution();
    if radius <= 2.0 * h {
        return Err(Error::RadiusBelowResolution {
            radius,
            resolution: h,
        });
    }
    let ball: Vec<Point> = space
        .ball(s, radius)
        .into_iter()
        .map(|i| space.points()[i])
        .collect();
    let ball = if ball.is_empty() { vec![*s] } else { ball };
    let n = horizon as i64;
    let images: Vec<Vec<Point>> = (-n..=n)
        .map(|k| ball.iter().map(|b| dynamics.iterate(b, k)).collect())
        .collect();
    let centers: Vec<Point> = (-n..=n).map(|k| dynamics.iterate(s, k)).collect();

    // Closest centres first so collisions are found early.
    let mut pairs = Vec::new();
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            pairs.push((space.distance(&centers[i], &centers[j]), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut min_sep = f64::INFINITY;
    for (_, i, j) in pairs {
        let mut d = f64::INFINITY;
        for a in &images[i] {
            for b in &images[j] {
                d = d.min(space.distance(a, b));
            }
        }
        min_sep = min_sep.min(d);
        if d <= 2.0 * h {
            return Ok(WanderingCertificate {
                wandering: false,
                radius,
                horizon,
                min_separation: d,
                collision: Some((i as i64 - n, j as i64 - n)),
                horizon_limited: true,
            });
        }
    }
    Ok(WanderingCertificate {
        wandering: true,
        radius,
        horizon,
        min_separation: min_sep,
        collision: None,
        horizon_limited: true,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::space::{golden_angle, DynamicsKind, NetSpace};

    fn rot(n: usize, angle: f64) -> Dynamics {
        Dynamics::rotation(Arc::new(NetSpace::circle(n).unwrap()), angle).unwrap()
    }

    #[test]
    fn identity_orbit_repeats_the_point() {
        let d = rot(8, 0.0);
        let s = Point::new(Complex64::new(1.0, 0.0));
        let o = orbit(&d, &s, 5).unwrap();
        assert_eq!(o.len(), 6);
        assert!(o.iter().all(|p| (p.z - s.z).norm() < 1e-15));
    }

    #[test]
    fn quarter_turn_orbit() {
        let d = rot(8, TAU / 4.0);
        let o = orbit(&d, &Point::new(Complex64::new(1.0, 0.0)), 2).unwrap();
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
        for (p, (x, y)) in o.iter().zip(want) {
            assert!((p.z - Complex64::new(x, y)).norm() < 1e-15);
        }
    }

    #[test]
    fn golden_orbit_matches_angle_arithmetic() {
        let g = golden_angle();
        let d = rot(8, g);
        let o = orbit(&d, &Point::new(Complex64::new(1.0, 0.0)), 3).unwrap();
        for (k, p) in o.iter().enumerate() {
            let want = Complex64::from_polar(1.0, (k as f64 * g) % TAU);
            assert!((p.z - want).norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_orbit_and_cap() {
        let d = rot(8, 0.7).with_orbit_cap(10);
        let s = Point::polar(1.0, 0.2);
        let o = orbit(&d, &s, -3).unwrap();
        assert!((o[3].z - d.iterate(&s, -3).z).norm() < 1e-15);
        assert!(matches!(
            orbit(&d, &s, 11),
            Err(Error::OrbitCapExceeded { requested: 11, cap: 10 })
        ));
    }

    #[test]
    fn rational_rotation_period() {
        let d = rot(60, TAU / 3.0);
        let r = detect_period(&d, 10, 10.0 * d.space().resolution());
        assert_eq!(r.period, Some(3));
        assert_eq!(r.periodic_fraction, 1.0);
    }

    #[test]
    fn identity_has_period_one() {
        let d = rot(32, 0.0);
        assert_eq!(detect_period(&d, 5, 1e-9).period, Some(1));
    }

    #[test]
    fn golden_rotation_has_no_period_within_horizon() {
        let d = rot(2048, golden_angle());
        let tol = 10.0 * d.space().resolution();
        // Three-distance oracle: the closest return of the orbit within 200 steps.
        let theta = golden_angle() / TAU;
        let closest = (1..=200u32)
            .map(|p| {
                let x = (p as f64 * theta).fract();
                let frac = x.min(1.0 - x);
                2.0 * (std::f64::consts::PI * frac).sin()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(closest > tol);
        let r = detect_period(&d, 200, tol);
        assert_eq!(r.period, None);
        assert_eq!(r.periodic_fraction, 0.0);
    }

    #[test]
    fn golden_rotation_is_not_wandering() {
        let d = rot(512, golden_angle());
        for (i, s) in d.space().points().iter().enumerate().step_by(97) {
            let radius = 0.05 + 0.01 * i as f64 / 97.0;
            let c = detect_wandering(&d, s, radius, 50).unwrap();
            assert!(!c.wandering);
            let (a, b) = c.collision.unwrap();
            let ca = d.iterate(s, a);
            let cb = d.iterate(s, b);
            assert!(d.space().distance(&ca, &cb) < 2.0 * radius + 2.0 * d.space().resolution());
        }
    }

    #[test]
    fn translation_interior_point_wanders() {
        let space = Arc::new(NetSpace::integers(10_000).unwrap());
        let d = Dynamics::new(space, DynamicsKind::Translation).unwrap();
        let s = Point::new(Complex64::new(0.0, 0.0));
        let c = detect_wandering(&d, &s, 0.4, 50).unwrap();
        assert!(c.wandering && c.horizon_limited);
    }

    #[test]
    fn fixed_point_is_not_wandering() {
        let space = Arc::new(NetSpace::integers(100).unwrap());
        let d = Dynamics::new(space, DynamicsKind::Translation).unwrap();
        let top = Point::new(Complex64::new(1.0, 0.0));
        assert!(!detect_wandering(&d, &top, 0.1, 5).unwrap().wandering);
        let disc = Arc::new(NetSpace::disc(8, 16).unwrap());
        let d = Dynamics::rotation(disc, golden_angle()).unwrap();
        let o = Point::new(Complex64::new(0.0, 0.0));
        assert!(!detect_wandering(&d, &o, 0.6, 3).unwrap().wandering);
    }
}
