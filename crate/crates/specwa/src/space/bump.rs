use std::sync::Arc;

use super::{Dynamics, NetSpace, Point};
use crate::algebra::AlgElement;
use crate::error::{Error, Result};

/// f(t) = max(0, 1 − d(t, s)/radius)^α.
///
/// The Lip_α seminorm is at most radius^{−α}: t ↦ max(0, 1 − t) is
/// 1-Lipschitz and x ↦ x^α is α-Hölder with constant 1 on [0, 1].
pub fn bump(space: &Arc<NetSpace>, s: &Point, radius: f64, alpha: f64) -> Result<AlgElement> {
    let h = space.resolution();
    if radius <= 2.0 * h {
        return Err(Error::RadiusBelowResolution {
            radius,
            resolution: h,
        });
    }
    let sp = space.clone();
    let center = *s;
    Ok(AlgElement::from_fn(space.clone(), move |p| {
        let t = (1.0 - sp.distance(p, &center) / radius).max(0.0);
        let v = if alpha == 1.0 { t } else { t.powf(alpha) };
        num_complex::Complex64::new(v.min(1.0), 0.0)
    }))
}

/// A bump g_m at `s` with g_m(s) = 1 that vanishes at φⁱ(s) for 0 < |i| < m.
///
/// The radius is 0.45 times the smallest distance from `s` to those orbit
/// points, so the orbit stays strictly outside the support.
pub fn peak_sequence(dynamics: &Dynamics, s: &Point, m: u64, alpha: f64) -> Result<AlgElement> {
    let space = dynamics.space();
    let h = space.resolution();
    if m <= 1 {
        return bump(space, s, 0.25 * space.diameter(), alpha);
    }
    let mut separation = f64::INFINITY;
    for i in 1..m as i64 {
        for k in [i, -i] {
            separation = separation.min(space.distance(s, &dynamics.iterate(s, k)));
        }
    }
    let radius = 0.45 * separation;
    if separation < 10.0 * h || radius <= 2.0 * h {
        return Err(Error::PointNearlyPeriodic {
            separation,
            resolution: h,
        });
    }
    bump(space, s, radius, alpha)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use num_complex::Complex64;

    use super::*;
    use crate::algebra::holder_seminorm;
    use crate::space::golden_angle;

    fn circle(n: usize) -> Arc<NetSpace> {
        Arc::new(NetSpace::circle(n).unwrap())
    }

    #[test]
    fn normalization_and_antipode() {
        // Chordal metric: the antipode sits at distance 2, the diameter.
        let c = circle(128);
        let s = c.points()[0];
        let f = bump(&c, &s, 2.0, 1.0).unwrap();
        assert_eq!(f.eval_at(&s).unwrap(), Complex64::new(1.0, 0.0));
        let anti = Point::new(-s.z);
        assert_eq!(f.eval_at(&anti).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lipschitz_seminorm_of_small_bump() {
        let c = circle(512);
        let f = bump(&c, &c.points()[7], 0.1, 1.0).unwrap();
        let semi = holder_seminorm(&f, 1.0, f64::INFINITY);
        assert!(semi <= 20.0 && semi > 5.0, "{semi}");
    }

    #[test]
    fn rejects_radius_below_resolution() {
        let c = circle(16);
        let h = c.resolution();
        assert!(matches!(
            bump(&c, &c.points()[0], 1.5 * h, 1.0),
            Err(Error::RadiusBelowResolution { .. })
        ));
    }

    #[test]
    fn peak_sequence_vanishes_on_orbit() {
        let c = circle(1024);
        let d = Dynamics::rotation(c.clone(), golden_angle()).unwrap();
        let s = c.points()[0];
        let g = peak_sequence(&d, &s, 5, 1.0).unwrap();
        assert_eq!(g.eval_at(&s).unwrap().re, 1.0);
        assert!((g.sup_norm() - 1.0).abs() < 1e-15);
        for i in 1..5i64 {
            for k in [i, -i] {
                assert_eq!(g.eval_at(&d.iterate(&s, k)).unwrap().norm(), 0.0);
            }
        }
        assert!(peak_sequence(&d, &s, 1, 0.5).is_ok());
    }

    #[test]
    fn periodic_point_is_refused() {
        let c = circle(60);
        let d = Dynamics::rotation(c.clone(), TAU / 3.0).unwrap();
        assert!(matches!(
            peak_sequence(&d, &c.points()[0], 5, 1.0),
            Err(Error::PointNearlyPeriodic { .. })
        ));
    }
}
