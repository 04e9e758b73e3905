use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{coord_integer, integer_coord, NetSpace, Point, SpaceKind};
use crate::error::{Error, Result};

pub const DEFAULT_ORBIT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DynamicsKind {
    /// z ↦ e^{iα} z on a circle, a disc, or every circle of a union.
    Rotation { angle: f64 },
    /// (z, z2) ↦ (e^{iα₁} z, e^{iα₂} z2).
    TorusRotation { angle1: f64, angle2: f64 },
    /// Elliptic Möbius map of the disc with fixed point `center`, conjugate
    /// to the rotation by `angle`.
    Moebius { center: Complex64, angle: f64 },
    /// Union components permuted by `perm`, each rotated by its own angle on
    /// the way.
    ComponentMap { perm: Vec<usize>, angles: Vec<f64> },
    /// k ↦ k + 1 on the compactified integers, ±∞ fixed.
    Translation,
    /// A bijection of the net given as a table; off-net points are projected
    /// to the nearest node first.
    Tabulated { perm: Vec<usize> },
}

/// An invertible map φ on a [`NetSpace`].
#[derive(Debug, Clone)]
pub struct Dynamics {
    kind: DynamicsKind,
    space: Arc<NetSpace>,
    orbit_cap: u64,
    inverse_table: Vec<usize>,
}

fn invert_perm(perm: &[usize]) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        if j >= perm.len() || inv[j] != usize::MAX {
            return None;
        }
        inv[j] = i;
    }
    Some(inv)
}

/// The involutive disc automorphism swapping 0 and `a`.
fn moebius_swap(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

fn rotate(z: Complex64, angle: f64) -> Complex64 {
    z * Complex64::from_polar(1.0, angle.rem_euclid(TAU))
}

impl Dynamics {
    pub fn new(space: Arc<NetSpace>, kind: DynamicsKind) -> Result<Self> {
        let bad = |msg: &str| Err(Error::UnsupportedDynamics(msg.to_string()));
        let mut inverse_table = Vec::new();
        match (&kind, space.kind()) {
            (DynamicsKind::Rotation { angle }, k) if angle.is_finite() => match k {
                SpaceKind::Circle { .. } | SpaceKind::Disc { .. } | SpaceKind::CircleUnion { .. } => {}
                _ => return bad("rotation needs a circle, disc or circle union"),
            },
            (DynamicsKind::TorusRotation { .. }, SpaceKind::Torus { .. }) => {}
            (DynamicsKind::Moebius { center, .. }, SpaceKind::Disc { .. }) => {
                if center.norm() >= 1.0 {
                    return bad("Möbius fixed point must lie inside the unit disc");
                }
            }
            (DynamicsKind::ComponentMap { perm, angles }, SpaceKind::CircleUnion { count, .. }) => {
                if perm.len() != *count || angles.len() != *count {
                    return bad("component map needs one target and one angle per component");
                }
                inverse_table = match invert_perm(perm) {
                    Some(inv) => inv,
                    None => return bad("component map is not a permutation"),
                };
            }
            (DynamicsKind::Translation, SpaceKind::Integers { .. }) => {}
            (DynamicsKind::Tabulated { perm }, _) => {
                if perm.len() != space.len() {
                    return bad("tabulated map must list one image per net point");
                }
                inverse_table = match invert_perm(perm) {
                    Some(inv) => inv,
                    None => return bad("tabulated map is not a bijection of the net"),
                };
            }
            _ => return bad("dynamics kind does not act on this space kind"),
        }
        Ok(Dynamics {
            kind,
            space,
            orbit_cap: DEFAULT_ORBIT_CAP,
            inverse_table,
        })
    }

    pub fn rotation(space: Arc<NetSpace>, angle: f64) -> Result<Self> {
        Dynamics::new(space, DynamicsKind::Rotation { angle })
    }

    pub fn with_orbit_cap(mut self, cap: u64) -> Self {
        self.orbit_cap = cap;
        self
    }

    pub fn kind(&self) -> &DynamicsKind {
        &self.kind
    }

    pub fn space(&self) -> &Arc<NetSpace> {
        &self.space
    }

    pub fn orbit_cap(&self) -> u64 {
        self.orbit_cap
    }

    /// Refuse orbit walks longer than the configured cap.
    pub fn check_orbit_len(&self, len: u64) -> Result<()> {
        if len > self.orbit_cap {
            return Err(Error::OrbitCapExceeded {
                requested: len,
                cap: self.orbit_cap,
            });
        }
        Ok(())
    }

    /// Analytic kinds evaluate φⁿ in closed form; tabulated maps project.
    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, DynamicsKind::Tabulated { .. })
    }

    /// Global isometry of the space metric.
    pub fn is_isometry(&self) -> bool {
        match (&self.kind, self.space.kind()) {
            (DynamicsKind::Rotation { .. }, SpaceKind::CircleUnion { count, .. }) => *count == 1,
            (DynamicsKind::Rotation { .. }, _) => true,
            (DynamicsKind::TorusRotation { .. }, _) => true,
            (DynamicsKind::ComponentMap { perm, angles }, SpaceKind::CircleUnion { .. }) => {
                perm.len() == 1 || (perm.iter().enumerate().all(|(i, &j)| i == j) && angles.iter().all(|a| *a == 0.0))
            }
            _ => false,
        }
    }

    /// Isometry of every component onto its image component.
    pub fn is_componentwise_isometry(&self) -> bool {
        self.is_isometry()
            || matches!(
                (&self.kind, self.space.kind()),
                (DynamicsKind::Rotation { .. }, SpaceKind::CircleUnion { .. })
                    | (DynamicsKind::ComponentMap { .. }, SpaceKind::CircleUnion { .. })
            )
    }

    /// Rotation angle when φ is a rotation of a single circle.
    pub fn circle_rotation_angle(&self) -> Option<f64> {
        match (&self.kind, self.space.kind()) {
            (DynamicsKind::Rotation { angle }, SpaceKind::Circle { .. }) => Some(*angle),
            _ => None,
        }
    }

    pub fn forward(&self, p: &Point) -> Point {
        self.iterate(p, 1)
    }

    pub fn inverse(&self, p: &Point) -> Point {
        self.iterate(p, -1)
    }

    /// φⁿ(p) for any integer n; closed form on analytic kinds.
    pub fn iterate(&self, p: &Point, n: i64) -> Point {
        if n == 0 {
            return *p;
        }
        match &self.kind {
            DynamicsKind::Rotation { angle } => Point {
                z: rotate(p.z, n as f64 * angle),
                ..*p
            },
            DynamicsKind::TorusRotation { angle1, angle2 } => Point {
                comp: p.comp,
                z: rotate(p.z, n as f64 * angle1),
                z2: rotate(p.z2, n as f64 * angle2),
            },
            DynamicsKind::Moebius { center, angle } => {
                let w = moebius_swap(*center, p.z);
                Point {
                    z: moebius_swap(*center, rotate(w, n as f64 * angle)),
                    ..*p
                }
            }
            DynamicsKind::ComponentMap { perm, angles } => {
                let mut comp = p.comp;
                let mut total = 0.0;
                if n > 0 {
                    for _ in 0..n {
                        total += angles[comp];
                        comp = perm[comp];
                    }
                } else {
                    for _ in 0..(-n) {
                        comp = self.inverse_table[comp];
                        total -= angles[comp];
                    }
                }
                Point {
                    comp,
                    z: rotate(p.z, total),
                    ..*p
                }
            }
            DynamicsKind::Translation => {
                let k = coord_integer(p.z.re);
                if k.is_infinite() {
                    return *p;
                }
                Point {
                    z: Complex64::new(integer_coord(k + n as f64), 0.0),
                    ..*p
                }
            }
            DynamicsKind::Tabulated { perm } => {
                let mut idx = self.space.nearest(p);
                if n > 0 {
                    for _ in 0..n {
                        idx = perm[idx];
                    }
                } else {
                    for _ in 0..(-n) {
                        idx = self.inverse_table[idx];
                    }
                }
                self.space.points()[idx]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::golden_angle;

    fn circle(n: usize) -> Arc<NetSpace> {
        Arc::new(NetSpace::circle(n).unwrap())
    }

    #[test]
    fn forward_inverse_identity_on_net() {
        let disc = Arc::new(NetSpace::disc(6, 16).unwrap());
        let cases = vec![
            Dynamics::rotation(circle(64), golden_angle()).unwrap(),
            Dynamics::new(
                disc.clone(),
                DynamicsKind::Moebius {
                    center: Complex64::new(0.3, -0.2),
                    angle: golden_angle(),
                },
            )
            .unwrap(),
            Dynamics::new(
                Arc::new(NetSpace::circle_union(3, 12, 0.5).unwrap()),
                DynamicsKind::ComponentMap {
                    perm: vec![1, 2, 0],
                    angles: vec![0.1, 0.2, 0.3],
                },
            )
            .unwrap(),
            Dynamics::new(Arc::new(NetSpace::integers(20).unwrap()), DynamicsKind::Translation)
                .unwrap(),
        ];
        for d in &cases {
            let h = d.space().resolution();
            for p in d.space().points() {
                let q = d.inverse(&d.forward(p));
                assert!(d.space().distance(p, &q) <= h, "{:?}", d.kind());
            }
        }
    }

    #[test]
    fn moebius_preserves_the_disc_and_fixes_its_center() {
        let disc = Arc::new(NetSpace::disc(5, 8).unwrap());
        let a = Complex64::new(0.4, 0.1);
        let d = Dynamics::new(disc, DynamicsKind::Moebius { center: a, angle: 1.0 }).unwrap();
        let c = d.forward(&Point::new(a));
        assert!((c.z - a).norm() < 1e-14);
        for p in d.space().points() {
            assert!(d.iterate(p, 7).z.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn closed_form_iterate_matches_stepping() {
        let d = Dynamics::rotation(circle(16), golden_angle()).unwrap();
        let mut p = Point::polar(1.0, 0.3);
        let s = p;
        for _ in 0..1000 {
            p = d.forward(&p);
        }
        assert!((p.z - d.iterate(&s, 1000).z).norm() < 1e-10);
    }

    #[test]
    fn translation_fixes_the_ends() {
        let d = Dynamics::new(Arc::new(NetSpace::integers(4).unwrap()), DynamicsKind::Translation)
            .unwrap();
        let top = Point::new(Complex64::new(1.0, 0.0));
        assert_eq!(d.forward(&top), top);
        let zero = Point::new(Complex64::new(0.0, 0.0));
        assert_eq!(coord_integer(d.iterate(&zero, 37).z.re), 37.0);
        assert_eq!(coord_integer(d.iterate(&zero, -5).z.re), -5.0);
    }

    #[test]
    fn rejects_mismatched_kinds() {
        assert!(Dynamics::new(circle(8), DynamicsKind::Translation).is_err());
        assert!(Dynamics::new(circle(4), DynamicsKind::Tabulated { perm: vec![0, 0, 1, 2] }).is_err());
        let disc = Arc::new(NetSpace::disc(3, 4).unwrap());
        assert!(Dynamics::new(
            disc,
            DynamicsKind::Moebius {
                center: Complex64::new(1.0, 0.0),
                angle: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn tabulated_cycles_net_points() {
        let s = circle(6);
        let d = Dynamics::new(s.clone(), DynamicsKind::Tabulated { perm: vec![1, 2, 0, 4, 5, 3] })
            .unwrap();
        assert!(!d.is_exact());
        let p = s.points()[0];
        assert_eq!(d.iterate(&p, 3), p);
        assert_eq!(d.iterate(&p, -1), s.points()[2]);
    }
}
