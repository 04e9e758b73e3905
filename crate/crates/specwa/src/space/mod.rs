//! Finite ε-net models of compact metric spaces and the homeomorphisms
//! acting on them.
//!
//! Every space kind here has an analytic description, so points off the net
//! (images of net points under the dynamics, for instance) are still exact
//! points of the underlying compactum. The net only decides where functions
//! are sampled and where suprema are taken.

mod bump;
mod dynamics;
mod orbit;

pub use bump::{bump, peak_sequence};
pub use dynamics::{Dynamics, DynamicsKind, DEFAULT_ORBIT_CAP};
pub use orbit::{detect_period, detect_wandering, orbit, PeriodReport, WanderingCertificate};

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2π(√5 − 1)/2, the canonical aperiodic rotation angle.
pub fn golden_angle() -> f64 {
    TAU * (5f64.sqrt() - 1.0) / 2.0
}

/// A point of one of the modelled compacta.
///
/// `comp` is the component index for disjoint unions, `z` the local complex
/// coordinate and `z2` the second coordinate on a torus (zero elsewhere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub comp: usize,
    pub z: Complex64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub z2: Complex64,
}

fn is_zero(z: &Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl Point {
    pub fn new(z: Complex64) -> Self {
        Point {
            comp: 0,
            z,
            z2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn on(comp: usize, z: Complex64) -> Self {
        Point {
            comp,
            z,
            z2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(Complex64::from_polar(r, theta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceKind {
    /// Unit circle sampled at `n` equispaced nodes.
    Circle { n: usize },
    /// Closed unit disc sampled on `circles` concentric circles of radii
    /// j/(circles-1) (the first one being the centre) with `per_circle` nodes each.
    Disc { circles: usize, per_circle: usize },
    /// Product of two unit circles.
    Torus { n1: usize, n2: usize },
    /// Disjoint union of `count` unit circles whose centres lie on the real
    /// axis at spacing 2 + `gap`.
    CircleUnion { count: usize, n: usize, gap: f64 },
    /// Two-point compactification of ℤ, embedded in [-1, 1] by
    /// k ↦ k/(1+|k|) with ±∞ at ±1; the net holds -n..=n and both ends.
    Integers { n: usize },
    /// Arbitrary finite point set with the Euclidean metric of ℂ and a
    /// declared resolution.
    Generic { resolution: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetSpace {
    kind: SpaceKind,
    points: Vec<Point>,
    resolution: f64,
}

impl NetSpace {
    pub fn circle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Invalid("circle net needs at least 3 nodes".into()));
        }
        let points = (0..n)
            .map(|k| Point::polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        Ok(NetSpace {
            kind: SpaceKind::Circle { n },
            points,
            resolution: 2.0 * (PI / (2.0 * n as f64)).sin(),
        })
    }

    pub fn disc(circles: usize, per_circle: usize) -> Result<Self> {
        if circles < 2 || per_circle < 3 {
            return Err(Error::Invalid(
                "disc net needs at least 2 circles and 3 nodes per circle".into(),
            ));
        }
        let mut points = vec![Point::new(Complex64::new(0.0, 0.0))];
        for j in 1..circles {
            let t = j as f64 / (circles - 1) as f64;
            for k in 0..per_circle {
                points.push(Point::polar(t, TAU * k as f64 / per_circle as f64));
            }
        }
        let radial = 0.5 / (circles - 1) as f64;
        let angular = 2.0 * (PI / (2.0 * per_circle as f64)).sin();
        Ok(NetSpace {
            kind: SpaceKind::Disc { circles, per_circle },
            points,
            resolution: radial + angular,
        })
    }

    pub fn torus(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 3 || n2 < 3 {
            return Err(Error::Invalid("torus net needs at least 3 nodes per factor".into()));
        }
        let mut points = Vec::with_capacity(n1 * n2);
        for a in 0..n1 {
            for b in 0..n2 {
                points.push(Point {
                    comp: 0,
                    z: Complex64::from_polar(1.0, TAU * a as f64 / n1 as f64),
                    z2: Complex64::from_polar(1.0, TAU * b as f64 / n2 as f64),
                });
            }
        }
        let h1 = 2.0 * (PI / (2.0 * n1 as f64)).sin();
        let h2 = 2.0 * (PI / (2.0 * n2 as f64)).sin();
        Ok(NetSpace {
            kind: SpaceKind::Torus { n1, n2 },
            points,
            resolution: h1.hypot(h2),
        })
    }

    pub fn circle_union(count: usize, n: usize, gap: f64) -> Result<Self> {
        if count < 1 || n < 3 || gap <= 0.0 || !gap.is_finite() {
            return Err(Error::Invalid(
                "circle union needs count >= 1, n >= 3 and a positive gap".into(),
            ));
        }
        let mut points = Vec::with_capacity(count * n);
        for c in 0..count {
            for k in 0..n {
                points.push(Point::on(c, Complex64::from_polar(1.0, TAU * k as f64 / n as f64)));
            }
        }
        Ok(NetSpace {
            kind: SpaceKind::CircleUnion { count, n, gap },
            points,
            resolution: 2.0 * (PI / (2.0 * n as f64)).sin(),
        })
    }

    pub fn integers(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Invalid("integer net needs n >= 1".into()));
        }
        let mut points = vec![Point::new(Complex64::new(-1.0, 0.0))];
        for k in -(n as i64)..=(n as i64) {
            points.push(Point::new(Complex64::new(integer_coord(k as f64), 0.0)));
        }
        points.push(Point::new(Complex64::new(1.0, 0.0)));
        Ok(NetSpace {
            kind: SpaceKind::Integers { n },
            points,
            resolution: 0.5 / (n as f64 + 1.0),
        })
    }

    pub fn generic(points: Vec<Point>, resolution: f64) -> Result<Self> {
        if points.is_empty() || !(resolution > 0.0) {
            return Err(Error::Invalid(
                "generic net needs points and a positive resolution".into(),
            ));
        }
        Ok(NetSpace {
            kind: SpaceKind::Generic { resolution },
            points,
            resolution,
        })
    }

    /// Rebuild a net from its kind; generic nets carry their points
    /// elsewhere and cannot be rebuilt.
    pub fn from_kind(kind: &SpaceKind) -> Result<Self> {
        match *kind {
            SpaceKind::Circle { n } => NetSpace::circle(n),
            SpaceKind::Disc { circles, per_circle } => NetSpace::disc(circles, per_circle),
            SpaceKind::Torus { n1, n2 } => NetSpace::torus(n1, n2),
            SpaceKind::CircleUnion { count, n, gap } => NetSpace::circle_union(count, n, gap),
            SpaceKind::Integers { n } => NetSpace::integers(n),
            SpaceKind::Generic { .. } => Err(Error::Invalid("a generic net cannot be rebuilt from its kind".into())),
        }
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mesh size: the largest distance from a point of the compactum to the net.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Declared distance between distinct components (unions only).
    pub fn gap(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::CircleUnion { count, gap, .. } if count > 1 => Some(gap),
            _ => None,
        }
    }

    pub fn component_count(&self) -> usize {
        match self.kind {
            SpaceKind::CircleUnion { count, .. } => count,
            _ => 1,
        }
    }

    /// True when the modelled compactum is connected.
    pub fn is_connected(&self) -> bool {
        match self.kind {
            SpaceKind::Circle { .. } | SpaceKind::Disc { .. } | SpaceKind::Torus { .. } => true,
            SpaceKind::CircleUnion { count, .. } => count == 1,
            SpaceKind::Integers { .. } | SpaceKind::Generic { .. } => false,
        }
    }

    /// Coordinates of `p` in the ambient plane (torus points use `z` only).
    pub fn embed(&self, p: &Point) -> Complex64 {
        match self.kind {
            SpaceKind::CircleUnion { gap, .. } => {
                p.z + Complex64::new(p.comp as f64 * (2.0 + gap), 0.0)
            }
            _ => p.z,
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self.kind {
            SpaceKind::Torus { .. } => (p.z - q.z).norm().hypot((p.z2 - q.z2).norm()),
            SpaceKind::CircleUnion { .. } if p.comp != q.comp => {
                (self.embed(p) - self.embed(q)).norm()
            }
            _ => (p.z - q.z).norm(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            SpaceKind::Circle { .. } | SpaceKind::Disc { .. } | SpaceKind::Integers { .. } => 2.0,
            SpaceKind::Torus { .. } => 8f64.sqrt(),
            SpaceKind::CircleUnion { count, gap, .. } => {
                (count as f64 - 1.0) * (2.0 + gap) + 2.0
            }
            SpaceKind::Generic { .. } => {
                let mut d: f64 = 0.0;
                for (i, p) in self.points.iter().enumerate() {
                    for q in &self.points[i + 1..] {
                        d = d.max(self.distance(p, q));
                    }
                }
                d
            }
        }
    }

    /// Index of the net point nearest to `p` (first one on ties).
    pub fn nearest(&self, p: &Point) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = self.distance(p, q);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    /// Indices of the net points in the closed ball B(center, radius).
    pub fn ball(&self, center: &Point, radius: f64) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, q)| self.distance(center, q) <= radius)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Embedded coordinate of an (extended) integer in the two-point
/// compactification: k/(1+|k|), ±∞ ↦ ±1.
pub fn integer_coord(k: f64) -> f64 {
    if k.is_infinite() {
        k.signum()
    } else {
        k / (1.0 + k.abs())
    }
}

/// Inverse of [`integer_coord`], rounded to the nearest integer.
pub fn coord_integer(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        f64::INFINITY.copysign(x)
    } else {
        (x / (1.0 - x.abs())).round()
    }
}
