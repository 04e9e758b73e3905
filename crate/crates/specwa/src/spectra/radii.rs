use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::orbit_logs;
use crate::algebra::AlgElement;
use crate::error::{Error, Result};
use crate::operator::WeightedOp;
use crate::space::{integer_coord, DynamicsKind, Point, SpaceKind};

pub const MIN_QUADRATURE_NODES: usize = 4096;

/// Largest denominator treated as an exactly periodic rotation.
const MAX_EXACT_PERIOD: u64 = 1000;
/// Witness lists longer than this keep only the two extremal entries.
const MAX_WITNESSES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantMeasureEstimate {
    /// What carries the measure: an invariant circle, a periodic orbit, a
    /// fixed end, the whole space.
    pub support: String,
    /// Leaf parameter: circle radius, component index, orbit period.
    pub parameter: Option<f64>,
    /// Estimate of ∫ ln|w| dμ.
    pub estimate: f64,
    pub horizon: usize,
    pub seeds: usize,
    /// Seed spread plus osc(ln|w|)/horizon. Zero for exact orbit averages.
    pub cesaro_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnulusShape {
    /// Connected space, r̂ = R̂ within error.
    Circle,
    /// Connected space, r̂ < R̂.
    Annulus,
    /// Disconnected space: [r̂, R̂] only brackets the moduli.
    Bracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalRadii {
    pub r_hat: f64,
    pub big_r_hat: f64,
    /// Error bars on ln r̂ and ln R̂.
    pub log_error_inner: f64,
    pub log_error_outer: f64,
    /// Absolute error bars r̂·(e^{err} − 1), R̂·(e^{err} − 1).
    pub inner_error: f64,
    pub outer_error: f64,
    pub shape: AnnulusShape,
    /// Number of invariant structures probed.
    pub probes: usize,
    pub witnesses: Vec<InvariantMeasureEstimate>,
}

impl VariationalRadii {
    pub fn inner_witness(&self) -> &InvariantMeasureEstimate {
        extremal(&self.witnesses, |a, b| a < b)
    }

    pub fn outer_witness(&self) -> &InvariantMeasureEstimate {
        extremal(&self.witnesses, |a, b| a > b)
    }
}

fn extremal(w: &[InvariantMeasureEstimate], better: impl Fn(f64, f64) -> bool) -> &InvariantMeasureEstimate {
    let mut best = &w[0];
    for e in &w[1..] {
        if better(e.estimate, best.estimate) {
            best = e;
        }
    }
    best
}

enum Probe {
    /// Uniquely ergodic leaf: Birkhoff averages from several seeds.
    Ergodic {
        support: String,
        parameter: Option<f64>,
        seeds: Vec<Point>,
    },
    /// Exact average over a periodic orbit.
    Orbit {
        support: String,
        parameter: Option<f64>,
        start: Point,
        period: usize,
    },
}

/// Smallest q ≤ cap with q·angle ∈ 2πℤ up to rounding.
fn rational_period(angle: f64, cap: u64) -> Option<u64> {
    let t = (angle / TAU).rem_euclid(1.0);
    (1..=cap).find(|&q| {
        let x = q as f64 * t;
        (x - x.round()).abs() < 1e-9
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn seed_angles(seeds: usize) -> impl Iterator<Item = f64> {
    (0..seeds).map(move |j| TAU * (j as f64 + 0.5) / seeds as f64)
}

fn net_orbits(op: &WeightedOp, period: u64, support: &str) -> Vec<Probe> {
    op.space()
        .points()
        .iter()
        .map(|p| Probe::Orbit {
            support: support.to_string(),
            parameter: Some(period as f64),
            start: *p,
            period: period as usize,
        })
        .collect()
}

/// Invariant structures of φ, from the closed-form catalogue.
fn catalogue(op: &WeightedOp, seeds: usize) -> Result<Vec<Probe>> {
    let space = op.space();
    let unsupported = |m: &str| Error::UnsupportedDynamics(format!("no invariant-measure catalogue entry: {m}"));
    let leaf_radii = |circles: usize| (0..circles).map(move |j| j as f64 / (circles - 1) as f64);
    let probes = match (op.dynamics().kind(), space.kind()) {
        (DynamicsKind::Rotation { angle }, kind) => match rational_period(*angle, MAX_EXACT_PERIOD) {
            Some(q) => net_orbits(op, q, "periodic orbit"),
            None => match kind {
                SpaceKind::Circle { .. } => vec![Probe::Ergodic {
                    support: "whole circle (uniquely ergodic)".into(),
                    parameter: None,
                    seeds: seed_angles(seeds).map(|t| Point::polar(1.0, t)).collect(),
                }],
                SpaceKind::Disc { circles, .. } => leaf_radii(*circles)
                    .map(|t| disc_leaf(t, seeds, |z| z))
                    .collect(),
                SpaceKind::CircleUnion { count, .. } => (0..*count)
                    .map(|c| Probe::Ergodic {
                        support: "invariant component".into(),
                        parameter: Some(c as f64),
                        seeds: seed_angles(seeds)
                            .map(|t| Point::on(c, Complex64::from_polar(1.0, t)))
                            .collect(),
                    })
                    .collect(),
                _ => return Err(unsupported("rotation on this space")),
            },
        },
        (DynamicsKind::Moebius { center, angle }, SpaceKind::Disc { circles, .. }) => {
            match rational_period(*angle, MAX_EXACT_PERIOD) {
                Some(q) => net_orbits(op, q, "periodic orbit"),
                None => {
                    let a = *center;
                    let swap = move |z: Complex64| (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z);
                    leaf_radii(*circles).map(|t| disc_leaf(t, seeds, swap)).collect()
                }
            }
        }
        (DynamicsKind::ComponentMap { perm, angles }, SpaceKind::CircleUnion { n, .. }) => {
            let mut seen = vec![false; perm.len()];
            let mut out = Vec::new();
            for start in 0..perm.len() {
                if seen[start] {
                    continue;
                }
                let (mut c, mut len, mut total) = (start, 0u64, 0.0);
                while !seen[c] {
                    seen[c] = true;
                    total += angles[c];
                    c = perm[c];
                    len += 1;
                }
                match rational_period(total, MAX_EXACT_PERIOD) {
                    Some(q) => {
                        let base = start * n;
                        for p in &space.points()[base..base + n] {
                            out.push(Probe::Orbit {
                                support: "periodic orbit".into(),
                                parameter: Some((len * q) as f64),
                                start: *p,
                                period: (len * q) as usize,
                            });
                        }
                    }
                    None => out.push(Probe::Ergodic {
                        support: format!("component cycle of length {len}"),
                        parameter: Some(start as f64),
                        seeds: seed_angles(seeds)
                            .map(|t| Point::on(start, Complex64::from_polar(1.0, t)))
                            .collect(),
                    }),
                }
            }
            out
        }
        (DynamicsKind::TorusRotation { angle1, angle2 }, _) => {
            match (rational_period(*angle1, MAX_EXACT_PERIOD), rational_period(*angle2, MAX_EXACT_PERIOD)) {
                (Some(a), Some(b)) => net_orbits(op, a / gcd(a, b) * b, "periodic orbit"),
                (None, None) => {
                    for a in -20i64..=20 {
                        for b in -20i64..=20 {
                            if (a, b) == (0, 0) {
                                continue;
                            }
                            let x = (a as f64 * angle1 + b as f64 * angle2) / TAU;
                            if (x - x.round()).abs() < 1e-9 {
                                return Err(unsupported("resonant torus rotation"));
                            }
                        }
                    }
                    let golden = (5f64.sqrt() - 1.0) / 2.0;
                    vec![Probe::Ergodic {
                        support: "whole torus (uniquely ergodic)".into(),
                        parameter: None,
                        seeds: seed_angles(seeds)
                            .enumerate()
                            .map(|(j, t)| Point {
                                comp: 0,
                                z: Complex64::from_polar(1.0, t),
                                z2: Complex64::from_polar(1.0, TAU * (j as f64 * golden).fract()),
                            })
                            .collect(),
                    }]
                }
                _ => return Err(unsupported("torus rotation with exactly one rational angle")),
            }
        }
        (DynamicsKind::Translation, _) => [-1.0, 1.0]
            .iter()
            .map(|&end| Probe::Orbit {
                support: if end < 0.0 { "fixed end -inf" } else { "fixed end +inf" }.into(),
                parameter: Some(end),
                start: Point::new(Complex64::new(integer_coord(f64::INFINITY.copysign(end)), 0.0)),
                period: 1,
            })
            .collect(),
        (DynamicsKind::Tabulated { perm }, _) => {
            let mut seen = vec![false; perm.len()];
            let mut out = Vec::new();
            for start in 0..perm.len() {
                if seen[start] {
                    continue;
                }
                let (mut c, mut len) = (start, 0usize);
                while !seen[c] {
                    seen[c] = true;
                    c = perm[c];
                    len += 1;
                }
                out.push(Probe::Orbit {
                    support: "net cycle".into(),
                    parameter: Some(len as f64),
                    start: space.points()[start],
                    period: len,
                });
            }
            out
        }
        _ => return Err(unsupported("dynamics kind")),
    };
    Ok(probes)
}

/// One invariant circle {conj(t·e^{iθ})} of a disc map conjugate to a
/// rotation; the centre (t = 0) is a fixed point.
fn disc_leaf(t: f64, seeds: usize, conj: impl Fn(Complex64) -> Complex64) -> Probe {
    if t == 0.0 {
        return Probe::Orbit {
            support: "fixed point".into(),
            parameter: Some(0.0),
            start: Point::new(conj(Complex64::new(0.0, 0.0))),
            period: 1,
        };
    }
    Probe::Ergodic {
        support: "invariant circle".into(),
        parameter: Some(t),
        seeds: seed_angles(seeds).map(|a| Point::new(conj(Complex64::from_polar(t, a)))).collect(),
    }
}

/// exp of the extreme values of ∫ ln|w| dμ over the ergodic invariant
/// measures in the catalogue for φ, each estimated by Birkhoff averages.
pub fn variational_radii(op: &WeightedOp, horizon: usize, seeds: usize) -> Result<VariationalRadii> {
    if horizon == 0 || seeds == 0 {
        return Err(Error::Invalid("variational radii need a positive horizon and seed count".into()));
    }
    let probes = catalogue(op, seeds)?;
    let logs: Vec<f64> = op.weight().samples().iter().map(|w| w.norm().ln()).collect();
    let osc = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - logs.iter().copied().fold(f64::INFINITY, f64::min);
    let osc = if osc.is_finite() { osc } else { 0.0 };

    let mut witnesses = Vec::with_capacity(probes.len());
    for probe in probes {
        witnesses.push(match probe {
            Probe::Ergodic {
                support,
                parameter,
                seeds,
            } => {
                let mut means = Vec::with_capacity(seeds.len());
                for s in &seeds {
                    let l = orbit_logs(op, s, horizon, false)?;
                    means.push(l.iter().sum::<f64>() / horizon as f64);
                }
                let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
                InvariantMeasureEstimate {
                    support,
                    parameter,
                    estimate: means.iter().sum::<f64>() / means.len() as f64,
                    horizon,
                    seeds: means.len(),
                    cesaro_error: (hi - lo) + osc / horizon as f64,
                }
            }
            Probe::Orbit {
                support,
                parameter,
                start,
                period,
            } => {
                let l = orbit_logs(op, &start, period, false)?;
                InvariantMeasureEstimate {
                    support,
                    parameter,
                    estimate: l.iter().sum::<f64>() / period as f64,
                    horizon: period,
                    seeds: 1,
                    cesaro_error: 0.0,
                }
            }
        });
    }

    let probes = witnesses.len();
    if witnesses.len() > MAX_WITNESSES {
        let lo = witnesses.iter().position(|w| std::ptr::eq(w, extremal(&witnesses, |a, b| a < b))).unwrap();
        let hi = witnesses.iter().position(|w| std::ptr::eq(w, extremal(&witnesses, |a, b| a > b))).unwrap();
        let keep = [lo, hi];
        witnesses = witnesses
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, w)| w)
            .collect();
    }
    let inner = extremal(&witnesses, |a, b| a < b).clone();
    let outer = extremal(&witnesses, |a, b| a > b).clone();
    let r_hat = inner.estimate.exp();
    let big_r_hat = outer.estimate.exp();
    let shape = if !op.space().is_connected() {
        AnnulusShape::Bracket
    } else if (outer.estimate - inner.estimate) <= inner.cesaro_error + outer.cesaro_error {
        AnnulusShape::Circle
    } else {
        AnnulusShape::Annulus
    };
    Ok(VariationalRadii {
        r_hat,
        big_r_hat,
        log_error_inner: inner.cesaro_error,
        log_error_outer: outer.cesaro_error,
        inner_error: r_hat * inner.cesaro_error.exp_m1(),
        outer_error: big_r_hat * outer.cesaro_error.exp_m1(),
        shape,
        probes,
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerConstant {
    /// exp of the mean of ln|w| on the circle, at the doubled node count.
    pub c: f64,
    pub nodes: usize,
    /// Same quadrature at half the nodes.
    pub c_coarse: f64,
    /// |c − c_coarse|, the Richardson-style convergence check.
    pub richardson_gap: f64,
    pub converged: bool,
}

fn log_mean_on_circle(w: &AlgElement, nodes: usize) -> Result<(f64, f64, f64)> {
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..nodes {
        let m = w.eval_at(&Point::polar(1.0, TAU * k as f64 / nodes as f64))?.norm();
        lo = lo.min(m);
        hi = hi.max(m);
        sum += m.ln();
    }
    Ok((sum / nodes as f64, lo, hi))
}

/// exp((1/2π)∫ ln|w(e^{iθ})| dθ) by the trapezoid rule, which is
/// spectrally accurate for smooth periodic integrands, checked against the
/// rule at twice the nodes.
pub fn wiener_circle_constant(w: &AlgElement, nodes: usize) -> Result<WienerConstant> {
    if !matches!(w.space().kind(), SpaceKind::Circle { .. }) {
        return Err(Error::Invalid("the circle constant needs a circle space".into()));
    }
    let nodes = nodes.max(MIN_QUADRATURE_NODES);
    let (coarse, lo1, hi1) = log_mean_on_circle(w, nodes)?;
    let (fine, lo2, hi2) = log_mean_on_circle(w, 2 * nodes)?;
    let (lo, hi) = (lo1.min(lo2), hi1.max(hi2));
    if !(lo > 1e-12 * hi) || !fine.is_finite() {
        return Err(Error::WeightVanishes(lo));
    }
    let (c, c_coarse) = (fine.exp(), coarse.exp());
    let gap = (c - c_coarse).abs();
    Ok(WienerConstant {
        c,
        nodes: 2 * nodes,
        c_coarse,
        richardson_gap: gap,
        converged: gap <= 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::AlgebraTag;
    use crate::expr::Expr;
    use crate::space::{golden_angle, Dynamics, NetSpace};

    fn op_on(space: Arc<NetSpace>, kind: DynamicsKind, w: &str) -> WeightedOp {
        let w = AlgElement::from_expr(space.clone(), &Expr::parse(w).unwrap());
        WeightedOp::new(w, Dynamics::new(space, kind).unwrap(), AlgebraTag::sup()).unwrap()
    }

    #[test]
    fn constant_weight_gives_exact_radii() {
        let c = Arc::new(NetSpace::circle(64).unwrap());
        let r = variational_radii(&op_on(c, DynamicsKind::Rotation { angle: golden_angle() }, "-3"), 500, 3).unwrap();
        assert!((r.r_hat - 3.0).abs() < 1e-13);
        assert!((r.r_hat - r.big_r_hat).abs() < 1e-13);
        assert_eq!(r.inner_error, 0.0);
        assert_eq!(r.shape, AnnulusShape::Circle);
    }

    #[test]
    fn disc_rotation_radii_match_leaf_quadrature() {
        let d = Arc::new(NetSpace::disc(16, 16).unwrap());
        let r = variational_radii(&op_on(d, DynamicsKind::Rotation { angle: golden_angle() }, "2+|z|^2"), 2000, 2)
            .unwrap();
        assert!((r.r_hat - 2.0).abs() < 1e-9);
        assert!((r.big_r_hat - 3.0).abs() < 1e-9);
        assert_eq!(r.shape, AnnulusShape::Annulus);
        for w in &r.witnesses {
            let t = w.parameter.unwrap();
            assert!((w.estimate - (2.0 + t * t).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn moebius_leaves_are_conjugated_circles() {
        let d = Arc::new(NetSpace::disc(8, 16).unwrap());
        let kind = DynamicsKind::Moebius {
            center: Complex64::new(0.3, 0.1),
            angle: golden_angle(),
        };
        // ln|w| constant on each leaf when w depends only on the conjugated radius.
        let r = variational_radii(&op_on(d, kind, "1 + |(0.3+0.1*i - z)/(1 - (0.3-0.1*i)*z)|"), 400, 3).unwrap();
        assert!((r.r_hat - 1.0).abs() < 1e-9, "{}", r.r_hat);
        assert!((r.big_r_hat - 2.0).abs() < 1e-9, "{}", r.big_r_hat);
    }

    #[test]
    fn rational_rotation_uses_periodic_orbits() {
        let c = Arc::new(NetSpace::circle(30).unwrap());
        let r = variational_radii(&op_on(c, DynamicsKind::Rotation { angle: TAU / 3.0 }, "2+z"), 100, 2).unwrap();
        assert_eq!(r.probes, 30);
        assert!(r.witnesses.iter().all(|w| w.horizon == 3 && w.cesaro_error == 0.0));
        // |2+z||2+ωz||2+ω²z| = |8+z³|, extremal at z³ = ±1.
        assert!((r.r_hat - 7f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((r.big_r_hat - 9f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn union_components_and_integer_ends() {
        let u = Arc::new(NetSpace::circle_union(2, 16, 0.5).unwrap());
        let r = variational_radii(&op_on(u, DynamicsKind::Rotation { angle: golden_angle() }, "0.5 + 1.5*comp"), 300, 2)
            .unwrap();
        assert!((r.r_hat - 0.5).abs() < 1e-12 && (r.big_r_hat - 2.0).abs() < 1e-12);
        assert_eq!(r.shape, AnnulusShape::Bracket);

        let z = Arc::new(NetSpace::integers(10).unwrap());
        let r = variational_radii(&op_on(z, DynamicsKind::Translation, "2 - 1.5*step(re(z))"), 10, 1).unwrap();
        assert!((r.r_hat - 0.5).abs() < 1e-12 && (r.big_r_hat - 2.0).abs() < 1e-12);
    }

    #[test]
    fn circle_constant_by_jensen() {
        let c = Arc::new(NetSpace::circle(8).unwrap());
        let e = |s: &str| AlgElement::from_expr(c.clone(), &Expr::parse(s).unwrap());
        let k = wiener_circle_constant(&e("2+z"), 4096).unwrap();
        assert!((k.c - 2.0).abs() < 1e-12 && k.converged && k.nodes == 8192);
        assert!((wiener_circle_constant(&e("3"), 0).unwrap().c - 3.0).abs() < 1e-12);
        assert!((wiener_circle_constant(&e("z^3"), 0).unwrap().c - 1.0).abs() < 1e-12);
        assert!(matches!(wiener_circle_constant(&e("z - 1"), 0), Err(Error::WeightVanishes(_))));
    }
}
