//! The weighted composition operator (Tf)(t) = w(t)·f(φ(t)).

mod resolvent;
mod truncation;

pub use resolvent::{Branch, PointResolvent, ResolventSeries, SERIES_CAP, STALL_LIMIT};
pub use truncation::{hausdorff, TruncationSpectrum, TruncationSpectrumReport};

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{norm, AlgElement, AlgebraTag, Evaluator, Family, Sampler, DEFAULT_FOURIER_DEGREE};
use crate::error::{Error, Result};
use crate::space::{Dynamics, DynamicsKind, NetSpace, Point, SpaceKind};

/// w_n(s) with its log-magnitude kept separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cocycle {
    pub n: i64,
    pub s: Point,
    pub value: Complex64,
    pub log_magnitude: f64,
}

/// Bracket for ‖Tⁿ‖ in the declared algebra, in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerNorm {
    pub n: i64,
    pub log_lower: f64,
    pub log_upper: Option<f64>,
}

impl PowerNorm {
    pub fn lower(&self) -> f64 {
        self.log_lower.exp()
    }

    pub fn upper(&self) -> Option<f64> {
        self.log_upper.map(f64::exp)
    }
}

#[derive(Clone)]
pub struct WeightedOp {
    weight: AlgElement,
    w_eval: Evaluator,
    dynamics: Dynamics,
    alg: AlgebraTag,
    w_min: f64,
}

impl std::fmt::Debug for WeightedOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightedOp")
            .field("dynamics", self.dynamics.kind())
            .field("alg", &self.alg)
            .field("w_min", &self.w_min)
            .finish()
    }
}

/// ln|w| and w/|w| at a point; a zero weight gives (−∞, 0).
fn log_polar(w: Complex64) -> (f64, Complex64) {
    let m = w.norm();
    if m == 0.0 {
        (f64::NEG_INFINITY, Complex64::new(0.0, 0.0))
    } else {
        (m.ln(), w / m)
    }
}

fn cocycle_parts(w: &Evaluator, dynamics: &Dynamics, s: &Point, n: i64) -> (f64, Complex64) {
    let mut log = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    if n >= 0 {
        let mut p = *s;
        for _ in 0..n {
            let (l, u) = log_polar(w(&p));
            log += l;
            phase *= u;
            p = dynamics.forward(&p);
        }
    } else {
        // w_{−m}(s) = 1 / w_m(φ^{−m}s).
        let mut p = *s;
        for _ in 0..(-n) {
            p = dynamics.inverse(&p);
            let (l, u) = log_polar(w(&p));
            log -= l;
            phase *= u.conj();
        }
    }
    (log, phase)
}

fn compose(log: f64, phase: Complex64) -> Complex64 {
    if log == f64::NEG_INFINITY {
        Complex64::new(0.0, 0.0)
    } else {
        phase * log.exp()
    }
}

impl WeightedOp {
    /// T = wU with no invertibility claim. The weight needs an evaluator,
    /// because orbits leave the net.
    pub fn new(weight: AlgElement, dynamics: Dynamics, alg: AlgebraTag) -> Result<Self> {
        if !Arc::ptr_eq(weight.space(), dynamics.space()) && weight.space() != dynamics.space() {
            return Err(Error::Invalid("weight and dynamics live on different nets".into()));
        }
        if !alg.supports(weight.space()) {
            return Err(Error::Invalid(format!(
                "algebra {} is not defined on this space",
                alg.name()
            )));
        }
        let w_eval = weight
            .evaluator()
            .cloned()
            .ok_or(Error::MissingRepresentation("weight evaluator"))?;
        let weight = weight.prepared_for(&alg, DEFAULT_FOURIER_DEGREE.min(64))?;
        Ok(WeightedOp {
            weight,
            w_eval,
            dynamics,
            alg,
            w_min: 0.0,
        })
    }

    /// Declare |w| ≥ w_min > 0, checked on the net.
    pub fn with_w_min(mut self, w_min: f64) -> Result<Self> {
        let m = self.weight.min_modulus();
        if !(w_min > 0.0) || m < w_min {
            return Err(Error::WeightVanishes(m));
        }
        self.w_min = w_min;
        Ok(self)
    }

    /// Declare invertibility with w_min = ½·min over the net of |w|.
    pub fn invertible(self) -> Result<Self> {
        let m = self.weight.min_modulus();
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::WeightVanishes(m));
        }
        self.with_w_min(0.5 * m)
    }

    pub fn weight(&self) -> &AlgElement {
        &self.weight
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn space(&self) -> &Arc<NetSpace> {
        self.dynamics.space()
    }

    pub fn alg(&self) -> &AlgebraTag {
        &self.alg
    }

    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    pub fn is_invertible(&self) -> bool {
        self.w_min > 0.0
    }

    pub fn weight_at(&self, p: &Point) -> Complex64 {
        (self.w_eval)(p)
    }

    /// The operator for the weight w/λ, whose spectrum is σ(T)/λ.
    pub fn scaled(&self, lambda: Complex64) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::Invalid("cannot rescale by zero".into()));
        }
        let c = 1.0 / lambda;
        let e = self.w_eval.clone();
        let w_eval: Evaluator = Arc::new(move |p| c * e(p));
        Ok(WeightedOp {
            weight: self.weight.scale(c),
            w_eval,
            dynamics: self.dynamics.clone(),
            alg: self.alg,
            w_min: self.w_min * c.norm(),
        })
    }

    /// Same weight and dynamics, another algebra.
    pub fn with_alg(&self, alg: AlgebraTag) -> Result<Self> {
        let op = WeightedOp::new(self.weight.clone(), self.dynamics.clone(), alg)?;
        Ok(WeightedOp { w_min: self.w_min, ..op })
    }

    fn require_inverse(&self, n: i64) -> Result<()> {
        if n < 0 && self.w_min <= 0.0 {
            Err(Error::WeightNotInvertible)
        } else {
            Ok(())
        }
    }

    pub fn cocycle(&self, s: &Point, n: i64) -> Result<Cocycle> {
        self.require_inverse(n)?;
        self.dynamics.check_orbit_len(n.unsigned_abs())?;
        let (log, phase) = cocycle_parts(&self.w_eval, &self.dynamics, s, n);
        Ok(Cocycle {
            n,
            s: *s,
            value: compose(log, phase),
            log_magnitude: log,
        })
    }

    /// ln|w_k(s)| for k = 0..=n.
    pub fn forward_log_prefix(&self, s: &Point, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(acc);
        let mut p = *s;
        for _ in 0..n {
            acc += self.weight_at(&p).norm().ln();
            out.push(acc);
            p = self.dynamics.forward(&p);
        }
        out
    }

    /// ln|w_k(φ^{−k}s)| for k = 0..=n.
    pub fn backward_log_prefix(&self, s: &Point, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(acc);
        let mut p = *s;
        for _ in 0..n {
            p = self.dynamics.inverse(&p);
            acc += self.weight_at(&p).norm().ln();
            out.push(acc);
        }
        out
    }

    /// Tⁿf, with (Tⁿf)(t) = w_n(t)·f(φⁿt).
    pub fn apply_power(&self, f: &AlgElement, n: i64) -> Result<AlgElement> {
        if n == 0 {
            return Ok(f.clone());
        }
        self.require_inverse(n)?;
        let space = self.space().clone();
        let eval: Evaluator = match f.evaluator() {
            Some(fe) => {
                let (fe, we, dynamics) = (fe.clone(), self.w_eval.clone(), self.dynamics.clone());
                Arc::new(move |p: &Point| {
                    let (log, phase) = cocycle_parts(&we, &dynamics, p, n);
                    compose(log, phase) * fe(&dynamics.iterate(p, n))
                })
            }
            None if !self.dynamics.is_exact() => {
                // Tabulated maps keep the net invariant, so samples suffice.
                let samples = f.samples().to_vec();
                let (we, dynamics, sp) = (self.w_eval.clone(), self.dynamics.clone(), space.clone());
                Arc::new(move |p: &Point| {
                    let (log, phase) = cocycle_parts(&we, &dynamics, p, n);
                    compose(log, phase) * samples[sp.nearest(&dynamics.iterate(p, n))]
                })
            }
            None => return Err(Error::MissingRepresentation("evaluator")),
        };
        let out = AlgElement::from_evaluator(space, eval);
        let degree = match (self.weight.fourier(), f.fourier()) {
            (Some(w), Some(g)) => (g.effective_degree() + n.unsigned_abs() as usize * w.effective_degree())
                .clamp(1, DEFAULT_FOURIER_DEGREE),
            _ => DEFAULT_FOURIER_DEGREE,
        };
        let wants_fourier = f.fourier().is_some() || matches!(self.alg.family, Family::Wiener);
        if wants_fourier && matches!(self.space().kind(), SpaceKind::Circle { .. }) {
            out.with_fourier(degree)
        } else {
            out.prepared_for(&self.alg, degree)
        }
    }

    /// ‖Uⁿ‖ ≤ C_U for every n, when the family and the dynamics give one.
    pub fn composition_bound(&self) -> Option<f64> {
        let d = &self.dynamics;
        match self.alg.family {
            Family::Sup => Some(1.0),
            Family::Lip { alpha } => {
                if d.is_isometry() {
                    Some(1.0)
                } else if d.is_componentwise_isometry() {
                    // Cross-component quotients are at most 2‖f‖_∞/gap^α.
                    self.space().gap().map(|g| 1.0 + 2.0 / g.powf(alpha))
                } else {
                    None
                }
            }
            Family::LipLocal { alpha, epsilon } => {
                if d.is_isometry() {
                    Some(1.0)
                } else if d.is_componentwise_isometry() {
                    match self.space().gap() {
                        Some(g) if epsilon < g => Some(1.0),
                        Some(g) => Some(1.0 + 2.0 / g.powf(alpha)),
                        None => None,
                    }
                } else {
                    None
                }
            }
            Family::Wiener => d.circle_rotation_angle().map(|_| 1.0),
            Family::C1Disc => match d.kind() {
                // The gradient of f∘R is the rotated gradient of f.
                DynamicsKind::Rotation { .. } => Some(SQRT_2),
                // Uⁿ = C_S C_Rⁿ C_S with S the swap of 0 and a; S has
                // |S'| ≤ (1+|a|)/(1−|a|), so ‖C_S‖ ≤ 2(1+|a|)/(1−|a|).
                DynamicsKind::Moebius { center, .. } => {
                    let a = center.norm();
                    let cs = 2.0 * (1.0 + a) / (1.0 - a);
                    Some(SQRT_2 * cs * cs)
                }
                _ => None,
            },
        }
    }

    /// max over the net of ln|w_n| and of ln|w_{−n}|, for n = 0..=n_max.
    pub fn sup_log_norms(&self, n_max: usize) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let mut fwd = vec![f64::NEG_INFINITY; n_max + 1];
        let mut bwd = vec![f64::NEG_INFINITY; n_max + 1];
        for s in self.space().points() {
            for (k, l) in self.forward_log_prefix(s, n_max).into_iter().enumerate() {
                fwd[k] = fwd[k].max(l);
            }
            if self.is_invertible() {
                for (k, l) in self.backward_log_prefix(s, n_max).into_iter().enumerate() {
                    bwd[k] = bwd[k].max(-l);
                }
            }
        }
        Ok((fwd, self.is_invertible().then_some(bwd)))
    }

    /// Modulus of ln|w| at the net scale, over pairs closer than 2h.
    fn log_weight_oscillation(&self) -> f64 {
        let space = self.space();
        let pts = space.points();
        let logs: Vec<f64> = self.weight.samples().iter().map(|w| w.norm().ln()).collect();
        let h2 = 2.0 * space.resolution();
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if space.distance(&pts[i], &pts[j]) <= h2 {
                    best = best.max((logs[i] - logs[j]).abs());
                }
            }
        }
        best
    }

    /// Brackets for ‖Tⁿ‖, n = 0..=n_max (n ≤ 0 with `backward`). The lower
    /// end is capped at the upper end.
    ///
    /// Sup family: the lower end is max over the net of |w_n|. Other
    /// families: the largest ‖Tⁿf‖/‖f‖ over the unit and a few sampled test
    /// elements. The raw upper end is C_U·(net norm of w_n), inflated on the
    /// sup family by e^{n·ω} with ω the oscillation of ln|w| at the net
    /// scale when φ is a componentwise isometry. Upper ends are then
    /// replaced by their submultiplicative envelope
    /// min(raw(n), min_{a+b=n} upper(a)·upper(b)), which is still an upper
    /// bound whenever the raw ones are.
    pub fn power_norm_table(&self, n_max: usize, backward: bool) -> Result<Vec<PowerNorm>> {
        let sign: i64 = if backward { -1 } else { 1 };
        if backward {
            self.require_inverse(-1)?;
        }
        let cu = self.composition_bound();
        let mut lower = vec![0.0f64; n_max + 1];
        let mut raw: Vec<Option<f64>> = vec![Some(0.0); n_max + 1];
        match self.alg.family {
            Family::Sup => {
                let (fwd, bwd) = self.sup_log_norms(n_max)?;
                let logs = if backward { bwd.expect("checked invertible") } else { fwd };
                let omega = if self.dynamics.is_componentwise_isometry() {
                    Some(self.log_weight_oscillation())
                } else {
                    None
                };
                for n in 0..=n_max {
                    lower[n] = logs[n];
                    raw[n] = omega.map(|o| logs[n] + n as f64 * o);
                }
            }
            _ => {
                let space = self.space();
                let mut sampler = Sampler::new(0x5eed);
                let mut tests = vec![AlgElement::constant(space.clone(), Complex64::new(1.0, 0.0))
                    .prepared_for(&self.alg, 8)?];
                for _ in 0..3 {
                    tests.push(sampler.element(space, &self.alg)?);
                }
                let test_norms: Vec<f64> =
                    tests.iter().map(|f| norm(f, &self.alg)).collect::<Result<_>>()?;
                for n in 1..=n_max {
                    let k = sign * n as i64;
                    let mut best = f64::NEG_INFINITY;
                    for (f, nf) in tests.iter().zip(&test_norms) {
                        let tf = self.apply_power(f, k)?;
                        best = best.max((norm(&tf, &self.alg)? / nf).ln());
                    }
                    lower[n] = best;
                    // Tⁿ1 = w_n, so the first test gives the net norm of w_n.
                    let wn = self.apply_power(&tests[0], k)?;
                    raw[n] = cu.map(|c| c.ln() + norm(&wn, &self.alg).unwrap_or(f64::NAN).ln());
                }
            }
        }
        let mut upper: Vec<Option<f64>> = raw.clone();
        upper[0] = Some(0.0);
        for n in 2..=n_max {
            for a in 1..n {
                if let (Some(x), Some(y)) = (upper[a], upper[n - a]) {
                    let split = x + y;
                    upper[n] = Some(upper[n].map_or(split, |u| u.min(split)));
                }
            }
        }
        Ok((0..=n_max)
            .map(|n| PowerNorm {
                n: sign * n as i64,
                // Net norms of rotated test elements can overshoot the
                // analytic upper end by discretisation error.
                log_lower: upper[n].map_or(lower[n], |u| lower[n].min(u)),
                log_upper: upper[n],
            })
            .collect())
    }

    pub fn power_norm(&self, n: i64) -> Result<PowerNorm> {
        let table = self.power_norm_table(n.unsigned_abs() as usize, n < 0)?;
        Ok(*table.last().expect("table has n+1 entries"))
    }

    /// Upper estimates of ρ(Ť) and ρ(Ť⁻¹) on C(K): min over 1 ≤ n ≤ n_max
    /// of the n-th root of the net sup norm of w_{±n}.
    pub fn spectral_radius_estimates(&self, n_max: usize) -> Result<(f64, Option<f64>)> {
        let (fwd, bwd) = self.sup_log_norms(n_max)?;
        let root = |logs: &[f64]| {
            (1..logs.len())
                .map(|n| logs[n] / n as f64)
                .fold(f64::INFINITY, f64::min)
                .exp()
        };
        Ok((root(&fwd), bwd.as_deref().map(root)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::space::golden_angle;

    fn circle(n: usize) -> Arc<NetSpace> {
        Arc::new(NetSpace::circle(n).unwrap())
    }

    pub(crate) fn op(space: Arc<NetSpace>, angle: f64, w: &str, alg: AlgebraTag) -> WeightedOp {
        let w = AlgElement::from_expr(space.clone(), &Expr::parse(w).unwrap());
        let d = Dynamics::rotation(space, angle).unwrap();
        WeightedOp::new(w, d, alg).unwrap()
    }

    #[test]
    fn constant_weights() {
        let c = circle(32);
        let one = op(c.clone(), golden_angle(), "1", AlgebraTag::sup());
        let two = op(c.clone(), golden_angle(), "2", AlgebraTag::sup());
        for s in c.points().iter().step_by(5) {
            assert_eq!(one.cocycle(s, 17).unwrap().value, Complex64::new(1.0, 0.0));
            assert!((two.cocycle(s, 10).unwrap().value.re - 1024.0).abs() < 1e-9);
        }
    }

    #[test]
    fn three_factor_cocycle() {
        let c = circle(32);
        let t = op(c, golden_angle(), "2+z", AlgebraTag::sup());
        let s = Point::new(Complex64::new(1.0, 0.0));
        let d = t.dynamics();
        let want = (Complex64::new(2.0, 0.0) + s.z)
            * (Complex64::new(2.0, 0.0) + d.iterate(&s, 1).z)
            * (Complex64::new(2.0, 0.0) + d.iterate(&s, 2).z);
        let got = t.cocycle(&s, 3).unwrap();
        assert!((got.value - want).norm() < 1e-12 * want.norm());
        assert!((got.log_magnitude.exp() - want.norm()).abs() < 1e-10 * want.norm());
    }

    #[test]
    fn backward_cocycle_needs_invertibility() {
        let c = circle(16);
        let t = op(c.clone(), 0.3, "2+z", AlgebraTag::sup());
        assert_eq!(t.cocycle(&c.points()[0], -2), Err(Error::WeightNotInvertible));
        let t = t.invertible().unwrap();
        let s = c.points()[3];
        let fwd = t.cocycle(&t.dynamics().iterate(&s, -2), 2).unwrap().value;
        assert!((t.cocycle(&s, -2).unwrap().value * fwd - 1.0).norm() < 1e-12);
    }

    #[test]
    fn powers_roundtrip_and_unit() {
        let c = circle(64);
        let t = op(c.clone(), golden_angle(), "2+z", AlgebraTag::sup()).invertible().unwrap();
        let f = AlgElement::from_expr(c.clone(), &Expr::parse("zbar^2 + 3").unwrap());
        let back = t.apply_power(&t.apply_power(&f, 1).unwrap(), -1).unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).norm() < 1e-9);
        }
        let one = AlgElement::constant(c.clone(), Complex64::new(1.0, 0.0));
        let t5 = t.apply_power(&one, 5).unwrap();
        for (p, v) in c.points().iter().zip(t5.samples()) {
            assert!((t.cocycle(p, 5).unwrap().value - v).norm() < 1e-12);
        }
    }

    #[test]
    fn sup_power_norms() {
        let c = circle(256);
        let one = op(c.clone(), golden_angle(), "1", AlgebraTag::sup());
        assert_eq!(one.power_norm(7).unwrap().lower(), 1.0);
        let two = op(c.clone(), golden_angle(), "2", AlgebraTag::sup());
        let p = two.power_norm(12).unwrap();
        assert!((p.lower() - 4096.0).abs() < 1e-6);
        assert!((p.upper().unwrap() - 4096.0).abs() < 1e-6);
        let w = op(c, golden_angle(), "2+z", AlgebraTag::sup());
        let p = w.power_norm(100).unwrap();
        let root = p.lower().powf(0.01);
        assert!((1.9..=2.1).contains(&root), "{root}");
        assert!(p.upper().unwrap() >= p.lower());
    }

    #[test]
    fn upper_bounds_are_submultiplicative() {
        let c = circle(128);
        for alg in [AlgebraTag::sup(), AlgebraTag::lip(1.0).unwrap(), AlgebraTag::wiener()] {
            let t = op(c.clone(), golden_angle(), "2+z", alg);
            let table = t.power_norm_table(12, false).unwrap();
            for m in 0..=12 {
                for n in 0..=(12 - m) {
                    let (a, b, ab) = (table[m].log_upper, table[n].log_upper, table[m + n].log_upper);
                    assert!(ab.unwrap() <= a.unwrap() + b.unwrap() + 1e-12, "{}", alg.name());
                }
            }
        }
    }

    #[test]
    fn wiener_power_norm_is_weight_norm() {
        let c = circle(64);
        let t = op(c, golden_angle(), "2+z", AlgebraTag::wiener());
        let p = t.power_norm(1).unwrap();
        assert!((p.upper().unwrap() - 3.0).abs() < 1e-9);
        assert!(p.lower() <= p.upper().unwrap() + 1e-9);
    }
}
