//! Concrete Banach function algebras on the modelled compacta.
//!
//! Elements are carried as samples on the net plus, when available, an exact
//! evaluator, a Fourier series (circle algebras) and gradient samples (the
//! C¹ algebra on the disc). Norms are computed on the net, so they are lower
//! bounds of the true norms; the certification logic downstream treats them
//! that way.

mod checkers;
mod fourier;
mod modulus;
mod sampler;

pub use checkers::{
    check_disjoint_support_symmetry, check_factorization_inequality, pair_asymmetry, FactorizationEstimate,
    SymmetryEstimate, Witness,
};
pub use fourier::FourierSeries;
pub use modulus::{geometric_scales, modulus_and_dini, DiniVerdict, ModulusOfContinuity, ModulusReport};
pub use sampler::{PairKind, Sampler};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::space::{NetSpace, Point, SpaceKind};

pub type Evaluator = Arc<dyn Fn(&Point) -> Complex64 + Send + Sync>;

/// Step of the centred differences used for gradients.
pub const GRADIENT_STEP: f64 = 1e-6;

/// Default Fourier truncation degree.
pub const DEFAULT_FOURIER_DEGREE: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dx: Vec<Complex64>,
    pub dy: Vec<Complex64>,
}

/// A function on a [`NetSpace`].
#[derive(Clone)]
pub struct AlgElement {
    space: Arc<NetSpace>,
    samples: Vec<Complex64>,
    fourier: Option<FourierSeries>,
    gradient: Option<Gradient>,
    eval: Option<Evaluator>,
}

impl fmt::Debug for AlgElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgElement")
            .field("len", &self.samples.len())
            .field("fourier", &self.fourier.as_ref().map(|s| s.degree()))
            .field("gradient", &self.gradient.is_some())
            .field("eval", &self.eval.is_some())
            .finish()
    }
}

impl AlgElement {
    pub fn from_fn<F>(space: Arc<NetSpace>, f: F) -> Self
    where
        F: Fn(&Point) -> Complex64 + Send + Sync + 'static,
    {
        let eval: Evaluator = Arc::new(f);
        AlgElement::from_evaluator(space, eval)
    }

    pub fn from_evaluator(space: Arc<NetSpace>, eval: Evaluator) -> Self {
        let samples = space.points().iter().map(|p| eval(p)).collect();
        AlgElement {
            space,
            samples,
            fourier: None,
            gradient: None,
            eval: Some(eval),
        }
    }

    pub fn from_expr(space: Arc<NetSpace>, expr: &Expr) -> Self {
        let e = expr.clone();
        AlgElement::from_fn(space, move |p| e.eval(p))
    }

    pub fn constant(space: Arc<NetSpace>, c: Complex64) -> Self {
        let mut out = AlgElement::from_fn(space.clone(), move |_| c);
        if matches!(space.kind(), SpaceKind::Circle { .. }) {
            out.fourier = Some(FourierSeries::from_modes(0, &[(0, c)]));
        }
        out
    }

    /// Samples only; operations that need values off the net will fail.
    pub fn from_samples(space: Arc<NetSpace>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != space.len() {
            return Err(Error::Invalid(format!(
                "{} samples for a net of {} points",
                samples.len(),
                space.len()
            )));
        }
        Ok(AlgElement {
            space,
            samples,
            fourier: None,
            gradient: None,
            eval: None,
        })
    }

    /// The trigonometric polynomial with the given coefficients (circle nets).
    pub fn from_fourier(space: Arc<NetSpace>, series: FourierSeries) -> Result<Self> {
        require_circle(&space)?;
        let s = series.clone();
        let mut out = AlgElement::from_fn(space, move |p| s.eval(p.z));
        out.fourier = Some(series);
        Ok(out)
    }

    pub fn space(&self) -> &Arc<NetSpace> {
        &self.space
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn fourier(&self) -> Option<&FourierSeries> {
        self.fourier.as_ref()
    }

    pub fn gradient(&self) -> Option<&Gradient> {
        self.gradient.as_ref()
    }

    pub fn evaluator(&self) -> Option<&Evaluator> {
        self.eval.as_ref()
    }

    pub fn eval_at(&self, p: &Point) -> Result<Complex64> {
        match &self.eval {
            Some(e) => Ok(e(p)),
            None => Err(Error::MissingRepresentation("evaluator")),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Attach Fourier coefficients |k| ≤ degree computed by transform of the
    /// evaluator. Exact for trigonometric polynomials of that degree.
    pub fn with_fourier(mut self, degree: usize) -> Result<Self> {
        require_circle(&self.space)?;
        let eval = self.eval.clone().ok_or(Error::MissingRepresentation("evaluator"))?;
        self.fourier = Some(FourierSeries::transform(|z| eval(&Point::new(z)), degree));
        Ok(self)
    }

    /// Replace the element by its Fourier partial sum of the given degree.
    /// The dropped part is recorded as the series' truncation mass, measured
    /// as the sup over the net of the difference.
    pub fn project_fourier(&self, degree: usize) -> Result<Self> {
        let with = self.clone().with_fourier(degree)?;
        let series = with.fourier.clone().expect("just attached");
        let mut out = AlgElement::from_fourier(self.space.clone(), series)?;
        let dev = out
            .samples
            .iter()
            .zip(&self.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if let Some(s) = out.fourier.as_mut() {
            s.truncation_mass = dev;
        }
        Ok(out)
    }

    /// Attach gradient samples by centred differences of the evaluator.
    pub fn with_gradient(mut self) -> Result<Self> {
        let eval = self.eval.clone().ok_or(Error::MissingRepresentation("evaluator"))?;
        let h = GRADIENT_STEP;
        let mut dx = Vec::with_capacity(self.samples.len());
        let mut dy = Vec::with_capacity(self.samples.len());
        for p in self.space.points() {
            let shifted = |d: Complex64| Point { z: p.z + d, ..*p };
            dx.push((eval(&shifted(Complex64::new(h, 0.0))) - eval(&shifted(Complex64::new(-h, 0.0)))) / (2.0 * h));
            dy.push((eval(&shifted(Complex64::new(0.0, h))) - eval(&shifted(Complex64::new(0.0, -h)))) / (2.0 * h));
        }
        self.gradient = Some(Gradient { dx, dy });
        Ok(self)
    }

    /// Attach whatever representations `tag` needs.
    pub fn prepared_for(self, tag: &AlgebraTag, fourier_degree: usize) -> Result<Self> {
        match tag.family {
            Family::Wiener if self.fourier.is_none() => self.with_fourier(fourier_degree),
            Family::C1Disc if self.gradient.is_none() => self.with_gradient(),
            _ => Ok(self),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let eval = self.eval.clone().map(|e| -> Evaluator { Arc::new(move |p| c * e(p)) });
        AlgElement {
            space: self.space.clone(),
            samples: self.samples.iter().map(|x| c * x).collect(),
            fourier: self.fourier.as_ref().map(|s| s.scale(c)),
            gradient: self.gradient.as_ref().map(|g| Gradient {
                dx: g.dx.iter().map(|x| c * x).collect(),
                dy: g.dy.iter().map(|x| c * x).collect(),
            }),
            eval,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, Complex64::new(-1.0, 0.0))
    }

    fn zip(&self, other: &Self, sign: Complex64) -> Self {
        let eval = match (&self.eval, &other.eval) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |p: &Point| a(p) + sign * b(p)) as Evaluator)
            }
            _ => None,
        };
        let fourier = match (&self.fourier, &other.fourier) {
            (Some(a), Some(b)) => Some(a.add(&b.scale(sign))),
            _ => None,
        };
        let gradient = match (&self.gradient, &other.gradient) {
            (Some(a), Some(b)) => Some(Gradient {
                dx: a.dx.iter().zip(&b.dx).map(|(x, y)| x + sign * y).collect(),
                dy: a.dy.iter().zip(&b.dy).map(|(x, y)| x + sign * y).collect(),
            }),
            _ => None,
        };
        AlgElement {
            space: self.space.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| x + sign * y)
                .collect(),
            fourier,
            gradient,
            eval,
        }
    }

    /// Pointwise product. Fourier series multiply by convolution truncated
    /// to the larger of `max_degree` and the operands' degrees; gradients by
    /// the product rule.
    pub fn mul(&self, other: &Self) -> Self {
        let eval = match (&self.eval, &other.eval) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |p: &Point| a(p) * b(p)) as Evaluator)
            }
            _ => None,
        };
        let fourier = match (&self.fourier, &other.fourier) {
            (Some(a), Some(b)) => {
                let keep = (a.effective_degree() + b.effective_degree())
                    .min(DEFAULT_FOURIER_DEGREE.max(a.degree()).max(b.degree()));
                Some(a.mul(b, keep))
            }
            _ => None,
        };
        let gradient = match (&self.gradient, &other.gradient) {
            (Some(a), Some(b)) => {
                let rule = |da: &[Complex64], db: &[Complex64]| -> Vec<Complex64> {
                    (0..self.samples.len())
                        .map(|i| da[i] * other.samples[i] + self.samples[i] * db[i])
                        .collect()
                };
                Some(Gradient {
                    dx: rule(&a.dx, &b.dx),
                    dy: rule(&a.dy, &b.dy),
                })
            }
            _ => None,
        };
        AlgElement {
            space: self.space.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| x * y)
                .collect(),
            fourier,
            gradient,
            eval,
        }
    }

    pub(crate) fn with_parts(
        space: Arc<NetSpace>,
        samples: Vec<Complex64>,
        eval: Option<Evaluator>,
    ) -> Self {
        AlgElement {
            space,
            samples,
            fourier: None,
            gradient: None,
            eval,
        }
    }

}

fn require_circle(space: &NetSpace) -> Result<()> {
    if matches!(space.kind(), SpaceKind::Circle { .. }) {
        Ok(())
    } else {
        Err(Error::MissingRepresentation("circle net for Fourier series"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Sup,
    Lip { alpha: f64 },
    LipLocal { alpha: f64, epsilon: f64 },
    Wiener,
    C1Disc,
}

/// Classical facts about each family, set by hand rather than computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraMetadata {
    pub regular: bool,
    pub all_points_peak: bool,
    pub maximal_ideals_equal_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraTag {
    #[serde(flatten)]
    pub family: Family,
}

impl AlgebraTag {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Lip { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                Err(Error::Invalid(format!("Lipschitz exponent {alpha} not in (0, 1]")))
            }
            Family::LipLocal { alpha, epsilon } if !(alpha > 0.0 && alpha <= 1.0) || !(epsilon > 0.0) => {
                Err(Error::Invalid(format!(
                    "local Lipschitz norm needs alpha in (0, 1] and epsilon > 0, got {alpha}, {epsilon}"
                )))
            }
            _ => Ok(AlgebraTag { family }),
        }
    }

    pub fn sup() -> Self {
        AlgebraTag { family: Family::Sup }
    }

    pub fn lip(alpha: f64) -> Result<Self> {
        AlgebraTag::new(Family::Lip { alpha })
    }

    pub fn lip_local(alpha: f64, epsilon: f64) -> Result<Self> {
        AlgebraTag::new(Family::LipLocal { alpha, epsilon })
    }

    pub fn wiener() -> Self {
        AlgebraTag { family: Family::Wiener }
    }

    pub fn c1_disc() -> Self {
        AlgebraTag { family: Family::C1Disc }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Sup => "sup",
            Family::Lip { .. } => "lip",
            Family::LipLocal { .. } => "lip-local",
            Family::Wiener => "wiener",
            Family::C1Disc => "c1-disc",
        }
    }

    /// Hölder exponent for bump construction (1 for non-Lipschitz families).
    pub fn alpha(&self) -> f64 {
        match self.family {
            Family::Lip { alpha } | Family::LipLocal { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    pub fn metadata(&self) -> AlgebraMetadata {
        match self.family {
            // C(K) itself: regular, every point a peak point of a metric compactum.
            Family::Sup | Family::Lip { .. } | Family::LipLocal { .. } | Family::C1Disc => {
                AlgebraMetadata {
                    regular: true,
                    all_points_peak: true,
                    maximal_ideals_equal_boundary: true,
                }
            }
            Family::Wiener => AlgebraMetadata {
                regular: true,
                all_points_peak: false,
                maximal_ideals_equal_boundary: true,
            },
        }
    }

    pub fn supports(&self, space: &NetSpace) -> bool {
        match self.family {
            Family::Wiener => matches!(space.kind(), SpaceKind::Circle { .. }),
            Family::C1Disc => matches!(space.kind(), SpaceKind::Disc { .. }),
            _ => true,
        }
    }
}

/// Hölder seminorm sup |f(x) − f(y)| / d(x, y)^α over net pairs, restricted
/// to d ≤ `max_dist`.
pub fn holder_seminorm(f: &AlgElement, alpha: f64, max_dist: f64) -> f64 {
    let space = f.space();
    let pts = space.points();
    let v = f.samples();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = space.distance(&pts[i], &pts[j]);
            if d <= 0.0 || d > max_dist {
                continue;
            }
            let num = (v[i] - v[j]).norm();
            let r = if alpha == 1.0 { num / d } else { num / d.powf(alpha) };
            if r > best {
                best = r;
            }
        }
    }
    best
}

/// The family norm of `f`, computed over the net.
pub fn norm(f: &AlgElement, alg: &AlgebraTag) -> Result<f64> {
    match alg.family {
        Family::Sup => Ok(f.sup_norm()),
        Family::Lip { alpha } => Ok(f.sup_norm() + holder_seminorm(f, alpha, f64::INFINITY)),
        Family::LipLocal { alpha, epsilon } => Ok(f.sup_norm() + holder_seminorm(f, alpha, epsilon)),
        Family::Wiener => f
            .fourier()
            .map(|s| s.l1_norm())
            .ok_or(Error::MissingRepresentation("fourier")),
        Family::C1Disc => {
            let g = f.gradient().ok_or(Error::MissingRepresentation("gradient"))?;
            let m = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            Ok(f.sup_norm() + m(&g.dx) + m(&g.dy))
        }
    }
}

/// Sup norm over the net points in the closed ball B(center, radius).
pub fn restricted_sup(f: &AlgElement, center: &Point, radius: f64) -> f64 {
    f.space()
        .ball(center, radius)
        .into_iter()
        .map(|i| f.samples()[i].norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> Arc<NetSpace> {
        Arc::new(NetSpace::circle(n).unwrap())
    }

    fn expr(space: &Arc<NetSpace>, s: &str) -> AlgElement {
        AlgElement::from_expr(space.clone(), &Expr::parse(s).unwrap())
    }

    #[test]
    fn unit_has_norm_one_everywhere() {
        let c = circle(64);
        let one = AlgElement::constant(c.clone(), Complex64::new(1.0, 0.0));
        for tag in [AlgebraTag::sup(), AlgebraTag::lip(0.5).unwrap(), AlgebraTag::wiener()] {
            assert_eq!(norm(&one, &tag).unwrap(), 1.0);
        }
        let d = Arc::new(NetSpace::disc(4, 8).unwrap());
        let one = AlgElement::constant(d, Complex64::new(1.0, 0.0)).with_gradient().unwrap();
        assert_eq!(norm(&one, &AlgebraTag::c1_disc()).unwrap(), 1.0);
    }

    #[test]
    fn wiener_norm_of_two_plus_z() {
        let c = circle(64);
        let w = expr(&c, "2+z").with_fourier(8).unwrap();
        assert!((norm(&w, &AlgebraTag::wiener()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_norm_of_real_part() {
        // Brute force: |Re x − Re y| ≤ |x − y| with equality along the real
        // direction, approached by near-vertical chords at ±i.
        let c = circle(256);
        let f = expr(&c, "(z+zbar)/2");
        let pts = c.points();
        let mut oracle: f64 = 0.0;
        for a in pts {
            for b in pts {
                let d = (a.z - b.z).norm();
                if d > 0.0 {
                    oracle = oracle.max((a.z.re - b.z.re).abs() / d);
                }
            }
        }
        let n = norm(&f, &AlgebraTag::lip(1.0).unwrap()).unwrap();
        assert!((n - (1.0 + oracle)).abs() < 1e-12);
        assert!((n - 2.0).abs() < 1e-3);
    }

    #[test]
    fn missing_representations_are_reported() {
        let c = circle(16);
        let f = AlgElement::from_samples(c.clone(), vec![Complex64::new(1.0, 0.0); 16]).unwrap();
        assert_eq!(norm(&f, &AlgebraTag::wiener()), Err(Error::MissingRepresentation("fourier")));
        assert_eq!(norm(&f, &AlgebraTag::c1_disc()), Err(Error::MissingRepresentation("gradient")));
        assert!(f.clone().with_fourier(4).is_err());
        let d = Arc::new(NetSpace::disc(3, 5).unwrap());
        assert!(expr(&d, "z").with_fourier(4).is_err());
    }

    #[test]
    fn fourier_samples_agree_with_sum() {
        let c = circle(128);
        let f = expr(&c, "1 + 2*z^3 - zbar").with_fourier(16).unwrap();
        let s = f.fourier().unwrap();
        for (p, v) in c.points().iter().zip(f.samples()) {
            assert!((s.eval(p.z) - v).norm() <= 1e-8 * s.l1_norm());
        }
    }

    #[test]
    fn gradient_of_polynomial() {
        let d = Arc::new(NetSpace::disc(5, 12).unwrap());
        let f = expr(&d, "z*zbar").with_gradient().unwrap();
        let g = f.gradient().unwrap();
        for (p, (dx, dy)) in d.points().iter().zip(g.dx.iter().zip(&g.dy)) {
            assert!((dx.re - 2.0 * p.z.re).abs() < 1e-6);
            assert!((dy.re - 2.0 * p.z.im).abs() < 1e-6);
        }
    }

    #[test]
    fn metadata_table() {
        assert!(!AlgebraTag::wiener().metadata().all_points_peak);
        assert!(AlgebraTag::lip(1.0).unwrap().metadata().all_points_peak);
        assert!(AlgebraTag::c1_disc().metadata().maximal_ideals_equal_boundary);
        assert!(AlgebraTag::lip(0.0).is_err());
        assert!(AlgebraTag::lip_local(1.0, 0.0).is_err());
    }

    #[test]
    fn product_keeps_fourier_and_gradient_consistent() {
        let c = circle(64);
        let f = expr(&c, "2+z").with_fourier(4).unwrap();
        let sq = f.mul(&f);
        assert_eq!(norm(&sq, &AlgebraTag::wiener()).unwrap().round(), 9.0);
        let d = Arc::new(NetSpace::disc(4, 8).unwrap());
        let a = expr(&d, "z").with_gradient().unwrap();
        let b = expr(&d, "zbar").with_gradient().unwrap();
        let direct = expr(&d, "z*zbar").with_gradient().unwrap();
        let prod = a.mul(&b);
        for (x, y) in prod.gradient().unwrap().dx.iter().zip(&direct.gradient().unwrap().dx) {
            assert!((x - y).norm() < 1e-6);
        }
    }
}
