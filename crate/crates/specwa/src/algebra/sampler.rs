use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AlgElement, AlgebraTag, Family, FourierSeries};
use crate::error::{Error, Result};
use crate::space::{bump, NetSpace, Point, SpaceKind};

/// Seeded source of random algebra elements.
///
/// Circles get trigonometric polynomials with coefficients decaying like
/// 1/(1+|k|), discs get polynomials in z and z̄ of total degree ≤ 3, and every
/// other space gets a constant plus a few bumps.
/// How [`Sampler::disjoint_pair`] builds pairs with disjoint supports.
const CENTRE_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Two separated bumps, see [`Sampler::disjoint_bumps`].
    Bumps,
    /// The parts of Im(e^{iθ}z) above δ and below −δ, circle nets only.
    SignSplit,
}

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    degree: usize,
    separation: Option<f64>,
    pairs: PairKind,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            degree: 6,
            separation: None,
            pairs: PairKind::Bumps,
        }
    }

    /// Maximal trigonometric degree of circle samples.
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree.max(1);
        self
    }

    /// Distance between the centres of disjoint bump pairs, in units of the
    /// bump radius. The default depends on the Hölder exponent, see
    /// [`Sampler::disjoint_bumps`].
    pub fn with_separation(mut self, factor: f64) -> Self {
        self.separation = Some(factor);
        self
    }

    pub fn with_pairs(mut self, pairs: PairKind) -> Self {
        self.pairs = pairs;
        self
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0))
    }

    pub fn point(&mut self, space: &NetSpace) -> Point {
        space.points()[self.rng.random_range(0..space.len())]
    }

    /// Random element carrying the representations `alg` needs.
    pub fn element(&mut self, space: &Arc<NetSpace>, alg: &AlgebraTag) -> Result<AlgElement> {
        let f = match space.kind() {
            SpaceKind::Circle { .. } => {
                let d = self.rng.random_range(1..=self.degree);
                let modes: Vec<(i64, Complex64)> = (-(d as i64)..=d as i64)
                    .map(|k| (k, self.complex() / (1.0 + k.abs() as f64)))
                    .collect();
                AlgElement::from_fourier(space.clone(), FourierSeries::from_modes(d, &modes))?
            }
            SpaceKind::Disc { .. } => {
                let mut terms = Vec::new();
                for j in 0..=3i32 {
                    for k in 0..=(3 - j) {
                        terms.push((j, k, self.complex() / (1.0 + (j + k) as f64)));
                    }
                }
                AlgElement::from_fn(space.clone(), move |p| {
                    terms
                        .iter()
                        .map(|&(j, k, c)| c * p.z.powi(j) * p.z.conj().powi(k))
                        .sum()
                })
            }
            _ => {
                let h = space.resolution();
                let hi = (0.25 * space.diameter()).max(3.0 * h);
                let mut f = AlgElement::constant(space.clone(), self.complex());
                for _ in 0..self.rng.random_range(1..=3) {
                    let s = self.point(space);
                    let r = self.rng.random_range(2.5 * h..=hi.max(2.6 * h));
                    let b = bump(space, &s, r, alg.alpha())?;
                    f = f.add(&b.scale(self.complex()));
                }
                f
            }
        };
        f.prepared_for(alg, 4 * self.degree)
    }

    pub fn disjoint_pair(
        &mut self,
        space: &Arc<NetSpace>,
        alg: &AlgebraTag,
    ) -> Result<(AlgElement, AlgElement)> {
        match self.pairs {
            PairKind::Bumps => self.disjoint_bumps(space, alg),
            PairKind::SignSplit => self.sign_split(space, alg),
        }
    }

    /// f = max(Im(e^{iθ}z) − δ, 0) and g = min(Im(e^{iθ}z) + δ, 0) with a random
    /// phase θ and δ ∈ [0.005, 0.03].
    pub fn sign_split(
        &mut self,
        space: &Arc<NetSpace>,
        alg: &AlgebraTag,
    ) -> Result<(AlgElement, AlgElement)> {
        if !matches!(space.kind(), SpaceKind::Circle { .. }) {
            return Err(Error::SamplerCannotSeparate("sign-split pairs need a circle net".into()));
        }
        let rot = Complex64::from_polar(1.0, self.rng.random_range(0.0..std::f64::consts::TAU));
        let delta = self.rng.random_range(0.005..=0.03);
        let f = AlgElement::from_fn(space.clone(), move |p| {
            Complex64::new(((rot * p.z).im - delta).max(0.0), 0.0)
        });
        let g = AlgElement::from_fn(space.clone(), move |p| {
            Complex64::new(((rot * p.z).im + delta).min(0.0), 0.0)
        });
        Ok((f.prepared_for(alg, 256)?, g.prepared_for(alg, 256)?))
    }

    /// Two bumps of a common radius with disjoint supports and random real
    /// amplitudes in [½, 1].
    ///
    /// The radius is the distance from the first centre to a net node, so
    /// a node sits exactly on the support edge. Unless overridden, the
    /// centres are at least (4 + 4^{1/α})·radius apart; a cross pair then
    /// contributes at most a quarter of the larger bump's own Hölder quotient.
    pub fn disjoint_bumps(
        &mut self,
        space: &Arc<NetSpace>,
        alg: &AlgebraTag,
    ) -> Result<(AlgElement, AlgElement)> {
        let alpha = alg.alpha();
        let factor = self
            .separation
            .unwrap_or_else(|| 4.0 + 4f64.powf(1.0 / alpha));
        let h = space.resolution();
        let rmax = space.diameter() / factor;
        // A centre near the middle of the space may have nothing far enough
        // away; redraw it a few times before giving up.
        let mut last = String::new();
        for _ in 0..CENTRE_ATTEMPTS {
            let s = self.point(space);
            let radii: Vec<f64> = space
                .points()
                .iter()
                .map(|q| space.distance(&s, q))
                .filter(|&d| d > 2.0 * h && d <= rmax)
                .collect();
            if radii.is_empty() {
                last = format!("no radius in (2h, {rmax:.3e}] with h = {h:.3e}");
                continue;
            }
            let r = radii[self.rng.random_range(0..radii.len())];
            let far: Vec<Point> = space
                .points()
                .iter()
                .filter(|q| space.distance(&s, q) >= factor * r)
                .copied()
                .collect();
            if far.is_empty() {
                last = format!("no centre at distance ≥ {:.3e}", factor * r);
                continue;
            }
            let t = far[self.rng.random_range(0..far.len())];
            return self.bump_pair(space, alg, s, t, r);
        }
        Err(Error::SamplerCannotSeparate(last))
    }

    fn bump_pair(
        &mut self,
        space: &Arc<NetSpace>,
        alg: &AlgebraTag,
        s: Point,
        t: Point,
        r: f64,
    ) -> Result<(AlgElement, AlgElement)> {
        let alpha = alg.alpha();
        let a = self.rng.random_range(0.5..=1.0);
        let b = self.rng.random_range(0.5..=1.0);
        let f = bump(space, &s, r, alpha)?.scale(Complex64::new(a, 0.0));
        let g = bump(space, &t, r, alpha)?.scale(Complex64::new(b, 0.0));
        let degree = if matches!(alg.family, Family::Wiener) { 256 } else { 0 };
        Ok((f.prepared_for(alg, degree)?, g.prepared_for(alg, degree)?))
    }
}
