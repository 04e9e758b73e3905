//! Empirical checks of the product inequalities and of the disjoint-support
//! symmetry. They estimate constants from random draws; a pass is evidence,
//! not a proof.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{norm, restricted_sup, AlgElement, AlgebraTag, Sampler};
use crate::error::{Error, Result};
use crate::space::{bump, NetSpace};

/// Fourier degree used when a product of sampled factors loses its series.
const CHECK_FOURIER_DEGREE: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// "two-factor", "p-factor" or "local".
    pub inequality: String,
    pub p: usize,
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationEstimate {
    pub algebra: String,
    pub trials: usize,
    pub skipped: usize,
    /// Largest ‖fg‖ / (‖f‖‖ǧ‖_∞ + ‖f̌‖_∞‖g‖) seen.
    pub c_two_factor: f64,
    /// Per p ∈ {2, 3, 4}, the largest ratio of the p-factor inequality.
    pub c_p_factor: Vec<(usize, f64)>,
    /// Largest ratio of the local version with supports forced into balls.
    pub c_local: f64,
    pub c_hat: f64,
    pub worst: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryEstimate {
    pub algebra: String,
    pub trials: usize,
    /// max |‖f+g‖ − ‖f−g‖| / ‖f+g‖.
    pub max_asymmetry: f64,
    pub worst_trial: usize,
    pub tolerance: f64,
    pub pass: bool,
}

struct Tracker {
    best: f64,
    witness: Option<Witness>,
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            best: 0.0,
            witness: None,
        }
    }

    fn push(&mut self, w: Witness) {
        if self.witness.is_none() || w.ratio > self.best {
            self.best = w.ratio;
            self.witness = Some(w);
        }
    }
}

fn product(factors: &[AlgElement]) -> AlgElement {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.mul(f);
    }
    out
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Σ_j ‖f_j‖ · sup_S |Π_{k≠j} f_k| where S is the whole net or the closed
/// ball `local`.
fn p_factor_rhs(
    factors: &[AlgElement],
    norms: &[f64],
    local: Option<(&crate::space::Point, f64)>,
) -> f64 {
    let mut rhs = 0.0;
    for j in 0..factors.len() {
        let others: Vec<AlgElement> = factors
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, f)| f.clone())
            .collect();
        let rest = AlgElement::with_parts(
            factors[0].space().clone(),
            (0..factors[0].samples().len())
                .map(|i| others.iter().map(|f| f.samples()[i]).product())
                .collect(),
            None,
        );
        let s = match local {
            Some((c, r)) => restricted_sup(&rest, c, r),
            None => sup(rest.samples()),
        };
        rhs += norms[j] * s;
    }
    rhs
}

/// Estimate the constants of the two-factor, p-factor (p ≤ 4) and local
/// product inequalities from `trials` random draws per inequality.
pub fn check_factorization_inequality(
    space: &Arc<NetSpace>,
    alg: &AlgebraTag,
    sampler: &mut Sampler,
    trials: usize,
) -> Result<FactorizationEstimate> {
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    let mut two = Tracker::new();
    let mut per_p = [Tracker::new(), Tracker::new(), Tracker::new()];
    let mut local = Tracker::new();
    let mut skipped = 0usize;
    let mut attempted = 0usize;

    for trial in 0..trials {
        // Global p-factor inequality, p = 2, 3, 4. The p = 2 case is the
        // two-factor inequality.
        for p in 2..=4usize {
            attempted += 1;
            let factors: Vec<AlgElement> = (0..p)
                .map(|_| sampler.element(space, alg))
                .collect::<Result<_>>()?;
            let norms: Vec<f64> = factors.iter().map(|f| norm(f, alg)).collect::<Result<_>>()?;
            let prod = product(&factors).prepared_for(alg, CHECK_FOURIER_DEGREE)?;
            let lhs = norm(&prod, alg)?;
            let rhs = p_factor_rhs(&factors, &norms, None);
            if !(rhs > 0.0) || !lhs.is_finite() {
                skipped += 1;
                continue;
            }
            let w = Witness {
                inequality: if p == 2 { "two-factor".into() } else { "p-factor".into() },
                p,
                trial,
                lhs,
                rhs,
                ratio: lhs / rhs,
            };
            if p == 2 {
                two.push(w.clone());
            }
            per_p[p - 2].push(Witness {
                inequality: "p-factor".into(),
                ..w
            });
        }

        // Local version: the first factor is cut off by a bump in a random
        // ball V, so the product is supported in V.
        attempted += 1;
        let p = sampler.rng().random_range(2..=4usize);
        let center = sampler.point(space);
        let h = space.resolution();
        let hi = (0.5 * space.diameter()).max(3.0 * h);
        let radius = sampler.rng().random_range(2.5 * h..=hi);
        let cut = bump(space, &center, radius, alg.alpha())?;
        let mut factors: Vec<AlgElement> = Vec::with_capacity(p);
        factors.push(
            cut.mul(&sampler.element(space, alg)?)
                .prepared_for(alg, CHECK_FOURIER_DEGREE)?,
        );
        for _ in 1..p {
            factors.push(sampler.element(space, alg)?);
        }
        let norms: Vec<f64> = factors.iter().map(|f| norm(f, alg)).collect::<Result<_>>()?;
        let prod = product(&factors).prepared_for(alg, CHECK_FOURIER_DEGREE)?;
        let lhs = norm(&prod, alg)?;
        let rhs = p_factor_rhs(&factors, &norms, Some((&center, radius)));
        if !(rhs > 0.0) || !lhs.is_finite() {
            skipped += 1;
            continue;
        }
        local.push(Witness {
            inequality: "local".into(),
            p,
            trial,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }

    if skipped * 10 > attempted * 9 {
        return Err(Error::DegenerateSample { trials: attempted });
    }
    let candidates = [&two, &per_p[0], &per_p[1], &per_p[2], &local];
    let worst = candidates
        .iter()
        .filter_map(|t| t.witness.clone())
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .ok_or(Error::DegenerateSample { trials: attempted })?;
    Ok(FactorizationEstimate {
        algebra: alg.name().to_string(),
        trials,
        skipped,
        c_two_factor: two.best,
        c_p_factor: (2..=4).map(|p| (p, per_p[p - 2].best)).collect(),
        c_local: local.best,
        c_hat: worst.ratio,
        worst,
    })
}

/// |‖f+g‖ − ‖f−g‖| / ‖f+g‖, zero when f + g = 0.
pub fn pair_asymmetry(f: &AlgElement, g: &AlgElement, alg: &AlgebraTag) -> Result<f64> {
    let plus = norm(&f.add(g), alg)?;
    let minus = norm(&f.sub(g), alg)?;
    Ok(if plus == 0.0 { 0.0 } else { (plus - minus).abs() / plus })
}

/// Largest relative gap between ‖f+g‖ and ‖f−g‖ over pairs with disjoint
/// supports drawn by [`Sampler::disjoint_pair`].
pub fn check_disjoint_support_symmetry(
    space: &Arc<NetSpace>,
    alg: &AlgebraTag,
    sampler: &mut Sampler,
    trials: usize,
    tolerance: f64,
) -> Result<SymmetryEstimate> {
    let mut max_asymmetry: f64 = 0.0;
    let mut worst_trial = 0;
    for trial in 0..trials {
        let (f, g) = sampler.disjoint_pair(space, alg)?;
        let a = pair_asymmetry(&f, &g, alg)?;
        if a > max_asymmetry {
            max_asymmetry = a;
            worst_trial = trial;
        }
    }
    Ok(SymmetryEstimate {
        algebra: alg.name().to_string(),
        trials,
        max_asymmetry,
        worst_trial,
        tolerance,
        pass: max_asymmetry <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{holder_seminorm, PairKind};
    use crate::expr::Expr;

    fn circle(n: usize) -> Arc<NetSpace> {
        Arc::new(NetSpace::circle(n).unwrap())
    }

    #[test]
    fn sup_family_constant_is_at_most_half() {
        let c = circle(64);
        let est =
            check_factorization_inequality(&c, &AlgebraTag::sup(), &mut Sampler::new(3), 50)
                .unwrap();
        assert!(est.c_hat <= 0.5 + 1e-12, "{}", est.c_hat);
        assert_eq!(est.c_p_factor.len(), 3);
    }

    #[test]
    fn wiener_two_plus_z_ratio_is_half() {
        let c = circle(64);
        let f = AlgElement::from_expr(c.clone(), &Expr::parse("2+z").unwrap())
            .with_fourier(4)
            .unwrap();
        let tag = AlgebraTag::wiener();
        let n = norm(&f, &tag).unwrap();
        let lhs = norm(&f.mul(&f), &tag).unwrap();
        let rhs = p_factor_rhs(&[f.clone(), f.clone()], &[n, n], None);
        assert!((lhs - 9.0).abs() < 1e-12);
        assert!((rhs - 18.0).abs() < 1e-12);
    }

    #[test]
    fn lip_real_part_ratio_matches_brute_force() {
        let c = circle(128);
        let f = AlgElement::from_expr(c.clone(), &Expr::parse("(z+zbar)/2").unwrap());
        let tag = AlgebraTag::lip(1.0).unwrap();
        let sq = f.mul(&f);
        // Brute force both sides directly from samples.
        let pts = c.points();
        let v: Vec<f64> = pts.iter().map(|p| p.z.re).collect();
        let mut semi_f: f64 = 0.0;
        let mut semi_sq: f64 = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                let d = (pts[i].z - pts[j].z).norm();
                if d > 0.0 {
                    semi_f = semi_f.max((v[i] - v[j]).abs() / d);
                    semi_sq = semi_sq.max((v[i] * v[i] - v[j] * v[j]).abs() / d);
                }
            }
        }
        let want = (1.0 + semi_sq) / (2.0 * (1.0 + semi_f) * 1.0);
        let n = norm(&f, &tag).unwrap();
        let got = norm(&sq, &tag).unwrap() / p_factor_rhs(&[f.clone(), f.clone()], &[n, n], None);
        assert!((got - want).abs() < 1e-12);
        assert!((holder_seminorm(&f, 1.0, f64::INFINITY) - semi_f).abs() < 1e-15);
    }

    #[test]
    fn lip_disjoint_bumps_are_symmetric() {
        let c = circle(256);
        for alpha in [1.0, 0.5] {
            let tag = AlgebraTag::lip(alpha).unwrap();
            let est =
                check_disjoint_support_symmetry(&c, &tag, &mut Sampler::new(11), 30, 0.0).unwrap();
            assert_eq!(est.max_asymmetry, 0.0, "alpha {alpha}");
            assert!(est.pass);
        }
        let mut g = Sampler::new(2);
        let (f, _) = g.disjoint_bumps(&c, &AlgebraTag::lip(1.0).unwrap()).unwrap();
        let zero = f.scale(Complex64::new(0.0, 0.0));
        assert_eq!(pair_asymmetry(&f, &zero, &AlgebraTag::lip(1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn wiener_sign_split_is_not_symmetric() {
        // Oracle: with δ → 0 the pair tends to (sin⁺, −sin⁻), and
        // ‖|sin|‖_W = 2/π + (4/π)·Σ 1/(4k²−1) = 4/π while ‖sin‖_W = 1.
        let c = circle(512);
        let est = check_disjoint_support_symmetry(
            &c,
            &AlgebraTag::wiener(),
            &mut Sampler::new(5).with_pairs(PairKind::SignSplit),
            10,
            1e-6,
        )
        .unwrap();
        assert!(est.max_asymmetry > 0.1, "{}", est.max_asymmetry);
        assert!(!est.pass);
    }
}
