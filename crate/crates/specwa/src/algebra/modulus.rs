use serde::{Deserialize, Serialize};

use super::AlgElement;
use crate::error::{Error, Result};
use crate::space::{NetSpace, SpaceKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusOfContinuity {
    /// Increasing scales.
    pub deltas: Vec<f64>,
    /// ω(δ) = sup over net pairs with d ≤ δ of |w(x) − w(y)|.
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiniVerdict {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub modulus: ModulusOfContinuity,
    /// Fitted ω(δ) ≈ A δ^β on the small reliable scales; None when ω ≡ 0.
    pub beta: Option<f64>,
    pub amplitude: Option<f64>,
    /// ∫₀¹ ω(δ) δ^{−3/2} dδ, None when the fitted tail diverges.
    pub dini_integral: Option<f64>,
    pub verdict: DiniVerdict,
    /// Σ |w(x_{i+1}) − w(x_i)| around the circle (circle nets only).
    pub total_variation: Option<f64>,
}

/// `count` geometric scales from 2h to the diameter.
pub fn geometric_scales(space: &NetSpace, count: usize) -> Vec<f64> {
    let lo = 2.0 * space.resolution();
    let hi = space.diameter();
    let count = count.max(2);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Modulus of continuity of `w` on the given scales and the Dini-type
/// integral ∫₀¹ ω(δ)/δ^{3/2} dδ.
///
/// The integral is the trapezoid rule on the sampled scales inside (0, 1]
/// plus the analytic tail of a power law fitted on the smaller half of the
/// scales at least 4h. It converges iff the fitted exponent exceeds ½.
pub fn modulus_and_dini(w: &AlgElement, deltas: &[f64]) -> Result<ModulusReport> {
    if deltas.len() < 4 {
        return Err(Error::TooFewScales(deltas.len()));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(f64::total_cmp);
    let space = w.space();
    let pts = space.points();
    let v = w.samples();

    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * (pts.len() - 1) / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            pairs.push((space.distance(&pts[i], &pts[j]), (v[i] - v[j]).norm()));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut omegas = Vec::with_capacity(deltas.len());
    let mut idx = 0;
    let mut running: f64 = 0.0;
    for &d in &deltas {
        while idx < pairs.len() && pairs[idx].0 <= d {
            running = running.max(pairs[idx].1);
            idx += 1;
        }
        omegas.push(running);
    }

    let total_variation = match space.kind() {
        SpaceKind::Circle { .. } => {
            let n = v.len();
            Some((0..n).map(|i| (v[(i + 1) % n] - v[i]).norm()).sum())
        }
        _ => None,
    };
    let modulus = ModulusOfContinuity {
        deltas: deltas.clone(),
        omegas: omegas.clone(),
    };

    if omegas.iter().all(|&o| o == 0.0) {
        return Ok(ModulusReport {
            modulus,
            beta: None,
            amplitude: None,
            dini_integral: Some(0.0),
            verdict: DiniVerdict::Convergent,
            total_variation,
        });
    }

    let h = space.resolution();
    let reliable: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&omegas)
        .filter(|(d, o)| **d >= 4.0 * h && **o > 0.0)
        .map(|(d, o)| (d.ln(), o.ln()))
        .collect();
    if reliable.len() < 3 {
        return Err(Error::TooFewScales(reliable.len()));
    }
    let fit = &reliable[..(reliable.len() / 2).max(3)];
    let (beta, log_a) = least_squares(fit);
    let amplitude = log_a.exp();

    let inside: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&omegas)
        .filter(|(d, _)| **d <= 1.0)
        .map(|(d, o)| (*d, o / d.powf(1.5)))
        .collect();
    let mut integral = 0.0;
    for pair in inside.windows(2) {
        integral += 0.5 * (pair[1].0 - pair[0].0) * (pair[0].1 + pair[1].1);
    }
    let d0 = inside.first().map_or(deltas[0], |p| p.0);
    let (dini_integral, verdict) = if beta > 0.5 {
        let tail = amplitude * d0.powf(beta - 0.5) / (beta - 0.5);
        (Some(integral + tail), DiniVerdict::Convergent)
    } else {
        (None, DiniVerdict::Divergent)
    };
    Ok(ModulusReport {
        modulus,
        beta: Some(beta),
        amplitude: Some(amplitude),
        dini_integral,
        verdict,
        total_variation,
    })
}

/// Slope and intercept of the least-squares line through `pts`.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;

    fn circle(n: usize) -> Arc<NetSpace> {
        Arc::new(NetSpace::circle(n).unwrap())
    }

    #[test]
    fn lipschitz_weight_converges() {
        let c = circle(512);
        let w = AlgElement::from_fn(c.clone(), |p| Complex64::new(2.0, 0.0) + p.z);
        let r = modulus_and_dini(&w, &geometric_scales(&c, 24)).unwrap();
        let beta = r.beta.unwrap();
        assert!((beta - 1.0).abs() < 0.1, "{beta}");
        assert_eq!(r.verdict, DiniVerdict::Convergent);
        for (d, o) in r.modulus.deltas.iter().zip(&r.modulus.omegas) {
            assert!(*o <= d + 1e-12);
        }
        assert!(r.modulus.omegas.windows(2).all(|p| p[0] <= p[1]));
        // Total variation of z around the circle is its length, up to the
        // polygonal approximation.
        assert!((r.total_variation.unwrap() - std::f64::consts::TAU).abs() < 1e-3);
    }

    #[test]
    fn rough_weights_diverge() {
        let c = circle(2048);
        let scales = geometric_scales(&c, 24);
        let cusp = AlgElement::from_fn(c.clone(), |p| Complex64::new(p.z.arg().abs().powf(0.3), 0.0));
        let r = modulus_and_dini(&cusp, &scales).unwrap();
        assert!(r.beta.unwrap() <= 0.5);
        assert_eq!(r.verdict, DiniVerdict::Divergent);
        assert_eq!(r.dini_integral, None);

        let wiggle = AlgElement::from_fn(c.clone(), |p| {
            let t = p.z.arg();
            let v = if t == 0.0 { 0.0 } else { t.abs().sqrt() * (1.0 / t).sin() };
            Complex64::new(v, 0.0)
        });
        let r = modulus_and_dini(&wiggle, &scales).unwrap();
        assert_eq!(r.verdict, DiniVerdict::Divergent, "{:?}", r.beta);
    }

    #[test]
    fn constant_has_zero_integral() {
        let c = circle(64);
        let w = AlgElement::constant(c.clone(), Complex64::new(3.0, 0.0));
        let r = modulus_and_dini(&w, &geometric_scales(&c, 8)).unwrap();
        assert_eq!(r.dini_integral, Some(0.0));
        assert_eq!(r.verdict, DiniVerdict::Convergent);
        assert!(matches!(modulus_and_dini(&w, &[0.1, 0.2]), Err(Error::TooFewScales(2))));
    }
}
