use serde::{Deserialize, Serialize};

use super::{orbit_logs, prefix};
use crate::algebra::AlgebraTag;
use crate::error::{Error, Result};
use crate::operator::WeightedOp;
use crate::space::Point;

pub const NEUTRAL_CERTIFICATE_KIND: &str = "Proposition 1 cocycle inequalities, finite horizon";

/// Fitted growth exponents at or below this count as summable.
pub const SUMMABILITY_EXPONENT: f64 = 0.8;

/// Outcome of scanning the net for a point whose forward cocycle stays
/// below λⁿ and whose backward cocycle stays above λⁿ, up to e^{±slack·n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutralPointCertificate {
    pub lambda_abs: f64,
    pub n_max: usize,
    pub slack: f64,
    pub kind: String,
    pub certified: bool,
    /// The net point with the smallest worst violation.
    pub point: Point,
    pub index: usize,
    /// max over n of max(ln|w_n(s)| − n ln λ, n ln λ − ln|w_n(φ⁻ⁿs)|)/n.
    pub max_rate: f64,
    /// Same maximum without the division by n, clipped below at 0.
    pub max_log_violation: f64,
}

impl NeutralPointCertificate {
    pub fn certified_point(&self) -> Option<Point> {
        self.certified.then_some(self.point)
    }
}

fn violation(fwd: &[f64], bwd: &[f64], log_lambda: f64) -> (f64, f64) {
    let mut rate = f64::NEG_INFINITY;
    let mut raw: f64 = 0.0;
    for n in 1..fwd.len() {
        let nl = n as f64 * log_lambda;
        let v = (fwd[n] - nl).max(nl - bwd[n]);
        rate = rate.max(v / n as f64);
        raw = raw.max(v);
    }
    (rate, raw)
}

/// Neutral-point search at several levels at once; the cocycle prefixes of
/// each net point are computed once and shared by all levels.
pub fn neutral_scan(op: &WeightedOp, levels: &[f64], n_max: usize, slack: f64) -> Result<Vec<NeutralPointCertificate>> {
    if !op.is_invertible() {
        return Err(Error::WeightNotInvertible);
    }
    if levels.iter().any(|l| !(*l > 0.0) || !l.is_finite()) || n_max == 0 || !(slack >= 0.0) {
        return Err(Error::Invalid("neutral search needs positive levels, n_max >= 1 and slack >= 0".into()));
    }
    let logs: Vec<f64> = levels.iter().map(|l| l.ln()).collect();
    let mut best: Vec<Option<(f64, f64, usize)>> = vec![None; levels.len()];
    for (i, s) in op.space().points().iter().enumerate() {
        let fwd = prefix(&orbit_logs(op, s, n_max, false)?);
        let bwd = prefix(&orbit_logs(op, s, n_max, true)?);
        for (b, &ll) in best.iter_mut().zip(&logs) {
            let (rate, raw) = violation(&fwd, &bwd, ll);
            if b.is_none_or(|(r, _, _)| rate < r) {
                *b = Some((rate, raw, i));
            }
        }
    }
    let pts = op.space().points();
    Ok(levels
        .iter()
        .zip(best)
        .map(|(&lambda_abs, b)| {
            let (rate, raw, i) = b.expect("net is non-empty");
            NeutralPointCertificate {
                lambda_abs,
                n_max,
                slack,
                kind: NEUTRAL_CERTIFICATE_KIND.into(),
                certified: rate <= slack,
                point: pts[i],
                index: i,
                max_rate: rate,
                max_log_violation: raw,
            }
        })
        .collect())
}

/// Scan every net point for one satisfying |w_n(s)| ≤ λⁿe^{slack·n} and
/// |w_n(φ⁻ⁿs)| ≥ λⁿe^{−slack·n} for 1 ≤ n ≤ n_max. The best point is
/// returned whether or not it qualifies.
pub fn neutral_point_search(
    op: &WeightedOp,
    lambda_abs: f64,
    n_max: usize,
    slack: f64,
) -> Result<NeutralPointCertificate> {
    Ok(neutral_scan(op, &[lambda_abs], n_max, slack)?.remove(0))
}

/// Independent re-check of a certificate: every inequality is recomputed
/// from a fresh cocycle evaluation. Returns the worst rate found.
pub fn verify_neutral_point(op: &WeightedOp, s: &Point, lambda_abs: f64, n_max: usize) -> Result<f64> {
    let ll = lambda_abs.ln();
    let mut worst = f64::NEG_INFINITY;
    let mut back = *s;
    for n in 1..=n_max {
        back = op.dynamics().inverse(&back);
        let f = op.cocycle(s, n as i64)?.log_magnitude;
        let b = op.cocycle(&back, n as i64)?.log_magnitude;
        let nl = n as f64 * ll;
        worst = worst.max((f - nl).max(nl - b) / n as f64);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summability {
    ConvergentLikely,
    DivergentLikely,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityVerdict {
    pub horizon: usize,
    /// Σ_{|k| ≤ n} |ln‖Ťᵏ‖|/(1 + k²) at n = 1, 2, 4, … and n = horizon.
    pub partial_sums: Vec<(usize, f64)>,
    /// Fitted b in |ln‖Ťⁿ‖| ≈ a·nᵇ for n ≥ 1 and n ≤ −1; None when the
    /// terms vanish.
    pub forward_exponent: Option<f64>,
    pub backward_exponent: Option<f64>,
    pub backward_included: bool,
    pub verdict: Summability,
    /// Always true: a finite horizon cannot decide convergence.
    pub heuristic: bool,
}

/// Least-squares slope of ln|L_n| against ln n over the upper seven eighths
/// of the range, skipping vanishing terms.
fn growth_exponent(logs: &[f64]) -> Option<f64> {
    let n_max = logs.len() - 1;
    let pts: Vec<(f64, f64)> = (1.max(n_max / 8)..=n_max)
        .filter(|&n| logs[n].abs() > 1e-12)
        .map(|n| ((n as f64).ln(), logs[n].abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Partial sums of Σ |ln‖Ťⁿ‖|/(1+n²) over |n| ≤ N with the sup-family
/// norms of Ťⁿ, and a power-law growth fit of the terms.
pub fn summability_check(op: &WeightedOp, horizon: usize) -> Result<SummabilityVerdict> {
    if horizon == 0 {
        return Err(Error::Invalid("summability check needs a positive horizon".into()));
    }
    let sup = op.with_alg(AlgebraTag::sup())?;
    let (fwd, bwd) = sup.sup_log_norms(horizon)?;
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    let mut checkpoint = 1;
    for n in 1..=horizon {
        acc += fwd[n].abs() / (1.0 + (n * n) as f64);
        if let Some(b) = &bwd {
            acc += b[n].abs() / (1.0 + (n * n) as f64);
        }
        if n == checkpoint || n == horizon {
            partial_sums.push((n, acc));
            checkpoint *= 2;
        }
    }
    let forward_exponent = growth_exponent(&fwd);
    let backward_exponent = bwd.as_deref().and_then(growth_exponent);
    let worst = forward_exponent.into_iter().chain(backward_exponent).fold(f64::NEG_INFINITY, f64::max);
    Ok(SummabilityVerdict {
        horizon,
        partial_sums,
        forward_exponent,
        backward_exponent,
        backward_included: bwd.is_some(),
        verdict: if worst <= SUMMABILITY_EXPONENT {
            Summability::ConvergentLikely
        } else {
            Summability::DivergentLikely
        },
        heuristic: true,
    })
}
