use serde::{Deserialize, Serialize};

use super::{orbit_logs, prefix};
use crate::error::{Error, Result};
use crate::operator::WeightedOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelLabel {
    K1,
    K2,
    O,
    #[serde(rename = "undecided")]
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLevel {
    pub label: LevelLabel,
    /// Forward Lyapunov estimate (1/H)·ln|w_H(s)|.
    pub forward: f64,
    /// Backward estimate (1/H)·ln|w_H(φ^{−H}s)|.
    pub backward: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub k1: usize,
    pub k2: usize,
    pub o: usize,
    pub undecided: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDecomposition {
    pub lambda_abs: f64,
    pub horizon: usize,
    pub margin: f64,
    /// One entry per net point, in net order.
    pub points: Vec<PointLevel>,
    pub counts: LevelCounts,
    /// Points decided at horizon H whose label changed at 2H; they are
    /// reported as undecided.
    pub demoted: usize,
}

impl LevelDecomposition {
    pub fn labels(&self) -> impl Iterator<Item = LevelLabel> + '_ {
        self.points.iter().map(|p| p.label)
    }
}

/// K1: both exponents below the level (forward-contracting invariant part).
/// K2: both above. O: forward below and backward above, so the forward orbit
/// accumulates where the cocycle contracts and the backward orbit where it
/// expands.
fn label(forward: f64, backward: f64, level: f64, margin: f64) -> LevelLabel {
    let below = |e: f64| e < level - margin;
    let above = |e: f64| e > level + margin;
    match (below(forward), above(forward), below(backward), above(backward)) {
        (true, _, true, _) => LevelLabel::K1,
        (_, true, _, true) => LevelLabel::K2,
        (true, _, _, true) => LevelLabel::O,
        _ => LevelLabel::Undecided,
    }
}

/// Classification at several levels sharing one orbit scan of length 2H
/// per point.
pub fn classify_many(
    op: &WeightedOp,
    levels: &[f64],
    horizon: usize,
    margin: f64,
) -> Result<Vec<LevelDecomposition>> {
    if !op.is_invertible() {
        return Err(Error::WeightNotInvertible);
    }
    if horizon == 0 || !(margin >= 0.0) || levels.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Invalid("classification needs positive levels and horizon, margin >= 0".into()));
    }
    let h = horizon as f64;
    let mut exps = Vec::with_capacity(op.space().len());
    for s in op.space().points() {
        let f = prefix(&orbit_logs(op, s, 2 * horizon, false)?);
        let b = prefix(&orbit_logs(op, s, 2 * horizon, true)?);
        exps.push((f[horizon] / h, b[horizon] / h, f[2 * horizon] / (2.0 * h), b[2 * horizon] / (2.0 * h)));
    }
    Ok(levels
        .iter()
        .map(|&lambda_abs| {
            let ll = lambda_abs.ln();
            let mut counts = LevelCounts::default();
            let mut demoted = 0;
            let points = exps
                .iter()
                .map(|&(f1, b1, f2, b2)| {
                    let first = label(f1, b1, ll, margin);
                    let second = label(f2, b2, ll, margin);
                    let label = if first == second {
                        first
                    } else {
                        if first != LevelLabel::Undecided {
                            demoted += 1;
                        }
                        LevelLabel::Undecided
                    };
                    match label {
                        LevelLabel::K1 => counts.k1 += 1,
                        LevelLabel::K2 => counts.k2 += 1,
                        LevelLabel::O => counts.o += 1,
                        LevelLabel::Undecided => counts.undecided += 1,
                    }
                    PointLevel {
                        label,
                        forward: f1,
                        backward: b1,
                    }
                })
                .collect();
            LevelDecomposition {
                lambda_abs,
                horizon,
                margin,
                points,
                counts,
                demoted,
            }
        })
        .collect())
}

/// Split the net into K1, K2, O and undecided points at level |λ| from
/// finite-horizon Lyapunov estimates. A point keeps a decided label only if
/// the same label comes out at horizons H and 2H.
pub fn classify_levels(op: &WeightedOp, lambda_abs: f64, horizon: usize, margin: f64) -> Result<LevelDecomposition> {
    Ok(classify_many(op, &[lambda_abs], horizon, margin)?.remove(0))
}
