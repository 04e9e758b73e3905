//! What can be concluded about σ(T) and σ(Ť): invariant-measure radii,
//! neutral-point circle certificates, level decompositions, approximate
//! eigenvectors and eigenfunctionals, and the assembled report.

mod certificates;
mod eigen;
mod levels;
mod radii;
mod report;

pub use certificates::{
    neutral_point_search, neutral_scan, summability_check, verify_neutral_point, NeutralPointCertificate,
    Summability, SummabilityVerdict, NEUTRAL_CERTIFICATE_KIND, SUMMABILITY_EXPONENT,
};
pub use eigen::{
    approximate_eigenvector, composition_deltas, eigenfunctional, epsilon_schedule, residual_decay,
    ApproxEigenvector, DeltaSource, Eigenfunctional, EigenvectorStep, EpsilonSchedule, FunctionalDefect, ResidualDecay, ScheduleBranch,
    WindowChoice, LIMSUP_THRESHOLD,
};
pub use levels::{classify_levels, classify_many, LevelCounts, LevelDecomposition, LevelLabel, PointLevel};
pub use radii::{
    variational_radii, wiener_circle_constant, AnnulusShape, InvariantMeasureEstimate, VariationalRadii,
    WienerConstant, MIN_QUADRATURE_NODES,
};
pub use report::{
    assemble_report, assemble_report_timed, Annulus, Aperiodicity, CertificateSection, CertifiedCircle, Claim,
    ClaimKind, Comparison, ConditionVerdicts, Connectedness, EigenvectorSection, FirstCategory, FunctionalSection,
    LevelSummary, LevelsSection, PowerNormRoots, RadiiSection, ReportConfig, RotationInvariance, Section,
    SectionFailure, SectionTiming, SpectrumReport, TruncationSection,
};

use crate::error::{Error, Result};
use crate::operator::WeightedOp;
use crate::space::Point;

/// ln|w(φᵏs)| for k = 0..n, failing on the first step where |w| drops
/// below the declared lower bound (or vanishes).
pub(crate) fn orbit_logs(op: &WeightedOp, s: &Point, n: usize, backward: bool) -> Result<Vec<f64>> {
    op.dynamics().check_orbit_len(n as u64)?;
    let floor = op.w_min();
    let mut out = Vec::with_capacity(n);
    let mut p = *s;
    for k in 0..n {
        if backward {
            p = op.dynamics().inverse(&p);
        }
        let m = op.weight_at(&p).norm();
        if !(m > 0.0) || m < floor || !m.is_finite() {
            let step = if backward { -(k as i64) - 1 } else { k as i64 };
            return Err(Error::WeightVanishesOnOrbit { step });
        }
        out.push(m.ln());
        if !backward {
            p = op.dynamics().forward(&p);
        }
    }
    Ok(out)
}

/// Prefix sums with a leading zero.
pub(crate) fn prefix(logs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(logs.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for l in logs {
        acc += l;
        out.push(acc);
    }
    out
}

/// (1/n)·Σ_{k<n} ln|w(φᵏs)|.
pub fn birkhoff_log_mean(op: &WeightedOp, s: &Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Invalid("Birkhoff mean needs n >= 1".into()));
    }
    let logs = orbit_logs(op, s, n, false)?;
    Ok(logs.iter().sum::<f64>() / n as f64)
}
