use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::certificates::{neutral_scan, summability_check, NeutralPointCertificate, Summability, SummabilityVerdict};
use super::eigen::{residual_decay, ResidualDecay, WindowChoice};
use super::eigen::{eigenfunctional, Eigenfunctional, FunctionalDefect};
use super::levels::{classify_many, LevelCounts, LevelDecomposition, LevelLabel};
use super::radii::{variational_radii, wiener_circle_constant, AnnulusShape, VariationalRadii, WienerConstant};
use crate::algebra::{
    check_disjoint_support_symmetry, check_factorization_inequality, geometric_scales, modulus_and_dini,
    AlgElement, AlgebraMetadata, AlgebraTag, DiniVerdict, Family, FactorizationEstimate, ModulusReport, PairKind,
    Sampler, SymmetryEstimate,
};
use crate::error::{Error, Result};
use crate::operator::{hausdorff, TruncationSpectrumReport, WeightedOp};
use crate::space::{detect_period, Dynamics, DynamicsKind, NetSpace, Point, SpaceKind};

/// Fraction of periodic net points still counted as first category.
const FIRST_CATEGORY_THRESHOLD: f64 = 0.1;
/// Exact dynamics return to the same node; this only absorbs rounding.
const EXACT_PERIOD_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-9;
/// Allowed gap between the two radius estimators on top of their error bars.
const RADII_AGREEMENT: f64 = 1e-3;
const COMPARISON_POWER: i64 = 16;
const FUNCTIONAL_TESTS: usize = 20;
/// Rate ties below this count as a plateau of neutral levels.
const LOCAL_MIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Conditions,
    Radii,
    Certificates,
    Levels,
    Truncation,
    Eigenvectors,
    Functionals,
    Comparison,
    Claims,
}

impl Section {
    pub const ALL: [Section; 9] = [
        Section::Conditions,
        Section::Radii,
        Section::Certificates,
        Section::Levels,
        Section::Truncation,
        Section::Eigenvectors,
        Section::Functionals,
        Section::Comparison,
        Section::Claims,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Conditions => "conditions",
            Section::Radii => "radii",
            Section::Certificates => "certificates",
            Section::Levels => "levels",
            Section::Truncation => "truncation",
            Section::Eigenvectors => "eigenvectors",
            Section::Functionals => "functionals",
            Section::Comparison => "comparison",
            Section::Claims => "claims",
        }
    }

    pub fn prerequisites(self) -> &'static [Section] {
        match self {
            Section::Certificates | Section::Levels => &[Section::Radii],
            Section::Eigenvectors => &[Section::Radii, Section::Certificates],
            Section::Functionals => &[Section::Radii, Section::Levels],
            Section::Claims => &[Section::Conditions, Section::Radii, Section::Certificates, Section::Truncation],
            _ => &[],
        }
    }

    /// The requested sections plus everything they depend on, in run order.
    pub fn closure(requested: &[Section]) -> Vec<Section> {
        let mut set: BTreeSet<Section> = BTreeSet::new();
        let mut stack: Vec<Section> = requested.to_vec();
        while let Some(s) = stack.pop() {
            if set.insert(s) {
                stack.extend_from_slice(s.prerequisites());
            }
        }
        set.into_iter().collect()
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Section::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown section '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub seed: u64,
    /// Horizon of the neutral-point scans.
    pub n_max: usize,
    pub slack: f64,
    pub birkhoff_horizon: usize,
    pub birkhoff_seeds: usize,
    pub period_horizon: u64,
    pub summability_n: usize,
    pub checker_trials: usize,
    pub level_margin: f64,
    pub level_horizon: usize,
    pub grid_levels: usize,
    pub truncation_ns: Vec<usize>,
    pub eigenvector_ns: Vec<usize>,
    pub functional_n: usize,
    pub quadrature_nodes: usize,
    pub rotation_trials: usize,
    pub sections: Vec<Section>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            seed: 0,
            n_max: 1000,
            slack: 0.05,
            birkhoff_horizon: 10_000,
            birkhoff_seeds: 4,
            period_horizon: 50,
            summability_n: 200,
            checker_trials: 200,
            level_margin: 0.05,
            level_horizon: 256,
            grid_levels: 33,
            truncation_ns: vec![8, 16, 32],
            eigenvector_ns: vec![8, 16, 32, 64],
            functional_n: 60,
            quadrature_nodes: 8192,
            rotation_trials: 16,
            sections: Section::ALL.to_vec(),
        }
    }
}

impl ReportConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_max", self.n_max),
            ("birkhoff_horizon", self.birkhoff_horizon),
            ("birkhoff_seeds", self.birkhoff_seeds),
            ("period_horizon", self.period_horizon as usize),
            ("summability_n", self.summability_n),
            ("checker_trials", self.checker_trials),
            ("level_horizon", self.level_horizon),
            ("grid_levels", self.grid_levels),
            ("functional_n", self.functional_n),
            ("quadrature_nodes", self.quadrature_nodes),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::ConfigInvalid(format!("{name} must be positive")));
            }
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) || !(self.level_margin >= 0.0 && self.level_margin.is_finite())
        {
            return Err(Error::ConfigInvalid("slack and level_margin must be finite and >= 0".into()));
        }
        if self.truncation_ns.contains(&0) || self.eigenvector_ns.contains(&0) {
            return Err(Error::ConfigInvalid("truncation and eigenvector orders must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionFailure {
    /// Section name, or "conditions.<check>" for a sub-check.
    pub section: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aperiodicity {
    /// Smallest p with sup d(φᵖx, x) below the tolerance over the net.
    pub period: Option<u64>,
    pub horizon: u64,
    pub tol: f64,
    pub aperiodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstCategory {
    pub tol: f64,
    pub periodic_fraction: f64,
    pub periodic_fractions: Vec<(u64, f64)>,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdicts {
    pub aperiodicity: Aperiodicity,
    pub first_category: FirstCategory,
    pub summability: Option<SummabilityVerdict>,
    pub metadata: AlgebraMetadata,
    pub invertible: bool,
    pub w_min: f64,
    /// Net the algebra checkers ran on.
    pub checker_space: SpaceKind,
    pub factorization: Option<FactorizationEstimate>,
    pub symmetry: Option<SymmetryEstimate>,
    /// Product inequalities: the empirical constants came out finite.
    pub factorization_pass: Option<bool>,
    pub symmetry_pass: Option<bool>,
    pub dini: Option<ModulusReport>,
    pub unavailable: Vec<SectionFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiSection {
    pub radii: VariationalRadii,
    pub wiener: Option<WienerConstant>,
    /// r̂ ≤ c ≤ R̂ within the error bars (circle nets only).
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    pub inner_error: f64,
    pub outer_error: f64,
    pub shape: AnnulusShape,
}

impl Annulus {
    pub fn contains_modulus(&self, r: f64) -> bool {
        r >= self.inner - self.inner_error && r <= self.outer + self.outer_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedCircle {
    pub lambda_abs: f64,
    pub kind: String,
    /// Worst per-step log violation at the certified point.
    pub residual: f64,
    pub point: Point,
    /// The certified point returns to itself within the period horizon.
    pub periodic_point: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSection {
    pub levels: Vec<f64>,
    pub scans: Vec<NeutralPointCertificate>,
    pub certified: Vec<CertifiedCircle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub lambda_abs: f64,
    pub counts: LevelCounts,
    pub demoted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsSection {
    pub summaries: Vec<LevelSummary>,
    /// Full per-point map at √(r̂R̂).
    pub map: LevelDecomposition,
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSection {
    pub spectra: TruncationSpectrumReport,
    /// Largest Hausdorff distance between the finest truncation spectrum and
    /// a random rotation of it.
    pub rotation_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorSection {
    pub lambda_abs: f64,
    pub on_certified_circle: bool,
    pub decay: ResidualDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSection {
    pub index: usize,
    pub functional: Eigenfunctional,
    pub defects: Vec<FunctionalDefect>,
    pub all_within: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerNormRoots {
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: i64,
    pub checker_space: SpaceKind,
    /// ‖Tⁿ‖^{1/n} in the algebra and on C(K), on the checker net.
    pub algebra: PowerNormRoots,
    pub sup: PowerNormRoots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClaimKind {
    /// σ(T) = σ(Ť) = {inner ≤ |λ| ≤ outer}.
    Annulus { inner: f64, outer: f64 },
    /// σ(T) = σ(Ť) = union of the circles of the given radii.
    CircleUnion { radii: Vec<f64> },
    /// σ(T) = σ(Ť), with moduli between inner and outer.
    AnnulusBracket { inner: f64, outer: f64 },
    /// σ(T) = c𝕋.
    CircleEquals { radius: f64 },
    /// r𝕋 ⊆ σ(T) for each listed radius.
    CirclesContained { radii: Vec<f64> },
    /// φ is periodic: the spectrum of the composition part is a finite union
    /// of finite subgroups of 𝕋, evidenced by the truncation eigenvalues.
    FiniteSubgroups { evidence: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub theorem: String,
    #[serde(flatten)]
    pub kind: ClaimKind,
    /// Numeric quality of the evidence: error bars, certificate rates, or
    /// truncation convergence.
    pub residual: f64,
    pub hypotheses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connectedness {
    pub connected: bool,
    pub basis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationInvariance {
    /// Claims are sets of full circles and annuli, so rotating them changes
    /// nothing.
    pub claims: f64,
    pub truncation: Option<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub algebra: AlgebraTag,
    pub space: SpaceKind,
    pub dynamics: DynamicsKind,
    pub sections: Vec<Section>,
    pub conditions: Option<ConditionVerdicts>,
    pub radii: Option<RadiiSection>,
    pub annulus: Option<Annulus>,
    pub certificates: Option<CertificateSection>,
    pub levels: Option<LevelsSection>,
    pub truncation: Option<TruncationSection>,
    pub eigenvectors: Option<EigenvectorSection>,
    pub functionals: Option<FunctionalSection>,
    pub comparison: Option<Comparison>,
    pub claims: Vec<Claim>,
    pub connectedness: Option<Connectedness>,
    pub rotation_invariance: Option<RotationInvariance>,
    /// Sections that did not apply to this operator (not failures).
    pub skipped: Vec<SectionFailure>,
    /// Sections that errored or panicked.
    pub failures: Vec<SectionFailure>,
    pub notes: Vec<String>,
}

impl SpectrumReport {
    pub fn completed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Whether 𝕋 ⊆ σ(T) is among the claims.
    pub fn certifies_unit_circle(&self) -> bool {
        self.claims.iter().any(|c| match &c.kind {
            ClaimKind::Annulus { inner, outer } | ClaimKind::AnnulusBracket { inner, outer } => {
                *inner <= 1.0 + 1e-9 && *outer >= 1.0 - 1e-9 && c.theorem != "Theorem 1"
            }
            ClaimKind::CircleUnion { radii } | ClaimKind::CirclesContained { radii } => {
                radii.iter().any(|r| (r - 1.0).abs() < 1e-9)
            }
            ClaimKind::CircleEquals { radius } => (radius - 1.0).abs() < 1e-9,
            ClaimKind::FiniteSubgroups { .. } => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionTiming {
    pub section: Section,
    pub millis: f64,
}

/// Net on which the algebra checkers and the norm comparison run: the same
/// kind of space as the operator's, at a size where O(N²) norms are cheap.
fn checker_space(space: &Arc<NetSpace>) -> Result<Arc<NetSpace>> {
    let coarse = match space.kind() {
        SpaceKind::Circle { n } if *n > 256 => NetSpace::circle(256)?,
        SpaceKind::Disc { circles, per_circle } if circles * per_circle > 640 => {
            NetSpace::disc((*circles).min(13), (*per_circle).min(48))?
        }
        SpaceKind::Torus { n1, n2 } if n1 * n2 > 256 => NetSpace::torus(16, 16)?,
        SpaceKind::CircleUnion { count, n, gap } if count * n > 256 => {
            NetSpace::circle_union(*count, (256 / count).max(128.min(*n)), *gap)?
        }
        SpaceKind::Integers { n } if *n > 64 => NetSpace::integers(64)?,
        _ => return Ok(space.clone()),
    };
    Ok(Arc::new(coarse))
}

/// The operator rebuilt on `space` with the same weight formula, map and
/// algebra. Tabulated maps do not transfer and keep the original net.
fn rebuilt_on(op: &WeightedOp, space: Arc<NetSpace>) -> Result<WeightedOp> {
    if matches!(op.dynamics().kind(), DynamicsKind::Tabulated { .. }) || Arc::ptr_eq(&space, op.space()) {
        return Ok(op.clone());
    }
    let eval = op.weight().evaluator().cloned().ok_or(Error::MissingRepresentation("evaluator"))?;
    let w = AlgElement::from_evaluator(space.clone(), eval);
    let d = Dynamics::new(space, op.dynamics().kind().clone())?;
    let out = WeightedOp::new(w, d, *op.alg())?;
    Ok(if op.is_invertible() { out.clone().invertible().unwrap_or(out) } else { out })
}

fn sub<T>(unavailable: &mut Vec<SectionFailure>, name: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            unavailable.push(SectionFailure {
                section: format!("conditions.{name}"),
                error: e.to_string(),
            });
            None
        }
    }
}

fn conditions(op: &WeightedOp, cfg: &ReportConfig) -> Result<ConditionVerdicts> {
    let d = op.dynamics();
    let space = op.space();
    let h = space.resolution();
    let per = detect_period(d, cfg.period_horizon, h);
    let fc = if d.is_exact() {
        detect_period(d, cfg.period_horizon, EXACT_PERIOD_TOL)
    } else {
        per.clone()
    };
    let mut unavailable = Vec::new();
    let summability = sub(&mut unavailable, "summability", summability_check(op, cfg.summability_n));

    let coarse = checker_space(space)?;
    let alg = op.alg();
    let pairs = match (alg.family, coarse.kind()) {
        (Family::Wiener, SpaceKind::Circle { .. }) => PairKind::SignSplit,
        _ => PairKind::Bumps,
    };
    let mut sampler = Sampler::new(cfg.seed).with_pairs(pairs);
    if matches!(alg.family, Family::C1Disc) {
        // Sup norms of f ± g and of their gradients see disjoint supports
        // one at a time, so no extra spacing is needed.
        sampler = sampler.with_separation(3.0);
    }
    let factorization = sub(
        &mut unavailable,
        "factorization",
        check_factorization_inequality(&coarse, alg, &mut sampler, cfg.checker_trials),
    );
    let symmetry = sub(
        &mut unavailable,
        "symmetry",
        check_disjoint_support_symmetry(&coarse, alg, &mut sampler, cfg.checker_trials, SYMMETRY_TOL),
    );
    let dini = if matches!(space.kind(), SpaceKind::Circle { .. }) {
        let r = rebuilt_on(op, Arc::new(NetSpace::circle(1024)?))
            .and_then(|c| modulus_and_dini(c.weight(), &geometric_scales(c.space(), 24)));
        sub(&mut unavailable, "dini", r)
    } else {
        None
    };
    Ok(ConditionVerdicts {
        aperiodicity: Aperiodicity {
            period: per.period,
            horizon: per.horizon,
            tol: per.tol,
            aperiodic: per.period.is_none(),
        },
        first_category: FirstCategory {
            tol: fc.tol,
            periodic_fraction: fc.periodic_fraction,
            periodic_fractions: fc.periodic_fractions,
            threshold: FIRST_CATEGORY_THRESHOLD,
            pass: fc.periodic_fraction <= FIRST_CATEGORY_THRESHOLD,
        },
        summability,
        metadata: alg.metadata(),
        invertible: op.is_invertible(),
        w_min: op.w_min(),
        checker_space: coarse.kind().clone(),
        factorization_pass: factorization.as_ref().map(|f| f.c_hat.is_finite() && f.c_local.is_finite()),
        symmetry_pass: symmetry.as_ref().map(|s| s.pass),
        factorization,
        symmetry,
        dini,
        unavailable,
    })
}

fn radii_section(op: &WeightedOp, cfg: &ReportConfig) -> Result<RadiiSection> {
    let radii = variational_radii(op, cfg.birkhoff_horizon, cfg.birkhoff_seeds)?;
    let wiener = if matches!(op.space().kind(), SpaceKind::Circle { .. }) {
        wiener_circle_constant(op.weight(), cfg.quadrature_nodes).ok()
    } else {
        None
    };
    let consistent = wiener.as_ref().map(|w| {
        let lc = w.c.ln();
        lc >= radii.r_hat.ln() - radii.log_error_inner - RADII_AGREEMENT
            && lc <= radii.big_r_hat.ln() + radii.log_error_outer + RADII_AGREEMENT
    });
    Ok(RadiiSection {
        radii,
        wiener,
        consistent,
    })
}

/// Log-spaced levels on [0.9r̂, 1.1R̂] plus r̂, R̂ and √(r̂R̂) themselves.
fn level_grid(r: &VariationalRadii, count: usize) -> Vec<f64> {
    let (lo, hi) = ((0.9 * r.r_hat).ln(), (1.1 * r.big_r_hat).ln());
    let mut out: Vec<f64> = (0..count)
        .map(|i| {
            let t = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
            (lo + t * (hi - lo)).exp()
        })
        .collect();
    out.extend([r.r_hat, r.big_r_hat, (r.r_hat * r.big_r_hat).sqrt()]);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    out
}

fn map_level(r: &VariationalRadii) -> f64 {
    (r.r_hat * r.big_r_hat).sqrt()
}

fn is_periodic_point(d: &Dynamics, s: &Point, horizon: u64) -> bool {
    let tol = if d.is_exact() { EXACT_PERIOD_TOL } else { d.space().resolution() };
    (1..=horizon as i64).any(|p| d.space().distance(&d.iterate(s, p), s) < tol)
}

fn certificates(op: &WeightedOp, cfg: &ReportConfig, radii: &RadiiSection) -> Result<CertificateSection> {
    let levels = level_grid(&radii.radii, cfg.grid_levels);
    let scans = neutral_scan(op, &levels, cfg.n_max, cfg.slack)?;
    // Within the slack a whole band of levels passes around each neutral
    // one; only levels whose rate is a local minimum along the grid count.
    let rate = |i: usize| scans.get(i).map_or(f64::INFINITY, |c: &NeutralPointCertificate| c.max_rate);
    let certified = scans
        .iter()
        .enumerate()
        .filter(|&(i, c)| {
            let floor = c.max_rate - LOCAL_MIN_TOL;
            c.certified && floor <= rate(i + 1) && (i == 0 || floor <= rate(i - 1))
        })
        .map(|(_, c)| CertifiedCircle {
            lambda_abs: c.lambda_abs,
            kind: c.kind.clone(),
            residual: c.max_rate,
            point: c.point,
            periodic_point: is_periodic_point(op.dynamics(), &c.point, cfg.period_horizon),
        })
        .collect();
    Ok(CertificateSection {
        levels,
        scans,
        certified,
    })
}

const CONVENTION: &str = "K1 holds forward accumulation (forward-contracting set), K2 backward; \
the two printed statements of this split disagree and this one makes the eigenfunctional series converge";

fn levels_section(op: &WeightedOp, cfg: &ReportConfig, radii: &RadiiSection) -> Result<LevelsSection> {
    let mut levels = level_grid(&radii.radii, cfg.grid_levels);
    let m = map_level(&radii.radii);
    let mi = levels.iter().position(|l| *l == m).unwrap_or_else(|| {
        levels.push(m);
        levels.len() - 1
    });
    let all = classify_many(op, &levels, cfg.level_horizon, cfg.level_margin)?;
    let summaries = all
        .iter()
        .map(|d| LevelSummary {
            lambda_abs: d.lambda_abs,
            counts: d.counts,
            demoted: d.demoted,
        })
        .collect();
    Ok(LevelsSection {
        summaries,
        map: all[mi].clone(),
        convention: CONVENTION.into(),
    })
}

fn truncation(op: &WeightedOp, cfg: &ReportConfig) -> Result<TruncationSection> {
    if op.dynamics().circle_rotation_angle().is_none() {
        return Err(Error::UnsupportedDynamics("truncation spectra need a circle rotation".into()));
    }
    let spectra = op.truncation_spectra(&cfg.truncation_ns)?;
    let eigs = spectra.spectra.last().map(|s| s.eigenvalues.clone()).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rotation_score = (0..cfg.rotation_trials)
        .map(|_| {
            let e = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            let turned: Vec<Complex64> = eigs.iter().map(|z| z * e).collect();
            hausdorff(&eigs, &turned)
        })
        .fold(0.0, f64::max);
    Ok(TruncationSection {
        spectra,
        rotation_score,
    })
}

fn eigenvectors(
    op: &WeightedOp,
    cfg: &ReportConfig,
    radii: &RadiiSection,
    certs: &CertificateSection,
) -> Result<EigenvectorSection> {
    let target = map_level(&radii.radii);
    let best = certs
        .certified
        .iter()
        .filter(|c| !c.periodic_point)
        .min_by(|a, b| (a.lambda_abs - target).abs().total_cmp(&(b.lambda_abs - target).abs()));
    let (lambda_abs, on_certified_circle) = match best {
        Some(c) => (c.lambda_abs, true),
        None => (target, false),
    };
    let decay = residual_decay(op, Complex64::new(lambda_abs, 0.0), &cfg.eigenvector_ns, &WindowChoice::Auto)?;
    Ok(EigenvectorSection {
        lambda_abs,
        on_certified_circle,
        decay,
    })
}

fn functionals(op: &WeightedOp, cfg: &ReportConfig, levels: &LevelsSection) -> Result<Option<FunctionalSection>> {
    let map = &levels.map;
    let ll = map.lambda_abs.ln();
    // The O point whose two tails decay fastest.
    let Some(index) = map
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.label == LevelLabel::O)
        .max_by(|(_, a), (_, b)| (ll - a.forward).min(a.backward - ll).total_cmp(&(ll - b.forward).min(b.backward - ll)))
        .map(|(i, _)| i)
    else {
        return Ok(None);
    };
    let s = op.space().points()[index];
    let functional = eigenfunctional(op, Complex64::new(map.lambda_abs, 0.0), &s, cfg.functional_n)?;
    let mut sampler = Sampler::new(cfg.seed);
    let defects = (0..FUNCTIONAL_TESTS)
        .map(|_| sampler.element(op.space(), op.alg()).map(|f| functional.defect(op, &f)))
        .collect::<Result<Vec<_>>>()?;
    let all_within = defects.iter().all(|d| d.within);
    Ok(Some(FunctionalSection {
        index,
        functional,
        defects,
        all_within,
    }))
}

fn comparison(op: &WeightedOp) -> Result<Comparison> {
    let coarse = rebuilt_on(op, checker_space(op.space())?)?;
    let roots = |o: &WeightedOp| -> Result<PowerNormRoots> {
        let p = o.power_norm(COMPARISON_POWER)?;
        let n = COMPARISON_POWER as f64;
        Ok(PowerNormRoots {
            lower: (p.log_lower / n).exp(),
            upper: p.log_upper.map(|u| (u / n).exp()),
        })
    };
    Ok(Comparison {
        n: COMPARISON_POWER,
        checker_space: coarse.space().kind().clone(),
        algebra: roots(&coarse)?,
        sup: roots(&coarse.with_alg(AlgebraTag::sup())?)?,
    })
}

/// Per-component circle radii when every invariant structure is a whole
/// component or component cycle carrying a uniquely ergodic rotation.
fn component_circles(r: &VariationalRadii) -> Option<Vec<f64>> {
    if !r.witnesses.iter().all(|w| w.support.starts_with("invariant component") || w.support.starts_with("component cycle")) {
        return None;
    }
    let mut radii: Vec<f64> = r.witnesses.iter().map(|w| w.estimate.exp()).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    Some(radii)
}

struct Routing {
    claims: Vec<Claim>,
    connectedness: Option<Connectedness>,
}

fn route_claims(op: &WeightedOp, report: &SpectrumReport) -> Routing {
    let mut claims = Vec::new();
    let (Some(cond), Some(radii)) = (&report.conditions, &report.radii) else {
        return Routing {
            claims,
            connectedness: None,
        };
    };
    let r = &radii.radii;
    let meta = cond.metadata;
    let aperiodic = cond.aperiodicity.aperiodic && cond.first_category.pass;
    let space = op.space();
    let connected_k = space.is_connected();
    let annulus_residual = r.inner_error.max(r.outer_error);

    if !cond.aperiodicity.aperiodic {
        let evidence = report
            .truncation
            .as_ref()
            .and_then(|t| t.spectra.spectra.last())
            .map(|s| s.eigenvalues.clone())
            .unwrap_or_default();
        let residual = report
            .truncation
            .as_ref()
            .and_then(|t| t.spectra.hausdorff_steps.last().copied())
            .unwrap_or(0.0);
        claims.push(Claim {
            theorem: "Theorem 1".into(),
            kind: ClaimKind::FiniteSubgroups { evidence },
            residual,
            hypotheses: vec![format!("U^{} = I on the net", cond.aperiodicity.period.unwrap_or(0))],
        });
    }

    let theorem6 = meta.regular
        && meta.all_points_peak
        && aperiodic
        && cond.invertible
        && cond.factorization_pass == Some(true);
    let theorem7 = !meta.all_points_peak
        && aperiodic
        && cond.invertible
        && cond.factorization_pass == Some(true)
        && cond.symmetry_pass == Some(true);
    let mut annulus_claimed = false;
    if theorem6 || theorem7 {
        let theorem = if theorem6 { "Theorem 6" } else { "Theorem 7" };
        let kind = if connected_k {
            annulus_claimed = true;
            ClaimKind::Annulus {
                inner: r.r_hat,
                outer: r.big_r_hat,
            }
        } else if let Some(radii) = component_circles(r) {
            ClaimKind::CircleUnion { radii }
        } else {
            ClaimKind::AnnulusBracket {
                inner: r.r_hat,
                outer: r.big_r_hat,
            }
        };
        claims.push(Claim {
            theorem: theorem.into(),
            kind,
            residual: annulus_residual,
            hypotheses: vec![
                "regular algebra".into(),
                if theorem6 { "every point a peak point" } else { "disjoint-support symmetry" }.into(),
                "product inequalities consistent".into(),
                "periodic points of first category, no global period".into(),
                "invertible weight".into(),
            ],
        });
    }

    let is_circle = matches!(space.kind(), SpaceKind::Circle { .. });
    let wiener_circle = matches!(op.alg().family, Family::Wiener) && is_circle && op.dynamics().circle_rotation_angle().is_some();
    let mut circle_certified_at: Option<f64> = None;
    if wiener_circle && aperiodic && cond.invertible && !theorem6 && !theorem7 {
        if let Some(w) = &radii.wiener {
            let dini_ok = cond.dini.as_ref().is_some_and(|d| d.verdict == DiniVerdict::Convergent);
            let mut hypotheses = vec!["Wiener algebra on the circle".into(), "rotation not by a root of unity".into()];
            let kind = if dini_ok {
                hypotheses.push("Dini-type integral of the modulus of continuity converges".into());
                annulus_claimed = true;
                ClaimKind::CircleEquals { radius: w.c }
            } else {
                ClaimKind::CirclesContained { radii: vec![w.c] }
            };
            circle_certified_at = Some(w.c);
            claims.push(Claim {
                theorem: "Example 5".into(),
                kind,
                residual: w.richardson_gap,
                hypotheses,
            });
        }
    }

    let summable = cond.summability.as_ref().is_some_and(|s| s.verdict == Summability::ConvergentLikely);
    if aperiodic && summable && cond.invertible {
        claims.push(Claim {
            theorem: "Theorem 2".into(),
            kind: ClaimKind::CirclesContained { radii: vec![1.0] },
            residual: cond.summability.as_ref().and_then(|s| s.partial_sums.last()).map_or(0.0, |p| p.1),
            hypotheses: vec!["no global period".into(), "log-norm series summable (heuristic)".into(), "invertible weight".into()],
        });
    }

    if let Some(certs) = &report.certificates {
        let good: Vec<&CertifiedCircle> = certs.certified.iter().filter(|c| !c.periodic_point).collect();
        if meta.all_points_peak && !good.is_empty() {
            claims.push(Claim {
                theorem: "Proposition 1".into(),
                kind: ClaimKind::CirclesContained {
                    radii: good.iter().map(|c| c.lambda_abs).collect(),
                },
                residual: good.iter().map(|c| c.residual).fold(f64::NEG_INFINITY, f64::max),
                hypotheses: vec!["every point a peak point".into(), "non-periodic neutral point on the net".into()],
            });
            let single = (r.r_hat - r.big_r_hat).abs() <= r.inner_error + r.outer_error + 1e-12;
            if single {
                let tol = r.inner_error.max(r.outer_error).max(1e-12 * r.r_hat);
                if let Some(c) = good.iter().find(|c| (c.lambda_abs - r.r_hat).abs() <= tol) {
                    circle_certified_at.get_or_insert(c.lambda_abs);
                }
            }
        }
    }

    let single_circle = (r.r_hat - r.big_r_hat).abs() <= r.inner_error + r.outer_error + 1e-12;
    let connectedness = if !cond.invertible {
        Connectedness {
            connected: false,
            basis: "weight not invertible; no connectedness claim".into(),
        }
    } else if single_circle && circle_certified_at.is_some() {
        Connectedness {
            connected: true,
            basis: "σ(Ť) is a single circle contained in σ(T) (Theorem 4, rescaled)".into(),
        }
    } else if annulus_claimed && connected_k {
        Connectedness {
            connected: true,
            basis: "σ(T) equals an annulus over a connected space".into(),
        }
    } else {
        Connectedness {
            connected: false,
            basis: "hypotheses for a connectedness claim not verified".into(),
        }
    };
    Routing {
        claims,
        connectedness: Some(connectedness),
    }
}

/// Errors that mean "this question does not apply here" rather than a crash.
fn not_applicable(e: &Error) -> bool {
    matches!(
        e,
        Error::WeightNotInvertible
            | Error::NoAdmissibleWindow { .. }
            | Error::UnsupportedDynamics(_)
            | Error::TailsNotSummable { .. }
    )
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".into()
    }
}

struct Runner<'a> {
    report: &'a mut SpectrumReport,
    timings: Vec<SectionTiming>,
}

impl Runner<'_> {
    fn run<T>(&mut self, section: Section, f: impl FnOnce() -> Result<T>) -> Option<T> {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f));
        self.timings.push(SectionTiming {
            section,
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        let fail = |error: String| SectionFailure {
            section: section.name().into(),
            error,
        };
        match out {
            Ok(Ok(v)) => Some(v),
            Ok(Err(e)) if not_applicable(&e) => {
                self.report.skipped.push(fail(e.to_string()));
                None
            }
            Ok(Err(e)) => {
                self.report.failures.push(fail(e.to_string()));
                None
            }
            Err(p) => {
                self.report.failures.push(fail(panic_message(p)));
                None
            }
        }
    }

    fn missing(&mut self, section: Section, needs: Section) {
        self.report.failures.push(SectionFailure {
            section: section.name().into(),
            error: format!("prerequisite section {needs} did not complete"),
        });
    }
}

/// Run the requested sections (and their prerequisites) in order. A section
/// that errors or panics is recorded in `failures` and the rest still run.
pub fn assemble_report_timed(op: &WeightedOp, cfg: &ReportConfig) -> (SpectrumReport, Vec<SectionTiming>) {
    let sections = Section::closure(&cfg.sections);
    let mut report = SpectrumReport {
        algebra: *op.alg(),
        space: op.space().kind().clone(),
        dynamics: op.dynamics().kind().clone(),
        sections: sections.clone(),
        conditions: None,
        radii: None,
        annulus: None,
        certificates: None,
        levels: None,
        truncation: None,
        eigenvectors: None,
        functionals: None,
        comparison: None,
        claims: Vec::new(),
        connectedness: None,
        rotation_invariance: None,
        skipped: Vec::new(),
        failures: Vec::new(),
        notes: Vec::new(),
    };
    if let Err(e) = cfg.validate() {
        report.failures.push(SectionFailure {
            section: "config".into(),
            error: e.to_string(),
        });
        return (report, Vec::new());
    }
    let mut run = Runner {
        report: &mut report,
        timings: Vec::new(),
    };
    for &s in &sections {
        match s {
            Section::Conditions => run.report.conditions = run.run(s, || conditions(op, cfg)),
            Section::Radii => run.report.radii = run.run(s, || radii_section(op, cfg)),
            Section::Certificates => match run.report.radii.clone() {
                Some(r) => run.report.certificates = run.run(s, || certificates(op, cfg, &r)),
                None => run.missing(s, Section::Radii),
            },
            Section::Levels => match run.report.radii.clone() {
                Some(r) => run.report.levels = run.run(s, || levels_section(op, cfg, &r)),
                None => run.missing(s, Section::Radii),
            },
            Section::Truncation => run.report.truncation = run.run(s, || truncation(op, cfg)),
            Section::Eigenvectors => match (run.report.radii.clone(), run.report.certificates.clone()) {
                (Some(r), Some(c)) => run.report.eigenvectors = run.run(s, || eigenvectors(op, cfg, &r, &c)),
                (None, _) => run.missing(s, Section::Radii),
                (_, None) if run.report.skipped.iter().any(|f| f.section == "certificates") => {
                    run.report.skipped.push(SectionFailure {
                        section: s.name().into(),
                        error: "no certificate scan for this operator".into(),
                    });
                }
                (_, None) => run.missing(s, Section::Certificates),
            },
            Section::Functionals => match run.report.levels.clone() {
                Some(l) => match run.run(s, || functionals(op, cfg, &l)) {
                    Some(Some(f)) => run.report.functionals = Some(f),
                    Some(None) => run.report.skipped.push(SectionFailure {
                        section: s.name().into(),
                        error: format!("no O point at level {}", l.map.lambda_abs),
                    }),
                    None => {}
                },
                None if run.report.skipped.iter().any(|f| f.section == "levels") => {
                    run.report.skipped.push(SectionFailure {
                        section: s.name().into(),
                        error: "no level decomposition for this operator".into(),
                    });
                }
                None => run.missing(s, Section::Levels),
            },
            Section::Comparison => run.report.comparison = run.run(s, || comparison(op)),
            Section::Claims => {
                let snapshot = run.report.clone();
                let routed = run.run(s, || Ok(route_claims(op, &snapshot)));
                if let Some(r) = routed {
                    run.report.claims = r.claims;
                    run.report.connectedness = r.connectedness;
                    run.report.rotation_invariance = Some(RotationInvariance {
                        claims: 0.0,
                        truncation: run.report.truncation.as_ref().map(|t| t.rotation_score),
                        trials: cfg.rotation_trials,
                    });
                }
            }
        }
    }
    let timings = run.timings;

    if let Some(r) = &report.radii {
        let v = &r.radii;
        let (ie, oe) = if report.certificates.is_some() {
            (v.r_hat * (1.0 - (-cfg.slack).exp()), v.big_r_hat * (cfg.slack.exp() - 1.0))
        } else {
            (0.0, 0.0)
        };
        report.annulus = Some(Annulus {
            inner: v.r_hat,
            outer: v.big_r_hat,
            inner_error: v.inner_error + ie,
            outer_error: v.outer_error + oe,
            shape: v.shape,
        });
    }
    if report.levels.is_some() {
        report.notes.push(CONVENTION.into());
    }
    if !report.sections.is_empty() {
        report.notes.push(
            "certificates, level labels and summability verdicts are finite-horizon evidence on a finite net".into(),
        );
    }
    (report, timings)
}

pub fn assemble_report(op: &WeightedOp, cfg: &ReportConfig) -> SpectrumReport {
    assemble_report_timed(op, cfg).0
}
