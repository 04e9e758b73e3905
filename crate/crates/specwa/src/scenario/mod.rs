//! Scenario files, builtin scenarios and the report files the CLI writes.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "ex5-wiener"
//! seed = 7
//! weight = "2+z"
//! sections = ["radii", "claims"]    # optional, default: all
//!
//! [space]
//! kind = "circle"
//! n = 4096
//!
//! [dynamics]
//! kind = "rotation"
//! angle = "golden"                  # radians, "golden" or "p/q" (2π·p/q)
//!
//! [algebra]
//! family = "wiener"
//!
//! [horizons]                        # optional overrides of ReportConfig
//! n_max = 1000
//! orbit_cap = 1000000
//! fourier_degree = 512
//! ```

mod plot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use plot::{emit_plot, write_plot, Plot, PlotKind};

use crate::algebra::{AlgElement, AlgebraTag, DEFAULT_FOURIER_DEGREE};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::operator::WeightedOp;
use crate::space::{golden_angle, Dynamics, DynamicsKind, NetSpace, SpaceKind, DEFAULT_ORBIT_CAP};
use crate::spectra::{assemble_report_timed, ReportConfig, Section, SectionTiming, SpectrumReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Provenance keys that change from run to run.
pub const VOLATILE_KEYS: [&str; 3] = ["timestamp_unix", "wall_times", "total_millis"];

/// An angle as written in a scenario: radians, `"golden"`, or `"p/q"`
/// meaning 2π·p/q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Named(String),
}

impl Angle {
    pub fn radians(&self) -> Result<f64> {
        let bad = || Error::ConfigInvalid(format!("cannot read angle {self}"));
        let a = match self {
            Angle::Radians(a) => *a,
            Angle::Named(s) if s.trim() == "golden" => golden_angle(),
            Angle::Named(s) => match s.split_once('/') {
                Some((p, q)) => {
                    let p: f64 = p.trim().parse().map_err(|_| bad())?;
                    let q: f64 = q.trim().parse().map_err(|_| bad())?;
                    if q == 0.0 {
                        return Err(bad());
                    }
                    std::f64::consts::TAU * p / q
                }
                None => s.trim().parse().map_err(|_| bad())?,
            },
        };
        if a.is_finite() {
            Ok(a)
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Radians(a) => write!(f, "{a}"),
            Angle::Named(s) => write!(f, "\"{s}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DynamicsSpec {
    Rotation { angle: Angle },
    TorusRotation { angle1: Angle, angle2: Angle },
    Moebius { center: [f64; 2], angle: Angle },
    ComponentMap { perm: Vec<usize>, angles: Vec<Angle> },
    Translation,
    Tabulated { perm: Vec<usize> },
}

impl DynamicsSpec {
    pub fn resolve(&self) -> Result<DynamicsKind> {
        Ok(match self {
            DynamicsSpec::Rotation { angle } => DynamicsKind::Rotation { angle: angle.radians()? },
            DynamicsSpec::TorusRotation { angle1, angle2 } => DynamicsKind::TorusRotation {
                angle1: angle1.radians()?,
                angle2: angle2.radians()?,
            },
            DynamicsSpec::Moebius { center, angle } => DynamicsKind::Moebius {
                center: Complex64::new(center[0], center[1]),
                angle: angle.radians()?,
            },
            DynamicsSpec::ComponentMap { perm, angles } => DynamicsKind::ComponentMap {
                perm: perm.clone(),
                angles: angles.iter().map(Angle::radians).collect::<Result<_>>()?,
            },
            DynamicsSpec::Translation => DynamicsKind::Translation,
            DynamicsSpec::Tabulated { perm } => DynamicsKind::Tabulated { perm: perm.clone() },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub weight: String,
    pub space: SpaceKind,
    pub dynamics: DynamicsSpec,
    pub algebra: AlgebraTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<Vec<Section>>,
    /// Overrides of [`ReportConfig`] fields, plus `orbit_cap` and
    /// `fourier_degree`.
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub horizons: toml::Table,
}

impl ScenarioConfig {
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| Error::ConfigInvalid(e.message().trim().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize to TOML")
    }

    /// Builtin name or path to a TOML file.
    pub fn load(source: &str) -> Result<Self> {
        if let Some(cfg) = builtin(source) {
            return Ok(cfg);
        }
        let text = fs::read_to_string(source)
            .map_err(|e| Error::ConfigInvalid(format!("'{source}' is neither a builtin scenario nor a readable file: {e}")))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the compact JSON form, which is what the report echoes.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario configs serialize to JSON");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn requested_sections(&self) -> Vec<Section> {
        self.sections.clone().unwrap_or_else(|| Section::ALL.to_vec())
    }

    fn horizon_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.horizons.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v > 0 => Ok(Some(*v as u64)),
            Some(v) => Err(Error::ConfigInvalid(format!("horizon {key} must be a positive integer, got {v}"))),
        }
    }

    pub fn orbit_cap(&self) -> Result<u64> {
        Ok(self.horizon_u64("orbit_cap")?.unwrap_or(DEFAULT_ORBIT_CAP))
    }

    pub fn fourier_degree(&self) -> Result<usize> {
        Ok(self.horizon_u64("fourier_degree")?.map_or(DEFAULT_FOURIER_DEGREE.min(64), |d| d as usize))
    }

    pub fn report_config(&self) -> Result<ReportConfig> {
        let mut table = toml::Table::try_from(ReportConfig::default()).expect("defaults serialize");
        for (k, v) in &self.horizons {
            match k.as_str() {
                "orbit_cap" | "fourier_degree" => {}
                "seed" | "sections" => {
                    return Err(Error::ConfigInvalid(format!("{k} belongs at the top level, not under [horizons]")));
                }
                _ => {
                    table.insert(k.clone(), v.clone());
                }
            }
        }
        let mut cfg: ReportConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::ConfigInvalid(format!("[horizons]: {}", e.message().trim())))?;
        cfg.seed = self.seed;
        cfg.sections = self.requested_sections();
        cfg.validate().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        Ok(cfg)
    }

    /// Build the weighted operator. Every failure here is a configuration
    /// error, including a weight that is non-finite or vanishes on the net.
    pub fn build_operator(&self) -> Result<WeightedOp> {
        let invalid = |e: Error| match e {
            Error::ConfigInvalid(_) => e,
            other => Error::ConfigInvalid(other.to_string()),
        };
        if matches!(self.space, SpaceKind::Generic { .. }) {
            return Err(Error::ConfigInvalid("generic nets cannot be described in a scenario".into()));
        }
        let space = Arc::new(NetSpace::from_kind(&self.space).map_err(invalid)?);
        let alg = AlgebraTag::new(self.algebra.family).map_err(invalid)?;
        let expr = Expr::parse(&self.weight).map_err(|e| Error::ConfigInvalid(format!("weight '{}': {e}", self.weight)))?;
        for p in space.points() {
            let v = expr.eval(p);
            if !(v.re.is_finite() && v.im.is_finite()) || v.norm() == 0.0 {
                return Err(Error::ConfigInvalid(format!(
                    "weight '{}' is {} at the net point {}; it must be finite and nonvanishing",
                    self.weight,
                    v,
                    space.embed(p)
                )));
            }
        }
        let dynamics = Dynamics::new(space.clone(), self.dynamics.resolve()?)
            .map_err(invalid)?
            .with_orbit_cap(self.orbit_cap()?);
        let w = AlgElement::from_expr(space, &expr)
            .prepared_for(&alg, self.fourier_degree()?)
            .map_err(invalid)?;
        WeightedOp::new(w, dynamics, alg).and_then(WeightedOp::invertible).map_err(invalid)
    }
}

const BUILTINS: [(&str, &str, &str); 4] = [
    (
        "ex1-lip-isometry",
        "Lip_1 circle, golden rotation, w = 1",
        include_str!("../../scenarios/ex1-lip-isometry.toml"),
    ),
    (
        "ex2-clopen-union",
        "two circles, golden rotation, w = 1/2 on one and 2 on the other, local Lip_1",
        include_str!("../../scenarios/ex2-clopen-union.toml"),
    ),
    (
        "ex3-moebius-disc",
        "C^1 disc, elliptic Moebius map, w = 2 + |swap|^2",
        include_str!("../../scenarios/ex3-moebius-disc.toml"),
    ),
    (
        "ex5-wiener",
        "Wiener algebra circle, golden rotation, w = 2 + z",
        include_str!("../../scenarios/ex5-wiener.toml"),
    ),
];

/// Names and one-line descriptions of the builtin scenarios.
pub fn builtins() -> impl Iterator<Item = (&'static str, &'static str)> {
    BUILTINS.iter().map(|(n, d, _)| (*n, *d))
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    BUILTINS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, src)| ScenarioConfig::from_toml(src).expect("builtin scenarios parse"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub config_sha256: String,
    pub code_version: String,
    pub seed: u64,
    pub requested_sections: Vec<Section>,
    // The run-dependent keys default so that a report with them stripped
    // (a golden file) still reads back.
    #[serde(default)]
    pub timestamp_unix: u64,
    #[serde(default)]
    pub wall_times: Vec<SectionTiming>,
    #[serde(default)]
    pub total_millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SpectrumReport>,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(source: &str) -> Result<Self> {
        let file: ReportFile = serde_json::from_str(source).map_err(|e| Error::Invalid(format!("report file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "report schema version {} is not {SCHEMA_VERSION}",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// The JSON text with the run-dependent provenance keys zeroed, which
    /// is what two runs of one config must agree on byte for byte.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(p) = v.get_mut("provenance").and_then(|p| p.as_object_mut()) {
            for k in VOLATILE_KEYS {
                p.remove(k);
            }
        }
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }

    /// 0 when every requested section completed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match &self.report {
            Some(r) if !r.completed() => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sections: Option<Vec<Section>>,
    pub weight: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub file: ReportFile,
    pub path: PathBuf,
    pub exit_code: i32,
}

/// Parse a comma-separated section list; the empty string is the empty list.
pub fn parse_sections(list: &str) -> Result<Vec<Section>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

/// Run a scenario in memory: apply overrides, build the operator and
/// assemble the requested sections.
pub fn run_config(mut cfg: ScenarioConfig, opts: &RunOptions) -> Result<ReportFile> {
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(s) = &opts.sections {
        cfg.sections = Some(s.clone());
    }
    if let Some(w) = &opts.weight {
        cfg.weight = w.clone();
    }
    let report_cfg = cfg.report_config()?;
    let op = cfg.build_operator()?;
    let start = Instant::now();
    let (report, wall_times) = if report_cfg.sections.is_empty() {
        (None, Vec::new())
    } else {
        let (r, t) = assemble_report_timed(&op, &report_cfg);
        (Some(r), t)
    };
    Ok(ReportFile {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            scenario: cfg.name.clone(),
            config_sha256: cfg.hash(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            requested_sections: report_cfg.sections,
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_times,
            total_millis: start.elapsed().as_secs_f64() * 1e3,
            config: cfg,
        },
        report,
    })
}

/// Write `contents` next to `path` under a temporary name, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Load `source` (builtin name or TOML path), run it and write
/// `<out>/<name>.report.json`. Errors leave no report behind; a report with
/// failed sections is still written and carries exit code 1.
pub fn run_scenario(source: &str, opts: &RunOptions) -> Result<RunOutcome> {
    let file = run_config(ScenarioConfig::load(source)?, opts)?;
    let dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = dir.join(format!("{}.report.json", file.provenance.scenario));
    write_atomic(&path, &file.to_json())?;
    Ok(RunOutcome {
        exit_code: file.exit_code(),
        file,
        path,
    })
}
