//! SVG plots with CSV data tables. The output depends only on the report
//! and the plot kind.
//!
//! CSV columns per kind:
//! - `annulus`: `item,radius,error` (rows `inner`, `outer`, then one
//!   `certified` row per certified circle with its residual as error)
//! - `truncation-eigs`: `n,re,im`
//! - `residual-decay`: `n,epsilon,residual,g_norm,residual_norm`
//! - `decomposition-map`: `index,x,y,label,forward,backward`

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{write_atomic, ReportFile};
use crate::error::{Error, Result};
use crate::space::{NetSpace, SpaceKind};
use crate::spectra::{LevelLabel, SpectrumReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Annulus,
    TruncationEigs,
    ResidualDecay,
    DecompositionMap,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::Annulus,
        PlotKind::TruncationEigs,
        PlotKind::ResidualDecay,
        PlotKind::DecompositionMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Annulus => "annulus",
            PlotKind::TruncationEigs => "truncation-eigs",
            PlotKind::ResidualDecay => "residual-decay",
            PlotKind::DecompositionMap => "decomposition-map",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Invalid(format!("unknown plot kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plot {
    pub kind: PlotKind,
    pub svg: String,
    pub csv: String,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Canvas {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    body: String,
}

impl Canvas {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Canvas { x0, x1, y0, y1, body: String::new() }
    }

    /// Square window of half-width `r` around the origin.
    fn square(r: f64) -> Self {
        Canvas::new(-r, r, -r, r)
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let w = SIZE - 2.0 * MARGIN;
        (
            MARGIN + (x - self.x0) / (self.x1 - self.x0) * w,
            SIZE - MARGIN - (y - self.y0) / (self.y1 - self.y0) * w,
        )
    }

    fn scale(&self) -> f64 {
        (SIZE - 2.0 * MARGIN) / (self.x1 - self.x0)
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), style: &str) {
        let (x1, y1) = self.px(a.0, a.1);
        let (x2, y2) = self.px(b.0, b.1);
        let _ = writeln!(self.body, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#);
    }

    fn circle(&mut self, r: f64, style: &str) {
        let (cx, cy) = self.px(0.0, 0.0);
        let r = r * self.scale();
        let _ = writeln!(self.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" {style}/>"#);
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let (cx, cy) = self.px(x, y);
        let _ = writeln!(self.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{fill}"/>"#);
    }

    fn ring(&mut self, inner: f64, outer: f64, style: &str) {
        let (cx, cy) = self.px(0.0, 0.0);
        let arc = |r: f64| {
            let r = r * self.scale();
            format!(
                "M {:.2} {cy:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {cy:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {cy:.2} Z",
                cx + r,
                cx - r,
                cx + r
            )
        };
        let _ = writeln!(self.body, r#"<path d="{} {}" fill-rule="evenodd" {style}/>"#, arc(outer), arc(inner));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (a, b) = self.px(x, y);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
    }

    fn text(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" font-size="11">{s}</text>"#);
    }

    fn axes(&mut self) {
        let grey = r##"stroke="#bbbbbb" stroke-width="0.5""##;
        if self.y0 < 0.0 && self.y1 > 0.0 {
            self.line((self.x0, 0.0), (self.x1, 0.0), grey);
        }
        if self.x0 < 0.0 && self.x1 > 0.0 {
            self.line((0.0, self.y0), (0.0, self.y1), grey);
        }
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n\
             <text x=\"{MARGIN}\" y=\"24\" font-size=\"13\">{title}</text>\n{}</svg>\n",
            self.body
        )
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::SectionMissing(name.into()))
}

fn annulus(r: &SpectrumReport) -> Result<(String, String)> {
    let a = section(&r.annulus, "radii")?;
    let certified = r.certificates.as_ref().map(|c| c.certified.as_slice()).unwrap_or_default();
    let mut csv = format!(
        "item,radius,error\ninner,{},{}\nouter,{},{}\n",
        a.inner, a.inner_error, a.outer, a.outer_error
    );
    for c in certified {
        let _ = writeln!(csv, "certified,{},{}", c.lambda_abs, c.residual);
    }
    let reach = (a.outer + a.outer_error).max(1.0) * 1.15;
    let mut cv = Canvas::square(reach);
    cv.axes();
    cv.circle(1.0, r##"fill="none" stroke="#999999" stroke-dasharray="4 3""##);
    if a.outer - a.inner > 1e-9 * a.outer {
        cv.ring(a.inner, a.outer, r##"fill="#9ecae1" stroke="#1f77b4""##);
    } else {
        cv.circle(a.outer, r##"fill="none" stroke="#1f77b4" stroke-width="2""##);
    }
    for c in certified {
        cv.circle(c.lambda_abs, r##"fill="none" stroke="#d62728" stroke-width="0.75""##);
    }
    let title = format!("spectral annulus [{:.4}, {:.4}]", a.inner, a.outer);
    Ok((cv.finish(&title), csv))
}

fn truncation(r: &SpectrumReport) -> Result<(String, String)> {
    let t = section(&r.truncation, "truncation")?;
    let mut csv = String::from("n,re,im\n");
    let mut reach: f64 = 1.0;
    for s in &t.spectra.spectra {
        for e in &s.eigenvalues {
            let _ = writeln!(csv, "{},{},{}", s.n, e.re, e.im);
            reach = reach.max(e.norm());
        }
    }
    let mut cv = Canvas::square(reach * 1.15);
    cv.axes();
    cv.circle(1.0, r##"fill="none" stroke="#999999" stroke-dasharray="4 3""##);
    for (k, s) in t.spectra.spectra.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for e in &s.eigenvalues {
            cv.dot(e.re, e.im, 3.0, colour);
        }
        cv.text(SIZE - MARGIN - 60.0, MARGIN + 14.0 * k as f64, &format!("n = {}", s.n));
    }
    Ok((cv.finish("truncated-matrix eigenvalues"), csv))
}

fn residual_decay(r: &SpectrumReport) -> Result<(String, String)> {
    let e = section(&r.eigenvectors, "eigenvectors")?;
    let mut csv = String::from("n,epsilon,residual,g_norm,residual_norm\n");
    let mut pts = Vec::new();
    for s in &e.decay.steps {
        let _ = writeln!(csv, "{},{},{},{},{}", s.n, s.epsilon, s.residual, s.g_norm, s.residual_norm);
        pts.push(((s.n as f64).log2(), s.residual.max(f64::MIN_POSITIVE).log10()));
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| pts.iter().map(pick).fold(init, f);
    let (xlo, xhi) = (fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, f64::NEG_INFINITY, |p| p.0));
    let (ylo, yhi) = (
        fold(f64::min, f64::INFINITY, |p| p.1).floor(),
        fold(f64::max, f64::NEG_INFINITY, |p| p.1).ceil(),
    );
    let mut cv = if pts.is_empty() {
        Canvas::new(0.0, 1.0, 0.0, 1.0)
    } else {
        Canvas::new(xlo - 0.25, xhi + 0.25, ylo, yhi)
    };
    cv.polyline(&pts, r##"stroke="#1f77b4" stroke-width="1.5""##);
    for (&(x, y), s) in pts.iter().zip(&e.decay.steps) {
        cv.dot(x, y, 3.0, "#1f77b4");
        let (px, _) = cv.px(x, y);
        cv.text(px - 8.0, SIZE - MARGIN + 16.0, &s.n.to_string());
    }
    if !pts.is_empty() {
        for d in ylo as i32..=yhi as i32 {
            let (_, py) = cv.px(cv.x0, d as f64);
            cv.text(4.0, py + 4.0, &format!("1e{d}"));
        }
    }
    let title = format!("eigenvector residual at |λ| = {:.4}", e.lambda_abs);
    Ok((cv.finish(&title), csv))
}

fn label_name(l: LevelLabel) -> (&'static str, &'static str) {
    match l {
        LevelLabel::K1 => ("K1", "#1f77b4"),
        LevelLabel::K2 => ("K2", "#d62728"),
        LevelLabel::O => ("O", "#2ca02c"),
        LevelLabel::Undecided => ("undecided", "#aaaaaa"),
    }
}

fn decomposition(r: &SpectrumReport) -> Result<(String, String)> {
    let l = section(&r.levels, "levels")?;
    let net = NetSpace::from_kind(&r.space)?;
    if net.len() != l.map.points.len() {
        return Err(Error::Invalid("level map does not match the report's net".into()));
    }
    let coords: Vec<Complex64> = net
        .points()
        .iter()
        .map(|p| match r.space {
            SpaceKind::Torus { .. } => Complex64::new(p.z.arg(), p.z2.arg()),
            _ => net.embed(p),
        })
        .collect();
    let mut csv = String::from("index,x,y,label,forward,backward\n");
    for (i, (c, p)) in coords.iter().zip(&l.map.points).enumerate() {
        let _ = writeln!(csv, "{i},{},{},{},{},{}", c.re, c.im, label_name(p.label).0, p.forward, p.backward);
    }
    let reach = coords.iter().fold(1.0f64, |m, c| m.max(c.re.abs()).max(c.im.abs())) * 1.1;
    let mut cv = Canvas::square(reach);
    cv.axes();
    for (c, p) in coords.iter().zip(&l.map.points) {
        cv.dot(c.re, c.im, 2.0, label_name(p.label).1);
    }
    let legend = [LevelLabel::K1, LevelLabel::K2, LevelLabel::O, LevelLabel::Undecided];
    for (k, lab) in legend.into_iter().enumerate() {
        let (name, colour) = label_name(lab);
        let y = SIZE - 12.0;
        let x = MARGIN + 90.0 * k as f64;
        let _ = writeln!(cv.body, r#"<circle cx="{x:.2}" cy="{:.2}" r="4" fill="{colour}"/>"#, y - 4.0);
        cv.text(x + 8.0, y, name);
    }
    let title = format!("level decomposition at |λ| = {:.4}", l.map.lambda_abs);
    Ok((cv.finish(&title), csv))
}

pub fn emit_plot(file: &ReportFile, kind: PlotKind) -> Result<Plot> {
    let r = file.report.as_ref().ok_or_else(|| Error::SectionMissing("report".into()))?;
    let (svg, csv) = match kind {
        PlotKind::Annulus => annulus(r)?,
        PlotKind::TruncationEigs => truncation(r)?,
        PlotKind::ResidualDecay => residual_decay(r)?,
        PlotKind::DecompositionMap => decomposition(r)?,
    };
    Ok(Plot { kind, svg, csv })
}

/// Plot the report at `report_path` and write `<stem>.<kind>.svg` and
/// `<stem>.<kind>.csv` to `out_dir`, or beside the report.
pub fn write_plot(report_path: &Path, kind: PlotKind, out_dir: Option<&Path>) -> Result<(PathBuf, PathBuf)> {
    let plot = emit_plot(&ReportFile::read(report_path)?, kind)?;
    let name = report_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name
        .strip_suffix(".report.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name);
    let dir = out_dir.or(report_path.parent()).unwrap_or(Path::new("."));
    let svg = dir.join(format!("{stem}.{kind}.svg"));
    let csv = dir.join(format!("{stem}.{kind}.csv"));
    write_atomic(&svg, &plot.svg)?;
    write_atomic(&csv, &plot.csv)?;
    Ok((svg, csv))
}
