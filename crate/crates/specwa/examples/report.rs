//! Full spectrum report for an operator built in code.
//!
//! cargo run --release --example report

use std::sync::Arc;

use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace};
use specwa::spectra::{assemble_report_timed, ReportConfig};

fn main() -> specwa::Result<()> {
    let u = Arc::new(NetSpace::circle_union(3, 256, 0.5)?);
    let w = AlgElement::from_expr(u.clone(), &Expr::parse("1 + comp")?);
    let t = WeightedOp::new(w, Dynamics::rotation(u, golden_angle())?, AlgebraTag::lip_local(1.0, 0.25)?)?.invertible()?;

    let (report, timings) = assemble_report_timed(&t, &ReportConfig { seed: 1, ..Default::default() });
    for c in &report.claims {
        println!("{}: {:?} (residual {:.2e})", c.theorem, c.kind, c.residual);
    }
    println!("connected: {:?}", report.connectedness.as_ref().map(|c| c.connected));
    for s in &report.skipped {
        println!("skipped {}: {}", s.section, s.error);
    }
    for t in timings {
        println!("{:<13} {:>7.1} ms", t.section.to_string(), t.millis);
    }
    Ok(())
}
