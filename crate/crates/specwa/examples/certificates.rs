//! Neutral-point certificates for circles in the spectrum, and the
//! summability heuristic.
//!
//! cargo run --release --example certificates

use std::sync::Arc;

use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace};
use specwa::spectra::{neutral_scan, summability_check, verify_neutral_point};

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(2048)?);
    let w = AlgElement::from_expr(circle.clone(), &Expr::parse("2+z")?);
    let t = WeightedOp::new(w, Dynamics::rotation(circle, golden_angle())?, AlgebraTag::wiener())?.invertible()?;

    for c in neutral_scan(&t, &[1.5, 1.9, 2.0, 2.1, 2.5], 1000, 0.02)? {
        println!("|λ| = {:.2}: certified {:<5} rate {:+.4}", c.lambda_abs, c.certified, c.max_rate);
        if c.certified {
            let again = verify_neutral_point(&t, &c.point, c.lambda_abs, 1000)?;
            println!("          re-check from scratch: {again:+.4}");
        }
    }

    let v = summability_check(&t, 200)?;
    println!("log-norm series: {:?} (forward exponent {:?})", v.verdict, v.forward_exponent);
    Ok(())
}
