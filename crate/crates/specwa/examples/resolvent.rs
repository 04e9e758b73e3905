//! (λ − T)⁻¹f by the outer and inner Laurent series, on the net and at a point.
//!
//! cargo run --release --example resolvent

use std::sync::Arc;

use num_complex::Complex64;
use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace, Point};

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(256)?);
    let w = AlgElement::from_expr(circle.clone(), &Expr::parse("2+z")?);
    let t = WeightedOp::new(w, Dynamics::rotation(circle.clone(), golden_angle())?, AlgebraTag::wiener())?.invertible()?;
    let f = AlgElement::constant(circle, Complex64::new(1.0, 0.0));
    let s = Point::polar(1.0, 0.0);

    for lambda in [Complex64::new(4.0, 0.0), Complex64::new(0.0, 1.0)] {
        let g = t.resolvent_series(lambda, &f, 1e-10)?;
        let at = t.resolvent_at_point(lambda, &f, &s, 1e-10)?;
        println!(
            "λ = {lambda}: {:?} branch, {} terms, residual {:.1e}, g(1) = {:.8} vs pointwise {:.8}",
            g.branch,
            g.terms,
            g.residual,
            g.g.eval_at(&s)?,
            at.value
        );
    }
    // |λ| = 2 lies on the spectrum: neither branch converges.
    println!("λ = 2: {:?}", t.resolvent_series(Complex64::new(2.0, 0.0), &f, 1e-10).err());
    Ok(())
}
