//! K1 / K2 / O split of the net at a level, on a two-circle union and on the
//! compactified integers.
//!
//! cargo run --release --example levels

use std::sync::Arc;

use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, DynamicsKind, NetSpace};
use specwa::spectra::classify_many;

fn op(space: NetSpace, kind: DynamicsKind, weight: &str) -> specwa::Result<WeightedOp> {
    let space = Arc::new(space);
    let w = AlgElement::from_expr(space.clone(), &Expr::parse(weight)?);
    WeightedOp::new(w, Dynamics::new(space, kind)?, AlgebraTag::sup())?.invertible()
}

fn main() -> specwa::Result<()> {
    let cases = [
        (NetSpace::circle_union(2, 64, 0.5)?, DynamicsKind::Rotation { angle: golden_angle() }, "0.5 + 1.5*comp"),
        (NetSpace::integers(30)?, DynamicsKind::Translation, "2 - 1.5*step(re(z))"),
    ];
    for (space, kind, weight) in cases {
        let t = op(space, kind, weight)?;
        for d in classify_many(&t, &[0.4, 1.0, 2.5], 128, 0.05)? {
            println!("{weight:<20} |λ| = {:.1}: {:?}, demoted {}", d.lambda_abs, d.counts, d.demoted);
        }
    }
    Ok(())
}
