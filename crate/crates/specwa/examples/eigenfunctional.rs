//! An eigenfunctional at a point of O for a translation with a marker.
//!
//! cargo run --release --example eigenfunctional

use std::sync::Arc;

use num_complex::Complex64;
use specwa::algebra::{AlgElement, AlgebraTag, Sampler};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{Dynamics, DynamicsKind, NetSpace, Point};
use specwa::spectra::eigenfunctional;

fn main() -> specwa::Result<()> {
    // w = 1/2 at and ahead of the marker 0, w = 2 behind it.
    let z = Arc::new(NetSpace::integers(200)?);
    let w = AlgElement::from_expr(z.clone(), &Expr::parse("2 - 1.5*step(re(z))")?);
    let t = WeightedOp::new(w, Dynamics::new(z.clone(), DynamicsKind::Translation)?, AlgebraTag::lip(1.0)?)?.invertible()?;

    let marker = z.points()[z.nearest(&Point::new(Complex64::new(0.0, 0.0)))];
    let gamma = Complex64::from_polar(1.0, 0.3);
    let f = eigenfunctional(&t, gamma, &marker, 60)?;
    println!("tail mass {:.3e}, ratios {:.3} / {:.3}", f.tail_mass, f.forward_ratio, f.backward_ratio);

    let mut sampler = Sampler::new(4);
    for _ in 0..5 {
        let g = sampler.element(&z, t.alg())?;
        let d = f.defect(&t, &g);
        println!("|F(Tg) - γF(g)| = {:.2e}, bound {:.2e} + roundoff {:.2e}: {}", d.defect, d.bound, d.roundoff, d.within);
    }
    Ok(())
}
