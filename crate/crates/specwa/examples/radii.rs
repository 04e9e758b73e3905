//! Variational radii from invariant measures, and the Wiener circle constant.
//!
//! cargo run --release --example radii

use std::sync::Arc;

use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace};
use specwa::spectra::{variational_radii, wiener_circle_constant};

fn main() -> specwa::Result<()> {
    // Each circle |z| = t is invariant and carries ln(2 + t²) as its average.
    let disc = Arc::new(NetSpace::disc(33, 32)?);
    let w = AlgElement::from_expr(disc.clone(), &Expr::parse("2+|z|^2")?);
    let t = WeightedOp::new(w, Dynamics::rotation(disc, golden_angle())?, AlgebraTag::c1_disc())?.invertible()?;
    let r = variational_radii(&t, 10_000, 4)?;
    println!(
        "disc: [{:.6}, {:.6}] ± ({:.1e}, {:.1e}), {:?}, {} probes",
        r.r_hat, r.big_r_hat, r.inner_error, r.outer_error, r.shape, r.probes
    );

    let circle = Arc::new(NetSpace::circle(1024)?);
    for weight in ["2+z", "3 + 2*re(z)", "exp(i*im(z))"] {
        let c = wiener_circle_constant(&AlgElement::from_expr(circle.clone(), &Expr::parse(weight)?), 8192)?;
        println!("circle constant of {weight}: {:.10} (gap {:.1e})", c.c, c.richardson_gap);
    }
    Ok(())
}
