//! Cocycles, power norms and spectral radius brackets of T = w·(f∘φ).
//!
//! cargo run --release --example power_norms

use std::sync::Arc;

use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace, Point};

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(512)?);
    let w = AlgElement::from_expr(circle.clone(), &Expr::parse("2+z")?);
    let t = WeightedOp::new(w, Dynamics::rotation(circle, golden_angle())?, AlgebraTag::lip(1.0)?)?.invertible()?;

    let s = Point::polar(1.0, 0.0);
    for n in [1, 3, -3, 100] {
        let c = t.cocycle(&s, n)?;
        println!("w_{n}(1) = {:.4}, (1/|n|) ln|w_n| = {:.4}", c.value, c.log_magnitude / n.abs() as f64);
    }

    for p in t.power_norm_table(64, false)?.iter().filter(|p| p.n.count_ones() == 1) {
        let upper = p.upper().map_or("none".to_string(), |u| format!("{u:.4e}"));
        println!("||T^{}|| in [{:.4e}, {upper}]", p.n, p.lower());
    }

    let (rho, rho_inv) = t.spectral_radius_estimates(256)?;
    println!("rho(T) <= {rho:.4}, rho(T^-1) <= {:.4}  (the spectrum here is the circle of radius 2)", rho_inv.unwrap_or(f64::NAN));
    Ok(())
}
