//! Eigenvalues of finite Fourier sections of T for a periodic and an
//! aperiodic rotation.
//!
//! cargo run --release --example truncation

use std::f64::consts::TAU;
use std::sync::Arc;

use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace};

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(256)?);
    for (name, angle, weight) in [("2pi/3, w = 1", TAU / 3.0, "1"), ("golden, w = 2+z", golden_angle(), "2+z")] {
        let w = AlgElement::from_expr(circle.clone(), &Expr::parse(weight)?);
        let t = WeightedOp::new(w, Dynamics::rotation(circle.clone(), angle)?, AlgebraTag::wiener())?;
        let rep = t.truncation_spectra(&[4, 8, 16])?;
        for s in &rep.spectra {
            let moduli: Vec<String> = s.eigenvalues.iter().take(5).map(|e| format!("{:.3}", e)).collect();
            println!("{name}, N = {} ({}): {} ...", s.n, s.method, moduli.join(" "));
        }
        println!("  Hausdorff steps {:?}", rep.hausdorff_steps);
    }
    Ok(())
}
