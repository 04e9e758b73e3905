//! Approximate eigenvectors on a Lipschitz circle and their residual decay.
//!
//! cargo run --release --example eigenvectors

use std::sync::Arc;

use num_complex::Complex64;
use specwa::algebra::{AlgElement, AlgebraTag};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::space::{golden_angle, Dynamics, NetSpace};
use specwa::spectra::{residual_decay, WindowChoice};

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(4096)?);
    let w = AlgElement::from_expr(circle.clone(), &Expr::parse("z")?);
    let t = WeightedOp::new(w, Dynamics::rotation(circle, golden_angle())?, AlgebraTag::lip(1.0)?)?.invertible()?;

    let lambda = Complex64::from_polar(1.0, 0.7);
    let d = residual_decay(&t, lambda, &[8, 16, 32, 64, 128], &WindowChoice::Auto)?;
    for s in &d.steps {
        println!(
            "n = {:>3}: eps {:.4} ({:?}), window radius {:.2e}, residual {:.4}",
            s.n, s.epsilon, s.branch, s.radius, s.residual
        );
    }
    println!("strictly decreasing {}, halved {}", d.strictly_decreasing, d.halved);
    Ok(())
}
