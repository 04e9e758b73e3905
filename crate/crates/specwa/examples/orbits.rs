//! Orbits, period detection and wandering balls on three nets.
//!
//! cargo run --release --example orbits

use std::f64::consts::TAU;
use std::sync::Arc;

use specwa::space::{detect_period, detect_wandering, golden_angle, orbit, peak_sequence, Dynamics, NetSpace, Point};

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(360)?);
    let golden = Dynamics::rotation(circle.clone(), golden_angle())?;
    let third = Dynamics::rotation(circle.clone(), TAU / 3.0)?;

    let s = Point::polar(1.0, 0.0);
    for (k, p) in orbit(&golden, &s, 4)?.iter().enumerate() {
        println!("phi^{k}(1) at angle {:.4}", p.z.arg().rem_euclid(TAU));
    }

    for (name, d) in [("golden", &golden), ("2pi/3", &third)] {
        let rep = detect_period(d, 50, 1e-9);
        println!("{name}: period {:?}, periodic fraction {:.3}", rep.period, rep.periodic_fraction);
    }

    // A ball under the translation k -> k+1 never meets its images.
    let z = Arc::new(NetSpace::integers(40)?);
    let shift = Dynamics::new(z.clone(), specwa::space::DynamicsKind::Translation)?;
    let w = detect_wandering(&shift, &z.points()[z.len() / 2], 3.0 * z.resolution(), 20)?;
    println!("integers: wandering {} (horizon limited {})", w.wandering, w.horizon_limited);

    let peaks = peak_sequence(&golden, &s, 5, 1.0)?;
    println!("peak sequence g_5: sup {:.3}, value at s {:.3}", peaks.sup_norm(), peaks.eval_at(&s)?.norm());
    Ok(())
}
