//! Norms of the five algebra families and the two hypothesis checkers.
//!
//! cargo run --release --example algebra_norms

use std::sync::Arc;

use specwa::algebra::{
    check_disjoint_support_symmetry, check_factorization_inequality, geometric_scales, modulus_and_dini, norm,
    AlgElement, AlgebraTag, PairKind, Sampler,
};
use specwa::expr::Expr;
use specwa::space::NetSpace;

fn main() -> specwa::Result<()> {
    let circle = Arc::new(NetSpace::circle(256)?);
    let f = AlgElement::from_expr(circle.clone(), &Expr::parse("2 + z + 0.5*zbar^2")?);
    let families = [
        ("sup", AlgebraTag::sup()),
        ("Lip_1", AlgebraTag::lip(1.0)?),
        ("Lip_1/2", AlgebraTag::lip(0.5)?),
        ("Wiener", AlgebraTag::wiener()),
    ];
    for (label, alg) in families {
        let f = f.clone().prepared_for(&alg, 64)?;
        println!("{label:<8} ||f|| = {:.4}", norm(&f, &alg)?);
    }

    let lip = AlgebraTag::lip(1.0)?;
    let sym = check_disjoint_support_symmetry(&circle, &lip, &mut Sampler::new(1), 100, 1e-9)?;
    println!("Lip_1 disjoint bumps: max asymmetry {:e}, pass {}", sym.max_asymmetry, sym.pass);
    let mut split = Sampler::new(2).with_pairs(PairKind::SignSplit);
    let sym = check_disjoint_support_symmetry(&circle, &AlgebraTag::wiener(), &mut split, 50, 1e-9)?;
    println!("Wiener sign-split pair: max asymmetry {:.3}, pass {}", sym.max_asymmetry, sym.pass);

    let coarse = Arc::new(NetSpace::circle(128)?);
    let fact = check_factorization_inequality(&coarse, &lip, &mut Sampler::new(3), 300)?;
    println!(
        "Lip_1 product constants: two-factor {:.3}, local {:.3}, C-hat {:.3} (worst at {})",
        fact.c_two_factor, fact.c_local, fact.c_hat, fact.worst.inequality
    );

    let w = AlgElement::from_expr(circle.clone(), &Expr::parse("2 + |re(z)|^0.3")?);
    let m = modulus_and_dini(&w, &geometric_scales(&circle, 12))?;
    println!("modulus of continuity exponent {:?}, Dini integral {:?}", m.beta, m.dini_integral);
    Ok(())
}
