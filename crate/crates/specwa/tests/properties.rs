use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use specwa::algebra::{norm, AlgElement, AlgebraTag, Sampler};
use specwa::expr::Expr;
use specwa::operator::WeightedOp;
use specwa::scenario::{builtin, parse_sections, Angle, ScenarioConfig};
use specwa::space::{Dynamics, NetSpace};
use specwa::spectra::{classify_levels, neutral_point_search, variational_radii, LevelLabel, Section};

fn affine_op(n: usize, angle: f64, a: f64, b: Complex64, alg: AlgebraTag) -> WeightedOp {
    let c = Arc::new(NetSpace::circle(n).unwrap());
    let w = AlgElement::from_fn(c.clone(), move |p| Complex64::new(a, 0.0) + b * p.z);
    WeightedOp::new(w, Dynamics::rotation(c, angle).unwrap(), alg)
        .unwrap()
        .invertible()
        .unwrap()
}

fn coefficient() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cocycle_is_multiplicative(
        angle in 0.1..6.0f64,
        a in 1.0..3.0f64,
        b in coefficient(),
        k in 0usize..64,
        m in -40i64..40,
        n in -40i64..40,
    ) {
        let t = affine_op(64, angle, a, b, AlgebraTag::sup());
        let s = t.space().points()[k];
        let whole = t.cocycle(&s, m + n).unwrap();
        let first = t.cocycle(&s, m).unwrap();
        let second = t.cocycle(&t.dynamics().iterate(&s, m), n).unwrap();
        prop_assert!((whole.log_magnitude - first.log_magnitude - second.log_magnitude).abs() < 1e-9);
        let unit = |c: Complex64| c / c.norm();
        prop_assert!((unit(whole.value) - unit(first.value) * unit(second.value)).norm() < 1e-9);
    }

    #[test]
    fn radii_are_ordered_and_bound_the_weight(a in 1.0..3.0f64, b in coefficient(), angle in 0.1..6.0f64) {
        let t = affine_op(64, angle, a, b * a, AlgebraTag::sup());
        let r = variational_radii(&t, 500, 2).unwrap();
        prop_assert!(r.r_hat <= r.big_r_hat);
        let (lo, hi) = (t.weight().min_modulus(), t.weight().sup_norm());
        prop_assert!(r.r_hat >= lo * (1.0 - 1e-12) && r.big_r_hat <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn certificate_rate_is_monotone_in_slack(a in 1.0..3.0f64, b in coefficient(), level in 0.5..4.0f64) {
        let t = affine_op(48, 2.399963, a, b, AlgebraTag::sup());
        let tight = neutral_point_search(&t, level, 100, 0.01).unwrap();
        let loose = neutral_point_search(&t, level, 100, 0.2).unwrap();
        prop_assert_eq!(tight.max_rate, loose.max_rate);
        prop_assert!(!tight.certified || loose.certified);
    }

    #[test]
    fn widening_the_margin_only_undecides(a in 1.0..3.0f64, b in coefficient(), level in 0.5..4.0f64) {
        let t = affine_op(48, 2.399963, a, b, AlgebraTag::sup());
        let narrow = classify_levels(&t, level, 32, 0.01).unwrap();
        let wide = classify_levels(&t, level, 32, 0.2).unwrap();
        for (x, y) in narrow.labels().zip(wide.labels()) {
            prop_assert!(x == y || y == LevelLabel::Undecided);
        }
    }

    #[test]
    fn sup_norm_is_dominated(seed in any::<u64>(), family in 0usize..3) {
        let alg = [AlgebraTag::lip(1.0).unwrap(), AlgebraTag::lip(0.4).unwrap(), AlgebraTag::wiener()][family];
        let c = Arc::new(NetSpace::circle(96).unwrap());
        let f = Sampler::new(seed).element(&c, &alg).unwrap();
        prop_assert!(f.sup_norm() <= norm(&f, &alg).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn constants_evaluate_to_themselves(x in -1e6..1e6f64, y in -1e6..1e6f64) {
        let e = Expr::parse(&format!("({x}) + ({y})*i")).unwrap();
        let v = e.eval(&specwa::space::Point::new(Complex64::new(0.3, 0.4)));
        prop_assert!((v - Complex64::new(x, y)).norm() <= 1e-9 * (1.0 + x.abs() + y.abs()));
        prop_assert!(e.is_constant());
    }

    #[test]
    fn unknown_identifiers_are_rejected(name in "[a-y]{2,6}") {
        prop_assume!(!["exp", "log", "abs", "re", "im", "conj", "sqrt", "step", "zbar", "pi", "comp"].contains(&name.as_str()));
        let source = format!("1 + {}", name);
        prop_assert!(Expr::parse(&source).is_err());
    }

    #[test]
    fn rational_angles(p in -20i32..20, q in 1i32..50) {
        let a = Angle::Named(format!("{p}/{q}")).radians().unwrap();
        prop_assert!((a - TAU * p as f64 / q as f64).abs() < 1e-12);
    }

    #[test]
    fn scenario_configs_round_trip(seed in any::<u64>(), mask in 0u16..512, which in 0usize..4) {
        let names = ["ex1-lip-isometry", "ex2-clopen-union", "ex3-moebius-disc", "ex5-wiener"];
        let mut cfg = builtin(names[which]).unwrap();
        cfg.seed = seed;
        let sections: Vec<Section> = Section::ALL.into_iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| s).collect();
        let list = sections.iter().map(|s| s.name()).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_sections(&list).unwrap(), sections.clone());
        cfg.sections = Some(sections);
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back, cfg);
    }
}
