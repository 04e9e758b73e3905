use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{compose, log_polar, WeightedOp};
use crate::algebra::{AlgElement, Evaluator};
use crate::error::{Error, Result};
use crate::space::Point;

/// Hard cap on the number of series terms.
pub const SERIES_CAP: usize = 100_000;
/// Consecutive non-decreasing terms after which a series is declared divergent.
pub const STALL_LIMIT: usize = 100;
/// Horizon of the cocycle scans that set the branch brackets.
const BRACKET_HORIZON: usize = 256;

/// Which Laurent branch of the resolvent was summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Σ_{n≥0} Tⁿf / λ^{n+1}, for |λ| beyond the spectral radius.
    Outer,
    /// −Σ_{n≥0} λⁿ T^{−(n+1)}f, for |λ| below 1/ρ(T⁻¹).
    Inner,
}

#[derive(Debug, Clone)]
pub struct ResolventSeries {
    pub lambda: Complex64,
    pub branch: Branch,
    pub terms: usize,
    /// Sup norm of the last term summed.
    pub last_term: f64,
    /// sup over the net of |(λ − T)g − f|.
    pub residual: f64,
    /// Upper estimates of ρ(Ť) and ρ(Ť⁻¹) used to pick the branch.
    pub bracket: (f64, Option<f64>),
    pub g: AlgElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResolvent {
    pub value: Complex64,
    pub branch: Branch,
    pub terms: usize,
    /// Pointwise growth rates of w_n(s) and 1/w_n(φ^{−n}s) that set the branch.
    pub bracket: (f64, Option<f64>),
}

/// Running state of one orbit: current point and accumulated cocycle.
#[derive(Clone, Copy)]
struct Walker {
    p: Point,
    log: f64,
    phase: Complex64,
}

/// The n-th term at one point; advances the walker.
struct TermGen {
    w: Evaluator,
    f: Evaluator,
    dynamics: crate::space::Dynamics,
    lambda: Complex64,
    branch: Branch,
}

impl TermGen {
    fn start(&self, p: &Point) -> Walker {
        Walker {
            p: *p,
            log: 0.0,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    /// Term n for the walker, which holds state n on entry.
    fn term(&self, st: &mut Walker, n: usize) -> Complex64 {
        let (ll, lp) = log_polar(self.lambda);
        match self.branch {
            Branch::Outer => {
                // w_n(t) f(φⁿt) / λ^{n+1}
                let v = compose(st.log - (n as f64 + 1.0) * ll, st.phase * lp.conj().powi(n as i32 + 1))
                    * (self.f)(&st.p);
                let (l, u) = log_polar((self.w)(&st.p));
                st.log += l;
                st.phase *= u;
                st.p = self.dynamics.forward(&st.p);
                v
            }
            Branch::Inner => {
                // −λⁿ w_{−(n+1)}(t) f(φ^{−(n+1)}t)
                st.p = self.dynamics.inverse(&st.p);
                let (l, u) = log_polar((self.w)(&st.p));
                st.log -= l;
                st.phase *= u.conj();
                -compose(st.log + n as f64 * ll, st.phase * lp.powi(n as i32)) * (self.f)(&st.p)
            }
        }
    }

    fn sum(&self, p: &Point, terms: usize) -> Complex64 {
        let mut st = self.start(p);
        (0..terms).map(|n| self.term(&mut st, n)).sum()
    }
}

fn f_evaluator(op: &WeightedOp, f: &AlgElement) -> Result<Evaluator> {
    if let Some(e) = f.evaluator() {
        return Ok(e.clone());
    }
    if !op.dynamics().is_exact() {
        let samples = f.samples().to_vec();
        let sp = op.space().clone();
        return Ok(Arc::new(move |p: &Point| samples[sp.nearest(p)]));
    }
    Err(Error::MissingRepresentation("evaluator"))
}

fn choose_branch(
    lambda: Complex64,
    rho_plus: f64,
    rho_minus: Option<f64>,
    invertible: bool,
) -> Result<(Branch, f64)> {
    let r = lambda.norm();
    if r > rho_plus {
        return Ok((Branch::Outer, rho_plus / r));
    }
    if !invertible {
        return Err(Error::BranchUnavailable(format!(
            "|λ| = {r} is not beyond ρ ≤ {rho_plus} and the weight is not invertible"
        )));
    }
    match rho_minus {
        Some(rm) if r * rm < 1.0 => Ok((Branch::Inner, r * rm)),
        _ => Err(Error::BranchUnavailable(format!(
            "|λ| = {r} lies inside the estimated spectral bracket"
        ))),
    }
}

impl WeightedOp {
    fn term_gen(&self, lambda: Complex64, f: &AlgElement, branch: Branch) -> Result<TermGen> {
        Ok(TermGen {
            w: self.w_eval.clone(),
            f: f_evaluator(self, f)?,
            dynamics: self.dynamics().clone(),
            lambda,
            branch,
        })
    }

    /// (λI − T)⁻¹f by the Laurent branch that converges at λ, summed on the
    /// whole net until the sup norm of a term drops below tol·(1 − q), with q
    /// the estimated geometric ratio of the branch.
    pub fn resolvent_series(&self, lambda: Complex64, f: &AlgElement, tol: f64) -> Result<ResolventSeries> {
        if !(tol > 0.0) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        let (rho_plus, rho_minus) = self.spectral_radius_estimates(BRACKET_HORIZON.min(64))?;
        let (branch, q) = choose_branch(lambda, rho_plus, rho_minus, self.is_invertible())?;
        let gen = self.term_gen(lambda, f, branch)?;
        let pts = self.space().points();
        let mut walkers: Vec<Walker> = pts.iter().map(|p| gen.start(p)).collect();
        let mut sums = vec![Complex64::new(0.0, 0.0); pts.len()];
        let stop = tol * (1.0 - q);
        let mut prev = f64::INFINITY;
        let mut stalled = 0;
        let mut terms = 0;
        let mut last;
        loop {
            if terms >= SERIES_CAP {
                return Err(Error::NonConvergent(format!("{SERIES_CAP} terms without reaching tolerance")));
            }
            let mut sup: f64 = 0.0;
            for (st, acc) in walkers.iter_mut().zip(sums.iter_mut()) {
                let t = gen.term(st, terms);
                *acc += t;
                sup = sup.max(t.norm());
            }
            terms += 1;
            last = sup;
            if !sup.is_finite() {
                return Err(Error::NonConvergent("term overflow".into()));
            }
            if sup <= stop {
                break;
            }
            if sup >= prev {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    return Err(Error::NonConvergent(format!(
                        "{STALL_LIMIT} consecutive non-decreasing terms"
                    )));
                }
            } else {
                stalled = 0;
            }
            prev = sup;
        }
        let gen = Arc::new(gen);
        let g_gen = gen.clone();
        let eval: Evaluator = Arc::new(move |p: &Point| g_gen.sum(p, terms));
        let g = AlgElement::with_parts(self.space().clone(), sums, Some(eval));
        let residual = self.resolvent_residual(lambda, &g, f)?;
        Ok(ResolventSeries {
            lambda,
            branch,
            terms,
            last_term: last,
            residual,
            bracket: (rho_plus, rho_minus),
            g,
        })
    }

    /// sup over the net of |λg(t) − w(t)g(φt) − f(t)|.
    pub fn resolvent_residual(&self, lambda: Complex64, g: &AlgElement, f: &AlgElement) -> Result<f64> {
        let pts = self.space().points();
        let mut worst: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            let tg = self.weight_at(p) * g.eval_at(&self.dynamics().forward(p))?;
            worst = worst.max((lambda * g.samples()[i] - tg - f.samples()[i]).norm());
        }
        Ok(worst)
    }

    /// Growth rates of the two pointwise series at s: the largest
    /// |w_n(s)|^{1/n} and |w_n(φ^{−n}s)|^{−1/n} over BRACKET_HORIZON/4 ≤ n ≤
    /// BRACKET_HORIZON.
    pub fn pointwise_bracket(&self, s: &Point) -> (f64, Option<f64>) {
        let lo = BRACKET_HORIZON / 4;
        let fwd = self.forward_log_prefix(s, BRACKET_HORIZON);
        let rate = |logs: &[f64], sign: f64| {
            (lo..=BRACKET_HORIZON)
                .map(|n| sign * logs[n] / n as f64)
                .fold(f64::NEG_INFINITY, f64::max)
                .exp()
        };
        let plus = rate(&fwd, 1.0);
        let minus = self
            .is_invertible()
            .then(|| rate(&self.backward_log_prefix(s, BRACKET_HORIZON), -1.0));
        (plus, minus)
    }

    /// The pointwise series at s, which may converge where the operator
    /// series does not.
    pub fn resolvent_at_point(
        &self,
        lambda: Complex64,
        f: &AlgElement,
        s: &Point,
        tol: f64,
    ) -> Result<PointResolvent> {
        if !(tol > 0.0) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        let (plus, minus) = self.pointwise_bracket(s);
        let (branch, q) = choose_branch(lambda, plus, minus, self.is_invertible())?;
        let gen = self.term_gen(lambda, f, branch)?;
        let mut st = gen.start(s);
        let stop = tol * (1.0 - q);
        let mut value = Complex64::new(0.0, 0.0);
        let mut prev = f64::INFINITY;
        let mut stalled = 0;
        let mut terms = 0;
        loop {
            if terms >= SERIES_CAP {
                return Err(Error::NonConvergent(format!("{SERIES_CAP} terms without reaching tolerance")));
            }
            let t = gen.term(&mut st, terms);
            value += t;
            terms += 1;
            let m = t.norm();
            if !m.is_finite() {
                return Err(Error::NonConvergent("term overflow".into()));
            }
            // Zero terms (f vanishing on the orbit) do not end the sum early
            // unless the ratio bound already guarantees the tail.
            if m <= stop && (m > 0.0 || terms > 1 && prev <= stop) {
                break;
            }
            if m >= prev && m > 0.0 {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    return Err(Error::NonConvergent(format!(
                        "{STALL_LIMIT} consecutive non-decreasing terms"
                    )));
                }
            } else {
                stalled = 0;
            }
            prev = m;
        }
        Ok(PointResolvent {
            value,
            branch,
            terms,
            bracket: (plus, minus),
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::AlgebraTag;
    use crate::expr::Expr;
    use crate::space::{golden_angle, Dynamics, NetSpace};

    fn op(w: &str, angle: f64) -> WeightedOp {
        let c = Arc::new(NetSpace::circle(128).unwrap());
        let w = AlgElement::from_expr(c.clone(), &Expr::parse(w).unwrap());
        WeightedOp::new(w, Dynamics::rotation(c, angle).unwrap(), AlgebraTag::sup()).unwrap()
    }

    fn elem(t: &WeightedOp, s: &str) -> AlgElement {
        AlgElement::from_expr(t.space().clone(), &Expr::parse(s).unwrap())
    }

    #[test]
    fn zero_weight_divides_by_lambda() {
        let t = op("0", golden_angle());
        let f = elem(&t, "1 + z");
        let r = t.resolvent_series(Complex64::new(3.0, 0.0), &f, 1e-12).unwrap();
        for (g, v) in r.g.samples().iter().zip(f.samples()) {
            assert!((g - v / 3.0).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_operator() {
        let t = op("1", 0.0);
        let f = elem(&t, "z^2");
        let r = t.resolvent_series(Complex64::new(2.0, 0.0), &f, 1e-10).unwrap();
        for (g, v) in r.g.samples().iter().zip(f.samples()) {
            assert!((g - v).norm() < 1e-9);
        }
        let one = elem(&t, "1");
        let p = t
            .resolvent_at_point(Complex64::new(2.0, 0.0), &one, &t.space().points()[0], 1e-12)
            .unwrap();
        assert!((p.value - 1.0).norm() < 1e-11);
    }

    #[test]
    fn outer_series_residual_and_pointwise_agreement() {
        let t = op("2+z", golden_angle());
        let one = elem(&t, "1");
        let lambda = Complex64::new(4.0, 0.0);
        let tol = 1e-9;
        let r = t.resolvent_series(lambda, &one, tol).unwrap();
        assert_eq!(r.branch, Branch::Outer);
        assert!(r.residual < 1e-6, "{}", r.residual);
        let s = Point::new(Complex64::new(1.0, 0.0));
        let p = t.resolvent_at_point(lambda, &one, &s, tol).unwrap();
        assert!((p.value - r.g.eval_at(&s).unwrap()).norm() <= 10.0 * tol);
    }

    #[test]
    fn inner_series_for_small_lambda() {
        let t = op("2+z", golden_angle()).invertible().unwrap();
        let f = elem(&t, "zbar + 0.5");
        let lambda = Complex64::new(0.2, 0.1);
        let r = t.resolvent_series(lambda, &f, 1e-10).unwrap();
        assert_eq!(r.branch, Branch::Inner);
        assert!(r.residual < 1e-8, "{}", r.residual);
        let s = t.space().points()[17];
        let p = t.resolvent_at_point(lambda, &f, &s, 1e-10).unwrap();
        assert!((p.value - r.g.samples()[17]).norm() <= 1e-9);
    }

    #[test]
    fn branches_refused_inside_bracket() {
        let t = op("2+z", golden_angle());
        let one = elem(&t, "1");
        assert!(matches!(
            t.resolvent_series(Complex64::new(2.0, 0.0), &one, 1e-8),
            Err(Error::BranchUnavailable(_))
        ));
        let t = t.invertible().unwrap();
        assert!(matches!(
            t.resolvent_series(Complex64::new(2.0, 0.0), &one, 1e-8),
            Err(Error::BranchUnavailable(_))
        ));
    }

    #[test]
    fn zero_function_resolves_to_zero() {
        let t = op("2+z", golden_angle());
        let zero = elem(&t, "0");
        let p = t
            .resolvent_at_point(Complex64::new(5.0, 0.0), &zero, &t.space().points()[3], 1e-8)
            .unwrap();
        assert_eq!(p.value, Complex64::new(0.0, 0.0));
    }
}
