use std::f64::consts::LN_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{orbit_logs, prefix};
use crate::algebra::{norm, AlgElement, Evaluator, DEFAULT_FOURIER_DEGREE};
use crate::error::{Error, Result};
use crate::operator::WeightedOp;
use crate::space::{bump, Point};

/// n·δ_n above this anywhere in the horizon selects the 2δ_n branch.
pub const LIMSUP_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleBranch {
    /// ε_n = 2δ_n.
    TwiceDelta,
    /// ε_n = 1/√n.
    InverseRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub branch: ScheduleBranch,
    pub threshold: f64,
    /// δ_n for n = 1, 2, …
    pub deltas: Vec<f64>,
    /// ε_n for n = 1, 2, …; entries outside (0, 1) are rejected on access.
    pub epsilons: Vec<f64>,
}

impl EpsilonSchedule {
    pub fn epsilon(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.epsilons.len() {
            return Err(Error::Invalid(format!("schedule covers n = 1..={}", self.epsilons.len())));
        }
        let eps = self.epsilons[n - 1];
        if eps > 0.0 && eps < 1.0 {
            Ok(eps)
        } else {
            Err(Error::ScheduleDegenerate { n, eps })
        }
    }
}

/// Damping factors from the growth rates δ_n of ‖U^{|n|}‖ = e^{δ_n·n}.
///
/// The unbounded-limsup test is replaced by "n·δ_n exceeds the threshold for
/// some n in the given range".
pub fn epsilon_schedule(deltas: &[f64]) -> Result<EpsilonSchedule> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(Error::Invalid("deltas must be finite and non-negative".into()));
    }
    let grows = deltas
        .iter()
        .enumerate()
        .any(|(i, d)| (i + 1) as f64 * d > LIMSUP_THRESHOLD);
    let (branch, epsilons) = if grows {
        (ScheduleBranch::TwiceDelta, deltas.iter().map(|d| 2.0 * d).collect())
    } else {
        (
            ScheduleBranch::InverseRoot,
            (1..=deltas.len()).map(|n| 1.0 / (n as f64).sqrt()).collect(),
        )
    };
    Ok(EpsilonSchedule {
        branch,
        threshold: LIMSUP_THRESHOLD,
        deltas: deltas.to_vec(),
        epsilons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSource {
    /// Uniform bound ‖Uⁿ‖ ≤ C.
    CompositionBound,
    /// Upper end of the power-norm bracket of U.
    PowerNormUpper,
    /// No upper bound available: the lower end of the bracket, an estimate.
    PowerNormEstimate,
}

/// δ_n for n = 1..=n_max with ‖Uⁿ‖ = e^{n·δ_n}, from the best information
/// available on the composition operator U in the operator's algebra.
pub fn composition_deltas(op: &WeightedOp, n_max: usize) -> Result<(Vec<f64>, DeltaSource)> {
    if let Some(c) = op.composition_bound() {
        let l = c.ln().max(0.0);
        return Ok(((1..=n_max).map(|n| l / n as f64).collect(), DeltaSource::CompositionBound));
    }
    let one = AlgElement::from_fn(op.space().clone(), |_| Complex64::new(1.0, 0.0));
    let u = WeightedOp::new(one, op.dynamics().clone(), *op.alg())?;
    let table = &u.power_norm_table(n_max, false)?[1..];
    if table.iter().all(|p| p.log_upper.is_some()) {
        let d = table.iter().map(|p| (p.log_upper.unwrap_or(0.0) / p.n as f64).max(0.0)).collect();
        Ok((d, DeltaSource::PowerNormUpper))
    } else {
        let d = table.iter().map(|p| (p.log_lower / p.n as f64).max(0.0)).collect();
        Ok((d, DeltaSource::PowerNormEstimate))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowChoice {
    /// Best neutral net point, largest admissible ball around it.
    Auto,
    /// Caller-supplied ball; the disjointness and cocycle bounds are not
    /// enforced.
    Given { center: Point, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorStep {
    pub n: usize,
    pub epsilon: f64,
    pub branch: ScheduleBranch,
    pub delta_source: DeltaSource,
    pub center: Point,
    pub radius: f64,
    /// Smallest distance between φⁱ(center), φʲ(center), −n−1 ≤ i < j ≤ n+1.
    pub separation: f64,
    pub window_checked: bool,
    pub g_norm: f64,
    pub residual_norm: f64,
    /// ‖g − Tg‖/‖g‖ for the operator rescaled to λ = 1.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ApproxEigenvector {
    pub lambda: Complex64,
    pub step: EigenvectorStep,
    /// g_n for the rescaled operator (an approximate eigenvector of T for λ).
    pub g: AlgElement,
}

/// Σ_j c_j (Tʲf)(p) for j = lo..=hi, with the cocycle built incrementally
/// along the orbit of p.
fn orbit_combination(op: &WeightedOp, f: &Evaluator, lo: i64, hi: i64, coef: Arc<dyn Fn(i64) -> f64 + Send + Sync>) -> Evaluator {
    let op = op.clone();
    let f = f.clone();
    Arc::new(move |p: &Point| {
        let d = op.dynamics();
        let mut total = Complex64::new(0.0, 0.0);
        if lo <= 0 && 0 <= hi {
            total += coef(0) * f(p);
        }
        let mut q = *p;
        let mut w = Complex64::new(1.0, 0.0);
        for j in 1..=hi {
            w *= op.weight_at(&q);
            q = d.forward(&q);
            if j >= lo {
                total += coef(j) * w * f(&q);
            }
        }
        let mut q = *p;
        let mut w = Complex64::new(1.0, 0.0);
        for j in 1..=-lo {
            q = d.inverse(&q);
            w /= op.weight_at(&q);
            if -j <= hi {
                total += coef(-j) * w * f(&q);
            }
        }
        total
    })
}

/// Smallest distance between the points φⁱ(s), −m ≤ i ≤ m.
fn orbit_separation(op: &WeightedOp, s: &Point, m: usize) -> f64 {
    let space = op.space();
    let d = op.dynamics();
    if d.is_isometry() {
        return (1..=2 * m as i64)
            .map(|k| space.distance(s, &d.iterate(s, k)))
            .fold(f64::INFINITY, f64::min);
    }
    let orbit: Vec<Point> = (-(m as i64)..=m as i64).map(|k| d.iterate(s, k)).collect();
    let mut best = f64::INFINITY;
    for i in 0..orbit.len() {
        for j in i + 1..orbit.len() {
            best = best.min(space.distance(&orbit[i], &orbit[j]));
        }
    }
    best
}

/// How far the cocycle bounds |w_i(s)| ≥ ½ and |w_i(φ⁻ⁱs)| ≤ 2,
/// 0 ≤ i ≤ m, are from holding at s, in log units.
fn cocycle_bound_violation(op: &WeightedOp, s: &Point, m: usize) -> Result<f64> {
    let fwd = prefix(&orbit_logs(op, s, m, false)?);
    let bwd = prefix(&orbit_logs(op, s, m, true)?);
    let mut v: f64 = 0.0;
    for i in 0..=m {
        v = v.max(-LN_2 - fwd[i]).max(bwd[i] - LN_2);
    }
    Ok(v)
}

/// The images φⁱ(B), −m ≤ i ≤ m, of the net ball B(s, r) are pairwise
/// disjoint when the orbit of s is farther apart than the image radii.
fn images_disjoint(op: &WeightedOp, s: &Point, r: f64, m: usize) -> bool {
    let space = op.space();
    let d = op.dynamics();
    let ball: Vec<Point> = space.ball(s, r).into_iter().map(|i| space.points()[i]).collect();
    let ks: Vec<i64> = (-(m as i64)..=m as i64).collect();
    let centers: Vec<Point> = ks.iter().map(|&k| d.iterate(s, k)).collect();
    let radii: Vec<f64> = ks
        .iter()
        .zip(&centers)
        .map(|(&k, c)| ball.iter().map(|b| space.distance(&d.iterate(b, k), c)).fold(r, f64::max))
        .collect();
    for i in 0..ks.len() {
        for j in i + 1..ks.len() {
            if space.distance(&centers[i], &centers[j]) <= radii[i] + radii[j] {
                return false;
            }
        }
    }
    true
}

fn select_window(op: &WeightedOp, n: usize) -> Result<(Point, f64, f64)> {
    let m = n + 1;
    let space = op.space();
    let h = space.resolution();
    let fail = |reason: String| Error::NoAdmissibleWindow { n, reason };
    let mut best: Option<(f64, f64, usize)> = None;
    for (i, s) in space.points().iter().enumerate() {
        let v = cocycle_bound_violation(op, s, m)?;
        let sep = orbit_separation(op, s, m);
        let better = match best {
            None => true,
            Some((bv, bs, _)) => v < bv || (v == bv && sep > bs),
        };
        if better {
            best = Some((v, sep, i));
        }
    }
    let (v, sep, i) = best.expect("net is non-empty");
    if v > 0.0 {
        return Err(fail(format!("cocycle bounds fail at every net point (best excess {v:.3e})")));
    }
    let center = space.points()[i];
    let mut radius = 0.45 * sep;
    loop {
        if radius <= 2.0 * h {
            return Err(fail(format!(
                "orbit separation {sep:.3e} leaves no ball above the net resolution {h:.3e}"
            )));
        }
        let bounds_hold = space
            .ball(&center, radius)
            .into_iter()
            .map(|k| cocycle_bound_violation(op, &space.points()[k], m))
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .all(|&x| x == 0.0);
        if bounds_hold && images_disjoint(op, &center, radius, m) {
            return Ok((center, radius, sep));
        }
        radius *= 0.7;
    }
}

/// g_n = Σ_{j=−n−1}^{n} (1−ε_n)^{|j|} Tʲf_n for T rescaled so that λ = 1,
/// with f_n a bump of algebra norm 1 in a window whose first n+1 forward and
/// backward images are disjoint. Reports ‖g_n − Tg_n‖/‖g_n‖.
pub fn approximate_eigenvector(
    op: &WeightedOp,
    lambda: Complex64,
    n: usize,
    window: &WindowChoice,
) -> Result<ApproxEigenvector> {
    if n == 0 {
        return Err(Error::Invalid("approximate eigenvectors need n >= 1".into()));
    }
    if !op.is_invertible() {
        return Err(Error::WeightNotInvertible);
    }
    let t = op.scaled(lambda)?;
    let (deltas, delta_source) = composition_deltas(op, n + 1)?;
    let schedule = epsilon_schedule(&deltas)?;
    let eps = schedule.epsilon(n)?;
    let m = n + 1;
    let (center, radius, separation, window_checked) = match window {
        WindowChoice::Auto => {
            let (c, r, s) = select_window(&t, n)?;
            (c, r, s, true)
        }
        WindowChoice::Given { center, radius } => (*center, *radius, orbit_separation(&t, center, m), false),
    };

    let space = op.space();
    let alg = op.alg();
    let raw = bump(space, &center, radius, alg.alpha())?;
    let raw_norm = norm(&raw.clone().prepared_for(alg, DEFAULT_FOURIER_DEGREE)?, alg)?;
    let f = raw.scale(Complex64::new(1.0 / raw_norm, 0.0));
    let f_eval = f.evaluator().cloned().ok_or(Error::MissingRepresentation("evaluator"))?;

    let damp = 1.0 - eps;
    let g_eval = orbit_combination(&t, &f_eval, -(m as i64), n as i64, Arc::new(move |j| damp.powi(j.abs() as i32)));
    let g = AlgElement::from_evaluator(space.clone(), g_eval.clone()).prepared_for(alg, DEFAULT_FOURIER_DEGREE)?;
    let r_eval: Evaluator = {
        let (t, g_eval) = (t.clone(), g_eval.clone());
        Arc::new(move |p: &Point| g_eval(p) - t.weight_at(p) * g_eval(&t.dynamics().forward(p)))
    };
    let r = AlgElement::from_evaluator(space.clone(), r_eval).prepared_for(alg, DEFAULT_FOURIER_DEGREE)?;
    let g_norm = norm(&g, alg)?;
    let residual_norm = norm(&r, alg)?;
    Ok(ApproxEigenvector {
        lambda,
        step: EigenvectorStep {
            n,
            epsilon: eps,
            branch: schedule.branch,
            delta_source,
            center,
            radius,
            separation,
            window_checked,
            g_norm,
            residual_norm,
            residual: residual_norm / g_norm,
        },
        g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDecay {
    pub lambda: Complex64,
    pub steps: Vec<EigenvectorStep>,
    /// residual(n_{k+1}) < residual(n_k) for every consecutive pair.
    pub strictly_decreasing: bool,
    /// Last residual below half the first.
    pub halved: bool,
}

pub fn residual_decay(op: &WeightedOp, lambda: Complex64, ns: &[usize], window: &WindowChoice) -> Result<ResidualDecay> {
    let steps: Vec<EigenvectorStep> = ns
        .iter()
        .map(|&n| approximate_eigenvector(op, lambda, n, window).map(|a| a.step))
        .collect::<Result<_>>()?;
    let strictly_decreasing = steps.windows(2).all(|p| p[1].residual < p[0].residual);
    let halved = match (steps.first(), steps.last()) {
        (Some(a), Some(b)) if steps.len() > 1 => b.residual < 0.5 * a.residual,
        _ => false,
    };
    Ok(ResidualDecay {
        lambda,
        steps,
        strictly_decreasing,
        halved,
    })
}

/// Truncation of F(f) = Σ_{k≥0} γ^{−k}w_k(s) f(φᵏs) + Σ_{k≥1} γᵏ f(φ^{−k}s)/w_k(φ^{−k}s),
/// a functional with F(Tf) = γF(f).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunctional {
    pub gamma: Complex64,
    pub s: Point,
    pub n: usize,
    /// (φᵏs, γ^{−k}w_k(s)) for k = 0..=N+1; the last entry lies past the
    /// truncation and only enters the defect.
    pub forward: Vec<(Point, Complex64)>,
    /// (φ^{−k}s, γᵏ/w_k(φ^{−k}s)) for k = 1..=N.
    pub backward: Vec<(Point, Complex64)>,
    /// |γ|·(|a_{N+1}| + |b_N|): the truncated functional satisfies
    /// |F(Tf) − γF(f)| ≤ tail_mass·sup|f| exactly.
    pub tail_mass: f64,
    /// Per-step geometric decay |a_N|^{1/N} and |b_N|^{1/N}.
    pub forward_ratio: f64,
    pub backward_ratio: f64,
    /// |F(f)| for a bump at s that misses the rest of the truncated orbit
    /// (or for f ≡ 1 when the net cannot resolve such a bump).
    pub nontrivial: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalDefect {
    pub value: Complex64,
    pub defect: f64,
    /// sup|f| over the net and the orbit points used.
    pub test_norm: f64,
    pub bound: f64,
    /// Floating-point allowance: 8ε times the sum of the moduli of all terms.
    pub roundoff: f64,
    pub within: bool,
}

fn value_at(f: &AlgElement, p: &Point) -> Complex64 {
    match f.evaluator() {
        Some(e) => e(p),
        None => f.samples()[f.space().nearest(p)],
    }
}

impl Eigenfunctional {
    /// F(f) over the truncated weights.
    pub fn apply(&self, f: &AlgElement) -> Complex64 {
        let fwd: Complex64 = self.forward[..=self.n].iter().map(|(p, a)| a * value_at(f, p)).sum();
        let bwd: Complex64 = self.backward.iter().map(|(p, b)| b * value_at(f, p)).sum();
        fwd + bwd
    }

    /// |F(Tf) − γF(f)|, summed as pairs that cancel in exact arithmetic so
    /// that only the two boundary terms survive.
    pub fn defect(&self, op: &WeightedOp, f: &AlgElement) -> FunctionalDefect {
        let g = self.gamma;
        let n = self.n;
        let fv: Vec<Complex64> = self.forward.iter().map(|(p, _)| value_at(f, p)).collect();
        let bv: Vec<Complex64> = self.backward.iter().map(|(p, _)| value_at(f, p)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        let mut add = |x: Complex64, mass_term: f64| {
            total += x;
            mass += mass_term;
        };
        for k in 0..=n {
            let (p, a) = self.forward[k];
            let x = a * op.weight_at(&p) * fv[k + 1];
            if k < n {
                let y = g * (self.forward[k + 1].1 * fv[k + 1]);
                add(x - y, x.norm() + y.norm());
            } else {
                add(x, x.norm());
            }
        }
        for k in 1..=n {
            let (p, b) = self.backward[k - 1];
            let (prev_w, prev_f) = if k == 1 { (self.forward[0].1, fv[0]) } else { (self.backward[k - 2].1, bv[k - 2]) };
            let x = b * op.weight_at(&p) * prev_f;
            let y = g * (prev_w * prev_f);
            add(x - y, x.norm() + y.norm());
        }
        let last = g * (self.backward[n - 1].1 * bv[n - 1]);
        add(-last, last.norm());

        let test_norm = fv.iter().chain(&bv).map(|v| v.norm()).fold(f.sup_norm(), f64::max);
        let roundoff = 8.0 * f64::EPSILON * mass;
        let defect = total.norm();
        let bound = self.tail_mass * test_norm;
        FunctionalDefect {
            value: self.apply(f),
            defect,
            test_norm,
            bound,
            roundoff,
            within: defect <= bound + roundoff,
        }
    }
}

/// Truncated eigenfunctional of T′ at γ built on the two-sided orbit of s.
/// Both weight sequences must decay geometrically, which holds when s lies
/// in O at level |γ|.
pub fn eigenfunctional(op: &WeightedOp, gamma: Complex64, s: &Point, n: usize) -> Result<Eigenfunctional> {
    if !op.is_invertible() {
        return Err(Error::WeightNotInvertible);
    }
    if n == 0 || gamma.norm() == 0.0 {
        return Err(Error::Invalid("eigenfunctionals need N >= 1 and γ ≠ 0".into()));
    }
    let d = op.dynamics();
    let mut forward = Vec::with_capacity(n + 2);
    let mut p = *s;
    let mut a = Complex64::new(1.0, 0.0);
    forward.push((p, a));
    for _ in 0..=n {
        a = a * op.weight_at(&p) / gamma;
        p = d.forward(&p);
        forward.push((p, a));
    }
    let mut backward = Vec::with_capacity(n);
    let mut q = *s;
    let mut b = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        q = d.inverse(&q);
        b = b * gamma / op.weight_at(&q);
        backward.push((q, b));
    }
    let a_n = forward[n].1.norm();
    let b_n = backward[n - 1].1.norm();
    let forward_ratio = a_n.powf(1.0 / n as f64);
    let backward_ratio = b_n.powf(1.0 / n as f64);
    if !(forward_ratio < 1.0 && backward_ratio < 1.0) {
        return Err(Error::TailsNotSummable {
            forward: forward_ratio,
            backward: backward_ratio,
        });
    }
    let tail_mass = gamma.norm() * (forward[n + 1].1.norm() + b_n);

    let mut out = Eigenfunctional {
        gamma,
        s: *s,
        n,
        forward,
        backward,
        tail_mass,
        forward_ratio,
        backward_ratio,
        nontrivial: 0.0,
    };
    let space = op.space();
    let sep = out.forward[1..=n]
        .iter()
        .chain(&out.backward)
        .map(|(p, _)| space.distance(s, p))
        .fold(f64::INFINITY, f64::min);
    let witness = match bump(space, s, 0.45 * sep, 1.0) {
        Ok(b) => b,
        Err(_) => AlgElement::from_fn(space.clone(), |_| Complex64::new(1.0, 0.0)),
    };
    out.nontrivial = out.apply(&witness).norm();
    Ok(out)
}
