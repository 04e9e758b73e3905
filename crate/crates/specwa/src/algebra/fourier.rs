use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Trigonometric polynomial Σ_{|k|≤N} c_k z^k on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    degree: usize,
    /// c_{-N}, …, c_N.
    coeffs: Vec<Complex64>,
    /// ℓ¹ mass dropped when this series was produced by truncation.
    pub truncation_mass: f64,
}

impl FourierSeries {
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), 2 * degree + 1, "need 2N+1 coefficients");
        FourierSeries {
            degree,
            coeffs,
            truncation_mass: 0.0,
        }
    }

    pub fn zero(degree: usize) -> Self {
        FourierSeries::new(degree, vec![Complex64::new(0.0, 0.0); 2 * degree + 1])
    }

    /// Series from (k, c_k) pairs.
    pub fn from_modes(degree: usize, modes: &[(i64, Complex64)]) -> Self {
        let mut s = FourierSeries::zero(degree);
        for &(k, c) in modes {
            s.set(k, s.coeff(k) + c);
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.degree as i64;
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    fn set(&mut self, k: i64, c: Complex64) {
        let n = self.degree as i64;
        assert!(k.abs() <= n, "mode {k} outside degree {n}");
        self.coeffs[(k + n) as usize] = c;
    }

    /// Highest |k| with a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        let n = self.degree as i64;
        let zero = Complex64::new(0.0, 0.0);
        (0..=n)
            .rev()
            .find(|&k| self.coeff(k) != zero || self.coeff(-k) != zero)
            .unwrap_or(0) as usize
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let n = self.degree as i64;
        // z^k for unimodular z via repeated multiplication from both ends.
        let zinv = if z.norm_sqr() > 0.0 { 1.0 / z } else { Complex64::new(0.0, 0.0) };
        let mut acc = self.coeff(0);
        let mut zp = Complex64::new(1.0, 0.0);
        let mut zm = Complex64::new(1.0, 0.0);
        for k in 1..=n {
            zp *= z;
            zm *= zinv;
            acc += self.coeff(k) * zp + self.coeff(-k) * zm;
        }
        acc
    }

    /// Coefficients of z ↦ f(αz): c_k ↦ c_k α^k.
    pub fn rotate(&self, angle: f64) -> Self {
        let n = self.degree as i64;
        let mut out = self.clone();
        for k in -n..=n {
            out.set(k, self.coeff(k) * Complex64::from_polar(1.0, (k as f64 * angle).rem_euclid(TAU)));
        }
        out
    }

    /// Product by full convolution, truncated back to `degree`.
    pub fn mul(&self, other: &Self, degree: usize) -> Self {
        let a = self.degree as i64;
        let b = other.degree as i64;
        let full = (a + b) as usize;
        let mut conv = vec![Complex64::new(0.0, 0.0); 2 * full + 1];
        for i in -a..=a {
            let ci = self.coeff(i);
            if ci == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in -b..=b {
                conv[(i + j + full as i64) as usize] += ci * other.coeff(j);
            }
        }
        let mut out = FourierSeries::zero(degree);
        let mut dropped = 0.0;
        for (idx, c) in conv.iter().enumerate() {
            let k = idx as i64 - full as i64;
            if k.unsigned_abs() as usize <= degree {
                out.set(k, *c);
            } else {
                dropped += c.norm();
            }
        }
        out.truncation_mass = dropped + self.truncation_mass + other.truncation_mass;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, sign: Complex64) -> Self {
        let degree = self.degree.max(other.degree);
        let n = degree as i64;
        let mut out = FourierSeries::zero(degree);
        for k in -n..=n {
            out.set(k, self.coeff(k) + sign * other.coeff(k));
        }
        out.truncation_mass = self.truncation_mass + other.truncation_mass;
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FourierSeries {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            truncation_mass: self.truncation_mass * c.norm(),
        }
    }

    /// Coefficients |k| ≤ degree of a function sampled on the circle, by FFT
    /// on a grid of at least 4·degree nodes (exact for trigonometric
    /// polynomials of degree ≤ degree).
    pub fn transform<F: Fn(Complex64) -> Complex64>(f: F, degree: usize) -> Self {
        let m = (4 * degree + 4).next_power_of_two();
        let mut buf: Vec<Complex64> = (0..m)
            .map(|j| f(Complex64::from_polar(1.0, TAU * j as f64 / m as f64)))
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(m).process(&mut buf);
        let scale = 1.0 / m as f64;
        let n = degree as i64;
        let mut out = FourierSeries::zero(degree);
        for k in -n..=n {
            let idx = k.rem_euclid(m as i64) as usize;
            out.set(k, buf[idx] * scale);
        }
        // Coefficients at the FFT roundoff level are set to zero so that
        // trigonometric polynomials come out with exact zeros.
        let floor = 64.0 * f64::EPSILON * out.l1_norm();
        for c in out.coeffs.iter_mut() {
            if c.norm() <= floor {
                out.truncation_mass += c.norm();
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn transform_recovers_trig_polynomial() {
        let f = |z: Complex64| c(2.0, 0.0) + z - c(0.0, 3.0) * z.conj() * z.conj();
        let s = FourierSeries::transform(f, 8);
        assert!((s.coeff(0) - c(2.0, 0.0)).norm() < 1e-13);
        assert!((s.coeff(1) - c(1.0, 0.0)).norm() < 1e-13);
        assert!((s.coeff(-2) - c(0.0, -3.0)).norm() < 1e-13);
        assert!(s.coeff(3).norm() < 1e-13);
        assert_eq!(s.effective_degree(), 2);
    }

    #[test]
    fn square_of_two_plus_z() {
        let w = FourierSeries::from_modes(1, &[(0, c(2.0, 0.0)), (1, c(1.0, 0.0))]);
        let sq = w.mul(&w, 4);
        assert_eq!(sq.coeff(0), c(4.0, 0.0));
        assert_eq!(sq.coeff(1), c(4.0, 0.0));
        assert_eq!(sq.coeff(2), c(1.0, 0.0));
        assert_eq!(sq.l1_norm(), 9.0);
        assert_eq!(sq.truncation_mass, 0.0);
        let cut = w.mul(&w, 1);
        assert_eq!(cut.truncation_mass, 1.0);
    }

    #[test]
    fn rotation_scales_modes() {
        let w = FourierSeries::from_modes(2, &[(2, c(1.0, 0.0))]);
        let r = w.rotate(std::f64::consts::FRAC_PI_2);
        assert!((r.coeff(2) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_matches_closed_form() {
        let w = FourierSeries::from_modes(3, &[(0, c(1.0, 0.0)), (-3, c(0.5, 0.5))]);
        let z = Complex64::from_polar(1.0, 0.77);
        let want = c(1.0, 0.0) + c(0.5, 0.5) * z.powi(-3);
        assert!((w.eval(z) - want).norm() < 1e-14);
    }
}
