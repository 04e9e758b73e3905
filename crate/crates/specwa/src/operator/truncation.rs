use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WeightedOp;
use crate::algebra::FourierSeries;
use crate::error::{Error, Result};

/// Eigenvalues of a finite section of T in the Fourier basis. These are not
/// certified spectral values: T is far from normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpectrum {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    /// "triangular" when read off the diagonal, "schur" otherwise.
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpectrumReport {
    pub spectra: Vec<TruncationSpectrum>,
    /// Hausdorff distance between consecutive truncation spectra.
    pub hausdorff_steps: Vec<f64>,
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

impl WeightedOp {
    fn weight_series(&self, n: usize) -> Result<FourierSeries> {
        match self.weight().fourier() {
            Some(s) => Ok(s.clone()),
            None => Ok(self.weight().clone().with_fourier(n.max(16))?.fourier().cloned().expect("attached")),
        }
    }

    /// M[j, k] = ŵ_{j−k}·α^k for |j|, |k| ≤ N.
    pub fn truncated_matrix(&self, n: usize) -> Result<DMatrix<Complex64>> {
        let angle = self
            .dynamics()
            .circle_rotation_angle()
            .ok_or_else(|| Error::UnsupportedDynamics("truncated matrices need a circle rotation".into()))?;
        let w = self.weight_series(n)?;
        let size = 2 * n + 1;
        let ni = n as i64;
        Ok(DMatrix::from_fn(size, size, |r, c| {
            let (j, k) = (r as i64 - ni, c as i64 - ni);
            let c = w.coeff(j - k);
            if c == Complex64::new(0.0, 0.0) {
                c
            } else {
                c * Complex64::from_polar(1.0, (k as f64 * angle).rem_euclid(std::f64::consts::TAU))
            }
        }))
    }

    /// Coefficients of Tf for f given by `coeffs` (degree ≤ N).
    pub fn truncated_action(&self, n: usize, f: &FourierSeries) -> Result<FourierSeries> {
        let m = self.truncated_matrix(n)?;
        let ni = n as i64;
        let v = DVector::from_fn(2 * n + 1, |r, _| f.coeff(r as i64 - ni));
        let out = m * v;
        Ok(FourierSeries::new(n, out.iter().copied().collect()))
    }

    pub fn truncation_spectrum(&self, n: usize) -> Result<TruncationSpectrum> {
        let m = self.truncated_matrix(n)?;
        let size = m.nrows();
        let zero = Complex64::new(0.0, 0.0);
        let lower = (0..size).all(|r| (r + 1..size).all(|c| m[(r, c)] == zero));
        let upper = (0..size).all(|r| (0..r).all(|c| m[(r, c)] == zero));
        if lower || upper {
            return Ok(TruncationSpectrum {
                n,
                eigenvalues: (0..size).map(|i| m[(i, i)]).collect(),
                method: "triangular".into(),
            });
        }
        let schur = Schur::try_new(m, 1e-14, 10_000)
            .ok_or_else(|| Error::NonConvergent("Schur iteration did not converge".into()))?;
        let eig = schur
            .eigenvalues()
            .ok_or_else(|| Error::NonConvergent("Schur form not triangular".into()))?;
        Ok(TruncationSpectrum {
            n,
            eigenvalues: eig.iter().copied().collect(),
            method: "schur".into(),
        })
    }

    /// Truncation spectra at each N with the Hausdorff distance between
    /// consecutive ones.
    pub fn truncation_spectra(&self, ns: &[usize]) -> Result<TruncationSpectrumReport> {
        let spectra: Vec<TruncationSpectrum> =
            ns.iter().map(|&n| self.truncation_spectrum(n)).collect::<Result<_>>()?;
        let hausdorff_steps = spectra
            .windows(2)
            .map(|p| hausdorff(&p[0].eigenvalues, &p[1].eigenvalues))
            .collect();
        Ok(TruncationSpectrumReport {
            spectra,
            hausdorff_steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{AlgElement, AlgebraTag};
    use crate::expr::Expr;
    use crate::space::{golden_angle, Dynamics, NetSpace};

    fn op(w: &str, angle: f64) -> WeightedOp {
        let c = Arc::new(NetSpace::circle(64).unwrap());
        let w = AlgElement::from_expr(c.clone(), &Expr::parse(w).unwrap());
        WeightedOp::new(w, Dynamics::rotation(c, angle).unwrap(), AlgebraTag::wiener()).unwrap()
    }

    #[test]
    fn unit_weight_is_diagonal() {
        let a = golden_angle();
        let m = op("1", a).truncated_matrix(3).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                let want = if r == c {
                    Complex64::from_polar(1.0, (c as f64 - 3.0) * a)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((m[(r, c)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn z_weight_is_a_shift() {
        let a = 0.4;
        let m = op("z", a).truncated_matrix(2).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let want = if r == c + 1 {
                    Complex64::from_polar(1.0, (c as f64 - 2.0) * a)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((m[(r, c)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_plus_z_has_eigenvalues_two_alpha_k() {
        let a = golden_angle();
        let s = op("2+z", a).truncation_spectrum(6).unwrap();
        assert_eq!(s.method, "triangular");
        for (i, e) in s.eigenvalues.iter().enumerate() {
            let k = i as f64 - 6.0;
            assert!((e - 2.0 * Complex64::from_polar(1.0, k * a)).norm() < 1e-13);
        }
    }

    #[test]
    fn cube_roots_of_unity() {
        let s = op("1", TAU / 3.0).truncation_spectrum(4).unwrap();
        for e in &s.eigenvalues {
            assert!((e.powi(3) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn action_matches_apply_power() {
        let c = Arc::new(NetSpace::circle(128).unwrap());
        let w = AlgElement::from_expr(c.clone(), &Expr::parse("2+z").unwrap());
        let t = WeightedOp::new(w, Dynamics::rotation(c.clone(), golden_angle()).unwrap(), AlgebraTag::wiener())
            .unwrap();
        let f = AlgElement::from_expr(c.clone(), &Expr::parse("1 - 2*z^3 + zbar^4").unwrap())
            .with_fourier(8)
            .unwrap();
        let via_matrix = t.truncated_action(8, f.fourier().unwrap()).unwrap();
        let via_power = t.apply_power(&f, 1).unwrap();
        let s = via_power.fourier().unwrap();
        for k in -8..=8 {
            assert!((via_matrix.coeff(k) - s.coeff(k)).norm() < 1e-9);
        }
    }

    #[test]
    fn non_triangular_uses_schur() {
        let s = op("2+z+0.5*zbar", 0.7).truncation_spectra(&[4, 8]).unwrap();
        assert_eq!(s.spectra[0].method, "schur");
        assert_eq!(s.spectra[1].eigenvalues.len(), 17);
        assert_eq!(s.hausdorff_steps.len(), 1);
    }
}
