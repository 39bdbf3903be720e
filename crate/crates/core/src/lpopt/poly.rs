use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::basis::Recurrence;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub enum PolyRepr {
    /// `P = sum_j c_j phi_j` in a recurrence-defined basis.
    Basis { recurrence: Arc<Recurrence>, coeffs: Vec<C64> },
    /// `P = prod (z - r_k)`.
    Roots(Vec<C64>),
}

/// Monic polynomial of degree `n`.
#[derive(Clone, Debug)]
pub struct MonicPolynomial {
    pub degree: usize,
    pub repr: PolyRepr,
}

/// Serializable snapshot of a polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySummary {
    pub degree: usize,
    /// Ascending monomial coefficients.
    pub monomial: Vec<C64>,
    /// Basis coefficients when the polynomial lives in an orthonormal basis.
    pub basis: Option<Vec<C64>>,
}

impl MonicPolynomial {
    /// Builds `P = sum_j c_j phi_j`; the top coefficient must be `1/kappa_n`.
    pub fn from_basis(recurrence: Arc<Recurrence>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > recurrence.degree() + 1 {
            return Err(Error::invalid("coefficient count does not fit the basis"));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("basis coefficients must be finite"));
        }
        let n = coeffs.len() - 1;
        let lead = coeffs[n] * recurrence.log_kappa[n].exp();
        if (lead - 1.0).norm() > 1e-9 {
            return Err(Error::invalid(format!("leading coefficient {lead} is not 1")));
        }
        Ok(MonicPolynomial {
            degree: n,
            repr: PolyRepr::Basis { recurrence, coeffs },
        })
    }

    pub fn from_roots(roots: Vec<C64>) -> Self {
        MonicPolynomial {
            degree: roots.len(),
            repr: PolyRepr::Roots(roots),
        }
    }

    /// Ascending monomial coefficients with leading entry 1.
    pub fn from_monomial(coeffs: &[C64]) -> Result<Self> {
        let n = coeffs.len().checked_sub(1).ok_or_else(|| Error::invalid("empty coefficient list"))?;
        if (coeffs[n] - 1.0).norm() > 1e-12 {
            return Err(Error::invalid("polynomial is not monic"));
        }
        // In the monomial recurrence phi_j = z^j, so the basis and
        // monomial coefficients coincide.
        Self::from_basis(Arc::new(Recurrence::monomial(n)), coeffs.to_vec())
    }

    pub fn basis_coeffs(&self) -> Option<&[C64]> {
        match &self.repr {
            PolyRepr::Basis { coeffs, .. } => Some(coeffs),
            PolyRepr::Roots(_) => None,
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match &self.repr {
            PolyRepr::Basis { recurrence, coeffs } => {
                let v = recurrence.eval(z, self.degree);
                coeffs.iter().zip(&v).map(|(c, p)| c * p).sum()
            }
            PolyRepr::Roots(r) => r.iter().map(|x| z - x).product(),
        }
    }

    /// `ln |P(z)|`, robust against overflow.
    pub fn ln_abs(&self, z: C64) -> f64 {
        match &self.repr {
            PolyRepr::Basis { recurrence, coeffs } => {
                let (v, s) = recurrence.eval_scaled(z, self.degree);
                let p: C64 = coeffs.iter().zip(&v).map(|(c, p)| c * p).sum();
                p.norm().ln() + s
            }
            PolyRepr::Roots(r) => r.iter().map(|x| (z - x).norm().ln()).sum(),
        }
    }

    /// `(P(z), P'(z), scale)`; `eps * scale` bounds the rounding error of
    /// the computed `P(z)`, recurrence included.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64, f64) {
        match &self.repr {
            PolyRepr::Basis { recurrence, coeffs } => {
                let (v, d, a) = recurrence.eval_with_error(z, self.degree);
                let mut p = C64::new(0.0, 0.0);
                let mut dp = C64::new(0.0, 0.0);
                let mut scale = 0.0;
                for j in 0..=self.degree {
                    p += coeffs[j] * v[j];
                    dp += coeffs[j] * d[j];
                    scale += coeffs[j].norm() * (v[j].norm() + a[j]);
                }
                (p, dp, scale)
            }
            PolyRepr::Roots(r) => {
                let mut p = C64::new(1.0, 0.0);
                let mut dp = C64::new(0.0, 0.0);
                let mut scale = 1.0;
                for x in r {
                    dp = dp * (z - x) + p;
                    p *= z - x;
                    scale *= (z - x).norm() + x.norm();
                }
                (p, dp, scale)
            }
        }
    }

    /// Ascending monomial coefficients.
    pub fn monomial_coeffs(&self) -> Vec<C64> {
        match &self.repr {
            PolyRepr::Basis { recurrence, coeffs } => {
                let pis = recurrence.monic_power_forms(self.degree);
                let mut out = vec![C64::new(0.0, 0.0); self.degree + 1];
                for (j, c) in coeffs.iter().enumerate() {
                    if *c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let ck = c * recurrence.log_kappa[j].exp();
                    for (k, a) in pis[j].iter().enumerate() {
                        out[k] += ck * a;
                    }
                }
                out
            }
            PolyRepr::Roots(r) => {
                let mut out = vec![C64::new(1.0, 0.0)];
                for x in r {
                    let mut next = vec![C64::new(0.0, 0.0); out.len() + 1];
                    for (k, a) in out.iter().enumerate() {
                        next[k + 1] += a;
                        next[k] -= x * a;
                    }
                    out = next;
                }
                out
            }
        }
    }

    pub fn leading_coefficient(&self) -> C64 {
        *self.monomial_coeffs().last().unwrap()
    }

    pub fn summary(&self) -> PolySummary {
        PolySummary {
            degree: self.degree,
            monomial: self.monomial_coeffs(),
            basis: self.basis_coeffs().map(|c| c.to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representations_agree() {
        let roots = vec![C64::new(1.0, 0.0), C64::new(-0.5, 0.25), C64::new(2.0, -1.0)];
        let pr = MonicPolynomial::from_roots(roots);
        let mono = pr.monomial_coeffs();
        let pm = MonicPolynomial::from_monomial(&mono).unwrap();
        for z in [C64::new(0.3, 0.1), C64::new(-2.0, 1.5), C64::new(5.0, 0.0)] {
            assert!((pr.eval(z) - pm.eval(z)).norm() < 1e-12 * (1.0 + pr.eval(z).norm()));
            let (_, d1, _) = pr.eval_with_derivative(z);
            let (_, d2, _) = pm.eval_with_derivative(z);
            assert!((d1 - d2).norm() < 1e-11 * (1.0 + d1.norm()));
            assert!((pr.ln_abs(z) - pm.ln_abs(z)).abs() < 1e-12);
        }
        assert!((pm.leading_coefficient() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn non_monic_input_rejected() {
        assert!(MonicPolynomial::from_monomial(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]).is_err());
        assert!(MonicPolynomial::from_monomial(&[]).is_err());
    }
}
