use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// One monomial `coeff * x^x_pow * y^y_pow` of a bivariate polynomial in
/// `x = Re z`, `y = Im z`. Serialized as `[x_pow, y_pow, coeff]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm(pub u32, pub u32, pub f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialKind {
    /// `V = 0`, i.e. `w = 1`.
    Zero,
    /// `V(z) = ln|z|`. Sits exactly on the boundary of admissibility.
    LogModulus,
    /// `V(z) = sum c x^i y^j`.
    Polynomial { terms: Vec<PolyTerm> },
}

/// External field `V`; the weight is `w = exp(-V)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Potential {
    pub kind: PotentialKind,
}

impl Potential {
    pub fn new(kind: PotentialKind) -> Self {
        Potential { kind }
    }

    pub fn zero() -> Self {
        Self::new(PotentialKind::Zero)
    }

    pub fn log_modulus() -> Self {
        Self::new(PotentialKind::LogModulus)
    }

    pub fn polynomial(terms: Vec<PolyTerm>) -> Self {
        Self::new(PotentialKind::Polynomial { terms })
    }

    /// `V = c (Re z)^2`.
    pub fn quadratic(c: f64) -> Self {
        Self::polynomial(vec![PolyTerm(2, 0, c)])
    }

    /// `V = c |z|^2`.
    pub fn radial_quadratic(c: f64) -> Self {
        Self::polynomial(vec![PolyTerm(2, 0, c), PolyTerm(0, 2, c)])
    }

    /// `V = a4 x^4 + a2 x^2`.
    pub fn quartic(a4: f64, a2: f64) -> Self {
        Self::polynomial(vec![PolyTerm(4, 0, a4), PolyTerm(2, 0, a2)])
    }

    pub fn eval(&self, z: C64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::LogModulus => z.norm().ln(),
            PotentialKind::Polynomial { terms } => terms
                .iter()
                .map(|&PolyTerm(i, j, c)| c * z.re.powi(i as i32) * z.im.powi(j as i32))
                .sum(),
        }
    }

    pub fn weight(&self, z: C64) -> f64 {
        (-self.eval(z)).exp()
    }

    /// Whether `V` is twice continuously differentiable everywhere.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.kind, PotentialKind::LogModulus)
    }

    /// True when `V(x) = V(-x)` on the real line, judged from the
    /// polynomial exponents.
    pub fn is_even_real(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero | PotentialKind::LogModulus => true,
            PotentialKind::Polynomial { terms } => terms.iter().all(|t| t.0 % 2 == 0 || t.2 == 0.0),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if let PotentialKind::Polynomial { terms } = &self.kind {
            if terms.iter().any(|t| !t.2.is_finite()) {
                return Err(crate::Error::invalid("potential coefficients must be finite"));
            }
        }
        Ok(())
    }
}
