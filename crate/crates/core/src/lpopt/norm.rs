use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MonicPolynomial;
use crate::domain::{ext_real, Potential, QuadratureScheme};
use crate::{Error, Result};

/// Exponent of an L^p norm, `1 <= p <= inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Inf,
}

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!("p = {p} is below 1")));
        }
        Ok(if p.is_infinite() { PNorm::Inf } else { PNorm::Finite(p) })
    }

    pub fn value(&self) -> f64 {
        match self {
            PNorm::Finite(p) => *p,
            PNorm::Inf => f64::INFINITY,
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, PNorm::Inf)
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ext_real::serialize(&self.value(), s)
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = ext_real::deserialize(d)?;
        PNorm::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: PNorm,
    pub n: usize,
    pub norm_p: f64,
    pub norm_inf: f64,
    pub ratio: f64,
    pub neg_log_norm_over_n: f64,
    /// The minimal norm when `p = 2` and the polynomial is the orthogonal one.
    pub h_n: Option<f64>,
    pub ln_norm_p: f64,
    /// Total reference mass of the grid.
    pub grid_mass: f64,
    /// Set when the log-sum-exp shift exceeded 700.
    pub shift_exceeded: bool,
}

impl NormReport {
    /// Holder bound `norm_p <= norm_inf * mass^{1/p}`, with rounding slack.
    pub fn holder_ok(&self) -> bool {
        let bound = match self.p {
            PNorm::Finite(p) => self.norm_inf * self.grid_mass.powf(1.0 / p),
            PNorm::Inf => self.norm_inf,
        };
        self.norm_p > 0.0 && self.norm_p <= bound * (1.0 + 1e-12)
    }

    /// `ratio * n^{d/p}`, the quantity bounded below in the lower-bound check.
    pub fn scaled_ratio(&self, dim: usize) -> f64 {
        match self.p {
            PNorm::Finite(p) => self.ratio * (self.n as f64).powf(dim as f64 / p),
            PNorm::Inf => self.ratio,
        }
    }
}

/// `ln |P(z_k) w(z_k)^n|` at every node.
pub fn log_weighted_values(poly: &MonicPolynomial, grid: &QuadratureScheme, pot: &Potential, n: usize) -> Vec<f64> {
    let nf = n as f64;
    grid.nodes.iter().map(|z| poly.ln_abs(*z) - nf * pot.eval(*z)).collect()
}

/// Weighted norms of `P w^n` on the grid.
pub fn weighted_norm(
    poly: &MonicPolynomial,
    grid: &QuadratureScheme,
    pot: &Potential,
    p: PNorm,
    n: usize,
) -> Result<NormReport> {
    let le = log_weighted_values(poly, grid, pot, n);
    let lmax = le.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lmax.is_finite() {
        return Err(Error::invalid("weighted polynomial vanishes on the whole grid"));
    }
    let (ln_norm_p, shift) = match p {
        PNorm::Inf => (lmax, lmax.abs()),
        PNorm::Finite(pv) => {
            let s: f64 = le
                .iter()
                .zip(&grid.weights)
                .map(|(l, w)| w * (pv * (l - lmax)).exp())
                .sum();
            (lmax + s.ln() / pv, (pv * lmax).abs())
        }
    };
    let norm_p = ln_norm_p.exp();
    let norm_inf = lmax.exp();
    let neff = n.max(1) as f64;
    Ok(NormReport {
        p,
        n,
        norm_p,
        norm_inf,
        ratio: (ln_norm_p - lmax).exp(),
        neg_log_norm_over_n: -ln_norm_p / neff,
        h_n: if p == PNorm::Finite(2.0) { Some(norm_p) } else { None },
        ln_norm_p,
        grid_mass: grid.total_weight(),
        shift_exceeded: shift > 700.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_quadrature, Condenser, QuadratureOptions};
    use num_complex::Complex64 as C64;

    #[test]
    fn unit_interval_constant() {
        let g = build_quadrature(&Condenser::interval(0.0, 1.0), &Potential::zero(), 0, 16.0, &QuadratureOptions::default()).unwrap();
        let one = MonicPolynomial::from_monomial(&[C64::new(1.0, 0.0)]).unwrap();
        let r = weighted_norm(&one, &g, &Potential::zero(), PNorm::Finite(2.0), 0).unwrap();
        assert!((r.norm_p - 1.0).abs() < 1e-14);
        assert!(r.holder_ok());
    }

    #[test]
    fn planar_first_moment() {
        let pot = Potential::radial_quadratic(1.0);
        let g = build_quadrature(&Condenser::Plane {}, &pot, 1, 32.0, &QuadratureOptions::default()).unwrap();
        let z = MonicPolynomial::from_roots(vec![C64::new(0.0, 0.0)]);
        let r = weighted_norm(&z, &g, &pot, PNorm::Finite(2.0), 1).unwrap();
        assert!((r.h_n.unwrap() - (std::f64::consts::PI / 4.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn p_tokens() {
        let v: Vec<PNorm> = serde_json::from_str(r#"[1, 2.5, "inf"]"#).unwrap();
        assert_eq!(v, vec![PNorm::Finite(1.0), PNorm::Finite(2.5), PNorm::Inf]);
        assert!(serde_json::from_str::<PNorm>("0.5").is_err());
        assert_eq!(serde_json::to_string(&PNorm::Inf).unwrap(), "\"inf\"");
    }

    #[test]
    fn overflow_is_flagged_not_fatal() {
        let g = build_quadrature(&Condenser::interval(1e3, 2e3), &Potential::zero(), 0, 8.0, &QuadratureOptions::default()).unwrap();
        let p = MonicPolynomial::from_roots(vec![C64::new(0.0, 0.0); 300]);
        let r = weighted_norm(&p, &g, &Potential::zero(), PNorm::Finite(2.0), 300).unwrap();
        assert!(r.shift_exceeded);
        assert!(r.ln_norm_p.is_finite());
    }
}
