//! Logarithmic potentials, Green's functions, the functional `f_n`,
//! moment checks, the gap certificate and restriction ratios.

mod greens;
mod restriction;
mod widom;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use greens::{greens_function, GreensDomain};
pub use restriction::{fit_restriction, line_fit, restriction_excess, restriction_ratio, FitStatus, RestrictionFit, NOISE_FLOOR};
pub use widom::{transplant_check, widom_search, TransplantCheck, WidomCertificate, GAP_M};

use crate::domain::DiscreteMeasure;
use crate::equilibrium::EquilibriumResult;
use crate::geometry::SupportGeometry;
use crate::lpopt::MonicPolynomial;
use crate::{Error, Result};

/// `U^m(z) = sum m_i ln(1/|z - z_i|)`; `+inf` at a charged atom.
pub fn log_potential(m: &DiscreteMeasure, z: C64) -> f64 {
    m.log_potential(z)
}

/// Green's domain matching a support: the exterior of a single real
/// cluster or of a disc around a planar support. Multi-component supports
/// have no closed form and get `None`.
pub fn greens_domain_for(geo: &SupportGeometry) -> Option<GreensDomain> {
    if geo.fills.len() != 1 {
        return None;
    }
    let v = &geo.fills[0].vertices;
    if geo.real {
        let lo = v.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        return GreensDomain::interval(lo, hi).ok();
    }
    let c = v.iter().sum::<C64>() / v.len() as f64;
    let r = v.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
    GreensDomain::disc(c, r).ok()
}

/// `(1/n) ln|P(z)| + (1/n) sum_stray G(z, z_l) - sum_i m_i ln|z - z_i|`.
///
/// A root is stray when it lies further than `stray_eps` from the filled
/// support. Without a Green's domain stray roots get no correction.
pub fn f_n_functional(
    poly: &MonicPolynomial,
    roots: &[C64],
    eq: &EquilibriumResult,
    geo: &SupportGeometry,
    dom: Option<&GreensDomain>,
    z: C64,
    stray_eps: f64,
) -> Result<f64> {
    let n = poly.degree;
    if n == 0 {
        return Err(Error::invalid("f_n needs degree at least 1"));
    }
    if geo.dist_to_hull(z) <= stray_eps {
        return Err(Error::invalid(format!("test point {z} is within {stray_eps} of the support hull")));
    }
    if let Some(r) = roots.iter().find(|r| (*r - z).norm() <= 1e-14 * (1.0 + z.norm())) {
        return Err(Error::invalid(format!("test point {z} coincides with the root {r}")));
    }
    let nf = n as f64;
    let mut f = poly.ln_abs(z) / nf;
    if let Some(dom) = dom {
        for r in roots {
            if geo.dist_to_pchull(*r) > stray_eps {
                f += greens_function(dom, z, Some(*r))? / nf;
            }
        }
    }
    Ok(f + eq.measure.log_potential(z))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalayageMoments {
    pub counting: Vec<C64>,
    pub equilibrium: Vec<C64>,
    pub max_deviation: f64,
}

/// Moments `sum m z^j`, `j = 0..=j_max`, of both measures.
pub fn balayage_moments(counting: &DiscreteMeasure, eq: &EquilibriumResult, j_max: usize) -> Result<BalayageMoments> {
    if j_max == 0 {
        return Err(Error::invalid("j_max must be at least 1"));
    }
    let a = counting.moments(j_max);
    let b = eq.measure.moments(j_max);
    let max_deviation = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(BalayageMoments {
        counting: a,
        equilibrium: b,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_potential() {
        let m = DiscreteMeasure::new(vec![C64::new(0.0, 0.0)], vec![1.0]).unwrap();
        assert!((log_potential(&m, C64::new(std::f64::consts::E, 0.0)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_exterior_potential() {
        let k = 256;
        let pts: Vec<C64> = (0..k)
            .map(|j| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
            .collect();
        let m = DiscreteMeasure::counting(&pts);
        assert!((log_potential(&m, C64::new(2.0, 0.0)) + 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn disc_exterior_potential() {
        // midpoint rings in radius, many angles per ring
        let rad = 0.5f64.sqrt();
        let (nr, na) = (200, 64);
        let mut atoms = Vec::new();
        let mut masses = Vec::new();
        for i in 0..nr {
            let r = rad * (i as f64 + 0.5) / nr as f64;
            for j in 0..na {
                atoms.push(C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / na as f64));
                masses.push(r);
            }
        }
        let tot: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= tot);
        let m = DiscreteMeasure::new(atoms, masses).unwrap();
        assert!((log_potential(&m, C64::new(2.0, 0.0)) + 2f64.ln()).abs() < 1e-4);
    }
}
