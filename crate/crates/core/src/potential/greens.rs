use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Complement of a segment or a closed disc, with closed-form Green's
/// function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GreensDomain {
    IntervalComplement { a: f64, b: f64 },
    DiscComplement { center: [f64; 2], radius: f64 },
}

impl GreensDomain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = GreensDomain::IntervalComplement { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(center: C64, radius: f64) -> Result<Self> {
        let d = GreensDomain::DiscComplement {
            center: [center.re, center.im],
            radius,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GreensDomain::IntervalComplement { a, b } if a.is_finite() && b.is_finite() && a < b => Ok(()),
            GreensDomain::DiscComplement { center, radius }
                if center.iter().all(|c| c.is_finite()) && radius.is_finite() && *radius > 0.0 =>
            {
                Ok(())
            }
            _ => Err(Error::invalid(format!("degenerate Green's domain {self:?}"))),
        }
    }

    /// Exterior conformal map onto `|zeta| > 1`, normalized at infinity.
    pub fn exterior_map(&self, z: C64) -> Result<C64> {
        match *self {
            GreensDomain::IntervalComplement { a, b } => {
                let u = (2.0 * z - (a + b)) / (b - a);
                // the product of principal roots picks the branch with |phi| >= 1
                Ok(u + (u - 1.0).sqrt() * (u + 1.0).sqrt())
            }
            GreensDomain::DiscComplement { center, radius } => {
                let c = C64::new(center[0], center[1]);
                let zeta = (z - c) / radius;
                if zeta.norm() < 1.0 - 1e-12 {
                    return Err(Error::invalid(format!("{z} lies inside the excluded disc")));
                }
                Ok(zeta)
            }
        }
    }
}

/// Green's function of the domain with pole at `w`; `None` means the pole
/// at infinity.
pub fn greens_function(dom: &GreensDomain, z: C64, w: Option<C64>) -> Result<f64> {
    dom.validate()?;
    let fz = dom.exterior_map(z)?;
    let Some(w) = w else {
        return Ok(fz.norm().ln());
    };
    let fw = dom.exterior_map(w)?;
    let den = fz - fw;
    if den.norm() == 0.0 {
        return Err(Error::invalid("Green's function evaluated at its pole"));
    }
    Ok(((fz * fw.conj() - 1.0) / den).norm().ln())
}
