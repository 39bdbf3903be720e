use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finite atomic measure: `sum m_i delta_{z_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<C64>,
    pub masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<C64>, masses: Vec<f64>) -> Result<Self> {
        if atoms.len() != masses.len() {
            return Err(Error::invalid(format!(
                "{} atoms but {} masses",
                atoms.len(),
                masses.len()
            )));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("masses must be finite and nonnegative"));
        }
        if atoms.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("atoms must be finite"));
        }
        Ok(DiscreteMeasure { atoms, masses })
    }

    /// Mass `1/n` at each point; repeated points stay separate atoms.
    pub fn counting(points: &[C64]) -> Self {
        let n = points.len().max(1) as f64;
        DiscreteMeasure {
            atoms: points.to_vec(),
            masses: vec![1.0 / n; points.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    /// Moments `sum m_i z_i^j` for `j = 0..=j_max`.
    pub fn moments(&self, j_max: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); j_max + 1];
        for (z, m) in self.atoms.iter().zip(&self.masses) {
            let mut zp = C64::new(1.0, 0.0);
            for o in out.iter_mut() {
                *o += zp * m;
                zp *= z;
            }
        }
        out
    }

    /// `sum m_i ln(1/|z - z_i|)`. Atoms at exactly `z` contribute `+inf`
    /// when they carry mass.
    pub fn log_potential(&self, z: C64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.masses)
            .filter(|(_, m)| **m > 0.0)
            .map(|(a, m)| -m * (z - a).norm().ln())
            .sum()
    }
}
