//! Discrete weighted energy minimisation.
//!
//! The energy of a node-mass vector `m` is
//! `I(m) = sum_{i != j} m_i m_j ln(1/|z_i - z_j|) + sum_i m_i^2 s_i + 2 sum_i m_i V(z_i)`,
//! where `s_i` is the self-energy of a unit mass spread uniformly over the
//! cell of node `i`. Its gradient is `2 g` with `g = K m + V`.

mod fekete;
mod solver;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};


pub use fekete::{fekete_points, FeketeSet};
pub use solver::{solve_equilibrium, EquilibriumOptions};

use crate::domain::quadrature::gauss_legendre;
use crate::domain::{DiscreteMeasure, Potential};
use crate::{Error, Result};

/// Self-energy `(1/h^2) int int ln(1/|x - y|) dx dy` of a segment of length `h`.
pub fn segment_self_energy(h: f64) -> f64 {
    let (x, w) = gauss_legendre(64);
    let xlnx = |t: f64| if t > 0.0 { t * t.ln() } else { 0.0 };
    let inner: f64 = x
        .iter()
        .zip(&w)
        .map(|(t, wt)| {
            let s = 0.5 * h * (t + 1.0);
            wt * 0.5 * h * (xlnx(s) + xlnx(h - s) - h)
        })
        .sum();
    -inner / (h * h)
}

/// Self-energy of the uniform probability measure on a disc of radius `rho`.
pub fn disc_self_energy(rho: f64) -> f64 {
    let (x, w) = gauss_legendre(64);
    let u = |r: f64| -rho.ln() + 0.5 * (1.0 - r * r / (rho * rho));
    let integral: f64 = x
        .iter()
        .zip(&w)
        .map(|(t, wt)| {
            let r = 0.5 * rho * (t + 1.0);
            wt * 0.5 * rho * u(r) * r
        })
        .sum();
    2.0 * integral / (rho * rho)
}

/// Self-energy of a cell of the given length (dim 1) or area (dim 2); 2-D
/// cells are replaced by the disc of equal area.
pub fn cell_self_energy(cell: f64, dim: usize) -> f64 {
    if dim == 1 {
        segment_self_energy(cell)
    } else {
        disc_self_energy((cell / std::f64::consts::PI).sqrt())
    }
}

/// Weighted energy of `m`, with optional per-atom self-energy terms.
pub fn discrete_energy(m: &DiscreteMeasure, pot: &Potential, self_terms: Option<&[f64]>) -> Result<f64> {
    if let Some(s) = self_terms {
        if s.len() != m.len() {
            return Err(Error::invalid("one self-energy term per atom is required"));
        }
    }
    let active: Vec<usize> = (0..m.len()).filter(|&i| m.masses[i] > 0.0).collect();
    let mut e = 0.0;
    for (a, &i) in active.iter().enumerate() {
        for &j in &active[a + 1..] {
            let d = (m.atoms[i] - m.atoms[j]).norm();
            if d == 0.0 {
                return Err(Error::CoincidentAtoms(i, j));
            }
            e -= 2.0 * m.masses[i] * m.masses[j] * d.ln();
        }
        let mi = m.masses[i];
        if let Some(s) = self_terms {
            e += mi * mi * s[i];
        }
        e += 2.0 * mi * pot.eval(m.atoms[i]);
    }
    Ok(e)
}

/// Solved equilibrium problem on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub measure: DiscreteMeasure,
    /// Modified Robin constant: the value of `U + V` on the support.
    pub robin_constant: f64,
    pub support: Vec<usize>,
    pub energy: f64,
    /// `g_i = U^m(z_i) + V(z_i)` at every node.
    pub gradient: Vec<f64>,
    pub cells: Vec<f64>,
    pub self_terms: Vec<f64>,
    pub dim: usize,
    pub potential: Potential,
    pub converged: bool,
    /// Final duality gap `g . m - min g`.
    pub gap: f64,
    pub iterations: usize,
    pub kkt_tol: f64,
    /// Energies of the successive iterates.
    #[serde(skip)]
    pub energy_trace: Vec<f64>,
}

impl EquilibriumResult {
    pub fn support_points(&self) -> Vec<C64> {
        self.support.iter().map(|&i| self.measure.atoms[i]).collect()
    }

    /// Largest violation of the equilibrium conditions:
    /// `|g - F|` on the support and `F - g` everywhere.
    pub fn kkt_residual(&self) -> f64 {
        let f = self.robin_constant;
        let on = self
            .support
            .iter()
            .map(|&i| (self.gradient[i] - f).abs())
            .fold(0.0, f64::max);
        let off = self.gradient.iter().map(|g| f - g).fold(0.0, f64::max);
        on.max(off)
    }

    pub fn kkt_satisfied(&self) -> bool {
        self.kkt_residual() <= self.kkt_tol
    }

    /// Density `m_i / cell_i` at every node.
    pub fn density(&self) -> Vec<f64> {
        self.measure.masses.iter().zip(&self.cells).map(|(m, c)| m / c).collect()
    }

    /// Real extent of the support as `(min Re, max Re)`.
    pub fn support_extent(&self) -> (f64, f64) {
        self.support
            .iter()
            .map(|&i| self.measure.atoms[i].re)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
    }

    /// Largest modulus among support nodes.
    pub fn support_radius(&self) -> f64 {
        self.support.iter().map(|&i| self.measure.atoms[i].norm()).fold(0.0, f64::max)
    }
}

/// Effective potential `U^mu(z) + V(z) - F_w`. At an atom the cell self
/// term replaces the singular logarithm.
pub fn effective_potential(eq: &EquilibriumResult, z: C64) -> f64 {
    let m = &eq.measure;
    let mut u = 0.0;
    for i in 0..m.len() {
        let mi = m.masses[i];
        if mi == 0.0 {
            continue;
        }
        let d = (z - m.atoms[i]).norm();
        u += if d == 0.0 { mi * eq.self_terms[i] } else { -mi * d.ln() };
    }
    u + eq.potential.eval(z) - eq.robin_constant
}
