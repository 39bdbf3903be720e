use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Condenser, Potential};
use crate::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 10.0;
pub const DEFAULT_PROBE_RADII: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// Outcome of the growth test `V(z) - ln|z| -> +inf` along the condenser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub pass: bool,
    /// True when the condenser is compact and the growth test is vacuous.
    pub skipped: bool,
    pub radii: Vec<f64>,
    /// `min over sampled z with |z| = r of V(z) - ln r`, one per radius.
    pub margins: Vec<f64>,
    pub threshold: f64,
}

/// Points of the condenser at modulus `r`; empty if the set does not reach
/// that far.
pub(crate) fn probe_points(cond: &Condenser, r: f64) -> Vec<C64> {
    match cond {
        Condenser::Intervals { intervals } => [r, -r]
            .into_iter()
            .filter(|x| intervals.iter().any(|iv| iv.contains(*x)))
            .map(|x| C64::new(x, 0.0))
            .collect(),
        Condenser::Plane {} => (0..64)
            .map(|k| C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / 64.0))
            .collect(),
        _ => Vec::new(),
    }
}

pub fn check_admissibility(
    pot: &Potential,
    cond: &Condenser,
    probe_radii: &[f64],
    margin_threshold: f64,
) -> Result<AdmissibilityReport> {
    if probe_radii.is_empty() || probe_radii.iter().any(|r| !(*r >= 1.0 && r.is_finite())) {
        return Err(Error::invalid("probe radii must be finite and at least 1"));
    }
    if probe_radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("probe radii must be strictly increasing"));
    }
    if cond.is_bounded() {
        return Ok(AdmissibilityReport {
            pass: true,
            skipped: true,
            radii: probe_radii.to_vec(),
            margins: Vec::new(),
            threshold: margin_threshold,
        });
    }
    let mut radii = Vec::new();
    let mut margins = Vec::new();
    for &r in probe_radii {
        let pts = probe_points(cond, r);
        if pts.is_empty() {
            continue;
        }
        let m = pts.iter().map(|z| pot.eval(*z) - r.ln()).fold(f64::INFINITY, f64::min);
        radii.push(r);
        margins.push(m);
    }
    if margins.is_empty() {
        return Err(Error::invalid("no probe radius meets the condenser"));
    }
    if margins.len() >= 2 && margins.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::Admissibility(format!(
            "V(z) - ln|z| decreases at every probe radius (margins {margins:?}); V is not admissible"
        )));
    }
    // Only the tail has to increase: a double well dips below zero at
    // moderate radii and is still admissible.
    let tail = margins.len().saturating_sub(3);
    let increasing = margins[tail..].windows(2).all(|w| w[1] > w[0]);
    let last = *margins.last().unwrap();
    Ok(AdmissibilityReport {
        pass: increasing && last > margin_threshold && last.is_finite(),
        skipped: false,
        radii,
        margins,
        threshold: margin_threshold,
    })
}
