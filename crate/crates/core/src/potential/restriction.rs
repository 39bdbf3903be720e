use serde::{Deserialize, Serialize};

use crate::domain::{Potential, QuadratureScheme};
use crate::geometry::SupportGeometry;
use crate::lpopt::{log_weighted_values, MonicPolynomial, PNorm};
use crate::{Error, Result};

/// Below this `ratio - 1` is indistinguishable from rounding.
pub const NOISE_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Fewer than two ratios exceed the noise floor.
    BelowNoiseFloor,
}

/// Ratios `||P_n w^n||_p^p / ||P_n w^n chi_N||_p^p` and the fit
/// `ratio - 1 ~ C exp(-c n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionFit {
    pub fattening: f64,
    pub p: PNorm,
    pub ns: Vec<usize>,
    pub ratios: Vec<f64>,
    pub c: Option<f64>,
    pub big_c: Option<f64>,
    pub status: FitStatus,
    /// Largest deviation of `ln(ratio - 1)` from the fitted line.
    pub fit_residual: Option<f64>,
}

impl RestrictionFit {
    pub fn ratios_ok(&self) -> bool {
        self.ratios.iter().all(|r| *r >= 1.0)
    }

    pub fn decaying(&self) -> bool {
        match self.status {
            FitStatus::BelowNoiseFloor => true,
            FitStatus::Fitted => self.c.is_some_and(|c| c > 0.0),
        }
    }

    pub fn monotone(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
    }
}

/// `ratio - 1` for one polynomial, computed from log values so that
/// `w^n` underflow does not matter. Returns `(ratio, ratio - 1)`.
pub fn restriction_excess(
    poly: &MonicPolynomial,
    n: usize,
    grid: &QuadratureScheme,
    pot: &Potential,
    p: PNorm,
    inside: &[bool],
) -> Result<(f64, f64)> {
    let lv = log_weighted_values(poly, grid, pot, n);
    let scaled: Vec<f64> = match p {
        PNorm::Finite(p) => lv.iter().zip(&grid.weights).map(|(l, w)| p * l + w.ln()).collect(),
        PNorm::Inf => lv,
    };
    let top = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::invalid("weighted polynomial vanishes on the grid"));
    }
    let (mut s_in, mut s_out) = (0.0, 0.0);
    let (mut m_in, mut m_out) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (v, &ins) in scaled.iter().zip(inside) {
        let e = (v - top).exp();
        if ins {
            s_in += e;
            m_in = m_in.max(*v);
        } else {
            s_out += e;
            m_out = m_out.max(*v);
        }
    }
    if s_in == 0.0 {
        return Err(Error::invalid("fattening neighbourhood contains no grid mass"));
    }
    Ok(match p {
        PNorm::Finite(_) => (1.0 + s_out / s_in, s_out / s_in),
        PNorm::Inf => {
            let ex = (m_out - m_in).exp().max(1.0) - 1.0;
            (1.0 + ex, ex)
        }
    })
}

pub fn restriction_ratio(
    polys: &[(usize, MonicPolynomial)],
    grid: &QuadratureScheme,
    pot: &Potential,
    p: PNorm,
    geo: &SupportGeometry,
    fattening: f64,
) -> Result<RestrictionFit> {
    if !(fattening > 0.0) {
        return Err(Error::invalid(format!("fattening must be positive, got {fattening}")));
    }
    let inside: Vec<bool> = grid.nodes.iter().map(|z| geo.dist_to_pchull(*z) <= fattening).collect();
    let mut ns = Vec::new();
    let mut vals = Vec::new();
    for (n, poly) in polys {
        ns.push(*n);
        vals.push(restriction_excess(poly, *n, grid, pot, p, &inside)?);
    }
    Ok(fit_restriction(fattening, p, ns, vals))
}

/// Fits `ln(ratio - 1) = ln C - c n` over the points above the noise floor.
/// `vals` holds `(ratio, ratio - 1)` per degree.
pub fn fit_restriction(fattening: f64, p: PNorm, ns: Vec<usize>, vals: Vec<(f64, f64)>) -> RestrictionFit {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(&vals)
        .filter(|(_, v)| v.1 > NOISE_FLOOR)
        .map(|(n, v)| (*n as f64, v.1.ln()))
        .collect();
    let mut fit = RestrictionFit {
        fattening,
        p,
        ns,
        ratios: vals.iter().map(|v| v.0).collect(),
        c: None,
        big_c: None,
        status: FitStatus::BelowNoiseFloor,
        fit_residual: None,
    };
    if pts.len() >= 2 {
        let (slope, icept) = line_fit(&pts);
        fit.c = Some(-slope);
        fit.big_c = Some(icept.exp());
        fit.status = FitStatus::Fitted;
        fit.fit_residual = Some(pts.iter().map(|(x, y)| (y - icept - slope * x).abs()).fold(0.0, f64::max));
    }
    fit
}

/// Least-squares line `y = a x + b`, returned as `(a, b)`.
pub fn line_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (a, my - a * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let (a, b) = line_fit(&pts);
        assert!((a + 0.5).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
    }
}
