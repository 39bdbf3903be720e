use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::Interval;
use crate::lpopt::MonicPolynomial;
use crate::{Error, Result};

/// Number of poles used in the gap geometry.
pub const GAP_M: usize = 2;

/// Rational function `r(z) = prod (z - zeros_j) / prod (z - poles_j)` with
/// `sup_S |r| <= alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidomCertificate {
    pub s: [Interval; 2],
    /// `K` as a real interval; a point has equal ends.
    pub k: (f64, f64),
    pub m: usize,
    pub poles: Vec<C64>,
    pub zeros: Vec<C64>,
    pub alpha: f64,
    pub resolution: usize,
}

impl WidomCertificate {
    pub fn r(&self, z: C64) -> C64 {
        let num: C64 = self.zeros.iter().map(|a| z - a).product();
        let den: C64 = self.poles.iter().map(|a| z - a).product();
        num / den
    }

    /// Sample points of `S` on which `alpha` was measured.
    pub fn s_grid(&self) -> Vec<f64> {
        s_grid(&self.s, self.resolution)
    }
}

fn s_grid(s: &[Interval; 2], res: usize) -> Vec<f64> {
    let per = res.max(16);
    s.iter()
        .flat_map(|iv| (0..=per).map(move |i| iv.0 + (iv.1 - iv.0) * i as f64 / per as f64))
        .collect()
}

/// `sup |(x^2 - s x + q) / ((x - p1)(x - p2))|` over the samples.
fn sup_abs(xs: &[f64], inv_den: &[f64], s: f64, q: f64) -> f64 {
    xs.iter()
        .zip(inv_den)
        .map(|(x, d)| ((x * x - s * x + q) * d).abs())
        .fold(0.0, f64::max)
}

/// Best `(s, q, alpha)` for fixed real poles. The objective is a max of
/// absolute values of affine functions of `(s, q)`, hence convex, so a
/// coarse grid followed by pattern search finds the minimum.
fn best_zeros(xs: &[f64], poles: (f64, f64), res: usize, scale: f64) -> (f64, f64, f64) {
    let inv_den: Vec<f64> = xs.iter().map(|x| 1.0 / ((x - poles.0) * (x - poles.1))).collect();
    let smax = 2.0 * scale;
    let qmax = 2.0 * scale * scale;
    let steps = res.max(8);
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..=steps {
        let s = -smax + 2.0 * smax * i as f64 / steps as f64;
        for j in 0..=steps {
            let q = -qmax + 2.0 * qmax * j as f64 / steps as f64;
            let a = sup_abs(xs, &inv_den, s, q);
            if a < best.2 {
                best = (s, q, a);
            }
        }
    }
    let (mut hs, mut hq) = (2.0 * smax / steps as f64, 2.0 * qmax / steps as f64);
    while hs > 1e-12 * scale {
        let mut moved = false;
        for (ds, dq) in [(hs, 0.0), (-hs, 0.0), (0.0, hq), (0.0, -hq), (hs, hq), (-hs, -hq), (hs, -hq), (-hs, hq)] {
            let a = sup_abs(xs, &inv_den, best.0 + ds, best.1 + dq);
            if a < best.2 {
                best = (best.0 + ds, best.1 + dq, a);
                moved = true;
                break;
            }
        }
        if !moved {
            hs *= 0.5;
            hq *= 0.5;
        }
    }
    best
}

fn quadratic_roots(s: f64, q: f64) -> Vec<C64> {
    let disc = C64::new(s * s / 4.0 - q, 0.0).sqrt();
    vec![C64::new(s / 2.0, 0.0) - disc, C64::new(s / 2.0, 0.0) + disc]
}

/// Two-pole rational certificate for a real gap. Poles range over a grid of
/// `K`; the reported certificate is the worst case over pole placements of
/// the best zero placement.
pub fn widom_search(s: [Interval; 2], k: (f64, f64), grid_resolution: usize) -> Result<WidomCertificate> {
    let mut s = s;
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    for iv in &s {
        if !(iv.0.is_finite() && iv.1.is_finite() && iv.0 < iv.1) {
            return Err(Error::invalid(format!("S component {iv:?} is not a bounded interval")));
        }
    }
    let (g0, g1) = (s[0].1, s[1].0);
    if !(k.0 <= k.1 && k.0 > g0 && k.1 < g1) {
        return Err(Error::invalid(format!("K = {k:?} is not strictly inside the gap ({g0}, {g1})")));
    }
    let xs = s_grid(&s, grid_resolution);
    let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    let kpts: Vec<f64> = if k.0 == k.1 {
        vec![k.0]
    } else {
        (0..=8).map(|i| k.0 + (k.1 - k.0) * i as f64 / 8.0).collect()
    };
    let mut worst: Option<(f64, f64, (f64, f64, f64))> = None;
    for (i, &p1) in kpts.iter().enumerate() {
        for &p2 in &kpts[i..] {
            let b = best_zeros(&xs, (p1, p2), grid_resolution, scale);
            if worst.map_or(true, |w| b.2 > w.2 .2) {
                worst = Some((p1, p2, b));
            }
        }
    }
    let (p1, p2, (sv, qv, alpha)) = worst.expect("K has at least one point");
    if !(alpha < 1.0) {
        return Err(Error::WidomSearch {
            alpha,
            resolution: grid_resolution,
        });
    }
    Ok(WidomCertificate {
        s,
        k,
        m: GAP_M,
        poles: vec![C64::new(p1, 0.0), C64::new(p2, 0.0)],
        zeros: quadratic_roots(sv, qv),
        alpha,
        resolution: grid_resolution,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransplantCheck {
    pub sup_before: f64,
    pub sup_after: f64,
    pub ratio: f64,
    /// Largest pointwise `|P r| / |P|` on the grid.
    pub pointwise: f64,
    pub alpha: f64,
}

impl TransplantCheck {
    pub fn holds(&self) -> bool {
        self.ratio <= self.alpha * (1.0 + 1e-12) && self.pointwise <= self.alpha * (1.0 + 1e-12) && self.ratio < 1.0
    }
}

/// Replaces the roots of `poly` at the certificate's poles by its zeros and
/// compares sup norms over the `S` grid.
pub fn transplant_check(cert: &WidomCertificate, poly: &MonicPolynomial) -> Result<TransplantCheck> {
    for pole in &cert.poles {
        let (p, _, scale) = poly.eval_with_derivative(*pole);
        if p.norm() > 1e-10 * scale.max(1.0) {
            return Err(Error::invalid(format!("polynomial does not vanish at the pole {pole}")));
        }
    }
    let mut before: f64 = 0.0;
    let mut after: f64 = 0.0;
    let mut pointwise: f64 = 0.0;
    for x in cert.s_grid() {
        let z = C64::new(x, 0.0);
        let p = poly.eval(z).norm();
        let r = cert.r(z).norm();
        before = before.max(p);
        after = after.max(p * r);
        if p > 0.0 {
            pointwise = pointwise.max(r);
        }
    }
    Ok(TransplantCheck {
        sup_before: before,
        sup_after: after,
        ratio: after / before,
        pointwise,
        alpha: cert.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gap() -> [Interval; 2] {
        [Interval(-2.0, -1.0), Interval(1.0, 2.0)]
    }

    #[test]
    fn symmetric_gap_matches_hand_optimum() {
        // with both poles at 0, r = 1 - s/x + q/x^2 and s = 0, q = -8/5
        // equioscillates on 1/x^2 in [1/4, 1] with alpha = 3/5
        let c = widom_search(gap(), (0.0, 0.0), 64).unwrap();
        assert!((c.alpha - 0.6).abs() < 1e-6, "{}", c.alpha);
        let z = c.zeros[1].re;
        assert!((z - 1.6f64.sqrt()).abs() < 1e-4);
        assert!((c.zeros[0].re + c.zeros[1].re).abs() < 1e-4);
        assert!(c.zeros.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn alpha_grows_toward_s() {
        let a: Vec<f64> = [0.0, 0.2, 0.5]
            .iter()
            .map(|&k| widom_search(gap(), (k, k), 48).unwrap().alpha)
            .collect();
        assert!(a[0] < a[1] && a[1] < a[2] && a[2] < 1.0, "{a:?}");
    }

    #[test]
    fn interval_k_is_worst_case() {
        let point = widom_search(gap(), (0.0, 0.0), 32).unwrap().alpha;
        let wide = widom_search(gap(), (-0.2, 0.2), 32).unwrap();
        assert!(wide.alpha >= point - 1e-9 && wide.alpha < 1.0);
    }

    #[test]
    fn bad_k_rejected() {
        assert!(widom_search(gap(), (1.5, 1.5), 32).is_err());
    }

    #[test]
    fn transplant_reduces_sup() {
        let c = widom_search(gap(), (0.0, 0.0), 64).unwrap();
        let mut roots = vec![C64::new(0.0, 0.0); 2];
        roots.extend([-1.9, -1.6, -1.3, -1.05, 1.1, 1.4, 1.7, 1.95].map(|x| C64::new(x, 0.0)));
        let p = MonicPolynomial::from_roots(roots);
        let t = transplant_check(&c, &p).unwrap();
        assert!(t.holds(), "{t:?}");
    }
}
