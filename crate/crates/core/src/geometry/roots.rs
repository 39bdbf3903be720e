use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::lpopt::MonicPolynomial;
use crate::{Error, Result};

pub const MAX_SWEEPS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<C64>,
    /// Relative Newton correction `|P(r) / P'(r)| / (1 + |r|)` at each root.
    pub residuals: Vec<f64>,
    pub sweeps: usize,
}

impl RootSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Fujiwara's bound on the moduli of the roots of a monic polynomial.
fn fujiwara(c: &[C64]) -> f64 {
    let n = c.len() - 1;
    let mut b: f64 = 0.0;
    for k in 1..=n {
        let coef = c[n - k].norm() / if k == n { 2.0 } else { 1.0 };
        b = b.max(coef.powf(1.0 / k as f64));
    }
    2.0 * b
}

/// Aberth-Ehrlich simultaneous iteration.
pub fn find_roots(poly: &MonicPolynomial, tol: f64) -> Result<RootSet> {
    let n = poly.degree;
    if n == 0 {
        return Err(Error::invalid("root finding needs degree at least 1"));
    }
    let coeffs = poly.monomial_coeffs();
    let mut radius = fujiwara(&coeffs);
    if !radius.is_finite() {
        radius = 1.0 + coeffs[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    if radius == 0.0 {
        return Ok(RootSet {
            roots: vec![C64::new(0.0, 0.0); n],
            residuals: vec![0.0; n],
            sweeps: 0,
        });
    }
    let r0 = 1.2 * radius;
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(r0, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let mut last_step = vec![f64::INFINITY; n];
    let eps = f64::EPSILON;
    // a correction that stops shrinking below this is rounding noise
    let floor = tol.max(eps) * radius;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && done.iter().any(|d| !d) {
        sweeps += 1;
        let prev = z.clone();
        let updates: Vec<(C64, f64, bool)> = (0..n)
            .map(|k| {
                let zk = prev[k];
                if done[k] {
                    return (zk, 0.0, true);
                }
                let (p, dp, _) = poly.eval_with_derivative(zk);
                if p.norm() == 0.0 {
                    return (zk, 0.0, true);
                }
                let ratio = p / dp;
                let s: C64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (zk - prev[j])).sum();
                let w = ratio / (1.0 - ratio * s);
                if !(w.re.is_finite() && w.im.is_finite()) {
                    return (zk, f64::INFINITY, false);
                }
                let next = zk - w;
                let step = w.norm();
                let small = step <= 4.0 * eps * next.norm();
                let stalled = step <= floor && step >= 0.5 * last_step[k];
                (next, step, small || stalled)
            })
            .collect();
        for k in 0..n {
            z[k] = updates[k].0;
            last_step[k] = updates[k].1;
            done[k] = updates[k].2;
        }
    }
    let unconverged: Vec<usize> = (0..n).filter(|&k| !done[k]).collect();
    if !unconverged.is_empty() {
        return Err(Error::RootsNotConverged {
            sweeps,
            indices: unconverged,
        });
    }
    let residuals: Vec<f64> = z
        .iter()
        .map(|r| {
            let (p, dp, _) = poly.eval_with_derivative(*r);
            if p.norm() == 0.0 {
                0.0
            } else {
                (p / dp).norm() / (1.0 + r.norm())
            }
        })
        .collect();
    if let Some(bad) = residuals.iter().position(|r| *r > tol.max(1e-8)) {
        log::warn!("root {bad} has residual {:.3e}", residuals[bad]);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].re.total_cmp(&z[b].re).then(z[a].im.total_cmp(&z[b].im)));
    Ok(RootSet {
        roots: order.iter().map(|&k| z[k]).collect(),
        residuals: order.iter().map(|&k| residuals[k]).collect(),
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let p = MonicPolynomial::from_monomial(&[C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let r = find_roots(&p, 1e-12).unwrap();
        assert!((r.roots[0] + 1.0).norm() < 1e-12);
        assert!((r.roots[1] - 1.0).norm() < 1e-12);
        assert!(r.max_residual() < 1e-8);
    }

    #[test]
    fn pure_power_has_all_roots_at_zero() {
        let mut c = vec![C64::new(0.0, 0.0); 7];
        c[6] = C64::new(1.0, 0.0);
        let p = MonicPolynomial::from_monomial(&c).unwrap();
        let r = find_roots(&p, 1e-12).unwrap();
        assert!(r.roots.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hermite_roots_are_real_and_symmetric() {
        use crate::domain::{build_quadrature, Condenser, Potential, QuadratureOptions};
        let pot = Potential::quadratic(0.5);
        let grid = build_quadrature(&Condenser::real_line(), &pot, 10, 32.0, &QuadratureOptions::default()).unwrap();
        let (p, _) = crate::lpopt::gram_solve_p2(&grid, &pot, 10).unwrap();
        let r = find_roots(&p, 1e-12).unwrap();
        assert_eq!(r.roots.len(), 10);
        for k in 0..10 {
            assert!(r.roots[k].im.abs() < 1e-9);
            assert!((r.roots[k].re + r.roots[9 - k].re).abs() < 1e-9);
        }
        assert!(r.max_residual() < 1e-8);
    }

    #[test]
    fn recovers_synthetic_roots() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let truth: Vec<C64> = (0..8)
                .map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            // expand the product into monomial coefficients
            let mut c = vec![C64::new(1.0, 0.0)];
            for t in &truth {
                let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
                for (k, ck) in c.iter().enumerate() {
                    next[k + 1] += ck;
                    next[k] -= ck * t;
                }
                c = next;
            }
            let p = MonicPolynomial::from_monomial(&c).unwrap();
            let got = find_roots(&p, 1e-12).unwrap().roots;
            let dist = |a: &[C64], b: &[C64]| {
                a.iter()
                    .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max)
            };
            let h = dist(&truth, &got).max(dist(&got, &truth));
            assert!(h < 1e-8, "Hausdorff distance {h}");
        }
    }

    #[test]
    fn degree_zero_rejected() {
        let p = MonicPolynomial::from_monomial(&[C64::new(1.0, 0.0)]).unwrap();
        assert!(find_roots(&p, 1e-12).is_err());
    }
}
