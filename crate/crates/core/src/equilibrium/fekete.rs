use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{Potential, QuadratureScheme};
use crate::{Error, Result};

/// Locally optimal weighted Fekete configuration on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeketeSet {
    pub points: Vec<C64>,
    pub indices: Vec<usize>,
    /// `sum_{i<j} ln|x_i - x_j| + n sum_i ln w(x_i)`.
    pub objective: f64,
    /// Objective after each full sweep.
    pub trace: Vec<f64>,
}

fn objective(pts: &[C64], lw: &[f64], idx: &[usize], n: f64) -> f64 {
    let mut s = 0.0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            s += (pts[idx[a]] - pts[idx[b]]).norm().ln();
        }
        s += n * lw[idx[a]];
    }
    s
}

/// Cyclic coordinate ascent over grid nodes, started from the `n` nodes of
/// largest weight.
pub fn fekete_points(n: usize, grid: &QuadratureScheme, pot: &Potential) -> Result<FeketeSet> {
    if n < 2 {
        return Err(Error::invalid("Fekete sets need at least two points"));
    }
    let m = grid.len();
    if n > m {
        return Err(Error::invalid(format!("{n} Fekete points requested on a grid of {m} nodes")));
    }
    if m < 4 * n {
        return Err(Error::invalid(format!("grid needs at least {} nodes for {n} points", 4 * n)));
    }
    let z = &grid.nodes;
    let lw: Vec<f64> = z.iter().map(|p| -pot.eval(*p)).collect();
    let nf = n as f64;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| lw[b].total_cmp(&lw[a]).then(a.cmp(&b)));
    let mut idx: Vec<usize> = order[..n].to_vec();
    let mut used = vec![false; m];
    idx.iter().for_each(|&i| used[i] = true);
    let mut current = objective(z, &lw, &idx, nf);
    let mut trace = vec![current];
    for _sweep in 0..10_000 {
        let mut moved = false;
        for a in 0..n {
            let score = |k: usize| -> f64 {
                let mut s = nf * lw[k];
                for (b, &j) in idx.iter().enumerate() {
                    if b != a {
                        s += (z[k] - z[j]).norm().ln();
                    }
                }
                s
            };
            let here = score(idx[a]);
            let mut best = (here, idx[a]);
            for k in 0..m {
                if used[k] {
                    continue;
                }
                let s = score(k);
                if s > best.0 + 1e-13 * (1.0 + s.abs()) {
                    best = (s, k);
                }
            }
            if best.1 != idx[a] {
                used[idx[a]] = false;
                used[best.1] = true;
                idx[a] = best.1;
                moved = true;
            }
        }
        let obj = objective(z, &lw, &idx, nf);
        debug_assert!(obj >= current - 1e-9 * (1.0 + current.abs()));
        current = obj;
        trace.push(obj);
        if !moved {
            break;
        }
    }
    let mut sorted = idx.clone();
    sorted.sort_by(|&a, &b| z[a].re.total_cmp(&z[b].re).then(z[a].im.total_cmp(&z[b].im)));
    Ok(FeketeSet {
        points: sorted.iter().map(|&i| z[i]).collect(),
        indices: sorted,
        objective: current,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_quadrature, Condenser, QuadratureOptions};

    fn unit_interval_grid() -> QuadratureScheme {
        build_quadrature(&Condenser::interval(-1.0, 1.0), &Potential::zero(), 0, 32.0, &QuadratureOptions::default()).unwrap()
    }

    #[test]
    fn two_and_three_points_on_the_interval() {
        let g = unit_interval_grid();
        let f2 = fekete_points(2, &g, &Potential::zero()).unwrap();
        assert!((f2.points[0].re + 1.0).abs() < 1e-14 && (f2.points[1].re - 1.0).abs() < 1e-14);
        let f3 = fekete_points(3, &g, &Potential::zero()).unwrap();
        // Brute force over all grid triples.
        let xs: Vec<f64> = g.nodes.iter().map(|z| z.re).collect();
        let mut best = (f64::NEG_INFINITY, [0.0; 3]);
        for a in 0..xs.len() {
            for b in a + 1..xs.len() {
                for c in b + 1..xs.len() {
                    let v = ((xs[a] - xs[b]) * (xs[a] - xs[c]) * (xs[b] - xs[c])).abs().ln();
                    if v > best.0 {
                        best = (v, [xs[a], xs[b], xs[c]]);
                    }
                }
            }
        }
        for (p, e) in f3.points.iter().zip(best.1) {
            assert!((p.re - e).abs() < 1e-12);
        }
        assert!(f3.points[1].re.abs() < 1e-14);
        assert!((f3.objective - best.0).abs() < 1e-12);
        assert!(f3.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn weighted_points_stay_near_the_support() {
        let pot = Potential::quadratic(0.5);
        let g = build_quadrature(&Condenser::real_line(), &pot, 5, 16.0, &QuadratureOptions::default()).unwrap();
        let f = fekete_points(5, &g, &pot).unwrap();
        assert!(f.points.iter().all(|p| p.re.abs() <= 1.5));
        let distinct = f.indices.windows(2).all(|w| w[0] != w[1]);
        assert!(distinct);
    }

    #[test]
    fn refuses_oversized_requests() {
        let g = unit_interval_grid();
        assert!(fekete_points(g.len() + 1, &g, &Potential::zero()).is_err());
        assert!(fekete_points(1, &g, &Potential::zero()).is_err());
    }
}
