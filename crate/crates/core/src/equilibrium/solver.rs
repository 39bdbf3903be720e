use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cell_self_energy, EquilibriumResult};
use crate::domain::{DiscreteMeasure, Potential, QuadratureScheme};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOptions {
    /// Target duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Frank-Wolfe iterations before switching to the active-set face solve.
    /// `None` runs Frank-Wolfe alone.
    pub polish_after: Option<usize>,
    /// Discretisation allowance added to `10 tol` in the KKT tolerance.
    pub kkt_allowance: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            tol: 1e-7,
            max_iter: 20000,
            polish_after: Some(400),
            kkt_allowance: 5e-2,
        }
    }
}

const PAR_THRESHOLD: usize = 4096;

struct Kernel<'a> {
    z: &'a [num_complex::Complex64],
    s: Vec<f64>,
}

impl Kernel<'_> {
    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.s[i]
        } else {
            -(self.z[i] - self.z[j]).norm().ln()
        }
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        if out.len() >= PAR_THRESHOLD {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = self.entry(i, j));
        } else {
            out.iter_mut().enumerate().for_each(|(i, o)| *o = self.entry(i, j));
        }
    }

    /// `K m` over all nodes using only the listed columns.
    fn apply(&self, cols: &[usize], m: &[f64]) -> Vec<f64> {
        let n = self.z.len();
        let f = |i: usize| cols.iter().map(|&j| self.entry(i, j) * m[j]).sum::<f64>();
        if n * cols.len() >= PAR_THRESHOLD * 16 {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        }
    }
}

fn check_distinct(grid: &QuadratureScheme) -> Result<()> {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|&a, &b| {
        let (za, zb) = (grid.nodes[a], grid.nodes[b]);
        za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
    });
    for w in idx.windows(2) {
        if grid.nodes[w[0]] == grid.nodes[w[1]] {
            return Err(Error::CoincidentAtoms(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

struct State {
    x: Vec<f64>,
    u: Vec<f64>,
    q: f64,
    vx: f64,
}

impl State {
    fn energy(&self) -> f64 {
        self.q + 2.0 * self.vx
    }
}

/// Minimises the discrete weighted energy over probability vectors on the
/// grid nodes.
pub fn solve_equilibrium(grid: &QuadratureScheme, pot: &Potential, opts: &EquilibriumOptions) -> Result<EquilibriumResult> {
    let m = grid.len();
    if m < 50 {
        return Err(Error::invalid(format!("equilibrium grid needs at least 50 nodes, got {m}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    check_distinct(grid)?;
    let s: Vec<f64> = grid.cells.iter().map(|&c| cell_self_energy(c, grid.dim)).collect();
    let kern = Kernel { z: &grid.nodes, s };
    let v: Vec<f64> = grid.nodes.iter().map(|z| pot.eval(*z)).collect();

    let start = argmin(&v);
    let mut st = State {
        x: vec![0.0; m],
        u: vec![0.0; m],
        q: kern.s[start],
        vx: v[start],
    };
    st.x[start] = 1.0;
    kern.column(start, &mut st.u);
    let mut active = vec![start];
    let mut trace = vec![st.energy()];
    let mut col = vec![0.0; m];
    let mut g = vec![0.0; m];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let fw_budget = opts.polish_after.map_or(opts.max_iter, |p| p.min(opts.max_iter));

    while iterations < fw_budget {
        for i in 0..m {
            g[i] = st.u[i] + v[i];
        }
        let gx: f64 = active.iter().map(|&i| g[i] * st.x[i]).sum();
        let sidx = argmin(&g);
        gap = gx - g[sidx];
        if gap < opts.tol {
            break;
        }
        let aidx = *active
            .iter()
            .max_by(|&&a, &&b| g[a].total_cmp(&g[b]).then(b.cmp(&a)))
            .unwrap();
        let away_gain = g[aidx] - gx;
        iterations += 1;
        if gap >= away_gain || active.len() == 1 {
            kern.column(sidx, &mut col);
            let dkd = kern.s[sidx] - 2.0 * st.u[sidx] + st.q;
            let slope = g[sidx] - gx;
            let gamma = step(slope, dkd, 1.0);
            for i in 0..m {
                st.u[i] = (1.0 - gamma) * st.u[i] + gamma * col[i];
            }
            for &i in &active {
                st.x[i] *= 1.0 - gamma;
            }
            if st.x[sidx] == 0.0 && gamma > 0.0 {
                active.push(sidx);
            }
            st.x[sidx] += gamma;
            st.vx = (1.0 - gamma) * st.vx + gamma * v[sidx];
            st.q = (1.0 - gamma) * (1.0 - gamma) * st.q + 2.0 * gamma * (1.0 - gamma) * st.u_prev_dot(sidx, gamma, &col) + gamma * gamma * kern.s[sidx];
            if gamma == 1.0 {
                st.x.iter_mut().for_each(|x| *x = 0.0);
                st.x[sidx] = 1.0;
                active = vec![sidx];
            }
        } else {
            kern.column(aidx, &mut col);
            let xa = st.x[aidx];
            let gmax = xa / (1.0 - xa);
            let dkd = st.q - 2.0 * st.u[aidx] + kern.s[aidx];
            let slope = gx - g[aidx];
            let gamma = step(slope, dkd, gmax);
            for i in 0..m {
                st.u[i] = (1.0 + gamma) * st.u[i] - gamma * col[i];
            }
            for &i in &active {
                st.x[i] *= 1.0 + gamma;
            }
            st.x[aidx] -= gamma;
            st.vx = (1.0 + gamma) * st.vx - gamma * v[aidx];
            if gamma >= gmax {
                st.x[aidx] = 0.0;
                active.retain(|&i| i != aidx);
            }
        }
        // Exact recomputation of x.u keeps the quadratic term drift-free.
        st.q = active.iter().map(|&i| st.x[i] * st.u[i]).sum();
        trace.push(st.energy());
    }
    for i in 0..m {
        g[i] = st.u[i] + v[i];
    }

    let mut converged = gap < opts.tol;
    if opts.polish_after.is_some() && !converged {
        let (x, it) = polish(&kern, &v, &st.x, opts.tol, &mut trace)?;
        iterations += it;
        st.x = x;
        let cols: Vec<usize> = (0..m).filter(|&i| st.x[i] > 0.0).collect();
        st.u = kern.apply(&cols, &st.x);
        for i in 0..m {
            g[i] = st.u[i] + v[i];
        }
        let gx: f64 = cols.iter().map(|&i| g[i] * st.x[i]).sum();
        gap = gx - g[argmin(&g)];
        converged = gap < opts.tol;
    }
    debug!("equilibrium: {iterations} iterations, gap {gap:.3e}, converged {converged}");

    let total: f64 = st.x.iter().sum();
    st.x.iter_mut().for_each(|x| *x /= total);
    let support = support_indices(grid, &st.x);
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let wsum: f64 = support.iter().map(|&i| st.x[i]).sum();
    let robin = support.iter().map(|&i| st.x[i] * g[i]).sum::<f64>() / wsum;
    let measure = DiscreteMeasure::new(grid.nodes.clone(), st.x.clone())?;
    let energy = st.x.iter().zip(&g).zip(&v).map(|((x, g), v)| x * (g + v)).sum();
    Ok(EquilibriumResult {
        measure,
        robin_constant: robin,
        support,
        energy,
        gradient: g,
        cells: grid.cells.clone(),
        self_terms: kern.s.clone(),
        dim: grid.dim,
        potential: pot.clone(),
        converged,
        gap,
        iterations,
        kkt_tol: 10.0 * opts.tol + opts.kkt_allowance,
        energy_trace: trace,
    })
}

impl State {
    /// `x_old . K e_s` expressed through the updated `u`:
    /// `u_new = (1-g) u_old + g col`, hence `u_old[s] = (u_new[s] - g col[s]) / (1-g)`.
    fn u_prev_dot(&self, s: usize, gamma: f64, col: &[f64]) -> f64 {
        if gamma >= 1.0 {
            0.0
        } else {
            (self.u[s] - gamma * col[s]) / (1.0 - gamma)
        }
    }
}

fn step(slope: f64, curvature: f64, gmax: f64) -> f64 {
    if slope >= 0.0 {
        return 0.0;
    }
    if curvature <= 0.0 {
        return gmax;
    }
    (-slope / curvature).min(gmax)
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}

/// Nodes whose density exceeds a quarter of the uniform density over the
/// bounding box of the positive-mass nodes.
fn support_indices(grid: &QuadratureScheme, x: &[f64]) -> Vec<usize> {
    let pos: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    if pos.is_empty() {
        return pos;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &i in &pos {
        let z = grid.nodes[i];
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let inside = |z: num_complex::Complex64| z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1;
    let measure: f64 = (0..grid.len()).filter(|&i| inside(grid.nodes[i])).map(|i| grid.cells[i]).sum();
    let level = 0.25 / measure;
    (0..x.len()).filter(|&i| x[i] / grid.cells[i] > level).collect()
}

/// Block principal pivoting on the optimality conditions of the quadratic
/// program: on the free set `F` solve `K_FF x = F_w 1 - V_F`, `sum x = 1`;
/// then swap every free node with negative mass and every bound node with
/// `g < F_w` at once, falling back to single swaps when the infeasibility
/// count stops decreasing. Starts from the Frank-Wolfe support.
fn polish(kern: &Kernel, v: &[f64], x0: &[f64], tol: f64, trace: &mut Vec<f64>) -> Result<(Vec<f64>, usize)> {
    let m = x0.len();
    let mut free: Vec<bool> = x0.iter().map(|&x| x > 0.0).collect();
    let mut x = x0.to_vec();
    let mut best_count = usize::MAX;
    let mut strikes = 0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for step in 1..=200 {
        let set: Vec<usize> = (0..m).filter(|&i| free[i]).collect();
        if set.is_empty() {
            return Err(Error::EmptySupport);
        }
        let k = set.len();
        let kss = DMatrix::from_fn(k, k, |a, b| kern.entry(set[a], set[b]));
        let vs = DVector::from_iterator(k, set.iter().map(|&i| v[i]));
        let start = DVector::from_iterator(k, set.iter().map(|&i| x[i].max(1e-3 / k as f64)));
        let xs = face_optimum(&kss, &vs, &start);
        let mut xf = vec![0.0; m];
        for (a, &i) in set.iter().enumerate() {
            xf[i] = xs[a];
        }
        let u = kern.apply(&set, &xf);
        let g: Vec<f64> = (0..m).map(|i| u[i] + v[i]).collect();
        let lambda = set.iter().map(|&i| g[i]).sum::<f64>() / k as f64;
        let infeasible: Vec<(usize, f64)> = (0..m)
            .filter_map(|i| {
                if free[i] && xf[i] < 0.0 {
                    Some((i, -xf[i]))
                } else if !free[i] && g[i] < lambda - 0.5 * tol {
                    Some((i, lambda - g[i]))
                } else {
                    None
                }
            })
            .collect();
        log::trace!("pivot step {step}: free {k}, infeasible {}", infeasible.len());
        if infeasible.is_empty() {
            let energy: f64 = (0..m).map(|i| xf[i] * (g[i] + v[i])).sum();
            if energy <= *trace.last().unwrap() + 1e-12 * energy.abs().max(1.0) {
                trace.push(energy);
                return Ok((xf, step));
            }
            break;
        }
        if xf.iter().all(|&e| e >= 0.0) {
            let energy: f64 = (0..m).map(|i| xf[i] * (g[i] + v[i])).sum();
            if best.as_ref().map_or(true, |b| energy < b.0) {
                best = Some((energy, xf.clone()));
            }
        }
        if infeasible.len() < best_count {
            best_count = infeasible.len();
            strikes = 0;
            infeasible.iter().for_each(|&(i, _)| free[i] = !free[i]);
        } else if strikes < 3 {
            strikes += 1;
            infeasible.iter().for_each(|&(i, _)| free[i] = !free[i]);
        } else {
            let &(i, _) = infeasible.iter().max_by_key(|&&(i, _)| i).unwrap();
            free[i] = !free[i];
        }
        x = xf.iter().map(|e| e.max(0.0)).collect();
    }
    // Pivoting did not settle: keep the best feasible point if it improves on
    // the Frank-Wolfe iterate.
    match best {
        Some((e, xb)) if e <= *trace.last().unwrap() => {
            trace.push(e);
            Ok((xb, 200))
        }
        _ => Ok((x0.to_vec(), 200)),
    }
}

/// Minimiser of `x^T K x + 2 v^T x` subject to `sum x = 1` (signs free),
/// by projected conjugate gradients started at `x0`, with a dense LU
/// fallback.
fn face_optimum(k: &DMatrix<f64>, v: &DVector<f64>, x0: &DVector<f64>) -> DVector<f64> {
    let n = k.nrows();
    if n == 1 {
        return DVector::from_element(1, 1.0);
    }
    let project = |r: &DVector<f64>| {
        let mean = r.sum() / n as f64;
        r.map(|e| e - mean)
    };
    let mut x = x0.clone() / x0.sum();
    let mut r = project(&-(k * &x + v));
    let r0 = r.norm().max(1e-300);
    let scale = (k * &x + v).amax().max(1.0);
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut ok = false;
    for _ in 0..(4 * n).max(200) {
        if rr.sqrt() <= 1e-13 * scale || rr.sqrt() <= 1e-14 * r0 {
            ok = true;
            break;
        }
        let kp = project(&(k * &p));
        let pkp = p.dot(&kp);
        if pkp <= 0.0 {
            break;
        }
        let a = rr / pkp;
        x += &p * a;
        r -= &kp * a;
        let rr_new = r.dot(&r);
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    if ok {
        return x;
    }
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(k);
    for i in 0..n {
        a[(i, n)] = -1.0;
        a[(n, i)] = 1.0;
    }
    let mut b = DVector::zeros(n + 1);
    for i in 0..n {
        b[i] = -v[i];
    }
    b[n] = 1.0;
    match a.lu().solve(&b) {
        Some(sol) => sol.rows(0, n).into_owned(),
        None => x,
    }
}
