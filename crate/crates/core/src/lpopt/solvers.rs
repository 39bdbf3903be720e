use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::basis::{build_basis, BasisHandle};
use super::poly::MonicPolynomial;
use crate::domain::{Potential, QuadratureScheme};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// IRLS floor on `|P w^n|` relative to its grid maximum.
    pub eps_floor: f64,
    /// Finish the p = inf solve on real grids with an exchange step whose
    /// reference points are refined between nodes.
    pub exchange: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 500,
            eps_floor: 1e-13,
            exchange: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Stagnated,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub poly: MonicPolynomial,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Final discrete p-norm. For p = inf it is the sup over the nodes, and
    /// after the exchange step also over the refined extremal points.
    pub norm: f64,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// The monic orthogonal polynomial `phi_n / kappa_n` of the basis.
pub fn monic_orthogonal(basis: &BasisHandle, n: usize) -> Result<MonicPolynomial> {
    if n > basis.degree() {
        return Err(Error::invalid(format!("basis has degree {} < {n}", basis.degree())));
    }
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = C64::new((-basis.recurrence.log_kappa[n]).exp(), 0.0);
    MonicPolynomial::from_basis(basis.recurrence.clone(), c)
}

/// Monic orthogonal polynomial of degree `n` for the weight `w^{2n}` on the
/// grid, together with the basis it lives in.
pub fn gram_solve_p2(grid: &QuadratureScheme, pot: &Potential, n: usize) -> Result<(MonicPolynomial, BasisHandle)> {
    let basis = build_basis(grid, pot, n, n, None)?;
    Ok((monic_orthogonal(&basis, n)?, basis))
}

/// `|P w^n|` at the nodes for basis coefficients `c`.
fn abs_values(basis: &BasisHandle, c: &[C64]) -> Vec<f64> {
    basis
        .node_values(c)
        .iter()
        .zip(&basis.sqrt_omega)
        .map(|(y, s)| y.norm() / s)
        .collect()
}

/// Minimises `sum_k |d_k (sum_{j<n} c_j q_j(k) + a q_n(k))|^2` over `c`.
fn weighted_lsq(basis: &BasisHandle, n: usize, a: C64, d: &[f64]) -> Option<Vec<C64>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let rows: Vec<usize> = (0..d.len()).filter(|&k| d[k] > 0.0 && basis.wn[k] > 0.0).collect();
    let m = rows.len();
    let amat = DMatrix::from_fn(m, n, |r, j| basis.q[j][rows[r]] * d[rows[r]]);
    let rhs = DVector::from_fn(m, |r, _| -a * basis.q[n][rows[r]] * d[rows[r]]);
    let qr = amat.qr();
    let qtb = qr.q().adjoint() * rhs;
    let sol = qr.r().solve_upper_triangular(&qtb)?;
    Some(sol.iter().cloned().collect())
}

fn p_norm(e: &[f64], omega_sqrt: &[f64], p: f64) -> f64 {
    let emax = e.iter().cloned().fold(0.0, f64::max);
    if emax == 0.0 {
        return 0.0;
    }
    let s: f64 = e.iter().zip(omega_sqrt).map(|(x, s)| s * s * (x / emax).powf(p)).sum();
    emax * s.powf(1.0 / p)
}

/// Iteratively reweighted least squares for the monic L^p minimiser,
/// started from the orthogonal polynomial (`c = 0`).
pub fn irls_solve(basis: &BasisHandle, n: usize, p: f64, opts: &SolveOptions) -> Result<Solution> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("p = {p} is below 1")));
    }
    if p.is_infinite() {
        return Err(Error::invalid("use the Lawson solver for p = inf"));
    }
    if n > basis.degree() {
        return Err(Error::invalid(format!("basis has degree {} < {n}", basis.degree())));
    }
    let a = C64::new((-basis.recurrence.log_kappa[n]).exp(), 0.0);
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = a;
    let mut e = abs_values(basis, &c);
    let mut norm = p_norm(&e, &basis.sqrt_omega, p);
    let mut status = SolveStatus::MaxIterations;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let emax = e.iter().cloned().fold(0.0, f64::max);
        let floor = opts.eps_floor * emax;
        let d: Vec<f64> = e.iter().map(|x| x.max(floor).powf(0.5 * (p - 2.0))).collect();
        let new = weighted_lsq(basis, n, a, &d).ok_or_else(|| Error::BasisBreakdown {
            degree: n,
            reason: "weighted least-squares system is singular".into(),
        })?;
        for j in 0..n {
            c[j] = if p > 2.0 { 0.5 * (c[j] + new[j]) } else { new[j] };
        }
        e = abs_values(basis, &c);
        let next = p_norm(&e, &basis.sqrt_omega, p);
        let change = (next - norm).abs() / norm.max(f64::MIN_POSITIVE);
        norm = next;
        if change < opts.tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    Ok(Solution {
        poly: MonicPolynomial::from_basis(basis.recurrence.clone(), c)?,
        status,
        iterations: it,
        norm,
    })
}

/// Lawson's algorithm for the weighted discrete Chebyshev problem, followed
/// on real grids by an exchange step that levels the error curve.
pub fn lawson_solve_inf(basis: &BasisHandle, n: usize, opts: &SolveOptions) -> Result<Solution> {
    if n > basis.degree() {
        return Err(Error::invalid(format!("basis has degree {} < {n}", basis.degree())));
    }
    let m = basis.wn.len();
    let a = C64::new((-basis.recurrence.log_kappa[n]).exp(), 0.0);
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = a;
    let live = basis.wn.iter().filter(|w| **w > 0.0).count() as f64;
    let mut u: Vec<f64> = basis.wn.iter().map(|w| if *w > 0.0 { 1.0 / live } else { 0.0 }).collect();
    let mut e = abs_values(basis, &c);
    let mut sup = e.iter().cloned().fold(0.0, f64::max);
    let mut best = (sup, c.clone());
    let mut since_best = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut it = 0;
    while it < opts.max_iter && n > 0 {
        it += 1;
        let d: Vec<f64> = (0..m).map(|k| (u[k]).sqrt() / basis.sqrt_omega[k]).collect();
        let new = weighted_lsq(basis, n, a, &d).ok_or_else(|| Error::BasisBreakdown {
            degree: n,
            reason: "weighted least-squares system is singular".into(),
        })?;
        c[..n].copy_from_slice(&new);
        e = abs_values(basis, &c);
        let next = e.iter().cloned().fold(0.0, f64::max);
        if next < best.0 {
            best = (next, c.clone());
            since_best = 0;
        } else {
            since_best += 1;
        }
        let change = (next - sup).abs() / sup;
        sup = next;
        if change < opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        if since_best >= 10 {
            status = SolveStatus::Stagnated;
            break;
        }
        let mut tot = 0.0;
        for k in 0..m {
            u[k] = (u[k] * e[k]).max(if u[k] > 0.0 { 1e-300 } else { 0.0 });
            tot += u[k];
        }
        u.iter_mut().for_each(|x| *x /= tot);
    }
    if n == 0 {
        status = SolveStatus::Converged;
    }
    let (mut sup, mut c) = best;
    if opts.exchange && n > 0 && basis.q[0].iter().all(|x| x.im == 0.0) {
        // The polish measures its start and iterates on the same refined
        // scale, so its best iterate is never worse than the Lawson one.
        if let Some((sup_x, c_x, levelled)) = remez_polish(basis, n, &c) {
            sup = sup_x;
            c = c_x;
            if levelled {
                status = SolveStatus::Converged;
            }
        }
    }
    Ok(Solution {
        poly: MonicPolynomial::from_basis(basis.recurrence.clone(), c)?,
        status,
        iterations: it,
        norm: sup,
    })
}

/// Alternating extrema of `e` along `order`: one representative (largest
/// `|e|`) per maximal run of equal sign.
fn alternating_extrema(e: &[f64], order: &[usize], floor: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut sign = 0.0;
    for &k in order {
        if e[k].abs() <= floor {
            continue;
        }
        let s = e[k].signum();
        if s != sign {
            out.push(k);
            sign = s;
        } else {
            let last = out.last_mut().unwrap();
            if e[k].abs() > e[*last].abs() {
                *last = k;
            }
        }
    }
    out
}

/// Number of sign alternations among nodes where `|e|` is within `rel` of
/// its maximum, scanning along increasing real part.
pub fn alternation_count(nodes: &[C64], e: &[f64], rel: f64) -> usize {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].re.total_cmp(&nodes[b].re));
    let emax = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut count = 0;
    let mut sign = 0.0;
    for k in order {
        if e[k].abs() >= (1.0 - rel) * emax {
            let s = e[k].signum();
            if s != sign {
                count += 1;
                sign = s;
            }
        }
    }
    count
}

/// Golden-section search for the largest `f` on `[lo, hi]`, never worse
/// than the value at `x0`.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, x0: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let best = [(x0, f(x0)), (lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)];
    best.into_iter().fold((x0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Multiple-exchange iteration on a real grid, seeded by the extrema of
/// the current error curve. Each reference point is moved to the local
/// extremum of `P w^n` between its neighbouring nodes, so the result levels
/// the continuous error curve rather than its samples. Returns
/// `(sup, coeffs, levelled)` for the best iterate, where `sup` is the
/// largest of the grid values and the refined extrema, or `None` when no
/// alternating reference exists.
pub fn remez_polish(basis: &BasisHandle, n: usize, c0: &[C64]) -> Option<(f64, Vec<C64>, bool)> {
    let m = basis.wn.len();
    let phi = |k: usize, j: usize| basis.q[j][k].re / basis.sqrt_omega[k];
    let a = c0[n].re;
    let nw = basis.weight_exponent as f64;
    let row = |x: f64| -> Vec<f64> {
        let z = C64::new(x, 0.0);
        let w = (-nw * basis.potential.eval(z)).exp();
        basis.recurrence.eval(z, n).iter().map(|v| v.re * w).collect()
    };
    let value = |c: &[f64], x: f64| -> f64 {
        let r = row(x);
        (0..n).map(|j| c[j] * r[j]).sum::<f64>() + a * r[n]
    };
    let signed = |c: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|k| (0..n).map(|j| c[j] * phi(k, j)).sum::<f64>() + a * phi(k, n))
            .collect()
    };
    let mut order: Vec<usize> = (0..m).filter(|&k| basis.wn[k] > 0.0).collect();
    order.sort_by(|&x, &y| basis.nodes[x].re.total_cmp(&basis.nodes[y].re));
    let xs: Vec<f64> = order.iter().map(|&k| basis.nodes[k].re).collect();
    let mut pos = vec![usize::MAX; m];
    for (i, &k) in order.iter().enumerate() {
        pos[k] = i;
    }
    // Bracket between the neighbouring nodes. A neighbour much farther
    // than the other one sits across a gap of the condenser.
    let bracket = |i: usize| -> (f64, f64) {
        let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
        let right = if i + 1 < xs.len() { xs[i + 1] - xs[i] } else { 0.0 };
        let lo = if i > 0 && (right == 0.0 || left <= 4.0 * right) { xs[i - 1] } else { xs[i] };
        let hi = if i + 1 < xs.len() && (left == 0.0 || right <= 4.0 * left) { xs[i + 1] } else { xs[i] };
        (lo, hi)
    };
    let refine = |c: &[f64], k: usize, e: f64| -> (f64, f64) {
        let s = e.signum();
        let (lo, hi) = bracket(pos[k]);
        let (x, v) = golden_max(|x| s * value(c, x), lo, hi, xs[pos[k]]);
        (x, s * v)
    };
    let alternation = |e: &[f64]| -> Vec<usize> {
        let emax = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
        alternating_extrema(e, &order, 1e-14 * emax)
    };
    // Continuous sup estimate: grid maximum and refined alternating extrema.
    let sup_of = |c: &[f64], e: &[f64]| -> f64 {
        let grid = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
        alternation(e).iter().map(|&k| refine(c, k, e[k]).1.abs()).fold(grid, f64::max)
    };

    let mut c: Vec<f64> = c0[..n].iter().map(|z| z.re).collect();
    let mut e = signed(&c);
    let mut best = (sup_of(&c, &e), c.clone(), false);
    for _ in 0..100 {
        let mut refs = alternation(&e);
        if refs.len() < n + 1 {
            break;
        }
        while refs.len() > n + 1 {
            let last = refs.len() - 1;
            if refs.len() == n + 2 {
                if e[refs[0]].abs() < e[refs[last]].abs() {
                    refs.remove(0);
                } else {
                    refs.pop();
                }
                continue;
            }
            let i = (0..refs.len()).min_by(|&x, &y| e[refs[x]].abs().total_cmp(&e[refs[y]].abs())).unwrap();
            if i == 0 || i == last {
                refs.remove(i);
            } else {
                let j = if e[refs[i - 1]].abs() < e[refs[i + 1]].abs() { i - 1 } else { i + 1 };
                refs.remove(i.max(j));
                refs.remove(i.min(j));
            }
        }
        let mut mat = DMatrix::<f64>::zeros(n + 1, n + 1);
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for (r, &k) in refs.iter().enumerate() {
            let (x, _) = refine(&c, k, e[k]);
            let phis = row(x);
            for j in 0..n {
                mat[(r, j)] = phis[j];
            }
            mat[(r, n)] = if r % 2 == 0 { -1.0 } else { 1.0 };
            rhs[r] = -a * phis[n];
        }
        let sol = mat.lu().solve(&rhs)?;
        let level = sol[n].abs();
        c = sol.iter().take(n).cloned().collect();
        e = signed(&c);
        let emax = sup_of(&c, &e);
        let levelled = emax <= level * (1.0 + 1e-9);
        if emax < best.0 {
            best = (emax, c.clone(), levelled);
        }
        if levelled {
            best.2 = best.2 || emax <= best.0 * (1.0 + 1e-12);
            break;
        }
    }
    let (sup, c, levelled) = best;
    let mut out: Vec<C64> = c.iter().map(|x| C64::new(*x, 0.0)).collect();
    out.push(c0[n]);
    Some((sup, out, levelled))
}
