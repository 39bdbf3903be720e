use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::{Potential, QuadratureScheme};
use crate::{Error, Result};

pub const MAX_DEGREE: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMethod {
    /// Three-term recurrence with selective reorthogonalisation (real grids).
    ThreeTerm,
    /// Gram-Schmidt with full reorthogonalisation (complex grids).
    GramSchmidt,
    /// Plain monomials `z^j`; used for polynomials given by coefficients.
    Monomial,
}

/// Column `j` of the Hessenberg matrix: `z phi_j = sum_{i=lo}^{j+1} h[i-lo] phi_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub lo: usize,
    pub h: Vec<C64>,
}

impl Column {
    /// Subdiagonal entry `h_{j+1,j}`, real and positive.
    pub fn sub(&self) -> f64 {
        self.h.last().unwrap().re
    }
}

/// Recurrence data of a family `phi_0, ..., phi_d` of polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub method: BasisMethod,
    /// The constant `phi_0`.
    pub phi0: f64,
    pub cols: Vec<Column>,
    /// `ln kappa_j`, the log of the leading coefficient of `phi_j`.
    pub log_kappa: Vec<f64>,
}

impl Recurrence {
    pub fn degree(&self) -> usize {
        self.cols.len()
    }

    pub fn monomial(degree: usize) -> Self {
        Recurrence {
            method: BasisMethod::Monomial,
            phi0: 1.0,
            cols: (0..degree)
                .map(|j| Column {
                    lo: j,
                    h: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                })
                .collect(),
            log_kappa: vec![0.0; degree + 1],
        }
    }

    /// `phi_0(z), ..., phi_upto(z)` divided by `exp(log_scale)`; the common
    /// scale keeps large arguments from overflowing.
    pub fn eval_scaled(&self, z: C64, upto: usize) -> (Vec<C64>, f64) {
        const BIG: f64 = 1e150;
        let mut v = Vec::with_capacity(upto + 1);
        v.push(C64::new(self.phi0, 0.0));
        let mut log_scale = 0.0;
        for j in 0..upto {
            let col = &self.cols[j];
            let mut acc = z * v[j];
            for (off, h) in col.h[..col.h.len() - 1].iter().enumerate() {
                acc -= h * v[col.lo + off];
            }
            let next = acc / col.sub();
            v.push(next);
            if next.norm() > BIG {
                v.iter_mut().for_each(|e| *e /= BIG);
                log_scale += BIG.ln();
            }
        }
        (v, log_scale)
    }

    pub fn eval(&self, z: C64, upto: usize) -> Vec<C64> {
        let (mut v, s) = self.eval_scaled(z, upto);
        if s != 0.0 {
            let f = s.exp();
            v.iter_mut().for_each(|e| *e *= f);
        }
        v
    }

    /// Values and derivatives of `phi_0..phi_upto` at `z`.
    pub fn eval_with_derivative(&self, z: C64, upto: usize) -> (Vec<C64>, Vec<C64>) {
        let (v, d, _) = self.eval_with_error(z, upto);
        (v, d)
    }

    /// Like [`Recurrence::eval_with_derivative`], plus a running bound
    /// `a_j` with `|fl(phi_j) - phi_j| <~ eps a_j`.
    pub fn eval_with_error(&self, z: C64, upto: usize) -> (Vec<C64>, Vec<C64>, Vec<f64>) {
        let mut v = Vec::with_capacity(upto + 1);
        let mut d = Vec::with_capacity(upto + 1);
        let mut a = Vec::with_capacity(upto + 1);
        v.push(C64::new(self.phi0, 0.0));
        d.push(C64::new(0.0, 0.0));
        a.push(0.0);
        let zn = z.norm();
        for j in 0..upto {
            let col = &self.cols[j];
            let mut acc = z * v[j];
            let mut dacc = v[j] + z * d[j];
            let mut err = zn * (a[j] + v[j].norm());
            for (off, h) in col.h[..col.h.len() - 1].iter().enumerate() {
                let i = col.lo + off;
                acc -= h * v[i];
                dacc -= h * d[i];
                err += h.norm() * (a[i] + v[i].norm());
            }
            v.push(acc / col.sub());
            d.push(dacc / col.sub());
            a.push(err / col.sub());
        }
        (v, d, a)
    }

    /// Monomial coefficients (ascending) of the monic polynomials
    /// `pi_j = phi_j / kappa_j`, `j = 0..=upto`.
    pub fn monic_power_forms(&self, upto: usize) -> Vec<Vec<C64>> {
        let mut pis: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
        for j in 0..upto {
            let col = &self.cols[j];
            let mut next = vec![C64::new(0.0, 0.0); j + 2];
            for (k, c) in pis[j].iter().enumerate() {
                next[k + 1] += c;
            }
            for (off, h) in col.h[..col.h.len() - 1].iter().enumerate() {
                let i = col.lo + off;
                let ratio = (self.log_kappa[i] - self.log_kappa[j]).exp();
                for (k, c) in pis[i].iter().enumerate() {
                    next[k] -= h * ratio * c;
                }
            }
            pis.push(next);
        }
        pis
    }
}

/// Discrete orthonormal basis for the inner product
/// `<f, g> = sum_k omega_k w(z_k)^{2n} f(z_k) conj(g(z_k))`.
#[derive(Clone, Debug)]
pub struct BasisHandle {
    pub recurrence: Arc<Recurrence>,
    /// Exponent `n` of the varying weight `w^n`.
    pub weight_exponent: usize,
    pub potential: Potential,
    pub nodes: Vec<C64>,
    /// `q[j][k] = sqrt(omega_k) w(z_k)^n phi_j(z_k)`.
    pub q: Vec<Vec<C64>>,
    pub sqrt_omega: Vec<f64>,
    /// `w(z_k)^n`.
    pub wn: Vec<f64>,
    /// `max |<phi_i, phi_j> - delta_ij|` measured after construction.
    pub orthogonality_error: f64,
    /// Number of columns that needed a second orthogonalisation pass.
    pub reorthogonalized: usize,
}

impl BasisHandle {
    pub fn degree(&self) -> usize {
        self.recurrence.degree()
    }

    pub fn kappa(&self, j: usize) -> f64 {
        self.recurrence.log_kappa[j].exp()
    }

    /// Node values `sqrt(omega) w^n P` of `P = sum_j c_j phi_j`.
    pub fn node_values(&self, coeffs: &[C64]) -> Vec<C64> {
        let m = self.sqrt_omega.len();
        let mut y = vec![C64::new(0.0, 0.0); m];
        for (j, c) in coeffs.iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            for (yk, qk) in y.iter_mut().zip(&self.q[j]) {
                *yk += c * qk;
            }
        }
        y
    }

    /// Discrete inner product of two basis-coefficient vectors computed on
    /// the nodes.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        let ya = self.node_values(a);
        let yb = self.node_values(b);
        ya.iter().zip(&yb).map(|(x, y)| x * y.conj()).sum()
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Builds the orthonormal basis up to `degree` for the weight `w^{2n}` with
/// `n = weight_exponent`.
pub fn build_basis(
    grid: &QuadratureScheme,
    pot: &Potential,
    weight_exponent: usize,
    degree: usize,
    method: Option<BasisMethod>,
) -> Result<BasisHandle> {
    if degree > MAX_DEGREE {
        return Err(Error::BasisBreakdown {
            degree,
            reason: format!("degree exceeds the double-precision cap {MAX_DEGREE}"),
        });
    }
    let method = method.unwrap_or(if grid.real { BasisMethod::ThreeTerm } else { BasisMethod::GramSchmidt });
    if method == BasisMethod::Monomial {
        return Err(Error::invalid("monomial recurrences are not built from grids"));
    }
    let m = grid.len();
    let nf = weight_exponent as f64;
    let wn: Vec<f64> = grid.nodes.iter().map(|z| (-nf * pot.eval(*z)).exp()).collect();
    let sqrt_omega: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let b: Vec<C64> = (0..m).map(|k| C64::new(sqrt_omega[k] * wn[k], 0.0)).collect();
    let support = b.iter().filter(|x| x.norm() > 0.0).count();
    if support <= degree {
        return Err(Error::BasisBreakdown {
            degree: support,
            reason: format!("only {support} nodes carry positive weight"),
        });
    }
    let b0 = norm(&b);
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::BasisBreakdown {
            degree: 0,
            reason: "weighted mass underflows".into(),
        });
    }
    let mut q = vec![b.iter().map(|x| x / b0).collect::<Vec<_>>()];
    let mut cols = Vec::with_capacity(degree);
    let mut log_kappa = vec![-b0.ln()];
    let mut reorth = 0;
    for j in 0..degree {
        let mut v: Vec<C64> = (0..m).map(|k| grid.nodes[k] * q[j][k]).collect();
        let vnorm0 = norm(&v);
        let mut h = vec![C64::new(0.0, 0.0); j + 2];
        let lo_first = match method {
            BasisMethod::ThreeTerm => j.saturating_sub(1),
            _ => 0,
        };
        for i in lo_first..=j {
            let c = dot(&v, &q[i]);
            h[i] += c;
            for (vk, qk) in v.iter_mut().zip(&q[i]) {
                *vk -= c * qk;
            }
        }
        let mut vn = norm(&v);
        // Second pass against every earlier vector when orthogonality is lost.
        let loss = (0..=j).map(|i| dot(&v, &q[i]).norm()).fold(0.0, f64::max) / vn.max(1e-300);
        if method == BasisMethod::GramSchmidt || loss > 1e-10 {
            if loss > 1e-10 {
                reorth += 1;
            }
            for i in 0..=j {
                let c = dot(&v, &q[i]);
                h[i] += c;
                for (vk, qk) in v.iter_mut().zip(&q[i]) {
                    *vk -= c * qk;
                }
            }
            vn = norm(&v);
        }
        if !(vn > 1e-13 * vnorm0) || vn < 1e-300 {
            return Err(Error::BasisBreakdown {
                degree: j + 1,
                reason: format!("residual norm {vn:.3e} relative to {vnorm0:.3e}"),
            });
        }
        h[j + 1] = C64::new(vn, 0.0);
        let lo = h[..=j].iter().position(|c| *c != C64::new(0.0, 0.0)).unwrap_or(j).min(lo_first);
        cols.push(Column { lo, h: h[lo..].to_vec() });
        log_kappa.push(log_kappa[j] - vn.ln());
        if !log_kappa[j + 1].is_finite() {
            return Err(Error::BasisBreakdown {
                degree: j + 1,
                reason: "leading coefficient overflow".into(),
            });
        }
        q.push(v.iter().map(|x| x / vn).collect());
    }
    let mut orth: f64 = 0.0;
    for i in 0..=degree {
        for j in i..=degree {
            let d = dot(&q[i], &q[j]) - if i == j { 1.0 } else { 0.0 };
            orth = orth.max(d.norm());
        }
    }
    Ok(BasisHandle {
        recurrence: Arc::new(Recurrence {
            method,
            phi0: 1.0 / b0,
            cols,
            log_kappa,
        }),
        weight_exponent,
        potential: pot.clone(),
        nodes: grid.nodes.clone(),
        q,
        sqrt_omega,
        wn,
        orthogonality_error: orth,
        reorthogonalized: reorth,
    })
}
