//! Quadrature rules and grids on condensers.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::admissibility::{check_admissibility, probe_points, DEFAULT_MARGIN, DEFAULT_PROBE_RADII};
use super::{Condenser, Potential};
use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    for i in 0..(q + 1) / 2 {
        let mut t = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, pm1) = legendre(q, t);
            let dp = q as f64 * (t * p - pm1) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (p, pm1) = legendre(q, t);
        let dp = q as f64 * (t * p - pm1) / (t * t - 1.0);
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[q - 1 - i] = t;
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    if q % 2 == 1 {
        x[q / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Lobatto nodes and weights on `[-1, 1]` with `q >= 2` points,
/// endpoints included, ascending.
pub fn gauss_lobatto(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 2);
    let m = q - 1;
    let mf = m as f64;
    let mut x = vec![0.0; q];
    x[0] = -1.0;
    x[m] = 1.0;
    for k in 1..m {
        let mut t = -(PI * k as f64 / mf).cos();
        for _ in 0..100 {
            let (p, pm1) = legendre(m, t);
            let dp = mf * (t * p - pm1) / (t * t - 1.0);
            let d2p = (2.0 * t * dp - mf * (mf + 1.0) * p) / (1.0 - t * t);
            let dt = dp / d2p;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[k] = t;
    }
    if q % 2 == 1 {
        x[q / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&t| {
            let (p, _) = legendre(m, t);
            2.0 / (mf * (mf + 1.0) * p * p)
        })
        .collect();
    (x, w)
}

/// `(P_m(t), P_{m-1}(t))`.
fn legendre(m: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRule {
    /// Composite Gauss-Lobatto panels on curves, Gauss-Legendre radial
    /// panels on discs. High order; used for norms and bases.
    Panels,
    /// Equal cells with midpoint nodes. On discs the cells are near-square
    /// polar sectors whose per-ring counts are multiples of 8, so the whole
    /// grid is invariant under rotation by a quarter of a right angle.
    /// Used by the equilibrium solver, whose cell self-energy model assumes
    /// cells of one size.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub rule: GridRule,
    /// Exponent used in the truncation ceiling; the smallest finite p of a
    /// run gives the heaviest tails.
    pub p_ref: f64,
    pub panel_order: usize,
    /// Minimum number of angles on polar panel grids.
    pub min_angles: usize,
    /// Relative size of the tail ceiling at the truncation radius.
    pub ceiling: f64,
    /// Fraction of nodes that must carry a positive weight.
    pub positive_fraction: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rule: GridRule::Panels,
            p_ref: 2.0,
            panel_order: 8,
            min_angles: 64,
            ceiling: 1e-18,
            positive_fraction: 0.1,
        }
    }
}

impl QuadratureOptions {
    pub fn uniform() -> Self {
        QuadratureOptions {
            rule: GridRule::Uniform,
            ..Default::default()
        }
    }
}

/// Discretisation of the reference measure on a (truncated) condenser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    /// Length (dim 1) or area (dim 2) of the cell owned by each node.
    pub cells: Vec<f64>,
    /// Truncation radius for unbounded condensers.
    pub truncation: Option<f64>,
    pub dim: usize,
    /// True when every node is real.
    pub real: bool,
    pub rule: GridRule,
    pub resolution: f64,
}

impl QuadratureScheme {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(C64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).sum()
    }

    /// Typical linear cell size.
    pub fn cell_scale(&self) -> f64 {
        let mean = self.cells.iter().sum::<f64>() / self.cells.len().max(1) as f64;
        if self.dim == 2 {
            mean.sqrt()
        } else {
            mean
        }
    }
}

/// Radius beyond which `[(1+|z|) w(z)]^{n p}` stays below `ceiling` times its
/// maximum over the condenser.
pub fn truncation_radius(cond: &Condenser, pot: &Potential, n: usize, p_ref: f64, ceiling: f64) -> Result<f64> {
    let q = n.max(1) as f64 * p_ref;
    let f = |r: f64| -> f64 {
        probe_points(cond, r)
            .iter()
            .map(|z| q * ((1.0 + z.norm()).ln() - pot.eval(*z)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let dr = 1e-3;
    let drop = ceiling.ln();
    let mut best = f64::NEG_INFINITY;
    let mut samples = Vec::new();
    let mut k = 0usize;
    loop {
        let r = k as f64 * dr;
        let v = f(r);
        samples.push((r, v));
        best = best.max(v);
        if v < best + drop - 30.0 && r > 1.0 {
            break;
        }
        if r > 1e4 {
            return Err(Error::Admissibility(format!(
                "weighted tail does not decay by radius {r}; cannot truncate"
            )));
        }
        k += 1;
    }
    let last = samples
        .iter()
        .rev()
        .find(|(_, v)| *v >= best + drop)
        .map(|(r, _)| *r)
        .unwrap_or(0.0);
    Ok(last + dr)
}

fn merge_panels(a: f64, b: f64, npanel: usize, rule: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = rule;
    let q = xs.len();
    let h = (b - a) / npanel as f64;
    let mut t = Vec::with_capacity(npanel * (q - 1) + 1);
    let mut w: Vec<f64> = Vec::with_capacity(t.capacity());
    for p in 0..npanel {
        let lo = a + p as f64 * h;
        for k in 0..q {
            let x = if k == 0 { lo } else if k == q - 1 { lo + h } else { lo + 0.5 * h * (xs[k] + 1.0) };
            let wk = 0.5 * h * ws[k];
            if p > 0 && k == 0 {
                *w.last_mut().unwrap() += wk;
            } else {
                t.push(x);
                w.push(wk);
            }
        }
    }
    *t.last_mut().unwrap() = b;
    (t, w)
}

fn voronoi_1d(t: &[f64]) -> Vec<f64> {
    let m = t.len();
    if m == 1 {
        return vec![0.0];
    }
    (0..m)
        .map(|i| {
            let lo = if i == 0 { t[0] } else { 0.5 * (t[i - 1] + t[i]) };
            let hi = if i == m - 1 { t[m - 1] } else { 0.5 * (t[i] + t[i + 1]) };
            hi - lo
        })
        .collect()
}

/// Parametrised 1-D rule on `[0, len]`: (positions, weights, cells).
fn line_rule(len: f64, resolution: f64, opts: &QuadratureOptions) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    match opts.rule {
        GridRule::Panels => {
            let q = opts.panel_order.max(2);
            let npanel = ((len * resolution) / (q - 1) as f64).ceil().max(1.0) as usize;
            let (t, w) = merge_panels(0.0, len, npanel, &gauss_lobatto(q));
            let c = voronoi_1d(&t);
            (t, w, c)
        }
        GridRule::Uniform => {
            let m = (len * resolution).ceil().max(1.0) as usize;
            let h = len / m as f64;
            let t = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
            (t, vec![h; m], vec![h; m])
        }
    }
}

struct Acc {
    nodes: Vec<C64>,
    weights: Vec<f64>,
    cells: Vec<f64>,
}

impl Acc {
    fn push(&mut self, z: C64, w: f64, c: f64) {
        self.nodes.push(z);
        self.weights.push(w);
        self.cells.push(c);
    }
}

fn add_segment(acc: &mut Acc, a: C64, b: C64, resolution: f64, opts: &QuadratureOptions, skip_first: bool) {
    let len = (b - a).norm();
    let dir = (b - a) / len;
    let (t, w, c) = line_rule(len, resolution, opts);
    for i in 0..t.len() {
        if skip_first && i == 0 && t[0] == 0.0 {
            let k = acc.nodes.len() - 1;
            acc.weights[k] += w[0];
            acc.cells[k] += c[0];
            continue;
        }
        let z = if i == t.len() - 1 && opts.rule == GridRule::Panels { b } else { a + dir * t[i] };
        acc.push(z, w[i], c[i]);
    }
}

fn add_disc(acc: &mut Acc, center: C64, radius: f64, resolution: f64, n: usize, opts: &QuadratureOptions) {
    match opts.rule {
        GridRule::Panels => {
            let q = opts.panel_order.max(2);
            let npanel = ((radius * resolution) / q as f64).ceil().max(1.0) as usize;
            let (gx, gw) = gauss_legendre(q);
            let n_theta = opts.min_angles.max(4 * (n + 1));
            let h = radius / npanel as f64;
            let dtheta = 2.0 * PI / n_theta as f64;
            for p in 0..npanel {
                for k in 0..q {
                    let r = p as f64 * h + 0.5 * h * (gx[k] + 1.0);
                    let wr = 0.5 * h * gw[k] * r * dtheta;
                    for j in 0..n_theta {
                        acc.push(center + C64::from_polar(r, j as f64 * dtheta), wr, wr);
                    }
                }
            }
        }
        GridRule::Uniform => {
            let nr = (radius * resolution).ceil().max(1.0) as usize;
            let dr = radius / nr as f64;
            for k in 0..nr {
                let r = (k as f64 + 0.5) * dr;
                let nk = 8 * ((2.0 * PI * r / (8.0 * dr)).round() as usize).max(1);
                let dtheta = 2.0 * PI / nk as f64;
                let a = r * dr * dtheta;
                for j in 0..nk {
                    acc.push(center + C64::from_polar(r, j as f64 * dtheta), a, a);
                }
            }
        }
    }
}

fn add_rect(acc: &mut Acc, x: [f64; 2], y: [f64; 2], resolution: f64, opts: &QuadratureOptions) {
    let (tx, wx, cx) = line_rule(x[1] - x[0], resolution, opts);
    let (ty, wy, cy) = line_rule(y[1] - y[0], resolution, opts);
    for j in 0..ty.len() {
        for i in 0..tx.len() {
            acc.push(C64::new(x[0] + tx[i], y[0] + ty[j]), wx[i] * wy[j], cx[i] * cy[j]);
        }
    }
}

/// Builds a grid discretising the reference measure of `cond`, truncated for
/// unbounded condensers so that degree-`n` weighted integrands are captured.
pub fn build_quadrature(
    cond: &Condenser,
    pot: &Potential,
    n: usize,
    resolution: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureScheme> {
    cond.validate()?;
    pot.validate()?;
    if !(resolution >= 8.0 && resolution.is_finite()) {
        return Err(Error::invalid(format!("resolution must be at least 8, got {resolution}")));
    }
    let required = 4.0 * (n as f64).sqrt();
    if resolution < required {
        return Err(Error::ResolutionTooLow {
            given: resolution,
            required,
            n,
        });
    }
    let truncation = if cond.is_bounded() {
        None
    } else {
        let rep = check_admissibility(pot, cond, &DEFAULT_PROBE_RADII, DEFAULT_MARGIN)?;
        if !rep.pass {
            return Err(Error::Admissibility(format!(
                "growth margins {:?} do not exceed {}",
                rep.margins, rep.threshold
            )));
        }
        Some(truncation_radius(cond, pot, n, opts.p_ref, opts.ceiling)?)
    };
    let t = truncation.unwrap_or(f64::INFINITY);
    let mut acc = Acc {
        nodes: Vec::new(),
        weights: Vec::new(),
        cells: Vec::new(),
    };
    match cond {
        Condenser::Intervals { intervals } => {
            let mut ivs = intervals.clone();
            ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for iv in ivs {
                let a = iv.0.max(-t);
                let b = iv.1.min(t);
                if a < b {
                    add_segment(&mut acc, C64::new(a, 0.0), C64::new(b, 0.0), resolution, opts, false);
                }
            }
        }
        Condenser::Plane {} => add_disc(&mut acc, C64::new(0.0, 0.0), t, resolution, n, opts),
        Condenser::Discs { discs } => {
            for d in discs {
                add_disc(&mut acc, d.center(), d.radius, resolution, n, opts);
            }
        }
        Condenser::Rectangles { rects } => {
            for r in rects {
                add_rect(&mut acc, r.x, r.y, resolution, opts);
            }
        }
        Condenser::Circle { center, radius } => {
            let m = ((2.0 * PI * radius * resolution).ceil() as usize).max(8);
            let w = 2.0 * PI * radius / m as f64;
            let c = C64::new(center[0], center[1]);
            for j in 0..m {
                acc.push(c + C64::from_polar(*radius, 2.0 * PI * j as f64 / m as f64), w, w);
            }
        }
        Condenser::Polyline { points } => {
            for (k, s) in points.windows(2).enumerate() {
                let a = C64::new(s[0][0], s[0][1]);
                let b = C64::new(s[1][0], s[1][1]);
                add_segment(&mut acc, a, b, resolution, opts, k > 0);
            }
        }
    }
    if acc.nodes.is_empty() {
        return Err(Error::invalid("condenser produced an empty grid"));
    }
    let positive = acc.nodes.iter().filter(|z| pot.weight(**z) > 0.0).count();
    if (positive as f64) < opts.positive_fraction * acc.nodes.len() as f64 {
        return Err(Error::Admissibility(format!(
            "w > 0 on only {positive} of {} nodes",
            acc.nodes.len()
        )));
    }
    let real = acc.nodes.iter().all(|z| z.im == 0.0);
    Ok(QuadratureScheme {
        nodes: acc.nodes,
        weights: acc.weights,
        cells: acc.cells,
        truncation,
        dim: cond.dim(),
        real,
        rule: opts.rule,
        resolution,
    })
}
