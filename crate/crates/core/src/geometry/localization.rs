use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::hull::{convex_hull, HullGeometry};
use crate::domain::DiscreteMeasure;
use crate::equilibrium::EquilibriumResult;
use crate::{Error, Result};

/// Support clusters further apart than this many cells are distinct.
pub const GAP_CELLS: f64 = 5.0;

/// Hull and component structure of an equilibrium support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportGeometry {
    pub hull: HullGeometry,
    /// Filled hull of each connected support component. On the real line
    /// these are the smallest intervals covering each cluster.
    pub fills: Vec<HullGeometry>,
    /// Gaps `(r_k, l_{k+1})` between consecutive real components.
    pub gaps: Vec<(f64, f64)>,
    pub real: bool,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl SupportGeometry {
    pub fn from_equilibrium(eq: &EquilibriumResult) -> Result<Self> {
        if eq.support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let pts = eq.support_points();
        let cells: Vec<f64> = eq.support.iter().map(|&i| eq.cells[i]).collect();
        let real = eq.dim == 1 && pts.iter().all(|z| z.im == 0.0);
        let hull = convex_hull(&pts);
        if real {
            let mut order: Vec<usize> = (0..pts.len()).collect();
            order.sort_by(|&a, &b| pts[a].re.total_cmp(&pts[b].re));
            let mut comps: Vec<(f64, f64)> = Vec::new();
            let mut prev = order[0];
            let mut lo = pts[prev].re;
            for &k in &order[1..] {
                let gap = pts[k].re - pts[prev].re;
                if gap > GAP_CELLS * cells[k].max(cells[prev]) {
                    comps.push((lo, pts[prev].re));
                    lo = pts[k].re;
                }
                prev = k;
            }
            comps.push((lo, pts[prev].re));
            let fills = comps
                .iter()
                .map(|&(a, b)| convex_hull(&[C64::new(a, 0.0), C64::new(b, 0.0)]))
                .collect();
            let gaps = comps.windows(2).map(|w| (w[0].1, w[1].0)).collect();
            return Ok(SupportGeometry { hull, fills, gaps, real });
        }
        let scale: Vec<f64> = cells
            .iter()
            .map(|c| if eq.dim == 2 { c.sqrt() } else { *c })
            .collect();
        let link = GAP_CELLS * scale.iter().cloned().fold(0.0, f64::max);
        let key = |z: C64| ((z.re / link).floor() as i64, (z.im / link).floor() as i64);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, z) in pts.iter().enumerate() {
            buckets.entry(key(*z)).or_default().push(k);
        }
        let mut dsu = Dsu((0..pts.len()).collect());
        for (k, z) in pts.iter().enumerate() {
            let (bx, by) = key(*z);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = buckets.get(&(bx + dx, by + dy)) {
                        for &j in list {
                            if j > k {
                                let tol = GAP_CELLS * scale[k].max(scale[j]);
                                if (pts[j] - z).norm() <= tol {
                                    dsu.union(k, j);
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<C64>> = HashMap::new();
        for (k, z) in pts.iter().enumerate() {
            groups.entry(dsu.find(k)).or_default().push(*z);
        }
        let mut keys: Vec<usize> = groups.keys().cloned().collect();
        keys.sort_unstable();
        let fills = keys.iter().map(|k| convex_hull(&groups[k])).collect();
        Ok(SupportGeometry {
            hull,
            fills,
            gaps: Vec::new(),
            real,
        })
    }

    pub fn dist_to_hull(&self, z: C64) -> f64 {
        self.hull.distance(z)
    }

    /// Distance to the filled components, our stand-in for the polynomial
    /// convex hull.
    pub fn dist_to_pchull(&self, z: C64) -> f64 {
        self.fills.iter().map(|f| f.distance(z)).fold(f64::INFINITY, f64::min)
    }

    /// Roots in each gap: `|Im z| <= eps` and `Re z` strictly inside the
    /// gap shrunk by `eps` on both sides.
    pub fn gap_counts(&self, roots: &[C64], eps: f64) -> Vec<usize> {
        self.gaps
            .iter()
            .map(|&(a, b)| {
                roots
                    .iter()
                    .filter(|z| z.im.abs() <= eps && z.re > a + eps && z.re < b - eps)
                    .count()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootLocalizationReport {
    pub n: usize,
    pub roots: Vec<C64>,
    pub eps: f64,
    pub count_outside_hull_fattening: usize,
    pub count_outside_pchull_fattening: usize,
    pub per_gap_counts: Vec<usize>,
    pub counting_measure: DiscreteMeasure,
    pub dist_to_hull: Vec<f64>,
    pub dist_to_pchull: Vec<f64>,
}

impl RootLocalizationReport {
    /// Recount from the stored distances; used to check consistency.
    pub fn recount(&self) -> (usize, usize) {
        (
            self.dist_to_hull.iter().filter(|d| **d > self.eps).count(),
            self.dist_to_pchull.iter().filter(|d| **d > self.eps).count(),
        )
    }
}

pub fn root_localization_report(roots: &[C64], eq: &EquilibriumResult, eps: f64) -> Result<RootLocalizationReport> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let geo = SupportGeometry::from_equilibrium(eq)?;
    Ok(report_with_geometry(roots, &geo, eps))
}

/// Same as [`root_localization_report`] with a precomputed geometry.
pub fn report_with_geometry(roots: &[C64], geo: &SupportGeometry, eps: f64) -> RootLocalizationReport {
    let dist_to_hull: Vec<f64> = roots.iter().map(|z| geo.dist_to_hull(*z)).collect();
    let dist_to_pchull: Vec<f64> = roots.iter().map(|z| geo.dist_to_pchull(*z)).collect();
    RootLocalizationReport {
        n: roots.len(),
        roots: roots.to_vec(),
        eps,
        count_outside_hull_fattening: dist_to_hull.iter().filter(|d| **d > eps).count(),
        count_outside_pchull_fattening: dist_to_pchull.iter().filter(|d| **d > eps).count(),
        per_gap_counts: geo.gap_counts(roots, eps),
        counting_measure: DiscreteMeasure::counting(roots),
        dist_to_hull,
        dist_to_pchull,
    }
}
