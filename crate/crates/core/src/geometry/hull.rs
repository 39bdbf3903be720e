use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::condenser_segment_distance as seg_dist;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    Segment,
    Point,
}

/// Convex hull with vertices in counter-clockwise order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullGeometry {
    pub vertices: Vec<C64>,
    pub diameter: f64,
    pub degenerate: Degeneracy,
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Monotone-chain hull; collinear boundary points are dropped.
pub fn convex_hull(points: &[C64]) -> HullGeometry {
    assert!(!points.is_empty(), "convex hull of an empty set");
    let mut p: Vec<C64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() == 1 {
        return HullGeometry {
            vertices: p,
            diameter: 0.0,
            degenerate: Degeneracy::Point,
        };
    }
    let mut lower: Vec<C64> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let vertices = lower;
    if vertices.len() == 2 {
        let d = (vertices[1] - vertices[0]).norm();
        return HullGeometry {
            vertices,
            diameter: d,
            degenerate: Degeneracy::Segment,
        };
    }
    let diameter = calipers_diameter(&vertices);
    HullGeometry {
        vertices,
        diameter,
        degenerate: Degeneracy::None,
    }
}

/// Rotating calipers over a strictly convex counter-clockwise polygon.
fn calipers_diameter(v: &[C64]) -> f64 {
    let n = v.len();
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        while cross(v[i], v[ni], v[(j + 1) % n]).abs() > cross(v[i], v[ni], v[j]).abs() {
            j = (j + 1) % n;
        }
        best = best.max((v[i] - v[j]).norm()).max((v[ni] - v[j]).norm());
    }
    best
}

impl HullGeometry {
    /// Inclusive membership with absolute tolerance `tol`.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// Euclidean distance to the hull (0 inside).
    pub fn distance(&self, z: C64) -> f64 {
        (z - self.closest_point(z)).norm()
    }

    /// Nearest point of the hull.
    pub fn closest_point(&self, z: C64) -> C64 {
        let v = &self.vertices;
        match self.degenerate {
            Degeneracy::Point => v[0],
            Degeneracy::Segment => project(z, v[0], v[1]),
            Degeneracy::None => {
                let n = v.len();
                let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], z) >= 0.0);
                if inside {
                    return z;
                }
                let mut best = (f64::INFINITY, z);
                for i in 0..n {
                    let c = project(z, v[i], v[(i + 1) % n]);
                    let d = (z - c).norm();
                    if d < best.0 {
                        best = (d, c);
                    }
                }
                best.1
            }
        }
    }
}

fn project(z: C64, a: C64, b: C64) -> C64 {
    let d = b - a;
    let t = (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    let c = a + d * t;
    debug_assert!(((z - c).norm() - seg_dist(z, a, b)).abs() < 1e-9 * (1.0 + z.norm()));
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoBound {
    pub rho: f64,
    pub closest: C64,
    pub delta: f64,
    /// Set when the hull is a single point, where the bound degenerates to 0.
    pub singleton: bool,
}

/// Contraction factor `D / sqrt(D^2 + delta^2)` for an external point `w`.
pub fn rho_bound(hull: &HullGeometry, w: C64) -> Result<RhoBound> {
    let closest = hull.closest_point(w);
    let delta = (w - closest).norm();
    let scale = hull.vertices.iter().map(|v| v.norm()).fold(w.norm(), f64::max).max(1.0);
    if delta <= 1e-14 * scale {
        return Err(Error::InsideHull(format!("{w}")));
    }
    let d = hull.diameter;
    Ok(RhoBound {
        rho: d / (d * d + delta * delta).sqrt(),
        closest,
        delta,
        singleton: hull.degenerate == Degeneracy::Point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn unit_square() {
        let h = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(0.5, 0.5)]);
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.degenerate, Degeneracy::None);
        assert!((h.diameter - 2f64.sqrt()).abs() < 1e-15);
        let v = &h.vertices;
        for i in 0..4 {
            assert!(cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4]) > 0.0);
        }
    }

    #[test]
    fn collinear_and_single() {
        let h = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(h.degenerate, Degeneracy::Segment);
        assert!((h.diameter - 2.0).abs() < 1e-15);
        let p = convex_hull(&[c(3.0, 1.0), c(3.0, 1.0)]);
        assert_eq!(p.degenerate, Degeneracy::Point);
    }

    #[test]
    fn rho_examples() {
        let seg = convex_hull(&[c(-1.0, 0.0), c(1.0, 0.0)]);
        let r = rho_bound(&seg, c(0.0, 2.0)).unwrap();
        assert!((r.rho - 2.0 / 8f64.sqrt()).abs() < 1e-15);
        assert!(r.closest.norm() < 1e-15);
        let pt = convex_hull(&[c(0.0, 0.0)]);
        let r = rho_bound(&pt, c(1.0, 0.0)).unwrap();
        assert_eq!(r.rho, 0.0);
        assert!(r.singleton);
        let sq = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]);
        let r = rho_bound(&sq, c(5.0, 0.0)).unwrap();
        assert!((r.closest - c(1.0, 0.0)).norm() < 1e-15);
        assert!((r.delta - 4.0).abs() < 1e-15);
        assert!((r.rho - 2f64.sqrt() / 18f64.sqrt()).abs() < 1e-15);
        assert!(matches!(rho_bound(&sq, c(0.5, 0.5)), Err(Error::InsideHull(_))));
        assert!(rho_bound(&sq, c(1.0, 0.5)).is_err());
    }
}
