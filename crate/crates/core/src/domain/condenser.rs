use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::extreal::Pair;
use crate::{Error, Result};

/// Closed real interval `[a, b]`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval(pub f64, pub f64);

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Pair::serialize(self.0, self.1, s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (a, b) = Pair::deserialize(d)?;
        Ok(Interval(a, b))
    }
}

impl Interval {
    pub fn is_bounded(&self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
    pub fn contains(&self, x: f64) -> bool {
        x >= self.0 && x <= self.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disc {
    pub fn center(&self) -> C64 {
        C64::new(self.center[0], self.center[1])
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMeasure {
    Arclength,
    Area,
}

/// The closed set carrying the reference measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Condenser {
    Intervals { intervals: Vec<Interval> },
    /// The whole complex plane with area measure.
    Plane {},
    Discs { discs: Vec<Disc> },
    Rectangles { rects: Vec<Rect> },
    Circle { center: [f64; 2], radius: f64 },
    Polyline { points: Vec<[f64; 2]> },
}

impl Condenser {
    pub fn real_line() -> Self {
        Condenser::Intervals {
            intervals: vec![Interval(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Condenser::Intervals {
            intervals: vec![Interval(a, b)],
        }
    }

    pub fn disc(center: C64, radius: f64) -> Self {
        Condenser::Discs {
            discs: vec![Disc {
                center: [center.re, center.im],
                radius,
            }],
        }
    }

    pub fn unit_circle() -> Self {
        Condenser::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    /// Hausdorff dimension of the set: 1 for curves and lines, 2 for regions.
    pub fn dim(&self) -> usize {
        match self {
            Condenser::Intervals { .. } | Condenser::Circle { .. } | Condenser::Polyline { .. } => 1,
            Condenser::Plane {} | Condenser::Discs { .. } | Condenser::Rectangles { .. } => 2,
        }
    }

    pub fn reference_measure(&self) -> ReferenceMeasure {
        if self.dim() == 1 {
            ReferenceMeasure::Arclength
        } else {
            ReferenceMeasure::Area
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Condenser::Intervals { intervals } => intervals.iter().all(Interval::is_bounded),
            Condenser::Plane {} => false,
            _ => true,
        }
    }

    /// True when every point of the set is real.
    pub fn is_real(&self) -> bool {
        matches!(self, Condenser::Intervals { .. })
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        match self {
            Condenser::Intervals { intervals } => {
                z.im.abs() <= tol && intervals.iter().any(|iv| z.re >= iv.0 - tol && z.re <= iv.1 + tol)
            }
            Condenser::Plane {} => true,
            Condenser::Discs { discs } => discs.iter().any(|d| (z - d.center()).norm() <= d.radius + tol),
            Condenser::Rectangles { rects } => rects.iter().any(|r| {
                z.re >= r.x[0] - tol && z.re <= r.x[1] + tol && z.im >= r.y[0] - tol && z.im <= r.y[1] + tol
            }),
            Condenser::Circle { center, radius } => {
                ((z - C64::new(center[0], center[1])).norm() - radius).abs() <= tol
            }
            Condenser::Polyline { points } => points.windows(2).any(|s| {
                let a = C64::new(s[0][0], s[0][1]);
                let b = C64::new(s[1][0], s[1][1]);
                segment_distance(z, a, b) <= tol
            }),
        }
    }

    /// Checks well-formedness and pairwise disjointness of components.
    pub fn validate(&self) -> Result<()> {
        match self {
            Condenser::Intervals { intervals } => {
                if intervals.is_empty() {
                    return Err(Error::invalid("condenser needs at least one interval"));
                }
                for iv in intervals {
                    if iv.0.is_nan() || iv.1.is_nan() || iv.0 >= iv.1 {
                        return Err(Error::invalid(format!("interval [{}, {}] is empty or malformed", iv.0, iv.1)));
                    }
                }
                let mut sorted = intervals.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in sorted.windows(2) {
                    if w[1].0 <= w[0].1 {
                        return Err(Error::invalid("condenser intervals overlap or touch"));
                    }
                }
            }
            Condenser::Plane {} => {}
            Condenser::Discs { discs } => {
                if discs.is_empty() {
                    return Err(Error::invalid("condenser needs at least one disc"));
                }
                for d in discs {
                    if !(d.radius > 0.0 && d.radius.is_finite()) {
                        return Err(Error::invalid("disc radius must be positive and finite"));
                    }
                }
                for i in 0..discs.len() {
                    for j in i + 1..discs.len() {
                        if (discs[i].center() - discs[j].center()).norm() <= discs[i].radius + discs[j].radius {
                            return Err(Error::invalid("condenser discs overlap or touch"));
                        }
                    }
                }
            }
            Condenser::Rectangles { rects } => {
                if rects.is_empty() {
                    return Err(Error::invalid("condenser needs at least one rectangle"));
                }
                for r in rects {
                    if !(r.x[0] < r.x[1] && r.y[0] < r.y[1]) || r.x.iter().chain(&r.y).any(|v| !v.is_finite()) {
                        return Err(Error::invalid("rectangle bounds must be finite and increasing"));
                    }
                }
                for i in 0..rects.len() {
                    for j in i + 1..rects.len() {
                        let (a, b) = (rects[i], rects[j]);
                        let sep = a.x[1] < b.x[0] || b.x[1] < a.x[0] || a.y[1] < b.y[0] || b.y[1] < a.y[0];
                        if !sep {
                            return Err(Error::invalid("condenser rectangles overlap or touch"));
                        }
                    }
                }
            }
            Condenser::Circle { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid("circle radius must be positive and finite"));
                }
            }
            Condenser::Polyline { points } => {
                if points.len() < 2 {
                    return Err(Error::invalid("polyline needs at least two points"));
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("polyline vertices must be finite"));
                }
                if points.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::invalid("polyline has a zero-length segment"));
                }
            }
        }
        Ok(())
    }
}

/// Distance from `z` to the segment `[a, b]`.
pub fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let t = ((z - a) * d.conj()).re / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_follow_variant() {
        assert_eq!(Condenser::real_line().dim(), 1);
        assert_eq!(Condenser::unit_circle().dim(), 1);
        assert_eq!(Condenser::Plane {}.dim(), 2);
        assert_eq!(Condenser::disc(C64::new(0.0, 0.0), 1.0).reference_measure(), ReferenceMeasure::Area);
        assert!(!Condenser::real_line().is_bounded());
        assert!(Condenser::interval(-1.0, 1.0).is_bounded());
    }

    #[test]
    fn overlapping_components_rejected() {
        let c = Condenser::Intervals {
            intervals: vec![Interval(0.0, 2.0), Interval(1.0, 3.0)],
        };
        assert!(c.validate().is_err());
        let d = Condenser::Discs {
            discs: vec![
                Disc { center: [0.0, 0.0], radius: 1.0 },
                Disc { center: [1.5, 0.0], radius: 1.0 },
            ],
        };
        assert!(d.validate().is_err());
        assert!(Condenser::interval(1.0, -1.0).validate().is_err());
        let ok = Condenser::Intervals {
            intervals: vec![Interval(-2.0, -1.0), Interval(1.0, 2.0)],
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn json_accepts_infinite_bounds() {
        let c: Condenser = serde_json::from_str(r#"{"kind":"intervals","intervals":[["-inf","inf"]]}"#).unwrap();
        assert_eq!(c, Condenser::real_line());
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"-inf\""));
        assert!(serde_json::from_str::<Condenser>(r#"{"kind":"plane","extra":1}"#).is_err());
    }

    #[test]
    fn membership() {
        let p = Condenser::Polyline {
            points: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
        };
        assert!(p.contains(C64::new(1.0, 0.5), 1e-12));
        assert!(!p.contains(C64::new(0.5, 0.5), 1e-3));
        assert!(Condenser::unit_circle().contains(C64::new(0.0, 1.0), 1e-12));
    }
}
