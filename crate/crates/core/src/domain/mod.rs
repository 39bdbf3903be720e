//! Potentials, condensers, discrete measures and quadrature grids.

mod admissibility;
mod condenser;
mod extreal;
mod measure;
mod potential;
pub mod quadrature;

pub use admissibility::{check_admissibility, AdmissibilityReport, DEFAULT_MARGIN, DEFAULT_PROBE_RADII};
pub use condenser::{segment_distance as condenser_segment_distance, Condenser, Disc, Interval, Rect, ReferenceMeasure};
pub use extreal::ext_real;
pub use measure::DiscreteMeasure;
pub use potential::{PolyTerm, Potential, PotentialKind};
pub use quadrature::{build_quadrature, GridRule, QuadratureOptions, QuadratureScheme};
