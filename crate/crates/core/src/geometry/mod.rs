//! Roots, convex hulls, the contraction bound and root localization.

mod hull;
mod localization;
mod roots;

pub use hull::{convex_hull, rho_bound, Degeneracy, HullGeometry, RhoBound};
pub use localization::{report_with_geometry, root_localization_report, RootLocalizationReport, SupportGeometry};
pub use roots::{find_roots, RootSet};
