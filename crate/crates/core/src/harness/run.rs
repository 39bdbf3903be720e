use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::evaluate_checks;
use super::config::{ScenarioConfig, ScenarioName};
use crate::domain::{
    build_quadrature, check_admissibility, AdmissibilityReport, GridRule, QuadratureOptions, QuadratureScheme,
    DEFAULT_PROBE_RADII,
};
use crate::equilibrium::{solve_equilibrium, EquilibriumOptions, EquilibriumResult};
use crate::geometry::{find_roots, report_with_geometry, RootLocalizationReport, SupportGeometry};
use crate::lpopt::{
    build_basis, gram_solve_p2, irls_solve, lawson_solve_inf, weighted_norm, MonicPolynomial, NormReport, PNorm,
    PolySummary, SolveOptions, SolveStatus,
};
use crate::potential::{
    balayage_moments, f_n_functional, fit_restriction, greens_domain_for, restriction_excess, BalayageMoments,
    GreensDomain, RestrictionFit,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub robin_constant: f64,
    pub energy: f64,
    pub support_extent: (f64, f64),
    pub support_radius: f64,
    pub nodes: usize,
    pub support_nodes: usize,
    pub truncation: Option<f64>,
    pub converged: bool,
    pub kkt_residual: f64,
    pub kkt_tol: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl EquilibriumSummary {
    fn new(eq: &EquilibriumResult, grid: &QuadratureScheme) -> Self {
        EquilibriumSummary {
            robin_constant: eq.robin_constant,
            energy: eq.energy,
            support_extent: eq.support_extent(),
            support_radius: eq.support_radius(),
            nodes: grid.len(),
            support_nodes: eq.support.len(),
            truncation: grid.truncation,
            converged: eq.converged,
            kkt_residual: eq.kkt_residual(),
            kkt_tol: eq.kkt_tol,
            gap: eq.gap,
            iterations: eq.iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnValue {
    pub z: C64,
    /// `None` when `z` is within `eps` of the support hull.
    pub value: Option<f64>,
}

/// Everything computed for one `(p, n)` pair. Stages after a failure are
/// left empty and the failure is recorded in `error`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub p: PNorm,
    pub n: usize,
    pub error: Option<String>,
    pub method: Option<String>,
    pub solver_status: Option<SolveStatus>,
    pub iterations: usize,
    pub grid_nodes: usize,
    pub norm: Option<NormReport>,
    pub poly: Option<PolySummary>,
    pub root_residual: Option<f64>,
    pub root_sweeps: Option<usize>,
    pub localization: Option<RootLocalizationReport>,
    pub f_n: Vec<FnValue>,
    pub balayage: Option<BalayageMoments>,
    pub restriction_ratio: Option<f64>,
    pub restriction_excess: Option<f64>,
}

impl CellReport {
    fn empty(p: PNorm, n: usize) -> Self {
        CellReport {
            p,
            n,
            error: None,
            method: None,
            solver_status: None,
            iterations: 0,
            grid_nodes: 0,
            norm: None,
            poly: None,
            root_residual: None,
            root_sweeps: None,
            localization: None,
            f_n: Vec::new(),
            balayage: None,
            restriction_ratio: None,
            restriction_excess: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    /// Largest `|f_n|` over the evaluated test points.
    pub fn f_n_max_abs(&self) -> Option<f64> {
        self.f_n.iter().filter_map(|f| f.value).map(f64::abs).reduce(f64::max)
    }
}

/// Single pass/fail entry. `value` and `threshold` are the raw numbers the
/// decision was made on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub p: Option<PNorm>,
    pub n: Option<usize>,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub config: ScenarioConfig,
    pub admissibility: AdmissibilityReport,
    pub equilibrium: EquilibriumSummary,
    pub support: SupportGeometry,
    pub greens_domain: Option<GreensDomain>,
    pub cells: Vec<CellReport>,
    pub restriction: Vec<RestrictionFit>,
    pub checks: Vec<Check>,
}

impl ReportBundle {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn cell(&self, p: PNorm, n: usize) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.p == p && c.n == n)
    }

    /// Rebuilds the check matrix from the stored raw values.
    pub fn recompute_checks(&self) -> Vec<Check> {
        evaluate_checks(self)
    }
}

/// The smallest finite p of the run, which has the heaviest tails.
fn reference_p(cfg: &ScenarioConfig) -> f64 {
    cfg.p.iter().filter(|p| !p.is_inf()).map(|p| p.value()).fold(f64::INFINITY, f64::min).min(2.0)
}

/// Grid, equilibrium and support shared by all cells of a run.
pub struct Stage {
    pub admissibility: AdmissibilityReport,
    pub grid: QuadratureScheme,
    pub eq: EquilibriumResult,
    pub support: SupportGeometry,
    pub greens_domain: Option<GreensDomain>,
}

pub fn equilibrium_stage(cfg: &ScenarioConfig) -> Result<Stage> {
    let admissibility = check_admissibility(&cfg.potential, &cfg.condenser, &DEFAULT_PROBE_RADII, cfg.admissibility_threshold)?;
    if !admissibility.pass {
        return Err(Error::Admissibility(format!(
            "growth margins {:?} do not exceed {}",
            admissibility.margins, admissibility.threshold
        )));
    }
    let opts = QuadratureOptions {
        rule: GridRule::Uniform,
        p_ref: reference_p(cfg),
        ..QuadratureOptions::uniform()
    };
    let grid = build_quadrature(&cfg.condenser, &cfg.potential, cfg.equilibrium_n, cfg.equilibrium_resolution, &opts)?;
    let eq = solve_equilibrium(
        &grid,
        &cfg.potential,
        &EquilibriumOptions {
            tol: cfg.tolerances.equilibrium,
            ..EquilibriumOptions::default()
        },
    )?;
    log::info!(
        "equilibrium: {} nodes, F_w = {:.6}, {} support nodes",
        grid.len(),
        eq.robin_constant,
        eq.support.len()
    );
    let support = SupportGeometry::from_equilibrium(&eq)?;
    if cfg.scenario == ScenarioName::QuarticTwoCut && support.fills.len() != 2 {
        return Err(Error::Config {
            path: "scenario".into(),
            message: format!(
                "quartic_two_cut found {} support components instead of 2; refine equilibrium_resolution",
                support.fills.len()
            ),
        });
    }
    let greens_domain = greens_domain_for(&support);
    if greens_domain.is_none() {
        log::warn!("support has {} components; f_n gets no Green correction", support.fills.len());
    }
    Ok(Stage {
        admissibility,
        grid,
        eq,
        support,
        greens_domain,
    })
}

/// Optimal polynomial for one `(p, n)` on `grid`.
pub fn solve_cell_polynomial(
    cfg: &ScenarioConfig,
    grid: &QuadratureScheme,
    p: PNorm,
    n: usize,
) -> Result<(MonicPolynomial, &'static str, SolveStatus, usize)> {
    let opts = SolveOptions {
        tol: cfg.tolerances.irls,
        ..SolveOptions::default()
    };
    match p {
        PNorm::Finite(q) if q == 2.0 => {
            let (poly, _) = gram_solve_p2(grid, &cfg.potential, n)?;
            Ok((poly, "gram", SolveStatus::Converged, 0))
        }
        PNorm::Finite(q) => {
            let basis = build_basis(grid, &cfg.potential, n, n, None)?;
            let s = irls_solve(&basis, n, q, &opts)?;
            Ok((s.poly, "irls", s.status, s.iterations))
        }
        PNorm::Inf => {
            let basis = build_basis(grid, &cfg.potential, n, n, None)?;
            let s = lawson_solve_inf(&basis, n, &opts)?;
            Ok((s.poly, "lawson", s.status, s.iterations))
        }
    }
}

fn run_cell(cfg: &ScenarioConfig, stage: &Stage, grid: &std::result::Result<QuadratureScheme, String>, p: PNorm, n: usize) -> CellReport {
    let mut cell = CellReport::empty(p, n);
    let grid = match grid {
        Ok(g) => g,
        Err(e) => {
            cell.error = Some(e.clone());
            return cell;
        }
    };
    cell.grid_nodes = grid.len();
    if let Err(e) = fill_cell(&mut cell, cfg, stage, grid) {
        log::warn!("cell p = {p}, n = {n} failed: {e}");
        cell.error = Some(e.to_string());
    }
    cell
}

fn fill_cell(cell: &mut CellReport, cfg: &ScenarioConfig, stage: &Stage, grid: &QuadratureScheme) -> Result<()> {
    let (p, n) = (cell.p, cell.n);
    let (poly, method, status, iterations) = solve_cell_polynomial(cfg, grid, p, n)?;
    cell.method = Some(method.to_string());
    cell.solver_status = Some(status);
    cell.iterations = iterations;
    cell.poly = Some(poly.summary());
    cell.norm = Some(weighted_norm(&poly, grid, &cfg.potential, p, n)?);

    let inside: Vec<bool> = grid.nodes.iter().map(|z| stage.support.dist_to_pchull(*z) <= cfg.fattening).collect();
    let (ratio, excess) = restriction_excess(&poly, n, grid, &cfg.potential, p, &inside)?;
    cell.restriction_ratio = Some(ratio);
    cell.restriction_excess = Some(excess);

    let roots = find_roots(&poly, cfg.tolerances.root)?;
    cell.root_residual = Some(roots.max_residual());
    cell.root_sweeps = Some(roots.sweeps);
    let loc = report_with_geometry(&roots.roots, &stage.support, cfg.eps);
    cell.f_n = cfg
        .test_points
        .iter()
        .map(|&z| {
            let value = if stage.support.dist_to_hull(z) <= cfg.eps {
                None
            } else {
                Some(f_n_functional(
                    &poly,
                    &roots.roots,
                    &stage.eq,
                    &stage.support,
                    stage.greens_domain.as_ref(),
                    z,
                    cfg.eps,
                )?)
            };
            Ok(FnValue { z, value })
        })
        .collect::<Result<_>>()?;
    cell.balayage = Some(balayage_moments(&loc.counting_measure, &stage.eq, cfg.j_max)?);
    cell.localization = Some(loc);
    Ok(())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let stage = equilibrium_stage(cfg)?;
    let opts = QuadratureOptions {
        p_ref: reference_p(cfg),
        ..QuadratureOptions::default()
    };
    let grids: Vec<std::result::Result<QuadratureScheme, String>> = cfg
        .n
        .par_iter()
        .map(|&n| build_quadrature(&cfg.condenser, &cfg.potential, n, cfg.resolution, &opts).map_err(|e| e.to_string()))
        .collect();
    let pairs: Vec<(usize, PNorm, usize)> = cfg
        .p
        .iter()
        .flat_map(|&p| cfg.n.iter().enumerate().map(move |(k, &n)| (k, p, n)))
        .collect();
    let cells: Vec<CellReport> = pairs
        .par_iter()
        .map(|&(k, p, n)| run_cell(cfg, &stage, &grids[k], p, n))
        .collect();
    let restriction = cfg
        .p
        .iter()
        .map(|&p| {
            let (ns, rs): (Vec<usize>, Vec<(f64, f64)>) = cells
                .iter()
                .filter(|c| c.p == p)
                .filter_map(|c| Some((c.n, (c.restriction_ratio?, c.restriction_excess?))))
                .unzip();
            fit_restriction(cfg.fattening, p, ns, rs)
        })
        .collect();
    let mut bundle = ReportBundle {
        config: cfg.clone(),
        admissibility: stage.admissibility.clone(),
        equilibrium: EquilibriumSummary::new(&stage.eq, &stage.grid),
        support: stage.support.clone(),
        greens_domain: stage.greens_domain.clone(),
        cells,
        restriction,
        checks: Vec::new(),
    };
    bundle.checks = evaluate_checks(&bundle);
    Ok(bundle)
}
