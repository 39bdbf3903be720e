use super::config::ScenarioName;
use super::run::{CellReport, Check, ReportBundle};
use crate::lpopt::PNorm;

/// Relative slack for "non-increasing" comparisons.
const MONO_SLACK: f64 = 1e-9;

fn check(name: &str, p: Option<PNorm>, n: Option<usize>, value: f64, threshold: f64, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        p,
        n,
        pass,
        value,
        threshold,
        detail,
    }
}

/// `value <= threshold`.
fn at_most(name: &str, p: Option<PNorm>, n: Option<usize>, value: f64, threshold: f64, detail: String) -> Check {
    check(name, p, n, value, threshold, value <= threshold, detail)
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONO_SLACK) + 1e-15)
}

fn fmt_series(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Builds the pass/fail matrix from the raw numbers stored in the bundle.
pub fn evaluate_checks(b: &ReportBundle) -> Vec<Check> {
    let cfg = &b.config;
    let th = &cfg.thresholds;
    let eq = &b.equilibrium;
    let f_w = eq.robin_constant;
    let mut out = Vec::new();

    out.push(at_most(
        "equilibrium_kkt",
        None,
        None,
        eq.kkt_residual,
        eq.kkt_tol,
        format!("gap {:.3e} after {} iterations", eq.gap, eq.iterations),
    ));
    let oracle = match cfg.scenario {
        ScenarioName::Hermite => Some((0.5 * 2f64.ln() + 0.5, 1e-2)),
        ScenarioName::PlanarGauss => Some(((1.0 + 2f64.ln()) / 2.0, 1e-2)),
        ScenarioName::ChebyshevUnweighted => Some((2f64.ln(), 1e-2)),
        _ => None,
    };
    if let Some((exact, tol)) = oracle {
        out.push(at_most(
            "robin_constant_oracle",
            None,
            None,
            (f_w - exact).abs(),
            tol,
            format!("F_w = {f_w:.6}, closed form {exact:.6}"),
        ));
    }
    if cfg.scenario == ScenarioName::PlanarGauss {
        let r = 0.5f64.sqrt();
        out.push(at_most(
            "support_radius_oracle",
            None,
            None,
            (eq.support_radius - r).abs(),
            0.02,
            format!("radius {:.4}, closed form {r:.4}", eq.support_radius),
        ));
    }

    for c in &b.cells {
        if let Some(e) = &c.error {
            out.push(check("cell", Some(c.p), Some(c.n), 1.0, 0.0, false, e.clone()));
        }
    }

    let n_max = cfg.n.last().copied();
    let mut final_levels = Vec::new();
    for &p in &cfg.p {
        let cells: Vec<&CellReport> = b.cells.iter().filter(|c| c.p == p && c.ok()).collect();
        let ns: Vec<usize> = cells.iter().map(|c| c.n).collect();
        let last = cells.last().filter(|c| Some(c.n) == n_max);

        if let (Some(tol), Some(c)) = (th.norm_limit, last) {
            let nl = c.norm.as_ref().map_or(f64::INFINITY, |r| r.neg_log_norm_over_n);
            final_levels.push(nl);
            out.push(at_most(
                "norm_limit",
                Some(p),
                Some(c.n),
                (nl - f_w).abs(),
                tol,
                format!("-(1/n) ln norm = {nl:.6}, F_w = {f_w:.6}"),
            ));
        }
        if let Some(frac) = th.ratio_floor {
            let sr: Vec<f64> = cells
                .iter()
                .filter_map(|c| c.norm.as_ref().map(|r| r.scaled_ratio(b.config.condenser.dim())))
                .collect();
            if let Some(&first) = sr.first() {
                let min = sr.iter().cloned().fold(f64::INFINITY, f64::min);
                out.push(check(
                    "ratio_floor",
                    Some(p),
                    None,
                    min,
                    frac * first,
                    min >= frac * first && min > 0.0,
                    format!("ratio n^(d/p) over n = {ns:?}: {}", fmt_series(&sr)),
                ));
            }
        }
        if th.localization && !cells.is_empty() {
            let counts: Vec<f64> = cells
                .iter()
                .map(|c| c.localization.as_ref().map_or(f64::INFINITY, |l| l.count_outside_hull_fattening as f64))
                .collect();
            let end = *counts.last().unwrap();
            out.push(check(
                "localization",
                Some(p),
                None,
                end,
                0.0,
                end == 0.0 && non_increasing(&counts),
                format!("roots beyond eps = {} of the hull over n = {ns:?}: {counts:?}", cfg.eps),
            ));
        }
        if let Some(cap) = th.max_per_gap {
            let worst = cells
                .iter()
                .filter_map(|c| c.localization.as_ref())
                .flat_map(|l| l.per_gap_counts.iter().copied())
                .max()
                .unwrap_or(0);
            out.push(at_most(
                "gap_count",
                Some(p),
                None,
                worst as f64,
                cap as f64,
                format!("{} gap(s), largest count {worst}", b.support.gaps.len()),
            ));
        }
        f_n_checks(b, p, &cells, &mut out);
        balayage_checks(b, p, &cells, &mut out);
        if let Some(tol) = th.root_residual {
            let worst = cells.iter().filter_map(|c| c.root_residual).fold(0.0, f64::max);
            out.push(at_most("root_residual", Some(p), None, worst, tol, "largest relative Newton correction".into()));
        }
        if th.restriction {
            if let Some(fit) = b.restriction.iter().find(|f| f.p == p) {
                let min = fit.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                let pass = fit.ratios_ok() && fit.decaying();
                out.push(check(
                    "restriction",
                    Some(p),
                    None,
                    fit.c.unwrap_or(0.0),
                    0.0,
                    pass,
                    format!("status {:?}, min ratio {min:.6}, ratios {}", fit.status, fmt_series(&fit.ratios)),
                ));
            }
        }
        oracle_cells(b, p, &cells, &mut out);
    }
    if let (Some(tol), true) = (th.p_spread, final_levels.len() >= 2) {
        let hi = final_levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = final_levels.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(at_most(
            "p_spread",
            None,
            n_max,
            hi - lo,
            tol,
            format!("levels {}", fmt_series(&final_levels)),
        ));
    }
    out
}

fn f_n_checks(b: &ReportBundle, p: PNorm, cells: &[&CellReport], out: &mut Vec<Check>) {
    let th = &b.config.thresholds;
    let pts = b.config.test_points.len();
    let series: Vec<Vec<f64>> = (0..pts)
        .map(|k| {
            cells
                .iter()
                .map(|c| c.f_n.get(k).and_then(|f| f.value).map_or(f64::NAN, f64::abs))
                .collect()
        })
        .filter(|s: &Vec<f64>| s.iter().all(|x| x.is_finite()) && !s.is_empty())
        .collect();
    if series.is_empty() {
        return;
    }
    let last = series.iter().map(|s| *s.last().unwrap()).fold(0.0, f64::max);
    let n_last = cells.last().map(|c| c.n);
    if let Some(tol) = th.f_n_final {
        out.push(at_most("f_n_final", Some(p), n_last, last, tol, "largest |f_n| at the last n".into()));
    }
    if th.f_n_monotone {
        let bad = series.iter().filter(|s| !non_increasing(s)).count();
        out.push(check(
            "f_n_monotone",
            Some(p),
            None,
            bad as f64,
            0.0,
            bad == 0,
            format!("test points with increasing |f_n|: {bad} of {}", series.len()),
        ));
    }
    if let Some(tol) = th.f_n_all {
        let all = series.iter().flatten().cloned().fold(0.0, f64::max);
        out.push(at_most("f_n_all", Some(p), None, all, tol, "largest |f_n| over all n".into()));
    }
}

fn balayage_checks(b: &ReportBundle, p: PNorm, cells: &[&CellReport], out: &mut Vec<Check>) {
    let th = &b.config.thresholds;
    let dev: Vec<f64> = cells.iter().filter_map(|c| c.balayage.as_ref().map(|m| m.max_deviation)).collect();
    if dev.is_empty() {
        return;
    }
    let detail = format!("moment deviations (j <= {}): {}", b.config.j_max, fmt_series(&dev));
    if let Some(tol) = th.balayage_final {
        out.push(at_most("balayage_final", Some(p), cells.last().map(|c| c.n), *dev.last().unwrap(), tol, detail.clone()));
    }
    if th.balayage_monotone {
        out.push(check("balayage_monotone", Some(p), None, 0.0, 0.0, non_increasing(&dev), detail.clone()));
    }
    if let Some(tol) = th.balayage_all {
        let worst = dev.iter().cloned().fold(0.0, f64::max);
        out.push(at_most("balayage_all", Some(p), None, worst, tol, detail));
    }
}

/// Closed-form values for presets whose optimal polynomials are known.
fn oracle_cells(b: &ReportBundle, p: PNorm, cells: &[&CellReport], out: &mut Vec<Check>) {
    match (b.config.scenario, p) {
        (ScenarioName::PlanarGauss, PNorm::Finite(q)) if q == 2.0 => {
            for c in cells {
                let (Some(norm), Some(poly)) = (&c.norm, &c.poly) else { continue };
                let n = c.n;
                let lower = poly.monomial[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
                out.push(at_most("monomial_p2", Some(p), Some(n), lower, 1e-8, "largest non-leading coefficient".into()));
                if n <= 15 {
                    let nf = n as f64;
                    let ln_h = 0.5 * (std::f64::consts::PI.ln() + ln_factorial(n) - (nf + 1.0) * (2.0 * nf).ln());
                    let rel = (norm.ln_norm_p - ln_h).exp_m1().abs();
                    out.push(at_most("h_n_oracle", Some(p), Some(n), rel, 1e-6, format!("closed form {:.10e}", ln_h.exp())));
                }
            }
        }
        (ScenarioName::ChebyshevUnweighted, PNorm::Inf) => {
            for c in cells {
                let Some(norm) = &c.norm else { continue };
                let exact = 2f64.powi(1 - c.n as i32);
                let rel = (norm.norm_inf - exact).abs() / exact;
                out.push(at_most("chebyshev_norm", Some(p), Some(c.n), rel, 1e-4, format!("closed form 2^(1-n) = {exact:.6e}")));
            }
        }
        _ => {}
    }
}
