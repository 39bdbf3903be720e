use std::path::Path;

use super::run::ReportBundle;
use crate::{Error, Result};

/// Column order of the per-cell CSV.
pub const CSV_COLUMNS: [&str; 19] = [
    "scenario",
    "p",
    "n",
    "status",
    "norm_p",
    "norm_inf",
    "ratio",
    "scaled_ratio",
    "neg_log_norm_over_n",
    "robin_constant",
    "h_n",
    "count_outside_hull",
    "count_outside_pchull",
    "max_gap_count",
    "f_n_max_abs",
    "balayage_deviation",
    "restriction_ratio",
    "root_residual",
    "error",
];

/// Column order of the per-root CSV.
pub const ROOT_COLUMNS: [&str; 7] = ["scenario", "p", "n", "re", "im", "dist_to_hull", "dist_to_pchull"];

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

pub fn write_csv(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(CSV_COLUMNS).map_err(csv_err(path))?;
    let scenario = bundle.config.scenario.to_string();
    let dim = bundle.config.condenser.dim();
    for c in &bundle.cells {
        let norm = c.norm.as_ref();
        let loc = c.localization.as_ref();
        let row = vec![
            scenario.clone(),
            c.p.to_string(),
            c.n.to_string(),
            if c.ok() { "ok" } else { "failed" }.to_string(),
            opt(norm.map(|r| r.norm_p)),
            opt(norm.map(|r| r.norm_inf)),
            opt(norm.map(|r| r.ratio)),
            opt(norm.map(|r| r.scaled_ratio(dim))),
            opt(norm.map(|r| r.neg_log_norm_over_n)),
            num(bundle.equilibrium.robin_constant),
            opt(norm.and_then(|r| r.h_n)),
            loc.map(|l| l.count_outside_hull_fattening.to_string()).unwrap_or_default(),
            loc.map(|l| l.count_outside_pchull_fattening.to_string()).unwrap_or_default(),
            loc.and_then(|l| l.per_gap_counts.iter().max()).map(|k| k.to_string()).unwrap_or_default(),
            opt(c.f_n_max_abs()),
            opt(c.balayage.as_ref().map(|b| b.max_deviation)),
            opt(c.restriction_ratio),
            opt(c.root_residual),
            c.error.clone().unwrap_or_default(),
        ];
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_roots_csv(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(ROOT_COLUMNS).map_err(csv_err(path))?;
    let scenario = bundle.config.scenario.to_string();
    for c in &bundle.cells {
        let Some(loc) = &c.localization else { continue };
        for k in 0..loc.roots.len() {
            w.write_record([
                scenario.clone(),
                c.p.to_string(),
                c.n.to_string(),
                num(loc.roots[k].re),
                num(loc.roots[k].im),
                num(loc.dist_to_hull[k]),
                num(loc.dist_to_pchull[k]),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(bundle).map_err(|e| Error::invalid(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json(path: &Path) -> Result<ReportBundle> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes whichever outputs are requested.
pub fn emit_report(bundle: &ReportBundle, csv_path: Option<&Path>, json_path: Option<&Path>) -> Result<()> {
    if let Some(p) = csv_path {
        write_csv(bundle, p)?;
    }
    if let Some(p) = json_path {
        write_json(bundle, p)?;
    }
    Ok(())
}
