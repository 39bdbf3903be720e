//! Scenario configuration, the experiment pipeline and report output.

mod checks;
mod config;
mod report;
mod run;

pub use checks::evaluate_checks;
pub use config::{load_config, ScenarioConfig, ScenarioName, Thresholds, Tolerances};
pub use report::{emit_report, num, read_json, write_csv, write_json, write_roots_csv, CSV_COLUMNS, ROOT_COLUMNS};
pub use run::{
    equilibrium_stage, run_scenario, solve_cell_polynomial, CellReport, Check, EquilibriumSummary, FnValue,
    ReportBundle, Stage,
};
