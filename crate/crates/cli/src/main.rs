use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use wpl_core::harness::{
    emit_report, equilibrium_stage, load_config, run_scenario, write_roots_csv, ReportBundle, ScenarioConfig,
    ScenarioName,
};

/// Weighted equilibrium measures and L^p-optimal polynomials.
#[derive(Parser, Debug)]
#[command(name = "wpl", version)]
struct Cli {
    /// JSON scenario config.
    #[arg(long, global = true, env = "WPL_CONFIG")]
    config: Option<PathBuf>,

    /// Built-in scenario, used when no config is given.
    #[arg(long, global = true, env = "WPL_PRESET")]
    preset: Option<String>,

    #[arg(long, global = true, env = "WPL_OUT_JSON")]
    out_json: Option<PathBuf>,

    #[arg(long, global = true, env = "WPL_OUT_CSV")]
    out_csv: Option<PathBuf>,

    /// Worker threads for the (p, n) pool; 0 picks the core count.
    #[arg(long, global = true, env = "WPL_THREADS", default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true, env = "WPL_LOG_LEVEL", default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the equilibrium problem and print F_w and the support.
    Equilibrium,
    /// Solve every (p, n) cell and print the norm table.
    Optimize,
    /// Print the roots of every optimal polynomial.
    Roots {
        /// Per-root CSV output.
        #[arg(long, env = "WPL_OUT_ROOTS_CSV")]
        out_roots_csv: Option<PathBuf>,
    },
    /// Run the scenario and print the pass/fail matrix.
    Verify,
    /// Run the scenario and write the JSON and CSV reports.
    Report,
}

fn scenario(cli: &Cli) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => {
            let name = ScenarioName::parse(name)?;
            if name == ScenarioName::Custom {
                bail!("the custom scenario needs --config");
            }
            ScenarioConfig::preset(name)
        }
        (None, None) => bail!("give --config <file> or --preset <name>"),
    };
    if cli.out_json.is_some() {
        cfg.out_json = cli.out_json.clone();
    }
    if cli.out_csv.is_some() {
        cfg.out_csv = cli.out_csv.clone();
    }
    Ok(cfg)
}

fn print_checks(b: &ReportBundle) {
    for c in &b.checks {
        let p = c.p.map(|p| format!(" p={p}")).unwrap_or_default();
        let n = c.n.map(|n| format!(" n={n}")).unwrap_or_default();
        println!(
            "{} {}{p}{n}: value {:.4e}, threshold {:.4e} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            c.detail
        );
    }
    let failed = b.failures().count();
    println!("{} of {} checks passed", b.checks.len() - failed, b.checks.len());
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = scenario(&cli)?;
    match &cli.command {
        Command::Equilibrium => {
            let st = equilibrium_stage(&cfg)?;
            let (lo, hi) = st.eq.support_extent();
            println!("scenario {}", cfg.scenario);
            println!("nodes {} support nodes {}", st.grid.len(), st.eq.support.len());
            println!("F_w {:.10}", st.eq.robin_constant);
            println!("support real extent [{lo:.6}, {hi:.6}], radius {:.6}", st.eq.support_radius());
            println!("components {}", st.support.fills.len());
            println!("kkt residual {:.3e} (tolerance {:.3e})", st.eq.kkt_residual(), st.eq.kkt_tol);
            Ok(status(st.eq.kkt_satisfied()))
        }
        Command::Optimize => {
            let b = run_scenario(&cfg)?;
            println!("p,n,method,status,norm_p,neg_log_norm_over_n,F_w");
            for c in &b.cells {
                match &c.norm {
                    Some(r) => println!(
                        "{},{},{},{:?},{:.6e},{:.6},{:.6}",
                        c.p,
                        c.n,
                        c.method.as_deref().unwrap_or(""),
                        c.solver_status,
                        r.norm_p,
                        r.neg_log_norm_over_n,
                        b.equilibrium.robin_constant
                    ),
                    None => println!("{},{},failed: {}", c.p, c.n, c.error.as_deref().unwrap_or("")),
                }
            }
            emit_report(&b, cfg.out_csv.as_deref(), cfg.out_json.as_deref())?;
            Ok(status(b.cells.iter().all(|c| c.ok())))
        }
        Command::Roots { out_roots_csv } => {
            let b = run_scenario(&cfg)?;
            for c in &b.cells {
                let Some(loc) = &c.localization else {
                    println!("p={} n={}: failed: {}", c.p, c.n, c.error.as_deref().unwrap_or(""));
                    continue;
                };
                println!(
                    "p={} n={}: outside hull {}, outside filled support {}, per gap {:?}",
                    c.p, c.n, loc.count_outside_hull_fattening, loc.count_outside_pchull_fattening, loc.per_gap_counts
                );
                for z in &loc.roots {
                    println!("  {:+.12e} {:+.12e}i", z.re, z.im);
                }
            }
            if let Some(path) = out_roots_csv.as_ref().or(cfg.out_roots_csv.as_ref()) {
                write_roots_csv(&b, path)?;
            }
            Ok(status(b.cells.iter().all(|c| c.ok())))
        }
        Command::Verify => {
            let b = run_scenario(&cfg)?;
            print_checks(&b);
            Ok(status(b.all_pass()))
        }
        Command::Report => {
            let b = run_scenario(&cfg)?;
            if cfg.out_json.is_none() && cfg.out_csv.is_none() {
                bail!("report needs --out-json or --out-csv (or out_json / out_csv in the config)");
            }
            emit_report(&b, cfg.out_csv.as_deref(), cfg.out_json.as_deref())?;
            if let Some(path) = &cfg.out_roots_csv {
                write_roots_csv(&b, path)?;
            }
            print_checks(&b);
            Ok(status(b.all_pass()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
