//! Subcommand drivers: single runs, convergence studies, diagnostics and
//! data synthesis. Each writes its outputs plus a manifest that echoes the
//! resolved configuration, so a directory can be replayed exactly.

use crate::config::{ConfigError, LoadedConfig};
use crate::data::build_initial_data;
use crate::diagnostics::{all_passed, run_diagnostics, CheckOutcome};
use crate::format::{g17, scalar_to_csv, state_to_csv};
use crate::report::{report_csv, report_svg, study_manifest, write_text};
use crate::study::{run_study, StudyError};
use std::fmt;
use std::path::Path;
use std::time::Instant;
use wavemaps_core::stepper::{evolve, sphere_deviation};
use wavemaps_core::CoreError;

/// Failure of a subcommand, split by process exit code: configuration
/// problems exit 2, failed checks or evolutions exit 1.
#[derive(Debug, Clone, PartialEq)]
pub enum CliFailure {
    Config(String),
    Check(String),
}

impl CliFailure {
    pub fn code(&self) -> i32 {
        match self {
            CliFailure::Config(_) => 2,
            CliFailure::Check(_) => 1,
        }
    }
}

impl fmt::Display for CliFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliFailure::Config(msg) | CliFailure::Check(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<ConfigError> for CliFailure {
    fn from(e: ConfigError) -> Self {
        CliFailure::Config(e.0)
    }
}

impl From<StudyError> for CliFailure {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Invalid(msg) => CliFailure::Config(msg),
            StudyError::Failed(msg) => CliFailure::Check(msg),
        }
    }
}

fn base_manifest(loaded: &LoadedConfig, command: &str) -> toml::Table {
    let mut root = toml::Table::new();
    root.insert("version".into(), toml::Value::String(env!("CARGO_PKG_VERSION").into()));
    root.insert("command".into(), toml::Value::String(command.into()));
    root.insert("config".into(), toml::Value::Table(loaded.resolved.clone()));
    root
}

fn manifest_text(table: toml::Table) -> String {
    toml::to_string_pretty(&toml::Value::Table(table)).expect("manifest tables serialize")
}

/// Evolve once and write snapshots plus a run manifest.
pub fn cmd_run(loaded: &LoadedConfig, out: &Path) -> Result<(), CliFailure> {
    let cfg = &loaded.config;
    let grid = cfg.grid()?;
    let run = cfg.run()?;
    let params = cfg.scheme_params(grid, run.tau, run.t_end)?;
    let data = build_initial_data(cfg, grid)?;
    for warning in &data.warnings {
        eprintln!("warning: {warning}");
    }

    std::fs::create_dir_all(out)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", out.display())))?;

    let mut deviations: Vec<f64> = Vec::with_capacity(params.steps() + 1);
    let mut snapshot_io: Option<ConfigError> = None;
    let t0 = Instant::now();
    let result = evolve(&data.state, &params, |n, state| {
        deviations.push(sphere_deviation(state));
        if run.snapshot_every > 0 && n > 0 && n % run.snapshot_every == 0 {
            let path = out.join(format!("state_{n:06}.csv"));
            if let Err(e) = write_text(&path, &state_to_csv(state)) {
                snapshot_io.get_or_insert(e);
            }
        }
    });
    let wall_ms = t0.elapsed().as_millis() as u64;
    if let Some(e) = snapshot_io {
        return Err(e.into());
    }

    let mut manifest = base_manifest(loaded, "run");
    manifest.insert("data".into(), toml::Value::String(data.label.clone()));
    let mut result_table = toml::Table::new();
    result_table.insert("planned_steps".into(), toml::Value::Integer(params.steps() as i64));
    result_table.insert("wall_ms".into(), toml::Value::Integer(wall_ms as i64));
    result_table.insert(
        "sphere_deviation".into(),
        toml::Value::Array(deviations.iter().map(|&d| toml::Value::Float(d)).collect()),
    );

    match result {
        Ok(final_state) => {
            write_text(&out.join("final_state.csv"), &state_to_csv(&final_state))?;
            result_table.insert("status".into(), toml::Value::String("ok".into()));
            result_table
                .insert("completed_steps".into(), toml::Value::Integer(params.steps() as i64));
            result_table.insert(
                "final_sphere_deviation".into(),
                toml::Value::Float(sphere_deviation(&final_state)),
            );
            manifest.insert("result".into(), toml::Value::Table(result_table));
            write_text(&out.join("run.toml"), &manifest_text(manifest))?;
            println!(
                "run finished: {} steps to t = {}, final sphere deviation {:.3e}",
                params.steps(),
                g17(run.t_end),
                deviations.last().copied().unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Err(CoreError::NonFinite { step, .. }) => {
            let step = step.unwrap_or(0);
            result_table.insert("status".into(), toml::Value::String("blow-up".into()));
            result_table.insert("failed_step".into(), toml::Value::Integer(step as i64));
            manifest.insert("result".into(), toml::Value::Table(result_table));
            write_text(&out.join("run.toml"), &manifest_text(manifest))?;
            Err(CliFailure::Check(format!("evolution blew up at step {step}")))
        }
        Err(e) => Err(CliFailure::Config(e.to_string())),
    }
}

/// Run the configured ladder study and write report, plot and manifest.
pub fn cmd_convergence(
    loaded: &LoadedConfig,
    out: &Path,
    threads: usize,
) -> Result<(), CliFailure> {
    let cfg = &loaded.config;
    let study = cfg.study()?;
    let outcome = run_study(cfg, threads)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }

    write_text(&out.join("report.csv"), &report_csv(&outcome.rows))?;
    if study.svg {
        write_text(&out.join("report.svg"), &report_svg(&outcome.rows, outcome.fit.as_ref()))?;
    }
    write_text(&out.join("manifest.toml"), &study_manifest(&loaded.resolved, &outcome))?;

    match &outcome.fit {
        Some(fit) => println!(
            "convergence: rate {:.4} (residual {:.4}) over {} points",
            fit.slope, fit.residual, fit.used
        ),
        None => println!("convergence: no rate fit ({} rows)", outcome.rows.len()),
    }
    Ok(())
}

/// Run the diagnostics battery, print one line per check, and fail when
/// any non-control check misses its gate.
pub fn cmd_diagnostics(loaded: &LoadedConfig, out: &Path) -> Result<(), CliFailure> {
    let outcomes = run_diagnostics(&loaded.config.diagnostics)?;
    for check in &outcomes {
        println!("{}", check_line(check));
    }

    let mut manifest = base_manifest(loaded, "diagnostics");
    let checks: Vec<toml::Value> = outcomes
        .iter()
        .map(|c| {
            let mut t = toml::Table::new();
            t.insert("name".into(), toml::Value::String(c.name.clone()));
            t.insert("passed".into(), toml::Value::Boolean(c.passed));
            t.insert("control".into(), toml::Value::Boolean(c.control));
            t.insert("detail".into(), toml::Value::String(c.detail.clone()));
            toml::Value::Table(t)
        })
        .collect();
    manifest.insert("check".into(), toml::Value::Array(checks));
    write_text(&out.join("diagnostics.toml"), &manifest_text(manifest))?;

    if all_passed(&outcomes) {
        println!("diagnostics: all {} checks passed", outcomes.len());
        Ok(())
    } else {
        let failing: Vec<&str> = outcomes
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliFailure::Check(format!("diagnostics failed: {}", failing.join(", "))))
    }
}

fn check_line(check: &CheckOutcome) -> String {
    let verdict = if check.passed { "PASS" } else { "FAIL" };
    let tag = if check.control { " [expected-fail control]" } else { "" };
    format!("{verdict} {}{tag}: {}", check.name, check.detail)
}

/// Build the configured initial data and write it out, with the scalar
/// angle profile alongside for geodesic sources.
pub fn cmd_synth(loaded: &LoadedConfig, out: &Path) -> Result<(), CliFailure> {
    let cfg = &loaded.config;
    let grid = cfg.grid()?;
    let data = build_initial_data(cfg, grid)?;
    for warning in &data.warnings {
        eprintln!("warning: {warning}");
    }

    write_text(&out.join("state.csv"), &state_to_csv(&data.state))?;
    if let Some(geodesic) = &data.geodesic {
        write_text(&out.join("theta.csv"), &scalar_to_csv(geodesic.theta0(), "theta"))?;
    }

    let mut manifest = base_manifest(loaded, "synth");
    manifest.insert("data".into(), toml::Value::String(data.label.clone()));
    manifest.insert(
        "seed".into(),
        toml::Value::Integer(cfg.data.seed as i64),
    );
    write_text(&out.join("synth.toml"), &manifest_text(manifest))?;
    println!("synthesized {} at {} grid points", data.label, grid.points());
    Ok(())
}
