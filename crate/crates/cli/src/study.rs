//! Convergence studies: run the scheme across a step-size ladder against a
//! reference solution and fit the observed rate.
//!
//! Ladder points are independent and run concurrently on a small worker
//! pool; every number is computed identically regardless of scheduling, so
//! reports are reproducible bit for bit.

use crate::config::{ConfigError, Reference, RunConfig, StudySection};
use crate::data::{build_initial_data, BuiltData};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use wavemaps_core::oracle::rk4_reference;
use wavemaps_core::propagator::StatePair;
use wavemaps_core::rate::{fit_rate, RateFit};
use wavemaps_core::refsol::geodesic_state;
use wavemaps_core::spectral::field_difference;
use wavemaps_core::stepper::{evolve, sphere_deviation, SchemeParams};
use wavemaps_core::CoreError;

/// Study-stage failure, split by exit class: `Invalid` is a configuration
/// problem, `Failed` means a reference computation did not finish.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyError {
    Invalid(String),
    Failed(String),
}

impl fmt::Display for StudyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyError::Invalid(msg) | StudyError::Failed(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for StudyError {}

impl From<ConfigError> for StudyError {
    fn from(e: ConfigError) -> Self {
        StudyError::Invalid(e.0)
    }
}

fn core_error(e: CoreError) -> StudyError {
    match e {
        CoreError::NonFinite { .. } => StudyError::Failed(e.to_string()),
        _ => StudyError::Invalid(e.to_string()),
    }
}

/// How one ladder point ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    /// Completed and measured against the reference.
    Ok,
    /// This run *is* the reference; its error reads exactly zero and the
    /// row is excluded from the rate fit.
    Reference,
    /// A non-finite value appeared at the recorded step.
    Blowup { step: usize },
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Reference => "reference",
            RowStatus::Blowup { .. } => "blow-up",
        }
    }
}

/// One ladder point of a convergence study.
#[derive(Debug, Clone)]
pub struct LadderRow {
    pub tau: f64,
    /// Position error in `H^{s1}`.
    pub err_u: f64,
    /// Velocity error in `H^{s1-1}`.
    pub err_v: f64,
    pub err_total: f64,
    /// Largest pointwise deviation of `|u|` from 1 at the final time.
    pub sphere_dev: f64,
    pub steps: usize,
    /// Zero unless `study.record_walltime` is set.
    pub wall_ms: u64,
    pub status: RowStatus,
}

/// Full study result: rows in ladder order plus the fitted rate.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub rows: Vec<LadderRow>,
    /// Least-squares rate over the `ok` rows; absent when fewer than two
    /// remain usable.
    pub fit: Option<RateFit>,
    pub warnings: Vec<String>,
    pub data_label: String,
}

enum RefPlan {
    /// One shared reference state at the final time.
    Shared(StatePair),
    /// Integrate the filtered system per ladder point at this fine step.
    Oracle { tau_fine: f64 },
}

/// Run the configured convergence study.
pub fn run_study(cfg: &RunConfig, threads: usize) -> Result<StudyOutcome, StudyError> {
    let grid = cfg.grid()?;
    let study = cfg.study()?;
    study.validate_ladder()?;

    let params: Vec<SchemeParams> = study
        .ladder
        .iter()
        .map(|&tau| cfg.scheme_params(grid, tau, study.t_final))
        .collect::<Result<_, _>>()?;

    let data = build_initial_data(cfg, grid)?;
    let mut warnings = data.warnings.clone();

    let mut rows: Vec<Option<LadderRow>> = vec![None; study.ladder.len()];
    let plan = match study.reference {
        Reference::Exact => {
            let geodesic = data.geodesic.as_ref().ok_or_else(|| {
                StudyError::Invalid(format!(
                    "reference \"exact\" needs a geodesic data source, got {}",
                    data.label
                ))
            })?;
            RefPlan::Shared(geodesic_state(geodesic, study.t_final))
        }
        Reference::FinestTau => {
            let finest = study.ladder.len() - 1;
            let p = &params[finest];
            let t0 = Instant::now();
            let state = evolve(&data.state, p, |_, _| {}).map_err(|e| match e {
                CoreError::NonFinite { step, .. } => StudyError::Failed(format!(
                    "finest-step reference run blew up at step {}",
                    step.unwrap_or(0)
                )),
                other => core_error(other),
            })?;
            rows[finest] = Some(LadderRow {
                tau: p.tau(),
                err_u: 0.0,
                err_v: 0.0,
                err_total: 0.0,
                sphere_dev: sphere_deviation(&state),
                steps: p.steps(),
                wall_ms: wall(t0, study),
                status: RowStatus::Reference,
            });
            RefPlan::Shared(state)
        }
        Reference::Rk4Oracle => {
            let divisor = study.oracle_divisor;
            if !(divisor.is_finite() && divisor >= 16.0) {
                return Err(StudyError::Invalid(format!(
                    "study.oracle_divisor must be at least 16, got {divisor}"
                )));
            }
            let min_tau = *study.ladder.last().expect("ladder is nonempty");
            RefPlan::Oracle { tau_fine: min_tau / divisor }
        }
    };

    let pending: Vec<usize> =
        (0..study.ladder.len()).filter(|&i| rows[i].is_none()).collect();
    let results = run_jobs(&pending, threads, |&i| {
        ladder_point(&data, &params[i], &plan, study)
    });
    for (&i, result) in pending.iter().zip(results) {
        rows[i] = Some(result?);
    }
    let rows: Vec<LadderRow> = rows.into_iter().map(|r| r.expect("all points ran")).collect();

    for row in &rows {
        if let RowStatus::Blowup { step } = row.status {
            warnings.push(format!("ladder point tau={} blew up at step {step}", row.tau));
        }
    }

    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok)
        .map(|r| (r.tau, r.err_total))
        .collect();
    let fit = match fit_rate(&pairs) {
        Ok(fit) => {
            if fit.excluded > 0 {
                warnings.push(format!(
                    "{} ladder point(s) with nonpositive or nonfinite error were excluded from the fit",
                    fit.excluded
                ));
            }
            Some(fit)
        }
        Err(e) => {
            warnings.push(format!("rate fit unavailable: {e}"));
            None
        }
    };

    Ok(StudyOutcome { rows, fit, warnings, data_label: data.label })
}

fn wall(t0: Instant, study: &StudySection) -> u64 {
    if study.record_walltime {
        t0.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn ladder_point(
    data: &BuiltData,
    p: &SchemeParams,
    plan: &RefPlan,
    study: &StudySection,
) -> Result<LadderRow, StudyError> {
    let t0 = Instant::now();
    let state = match evolve(&data.state, p, |_, _| {}) {
        Ok(state) => state,
        Err(CoreError::NonFinite { step, .. }) => {
            return Ok(LadderRow {
                tau: p.tau(),
                err_u: f64::NAN,
                err_v: f64::NAN,
                err_total: f64::NAN,
                sphere_dev: f64::NAN,
                steps: p.steps(),
                wall_ms: wall(t0, study),
                status: RowStatus::Blowup { step: step.unwrap_or(0) },
            });
        }
        Err(e) => return Err(core_error(e)),
    };

    let reference = match plan {
        RefPlan::Shared(state) => state.clone(),
        RefPlan::Oracle { tau_fine } => {
            rk4_reference(&data.state, p, *tau_fine).map_err(core_error)?
        }
    };

    let du = field_difference(&state.u, &reference.u).map_err(core_error)?;
    let dv = field_difference(&state.v, &reference.v).map_err(core_error)?;
    let err_u = du.sobolev_norm(study.norm_s1).map_err(core_error)?;
    let err_v = dv.sobolev_norm(study.norm_s1 - 1.0).map_err(core_error)?;
    Ok(LadderRow {
        tau: p.tau(),
        err_u,
        err_v,
        err_total: err_u + err_v,
        sphere_dev: sphere_deviation(&state),
        steps: p.steps(),
        wall_ms: wall(t0, study),
        status: RowStatus::Ok,
    })
}

/// Run `job` over `items` on `threads` workers, preserving item order in
/// the returned vector.
fn run_jobs<I: Sync, T: Send>(
    items: &[I],
    threads: usize,
    job: impl Fn(&I) -> T + Sync,
) -> Vec<T> {
    let workers = threads.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let out = job(&items[i]);
                slots.lock().expect("job panicked holding the lock")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("all workers joined")
        .into_iter()
        .map(|slot| slot.expect("every index was claimed"))
        .collect()
}
