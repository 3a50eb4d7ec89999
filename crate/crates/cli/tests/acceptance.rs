//! End-to-end acceptance gates for the solver, the diagnostics battery, and
//! the convergence harness.
//!
//! Each test prints a single verdict line (run with `-- --nocapture` to see
//! them) and then asserts it, so the suite doubles as a checklist:
//!
//! ```text
//! acceptance 3/8 PASS smooth-convergence: rate 1.02 in [0.80, 1.20] ...
//! ```
//!
//! Heavy fixtures (the diagnostics battery, the smooth-data ladder study) are
//! computed once and shared between the criteria that read them; the wall-time
//! bounds are asserted against the full shared computation, which only makes
//! them stricter.

use std::sync::OnceLock;
use std::time::Instant;

use wavemaps_cli::config::{parse_with_overrides, preset_text, DiagnosticsSection, RunConfig};
use wavemaps_cli::data::build_initial_data;
use wavemaps_cli::diagnostics::{run_diagnostics, CheckOutcome};
use wavemaps_cli::format::state_to_csv;
use wavemaps_cli::report::report_csv;
use wavemaps_cli::study::{run_study, RowStatus, StudyOutcome};

fn verdict(number: usize, name: &str, passed: bool, detail: &str) {
    let word = if passed { "PASS" } else { "FAIL" };
    println!("acceptance {number}/8 {word} {name}: {detail}");
    assert!(passed, "acceptance {number}/8 {name}: {detail}");
}

fn threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn parse(text: &str) -> RunConfig {
    parse_with_overrides(text, &[], &[]).unwrap().config
}

struct Battery {
    outcomes: Vec<CheckOutcome>,
    elapsed: f64,
}

impl Battery {
    fn named(&self, name: &str) -> &CheckOutcome {
        self.outcomes
            .iter()
            .find(|o| o.name == name)
            .unwrap_or_else(|| panic!("missing check {name}"))
    }
}

/// The full identity / vanishing / Strichartz battery at the shipped
/// defaults: 20 trials, seed 7, unscaled tolerances.
fn battery() -> &'static Battery {
    static CELL: OnceLock<Battery> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = DiagnosticsSection {
            trials: 20,
            seed: 7,
            tolerance_scale: 1.0,
        };
        let t0 = Instant::now();
        let outcomes = run_diagnostics(&cfg).expect("diagnostics battery must run");
        Battery {
            outcomes,
            elapsed: t0.elapsed().as_secs_f64(),
        }
    })
}

/// The shipped smooth-data preset study, shared by the convergence-rate and
/// sphere-deviation criteria.
fn smooth_study() -> &'static (StudyOutcome, f64) {
    static CELL: OnceLock<(StudyOutcome, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = parse(preset_text("smooth-geodesic").unwrap());
        let t0 = Instant::now();
        let outcome = run_study(&cfg, threads()).expect("smooth study must run");
        (outcome, t0.elapsed().as_secs_f64())
    })
}

const IDENTITY_CHECKS: [&str; 7] = [
    "free-group-law",
    "free-energy",
    "null-identity",
    "box-symbol",
    "parseval",
    "inversion",
    "sharp-partition",
];

#[test]
fn c1_exact_identities_hold_at_pinned_tolerances() {
    let battery = battery();
    let failed: Vec<&str> = IDENTITY_CHECKS
        .iter()
        .copied()
        .filter(|name| !battery.named(name).passed)
        .collect();
    let in_time = battery.elapsed < 30.0;
    let passed = failed.is_empty() && in_time;
    let detail = format!(
        "group law / per-mode energy / null identity at 1e-10, Parseval and \
         inversion at 1e-12, sharp band partition exact; failures: {:?}; \
         {:.1}s < 30s",
        failed, battery.elapsed
    );
    verdict(1, "exact-identities", passed, &detail);
}

#[test]
fn c2_forbidden_band_mass_vanishes_and_controls_stay_live() {
    let battery = battery();
    let cases: Vec<&CheckOutcome> = battery
        .outcomes
        .iter()
        .filter(|o| o.name.starts_with("vanishing-") && !o.control)
        .collect();
    let controls: Vec<&CheckOutcome> = battery
        .outcomes
        .iter()
        .filter(|o| o.name.starts_with("vanishing-") && o.control)
        .collect();
    let failed: Vec<&str> = cases
        .iter()
        .chain(controls.iter())
        .filter(|o| !o.passed)
        .map(|o| o.name.as_str())
        .collect();
    let in_time = battery.elapsed < 60.0;
    let passed =
        cases.len() == 6 && controls.len() == 6 && failed.is_empty() && in_time;
    let detail = format!(
        "{} geometric cases < 1e-10 x input mass and {} controls > 1e-4 over \
         20 trials each; failures: {:?}; {:.1}s < 60s",
        cases.len(),
        controls.len(),
        failed,
        battery.elapsed
    );
    verdict(2, "vanishing-bands", passed, &detail);
}

#[test]
fn c3_smooth_geodesic_converges_at_first_order() {
    let (outcome, elapsed) = smooth_study();
    let all_ok = outcome.rows.iter().all(|r| matches!(r.status, RowStatus::Ok));
    let fit = outcome.fit.as_ref().expect("smooth study must fit a rate");
    let in_band = fit.slope >= 0.8 && fit.slope <= 1.2;
    let tight = fit.residual < 0.3;
    let in_time = *elapsed < 300.0;
    let passed = all_ok && in_band && tight && in_time;
    let detail = format!(
        "rate {:.3} in [0.80, 1.20], residual {:.3} < 0.3 over {} ladder \
         points; {:.0}s < 300s",
        fit.slope, fit.residual, fit.used, elapsed
    );
    verdict(3, "smooth-convergence", passed, &detail);
}

#[test]
fn c4_rough_geodesic_errors_decrease_with_positive_rate() {
    let cfg = parse(preset_text("rough-1.7").unwrap());
    let t0 = Instant::now();
    let outcome = run_study(&cfg, threads()).expect("rough study must run");
    let elapsed = t0.elapsed().as_secs_f64();
    let all_ok = outcome.rows.iter().all(|r| matches!(r.status, RowStatus::Ok));
    let decreasing = outcome
        .rows
        .windows(2)
        .all(|w| w[1].err_total < w[0].err_total);
    let fit = outcome.fit.as_ref().expect("rough study must fit a rate");
    let positive = fit.slope >= 0.05;
    let in_time = elapsed < 600.0;
    let passed = all_ok && decreasing && positive && in_time;
    let detail = format!(
        "errors strictly decreasing along the ladder, rate {:.3} >= 0.05; \
         {:.0}s < 600s",
        fit.slope, elapsed
    );
    verdict(4, "rough-convergence", passed, &detail);
}

#[test]
fn c5_splitting_tracks_the_rk4_oracle_at_first_order() {
    let text = "[grid]\nn = 512\nperiod = 20.0\n\n\
         [scheme]\nfilter_constant = 1.0\n\n\
         [data]\nsource = \"geodesic-smooth\"\ntheta_amplitude = 2.0\n\n\
         [study]\nt_final = 0.25\n\
         ladder = [0.015625, 0.0078125, 0.00390625, 0.001953125, 0.0009765625]\n\
         reference = \"rk4-oracle\"\nnorm_s1 = 0.0\n";
    let cfg = parse(text);
    let t0 = Instant::now();
    let outcome = run_study(&cfg, threads()).expect("oracle study must run");
    let elapsed = t0.elapsed().as_secs_f64();
    let all_ok = outcome.rows.iter().all(|r| matches!(r.status, RowStatus::Ok));
    let fit = outcome.fit.as_ref().expect("oracle study must fit a rate");
    let in_band = fit.slope >= 0.75 && fit.slope <= 1.25;
    let in_time = elapsed < 300.0;
    let passed = all_ok && outcome.rows.len() == 5 && in_band && in_time;
    let detail = format!(
        "splitting-vs-oracle slope {:.3} in [0.75, 1.25] over 5 ladder \
         points; {:.0}s < 300s",
        fit.slope, elapsed
    );
    verdict(5, "oracle-consistency", passed, &detail);
}

#[test]
fn c6_sphere_deviation_shrinks_with_the_step() {
    let (outcome, _) = smooth_study();
    let all_ok = outcome.rows.iter().all(|r| matches!(r.status, RowStatus::Ok));
    let shrinking = outcome
        .rows
        .windows(2)
        .all(|w| w[1].sphere_dev < w[0].sphere_dev);
    let passed = all_ok && shrinking;
    let devs: Vec<String> = outcome
        .rows
        .iter()
        .map(|r| format!("{:.2e}", r.sphere_dev))
        .collect();
    let detail = format!(
        "deviation at the horizon drops under each step halving: [{}]",
        devs.join(", ")
    );
    verdict(6, "sphere-trend", passed, &detail);
}

#[test]
fn c7_strichartz_ratios_stay_within_a_factor_two() {
    let battery = battery();
    let both = ["strichartz-4-4", "strichartz-inf-2"];
    let failed: Vec<&str> = both
        .iter()
        .copied()
        .filter(|name| !battery.named(name).passed)
        .collect();
    let passed = failed.is_empty();
    let detail = format!(
        "(4,4) and (inf,2) worst ratios spread by less than a factor 2 \
         across the step ladder; failures: {:?}",
        failed
    );
    verdict(7, "strichartz-spread", passed, &detail);
}

#[test]
fn c8_reports_and_datasets_are_byte_deterministic() {
    let study_text = "[grid]\nn = 256\nperiod = 20.0\n\n\
         [scheme]\nfilter_constant = 1.0\n\n\
         [data]\nsource = \"geodesic-smooth\"\ntheta_amplitude = 2.0\n\n\
         [study]\nt_final = 0.1\nladder = [0.025, 0.0125]\n\
         reference = \"exact\"\nnorm_s1 = 0.0\n";
    let cfg = parse(study_text);
    let csv_a = report_csv(&run_study(&cfg, threads()).unwrap().rows);
    let csv_b = report_csv(&run_study(&cfg, 1).unwrap().rows);
    let csv_same = csv_a == csv_b && csv_a.lines().count() == 3;

    let data_text = "[grid]\nn = 256\nperiod = 20.0\n\n\
         [scheme]\nfilter_constant = 1.0\n\n\
         [data]\nsource = \"geodesic-rough\"\ns = 1.7\nseed = 42\n";
    let dcfg = parse(data_text);
    let grid = dcfg.grid().unwrap();
    let snap_a = state_to_csv(&build_initial_data(&dcfg, grid).unwrap().state);
    let snap_b = state_to_csv(&build_initial_data(&dcfg, grid).unwrap().state);
    let snap_same = snap_a == snap_b && snap_a.len() > 1000;

    let passed = csv_same && snap_same;
    let detail = format!(
        "ladder report bytes identical across reruns and thread counts \
         ({}), seeded dataset bytes identical ({})",
        csv_same, snap_same
    );
    verdict(8, "determinism", passed, &detail);
}
