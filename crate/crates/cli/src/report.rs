//! Study reports: the ladder CSV, a self-contained SVG plot, and TOML
//! manifests that echo the resolved configuration.

use crate::config::ConfigError;
use crate::format::g17;
use crate::study::{LadderRow, RowStatus, StudyOutcome};
use std::path::Path;
use wavemaps_core::rate::RateFit;

/// Fixed column order of the ladder CSV.
pub const CSV_HEADER: &str = "tau,err_u,err_v,err_total,sphere_dev,steps,wall_ms,status";

/// Render the ladder rows as CSV, one line per ladder point.
pub fn report_csv(rows: &[LadderRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            g17(r.tau),
            g17(r.err_u),
            g17(r.err_v),
            g17(r.err_total),
            g17(r.sphere_dev),
            r.steps,
            r.wall_ms,
            r.status.as_str(),
        ));
    }
    out
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

/// Render a log-log plot of total error against step size, with the fitted
/// line when one exists. The output is deterministic for fixed input.
pub fn report_svg(rows: &[LadderRow], fit: Option<&RateFit>) -> String {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok && r.err_total > 0.0 && r.err_total.is_finite())
        .map(|r| (r.tau.log2(), r.err_total.log2()))
        .collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n"
    ));

    if pts.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">no usable ladder points</text>\n",
            PLOT_W / 2.0,
            PLOT_H / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let (mut x0, mut x1) = min_max(pts.iter().map(|p| p.0));
    let (mut y0, mut y1) = min_max(pts.iter().map(|p| p.1));
    if x1 - x0 < 1.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad_x = 0.06 * (x1 - x0);
    let pad_y = 0.08 * (y1 - y0);
    let (x0, x1) = (x0 - pad_x, x1 + pad_x);
    let (y0, y1) = (y0 - pad_y, y1 + pad_y);

    let to_px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (PLOT_W - MARGIN_L - MARGIN_R);
    let to_py = |y: f64| PLOT_H - MARGIN_B - (y - y0) / (y1 - y0) * (PLOT_H - MARGIN_T - MARGIN_B);

    // frame and integer-power gridlines
    svg.push_str(&format!(
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T,
        PLOT_W - MARGIN_L - MARGIN_R,
        PLOT_H - MARGIN_T - MARGIN_B
    ));
    let mut tick = x0.ceil() as i64;
    while (tick as f64) <= x1 {
        let px = to_px(tick as f64);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>\n",
            MARGIN_T,
            PLOT_H - MARGIN_B
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">2^{tick}</text>\n",
            PLOT_H - MARGIN_B + 18.0
        ));
        tick += 1;
    }
    let mut tick = y0.ceil() as i64;
    while (tick as f64) <= y1 {
        let py = to_py(tick as f64);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#ddd\"/>\n",
            MARGIN_L,
            PLOT_W - MARGIN_R
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">2^{tick}</text>\n",
            MARGIN_L - 6.0,
            py + 4.0
        ));
        tick += 1;
    }

    if let Some(fit) = fit {
        let ends = [x0 + pad_x, x1 - pad_x];
        let ys = ends.map(|x| fit.intercept + fit.slope * x);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c33\" stroke-width=\"1.5\"/>\n",
            to_px(ends[0]),
            to_py(ys[0]),
            to_px(ends[1]),
            to_py(ys[1])
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#c33\">slope {:.3}</text>\n",
            MARGIN_L + 10.0,
            MARGIN_T + 18.0,
            fit.slope
        ));
    }

    for (x, y) in &pts {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#369\"/>\n",
            to_px(*x),
            to_py(*y)
        ));
    }

    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">step size</text>\n",
        MARGIN_L + (PLOT_W - MARGIN_L - MARGIN_R) / 2.0,
        PLOT_H - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">total error</text>\n",
        MARGIN_T + (PLOT_H - MARGIN_T - MARGIN_B) / 2.0,
        MARGIN_T + (PLOT_H - MARGIN_T - MARGIN_B) / 2.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Build the study manifest: code version, resolved configuration, data
/// generator, fit summary and warnings.
pub fn study_manifest(resolved: &toml::Table, outcome: &StudyOutcome) -> String {
    let mut root = toml::Table::new();
    root.insert("version".into(), toml::Value::String(env!("CARGO_PKG_VERSION").into()));
    root.insert("command".into(), toml::Value::String("convergence".into()));
    root.insert("data".into(), toml::Value::String(outcome.data_label.clone()));
    root.insert("config".into(), toml::Value::Table(resolved.clone()));

    let mut result = toml::Table::new();
    result.insert("points".into(), toml::Value::Integer(outcome.rows.len() as i64));
    let ok = outcome.rows.iter().filter(|r| r.status == RowStatus::Ok).count();
    result.insert("ok_points".into(), toml::Value::Integer(ok as i64));
    if let Some(fit) = &outcome.fit {
        result.insert("rate".into(), toml::Value::Float(fit.slope));
        result.insert("intercept".into(), toml::Value::Float(fit.intercept));
        result.insert("residual".into(), toml::Value::Float(fit.residual));
        result.insert("fit_points".into(), toml::Value::Integer(fit.used as i64));
        result.insert("fit_excluded".into(), toml::Value::Integer(fit.excluded as i64));
    }
    result.insert(
        "warnings".into(),
        toml::Value::Array(
            outcome.warnings.iter().map(|w| toml::Value::String(w.clone())).collect(),
        ),
    );
    root.insert("result".into(), toml::Value::Table(result));

    toml::to_string_pretty(&toml::Value::Table(root)).expect("manifest tables serialize")
}

/// Write a text file, creating the parent directory if needed.
pub fn write_text(path: &Path, text: &str) -> Result<(), ConfigError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| ConfigError(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<LadderRow> {
        vec![
            LadderRow {
                tau: 0.25,
                err_u: 0.5,
                err_v: 0.25,
                err_total: 0.75,
                sphere_dev: 1e-3,
                steps: 2,
                wall_ms: 0,
                status: RowStatus::Ok,
            },
            LadderRow {
                tau: 0.125,
                err_u: f64::NAN,
                err_v: f64::NAN,
                err_total: f64::NAN,
                sphere_dev: f64::NAN,
                steps: 4,
                wall_ms: 0,
                status: RowStatus::Blowup { step: 3 },
            },
            LadderRow {
                tau: 0.0625,
                err_u: 0.0,
                err_v: 0.0,
                err_total: 0.0,
                sphere_dev: 5e-4,
                steps: 8,
                wall_ms: 0,
                status: RowStatus::Reference,
            },
        ]
    }

    #[test]
    fn csv_layout_is_fixed_and_byte_stable() {
        let rows = sample_rows();
        let text = report_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert!(first.starts_with("2.5000000000000000e-1,"), "{first}");
        assert!(first.ends_with(",ok"), "{first}");
        let second = lines.next().unwrap();
        assert!(second.contains("NaN,NaN,NaN,NaN"), "{second}");
        assert!(second.ends_with(",blow-up"), "{second}");
        let third = lines.next().unwrap();
        assert!(third.ends_with(",reference"), "{third}");
        assert!(lines.next().is_none());
        assert_eq!(text, report_csv(&rows));
    }

    #[test]
    fn empty_ladder_renders_header_only() {
        assert_eq!(report_csv(&[]), format!("{CSV_HEADER}\n"));
        let svg = report_svg(&[], None);
        assert!(svg.contains("no usable ladder points"));
    }

    #[test]
    fn svg_marks_each_usable_point_and_the_fit() {
        let rows = sample_rows();
        let fit = RateFit { slope: 1.02, intercept: 0.3, residual: 0.05, used: 1, excluded: 0 };
        let svg = report_svg(&rows, Some(&fit));
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 1, "only the ok row is plottable");
        assert!(svg.contains("slope 1.020"));
        assert_eq!(svg, report_svg(&rows, Some(&fit)));
    }

    #[test]
    fn manifest_echoes_config_and_fit_and_parses_back() {
        let resolved: toml::Table =
            "[grid]\nn = 16\nperiod = 1.0\n".parse().unwrap();
        let outcome = StudyOutcome {
            rows: sample_rows(),
            fit: Some(RateFit {
                slope: 0.97,
                intercept: 1.0,
                residual: 0.1,
                used: 1,
                excluded: 0,
            }),
            warnings: vec!["one point blew up".into()],
            data_label: "geodesic-smooth amplitude=2".into(),
        };
        let text = study_manifest(&resolved, &outcome);
        let parsed: toml::Table = text.parse().unwrap();
        assert_eq!(parsed["config"]["grid"]["n"].as_integer(), Some(16));
        assert_eq!(parsed["result"]["points"].as_integer(), Some(3));
        assert_eq!(parsed["result"]["rate"].as_float(), Some(0.97));
        assert_eq!(parsed["command"].as_str(), Some("convergence"));
        assert!(parsed["result"]["warnings"].as_array().unwrap().len() == 1);
    }
}
