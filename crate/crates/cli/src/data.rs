//! Initial-data construction from the configured source.

use crate::config::{ConfigError, DataSource, RunConfig};
use crate::format::state_from_csv;
use wavemaps_core::grid::GridSpec;
use wavemaps_core::propagator::StatePair;
use wavemaps_core::refsol::{
    fig1_initial_data, geodesic_state, rough_theta0, tangency_deviation, GeodesicData,
};
use wavemaps_core::spectral::ScalarField;

/// A built initial state, plus the closed-form solution family it belongs
/// to when one exists.
#[derive(Debug, Clone)]
pub struct BuiltData {
    pub state: StatePair,
    /// Set for geodesic sources; carries the exact solution.
    pub geodesic: Option<GeodesicData>,
    /// Short generator description for manifests.
    pub label: String,
    pub warnings: Vec<String>,
}

/// Gaussian angle profile `amplitude * exp(-|x|^2)` on the centered box.
fn gaussian_theta(grid: GridSpec, amplitude: f64) -> Result<ScalarField, ConfigError> {
    let samples: Vec<f64> = (0..grid.points())
        .map(|flat| {
            let x = grid.position(flat);
            let r2: f64 = x.iter().take(grid.dim()).map(|c| c * c).sum();
            amplitude * (-r2).exp()
        })
        .collect();
    Ok(ScalarField::to_spectral(grid, &samples)?)
}

/// Build the initial state selected by `[data]` on the configured grid.
pub fn build_initial_data(cfg: &RunConfig, grid: GridSpec) -> Result<BuiltData, ConfigError> {
    let mut warnings = Vec::new();
    match cfg.data.source {
        DataSource::GeodesicSmooth => {
            let amp = cfg.data.theta_amplitude;
            let amp_dot = cfg.data.theta_dot_amplitude;
            if !amp.is_finite() {
                return Err(ConfigError("data.theta_amplitude must be finite".into()));
            }
            if !amp_dot.is_finite() {
                return Err(ConfigError(
                    "data.theta_dot_amplitude must be finite".into(),
                ));
            }
            let theta0 = gaussian_theta(grid, amp)?;
            let geodesic = if amp_dot == 0.0 {
                GeodesicData::at_rest(theta0)
            } else {
                let thetadot0 = gaussian_theta(grid, amp_dot)?;
                GeodesicData::new(theta0, thetadot0)?
            };
            let state = geodesic_state(&geodesic, 0.0);
            let label = if amp_dot == 0.0 {
                format!("geodesic-smooth amplitude={amp}")
            } else {
                format!("geodesic-smooth amplitude={amp} velocity={amp_dot}")
            };
            Ok(BuiltData {
                state,
                geodesic: Some(geodesic),
                label,
                warnings,
            })
        }
        DataSource::GeodesicRough => {
            let s = cfg.data.s.ok_or_else(|| {
                ConfigError("data.s is required for source geodesic-rough".into())
            })?;
            let theta0 = rough_theta0(grid, s, cfg.data.seed)?;
            let geodesic = GeodesicData::at_rest(theta0);
            let state = geodesic_state(&geodesic, 0.0);
            Ok(BuiltData {
                state,
                geodesic: Some(geodesic),
                label: format!("geodesic-rough s={s} seed={}", cfg.data.seed),
                warnings,
            })
        }
        DataSource::Fig1 => {
            let state = fig1_initial_data(grid)?;
            Ok(BuiltData {
                state,
                geodesic: None,
                label: "fig1-1d".into(),
                warnings,
            })
        }
        DataSource::CustomFile => {
            let path = cfg.data.path.as_deref().ok_or_else(|| {
                ConfigError("data.path is required for source custom-file".into())
            })?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
            let state = state_from_csv(&text)?;
            if state.grid() != grid {
                return Err(ConfigError(format!(
                    "snapshot grid ({}d, n={}, period={}) does not match [grid]",
                    state.grid().dim(),
                    state.grid().n_per_axis(),
                    state.grid().period(),
                )));
            }
            if state.time != 0.0 {
                return Err(ConfigError(format!(
                    "snapshot records time {}, but runs start at 0",
                    state.time
                )));
            }
            let dev = tangency_deviation(&state);
            if dev > 1e-8 {
                warnings.push(format!(
                    "snapshot velocity is not tangent to the sphere (max |u.v| = {dev:.3e})"
                ));
            }
            Ok(BuiltData {
                state,
                geodesic: None,
                label: format!("custom-file {path}"),
                warnings,
            })
        }
    }
}
