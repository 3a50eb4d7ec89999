//! On-disk formats: fixed-width decimal rendering and CSV state snapshots.
//!
//! All floating-point values are written with 17 significant digits, enough
//! to round-trip an IEEE double exactly, so repeated runs with identical
//! inputs produce byte-identical files.

use crate::config::ConfigError;
use wavemaps_core::grid::GridSpec;
use wavemaps_core::propagator::StatePair;
use wavemaps_core::spectral::{Field, ScalarField};

/// Render a double with 17 significant digits in scientific notation.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a state to CSV: commented grid header, column names, then one
/// row per grid point in flat (row-major) order with real-space samples.
pub fn state_to_csv(s: &StatePair) -> String {
    let grid = s.grid();
    let u = s.u.to_physical();
    let v = s.v.to_physical();
    let mut out = String::new();
    push_grid_header(&mut out, grid, s.time);
    out.push_str("u1,u2,u3,v1,v2,v3\n");
    for i in 0..grid.points() {
        for (c, col) in u.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&g17(col[i]));
        }
        for col in v.iter() {
            out.push(',');
            out.push_str(&g17(col[i]));
        }
        out.push('\n');
    }
    out
}

/// Serialize one scalar sample column with the same header layout.
pub fn scalar_to_csv(f: &ScalarField, column: &str) -> String {
    let grid = f.grid();
    let samples = f.to_physical();
    let mut out = String::new();
    push_grid_header(&mut out, grid, 0.0);
    out.push_str(column);
    out.push('\n');
    for x in samples {
        out.push_str(&g17(x));
        out.push('\n');
    }
    out
}

fn push_grid_header(out: &mut String, grid: GridSpec, time: f64) {
    out.push_str("# wavemaps state snapshot\n");
    out.push_str(&format!("# dim = {}\n", grid.dim()));
    out.push_str(&format!("# n = {}\n", grid.n_per_axis()));
    out.push_str(&format!("# period = {}\n", g17(grid.period())));
    out.push_str(&format!("# time = {}\n", g17(time)));
}

/// Read a state snapshot back; the grid is reconstructed from the header
/// and the samples are re-interpolated spectrally.
pub fn state_from_csv(text: &str) -> Result<StatePair, ConfigError> {
    let mut dim: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut period: Option<f64> = None;
    let mut time: f64 = 0.0;
    let mut columns: Vec<[f64; 6]> = Vec::new();
    let mut saw_names = false;

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "dim" => dim = Some(parse_at(value, lineno)?),
                    "n" => n = Some(parse_at(value, lineno)?),
                    "period" => period = Some(parse_at(value, lineno)?),
                    "time" => time = parse_at(value, lineno)?,
                    _ => {}
                }
            }
            continue;
        }
        if !saw_names {
            if line != "u1,u2,u3,v1,v2,v3" {
                return Err(ConfigError(format!(
                    "line {}: expected the column header, got {line:?}",
                    lineno + 1
                )));
            }
            saw_names = true;
            continue;
        }
        let mut row = [0.0f64; 6];
        let mut fields = line.split(',');
        for slot in &mut row {
            let field = fields.next().ok_or_else(|| {
                ConfigError(format!("line {}: expected 6 columns", lineno + 1))
            })?;
            *slot = parse_at(field.trim(), lineno)?;
        }
        if fields.next().is_some() {
            return Err(ConfigError(format!("line {}: expected 6 columns", lineno + 1)));
        }
        columns.push(row);
    }

    let (Some(dim), Some(n), Some(period)) = (dim, n, period) else {
        return Err(ConfigError("snapshot header must record dim, n and period".into()));
    };
    let grid = GridSpec::new(dim, n, period)?;
    if columns.len() != grid.points() {
        return Err(ConfigError(format!(
            "snapshot has {} rows but the grid has {} points",
            columns.len(),
            grid.points()
        )));
    }

    let mut fields = Vec::with_capacity(6);
    for c in 0..6 {
        let samples: Vec<f64> = columns.iter().map(|row| row[c]).collect();
        fields.push(ScalarField::to_spectral(grid, &samples)?);
    }
    let mut it = fields.into_iter();
    let u = Field::from_components([
        it.next().expect("six columns"),
        it.next().expect("six columns"),
        it.next().expect("six columns"),
    ])?;
    let v = Field::from_components([
        it.next().expect("six columns"),
        it.next().expect("six columns"),
        it.next().expect("six columns"),
    ])?;
    Ok(StatePair::new(u, v, time)?)
}

fn parse_at<T: std::str::FromStr>(value: &str, lineno: usize) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError(format!("line {}: cannot parse {value:?}: {e}", lineno + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavemaps_core::rng::SeedStream;

    fn random_state(n: usize, seed: u64) -> StatePair {
        let grid = GridSpec::new(1, n, 20.0).unwrap();
        let mut rng = SeedStream::new(seed);
        let mut make = |_| {
            let samples: Vec<f64> = (0..grid.points())
                .map(|_| rng.next_symmetric())
                .collect();
            ScalarField::to_spectral(grid, &samples).unwrap()
        };
        let u = Field::from_components([make(0), make(1), make(2)]).unwrap();
        let v = Field::from_components([make(3), make(4), make(5)]).unwrap();
        StatePair::new(u, v, 0.375).unwrap()
    }

    #[test]
    fn state_round_trips_through_csv() {
        let s = random_state(32, 41);
        let text = state_to_csv(&s);
        let back = state_from_csv(&text).unwrap();
        assert_eq!(back.grid(), s.grid());
        assert_eq!(back.time, s.time);
        for c in 0..3 {
            for (a, b) in s.u.comp(c).coef().iter().zip(back.u.comp(c).coef()) {
                assert!((a - b).norm_sqr().sqrt() < 1e-12, "u{c} drifted in the round trip");
            }
            for (a, b) in s.v.comp(c).coef().iter().zip(back.v.comp(c).coef()) {
                assert!((a - b).norm_sqr().sqrt() < 1e-12, "v{c} drifted in the round trip");
            }
        }
    }

    #[test]
    fn snapshot_serialization_is_byte_stable() {
        let s = random_state(16, 7);
        assert_eq!(state_to_csv(&s), state_to_csv(&s));
    }

    #[test]
    fn malformed_snapshots_are_rejected() {
        assert!(state_from_csv("u1,u2,u3,v1,v2,v3\n").is_err());

        let s = random_state(16, 3);
        let text = state_to_csv(&s);
        let truncated: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(state_from_csv(&truncated).is_err());

        let wrong_cols = text.replacen("u1,u2,u3,v1,v2,v3", "a,b", 1);
        assert!(state_from_csv(&wrong_cols).is_err());
    }

    #[test]
    fn seventeen_digit_rendering_round_trips_doubles() {
        let values = [0.1, 1.0 / 3.0, 0.0078125, -2.5e-17, 6.02e23, 0.0];
        for &x in &values {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(g17(f64::NAN), "NaN");
    }
}
