//! Periodic grid bookkeeping: sample positions, integer modes and physical
//! wavenumbers for row-major cubes in one to three dimensions.

use alloc::format;

use crate::{CoreError, Result};

/// A uniform periodic grid on the centered torus `[-L/2, L/2)^dim` with the
/// same power-of-two point count along every axis.
///
/// Samples along an axis sit at `x_i = -L/2 + i L/n`; spectral coefficients
/// are indexed in DFT order, axis index `i` carrying the signed integer mode
/// `i` for `i < n/2` and `i - n` otherwise, with physical wavenumber
/// `k = 2 pi m / L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n_per_axis: usize, period: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(CoreError::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if !n_per_axis.is_power_of_two() || n_per_axis < 2 {
            return Err(CoreError::InvalidGrid(format!(
                "points per axis {n_per_axis} must be a power of two >= 2"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(CoreError::InvalidGrid(format!("period {period} must be finite positive")));
        }
        Ok(GridSpec { dim, n: n_per_axis, period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of grid points (= number of spectral coefficients).
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn delta_x(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Spacing of the wavenumber lattice, `2 pi / L`.
    pub fn delta_k(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.period
    }

    /// Largest representable wavenumber magnitude per axis, `pi / delta_x`.
    pub fn nyquist_k(&self) -> f64 {
        core::f64::consts::PI * self.n as f64 / self.period
    }

    /// Signed integer mode carried by per-axis index `i`.
    pub fn mode_of_index(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Per-axis index carrying signed mode `m` (modes run -n/2 ..= n/2-1).
    pub fn index_of_mode(&self, m: i64) -> usize {
        debug_assert!(-(self.n as i64) / 2 <= m && m < self.n as i64 / 2);
        if m >= 0 {
            m as usize
        } else {
            (m + self.n as i64) as usize
        }
    }

    /// Row-major flat index from per-axis indices (unused axes must be 0).
    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        match self.dim {
            1 => idx[0],
            2 => idx[0] * self.n + idx[1],
            _ => (idx[0] * self.n + idx[1]) * self.n + idx[2],
        }
    }

    /// Per-axis indices of a flat index; trailing axes of a low-dimensional
    /// grid decode to 0.
    pub fn decompose(&self, flat: usize) -> [usize; 3] {
        match self.dim {
            1 => [flat, 0, 0],
            2 => [flat / self.n, flat % self.n, 0],
            _ => [flat / (self.n * self.n), (flat / self.n) % self.n, flat % self.n],
        }
    }

    /// Signed integer modes of a flat spectral index.
    pub fn modes(&self, flat: usize) -> [i64; 3] {
        let idx = self.decompose(flat);
        let mut m = [0i64; 3];
        for a in 0..self.dim {
            m[a] = self.mode_of_index(idx[a]);
        }
        m
    }

    /// Physical wavevector of a flat spectral index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let m = self.modes(flat);
        let dk = self.delta_k();
        [dk * m[0] as f64, dk * m[1] as f64, dk * m[2] as f64]
    }

    /// Euclidean wavenumber magnitude `|k|` of a flat spectral index.
    /// Built from squared components, so it is bitwise even in k.
    pub fn k_abs(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        libm::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
    }

    /// Physical coordinates of a flat sample index on the centered torus.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.decompose(flat);
        let dx = self.delta_x();
        let half = 0.5 * self.period;
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = -half + idx[a] as f64 * dx;
        }
        x
    }

    /// `(-1)^(m1+m2+m3)` for a flat index: the phase relating DFT output on
    /// the centered torus to coefficients of `e^{i k x}`.
    pub fn center_parity(&self, flat: usize) -> f64 {
        let idx = self.decompose(flat);
        // n is even, so each signed mode has the parity of its raw index
        if (idx[0] + idx[1] + idx[2]) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(0, 8, 1.0).is_err());
        assert!(GridSpec::new(4, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 12, 1.0).is_err());
        assert!(GridSpec::new(1, 8, 0.0).is_err());
        assert!(GridSpec::new(1, 8, f64::NAN).is_err());
        assert!(GridSpec::new(3, 64, 20.0).is_ok());
    }

    #[test]
    fn mode_index_round_trip() {
        let g = GridSpec::new(1, 8, 20.0).unwrap();
        let expected = [0i64, 1, 2, 3, -4, -3, -2, -1];
        for i in 0..8 {
            assert_eq!(g.mode_of_index(i), expected[i]);
            assert_eq!(g.index_of_mode(expected[i]), i);
        }
    }

    #[test]
    fn flat_index_round_trip_3d() {
        let g = GridSpec::new(3, 4, 1.0).unwrap();
        for flat in 0..g.points() {
            assert_eq!(g.flat_index(g.decompose(flat)), flat);
        }
    }

    #[test]
    fn wavenumbers_and_positions() {
        let g = GridSpec::new(1, 8, 20.0).unwrap();
        let dk = g.delta_k();
        assert!((dk - core::f64::consts::PI / 10.0).abs() < 1e-15);
        assert!((g.nyquist_k() - 4.0 * dk).abs() < 1e-15);
        assert_eq!(g.position(0)[0], -10.0);
        assert_eq!(g.position(4)[0], 0.0);
        // |k| is bitwise even in the mode
        let plus = g.k_abs(g.index_of_mode(3));
        let minus = g.k_abs(g.index_of_mode(-3));
        assert_eq!(plus.to_bits(), minus.to_bits());
    }

    #[test]
    fn parity_tracks_mode_sum() {
        let g = GridSpec::new(2, 4, 1.0).unwrap();
        for flat in 0..g.points() {
            let m = g.modes(flat);
            let expect = if (m[0] + m[1]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert_eq!(g.center_parity(flat), expect);
        }
    }
}
