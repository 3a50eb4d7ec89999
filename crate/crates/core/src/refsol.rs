//! Reference and initial data: exact geodesic solutions, rough data of
//! prescribed Sobolev regularity, and the one-dimensional demonstration
//! dataset.
//!
//! A geodesic solution winds a free scalar wave `theta(t, x)` around a
//! great circle: `u = (cos theta, sin theta, 0)` solves the wave maps
//! equation exactly whenever `theta` solves the linear wave equation, and
//! its velocity `v = (-sin theta, cos theta, 0) d_t theta` is tangent to
//! the sphere by construction. This family provides closed-form references
//! at every regularity, since `theta` may be as rough as desired.

use alloc::format;
use alloc::vec::Vec;

use crate::grid::GridSpec;
use crate::propagator::{free_wave_scalar, StatePair};
use crate::spectral::{Field, ScalarField};
use crate::{C64, CoreError, Result};

/// Angle data for a great-circle solution: `theta` and its time
/// derivative at time zero, both real-valued.
#[derive(Debug, Clone)]
pub struct GeodesicData {
    theta0: ScalarField,
    thetadot0: ScalarField,
}

impl GeodesicData {
    pub fn new(theta0: ScalarField, thetadot0: ScalarField) -> Result<Self> {
        if theta0.grid() != thetadot0.grid() {
            return Err(CoreError::GridMismatch);
        }
        Ok(GeodesicData { theta0, thetadot0 })
    }

    /// Angle data at rest: `d_t theta = 0`.
    pub fn at_rest(theta0: ScalarField) -> Self {
        let thetadot0 = ScalarField::zeros(theta0.grid());
        GeodesicData { theta0, thetadot0 }
    }

    pub fn grid(&self) -> GridSpec {
        self.theta0.grid()
    }

    pub fn theta0(&self) -> &ScalarField {
        &self.theta0
    }

    pub fn thetadot0(&self) -> &ScalarField {
        &self.thetadot0
    }

    /// Advance the angle pair by `t` under the free wave equation.
    pub fn advance(&self, t: f64) -> GeodesicData {
        let (theta0, thetadot0) = free_wave_scalar(&self.theta0, &self.thetadot0, t);
        GeodesicData { theta0, thetadot0 }
    }
}

/// Exact great-circle state at time `t`.
pub fn geodesic_state(d: &GeodesicData, t: f64) -> StatePair {
    let grid = d.grid();
    let moved = d.advance(t);
    let theta = moved.theta0.to_physical();
    let omega = moved.thetadot0.to_physical();
    let n = theta.len();
    let mut cu = Vec::with_capacity(n);
    let mut su = Vec::with_capacity(n);
    let mut cv = Vec::with_capacity(n);
    let mut sv = Vec::with_capacity(n);
    for (th, om) in theta.iter().zip(&omega) {
        let (c, s) = (libm::cos(*th), libm::sin(*th));
        cu.push(c);
        su.push(s);
        cv.push(-s * om);
        sv.push(c * om);
    }
    let zero = ScalarField::zeros(grid);
    let u = Field::from_components([
        ScalarField::to_spectral(grid, &cu).expect("sample count matches grid"),
        ScalarField::to_spectral(grid, &su).expect("sample count matches grid"),
        zero.clone(),
    ])
    .expect("components share one grid");
    let v = Field::from_components([
        ScalarField::to_spectral(grid, &cv).expect("sample count matches grid"),
        ScalarField::to_spectral(grid, &sv).expect("sample count matches grid"),
        zero,
    ])
    .expect("components share one grid");
    StatePair { u, v, time: t }
}

/// Angle spectrum of prescribed Sobolev regularity: the coefficient at
/// wavenumber `k` has magnitude `<k>^{-(s + d/2)} / log(2 + |k|^2)`, which
/// places `theta0` in `H^s` but in no `H^{s'}` with `s' > s`. With seed 0
/// the phases are all zero (the deterministic baseline); any other seed
/// draws random phases, conjugate-symmetrized so the field stays real.
/// Magnitudes are independent of the grid; random phases are not.
pub fn rough_theta0(grid: GridSpec, s: f64, seed: u64) -> Result<ScalarField> {
    if !(s.is_finite() && s > 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "regularity {s} must be finite positive"
        )));
    }
    let exponent = s + grid.dim() as f64 / 2.0;
    let mut f = ScalarField::zeros(grid);
    for flat in 0..grid.points() {
        let ka = grid.k_abs(flat);
        let mag = libm::pow(1.0 + ka * ka, -0.5 * exponent) / libm::log(2.0 + ka * ka);
        f.coef_mut()[flat] = C64::new(mag, 0.0);
    }
    if seed != 0 {
        apply_random_phases(&mut f, seed);
    }
    Ok(f)
}

fn apply_random_phases(f: &mut ScalarField, seed: u64) {
    let grid = f.grid();
    let n = grid.n_per_axis() as i64;
    let negate = |m: i64| if m == -n / 2 { m } else { -m };
    let mut rng = crate::rng::SeedStream::new(seed);
    for flat in 0..grid.points() {
        let m = grid.modes(flat);
        let partner = grid.flat_index([
            grid.index_of_mode(negate(m[0])),
            grid.index_of_mode(negate(m[1])),
            grid.index_of_mode(negate(m[2])),
        ]);
        if partner < flat {
            continue;
        }
        if partner == flat {
            // self-paired mode stays real
            continue;
        }
        let phi = 2.0 * core::f64::consts::PI * rng.next_unit();
        let phase = C64::new(libm::cos(phi), libm::sin(phi));
        f.coef_mut()[flat] *= phase;
        f.coef_mut()[partner] *= phase.conj();
    }
}

/// One-dimensional demonstration data: the spherical profile
/// `u0 = (  (sin theta sin phi - cos theta)/sqrt(2),
///         -sin theta cos phi,
///          (cos theta + sin theta sin phi)/sqrt(2) )`
/// built from `theta(x) = 2 exp(-x^2)` and `phi(x) = x exp(-x^2)`, with
/// `v0 = 0`. Requires a period long enough that both profiles decay below
/// `1e-12` at the seam.
pub fn fig1_initial_data(grid: GridSpec) -> Result<StatePair> {
    if grid.dim() != 1 {
        return Err(CoreError::InvalidParam(format!(
            "demonstration data is one-dimensional, got dim {}",
            grid.dim()
        )));
    }
    let half = 0.5 * grid.period();
    let seam = libm::exp(-half * half) * (2.0f64).max(half);
    if seam > 1e-12 {
        return Err(CoreError::InvalidParam(format!(
            "period {} too short: profiles reach {seam:.3e} at the seam",
            grid.period()
        )));
    }
    let points = grid.points();
    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    let mut c0 = Vec::with_capacity(points);
    let mut c1 = Vec::with_capacity(points);
    let mut c2 = Vec::with_capacity(points);
    for flat in 0..points {
        let x = grid.position(flat)[0];
        let bump = libm::exp(-x * x);
        let theta = 2.0 * bump;
        let phi = x * bump;
        let (st, ct) = (libm::sin(theta), libm::cos(theta));
        let (sp, cp) = (libm::sin(phi), libm::cos(phi));
        c0.push(inv_sqrt2 * (st * sp - ct));
        c1.push(-st * cp);
        c2.push(inv_sqrt2 * (ct + st * sp));
    }
    let u = Field::from_components([
        ScalarField::to_spectral(grid, &c0)?,
        ScalarField::to_spectral(grid, &c1)?,
        ScalarField::to_spectral(grid, &c2)?,
    ])?;
    StatePair::new(u, Field::zeros(grid), 0.0)
}

/// Largest pointwise inner product `|u . v|` over the grid; zero for
/// velocities tangent to the sphere along `u`.
pub fn tangency_deviation(s: &StatePair) -> f64 {
    let u = s.u.to_physical();
    let v = s.v.to_physical();
    let mut worst = 0.0f64;
    for i in 0..u[0].len() {
        let dot = u[0][i] * v[0][i] + u[1][i] * v[1][i] + u[2][i] * v[2][i];
        worst = worst.max(libm::fabs(dot));
    }
    worst
}
