//! Semidiscrete spacetime Fourier analysis on a finite time window.
//!
//! A sequence of spatial spectra at times `m tau`, `m = 0..M-1`, is treated
//! as one period of a time-periodic signal. Its transform lives on the dual
//! lattice `sigma_j = j * 2 pi / (M tau)` inside `[-pi/tau, pi/tau)`, with
//! the convention
//!
//! ```text
//! F(sigma, xi) = tau * sum_m  u_m(xi) e^{-i m tau sigma}
//! ```
//!
//! so that the discrete Parseval identity against the `l^2_tau L^2` norm has
//! constant exactly one with spectral measure `L^dim * dsigma / (2 pi)`.
//! On top of the transform sit the weighted spacetime norms built from the
//! periodicity-safe symbol `d_tau(x) = (e^{i x tau} - 1)/tau`, modulation
//! cutoffs in the distance `||sigma| - |xi||` to the light cone, and the
//! exact factorization of the discrete wave operator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{dft_direct, FftPlan};
use crate::grid::GridSpec;
use crate::spectral::{chi, measure_factor, ScalarField};
use crate::{C64, CoreError, Result};

/// Time-ordered window of spatial spectra at spacing `tau`.
#[derive(Debug, Clone)]
pub struct SpacetimeSequence {
    tau: f64,
    frames: Vec<ScalarField>,
}

impl SpacetimeSequence {
    pub fn new(tau: f64, frames: Vec<ScalarField>) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CoreError::InvalidParam(format!(
                "time step {tau} must be finite positive"
            )));
        }
        let first = match frames.first() {
            Some(f) => f.grid(),
            None => {
                return Err(CoreError::InvalidParam(
                    "a spacetime sequence needs at least one frame".into(),
                ))
            }
        };
        if frames.iter().any(|f| f.grid() != first) {
            return Err(CoreError::GridMismatch);
        }
        Ok(SpacetimeSequence { tau, frames })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> GridSpec {
        self.frames[0].grid()
    }

    pub fn window(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[ScalarField] {
        &self.frames
    }

    pub fn frame(&self, m: usize) -> &ScalarField {
        &self.frames[m]
    }

    /// Squared `l^2_tau L^2` norm: `tau * sum_m ||u_m||_{L^2}^2`.
    pub fn l2_norm_sqr(&self) -> f64 {
        let measure = measure_factor(self.grid());
        let mut acc = 0.0;
        for f in &self.frames {
            for z in f.coef() {
                acc += z.norm_sqr();
            }
        }
        self.tau * measure * acc
    }
}

/// Transform of a sequence: values on the `(sigma_j, xi)` lattice, stored
/// time-major as `data[j * points + flat]`.
#[derive(Debug, Clone)]
pub struct SpacetimeSpectrum {
    tau: f64,
    grid: GridSpec,
    window: usize,
    data: Vec<C64>,
}

impl SpacetimeSpectrum {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn delta_sigma(&self) -> f64 {
        2.0 * core::f64::consts::PI / (self.window as f64 * self.tau)
    }

    /// Signed frequency of storage row j, in `[-pi/tau, pi/tau)`.
    pub fn sigma_of(&self, j: usize) -> f64 {
        let m = self.window as i64;
        let j = j as i64;
        let signed = if 2 * j < m { j } else { j - m };
        signed as f64 * self.delta_sigma()
    }

    pub fn value(&self, j: usize, flat: usize) -> C64 {
        self.data[j * self.grid.points() + flat]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Pointwise multiply by a function of `(sigma, |xi|)`.
    pub fn apply_symbol(&mut self, mut sym: impl FnMut(f64, f64) -> f64) {
        let points = self.grid.points();
        for j in 0..self.window {
            let sigma = self.sigma_of(j);
            for flat in 0..points {
                self.data[j * points + flat] *= sym(sigma, self.grid.k_abs(flat));
            }
        }
    }
}

fn time_lines(
    input: impl Fn(usize, usize) -> C64,
    window: usize,
    points: usize,
    inverse: bool,
    scale: f64,
) -> Vec<C64> {
    let plan = if window > 1 && window.is_power_of_two() {
        Some(FftPlan::new(window))
    } else {
        None
    };
    let mut out = vec![C64::new(0.0, 0.0); window * points];
    let mut line = vec![C64::new(0.0, 0.0); window];
    for flat in 0..points {
        for (m, slot) in line.iter_mut().enumerate() {
            *slot = input(m, flat);
        }
        match &plan {
            Some(p) => p.transform(&mut line, inverse),
            None => {
                let direct = dft_direct(&line, inverse);
                line.copy_from_slice(&direct);
            }
        }
        for (j, v) in line.iter().enumerate() {
            out[j * points + flat] = v * scale;
        }
    }
    out
}

/// Forward transform `F(sigma_j, xi) = tau * sum_m u_m(xi) e^{-2 pi i jm/M}`.
pub fn spacetime_transform(seq: &SpacetimeSequence) -> SpacetimeSpectrum {
    let grid = seq.grid();
    let window = seq.window();
    let data = time_lines(
        |m, flat| seq.frames[m].coef()[flat],
        window,
        grid.points(),
        false,
        seq.tau(),
    );
    SpacetimeSpectrum { tau: seq.tau(), grid, window, data }
}

/// Inverse transform back to frames: `u_m(xi) = (M tau)^{-1} sum_j F e^{+...}`.
pub fn spacetime_inverse(spec: &SpacetimeSpectrum) -> SpacetimeSequence {
    let grid = spec.grid;
    let points = grid.points();
    let window = spec.window;
    let values = time_lines(
        |j, flat| spec.data[j * points + flat],
        window,
        points,
        true,
        1.0 / (window as f64 * spec.tau),
    );
    let frames = (0..window)
        .map(|m| {
            let coef = values[m * points..(m + 1) * points].to_vec();
            ScalarField::from_coef(grid, coef).expect("buffer sized by grid")
        })
        .collect();
    SpacetimeSequence { tau: spec.tau, frames }
}

/// The periodicity-safe frequency symbol `d_tau(x) = (e^{i x tau} - 1)/tau`.
pub fn dtau(x: f64, tau: f64) -> C64 {
    let phase = x * tau;
    C64::new(libm::cos(phase) - 1.0, libm::sin(phase)) / tau
}

/// `|d_tau(x)| = 2 |sin(x tau / 2)| / tau`.
pub fn dtau_abs(x: f64, tau: f64) -> f64 {
    2.0 * libm::fabs(libm::sin(0.5 * x * tau)) / tau
}

fn japanese_bracket(x: f64) -> f64 {
    libm::sqrt(1.0 + x * x)
}

/// Which frequency symbol feeds the weight brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightForm {
    /// `<|d_tau(|sigma|+|xi|)|>^s <|d_tau(|sigma|-|xi|)|>^b`, the form the
    /// norm is defined with.
    Literal,
    /// `<|sigma|+|xi|>^s <|sigma|-|xi|>^b`, the continuum comparison weight.
    Surrogate,
}

/// Spacetime weight at one lattice point.
pub fn bourgain_weight(sigma: f64, k_abs: f64, tau: f64, s: f64, b: f64, form: WeightForm) -> f64 {
    let plus = libm::fabs(sigma) + k_abs;
    let minus = libm::fabs(sigma) - k_abs;
    let (wp, wm) = match form {
        WeightForm::Literal => (dtau_abs(plus, tau), dtau_abs(minus, tau)),
        WeightForm::Surrogate => (plus, libm::fabs(minus)),
    };
    libm::pow(japanese_bracket(wp), s) * libm::pow(japanese_bracket(wm), b)
}

/// Weighted spacetime norm of a sequence.
///
/// The norm is defined for spatial frequencies inside `|xi| <= pi/(2 tau)`;
/// a sequence carrying mass outside that ball is rejected rather than
/// clipped.
pub fn bourgain_norm(
    seq: &SpacetimeSequence,
    s: f64,
    b: f64,
    form: WeightForm,
) -> Result<f64> {
    let grid = seq.grid();
    let limit = 0.5 * core::f64::consts::PI / seq.tau();
    for frame in seq.frames() {
        for (flat, z) in frame.coef().iter().enumerate() {
            if (z.re != 0.0 || z.im != 0.0) && grid.k_abs(flat) > limit {
                return Err(CoreError::SupportViolation { k_abs: grid.k_abs(flat), limit });
            }
        }
    }
    let spec = spacetime_transform(seq);
    let measure = measure_factor(grid) * spec.delta_sigma() / (2.0 * core::f64::consts::PI);
    let mut acc = 0.0;
    let points = grid.points();
    for j in 0..spec.window() {
        let sigma = spec.sigma_of(j);
        for flat in 0..points {
            let w = bourgain_weight(sigma, grid.k_abs(flat), seq.tau(), s, b, form);
            acc += w * w * spec.data[j * points + flat].norm_sqr();
        }
    }
    let norm = libm::sqrt(measure * acc);
    if !norm.is_finite() {
        return Err(CoreError::NonFinite { context: "bourgain_norm", step: None });
    }
    Ok(norm)
}

/// Distance of a lattice point to the light cone.
pub fn modulation(sigma: f64, k_abs: f64) -> f64 {
    libm::fabs(libm::fabs(sigma) - k_abs)
}

/// Sharp dyadic band membership for the modulation value: level 0 covers
/// `[0, 1]`, level `l >= 1` covers `(2^{l-1}, 2^l]`. The bands tile
/// `[0, inf)` exactly.
pub fn sharp_modulation_band(l: u32, value: f64) -> bool {
    if l == 0 {
        value <= 1.0
    } else {
        let hi = libm::exp2(l as f64);
        value > 0.5 * hi && value <= hi
    }
}

/// Smooth dyadic bump at level l, built from the filter shape: the family
/// telescopes, `sum_{l<=K} phi_l(x) = chi(2^{-(K+1)} x)`.
pub fn smooth_modulation_band(l: u32, value: f64) -> f64 {
    if l == 0 {
        chi(0.5 * value)
    } else {
        chi(libm::exp2(-(l as f64) - 1.0) * value) - chi(libm::exp2(-(l as f64)) * value)
    }
}

/// Restrict a sequence to modulation band l, sharp or smooth.
pub fn modulation_cutoff(seq: &SpacetimeSequence, l: u32, sharp: bool) -> SpacetimeSequence {
    let mut spec = spacetime_transform(seq);
    modulation_filter_spectrum(&mut spec, l, sharp);
    spacetime_inverse(&spec)
}

/// Spectrum-level modulation restriction.
pub fn modulation_filter_spectrum(spec: &mut SpacetimeSpectrum, l: u32, sharp: bool) {
    spec.apply_symbol(|sigma, k_abs| {
        let value = modulation(sigma, k_abs);
        if sharp {
            if sharp_modulation_band(l, value) {
                1.0
            } else {
                0.0
            }
        } else {
            smooth_modulation_band(l, value)
        }
    });
}

/// Verify the exact factorization of the discrete wave operator on a
/// periodic window: the transform of
/// `(u_m - 2 u_{m-1} + u_{m-2})/tau^2 - laplacian u_m` must equal
/// `(|xi|^2 + d_tau(-sigma)^2) F(u)`. Returns the largest absolute
/// deviation over the lattice.
pub fn box_symbol_check(seq: &SpacetimeSequence) -> Result<f64> {
    let window = seq.window();
    if window < 3 {
        return Err(CoreError::InvalidParam(format!(
            "window {window} too short for the three-point stencil"
        )));
    }
    let grid = seq.grid();
    let tau = seq.tau();
    let inv_tau2 = 1.0 / (tau * tau);
    let frames: Vec<ScalarField> = (0..window)
        .map(|m| {
            let prev = (m + window - 1) % window;
            let prev2 = (m + window - 2) % window;
            let mut out = seq.frame(m).clone();
            for flat in 0..grid.points() {
                let ka = grid.k_abs(flat);
                let stencil = (seq.frame(m).coef()[flat]
                    - 2.0 * seq.frame(prev).coef()[flat]
                    + seq.frame(prev2).coef()[flat])
                    * inv_tau2;
                out.coef_mut()[flat] = stencil + seq.frame(m).coef()[flat] * (ka * ka);
            }
            out
        })
        .collect();
    let boxed = SpacetimeSequence::new(tau, frames)?;
    let lhs = spacetime_transform(&boxed);
    let rhs = spacetime_transform(seq);
    let points = grid.points();
    let mut worst = 0.0f64;
    for j in 0..window {
        let d = dtau(-lhs.sigma_of(j), tau);
        for flat in 0..points {
            let ka = grid.k_abs(flat);
            let symbol = C64::new(ka * ka, 0.0) + d * d;
            let dev = lhs.value(j, flat) - symbol * rhs.value(j, flat);
            worst = worst.max(libm::sqrt(dev.norm_sqr()));
        }
    }
    Ok(worst)
}

/// Literal Cauchy-Schwarz sup bound from the spectral support count:
/// `sup |u| <= (M tau)^{-1} sqrt(card * sum |F|^2)`. Returns the pair
/// (observed sup over all frames and grid points, bound).
pub fn bernstein_sup_bound(spec: &SpacetimeSpectrum) -> (f64, f64) {
    let mut card = 0usize;
    let mut power = 0.0f64;
    for z in spec.data() {
        if z.re != 0.0 || z.im != 0.0 {
            card += 1;
            power += z.norm_sqr();
        }
    }
    let bound = libm::sqrt(card as f64 * power) / (spec.window() as f64 * spec.tau());
    let seq = spacetime_inverse(spec);
    let mut sup = 0.0f64;
    for frame in seq.frames() {
        for v in frame.to_physical_complex() {
            sup = sup.max(libm::sqrt(v.norm_sqr()));
        }
    }
    (sup, bound)
}
