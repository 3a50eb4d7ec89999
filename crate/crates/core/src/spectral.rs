//! Scalar and three-component spectral fields: trigonometric interpolation,
//! Fourier multipliers, Sobolev norms, the smooth low-pass filter and the
//! Littlewood-Paley blocks derived from it.
//!
//! Normalization anchor: the constant field 1 transforms to a single
//! coefficient 1 at k = 0, i.e. coefficients are those of `sum c_k e^{i k x}`
//! on the centered torus, and `||f||_{L^2}^2 = L^dim sum_k |c_k|^2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{transform_axes, FftPlan};
use crate::grid::GridSpec;
use crate::{C64, CoreError, Result};

/// One point of the wavenumber lattice, as seen by a multiplier.
#[derive(Debug, Clone, Copy)]
pub struct KPoint {
    /// Physical wavevector components (unused axes are 0).
    pub k: [f64; 3],
    /// Euclidean magnitude |k|.
    pub abs: f64,
}

/// Complex spectral coefficients of one scalar function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    coef: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, coef: vec![C64::new(0.0, 0.0); grid.points()] }
    }

    pub fn from_coef(grid: GridSpec, coef: Vec<C64>) -> Result<Self> {
        if coef.len() != grid.points() {
            return Err(CoreError::ShapeMismatch { expected: grid.points(), got: coef.len() });
        }
        Ok(ScalarField { grid, coef })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coef(&self) -> &[C64] {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut [C64] {
        &mut self.coef
    }

    /// Interpolate real samples (row-major, one per grid point).
    pub fn to_spectral(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        let complex: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::to_spectral_complex(grid, &complex)
    }

    /// Interpolate complex samples (row-major, one per grid point).
    pub fn to_spectral_complex(grid: GridSpec, samples: &[C64]) -> Result<Self> {
        if samples.len() != grid.points() {
            return Err(CoreError::ShapeMismatch { expected: grid.points(), got: samples.len() });
        }
        let plan = FftPlan::new(grid.n_per_axis());
        let mut coef = samples.to_vec();
        forward_in_place(grid, &plan, &mut coef);
        Ok(ScalarField { grid, coef })
    }

    /// Real samples of the interpolant. Meaningful for conjugate-symmetric
    /// coefficient sets (real-valued fields); the imaginary residue is
    /// discarded.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().iter().map(|z| z.re).collect()
    }

    pub fn to_physical_complex(&self) -> Vec<C64> {
        let plan = FftPlan::new(self.grid.n_per_axis());
        let mut buf = self.coef.clone();
        inverse_in_place(self.grid, &plan, &mut buf);
        buf
    }

    /// Multiply every coefficient by a symbol evaluated on its lattice point.
    pub fn apply_multiplier(&mut self, mut sym: impl FnMut(KPoint) -> C64) {
        for (flat, c) in self.coef.iter_mut().enumerate() {
            let k = self.grid.wavevector(flat);
            let abs = self.grid.k_abs(flat);
            *c *= sym(KPoint { k, abs });
        }
    }

    /// As `apply_multiplier`, returning a new field.
    pub fn with_multiplier(&self, sym: impl FnMut(KPoint) -> C64) -> Self {
        let mut out = self.clone();
        out.apply_multiplier(sym);
        out
    }

    /// Multiply by a real radial symbol of |k|.
    pub fn apply_radial(&mut self, mut sym: impl FnMut(f64) -> f64) {
        for (flat, c) in self.coef.iter_mut().enumerate() {
            *c *= sym(self.grid.k_abs(flat));
        }
    }

    /// `( L^dim sum_k <k>^{2s} |c_k|^2 )^{1/2}` with `<k> = (1+|k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        let measure = measure_factor(self.grid);
        let mut acc = 0.0;
        for (flat, c) in self.coef.iter().enumerate() {
            let ka = self.grid.k_abs(flat);
            let weight = libm::pow(1.0 + ka * ka, s);
            acc += weight * c.norm_sqr();
        }
        let norm = libm::sqrt(measure * acc);
        if norm.is_finite() {
            Ok(norm)
        } else {
            Err(CoreError::NonFinite { context: "sobolev_norm", step: None })
        }
    }

    /// Largest coefficient magnitude (squared norm avoided for speed).
    pub fn max_coef_abs(&self) -> f64 {
        self.coef
            .iter()
            .map(|c| libm::sqrt(c.norm_sqr()))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coef.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Spatial Parseval measure: one factor L per axis.
pub(crate) fn measure_factor(grid: GridSpec) -> f64 {
    libm::pow(grid.period(), grid.dim() as f64)
}

/// Forward transform in place: DFT, then the centered-torus parity phase and
/// the 1/N^dim normalization.
pub(crate) fn forward_in_place(grid: GridSpec, plan: &FftPlan, buf: &mut [C64]) {
    transform_axes(buf, grid.dim(), grid.n_per_axis(), plan, false);
    let scale = 1.0 / grid.points() as f64;
    for (flat, c) in buf.iter_mut().enumerate() {
        *c *= grid.center_parity(flat) * scale;
    }
}

/// Inverse of `forward_in_place`.
pub(crate) fn inverse_in_place(grid: GridSpec, plan: &FftPlan, buf: &mut [C64]) {
    for (flat, c) in buf.iter_mut().enumerate() {
        *c *= grid.center_parity(flat);
    }
    transform_axes(buf, grid.dim(), grid.n_per_axis(), plan, true);
}

/// Three-component field (maps into R^3), one scalar field per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    comps: [ScalarField; 3],
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Field {
            comps: [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn from_components(comps: [ScalarField; 3]) -> Result<Self> {
        if comps[1].grid() != comps[0].grid() || comps[2].grid() != comps[0].grid() {
            return Err(CoreError::GridMismatch);
        }
        Ok(Field { comps })
    }

    pub fn grid(&self) -> GridSpec {
        self.comps[0].grid()
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.comps[i]
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn apply_multiplier(&mut self, sym: impl FnMut(KPoint) -> C64 + Copy) {
        for c in self.comps.iter_mut() {
            c.apply_multiplier(sym);
        }
    }

    pub fn apply_radial(&mut self, sym: impl FnMut(f64) -> f64 + Copy) {
        for c in self.comps.iter_mut() {
            c.apply_radial(sym);
        }
    }

    /// Component-wise physical samples.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        [self.comps[0].to_physical(), self.comps[1].to_physical(), self.comps[2].to_physical()]
    }

    /// `( sum_c ||f_c||_{H^s}^2 )^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for c in &self.comps {
            let n = c.sobolev_norm(s)?;
            acc += n * n;
        }
        Ok(libm::sqrt(acc))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(ScalarField::is_finite)
    }
}

/// Pointwise difference of two fields on the same grid.
pub fn field_difference(a: &Field, b: &Field) -> Result<Field> {
    if a.grid() != b.grid() {
        return Err(CoreError::GridMismatch);
    }
    let mut out = a.clone();
    for c in 0..3 {
        for (x, y) in out.comps[c].coef_mut().iter_mut().zip(b.comps[c].coef()) {
            *x -= y;
        }
    }
    Ok(out)
}

fn omega(t: f64) -> f64 {
    if t > 0.0 {
        libm::exp(-1.0 / t)
    } else {
        0.0
    }
}

/// Smooth radial bump: exactly 1 for |r| <= 1/2, exactly 0 for |r| >= 1,
/// and the exponential bridge `w(2-2r) / (w(2-2r) + w(2r-1))` in between,
/// with `w(t) = exp(-1/t)` for t > 0. Smooth, even, nonincreasing in |r|.
pub fn chi(r: f64) -> f64 {
    let r = libm::fabs(r);
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        let a = omega(2.0 - 2.0 * r);
        let b = omega(2.0 * r - 1.0);
        a / (a + b)
    }
}

/// Default low-pass constant of the scheme's frequency filter.
pub const FILTER_CONSTANT: f64 = 100.0;

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
        return Err(CoreError::InvalidParam(alloc::format!(
            "filter step size {tau} outside (0, 1)"
        )));
    }
    Ok(())
}

/// The filter symbol `chi(c sqrt(tau) |k|)` at one wavenumber magnitude.
pub fn filter_symbol(tau: f64, constant: f64, k_abs: f64) -> f64 {
    chi(constant * libm::sqrt(tau) * k_abs)
}

/// Low-pass filter at the scheme's frequency scale: multiplies every
/// coefficient by `chi(c sqrt(tau) |k|)`. Identity (bitwise) on modes with
/// `c sqrt(tau) |k| <= 1/2`, exact annihilation above `c sqrt(tau) |k| > 1`.
pub fn filter_scalar_with(f: &ScalarField, tau: f64, constant: f64) -> Result<ScalarField> {
    check_tau(tau)?;
    let mut out = f.clone();
    out.apply_radial(|ka| filter_symbol(tau, constant, ka));
    Ok(out)
}

/// `filter_scalar_with` at the default constant 100.
pub fn filter_scalar(f: &ScalarField, tau: f64) -> Result<ScalarField> {
    filter_scalar_with(f, tau, FILTER_CONSTANT)
}

/// Component-wise field filter, default constant.
pub fn filter_field(f: &Field, tau: f64) -> Result<Field> {
    filter_field_with(f, tau, FILTER_CONSTANT)
}

pub fn filter_field_with(f: &Field, tau: f64, constant: f64) -> Result<Field> {
    check_tau(tau)?;
    let mut out = f.clone();
    out.apply_radial(|ka| filter_symbol(tau, constant, ka));
    Ok(out)
}

/// How the filter at `(tau, constant)` treats the modes of `grid`:
/// `(passed, attenuated, annihilated)` mode counts.
pub fn filter_census(grid: GridSpec, tau: f64, constant: f64) -> (usize, usize, usize) {
    let scale = constant * libm::sqrt(tau);
    let (mut pass, mut att, mut kill) = (0, 0, 0);
    for flat in 0..grid.points() {
        let r = scale * grid.k_abs(flat);
        if r <= 0.5 {
            pass += 1;
        } else if r > 1.0 {
            kill += 1;
        } else {
            att += 1;
        }
    }
    (pass, att, kill)
}

/// Dyadic Littlewood-Paley symbol at scale `k`: `chi(r)` for k = 0, else
/// `chi(2^-k r) - chi(2^-(k-1) r)`, supported in `2^(k-2) < r < 2^k`.
pub fn lp_symbol(k: u32, r: f64) -> f64 {
    if k == 0 {
        chi(r)
    } else {
        chi(libm::exp2(-(k as f64)) * r) - chi(libm::exp2(-((k - 1) as f64)) * r)
    }
}

/// Littlewood-Paley block of `f` at dyadic scale `k`.
pub fn lp_block(f: &ScalarField, k: u32) -> ScalarField {
    let mut out = f.clone();
    out.apply_radial(|ka| lp_symbol(k, ka));
    out
}

/// Low-frequency part `sum_{j <= k} (block j)`, i.e. multiplier
/// `chi(2^-k |xi|)`.
pub fn lp_low(f: &ScalarField, k: u32) -> ScalarField {
    let mut out = f.clone();
    out.apply_radial(|ka| chi(libm::exp2(-(k as f64)) * ka));
    out
}
