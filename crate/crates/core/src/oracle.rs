//! Fine-step Runge-Kutta reference for the truncated flow.
//!
//! The splitting scheme discretises the low-pass truncated system
//!
//! ```text
//! u' = v,    v' = Lap u - P[ Pu (|Pv|^2 - |grad Pu|^2) ]
//! ```
//!
//! with `P` the scheme's frequency filter. Integrating the same system
//! with a classical fourth-order method at a much smaller step isolates
//! the splitting's time-discretisation error from its truncation error:
//! both solvers see the identical right-hand side, so their difference
//! measures only the step-size effect.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::propagator::StatePair;
use crate::spectral::{filter_symbol, Field, ScalarField};
use crate::stepper::SchemeParams;
use crate::{C64, CoreError, Result};

/// Width of the stability interval of the classical fourth-order method
/// on the imaginary axis, where the wave modes `+-i|k|` live.
const RK4_IMAGINARY_REACH: f64 = 2.0 * core::f64::consts::SQRT_2;

fn add_scaled(dst: &mut Field, a: f64, x: &Field) {
    for c in 0..3 {
        for (d, s) in dst.comp_mut(c).coef_mut().iter_mut().zip(x.comp(c).coef()) {
            *d += a * *s;
        }
    }
}

fn staged(base: &Field, a: f64, x: &Field) -> Field {
    let mut out = base.clone();
    add_scaled(&mut out, a, x);
    out
}

fn filtered(f: &Field, filter: Option<(f64, f64)>) -> Field {
    match filter {
        None => f.clone(),
        Some((tau, c)) => {
            let mut out = f.clone();
            out.apply_radial(|ka| filter_symbol(tau, c, ka));
            out
        }
    }
}

/// `-Pu (|Pv|^2 - |grad Pu|^2)`, filtered once more on output.
fn truncated_nonlinearity(u: &Field, v: &Field, filter: Option<(f64, f64)>) -> Result<Field> {
    let grid = u.grid();
    let fu = filtered(u, filter);
    let fv = filtered(v, filter);
    let pu = fu.to_physical();
    let pv = fv.to_physical();
    let mut bracket = vec![0.0f64; grid.points()];
    for c in 0..3 {
        for (b, w) in bracket.iter_mut().zip(&pv[c]) {
            *b += w * w;
        }
    }
    for axis in 0..grid.dim() {
        for c in 0..3 {
            let mut slope = fu.comp(c).clone();
            slope.apply_multiplier(|kp| C64::new(0.0, kp.k[axis]));
            for (b, g) in bracket.iter_mut().zip(&slope.to_physical()) {
                *b -= g * g;
            }
        }
    }
    let component = |c: usize| -> Result<ScalarField> {
        let samples: Vec<f64> =
            pu[c].iter().zip(&bracket).map(|(a, b)| -a * b).collect();
        ScalarField::to_spectral(grid, &samples)
    };
    let mut out = Field::from_components([component(0)?, component(1)?, component(2)?])?;
    if let Some((tau, c)) = filter {
        out.apply_radial(|ka| filter_symbol(tau, c, ka));
    }
    Ok(out)
}

fn derivative(
    u: &Field,
    v: &Field,
    filter: Option<(f64, f64)>,
    nonlinear: bool,
) -> Result<(Field, Field)> {
    let du = v.clone();
    let mut dv = u.clone();
    dv.apply_multiplier(|kp| C64::new(-kp.abs * kp.abs, 0.0));
    if nonlinear {
        add_scaled(&mut dv, 1.0, &truncated_nonlinearity(u, v, filter)?);
    }
    Ok((du, dv))
}

/// Largest wavenumber the filter lets through, which is what the step
/// size must resolve.
fn surviving_reach(grid: crate::grid::GridSpec, filter: Option<(f64, f64)>) -> f64 {
    let mut reach = 0.0f64;
    for flat in 0..grid.points() {
        let ka = grid.k_abs(flat);
        let gain = match filter {
            None => 1.0,
            Some((tau, c)) => filter_symbol(tau, c, ka),
        };
        if gain > 0.0 {
            reach = reach.max(ka);
        }
    }
    reach
}

fn integrate(
    s0: &StatePair,
    tau_fine: f64,
    t_final: f64,
    filter: Option<(f64, f64)>,
    nonlinear: bool,
) -> Result<StatePair> {
    if !(tau_fine.is_finite() && tau_fine > 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "reference step size {tau_fine} must be finite positive"
        )));
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "final time {t_final} must be >= 0"
        )));
    }
    if let Some((tau, c)) = filter {
        if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
            return Err(CoreError::InvalidParam(format!(
                "filter step size {tau} outside (0, 1)"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(CoreError::InvalidParam(format!(
                "filter constant {c} must be finite positive"
            )));
        }
    }
    let steps = libm::round(t_final / tau_fine);
    if libm::fabs(t_final - steps * tau_fine) > 1e-9 * (1.0 + t_final) {
        return Err(CoreError::InvalidParam(format!(
            "final time {t_final} is not an integer multiple of the reference step {tau_fine}"
        )));
    }
    let grid = s0.grid();
    let reach = surviving_reach(grid, filter);
    if tau_fine * reach > RK4_IMAGINARY_REACH {
        return Err(CoreError::InvalidParam(format!(
            "step {tau_fine} cannot resolve wavenumbers up to {reach:.6}; \
             stability requires a step of at most {:.6e}",
            RK4_IMAGINARY_REACH / reach
        )));
    }

    let mut u = filtered(&s0.u, filter);
    let mut v = filtered(&s0.v, filter);
    let h = tau_fine;
    let steps = steps as usize;
    for n in 0..steps {
        let (k1u, k1v) = derivative(&u, &v, filter, nonlinear)?;
        let (k2u, k2v) = derivative(
            &staged(&u, 0.5 * h, &k1u),
            &staged(&v, 0.5 * h, &k1v),
            filter,
            nonlinear,
        )?;
        let (k3u, k3v) = derivative(
            &staged(&u, 0.5 * h, &k2u),
            &staged(&v, 0.5 * h, &k2v),
            filter,
            nonlinear,
        )?;
        let (k4u, k4v) = derivative(
            &staged(&u, h, &k3u),
            &staged(&v, h, &k3v),
            filter,
            nonlinear,
        )?;
        for (acc, k1, k2, k3, k4) in [
            (&mut u, &k1u, &k2u, &k3u, &k4u),
            (&mut v, &k1v, &k2v, &k3v, &k4v),
        ] {
            add_scaled(acc, h / 6.0, k1);
            add_scaled(acc, h / 3.0, k2);
            add_scaled(acc, h / 3.0, k3);
            add_scaled(acc, h / 6.0, k4);
        }
        if (n % 32 == 31 || n + 1 == steps) && !(u.is_finite() && v.is_finite()) {
            return Err(CoreError::NonFinite {
                context: "rk4_oracle",
                step: Some(n + 1),
            });
        }
    }
    Ok(StatePair { u, v, time: s0.time + t_final })
}

/// Integrate the truncated system with the classical fourth-order method
/// at step `tau_fine`. `filter = Some((tau, constant))` applies the
/// scheme's low-pass at that scale to the initial data, to every
/// nonlinearity factor, and to the nonlinearity output; `None` leaves the
/// system untruncated. Rejects steps outside the stability interval of
/// the surviving modes, reporting the largest admissible step.
pub fn rk4_oracle(
    s0: &StatePair,
    tau_fine: f64,
    t_final: f64,
    filter: Option<(f64, f64)>,
) -> Result<StatePair> {
    integrate(s0, tau_fine, t_final, filter, true)
}

/// Reference solution matched to one scheme run: same final time and the
/// same filter scale, so the difference to the scheme's output is pure
/// time-discretisation error.
pub fn rk4_reference(s0: &StatePair, p: &SchemeParams, tau_fine: f64) -> Result<StatePair> {
    rk4_oracle(s0, tau_fine, p.t_end(), Some((p.tau(), p.filter_constant())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::propagator::free_evolution;
    use crate::rate::fit_rate;
    use crate::refsol::{geodesic_state, GeodesicData};
    use crate::stepper::evolve;

    fn smooth_state(grid: GridSpec) -> StatePair {
        let n = grid.points();
        let mut a = vec![0.0f64; n];
        let mut b = vec![0.0f64; n];
        let mut c = vec![0.0f64; n];
        let mut w = vec![0.0f64; n];
        for flat in 0..n {
            let x = grid.position(flat)[0];
            a[flat] = libm::exp(-x * x);
            b[flat] = x * libm::exp(-0.5 * x * x);
            c[flat] = libm::exp(-0.25 * (x - 1.0) * (x - 1.0));
            w[flat] = 0.3 * libm::exp(-x * x) * libm::cos(x);
        }
        let field = |s: &[f64]| ScalarField::to_spectral(grid, s).unwrap();
        StatePair {
            u: Field::from_components([field(&a), field(&b), field(&c)]).unwrap(),
            v: Field::from_components([
                field(&w),
                ScalarField::zeros(grid),
                field(&b),
            ])
            .unwrap(),
            time: 0.0,
        }
    }

    #[test]
    fn linear_mode_tracks_the_exact_flow() {
        let grid = GridSpec::new(1, 64, 20.0).unwrap();
        let s0 = smooth_state(grid);
        let fine = integrate(&s0, 1e-3, 0.5, None, false).unwrap();
        let exact = free_evolution(&s0, 0.5);
        let mut worst = 0.0f64;
        for c in 0..3 {
            for (a, b) in fine.u.comp(c).coef().iter().zip(exact.u.comp(c).coef()) {
                worst = worst.max((a - b).norm_sqr());
            }
            for (a, b) in fine.v.comp(c).coef().iter().zip(exact.v.comp(c).coef()) {
                worst = worst.max((a - b).norm_sqr());
            }
        }
        let worst = libm::sqrt(worst);
        assert!(worst < 1e-8, "fourth-order linear defect {worst:.3e}");
        assert!((fine.time - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_map_is_a_fixed_point() {
        let grid = GridSpec::new(1, 32, core::f64::consts::TAU).unwrap();
        let flat = vec![0.6f64; grid.points()];
        let comp = |s: &[f64]| ScalarField::to_spectral(grid, s).unwrap();
        let s0 = StatePair {
            u: Field::from_components([
                comp(&flat),
                comp(&vec![0.8; grid.points()]),
                ScalarField::zeros(grid),
            ])
            .unwrap(),
            v: Field::zeros(grid),
            time: 0.0,
        };
        let out = rk4_oracle(&s0, 0.01, 0.2, Some((0.04, 1.0))).unwrap();
        assert_eq!(out.u, s0.u);
        assert_eq!(out.v, s0.v);
        assert!((out.time - 0.2).abs() < 1e-15);
    }

    #[test]
    fn coarse_steps_are_rejected_with_a_usable_bound() {
        let grid = GridSpec::new(1, 64, core::f64::consts::TAU).unwrap();
        let s0 = smooth_state(grid);
        let err = rk4_oracle(&s0, 0.2, 1.0, None).unwrap_err();
        match err {
            CoreError::InvalidParam(msg) => {
                assert!(msg.contains("at most"), "message: {msg}")
            }
            other => panic!("unexpected error {other:?}"),
        }
        // the same step is fine once the filter removes the fast modes
        let ok = rk4_oracle(&s0, 0.2, 1.0, Some((0.25, 1.0)));
        assert!(ok.is_ok(), "filtered run rejected: {ok:?}");
    }

    #[test]
    fn splitting_converges_to_the_oracle_at_first_order() {
        let grid = GridSpec::new(1, 256, 20.0).unwrap();
        let n = grid.points();
        let mut theta = vec![0.0f64; n];
        let mut omega = vec![0.0f64; n];
        for flat in 0..n {
            let x = grid.position(flat)[0];
            theta[flat] = 2.0 * libm::exp(-x * x);
            omega[flat] = 0.5 * x * libm::exp(-x * x);
        }
        let data = GeodesicData::new(
            ScalarField::to_spectral(grid, &theta).unwrap(),
            ScalarField::to_spectral(grid, &omega).unwrap(),
        )
        .unwrap();
        let s0 = geodesic_state(&data, 0.0);

        let mut pairs = Vec::new();
        for level in [5, 6, 7] {
            let tau = libm::exp2(-(level as f64));
            let p = SchemeParams::new(grid, tau, 0.25, 1.0).unwrap();
            let split = evolve(&s0, &p, |_, _| {}).unwrap();
            let reference = rk4_reference(&s0, &p, tau / 16.0).unwrap();
            let mut du = split.u.clone();
            add_scaled(&mut du, -1.0, &reference.u);
            let mut dv = split.v.clone();
            add_scaled(&mut dv, -1.0, &reference.v);
            let err = du.sobolev_norm(0.0).unwrap() + dv.sobolev_norm(-1.0).unwrap();
            pairs.push((tau, err));
        }
        let fit = fit_rate(&pairs).unwrap();
        assert!(
            (0.75..=1.25).contains(&fit.slope),
            "splitting-versus-reference slope {} with errors {:?}",
            fit.slope,
            pairs
        );
    }
}
