//! Dispersive-estimate monitor for the free half-wave flow.
//!
//! For frequency-localized data `f` on a dyadic block, the flow
//! `u_m = e^{i m tau |grad|} f` is measured in the mixed norm
//! `l^p_tau L^q` over the unit time window and compared against the
//! homogeneous Sobolev norm of the data at the scaling exponent
//! `gamma = 3/2 - 1/p - 3/q`. The estimate carries an unquantified
//! constant, so the monitor reports ratio statistics over random data and
//! a step-size ladder rather than asserting a bound; exact special cases
//! (the energy pair, single-mode data) do admit closed forms and are
//! asserted in the tests.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::fft::FftPlan;
use crate::grid::GridSpec;
use crate::rng::SeedStream;
use crate::spectral::{inverse_in_place, measure_factor};
use crate::{C64, CoreError, Result};

const MONITOR_N: usize = 32;

/// Scaling exponent of the admissible pair.
pub fn strichartz_exponent(p: f64, q: f64) -> f64 {
    1.5 - 1.0 / p - 3.0 / q
}

fn check_admissible(p: f64, q: f64) -> Result<()> {
    let ok = p > 2.0 && q >= 2.0 && q.is_finite() && 1.0 / p + 1.0 / q <= 0.5 + 1e-12;
    if ok {
        Ok(())
    } else {
        Err(CoreError::InvalidParam(format!(
            "pair ({p}, {q}) is not admissible: need p > 2, 2 <= q < inf, \
             1/p + 1/q <= 1/2"
        )))
    }
}

/// Ratio statistics at one step size.
#[derive(Debug, Clone, Copy)]
pub struct StrichartzRung {
    pub tau: f64,
    pub steps: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
}

/// Monitor output over the whole ladder.
#[derive(Debug, Clone)]
pub struct StrichartzReport {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub k_level: u32,
    pub trials: usize,
    pub seed: u64,
    pub rungs: Vec<StrichartzRung>,
}

fn dyadic_block(grid: GridSpec, level: u32) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for flat in 0..grid.points() {
        let ka = grid.k_abs(flat);
        if ka == 0.0 {
            continue;
        }
        let inside = if level == 0 {
            ka <= 1.0
        } else {
            let hi = libm::exp2(level as f64);
            ka > 0.5 * hi && ka <= hi
        };
        if inside {
            out.push((flat, ka));
        }
    }
    out
}

fn lq_power_sum(buf: &[C64], q: f64) -> f64 {
    let mut acc = 0.0;
    if q == 2.0 {
        for z in buf {
            acc += z.norm_sqr();
        }
    } else if q == 4.0 {
        for z in buf {
            let n = z.norm_sqr();
            acc += n * n;
        }
    } else {
        for z in buf {
            acc += libm::pow(z.norm_sqr(), 0.5 * q);
        }
    }
    acc
}

fn ratio_for_data(
    grid: GridSpec,
    plan: &FftPlan,
    modes: &[(usize, f64)],
    amps: &[C64],
    p: f64,
    q: f64,
    gamma: f64,
    tau: f64,
    steps: usize,
) -> f64 {
    let mut rhs_sum = 0.0;
    for ((_, ka), a) in modes.iter().zip(amps) {
        rhs_sum += libm::pow(*ka, 2.0 * gamma) * a.norm_sqr();
    }
    let rhs = libm::sqrt(measure_factor(grid) * rhs_sum);

    let cell = libm::pow(grid.delta_x(), grid.dim() as f64);
    let phases: Vec<C64> = modes
        .iter()
        .map(|(_, ka)| C64::new(libm::cos(tau * ka), libm::sin(tau * ka)))
        .collect();
    let mut current = amps.to_vec();
    let mut coef = vec![C64::new(0.0, 0.0); grid.points()];
    let mut scratch = vec![C64::new(0.0, 0.0); grid.points()];

    let mut lp_sum = 0.0;
    let mut lp_max = 0.0f64;
    for m in 0..steps {
        if m > 0 {
            for (c, ph) in current.iter_mut().zip(&phases) {
                *c *= *ph;
            }
        }
        for ((flat, _), c) in modes.iter().zip(&current) {
            coef[*flat] = *c;
        }
        scratch.copy_from_slice(&coef);
        inverse_in_place(grid, plan, &mut scratch);
        let lq = libm::pow(cell * lq_power_sum(&scratch, q), 1.0 / q);
        if p.is_infinite() {
            lp_max = lp_max.max(lq);
        } else {
            lp_sum += libm::pow(lq, p);
        }
    }
    let lhs = if p.is_infinite() {
        lp_max
    } else {
        libm::pow(tau * lp_sum, 1.0 / p)
    };
    lhs / rhs
}

/// Measure `l^p_tau L^q` against the data's homogeneous Sobolev norm for
/// random block-localized data across a step-size ladder.
///
/// Runs on a three-dimensional `2 pi`-periodic grid of 32 points per axis
/// over the unit time window. The block must stay inside the
/// `|xi| <= pi/(2 tau)` restriction at every ladder rung.
pub fn strichartz_monitor(
    p: f64,
    q: f64,
    k_level: u32,
    trials: usize,
    taus: &[f64],
    seed: u64,
) -> Result<StrichartzReport> {
    check_admissible(p, q)?;
    if trials == 0 || taus.is_empty() {
        return Err(CoreError::InvalidParam(
            "the monitor needs at least one trial and one step size".into(),
        ));
    }
    let grid = GridSpec::new(3, MONITOR_N, 2.0 * core::f64::consts::PI)?;
    let modes = dyadic_block(grid, k_level);
    if modes.is_empty() {
        return Err(CoreError::InfeasibleScales(format!(
            "dyadic block {k_level} holds no modes on the monitor grid"
        )));
    }
    let gamma = strichartz_exponent(p, q);
    let plan = FftPlan::new(grid.n_per_axis());
    let block_top = libm::exp2(k_level as f64);

    let mut rungs = Vec::with_capacity(taus.len());
    for (r, &tau) in taus.iter().enumerate() {
        if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
            return Err(CoreError::InvalidParam(format!(
                "step size {tau} outside (0, 1)"
            )));
        }
        let limit = 0.5 * core::f64::consts::PI / tau;
        if block_top > limit {
            return Err(CoreError::SupportViolation { k_abs: block_top, limit });
        }
        let steps = libm::round(1.0 / tau) as usize;
        let steps = steps.max(1);

        let mut ratios = Vec::with_capacity(trials);
        for t in 0..trials {
            let mut rng = SeedStream::fork(seed, (r * trials + t) as u64);
            let amps: Vec<C64> = modes
                .iter()
                .map(|_| C64::new(rng.next_symmetric(), rng.next_symmetric()))
                .collect();
            ratios.push(ratio_for_data(
                grid, &plan, &modes, &amps, p, q, gamma, tau, steps,
            ));
        }
        ratios.sort_unstable_by(f64::total_cmp);
        let max_ratio = *ratios.last().expect("trials > 0");
        let median_ratio = if trials % 2 == 1 {
            ratios[trials / 2]
        } else {
            0.5 * (ratios[trials / 2 - 1] + ratios[trials / 2])
        };
        if !max_ratio.is_finite() {
            return Err(CoreError::NonFinite { context: "strichartz_monitor", step: None });
        }
        rungs.push(StrichartzRung { tau, steps, max_ratio, median_ratio });
    }
    Ok(StrichartzReport { p, q, gamma, k_level, trials, seed, rungs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_pair_is_exactly_unitary() {
        let report =
            strichartz_monitor(f64::INFINITY, 2.0, 2, 4, &[0.125, 0.0625], 11).unwrap();
        assert!((report.gamma - 0.0).abs() < 1e-15);
        for rung in &report.rungs {
            assert!(
                (rung.max_ratio - 1.0).abs() <= 1e-12,
                "tau {}: ratio {}",
                rung.tau,
                rung.max_ratio
            );
            assert!((rung.median_ratio - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_mode_ratio_matches_the_closed_form() {
        let grid = GridSpec::new(3, MONITOR_N, 2.0 * core::f64::consts::PI).unwrap();
        let plan = FftPlan::new(grid.n_per_axis());
        let flat = grid.flat_index([0, 0, grid.index_of_mode(3)]);
        let ka = grid.k_abs(flat);
        assert_eq!(ka, 3.0);
        let amp = C64::new(0.8, -0.3);
        let (p, q) = (4.0, 4.0);
        let gamma = strichartz_exponent(p, q);
        let tau = 0.125;
        let steps = 8usize;
        let ratio = ratio_for_data(
            grid,
            &plan,
            &[(flat, ka)],
            &[amp],
            p,
            q,
            gamma,
            tau,
            steps,
        );
        // |u| is constant in space and time, so the mixed norm is
        // (tau steps)^{1/p} |amp| L^{3/q} while the data norm is
        // |k|^gamma |amp| L^{3/2}
        let l = 2.0 * core::f64::consts::PI;
        let expect = libm::pow(tau * steps as f64, 1.0 / p)
            * libm::pow(l, 3.0 / q - 1.5)
            * libm::pow(ka, -gamma);
        assert!(
            (ratio - expect).abs() < 1e-10 * expect,
            "{ratio} vs {expect}"
        );
    }

    #[test]
    fn ladder_ratios_stay_within_a_factor_of_two() {
        let report =
            strichartz_monitor(4.0, 4.0, 3, 6, &[0.125, 0.0625, 0.03125], 7).unwrap();
        let max = report
            .rungs
            .iter()
            .map(|r| r.max_ratio)
            .fold(0.0f64, f64::max);
        let min = report
            .rungs
            .iter()
            .map(|r| r.max_ratio)
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        assert!(max / min < 2.0, "ladder spread {max}/{min}");
        for r in &report.rungs {
            assert!(r.median_ratio <= r.max_ratio);
        }
    }

    #[test]
    fn inadmissible_pairs_are_rejected() {
        for (p, q) in [
            (2.0, 4.0),
            (1.5, 8.0),
            (4.0, f64::INFINITY),
            (3.0, 3.0),
            (2.2, 8.0),
            (f64::NAN, 4.0),
        ] {
            assert!(
                matches!(
                    strichartz_monitor(p, q, 2, 1, &[0.125], 0),
                    Err(CoreError::InvalidParam(_))
                ),
                "({p}, {q}) should be rejected"
            );
        }
    }

    #[test]
    fn block_support_must_fit_the_step_size() {
        match strichartz_monitor(4.0, 4.0, 4, 1, &[0.125], 0) {
            Err(CoreError::SupportViolation { k_abs, limit }) => {
                assert_eq!(k_abs, 16.0);
                assert!(limit < 16.0);
            }
            other => panic!("expected a support violation, got {other:?}"),
        }

        match strichartz_monitor(4.0, 4.0, 6, 1, &[1.0 / 64.0], 0) {
            Err(CoreError::InfeasibleScales(_)) => {}
            other => panic!("expected an empty block, got {other:?}"),
        }
    }
}
