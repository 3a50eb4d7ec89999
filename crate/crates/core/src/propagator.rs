//! Exact free evolution for the first-order wave system, applied per mode.
//!
//! On each wavenumber the pair `(u, v) = (u, du/dt)` rotates through
//!
//! ```text
//! [ cos(t|k|)         sin(t|k|)/|k| ]
//! [ -|k| sin(t|k|)    cos(t|k|)     ]
//! ```
//!
//! with the k = 0 limit `u += t v`. The symbols are real and even in k, so
//! conjugate symmetry of coefficients (real-valued fields) is preserved
//! bitwise.

use crate::spectral::{Field, ScalarField};
use crate::{C64, CoreError, Result};

/// A first-order state: position field, velocity field, timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub u: Field,
    pub v: Field,
    pub time: f64,
}

impl StatePair {
    pub fn new(u: Field, v: Field, time: f64) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(CoreError::GridMismatch);
        }
        Ok(StatePair { u, v, time })
    }

    pub fn grid(&self) -> crate::grid::GridSpec {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.time.is_finite()
    }
}

/// Advance a scalar `(theta, dtheta/dt)` pair by time `t` under the free
/// wave equation. This is the per-component kernel of `free_evolution` and
/// the propagator behind the geodesic reference solutions.
pub fn free_wave_scalar(theta: &ScalarField, theta_dot: &ScalarField, t: f64) -> (ScalarField, ScalarField) {
    debug_assert_eq!(theta.grid(), theta_dot.grid());
    let grid = theta.grid();
    let mut out_u = theta.clone();
    let mut out_v = theta_dot.clone();
    for flat in 0..grid.points() {
        let w = grid.k_abs(flat);
        let (a, b) = (theta.coef()[flat], theta_dot.coef()[flat]);
        if w == 0.0 {
            out_u.coef_mut()[flat] = a + b * t;
            // velocity unchanged
        } else {
            let c = libm::cos(t * w);
            let s = libm::sin(t * w);
            out_u.coef_mut()[flat] = a * c + b * (s / w);
            out_v.coef_mut()[flat] = a * (-w * s) + b * c;
        }
    }
    (out_u, out_v)
}

/// Exact free flow of the full state by time `t` (componentwise scalar
/// kernel); the timestamp advances by `t`.
pub fn free_evolution(s: &StatePair, t: f64) -> StatePair {
    let mut comps_u = alloc::vec::Vec::with_capacity(3);
    let mut comps_v = alloc::vec::Vec::with_capacity(3);
    for c in 0..3 {
        let (u, v) = free_wave_scalar(s.u.comp(c), s.v.comp(c), t);
        comps_u.push(u);
        comps_v.push(v);
    }
    let u = Field::from_components([
        comps_u.remove(0),
        comps_u.remove(0),
        comps_u.remove(0),
    ])
    .expect("components share the input grid");
    let v = Field::from_components([
        comps_v.remove(0),
        comps_v.remove(0),
        comps_v.remove(0),
    ])
    .expect("components share the input grid");
    StatePair { u, v, time: s.time + t }
}

/// Half-wave propagator `e^{sign * i t |nabla|}` on a scalar field.
pub fn half_wave(f: &ScalarField, t: f64, positive: bool) -> ScalarField {
    let sign = if positive { 1.0 } else { -1.0 };
    f.with_multiplier(|p| {
        let phi = sign * t * p.abs;
        C64::new(libm::cos(phi), libm::sin(phi))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::rng::SeedStream;
    use crate::spectral::Field;

    fn random_state(grid: GridSpec, seed: u64) -> StatePair {
        let mut rng = SeedStream::new(seed);
        let mut mk = |_: usize| {
            let samples: alloc::vec::Vec<f64> =
                (0..grid.points()).map(|_| rng.next_symmetric()).collect();
            ScalarField::to_spectral(grid, &samples).unwrap()
        };
        let u = Field::from_components([mk(0), mk(1), mk(2)]).unwrap();
        let v = Field::from_components([mk(3), mk(4), mk(5)]).unwrap();
        StatePair::new(u, v, 0.0).unwrap()
    }

    fn state_distance(a: &StatePair, b: &StatePair) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..3 {
            for (x, y) in a.u.comp(c).coef().iter().zip(b.u.comp(c).coef()) {
                worst = worst.max((x - y).norm_sqr().sqrt());
            }
            for (x, y) in a.v.comp(c).coef().iter().zip(b.v.comp(c).coef()) {
                worst = worst.max((x - y).norm_sqr().sqrt());
            }
        }
        worst
    }

    #[test]
    fn group_law_over_random_time_pairs() {
        let grid = GridSpec::new(1, 64, 20.0).unwrap();
        let s0 = random_state(grid, 0xf00d);
        let mut rng = SeedStream::new(0xbeef);
        for _ in 0..100 {
            let t = 4.0 * rng.next_symmetric();
            let s = 4.0 * rng.next_symmetric();
            let two_step = free_evolution(&free_evolution(&s0, t), s);
            let one_step = free_evolution(&s0, t + s);
            assert!(state_distance(&two_step, &one_step) < 1e-12);
            assert!((two_step.time - one_step.time).abs() < 1e-12);
        }
    }

    #[test]
    fn per_mode_energy_is_conserved() {
        let grid = GridSpec::new(2, 16, 11.0).unwrap();
        let s0 = random_state(grid, 0xcafe);
        let s1 = free_evolution(&s0, 1.7);
        for c in 0..3 {
            for flat in 0..grid.points() {
                let w2 = grid.k_abs(flat).powi(2);
                let e0 = w2 * s0.u.comp(c).coef()[flat].norm_sqr()
                    + s0.v.comp(c).coef()[flat].norm_sqr();
                let e1 = w2 * s1.u.comp(c).coef()[flat].norm_sqr()
                    + s1.v.comp(c).coef()[flat].norm_sqr();
                assert!((e0 - e1).abs() <= 1e-12 * e0.max(1e-30), "mode {flat}");
            }
        }
    }

    #[test]
    fn zero_mode_shears() {
        let grid = GridSpec::new(1, 8, 1.0).unwrap();
        let mut u = Field::zeros(grid);
        let mut v = Field::zeros(grid);
        u.comp_mut(0).coef_mut()[0] = C64::new(2.0, 0.0);
        v.comp_mut(0).coef_mut()[0] = C64::new(0.5, 0.0);
        let s = free_evolution(&StatePair::new(u, v, 0.0).unwrap(), 3.0);
        assert_eq!(s.u.comp(0).coef()[0], C64::new(3.5, 0.0));
        assert_eq!(s.v.comp(0).coef()[0], C64::new(0.5, 0.0));
    }

    #[test]
    fn reversal_restores_initial_state() {
        let grid = GridSpec::new(1, 128, 20.0).unwrap();
        let s0 = random_state(grid, 0x1234);
        let fwd = free_evolution(&s0, 0.9);
        let back = free_evolution(&fwd, -0.9);
        assert!(state_distance(&back, &s0) < 1e-12);
    }

    #[test]
    fn conjugate_symmetry_is_preserved_bitwise() {
        let grid = GridSpec::new(1, 32, 20.0).unwrap();
        // build an exactly conjugate-symmetric state by hand
        let mut rng = SeedStream::new(0x911);
        let mut mk = || {
            let mut f = ScalarField::zeros(grid);
            f.coef_mut()[0] = C64::new(rng.next_symmetric(), 0.0);
            f.coef_mut()[16] = C64::new(rng.next_symmetric(), 0.0);
            for m in 1..16i64 {
                let z = C64::new(rng.next_symmetric(), rng.next_symmetric());
                f.coef_mut()[grid.index_of_mode(m)] = z;
                f.coef_mut()[grid.index_of_mode(-m)] = z.conj();
            }
            f
        };
        let u = Field::from_components([mk(), mk(), mk()]).unwrap();
        let v = Field::from_components([mk(), mk(), mk()]).unwrap();
        let s = free_evolution(&StatePair::new(u, v, 0.0).unwrap(), 0.37);
        for c in 0..3 {
            for field in [s.u.comp(c), s.v.comp(c)] {
                assert_eq!(field.coef()[0].im, 0.0);
                assert_eq!(field.coef()[16].im, 0.0);
                for m in 1..16i64 {
                    let plus = field.coef()[grid.index_of_mode(m)];
                    let minus = field.coef()[grid.index_of_mode(-m)];
                    assert_eq!(plus.re.to_bits(), minus.re.to_bits());
                    assert_eq!(plus.im.to_bits(), (-minus.im).to_bits());
                }
            }
        }
    }

    #[test]
    fn half_wave_rotates_phases() {
        let grid = GridSpec::new(1, 16, 2.0 * core::f64::consts::PI).unwrap();
        let mut f = ScalarField::zeros(grid);
        f.coef_mut()[grid.index_of_mode(3)] = C64::new(1.0, 0.0);
        let t = 0.4;
        let g = half_wave(&f, t, true);
        let expect = C64::new((3.0 * t).cos(), (3.0 * t).sin());
        assert!((g.coef()[grid.index_of_mode(3)] - expect).norm_sqr().sqrt() < 1e-15);
        // modulus preserved everywhere, inverse sign restores
        let back = half_wave(&g, t, false);
        assert!((back.coef()[grid.index_of_mode(3)] - C64::new(1.0, 0.0)).norm_sqr().sqrt() < 1e-14);
    }
}
