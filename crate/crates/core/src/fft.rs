//! In-place radix-2 FFT used by the spectral and spacetime transforms.
//!
//! Spatial grids are power-of-two by construction, so the iterative
//! Cooley-Tukey kernel covers them. Spacetime windows may have arbitrary
//! length; those fall back to a direct O(M^2) summation, which is only ever
//! exercised at small M.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Precomputed bit-reversal table and twiddle factors for one size.
/// A plan is immutable after construction and safe to share by reference
/// across threads.
pub(crate) struct FftPlan {
    n: usize,
    rev: Vec<u32>,
    /// e^{-2 pi i k / n} for k < n/2.
    tw: Vec<C64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FftPlan requires a power-of-two size");
        let bits = n.trailing_zeros();
        let mut rev = vec![0u32; n];
        for i in 1..n {
            rev[i] = (rev[i >> 1] >> 1) | (((i & 1) as u32) << (bits - 1));
        }
        let mut tw = Vec::with_capacity(n / 2);
        for k in 0..n / 2 {
            let phi = -2.0 * core::f64::consts::PI * (k as f64) / (n as f64);
            tw.push(C64::new(libm::cos(phi), libm::sin(phi)));
        }
        FftPlan { n, rev, tw }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Unnormalized transform with kernel e^{-2 pi i jk/n} (forward) or its
    /// conjugate (inverse). Callers own the normalization convention.
    pub fn transform(&self, a: &mut [C64], inverse: bool) {
        debug_assert_eq!(a.len(), self.n);
        let n = self.n;
        if n == 1 {
            return;
        }
        for i in 0..n {
            let j = self.rev[i] as usize;
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            let mut base = 0;
            while base < n {
                let mut k = 0;
                for j in base..base + half {
                    let mut w = self.tw[k];
                    if inverse {
                        w = w.conj();
                    }
                    let t = a[j + half] * w;
                    let u = a[j];
                    a[j] = u + t;
                    a[j + half] = u - t;
                    k += step;
                }
                base += len;
            }
            len <<= 1;
        }
    }
}

/// Direct DFT for arbitrary length, same kernel convention as `FftPlan`.
pub(crate) fn dft_direct(input: &[C64], inverse: bool) -> Vec<C64> {
    let n = input.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for (k, v) in input.iter().enumerate() {
            let phi = sign * 2.0 * core::f64::consts::PI * ((j * k % n) as f64) / (n as f64);
            acc += v * C64::new(libm::cos(phi), libm::sin(phi));
        }
        out.push(acc);
    }
    out
}

/// Transform every axis of a row-major cube `data` with `shape = [n; dim]`.
/// `plan` must be built for size n.
pub(crate) fn transform_axes(data: &mut [C64], dim: usize, n: usize, plan: &FftPlan, inverse: bool) {
    debug_assert_eq!(plan.len(), n);
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        transform_lines(data, n, stride, plan, inverse, &mut scratch);
    }
}

/// Transform all length-n lines of `data` that advance with `stride`.
pub(crate) fn transform_lines(
    data: &mut [C64],
    n: usize,
    stride: usize,
    plan: &FftPlan,
    inverse: bool,
    scratch: &mut [C64],
) {
    let total = data.len();
    let block = stride * n;
    debug_assert_eq!(total % block, 0);
    let mut base = 0;
    while base < total {
        for inner in 0..stride {
            let start = base + inner;
            if stride == 1 {
                plan.transform(&mut data[start..start + n], inverse);
            } else {
                for t in 0..n {
                    scratch[t] = data[start + t * stride];
                }
                plan.transform(&mut scratch[..n], inverse);
                for t in 0..n {
                    data[start + t * stride] = scratch[t];
                }
            }
        }
        base += block;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr().sqrt())
            .fold(0.0, f64::max)
    }

    #[test]
    fn matches_direct_dft() {
        let mut rng = SeedStream::new(0x11);
        for &n in &[1usize, 2, 4, 8, 64, 256] {
            let data: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5))
                .collect();
            let plan = FftPlan::new(n);
            let mut fast = data.clone();
            plan.transform(&mut fast, false);
            let slow = dft_direct(&data, false);
            assert!(max_diff(&fast, &slow) < 1e-11, "n = {n}");
            let mut back = fast.clone();
            plan.transform(&mut back, true);
            for v in back.iter_mut() {
                *v /= n as f64;
            }
            assert!(max_diff(&back, &data) < 1e-13, "round trip n = {n}");
        }
    }

    #[test]
    fn axes_cover_cube() {
        let mut rng = SeedStream::new(0x22);
        let n = 8;
        let dim = 3;
        let data: Vec<C64> = (0..n * n * n)
            .map(|_| C64::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5))
            .collect();
        let plan = FftPlan::new(n);
        let mut fast = data.clone();
        transform_axes(&mut fast, dim, n, &plan, false);

        // direct triple sum on one arbitrary output index
        let (a, b, c) = (3usize, 5usize, 1usize);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let phi = -2.0 * core::f64::consts::PI
                        * ((a * i + b * j + c * l) as f64)
                        / (n as f64);
                    acc += data[(i * n + j) * n + l] * C64::new(phi.cos(), phi.sin());
                }
            }
        }
        let got = fast[(a * n + b) * n + c];
        assert!((got - acc).norm_sqr().sqrt() < 1e-10);
    }
}
