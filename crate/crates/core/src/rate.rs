//! Least-squares rate fitting for step-size ladders.

use alloc::format;
use alloc::vec::Vec;

use crate::{CoreError, Result};

/// Fitted power law `error ~ C * tau^slope` in log-log coordinates.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    /// `log2 C` of the fitted line.
    pub intercept: f64,
    /// Largest absolute deviation from the fit, in log2 units.
    pub residual: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Fit `log2(error)` against `log2(tau)` by least squares.
///
/// Pairs with nonpositive or non-finite entries are excluded and counted
/// rather than aborting the fit; at least two usable pairs at distinct
/// step sizes are required.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(tau, err)| {
            tau.is_finite() && *tau > 0.0 && err.is_finite() && *err > 0.0
        })
        .map(|(tau, err)| (libm::log2(*tau), libm::log2(*err)))
        .collect();
    let excluded = pairs.len() - usable.len();
    if usable.len() < 2 {
        return Err(CoreError::InvalidParam(format!(
            "rate fit needs at least two usable ladder points, have {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let xbar = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let ybar = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut var = 0.0;
    let mut cov = 0.0;
    for (x, y) in &usable {
        var += (x - xbar) * (x - xbar);
        cov += (x - xbar) * (y - ybar);
    }
    if var == 0.0 {
        return Err(CoreError::InvalidParam(
            "rate fit needs at least two distinct step sizes".into(),
        ));
    }
    let slope = cov / var;
    let intercept = ybar - slope * xbar;
    let residual = usable
        .iter()
        .map(|(x, y)| libm::fabs(y - (intercept + slope * x)))
        .fold(0.0, f64::max);
    Ok(RateFit { slope, intercept, residual, used: usable.len(), excluded })
}
