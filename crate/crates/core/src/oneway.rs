//! Single-message baseline: the closed-form rate for describing `X` to the
//! observer of `Y` under a mean-square target when both ends must agree on
//! the reconstruction, and its comparison against the two-message bound.

use crate::gaussian::{GaussianPair, LinearFn};
use crate::log_spaced;
use crate::region::{min_sum_rate, DistortionPair, MinSumConfig, RegionError, Weights};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OnewayError {
    #[error("distortion target must be positive, got {0}")]
    BadTarget(f64),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Closed-form single-message rate for reproducing `X` within mean-square
/// `d` at the terminal that sees `Y`, with the sender able to reproduce the
/// same value: `max(0, 0.5 * log2(var(X)/var(Y) + s/d))` bits, where `s` is
/// the conditional variance of `X` given `Y`. Equivalently
/// `0.5 * log2((var(X)/var(Y)) * ((d + var(V))/d))`; the rate clamps to 0
/// once `d >= var(X)`, where decoding the prior mean already meets the
/// target.
pub fn one_way_cr_rate(src: &GaussianPair, d: f64) -> Result<f64, OnewayError> {
    if d.is_nan() || d <= 0.0 {
        return Err(OnewayError::BadTarget(d));
    }
    let s = src.cond_var_x();
    Ok((0.5 * (src.sigma_x2() / src.sigma_y2() + s / d).log2()).max(0.0))
}

/// Minimized two-message sum-rate bound for the same task (`X` reproduced
/// at the `Y` terminal within `d`, nothing required of the other side),
/// with unit weights on both directions.
pub fn two_message_sum_rate(
    src: &GaussianPair,
    d: f64,
    cfg: &MinSumConfig,
) -> Result<f64, OnewayError> {
    if d.is_nan() || d <= 0.0 {
        return Err(OnewayError::BadTarget(d));
    }
    let out = min_sum_rate(
        src,
        &LinearFn::new(0.0, 0.0),
        &LinearFn::new(1.0, 0.0),
        &DistortionPair::new(f64::INFINITY, d),
        &Weights::new(1.0, 1.0),
        cfg,
    )?;
    Ok(out.weighted)
}

/// One row of the comparison curve. `ratio` is the two-message bound over
/// the single-message rate, or `None` where the single-message rate is 0
/// and the quotient is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub d: f64,
    pub r_cr: f64,
    pub r_sum_star: f64,
    pub ratio: Option<f64>,
}

/// Evaluates both rates on a log-spaced distortion grid.
pub fn ratio_curve(
    src: &GaussianPair,
    d_lo: f64,
    d_hi: f64,
    n: usize,
    cfg: &MinSumConfig,
) -> Result<Vec<RatioPoint>, OnewayError> {
    if !(d_lo.is_finite() && d_lo > 0.0) {
        return Err(OnewayError::BadTarget(d_lo));
    }
    if !(d_hi.is_finite() && d_hi >= d_lo) {
        return Err(OnewayError::BadTarget(d_hi));
    }
    assert!(n >= 2);
    let mut out = Vec::with_capacity(n);
    for d in log_spaced(d_lo, d_hi, n) {
        let r_cr = one_way_cr_rate(src, d)?;
        let r_sum_star = two_message_sum_rate(src, d, cfg)?;
        let ratio = if r_cr > 0.0 { Some(r_sum_star / r_cr) } else { None };
        out.push(RatioPoint { d, r_cr, r_sum_star, ratio });
    }
    Ok(out)
}
