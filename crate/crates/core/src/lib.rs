//! Rate-distortion computations for two terminals that exchange messages to
//! compute functions of correlated sources, under the extra requirement that
//! both terminals agree on each reconstruction (exactly, or up to a budgeted
//! cross-distortion).
//!
//! The crate covers four workloads:
//!
//! * [`gaussian`]: covariance algebra and conditional mutual information for
//!   the jointly Gaussian pair `Y = X + V` with linear test channels.
//! * [`region`]: sum-rate lower bounds over the free covariance parameters,
//!   their minimization, boundary traces, and an achievability search that
//!   tries to meet the bound with explicit channels.
//! * [`oneway`]: the single-message agreement baseline and its comparison
//!   against the two-message exchange.
//! * [`discrete`]: exhaustive evaluation of the finite-alphabet region on
//!   simplex-quantized auxiliary chains.
//! * [`sim`]: reproducible Monte Carlo checks of the Gaussian scheme and the
//!   sequential-versus-simultaneous indicator experiment.
//!
//! All rates and entropies are in bits (base-2 logarithms). `+inf` is a
//! first-class rate value, not an error.

pub mod discrete;
pub mod gaussian;
pub mod oneway;
pub mod region;
pub mod sim;

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
///
/// Panics if `lo` or `hi` is not strictly positive or `n < 2`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0, "log spacing needs positive endpoints");
    assert!(n >= 2, "log spacing needs at least two points");
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` linearly spaced points from `lo` to `hi` inclusive. Panics if `n < 2`.
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linear spacing needs at least two points");
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
