//! Monte Carlo estimation: empirical distortions of the linear two-message
//! scheme, and two rounding protocols for the threshold indicator
//! `1{X >= Y}`. Streams are keyed by `(seed, batch index)` and partial sums
//! are merged over a fixed binary tree, so results are bit-identical across
//! reruns and thread counts.

use crate::gaussian::{GaussianPair, LinearFn, TestChannels};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Samples per RNG stream; each batch draws from its own stream so the
/// sample at a given global index never depends on how work is scheduled.
pub const BATCH: u64 = 65_536;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("sample count must be positive")]
    BadSampleCount,
    #[error("rx_bits must lie in 1..=30, got {0}")]
    BadRxBits(u32),
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithSe {
    pub value: f64,
    pub se: f64,
    pub n: u64,
}

/// Running first two power sums of a per-sample statistic.
#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    s1: f64,
    s2: f64,
    n: u64,
}

impl Partial {
    fn push(&mut self, v: f64) {
        self.s1 += v;
        self.s2 += v * v;
        self.n += 1;
    }

    fn merge(a: Self, b: Self) -> Self {
        Self { s1: a.s1 + b.s1, s2: a.s2 + b.s2, n: a.n + b.n }
    }

    fn estimate(self) -> EstimateWithSe {
        let n = self.n as f64;
        let m1 = self.s1 / n;
        let m2 = self.s2 / n;
        let var_mean = ((m2 - m1 * m1) / n).max(0.0);
        EstimateWithSe { value: m1, se: var_mean.sqrt(), n: self.n }
    }
}

/// Merges per-batch partials pairwise in index order; the reduction tree
/// depends only on the batch count.
fn tree_reduce(mut v: Vec<Partial>) -> Partial {
    if v.is_empty() {
        return Partial::default();
    }
    while v.len() > 1 {
        v = v
            .chunks(2)
            .map(|c| if c.len() == 2 { Partial::merge(c[0], c[1]) } else { c[0] })
            .collect();
    }
    v[0]
}

fn reduce_cols<const K: usize>(rows: Vec<[Partial; K]>) -> [Partial; K] {
    std::array::from_fn(|k| tree_reduce(rows.iter().map(|r| r[k]).collect()))
}

fn batches(n: u64) -> Vec<(u64, u64)> {
    let nb = (n + BATCH - 1) / BATCH;
    (0..nb).map(|b| (b, BATCH.min(n - b * BATCH))).collect()
}

fn stream_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Empirical mean-square distortions of the linear scheme that decodes
/// `Zhat_k = alpha_k U1 + beta_k U2` at both terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearSim {
    pub d_a: EstimateWithSe,
    pub d_b: EstimateWithSe,
}

/// Draws `(x, v, noise1, noise2)` per sample — always four normals, even
/// when a noise variance is zero, so streams stay aligned across parameter
/// choices — and accumulates the squared reconstruction errors of both
/// targets.
pub fn simulate_linear(
    src: &GaussianPair,
    tc: &TestChannels,
    f_a: &LinearFn,
    f_b: &LinearFn,
    n: u64,
    seed: u64,
) -> Result<LinearSim, SimError> {
    if n == 0 {
        return Err(SimError::BadSampleCount);
    }
    let sx = src.sigma_x2().sqrt();
    let sv = src.sigma_v2().sqrt();
    let sn1 = tc.n1.sqrt();
    let sn2 = tc.n2.sqrt();
    let rows: Vec<[Partial; 2]> = batches(n)
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = stream_rng(seed, b);
            let mut pa = Partial::default();
            let mut pb = Partial::default();
            for _ in 0..len {
                let x = sx * rng.sample::<f64, _>(StandardNormal);
                let v = sv * rng.sample::<f64, _>(StandardNormal);
                let w1 = sn1 * rng.sample::<f64, _>(StandardNormal);
                let w2 = sn2 * rng.sample::<f64, _>(StandardNormal);
                let y = x + v;
                let u1 = tc.a1 * x + w1;
                let u2 = tc.a2 * y + w2;
                let ea = f_a.alpha * (x - u1) + f_a.beta * (y - u2);
                let eb = f_b.alpha * (x - u1) + f_b.beta * (y - u2);
                pa.push(ea * ea);
                pb.push(eb * eb);
            }
            [pa, pb]
        })
        .collect();
    let [pa, pb] = reduce_cols(rows);
    Ok(LinearSim { d_a: pa.estimate(), d_b: pb.estimate() })
}

/// Hamming error of the two indicator protocols, plus the measured
/// agreement rate between the two terminals' outputs (1.0 by construction
/// for both protocols; measured, not assumed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorSim {
    pub sequential: EstimateWithSe,
    pub simultaneous: EstimateWithSe,
    pub agreement_sequential: f64,
    pub agreement_simultaneous: f64,
}

/// Uniform midpoint quantizer over `[-6 sigma_x, 6 sigma_x]` with
/// `2^rx_bits` cells, saturating outside the range.
fn quantize(x: f64, sx: f64, rx_bits: u32) -> f64 {
    let levels = (1u64 << rx_bits) as f64;
    let lo = -6.0 * sx;
    let width = 12.0 * sx / levels;
    let idx = ((x - lo) / width).floor().clamp(0.0, levels - 1.0);
    lo + (idx + 0.5) * width
}

/// Runs both protocols on the same sample stream (two normals per sample).
///
/// Sequential: the `X` terminal sends its quantized value, the `Y`
/// terminal computes the common bit `1{xq >= y}` and returns it.
/// Simultaneous: both send at once — the `Y` terminal sends its sign bit,
/// the `X` terminal sends the quantized value — and each terminal forms
/// the common bit `1{xq >= yhat}`, where `yhat` is the conditional mean of
/// `Y` given the sign bit. Errors are measured against `1{x >= y}`.
pub fn simulate_indicator(
    src: &GaussianPair,
    n: u64,
    seed: u64,
    rx_bits: u32,
) -> Result<IndicatorSim, SimError> {
    if n == 0 {
        return Err(SimError::BadSampleCount);
    }
    if !(1..=30).contains(&rx_bits) {
        return Err(SimError::BadRxBits(rx_bits));
    }
    let sx = src.sigma_x2().sqrt();
    let sv = src.sigma_v2().sqrt();
    let sy = src.sigma_y2().sqrt();
    let yhat_mag = sy * (2.0 / PI).sqrt();
    let rows: Vec<[Partial; 4]> = batches(n)
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = stream_rng(seed, b);
            let mut seq_err = Partial::default();
            let mut sim_err = Partial::default();
            let mut seq_agree = Partial::default();
            let mut sim_agree = Partial::default();
            for _ in 0..len {
                let x = sx * rng.sample::<f64, _>(StandardNormal);
                let v = sv * rng.sample::<f64, _>(StandardNormal);
                let y = x + v;
                let truth = x >= y;
                let xq = quantize(x, sx, rx_bits);

                // Sequential: B computes the bit from the received xq and
                // its own y; A outputs the bit it gets back.
                let seq_at_b = xq >= y;
                let seq_at_a = seq_at_b;
                seq_err.push(if seq_at_b != truth { 1.0 } else { 0.0 });
                seq_agree.push(if seq_at_a == seq_at_b { 1.0 } else { 0.0 });

                // Simultaneous: each terminal evaluates the shared rule on
                // the message it received plus its own observation.
                let sign_bit_from_b = 0.0 >= y;
                let yhat = |c: bool| if c { -yhat_mag } else { yhat_mag };
                let sim_at_a = xq >= yhat(sign_bit_from_b);
                let sim_at_b = xq >= yhat(0.0 >= y);
                sim_err.push(if sim_at_b != truth { 1.0 } else { 0.0 });
                sim_agree.push(if sim_at_a == sim_at_b { 1.0 } else { 0.0 });
            }
            [seq_err, sim_err, seq_agree, sim_agree]
        })
        .collect();
    let [seq_err, sim_err, seq_agree, sim_agree] = reduce_cols(rows);
    Ok(IndicatorSim {
        sequential: seq_err.estimate(),
        simultaneous: sim_err.estimate(),
        agreement_sequential: seq_agree.estimate().value,
        agreement_simultaneous: sim_agree.estimate().value,
    })
}
