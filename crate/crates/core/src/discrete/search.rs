//! Exhaustive minimization of the weighted rate sum over all auxiliary
//! chains whose channel rows live on the `1/q` probability grid.
//!
//! Chains are totally ordered: every channel row is a composition of `q`
//! into its output alphabet, compositions are enumerated with the first
//! part descending (so index 0 is the point mass on symbol 0), and the
//! chain index is the big-endian mixed-radix number over rows in channel
//! order `w_a, w_b, round 1, .., round t`. Index 0 is therefore the fully
//! constant chain. Ties in the objective resolve to the smallest index,
//! which makes the search deterministic under any parallel split.

use rayon::prelude::*;
use serde::Serialize;

use super::decoders::{optimal_decoders, Distortions};
use super::joint::{build_joint, round_rates, AuxChain, ChannelTable};
use super::{DiscreteError, DiscreteProblem};

/// Hard ceiling on the number of chains a search may enumerate.
pub const CHAIN_BUDGET: u128 = 100_000_000;

/// Tolerance when comparing achieved distortions against their ceilings.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// All ways to split `q` units of probability mass over `parts` symbols,
/// first symbol's share descending.
pub fn compositions(q: u32, parts: usize) -> Vec<Vec<u32>> {
    assert!(parts >= 1);
    fn rec(q: u32, k: usize, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == parts - 1 {
            cur[k] = q;
            out.push(cur.clone());
            return;
        }
        for a in (0..=q).rev() {
            cur[k] = a;
            rec(q - a, k + 1, parts, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(q, 0, parts, &mut vec![0u32; parts], &mut out);
    out
}

/// `C(q + parts - 1, parts - 1)`: how many compositions exist.
pub fn composition_count(q: u32, parts: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..parts as u128 {
        c = c * (q as u128 + i) / i;
    }
    c
}

/// One channel's place in the enumeration: its row count and the
/// quantized pmf rows available to each of those rows.
struct ChannelSpec {
    rows: usize,
    parts: usize,
    /// `n_comp * parts` row-major table of quantized pmfs.
    pmfs: Vec<f64>,
    n_comp: usize,
}

impl ChannelSpec {
    fn new(q: u32, rows: usize, parts: usize) -> Self {
        let comps = compositions(q, parts);
        let n_comp = comps.len();
        let mut pmfs = Vec::with_capacity(n_comp * parts);
        for c in &comps {
            pmfs.extend(c.iter().map(|&k| k as f64 / q as f64));
        }
        Self {
            rows,
            parts,
            pmfs,
            n_comp,
        }
    }

    fn pmf(&self, comp: usize) -> &[f64] {
        &self.pmfs[comp * self.parts..(comp + 1) * self.parts]
    }
}

/// Channel specs in enumeration order `w_a, w_b, round 1, .., round t`.
fn channel_specs(p: &DiscreteProblem) -> Vec<ChannelSpec> {
    let mut specs = vec![
        ChannelSpec::new(p.q, p.x_size(), p.w_a_size),
        ChannelSpec::new(p.q, p.y_size(), p.w_b_size),
    ];
    let mut prev = 1usize;
    for (j0, &u) in p.u_sizes.iter().enumerate() {
        let rows = if j0 % 2 == 0 {
            p.x_size() * p.w_a_size * prev
        } else {
            p.y_size() * p.w_b_size * prev
        };
        specs.push(ChannelSpec::new(p.q, rows, u));
        prev *= u;
    }
    specs
}

/// Number of chains the grid holds for this problem; saturates at
/// `u128::MAX` instead of overflowing.
pub fn search_space_size(p: &DiscreteProblem) -> u128 {
    channel_specs(p)
        .iter()
        .fold(1u128, |acc, s| {
            let mut per_channel = 1u128;
            for _ in 0..s.rows {
                per_channel = per_channel.saturating_mul(s.n_comp as u128);
            }
            acc.saturating_mul(per_channel)
        })
}

fn chain_from_specs(specs: &[ChannelSpec], mut index: u64) -> AuxChain {
    // Peel little-endian digits: last channel's last row varies fastest.
    let mut tables: Vec<ChannelTable> = Vec::with_capacity(specs.len());
    for s in specs.iter().rev() {
        let mut rows: Vec<usize> = Vec::with_capacity(s.rows);
        for _ in 0..s.rows {
            rows.push((index % s.n_comp as u64) as usize);
            index /= s.n_comp as u64;
        }
        rows.reverse();
        let mut p = Vec::with_capacity(s.rows * s.parts);
        for &c in &rows {
            p.extend_from_slice(s.pmf(c));
        }
        tables.push(ChannelTable {
            rows: s.rows,
            cols: s.parts,
            p,
        });
    }
    tables.reverse();
    let mut it = tables.into_iter();
    AuxChain {
        w_a: it.next().expect("w_a spec"),
        w_b: it.next().expect("w_b spec"),
        rounds: it.collect(),
    }
}

/// The chain at a given enumeration index.
pub fn chain_at(p: &DiscreteProblem, index: u64) -> AuxChain {
    chain_from_specs(&channel_specs(p), index)
}

/// Winning point of a search: per-round rates in bits, the weighted
/// objective, the achieved distortions, and the chain that attains them.
/// `inner_bound_only` records that some searched alphabet sat strictly
/// under its cardinality cap, so the minimum is only an upper bound on
/// the best achievable over full-cap chains.
#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub rates: Vec<f64>,
    pub weighted: f64,
    pub distortions: Distortions,
    pub chain_index: u64,
    pub space_size: u64,
    pub inner_bound_only: bool,
    pub chain: AuxChain,
}

/// Exhaustively minimizes `sum_j weights[j] * R_j` over all quantized
/// chains whose optimal decoders meet every distortion ceiling. Default
/// weights are all one. Fails when the grid holds more than
/// `CHAIN_BUDGET` chains or when no chain is feasible.
pub fn min_rates_search(
    p: &DiscreteProblem,
    weights: Option<&[f64]>,
) -> Result<SearchOutcome, DiscreteError> {
    p.validate()?;
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != p.t {
                return Err(DiscreteError::BadProblem(format!(
                    "weights has {} entries for t = {}",
                    w.len(),
                    p.t
                )));
            }
            if w.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(DiscreteError::BadProblem(
                    "weights must be finite and nonnegative".into(),
                ));
            }
            w.to_vec()
        }
        None => vec![1.0; p.t],
    };
    let total = search_space_size(p);
    if total > CHAIN_BUDGET {
        return Err(DiscreteError::BudgetExceeded(total));
    }
    let total = total as u64;
    let specs = channel_specs(p);

    let evaluate = |index: u64| -> Option<(f64, u64)> {
        let chain = chain_from_specs(&specs, index);
        let joint = build_joint(p, &chain).expect("grid chains have valid shape");
        let (_, d) = optimal_decoders(p, &joint);
        if !d.within(&p.targets, FEASIBILITY_TOL) {
            return None;
        }
        let rates = round_rates(p, &joint);
        let weighted: f64 = rates.iter().zip(&w).map(|(r, wj)| r * wj).sum();
        Some((weighted, index))
    };

    let best = (0..total as usize)
        .into_par_iter()
        .with_min_len(1024)
        .filter_map(|i| evaluate(i as u64))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (_, index) = best.ok_or(DiscreteError::NoFeasibleChain)?;

    // Re-derive the winner from scratch so the reported point never
    // depends on anything accumulated during the scan.
    let chain = chain_at(p, index);
    let joint = build_joint(p, &chain)?;
    let (_, distortions) = optimal_decoders(p, &joint);
    let rates = round_rates(p, &joint);
    let weighted = rates.iter().zip(&w).map(|(r, wj)| r * wj).sum();
    Ok(SearchOutcome {
        rates,
        weighted,
        distortions,
        chain_index: index,
        space_size: total,
        inner_bound_only: p.under_caps(),
        chain,
    })
}
