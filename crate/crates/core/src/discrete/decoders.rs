//! Optimal reconstruction tables for a fixed joint law, in both decoder
//! modes, together with the four expected distortions they achieve.
//!
//! Orientation of the cross metrics: `d_ab[(own, copy)]` scores terminal
//! A's own side-A estimate (row) against terminal B's copy of it (column);
//! `d_ba` likewise scores terminal B's own side-B estimate against
//! terminal A's copy.

use serde::Serialize;

use super::joint::JointDist;
use super::{DiscreteProblem, Targets};

/// Expected distortions of a decoder set under a joint law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distortions {
    pub d_a: f64,
    pub d_b: f64,
    pub d_ab: f64,
    pub d_ba: f64,
}

impl Distortions {
    /// All four values at or below their ceilings, within `tol` slack.
    pub fn within(&self, targets: &Targets, tol: f64) -> bool {
        self.d_a <= targets.d_a + tol
            && self.d_b <= targets.d_b + tol
            && self.d_ab <= targets.d_ab + tol
            && self.d_ba <= targets.d_ba + tol
    }
}

/// Reconstruction tables. Entries are value-alphabet indices; `*_at_a`
/// tables are indexed by `(x * |W_A| + w_a) * NU + ucell` and `*_at_b`
/// tables by `(y * |W_B| + w_b) * NU + ucell`, where `ucell` runs over the
/// message tuple `(u_1, .., u_t)` row-major, earliest message most
/// significant. When a side is message-indexed (`shared_* = true`) the
/// entries agree across the source and auxiliary coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoderSet {
    pub shared_a: bool,
    pub shared_b: bool,
    pub zhat_a_at_a: Vec<usize>,
    pub zhat_a_at_b: Vec<usize>,
    pub zhat_b_at_b: Vec<usize>,
    pub zhat_b_at_a: Vec<usize>,
}

/// Smallest index minimizing `score`; index 0 when all scores tie.
fn argmin(score: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &s) in score.iter().enumerate().skip(1) {
        if s < score[best] {
            best = i;
        }
    }
    best
}

struct CellView {
    nu: usize,
    nwa: usize,
    nwb: usize,
    ny: usize,
}

impl CellView {
    fn new(p: &DiscreteProblem) -> Self {
        Self {
            nu: p.u_sizes.iter().product(),
            nwa: p.w_a_size,
            nwb: p.w_b_size,
            ny: p.y_size(),
        }
    }

    /// Decodes a flat joint index into `(x, y, w_a, w_b, ucell)`.
    fn split(&self, i: usize) -> (usize, usize, usize, usize, usize) {
        let ucell = i % self.nu;
        let rest = i / self.nu;
        let wb = rest % self.nwb;
        let rest = rest / self.nwb;
        let wa = rest % self.nwa;
        let rest = rest / self.nwa;
        let y = rest % self.ny;
        let x = rest / self.ny;
        (x, y, wa, wb, ucell)
    }

    fn idx_a(&self, x: usize, wa: usize, ucell: usize) -> usize {
        (x * self.nwa + wa) * self.nu + ucell
    }

    fn idx_b(&self, y: usize, wb: usize, ucell: usize) -> usize {
        (y * self.nwb + wb) * self.nu + ucell
    }
}

/// Best message-only table for one target: for each message tuple, the
/// value minimizing the expected distortion against the true target value.
fn shared_table(
    v: &CellView,
    joint: &JointDist,
    f: &ndarray::Array2<usize>,
    d: &ndarray::Array2<f64>,
) -> Vec<usize> {
    let nz = d.nrows();
    let mut post = vec![0.0; v.nu * nz];
    for (i, &pi) in joint.p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        let (x, y, _, _, ucell) = v.split(i);
        post[ucell * nz + f[(x, y)]] += pi;
    }
    let mut table = vec![0usize; v.nu];
    let mut score = vec![0.0; nz];
    for ucell in 0..v.nu {
        let post = &post[ucell * nz..(ucell + 1) * nz];
        for (z, s) in score.iter_mut().enumerate() {
            *s = (0..nz).map(|zt| post[zt] * d[(zt, z)]).sum();
        }
        table[ucell] = argmin(&score);
    }
    table
}

/// Computes the optimal reconstruction tables and their distortions.
///
/// A side is message-indexed when the problem's mode is common, or when
/// its exact-agreement ceiling is zero: almost-sure equality of two
/// estimates formed at different terminals forces both to depend only on
/// what the terminals share, namely the messages. Otherwise the side is
/// optimized greedily: each terminal's own estimate first, then the other
/// terminal's copy against the cross metric given that estimate.
pub fn optimal_decoders(p: &DiscreteProblem, joint: &JointDist) -> (DecoderSet, Distortions) {
    let v = CellView::new(p);
    let (nza, nzb) = (p.za_size(), p.zb_size());
    let shared_a = p.side_a_shared();
    let shared_b = p.side_b_shared();
    let na = p.x_size() * v.nwa * v.nu;
    let nb = p.y_size() * v.nwb * v.nu;

    let mut zhat_a_at_a = vec![0usize; na];
    let mut zhat_a_at_b = vec![0usize; nb];
    let mut zhat_b_at_b = vec![0usize; nb];
    let mut zhat_b_at_a = vec![0usize; na];

    if shared_a {
        let table = shared_table(&v, joint, &p.f_a, &p.d_a);
        for x in 0..p.x_size() {
            for wa in 0..v.nwa {
                for (ucell, &z) in table.iter().enumerate() {
                    zhat_a_at_a[v.idx_a(x, wa, ucell)] = z;
                }
            }
        }
        for y in 0..v.ny {
            for wb in 0..v.nwb {
                for (ucell, &z) in table.iter().enumerate() {
                    zhat_a_at_b[v.idx_b(y, wb, ucell)] = z;
                }
            }
        }
    } else {
        // Own estimate: expected side-A distortion given (x, w_a, u^t).
        let mut post = vec![0.0; na * nza];
        for (i, &pi) in joint.p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let (x, y, wa, _, ucell) = v.split(i);
            post[v.idx_a(x, wa, ucell) * nza + p.f_a[(x, y)]] += pi;
        }
        let mut score = vec![0.0; nza];
        for (cell, z) in zhat_a_at_a.iter_mut().enumerate() {
            let post = &post[cell * nza..(cell + 1) * nza];
            for (zz, s) in score.iter_mut().enumerate() {
                *s = (0..nza).map(|zt| post[zt] * p.d_a[(zt, zz)]).sum();
            }
            *z = argmin(&score);
        }
        // Copy at B: expected cross distortion against A's fixed estimate.
        let mut cross = vec![0.0; nb * nza];
        for (i, &pi) in joint.p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let (x, y, wa, wb, ucell) = v.split(i);
            let own = zhat_a_at_a[v.idx_a(x, wa, ucell)];
            cross[v.idx_b(y, wb, ucell) * nza + own] += pi;
        }
        for (cell, z) in zhat_a_at_b.iter_mut().enumerate() {
            let w = &cross[cell * nza..(cell + 1) * nza];
            for (zz, s) in score.iter_mut().enumerate() {
                *s = (0..nza).map(|own| w[own] * p.d_ab[(own, zz)]).sum();
            }
            *z = argmin(&score);
        }
    }

    if shared_b {
        let table = shared_table(&v, joint, &p.f_b, &p.d_b);
        for y in 0..v.ny {
            for wb in 0..v.nwb {
                for (ucell, &z) in table.iter().enumerate() {
                    zhat_b_at_b[v.idx_b(y, wb, ucell)] = z;
                }
            }
        }
        for x in 0..p.x_size() {
            for wa in 0..v.nwa {
                for (ucell, &z) in table.iter().enumerate() {
                    zhat_b_at_a[v.idx_a(x, wa, ucell)] = z;
                }
            }
        }
    } else {
        let mut post = vec![0.0; nb * nzb];
        for (i, &pi) in joint.p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let (x, y, _, wb, ucell) = v.split(i);
            post[v.idx_b(y, wb, ucell) * nzb + p.f_b[(x, y)]] += pi;
        }
        let mut score = vec![0.0; nzb];
        for (cell, z) in zhat_b_at_b.iter_mut().enumerate() {
            let post = &post[cell * nzb..(cell + 1) * nzb];
            for (zz, s) in score.iter_mut().enumerate() {
                *s = (0..nzb).map(|zt| post[zt] * p.d_b[(zt, zz)]).sum();
            }
            *z = argmin(&score);
        }
        let mut cross = vec![0.0; na * nzb];
        for (i, &pi) in joint.p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let (x, y, wa, wb, ucell) = v.split(i);
            let own = zhat_b_at_b[v.idx_b(y, wb, ucell)];
            cross[v.idx_a(x, wa, ucell) * nzb + own] += pi;
        }
        for (cell, z) in zhat_b_at_a.iter_mut().enumerate() {
            let w = &cross[cell * nzb..(cell + 1) * nzb];
            for (zz, s) in score.iter_mut().enumerate() {
                *s = (0..nzb).map(|own| w[own] * p.d_ba[(own, zz)]).sum();
            }
            *z = argmin(&score);
        }
    }

    let mut d = Distortions {
        d_a: 0.0,
        d_b: 0.0,
        d_ab: 0.0,
        d_ba: 0.0,
    };
    for (i, &pi) in joint.p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        let (x, y, wa, wb, ucell) = v.split(i);
        let a_own = zhat_a_at_a[v.idx_a(x, wa, ucell)];
        let a_copy = zhat_a_at_b[v.idx_b(y, wb, ucell)];
        let b_own = zhat_b_at_b[v.idx_b(y, wb, ucell)];
        let b_copy = zhat_b_at_a[v.idx_a(x, wa, ucell)];
        d.d_a += pi * p.d_a[(p.f_a[(x, y)], a_own)];
        d.d_b += pi * p.d_b[(p.f_b[(x, y)], b_own)];
        d.d_ab += pi * p.d_ab[(a_own, a_copy)];
        d.d_ba += pi * p.d_ba[(b_own, b_copy)];
    }
    (
        DecoderSet {
            shared_a,
            shared_b,
            zhat_a_at_a,
            zhat_a_at_b,
            zhat_b_at_b,
            zhat_b_at_a,
        },
        d,
    )
}
