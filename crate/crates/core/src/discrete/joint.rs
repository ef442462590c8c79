//! Dense joint laws induced by a source pmf and an auxiliary message chain,
//! with exact marginal entropies, conditional mutual information, per-round
//! rate terms, and the conditional-independence residuals the construction
//! promises to keep at zero.

use serde::{Deserialize, Serialize};

use super::{DiscreteError, DiscreteProblem, PMF_TOL};

/// Tolerance for the full joint tensor summing to one.
pub const JOINT_TOL: f64 = 1e-9;

/// A conditional pmf stored row-major: `p[row * cols + col]` is the
/// probability of output `col` given conditioning cell `row`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTable {
    pub rows: usize,
    pub cols: usize,
    pub p: Vec<f64>,
}

impl ChannelTable {
    pub fn new(rows: usize, cols: usize, p: Vec<f64>) -> Result<Self, DiscreteError> {
        let t = Self { rows, cols, p };
        t.validate("channel")?;
        Ok(t)
    }

    /// Point-mass rows: row `r` puts all mass on `output(r)`.
    pub fn deterministic(rows: usize, cols: usize, output: impl Fn(usize) -> usize) -> Self {
        let mut p = vec![0.0; rows * cols];
        for r in 0..rows {
            let o = output(r);
            assert!(o < cols);
            p[r * cols + o] = 1.0;
        }
        Self { rows, cols, p }
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            p: vec![1.0 / cols as f64; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.p[r * self.cols..(r + 1) * self.cols]
    }

    pub fn validate(&self, name: &str) -> Result<(), DiscreteError> {
        if self.rows == 0 || self.cols == 0 || self.p.len() != self.rows * self.cols {
            return Err(DiscreteError::BadChain(format!(
                "{name} storage length {} does not match {}x{}",
                self.p.len(),
                self.rows,
                self.cols
            )));
        }
        for r in 0..self.rows {
            let row = self.row(r);
            if row.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
                return Err(DiscreteError::BadChain(format!(
                    "{name} row {r} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PMF_TOL {
                return Err(DiscreteError::BadChain(format!(
                    "{name} row {r} sums to {s}, not 1 within {PMF_TOL}"
                )));
            }
        }
        Ok(())
    }
}

/// One interaction strategy: private-auxiliary channels for each terminal
/// and one message channel per round. Round `j` (1-based, odd sent by the
/// `X` terminal) conditions on that terminal's source symbol, its private
/// auxiliary, and all earlier messages; its row index is
/// `(source * w_size + w) * prod(earlier u sizes) + prefix`, with the
/// prefix in message order, earliest most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxChain {
    pub w_a: ChannelTable,
    pub w_b: ChannelTable,
    pub rounds: Vec<ChannelTable>,
}

/// Dense joint pmf over `(X, Y, W_A, W_B, U_1, .., U_t)` in row-major
/// order with `dims = [|X|, |Y|, |W_A|, |W_B|, |U_1|, .., |U_t|]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    pub dims: Vec<usize>,
    pub p: Vec<f64>,
}

impl JointDist {
    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len() - 1).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    /// Marginal pmf over the given axes (kept in the order given), as a
    /// row-major flat vector.
    pub fn marginal(&self, axes: &[usize]) -> Vec<f64> {
        let strides = self.strides();
        let out_len = axes.iter().map(|&a| self.dims[a]).product::<usize>().max(1);
        let mut out = vec![0.0; out_len];
        for (i, &pi) in self.p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let mut idx = 0usize;
            for &a in axes {
                idx = idx * self.dims[a] + (i / strides[a]) % self.dims[a];
            }
            out[idx] += pi;
        }
        out
    }

    /// Entropy in bits of the marginal over `axes`; 0 for the empty set.
    pub fn entropy(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        self.marginal(axes)
            .iter()
            .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
            .sum()
    }

    /// `I(A; B | C)` in bits over disjoint axis sets, clamped at zero.
    pub fn cond_mutual_info(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        debug_assert!(a.iter().all(|x| !b.contains(x) && !c.contains(x)));
        debug_assert!(b.iter().all(|x| !c.contains(x)));
        let join = |u: &[usize], v: &[usize]| {
            let mut w: Vec<usize> = u.iter().chain(v).copied().collect();
            w.sort_unstable();
            w
        };
        let h_ac = self.entropy(&join(a, c));
        let h_bc = self.entropy(&join(b, c));
        let h_c = self.entropy(c);
        let h_abc = self.entropy(&join(&join(a, b), c));
        (h_ac + h_bc - h_c - h_abc).max(0.0)
    }

    /// Total mass; 1 within `JOINT_TOL` for a law built from valid parts.
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Multiplies the source pmf through the chain's channels into the dense
/// joint law, checking channel shapes and row sums first and the total
/// mass afterwards.
pub fn build_joint(p: &DiscreteProblem, chain: &AuxChain) -> Result<JointDist, DiscreteError> {
    let (nx, ny) = (p.x_size(), p.y_size());
    let shape_err = |m: String| Err(DiscreteError::BadChain(m));
    chain.w_a.validate("w_a")?;
    chain.w_b.validate("w_b")?;
    if chain.w_a.rows != nx || chain.w_a.cols != p.w_a_size {
        return shape_err(format!(
            "w_a must be {nx}x{}, got {}x{}",
            p.w_a_size, chain.w_a.rows, chain.w_a.cols
        ));
    }
    if chain.w_b.rows != ny || chain.w_b.cols != p.w_b_size {
        return shape_err(format!(
            "w_b must be {ny}x{}, got {}x{}",
            p.w_b_size, chain.w_b.rows, chain.w_b.cols
        ));
    }
    if chain.rounds.len() != p.t {
        return shape_err(format!(
            "chain has {} round channels for t = {}",
            chain.rounds.len(),
            p.t
        ));
    }
    let mut prev_prod = 1usize;
    for (j0, ch) in chain.rounds.iter().enumerate() {
        let j = j0 + 1;
        ch.validate(&format!("round {j}"))?;
        let want_rows = if j % 2 == 1 {
            nx * p.w_a_size * prev_prod
        } else {
            ny * p.w_b_size * prev_prod
        };
        if ch.rows != want_rows || ch.cols != p.u_sizes[j0] {
            return shape_err(format!(
                "round {j} channel must be {want_rows}x{}, got {}x{}",
                p.u_sizes[j0], ch.rows, ch.cols
            ));
        }
        prev_prod *= p.u_sizes[j0];
    }

    let mut dims = vec![nx, ny, p.w_a_size, p.w_b_size];
    dims.extend_from_slice(&p.u_sizes);
    let n: usize = dims.iter().product();
    let mut out = vec![0.0; n];
    let mut coords = vec![0usize; dims.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut rem = i;
        for (k, &d) in dims.iter().enumerate().rev() {
            coords[k] = rem % d;
            rem /= d;
        }
        let (x, y, wa, wb) = (coords[0], coords[1], coords[2], coords[3]);
        let mut v = p.pxy[(x, y)] * chain.w_a.row(x)[wa] * chain.w_b.row(y)[wb];
        if v != 0.0 {
            let mut prefix = 0usize;
            let mut prod = 1usize;
            for (j0, ch) in chain.rounds.iter().enumerate() {
                let u = coords[4 + j0];
                let row = if j0 % 2 == 0 {
                    (x * p.w_a_size + wa) * prod + prefix
                } else {
                    (y * p.w_b_size + wb) * prod + prefix
                };
                v *= ch.row(row)[u];
                if v == 0.0 {
                    break;
                }
                prefix = prefix * p.u_sizes[j0] + u;
                prod *= p.u_sizes[j0];
            }
        }
        *slot = v;
    }
    let joint = JointDist { dims, p: out };
    let total = joint.total();
    if (total - 1.0).abs() > JOINT_TOL {
        return Err(DiscreteError::BadChain(format!(
            "joint mass {total} differs from 1 beyond {JOINT_TOL}"
        )));
    }
    Ok(joint)
}

/// Axes of the messages before round `j` (1-based).
fn prefix_axes(j: usize) -> Vec<usize> {
    (4..4 + (j - 1)).collect()
}

/// Per-round rate terms in bits: round `j` costs the information its
/// message carries about the sender's source beyond what the receiver's
/// source and the earlier messages already give.
pub fn round_rates(p: &DiscreteProblem, joint: &JointDist) -> Vec<f64> {
    (1..=p.t)
        .map(|j| {
            let u = [3 + j];
            let mut c = prefix_axes(j);
            if j % 2 == 1 {
                c.insert(0, 1);
                joint.cond_mutual_info(&[0], &u, &c)
            } else {
                c.insert(0, 0);
                joint.cond_mutual_info(&[1], &u, &c)
            }
        })
        .collect()
}

/// Conditional-independence residuals that must vanish for any law built
/// by `build_joint`: the private auxiliaries depend on nothing beyond
/// their own source, and each message depends on nothing beyond its
/// sender's view. Returned in order: `W_A`, `W_B`, then one per round.
pub fn markov_residuals(p: &DiscreteProblem, joint: &JointDist) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 + p.t);
    out.push(joint.cond_mutual_info(&[2], &[1, 3], &[0]));
    out.push(joint.cond_mutual_info(&[3], &[0, 2], &[1]));
    for j in 1..=p.t {
        let u = [3 + j];
        let mut c = prefix_axes(j);
        if j % 2 == 1 {
            let mut cc = vec![0, 2];
            cc.append(&mut c);
            out.push(joint.cond_mutual_info(&u, &[1, 3], &cc));
        } else {
            let mut cc = vec![1, 3];
            cc.append(&mut c);
            out.push(joint.cond_mutual_info(&u, &[0, 2], &cc));
        }
    }
    out
}
