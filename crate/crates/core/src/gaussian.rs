//! Jointly Gaussian source pairs, linear test channels, and the exact
//! second-order statistics and information quantities everything else is
//! built on. All information is measured in bits.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative eigenvalue threshold for numerical rank decisions.
///
/// Scaled by the largest diagonal entry of the full covariance matrix before
/// use, so rank decisions are invariant under rescaling all variables at
/// once. Eigenvalues within the scaled threshold of zero are treated as
/// exact zeros (support projection); anything below the negative threshold
/// is rejected as not positive semidefinite.
pub const RANK_TOL_REL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("variance must be positive and finite, got {0}")]
    BadVariance(f64),
    #[error("noise variance must be finite and nonnegative, got {0}")]
    BadNoise(f64),
    #[error("channel gain must be finite, got {0}")]
    BadGain(f64),
    #[error("{got} entries cannot fill a square matrix over {n} variables")]
    BadShape { got: usize, n: usize },
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("matrix is asymmetric at ({i},{j}): difference {delta:e}")]
    NotSymmetric { i: usize, j: usize, delta: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {eig:e} below -{tol:e}")]
    NotPsd { eig: f64, tol: f64 },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} appears in more than one argument group")]
    OverlappingGroups(String),
}

/// Source pair `X ~ N(0, sigma_x2)`, `Y = X + V`, `V ~ N(0, sigma_v2)`
/// independent of `X`. Means are zero throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPair {
    sigma_x2: f64,
    sigma_v2: f64,
}

impl GaussianPair {
    pub fn new(sigma_x2: f64, sigma_v2: f64) -> Result<Self, GaussianError> {
        for v in [sigma_x2, sigma_v2] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GaussianError::BadVariance(v));
            }
        }
        Ok(Self { sigma_x2, sigma_v2 })
    }

    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }

    pub fn sigma_v2(&self) -> f64 {
        self.sigma_v2
    }

    /// Variance of `Y = X + V`.
    pub fn sigma_y2(&self) -> f64 {
        self.sigma_x2 + self.sigma_v2
    }

    /// Conditional variance of `X` given `Y`: `sigma_x2 * sigma_v2 / sigma_y2`.
    pub fn cond_var_x(&self) -> f64 {
        self.sigma_x2 * self.sigma_v2 / self.sigma_y2()
    }
}

/// A target function `Z = alpha * X + beta * Y`. `(0, 0)` encodes the
/// constant function, which costs no rate to agree on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFn {
    pub alpha: f64,
    pub beta: f64,
}

impl LinearFn {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn is_constant(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }

    /// `var(alpha * X + beta * Y)` under the given source pair.
    pub fn variance(&self, src: &GaussianPair) -> f64 {
        let s = self.alpha + self.beta;
        s * s * src.sigma_x2() + self.beta * self.beta * src.sigma_v2()
    }
}

/// One linear description per direction: `U1 = a1 * X + N1` and
/// `U2 = a2 * Y + N2`, with `N1, N2` zero-mean Gaussian, independent of each
/// other and of `(X, Y)`. Equivalently `U1 - X = (a1 - 1) X + N1` and
/// `U2 - Y = (a2 - 1) Y + N2`, so the chain `(U1 - X) - X - Y - (U2 - Y)`
/// holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestChannels {
    pub a1: f64,
    pub n1: f64,
    pub a2: f64,
    pub n2: f64,
}

impl TestChannels {
    pub fn new(a1: f64, n1: f64, a2: f64, n2: f64) -> Result<Self, GaussianError> {
        for a in [a1, a2] {
            if !a.is_finite() {
                return Err(GaussianError::BadGain(a));
            }
        }
        for n in [n1, n2] {
            if !(n.is_finite() && n >= 0.0) {
                return Err(GaussianError::BadNoise(n));
            }
        }
        Ok(Self { a1, n1, a2, n2 })
    }
}

/// Symmetric positive semidefinite covariance table over named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    names: Vec<String>,
    m: DMatrix<f64>,
}

impl CovMatrix {
    /// Builds from row-major entries; validates shape, symmetry (within
    /// `RANK_TOL_REL` of the diagonal scale, then symmetrized exactly), and
    /// positive semidefiniteness.
    pub fn new(names: &[&str], entries: &[f64]) -> Result<Self, GaussianError> {
        let n = names.len();
        if entries.len() != n * n || n == 0 {
            return Err(GaussianError::BadShape { got: entries.len(), n });
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(GaussianError::DuplicateName(name.to_string()));
            }
        }
        let mut m = DMatrix::from_row_slice(n, n, entries);
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max);
        let sym_tol = RANK_TOL_REL * (1.0 + scale);
        for i in 0..n {
            for j in (i + 1)..n {
                let delta = (m[(i, j)] - m[(j, i)]).abs();
                if delta > sym_tol {
                    return Err(GaussianError::NotSymmetric { i, j, delta });
                }
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        let out = Self { names: names.iter().map(|s| s.to_string()).collect(), m };
        // Reject matrices that are not PSD up to the rank tolerance.
        out.log2_pdet_rank(&(0..n).collect::<Vec<_>>(), out.rank_tol())?;
        Ok(out)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Covariance entry by variable names.
    pub fn entry(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.m[(i, j)])
    }

    /// Tolerance for eigenvalue decisions. Spectra are always taken on
    /// correlation-normalized submatrices (unit diagonal), so this is a
    /// fixed unit-scale threshold rather than one tied to the raw diagonal;
    /// a huge variance on one variable then cannot drown out the rank
    /// structure of the others.
    fn rank_tol(&self) -> f64 {
        RANK_TOL_REL
    }

    fn resolve(&self, group: &[&str]) -> Result<Vec<usize>, GaussianError> {
        group
            .iter()
            .map(|v| {
                self.names
                    .iter()
                    .position(|n| n == v)
                    .ok_or_else(|| GaussianError::UnknownVariable(v.to_string()))
            })
            .collect()
    }

    /// Base-2 log pseudo-determinant and numerical rank of the principal
    /// submatrix on `idx`, computed on its correlation normalization (each
    /// row and column divided by the variable's standard deviation; a
    /// zero-variance variable keeps scale 1 and so stays an exact zero
    /// row). The dropped per-variable scale factors cancel exactly in any
    /// conditional-information combination because every variable enters
    /// it an equal number of times with each sign, while the
    /// normalization keeps rank decisions meaningful even when variances
    /// differ by many orders of magnitude. The empty set has
    /// pseudo-determinant 1, rank 0.
    fn log2_pdet_rank(&self, idx: &[usize], tol: f64) -> Result<(f64, usize), GaussianError> {
        if idx.is_empty() {
            return Ok((0.0, 0));
        }
        let k = idx.len();
        let scale: Vec<f64> = idx
            .iter()
            .map(|&i| {
                let d = self.m[(i, i)];
                if d > 0.0 {
                    d.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let sub = DMatrix::from_fn(k, k, |r, c| {
            self.m[(idx[r], idx[c])] / (scale[r] * scale[c])
        });
        let eig = sub.symmetric_eigen();
        let mut log2 = 0.0;
        let mut rank = 0;
        for &ev in eig.eigenvalues.iter() {
            if ev < -tol {
                return Err(GaussianError::NotPsd { eig: ev, tol });
            }
            if ev > tol {
                log2 += ev.log2();
                rank += 1;
            }
        }
        Ok((log2, rank))
    }

    /// Conditional mutual information `I(A; B | C)` in bits.
    ///
    /// Evaluated as `0.5 * log2(pdet(S_AC) * pdet(S_BC) / (pdet(S_C) *
    /// pdet(S_ABC)))` on the support of each block, where `pdet` keeps the
    /// eigenvalues above the rank tolerance. If conditioning removes less
    /// rank than the joint gains (a deterministic dependence across the
    /// groups), the information is infinite and `+inf` is returned. The
    /// result is clamped below at 0. An empty `a` or `b` yields 0.
    pub fn cond_mutual_info(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<f64, GaussianError> {
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        let ic = self.resolve(c)?;
        for &i in &ia {
            if ib.contains(&i) || ic.contains(&i) {
                return Err(GaussianError::OverlappingGroups(self.names[i].clone()));
            }
        }
        for &i in &ib {
            if ic.contains(&i) {
                return Err(GaussianError::OverlappingGroups(self.names[i].clone()));
            }
        }
        for set in [&ia, &ib, &ic] {
            for (k, &i) in set.iter().enumerate() {
                if set[..k].contains(&i) {
                    return Err(GaussianError::DuplicateName(self.names[i].clone()));
                }
            }
        }
        if ia.is_empty() || ib.is_empty() {
            return Ok(0.0);
        }
        let tol = self.rank_tol();
        let join = |xs: &[usize], ys: &[usize]| {
            let mut v = xs.to_vec();
            v.extend_from_slice(ys);
            v
        };
        let (l_ac, r_ac) = self.log2_pdet_rank(&join(&ia, &ic), tol)?;
        let (l_bc, r_bc) = self.log2_pdet_rank(&join(&ib, &ic), tol)?;
        let (l_c, r_c) = self.log2_pdet_rank(&ic, tol)?;
        let (l_abc, r_abc) = self.log2_pdet_rank(&join(&join(&ia, &ib), &ic), tol)?;
        // Rank excess means a deterministic relation ties A to B given C:
        // the Gaussian information diverges.
        if r_ac + r_bc > r_c + r_abc {
            return Ok(f64::INFINITY);
        }
        Ok((0.5 * (l_ac + l_bc - l_c - l_abc)).max(0.0))
    }
}

/// Exact 4x4 covariance of `(X, Y, U1, U2)` under the test channels.
/// Variable names are `"x"`, `"y"`, `"u1"`, `"u2"`.
pub fn joint_covariance(src: &GaussianPair, tc: &TestChannels) -> CovMatrix {
    let sx2 = src.sigma_x2();
    let sy2 = src.sigma_y2();
    let (a1, n1, a2, n2) = (tc.a1, tc.n1, tc.a2, tc.n2);
    let entries = [
        sx2,
        sx2,
        a1 * sx2,
        a2 * sx2,
        sx2,
        sy2,
        a1 * sx2,
        a2 * sy2,
        a1 * sx2,
        a1 * sx2,
        a1 * a1 * sx2 + n1,
        a1 * a2 * sx2,
        a2 * sx2,
        a2 * sy2,
        a1 * a2 * sx2,
        a2 * a2 * sy2 + n2,
    ];
    CovMatrix::new(&["x", "y", "u1", "u2"], &entries)
        .expect("covariance of a valid model is symmetric psd")
}

/// Rates, distortions, and realized covariance parameters of the two-round
/// scheme that decodes `Zhat_k = alpha_k * U1 + beta_k * U2` at both
/// terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AchievedPoint {
    /// First-message rate `I(X; U1 | Y)` in bits.
    pub r1: f64,
    /// Second-message rate `I(Y; U2 | X, U1)` in bits.
    pub r2: f64,
    pub d_a: f64,
    pub d_b: f64,
    /// `cov(Z_A - Zhat_A, X)` and friends; the free parameters realized by
    /// this channel choice.
    pub kx_a: f64,
    pub ky_a: f64,
    pub kx_b: f64,
    pub ky_b: f64,
}

impl AchievedPoint {
    pub fn sum_rate(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Evaluates the scheme through the generic covariance / conditional mutual
/// information path. Both terminals decode the same tables, so the two
/// terminals' reconstructions agree with probability one by construction.
pub fn achieved_point(
    src: &GaussianPair,
    tc: &TestChannels,
    f_a: &LinearFn,
    f_b: &LinearFn,
) -> Result<AchievedPoint, GaussianError> {
    let cov = joint_covariance(src, tc);
    let r1 = cov.cond_mutual_info(&["x"], &["u1"], &["y"])?;
    let r2 = cov.cond_mutual_info(&["y"], &["u2"], &["x", "u1"])?;
    let (d_a, kx_a, ky_a) = recon_stats(src, f_a, tc.a1 - 1.0, tc.n1, tc.a2 - 1.0, tc.n2);
    let (d_b, kx_b, ky_b) = recon_stats(src, f_b, tc.a1 - 1.0, tc.n1, tc.a2 - 1.0, tc.n2);
    Ok(AchievedPoint { r1, r2, d_a, d_b, kx_a, ky_a, kx_b, ky_b })
}

/// Distortion and covariance parameters of the error
/// `E = Z - Zhat = -alpha * (U1 - X) - beta * (U2 - Y)` with
/// `U1 - X = g1 * X + N1`, `U2 - Y = g2 * Y + N2`.
/// Returns `(var(E), cov(E, X), cov(E, Y))`.
pub(crate) fn recon_stats(
    src: &GaussianPair,
    f: &LinearFn,
    g1: f64,
    n1: f64,
    g2: f64,
    n2: f64,
) -> (f64, f64, f64) {
    let sx2 = src.sigma_x2();
    let sy2 = src.sigma_y2();
    let (al, be) = (f.alpha, f.beta);
    let v1 = g1 * g1 * sx2 + n1;
    let v2 = g2 * g2 * sy2 + n2;
    let c12 = g1 * g2 * sx2;
    let d = al * al * v1 + be * be * v2 + 2.0 * al * be * c12;
    let kx = -(al * g1 + be * g2) * sx2;
    let ky = -(al * g1 * sx2 + be * g2 * sy2);
    (d, kx, ky)
}

/// Closed form for one description rate: `0.5 * log2(1 + a^2 * cond_var / n)`
/// with the degenerate corners spelled out. `cond_var` is the conditional
/// variance of the described source given the other terminal's observation.
pub(crate) fn closed_rate(a: f64, n: f64, cond_var: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if n <= 0.0 {
        f64::INFINITY
    } else {
        0.5 * (1.0 + a * a * cond_var / n).log2()
    }
}

/// Closed-form `(R1, R2)` for the test channels; kept independent of the
/// covariance-matrix path in `achieved_point` so the two can be checked
/// against each other.
pub fn closed_rates(src: &GaussianPair, tc: &TestChannels) -> (f64, f64) {
    (
        closed_rate(tc.a1, tc.n1, src.cond_var_x()),
        closed_rate(tc.a2, tc.n2, src.sigma_v2()),
    )
}
