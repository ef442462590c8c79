//! Finite-alphabet interactive problems: joint laws over auxiliary message
//! chains, exact discrete information quantities, optimal decoder tables
//! with and without cross-terminal agreement requirements, and exhaustive
//! minimization over quantized channel families.

pub mod decoders;
pub mod joint;
pub mod search;

pub use decoders::{optimal_decoders, DecoderSet, Distortions};
pub use joint::{build_joint, markov_residuals, round_rates, AuxChain, ChannelTable, JointDist};
pub use search::{chain_at, min_rates_search, search_space_size, SearchOutcome};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for a pmf summing to one.
pub const PMF_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiscreteError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}; expected 1")]
    Schema(u64),
    #[error("invalid problem: {0}")]
    BadProblem(String),
    #[error("invalid chain: {0}")]
    BadChain(String),
    #[error("search space holds {0} chains, above the 1e8 budget")]
    BudgetExceeded(u128),
    #[error("no chain on the quantization grid meets the distortion targets")]
    NoFeasibleChain,
}

/// How reconstructions are formed: `Common` uses one message-indexed table
/// per target, shared verbatim by both terminals; `Constrained` lets each
/// terminal condition on its own source and private auxiliary, with the
/// cross-terminal disagreement measured separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMode {
    Common,
    Constrained,
}

/// Distortion ceilings; `+inf` disables a constraint. `d_ab` caps the
/// disagreement between the two terminals' versions of target A's
/// reconstruction, `d_ba` the same for target B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Targets {
    pub d_a: f64,
    pub d_b: f64,
    pub d_ab: f64,
    pub d_ba: f64,
}

impl Targets {
    pub const fn new(d_a: f64, d_b: f64, d_ab: f64, d_ba: f64) -> Self {
        Self { d_a, d_b, d_ab, d_ba }
    }

    /// No constraint on anything.
    pub const SLACK: Targets = Targets::new(
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
        f64::INFINITY,
    );
}

/// A finite-alphabet instance: joint source pmf, round count, per-side
/// target-function tables with their distortion matrices, cross-terminal
/// agreement matrices, ceilings, decoder mode, simplex quantization `q`,
/// and the auxiliary alphabet sizes actually searched.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProblem {
    /// Joint pmf, shape `(|X|, |Y|)`.
    pub pxy: Array2<f64>,
    /// Rounds; odd rounds are sent by the `X` terminal, starting at round 1.
    pub t: usize,
    /// Target values `z_a(x, y)` as indices into the side-A value alphabet.
    pub f_a: Array2<usize>,
    pub f_b: Array2<usize>,
    /// `d_a[(true z, decoded z)]`, shape `(|Z_A|, |Z_A|)`.
    pub d_a: Array2<f64>,
    pub d_b: Array2<f64>,
    /// Disagreement metric between the two terminals' side-A
    /// reconstructions, shape `(|Z_A|, |Z_A|)`.
    pub d_ab: Array2<f64>,
    pub d_ba: Array2<f64>,
    pub targets: Targets,
    pub mode: DecoderMode,
    /// Channel rows are quantized to pmfs with entries in `{0, 1/q, .., 1}`.
    pub q: u32,
    /// Private auxiliary alphabet sizes, each in `1..=2`.
    pub w_a_size: usize,
    pub w_b_size: usize,
    /// Message alphabet sizes per round, each within its cardinality cap.
    pub u_sizes: Vec<usize>,
}

/// Cardinality cap for round `j` (1-based): conditioning-alphabet size of
/// that round's sender times `t - j + 5` extra slots.
fn cap_for(src_size: usize, w_size: usize, prev_u: &[usize], t: usize, j: usize) -> usize {
    src_size * w_size * prev_u.iter().product::<usize>() + (t - j) + 5
}

/// Default searched message alphabet sizes: the cap, clipped at 3 so
/// multi-round spaces stay enumerable. Anything below the cap makes the
/// search an inner bound, which the outcome records.
pub fn default_u_sizes(
    x_size: usize,
    y_size: usize,
    w_a_size: usize,
    w_b_size: usize,
    t: usize,
) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(t);
    for j in 1..=t {
        let cap = if j % 2 == 1 {
            cap_for(x_size, w_a_size, &sizes, t, j)
        } else {
            cap_for(y_size, w_b_size, &sizes, t, j)
        };
        sizes.push(cap.min(3));
    }
    sizes
}

impl DiscreteProblem {
    pub fn x_size(&self) -> usize {
        self.pxy.nrows()
    }

    pub fn y_size(&self) -> usize {
        self.pxy.ncols()
    }

    pub fn za_size(&self) -> usize {
        self.d_a.nrows()
    }

    pub fn zb_size(&self) -> usize {
        self.d_b.nrows()
    }

    /// Cardinality caps per round under the configured `w` and `u` sizes.
    pub fn caps(&self) -> Vec<usize> {
        (1..=self.t)
            .map(|j| {
                if j % 2 == 1 {
                    cap_for(self.x_size(), self.w_a_size, &self.u_sizes[..j - 1], self.t, j)
                } else {
                    cap_for(self.y_size(), self.w_b_size, &self.u_sizes[..j - 1], self.t, j)
                }
            })
            .collect()
    }

    /// True when any searched alphabet is strictly under its cap, i.e. the
    /// search can only certify an inner bound.
    pub fn under_caps(&self) -> bool {
        self.w_a_size < 2
            || self.w_b_size < 2
            || self
                .u_sizes
                .iter()
                .zip(self.caps())
                .any(|(&s, cap)| s < cap)
    }

    /// Whether a side's reconstruction tables must be message-indexed:
    /// always in common mode, and in constrained mode whenever exact
    /// agreement (zero ceiling) is demanded for that side, since
    /// almost-sure equality of the two terminals' outputs forces both to be
    /// functions of what both terminals see.
    pub(crate) fn side_a_shared(&self) -> bool {
        self.mode == DecoderMode::Common || self.targets.d_ab == 0.0
    }

    pub(crate) fn side_b_shared(&self) -> bool {
        self.mode == DecoderMode::Common || self.targets.d_ba == 0.0
    }

    pub fn validate(&self) -> Result<(), DiscreteError> {
        let bad = |m: String| Err(DiscreteError::BadProblem(m));
        let (nx, ny) = (self.x_size(), self.y_size());
        if nx == 0 || ny == 0 {
            return bad("pxy must be nonempty".into());
        }
        let mut sum = 0.0;
        for &p in self.pxy.iter() {
            if !(p.is_finite() && p >= 0.0) {
                return bad(format!("pxy entry {p} is not a probability"));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PMF_TOL {
            return bad(format!("pxy sums to {sum}, not 1 within {PMF_TOL}"));
        }
        if self.t == 0 {
            return bad("t must be at least 1".into());
        }
        if self.q == 0 {
            return bad("q must be at least 1".into());
        }
        for (name, f, zs) in [("f_a", &self.f_a, self.za_size()), ("f_b", &self.f_b, self.zb_size())]
        {
            if f.dim() != (nx, ny) {
                return bad(format!("{name} shape {:?} != pxy shape ({nx}, {ny})", f.dim()));
            }
            if f.iter().any(|&z| z >= zs) {
                return bad(format!("{name} entry out of range for alphabet size {zs}"));
            }
        }
        for (name, m, zs) in [
            ("d_a", &self.d_a, self.za_size()),
            ("d_ab", &self.d_ab, self.za_size()),
            ("d_b", &self.d_b, self.zb_size()),
            ("d_ba", &self.d_ba, self.zb_size()),
        ] {
            if m.dim() != (zs, zs) {
                return bad(format!("{name} must be {zs}x{zs}, got {:?}", m.dim()));
            }
            if m.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
                return bad(format!("{name} entries must be finite and nonnegative"));
            }
        }
        for (name, v) in [
            ("targets.d_a", self.targets.d_a),
            ("targets.d_b", self.targets.d_b),
            ("targets.d_ab", self.targets.d_ab),
            ("targets.d_ba", self.targets.d_ba),
        ] {
            if v.is_nan() || v < 0.0 {
                return bad(format!("{name} must be nonnegative or +inf, got {v}"));
            }
        }
        for (name, w) in [("w_a_size", self.w_a_size), ("w_b_size", self.w_b_size)] {
            if !(1..=2).contains(&w) {
                return bad(format!("{name} must be 1 or 2, got {w}"));
            }
        }
        if self.u_sizes.len() != self.t {
            return bad(format!(
                "u_sizes has {} entries for t = {}",
                self.u_sizes.len(),
                self.t
            ));
        }
        for (j, (&s, cap)) in self.u_sizes.iter().zip(self.caps()).enumerate() {
            if s == 0 || s > cap {
                return bad(format!(
                    "u_sizes[{j}] = {s} outside 1..={cap} (cardinality cap)"
                ));
            }
        }
        if self.side_a_shared() {
            check_agreement_metric("d_ab", &self.d_ab)?;
        }
        if self.side_b_shared() {
            check_agreement_metric("d_ba", &self.d_ba)?;
        }
        Ok(())
    }

    /// Parses the versioned problem document (see `ProblemDoc`); absent
    /// `w_*_size` / `u_sizes` take their defaults, `null` targets mean
    /// unconstrained.
    pub fn from_json(text: &str) -> Result<Self, DiscreteError> {
        let doc: ProblemDoc = serde_json::from_str(text)?;
        if doc.schema != 1 {
            return Err(DiscreteError::Schema(doc.schema));
        }
        let arr2f = |name: &str, v: Vec<f64>, r: usize, c: usize| {
            Array2::from_shape_vec((r, c), v)
                .map_err(|_| DiscreteError::BadProblem(format!("{name} length must be {r}*{c}")))
        };
        let arr2u = |name: &str, v: Vec<usize>, r: usize, c: usize| {
            Array2::from_shape_vec((r, c), v)
                .map_err(|_| DiscreteError::BadProblem(format!("{name} length must be {r}*{c}")))
        };
        let mode = match doc.mode.as_str() {
            "common" => DecoderMode::Common,
            "constrained" => DecoderMode::Constrained,
            other => {
                return Err(DiscreteError::BadProblem(format!(
                    "mode must be \"common\" or \"constrained\", got {other:?}"
                )))
            }
        };
        let w_a_size = doc.w_a_size.unwrap_or(1);
        let w_b_size = doc.w_b_size.unwrap_or(1);
        let u_sizes = doc.u_sizes.unwrap_or_else(|| {
            default_u_sizes(doc.x_size, doc.y_size, w_a_size, w_b_size, doc.t)
        });
        let tgt = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        let p = Self {
            pxy: arr2f("pxy", doc.pxy, doc.x_size, doc.y_size)?,
            t: doc.t,
            f_a: arr2u("f_a", doc.f_a, doc.x_size, doc.y_size)?,
            f_b: arr2u("f_b", doc.f_b, doc.x_size, doc.y_size)?,
            d_a: arr2f("d_a", doc.d_a, doc.za_size, doc.za_size)?,
            d_b: arr2f("d_b", doc.d_b, doc.zb_size, doc.zb_size)?,
            d_ab: arr2f("d_ab", doc.d_ab, doc.za_size, doc.za_size)?,
            d_ba: arr2f("d_ba", doc.d_ba, doc.zb_size, doc.zb_size)?,
            targets: Targets::new(
                tgt(doc.targets.d_a),
                tgt(doc.targets.d_b),
                tgt(doc.targets.d_ab),
                tgt(doc.targets.d_ba),
            ),
            mode,
            q: doc.q,
            w_a_size,
            w_b_size,
            u_sizes,
        };
        p.validate()?;
        Ok(p)
    }

    /// Serializes back to the versioned document with every default
    /// materialized; `+inf` targets become `null`.
    pub fn to_json(&self) -> String {
        let flat = |a: &Array2<f64>| a.iter().copied().collect::<Vec<_>>();
        let tgt = |v: f64| if v.is_infinite() { None } else { Some(v) };
        let doc = ProblemDoc {
            schema: 1,
            x_size: self.x_size(),
            y_size: self.y_size(),
            za_size: self.za_size(),
            zb_size: self.zb_size(),
            t: self.t,
            mode: match self.mode {
                DecoderMode::Common => "common".into(),
                DecoderMode::Constrained => "constrained".into(),
            },
            q: self.q,
            w_a_size: Some(self.w_a_size),
            w_b_size: Some(self.w_b_size),
            u_sizes: Some(self.u_sizes.clone()),
            pxy: flat(&self.pxy),
            f_a: self.f_a.iter().copied().collect(),
            f_b: self.f_b.iter().copied().collect(),
            d_a: flat(&self.d_a),
            d_b: flat(&self.d_b),
            d_ab: flat(&self.d_ab),
            d_ba: flat(&self.d_ba),
            targets: TargetsDoc {
                d_a: tgt(self.targets.d_a),
                d_b: tgt(self.targets.d_b),
                d_ab: tgt(self.targets.d_ab),
                d_ba: tgt(self.targets.d_ba),
            },
        };
        serde_json::to_string_pretty(&doc).expect("problem document serializes")
    }
}

fn check_agreement_metric(name: &str, m: &Array2<f64>) -> Result<(), DiscreteError> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if i == j && v != 0.0 {
                return Err(DiscreteError::BadProblem(format!(
                    "{name}[{i},{i}] must be 0 when exact agreement is enforced"
                )));
            }
            if i != j && v <= 0.0 {
                return Err(DiscreteError::BadProblem(format!(
                    "{name}[{i},{j}] must be positive off the diagonal when exact agreement is enforced"
                )));
            }
        }
    }
    Ok(())
}

/// On-disk problem document, `"schema": 1`. Alphabets are integer sizes;
/// `pxy`, function tables, and distortion tables are row-major flat arrays.
#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    schema: u64,
    x_size: usize,
    y_size: usize,
    za_size: usize,
    zb_size: usize,
    t: usize,
    mode: String,
    q: u32,
    #[serde(default)]
    w_a_size: Option<usize>,
    #[serde(default)]
    w_b_size: Option<usize>,
    #[serde(default)]
    u_sizes: Option<Vec<usize>>,
    pxy: Vec<f64>,
    f_a: Vec<usize>,
    f_b: Vec<usize>,
    d_a: Vec<f64>,
    d_b: Vec<f64>,
    d_ab: Vec<f64>,
    d_ba: Vec<f64>,
    targets: TargetsDoc,
}

#[derive(Serialize, Deserialize)]
struct TargetsDoc {
    d_a: Option<f64>,
    d_b: Option<f64>,
    d_ab: Option<f64>,
    d_ba: Option<f64>,
}

/// Binary entropy in bits; exact 0 at the endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p));
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Doubly symmetric binary instance: `X` uniform, `Y` differs from `X` with
/// the given crossover probability, both side targets equal the `X` bit,
/// all metrics Hamming, private auxiliaries off (`|W| = 1`), default
/// message sizes.
pub fn doubly_symmetric_binary(
    crossover: f64,
    t: usize,
    mode: DecoderMode,
    q: u32,
    targets: Targets,
) -> DiscreteProblem {
    assert!((0.0..=1.0).contains(&crossover));
    let half = 0.5;
    let pxy = Array2::from_shape_vec(
        (2, 2),
        vec![
            half * (1.0 - crossover),
            half * crossover,
            half * crossover,
            half * (1.0 - crossover),
        ],
    )
    .unwrap();
    let fx = Array2::from_shape_vec((2, 2), vec![0, 0, 1, 1]).unwrap();
    let ham = Array2::from_shape_vec((2, 2), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    DiscreteProblem {
        pxy,
        t,
        f_a: fx.clone(),
        f_b: fx,
        d_a: ham.clone(),
        d_b: ham.clone(),
        d_ab: ham.clone(),
        d_ba: ham,
        targets,
        mode,
        q,
        w_a_size: 1,
        w_b_size: 1,
        u_sizes: default_u_sizes(2, 2, 1, 1, t),
    }
}
