//! Limiting spectral moments of `W = (1/n) X Xᵀ`.
//!
//! For columns with covariance matrices `T_m` whose normalized power traces
//! converge to `H_1, H_2, …`, the `k`-th limiting moment is
//!
//! ```text
//! Σ_{s=1..k} y^{k−s} Σ_{(i_1..i_s)} (k! / (s! Π i_l!)) Π H_l^{i_l}
//! ```
//!
//! where the inner sum ranges over [`Composition`]s. The integer factor
//! `k!/(s! Π i_l!)` is the number of non-crossing partitions with that block
//! type, so each coefficient is computed exactly and converted to `f64` only
//! at the final multiply. Terms are accumulated in ascending `s`, then
//! lexicographic composition order, so results are bit-reproducible.

use std::fmt;

use num::{BigInt, BigRational, One, Zero};
use serde::{Serialize, Serializer};

use crate::counting::{count_nc_by_block_sizes, enumerate_compositions, factorial, narayana, weighted_compositions};
use crate::error::{check_bound, Error, Result};
use crate::partition::enumerate_noncrossing;

/// Default cap on the moment order.
pub const DEFAULT_MAX_K: usize = 20;
/// Hard cap: coefficients stay exact in `u128` up to here.
pub const ABSOLUTE_MAX_K: usize = 26;
/// Exhaustive non-crossing enumeration bound for [`limiting_moment_via_nc`].
pub const MAX_NC_SUM_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceOrigin {
    /// `(1/m) tr(T_m^k)` at a finite `m`.
    FiniteTrace(usize),
    SzegoQuadrature,
    ClosedForm,
    User,
}

impl fmt::Display for SequenceOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceOrigin::FiniteTrace(m) => write!(f, "finite-trace({m})"),
            SequenceOrigin::SzegoQuadrature => f.write_str("szego-quadrature"),
            SequenceOrigin::ClosedForm => f.write_str("closed-form"),
            SequenceOrigin::User => f.write_str("user"),
        }
    }
}

impl Serialize for SequenceOrigin {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `H_1..H_K`: limits (or finite-`m` values) of `(1/m) tr(T_m^k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HSequence {
    values: Vec<f64>,
    origin: SequenceOrigin,
}

impl HSequence {
    pub fn new(values: Vec<f64>, origin: SequenceOrigin) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("H sequence must have at least one entry".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("H sequence entries must be finite".into()));
        }
        Ok(Self { values, origin })
    }

    pub fn user(values: Vec<f64>) -> Result<Self> {
        Self::new(values, SequenceOrigin::User)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> SequenceOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `H_l`, 1-based.
    pub fn get(&self, l: usize) -> f64 {
        self.values[l - 1]
    }

    pub fn require(&self, k: usize, name: &str) -> Result<()> {
        if self.values.len() < k {
            return Err(Error::Domain(format!(
                "{name} has {} entries, order {k} needs {k}",
                self.values.len()
            )));
        }
        Ok(())
    }
}

/// `H̃_1..H̃_K` for the quadratic-form extension `(1/n) X Q Xᵀ`; same shape as [`HSequence`].
pub type QSequence = HSequence;

/// The limiting ratio `y = lim m/n`, optionally remembering the dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AspectRatio {
    y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dims: Option<(usize, usize)>,
}

impl AspectRatio {
    pub fn new(y: f64) -> Result<Self> {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::Domain(format!("aspect ratio must be positive and finite, got {y}")));
        }
        Ok(Self { y, dims: None })
    }

    pub fn from_dims(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain(format!("dimensions must be positive, got {m}x{n}")));
        }
        Ok(Self {
            y: m as f64 / n as f64,
            dims: Some((m, n)),
        })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }
}

fn check_order(k: usize, max_k: usize) -> Result<()> {
    check_bound("k", max_k, 1, ABSOLUTE_MAX_K)?;
    check_bound("k", k, 1, max_k)
}

/// `k`-th limiting moment with the default order cap [`DEFAULT_MAX_K`].
pub fn limiting_moment(k: usize, y: AspectRatio, h: &HSequence) -> Result<f64> {
    limiting_moment_capped(k, y, h, DEFAULT_MAX_K)
}

/// As [`limiting_moment`] with an explicit cap up to [`ABSOLUTE_MAX_K`].
/// Past 20 the float accumulation loses relative precision to cancellation
/// when `H` has mixed signs.
pub fn limiting_moment_capped(k: usize, y: AspectRatio, h: &HSequence, max_k: usize) -> Result<f64> {
    check_order(k, max_k)?;
    h.require(k, "H")?;
    let mut total = 0.0;
    for s in 1..=k {
        let mut inner = 0.0;
        for comp in enumerate_compositions(k, s)? {
            let coeff = count_nc_by_block_sizes(k, &comp.block_type())?;
            let prod: f64 = comp
                .counts
                .iter()
                .enumerate()
                .map(|(l, &i)| h.get(l + 1).powi(i as i32))
                .product();
            inner += coeff as f64 * prod;
        }
        total += y.y().powi((k - s) as i32) * inner;
    }
    Ok(total)
}

/// Exact rational evaluation of the limiting moment.
pub fn limiting_moment_exact(k: usize, y: &BigRational, h: &[BigRational]) -> Result<BigRational> {
    check_order(k, ABSOLUTE_MAX_K)?;
    if h.len() < k {
        return Err(Error::Domain(format!("H has {} entries, order {k} needs {k}", h.len())));
    }
    let mut total = BigRational::zero();
    for s in 1..=k {
        let mut inner = BigRational::zero();
        for comp in enumerate_compositions(k, s)? {
            let coeff = count_nc_by_block_sizes(k, &comp.block_type())?;
            let mut term = BigRational::from_integer(BigInt::from(coeff));
            for (l, &i) in comp.counts.iter().enumerate() {
                term *= num::pow(h[l].clone(), i);
            }
            inner += term;
        }
        total += num::pow(y.clone(), k - s) * inner;
    }
    Ok(total)
}

/// The same moment as a sum over non-crossing partitions:
/// `Σ_{π ∈ NC(k)} y^{#π−1} Π_{B ∈ π} H_{|B|}`.
pub fn limiting_moment_via_nc(k: usize, y: AspectRatio, h: &HSequence) -> Result<f64> {
    check_bound("k", k, 1, MAX_NC_SUM_K)?;
    h.require(k, "H")?;
    Ok(enumerate_noncrossing(k)?
        .iter()
        .map(|part| {
            y.y().powi(part.num_blocks() as i32 - 1)
                * part.blocks().iter().map(|b| h.get(b.len())).product::<f64>()
        })
        .sum())
}

/// Marčenko–Pastur moment `σ^{2k} Σ_{i<k} y^i N(k, i)`.
pub fn mp_moment(k: usize, y: AspectRatio, variance: f64) -> Result<f64> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::Domain(format!("variance must be nonnegative, got {variance}")));
    }
    if k == 0 {
        return Err(Error::Domain("moment order must be positive".into()));
    }
    let mut poly = 0.0;
    for i in 0..k {
        poly += narayana(k, i)? as f64 * y.y().powi(i as i32);
    }
    Ok(variance.powi(k as i32) * poly)
}

pub fn mp_moment_exact(k: usize, y: &BigRational, variance: &BigRational) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::Domain("moment order must be positive".into()));
    }
    let mut poly = BigRational::zero();
    let mut y_pow = BigRational::one();
    for i in 0..k {
        poly += BigRational::from_integer(BigInt::from(narayana(k, i)?)) * &y_pow;
        y_pow *= y;
    }
    Ok(num::pow(variance.clone(), k) * poly)
}

/// Limiting `k`-th moment of `(1/n) X Q Xᵀ` given `H` for the column
/// covariance and `H̃` for `Q`:
///
/// ```text
/// Σ_s y^{k−s} k (k−s)! (s−1)! [Σ_i Π H_l^{i_l}/i_l!] [Σ_j Π H̃_l^{j_l}/j_l!]
/// ```
///
/// with `i` over compositions `(k, s)` and `j` over solutions of
/// `Σ j = s`, `Σ l·j_l = k` in `k − s + 1` parts. Validity of the inputs
/// (existence of the `|Q|` trace limits) is left to the caller.
pub fn qform_moment(k: usize, y: AspectRatio, h: &HSequence, q: &QSequence) -> Result<f64> {
    check_order(k, DEFAULT_MAX_K)?;
    h.require(k, "H")?;
    q.require(k, "H-tilde")?;
    let mut total = 0.0;
    for s in 1..=k {
        let lead = (k as u128)
            .checked_mul(factorial(k - s)?)
            .and_then(|x| x.checked_mul(factorial(s - 1).ok()?))
            .ok_or_else(|| Error::Range("quadratic-form coefficient overflows".into()))?;
        let mut left = 0.0;
        for comp in enumerate_compositions(k, s)? {
            left += weighted_term(&comp.counts, h)?;
        }
        let mut right = 0.0;
        for counts in weighted_compositions(k - s + 1, s, k) {
            right += weighted_term(&counts, q)?;
        }
        total += y.y().powi((k - s) as i32) * (lead as f64 * left * right);
    }
    Ok(total)
}

/// `Π_l seq_l^{c_l} / c_l!`, with the factorial product kept exact.
fn weighted_term(counts: &[usize], seq: &HSequence) -> Result<f64> {
    let mut denom: u128 = 1;
    let mut prod = 1.0;
    for (l, &c) in counts.iter().enumerate() {
        denom = denom
            .checked_mul(factorial(c)?)
            .ok_or_else(|| Error::Range("factorial product overflows".into()))?;
        if c > 0 {
            prod *= seq.get(l + 1).powi(c as i32);
        }
    }
    Ok(prod / denom as f64)
}
