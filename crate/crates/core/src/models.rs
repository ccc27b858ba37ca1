//! Stationary column processes: i.i.d. symmetric entries, the Gaussian AR(1)
//! process, the symmetric two-state chain and general finite Markov chains.
//!
//! Each model knows its autocovariance `R(j)`, from which the Toeplitz
//! covariance matrix `T_m = (R(|i − i'|))` and the trace moments `H_k`
//! follow. Indices into a process are 1-based, `a(1), a(2), …`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand_core::RngCore;
use serde::Deserialize;

use crate::eigen::{normalized_power_sums, tridiagonal_eigenvalues};
use crate::error::{check_bound, Error, Result};
use crate::moments::{HSequence, SequenceOrigin};
use crate::rng::{rademacher, uniform, Normals};

/// Moment orders accepted by the `H` builders.
pub const MAX_H_ORDER: usize = 20;
/// Largest `m` for which [`h_finite`] will factor `T_m`.
pub const MAX_FINITE_M: usize = 4096;
/// Uniform Simpson panels used by [`h_szego`].
pub const SZEGO_PANELS: usize = 4096;
/// Quadrature is refused above this correlation (the density gets too peaked).
pub const MAX_SZEGO_RHO: f64 = 0.95;
pub const MAX_CHAIN_INDEX: usize = 10_000;
pub const MAX_JOINT_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IidDistribution {
    Rademacher,
    StandardGaussian,
}

impl fmt::Display for IidDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IidDistribution::Rademacher => "rademacher",
            IidDistribution::StandardGaussian => "gaussian",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct ChainDocument {
    states: Vec<f64>,
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

/// A stationary finite-state Markov chain started from its stationary law.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMarkovChain {
    states: Vec<f64>,
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    source: Option<String>,
}

impl FiniteMarkovChain {
    /// Validates a chain: row-stochastic transition (rows sum to 1 within
    /// 1e-12), stationary vector invariant within 1e-10, zero mean.
    pub fn new(states: Vec<f64>, transition: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        let n = states.len();
        if n < 2 {
            return Err(Error::Domain("a chain needs at least two states".into()));
        }
        if transition.len() != n || transition.iter().any(|row| row.len() != n) || stationary.len() != n {
            return Err(Error::Domain(format!("chain with {n} states needs an {n}x{n} transition matrix and {n} stationary weights")));
        }
        let all = states.iter().chain(transition.iter().flatten()).chain(&stationary);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::Domain("chain entries must be finite".into()));
        }
        if transition.iter().flatten().chain(&stationary).any(|&x| x < 0.0) {
            return Err(Error::Domain("probabilities must be nonnegative".into()));
        }
        for (i, row) in transition.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!("transition row {i} sums to {sum}")));
            }
        }
        if (stationary.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain("stationary weights must sum to 1".into()));
        }
        for j in 0..n {
            let flow: f64 = (0..n).map(|i| stationary[i] * transition[i][j]).sum();
            if (flow - stationary[j]).abs() > 1e-10 {
                return Err(Error::Domain(format!(
                    "stationary vector is not invariant at state {j}: {flow} vs {}",
                    stationary[j]
                )));
            }
        }
        let mean: f64 = states.iter().zip(&stationary).map(|(s, p)| s * p).sum();
        if mean.abs() > 1e-10 {
            return Err(Error::Domain(format!("chain must have zero stationary mean, got {mean}")));
        }
        Ok(Self {
            states,
            transition,
            stationary,
            source: None,
        })
    }

    /// Parses `{"states": [...], "transition": [[...]], "stationary": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChainDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("chain document: {e}")))?;
        Self::new(doc.states, doc.transition, doc.stationary)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read chain file {}: {e}", path.display())))?;
        let mut chain = Self::from_json(&text)?;
        chain.source = Some(path.display().to_string());
        Ok(chain)
    }

    /// The symmetric chain on `{+1, −1}` that stays with probability `(1 + α)/2`.
    pub fn two_state(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("two-state alpha must lie in (-1, 1), got {alpha}")));
        }
        let stay = (1.0 + alpha) / 2.0;
        Self::new(
            vec![1.0, -1.0],
            vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]],
            vec![0.5, 0.5],
        )
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    /// Row vector times the transition matrix.
    fn step(&self, v: &[f64]) -> Vec<f64> {
        let n = self.states.len();
        let mut out = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                for j in 0..n {
                    out[j] += vi * self.transition[i][j];
                }
            }
        }
        out
    }

    /// Autocovariances `R(0..len)`.
    pub fn autocovariances(&self, len: usize) -> Vec<f64> {
        // R(j) = Σ_a π_a s_a (P^j s)_a, pushing the weighted row vector forward
        let mut row: Vec<f64> = self.states.iter().zip(&self.stationary).map(|(s, p)| s * p).collect();
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(row.iter().zip(&self.states).map(|(r, s)| r * s).sum());
            row = self.step(&row);
        }
        out
    }

    /// Geometric mixing-rate estimate `‖P^J − 1π‖_∞^{1/J}` at `J = 64`
    /// (maximum absolute row sum). Exact for the two-state chain.
    pub fn mixing_rate(&self) -> f64 {
        const J: usize = 64;
        let n = self.states.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            // (e_i − π) P^J = e_i P^J − π, propagated without cancellation
            let mut row: Vec<f64> = self.stationary.iter().map(|p| -p).collect();
            row[i] += 1.0;
            for _ in 0..J {
                row = self.step(&row);
            }
            let dev: f64 = row.iter().map(|r| r.abs()).sum();
            worst = worst.max(dev);
        }
        worst.powf(1.0 / J as f64).min(1.0)
    }

    /// Whether the state values and law are invariant under `x ↦ −x`
    /// (which makes all odd joint moments vanish).
    pub fn is_flip_symmetric(&self) -> bool {
        let n = self.states.len();
        let mirror: Option<Vec<usize>> = (0..n)
            .map(|i| (0..n).find(|&j| (self.states[j] + self.states[i]).abs() <= 1e-12))
            .collect();
        let Some(mirror) = mirror else { return false };
        (0..n).all(|i| {
            (self.stationary[i] - self.stationary[mirror[i]]).abs() <= 1e-12
                && (0..n).all(|j| (self.transition[i][j] - self.transition[mirror[i]][mirror[j]]).abs() <= 1e-12)
        })
    }

    fn sample_start<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        pick(&self.stationary, uniform(rng))
    }
}

fn pick(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryModel {
    IidSymmetric { dist: IidDistribution, variance: f64 },
    GaussianAr1 { p: f64 },
    TwoStateChain { alpha: f64 },
    FiniteMarkovChain(FiniteMarkovChain),
}

impl StationaryModel {
    pub fn iid(dist: IidDistribution, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::Domain(format!("variance must be positive, got {variance}")));
        }
        Ok(Self::IidSymmetric { dist, variance })
    }

    pub fn ar1(p: f64) -> Result<Self> {
        if !(p > -1.0 && p < 1.0) {
            return Err(Error::Domain(format!("AR(1) coefficient must satisfy |p| < 1, got {p}")));
        }
        Ok(Self::GaussianAr1 { p })
    }

    pub fn two_state(alpha: f64) -> Result<Self> {
        FiniteMarkovChain::two_state(alpha)?;
        Ok(Self::TwoStateChain { alpha })
    }

    /// `(variance, ρ)` when `R(j) = variance · ρ^j`.
    pub fn geometric_covariance(&self) -> Option<(f64, f64)> {
        match *self {
            Self::IidSymmetric { variance, .. } => Some((variance, 0.0)),
            Self::GaussianAr1 { p } => Some((1.0, p)),
            Self::TwoStateChain { alpha } => Some((1.0, alpha)),
            Self::FiniteMarkovChain(_) => None,
        }
    }

    /// The model as a finite chain, when it is one.
    pub fn as_chain(&self) -> Option<FiniteMarkovChain> {
        match self {
            Self::TwoStateChain { alpha } => FiniteMarkovChain::two_state(*alpha).ok(),
            Self::IidSymmetric {
                dist: IidDistribution::Rademacher,
                variance,
            } => {
                let s = variance.sqrt();
                FiniteMarkovChain::new(vec![s, -s], vec![vec![0.5, 0.5]; 2], vec![0.5, 0.5]).ok()
            }
            Self::FiniteMarkovChain(chain) => Some(chain.clone()),
            _ => None,
        }
    }

    /// The covariance kernel, with chain autocovariances tabulated up to `max_lag`.
    pub fn covariance_spec(&self, max_lag: usize) -> CovarianceSpec {
        match (self.geometric_covariance(), self) {
            (Some((variance, rho)), _) => CovarianceSpec::Geometric { variance, rho },
            (None, Self::FiniteMarkovChain(chain)) => CovarianceSpec::Table(chain.autocovariances(max_lag + 1)),
            _ => unreachable!("only chains lack a geometric covariance"),
        }
    }

    pub fn variance(&self) -> f64 {
        self.covariance_spec(0).autocovariance(0)
    }
}

impl fmt::Display for StationaryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IidSymmetric { dist, variance } => write!(f, "iid:dist={dist},var={variance}"),
            Self::GaussianAr1 { p } => write!(f, "ar1:p={p}"),
            Self::TwoStateChain { alpha } => write!(f, "twostate:alpha={alpha}"),
            Self::FiniteMarkovChain(chain) => match chain.source() {
                Some(path) => write!(f, "chain:file={path}"),
                None => write!(f, "chain:inline"),
            },
        }
    }
}

impl FromStr for StationaryModel {
    type Err = Error;

    /// Parses `iid:dist=rademacher,var=1`, `ar1:p=0.5`, `twostate:alpha=0.5`
    /// or `chain:file=PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: Vec<(&str, &str)> = Vec::new();
        for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {pair:?} in {s:?}")))?;
            params.push((key.trim(), value.trim()));
        }
        let allowed: &[&str] = match kind {
            "iid" => &["dist", "var"],
            "ar1" => &["p"],
            "twostate" => &["alpha"],
            "chain" => &["file"],
            other => return Err(Error::Parse(format!("unknown model kind {other:?}"))),
        };
        if let Some((key, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parse(format!("unknown parameter {key:?} for model {kind:?}")));
        }
        let get = |key: &str| params.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let num = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("{key}={v:?} is not a number"))))
                .transpose()
        };
        let required = |key: &str| -> Result<f64> {
            num(key)?.ok_or_else(|| Error::Parse(format!("model {kind:?} needs {key}=...")))
        };
        let model = match kind {
            "iid" => {
                let dist = match get("dist").unwrap_or("rademacher") {
                    "rademacher" => IidDistribution::Rademacher,
                    "gaussian" | "standard-gaussian" | "normal" => IidDistribution::StandardGaussian,
                    other => return Err(Error::Parse(format!("unknown distribution {other:?}"))),
                };
                Self::iid(dist, num("var")?.unwrap_or(1.0))
            }
            "ar1" => Self::ar1(required("p")?),
            "twostate" => Self::two_state(required("alpha")?),
            "chain" => {
                let path = get("file").ok_or_else(|| Error::Parse("chain model needs file=PATH".into()))?;
                return FiniteMarkovChain::from_file(Path::new(path)).map(Self::FiniteMarkovChain);
            }
            _ => unreachable!(),
        };
        model.map_err(|e| match e {
            Error::Domain(msg) => Error::Parse(msg),
            other => other,
        })
    }
}

/// A stationary covariance `t(i, i') = R(|i − i'|)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec {
    /// `R(j) = variance · ρ^j`.
    Geometric { variance: f64, rho: f64 },
    /// Tabulated `R(0), R(1), …`; lags past the table are an error.
    Table(Vec<f64>),
}

impl CovarianceSpec {
    pub fn autocovariance(&self, lag: usize) -> f64 {
        match self {
            Self::Geometric { variance, rho } => variance * rho.powi(lag as i32),
            Self::Table(values) => values[lag],
        }
    }
}

/// Anything that can report `t(i, i')` for 1-based process indices.
pub trait Covariance {
    fn t(&self, i: usize, j: usize) -> f64;
}

impl Covariance for CovarianceSpec {
    fn t(&self, i: usize, j: usize) -> f64 {
        self.autocovariance(i.abs_diff(j))
    }
}

impl Covariance for DMatrix<f64> {
    fn t(&self, i: usize, j: usize) -> f64 {
        self[(i - 1, j - 1)]
    }
}

/// `T_m = (R(|i − i'|))`.
pub fn covariance_matrix(model: &StationaryModel, m: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::Domain("matrix size must be positive".into()));
    }
    let spec = model.covariance_spec(m - 1);
    let r: Vec<f64> = (0..m).map(|j| spec.autocovariance(j)).collect();
    Ok(DMatrix::from_fn(m, m, |i, j| r[i.abs_diff(j)]))
}

/// `H_k = (1/m) tr(T_m^k)` from the eigenvalues of `T_m`. `H_1` is set to
/// `R(0)`, the exact value of the normalized trace.
pub fn h_finite(model: &StationaryModel, m: usize, k_max: usize) -> Result<HSequence> {
    check_bound("m", m, 1, MAX_FINITE_M)?;
    check_bound("k_max", k_max, 1, MAX_H_ORDER)?;
    let t = covariance_matrix(model, m)?;
    let eig = tridiagonal_eigenvalues(&t)?;
    let mut values = normalized_power_sums(&eig, k_max);
    values[0] = t[(0, 0)];
    HSequence::new(values, SequenceOrigin::FiniteTrace(m))
}

/// `f(x) = Σ_j R(j) e^{2πijx}` for geometric covariances:
/// `variance · (1 − ρ²) / (1 − 2ρ cos 2πx + ρ²)`.
pub fn spectral_density(model: &StationaryModel, x: f64) -> Result<f64> {
    let (variance, rho) = model.geometric_covariance().ok_or_else(|| {
        Error::Unsupported("spectral density is only available for i.i.d., AR(1) and two-state models".into())
    })?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("spectral density argument must lie in [0, 1], got {x}")));
    }
    let c = (std::f64::consts::TAU * x).cos();
    Ok(variance * (1.0 - rho * rho) / (1.0 - 2.0 * rho * c + rho * rho))
}

/// `H_k = ∫₀¹ f(x)^k dx` by composite Simpson with [`SZEGO_PANELS`] panels.
pub fn h_szego(model: &StationaryModel, k_max: usize) -> Result<HSequence> {
    check_bound("k_max", k_max, 1, MAX_H_ORDER)?;
    let (_, rho) = model.geometric_covariance().ok_or_else(|| {
        Error::Unsupported("Szegő quadrature needs a geometric covariance (i.i.d., AR(1), two-state)".into())
    })?;
    if rho.abs() > MAX_SZEGO_RHO {
        return Err(Error::Domain(format!(
            "|rho| = {} exceeds {MAX_SZEGO_RHO}; the spectral density is too peaked for fixed quadrature",
            rho.abs()
        )));
    }
    let n = SZEGO_PANELS;
    let step = 1.0 / n as f64;
    let mut sums = vec![0.0; k_max];
    for i in 0..=n {
        let weight = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = spectral_density(model, i as f64 * step)?;
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            pow *= f;
            *s += weight * pow;
        }
    }
    let values = sums.into_iter().map(|s| s * step / 3.0).collect();
    HSequence::new(values, SequenceOrigin::SzegoQuadrature)
}

/// Limiting `H`: closed form `σ^{2k}` for i.i.d. models, Szegő quadrature
/// for geometric ones. General chains have no limiting sequence here.
pub fn h_limit(model: &StationaryModel, k_max: usize) -> Result<HSequence> {
    match model {
        StationaryModel::IidSymmetric { variance, .. } => {
            check_bound("k_max", k_max, 1, MAX_H_ORDER)?;
            HSequence::new(
                (1..=k_max).map(|k| variance.powi(k as i32)).collect(),
                SequenceOrigin::ClosedForm,
            )
        }
        _ => h_szego(model, k_max),
    }
}

/// One stationary path `a(1..=m)`.
pub fn sample_path<R: RngCore + ?Sized>(model: &StationaryModel, m: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    fill_path(model, &mut out, m, rng);
    out
}

/// Appends one stationary path of length `m` to `out`.
pub(crate) fn fill_path<R: RngCore + ?Sized>(model: &StationaryModel, out: &mut Vec<f64>, m: usize, rng: &mut R) {
    match model {
        StationaryModel::IidSymmetric { dist, variance } => {
            let sigma = variance.sqrt();
            match dist {
                IidDistribution::Rademacher => out.extend((0..m).map(|_| sigma * rademacher(rng))),
                IidDistribution::StandardGaussian => {
                    let mut g = Normals::new();
                    out.extend((0..m).map(|_| sigma * g.next(rng)));
                }
            }
        }
        StationaryModel::GaussianAr1 { p } => {
            let mut g = Normals::new();
            let innov = (1.0 - p * p).sqrt();
            let mut a = g.next(rng);
            for i in 0..m {
                if i > 0 {
                    a = p * a + innov * g.next(rng);
                }
                out.push(a);
            }
        }
        StationaryModel::TwoStateChain { alpha } => {
            let flip = (1.0 - alpha) / 2.0;
            let mut a = rademacher(rng);
            for i in 0..m {
                if i > 0 && uniform(rng) < flip {
                    a = -a;
                }
                out.push(a);
            }
        }
        StationaryModel::FiniteMarkovChain(chain) => {
            let mut state = chain.sample_start(rng);
            for i in 0..m {
                if i > 0 {
                    state = pick(&chain.transition[state], uniform(rng));
                }
                out.push(chain.states[state]);
            }
        }
    }
}

/// Gaussian joint moment `E[a(i_1)…a(i_{2k})]` as the sum over all pairings
/// of the product of covariances (at most 12 indices).
pub fn isserlis_moment<C: Covariance + ?Sized>(cov: &C, indices: &[usize]) -> Result<f64> {
    if indices.len() % 2 == 1 {
        return Err(Error::Domain(format!(
            "Gaussian joint moments need an even number of indices, got {}",
            indices.len()
        )));
    }
    check_bound("index count", indices.len(), 0, MAX_JOINT_ORDER)?;
    fn pairings<C: Covariance + ?Sized>(cov: &C, rest: &mut Vec<usize>) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest.remove(0);
        let mut total = 0.0;
        for j in 0..rest.len() {
            let partner = rest.remove(j);
            total += cov.t(first, partner) * pairings(cov, rest);
            rest.insert(j, partner);
        }
        rest.insert(0, first);
        total
    }
    Ok(pairings(cov, &mut indices.to_vec()))
}

/// Exact `E[a(i_1)…a(i_r)]` for a stationary chain and sorted indices:
/// `π D P^{g_1} D P^{g_2} … D 1` with `D = diag(states)` and `g` the index gaps.
pub fn chain_joint_moment(chain: &FiniteMarkovChain, indices: &[usize]) -> Result<f64> {
    check_bound("index count", indices.len(), 0, MAX_JOINT_ORDER)?;
    if indices.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("chain joint moments need sorted indices".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > MAX_CHAIN_INDEX) {
        return Err(Error::Domain(format!("index {bad} outside 1..={MAX_CHAIN_INDEX}")));
    }
    let Some(&first) = indices.first() else {
        return Ok(1.0);
    };
    let mut row = chain.stationary.clone();
    let mut position = first;
    for &i in indices {
        for _ in position..i {
            row = chain.step(&row);
        }
        position = i;
        for (r, s) in row.iter_mut().zip(&chain.states) {
            *r *= s;
        }
    }
    Ok(row.iter().sum())
}

/// Outcome of an empirical check of the remainder bound
/// `|E[a(i_1)…a(i_2k)] − Π t(i_{2l−1}, i_{2l})| ≤ C Σ_l α^{i_{2l+1} − i_{2l}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub k: usize,
    pub trials: usize,
    pub alpha: f64,
    pub max_abs_remainder: f64,
    /// Largest `|R| / Σ_l α^{gap_l}` over the sample; `0/0` counts as 0.
    pub max_ratio: f64,
}

impl DecayReport {
    pub fn is_bounded(&self) -> bool {
        self.max_ratio.is_finite()
    }
}

/// Sorted index tuples are drawn uniformly from `1..=DECAY_INDEX_RANGE`.
pub const DECAY_INDEX_RANGE: usize = 48;

pub fn check_product_decay<R: RngCore + ?Sized>(
    chain: &FiniteMarkovChain,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<DecayReport> {
    check_bound("k", k, 1, 4)?;
    let alpha = chain.mixing_rate();
    let r = chain.autocovariances(DECAY_INDEX_RANGE);
    let t = |a: usize, b: usize| r[a.abs_diff(b)];
    let mut report = DecayReport {
        k,
        trials,
        alpha,
        max_abs_remainder: 0.0,
        max_ratio: 0.0,
    };
    let mut idx = vec![0usize; 2 * k];
    for _ in 0..trials {
        for i in idx.iter_mut() {
            *i = 1 + (uniform(rng) * DECAY_INDEX_RANGE as f64) as usize;
        }
        idx.sort_unstable();
        let joint = chain_joint_moment(chain, &idx)?;
        let paired: f64 = idx.chunks(2).map(|pair| t(pair[0], pair[1])).product();
        let remainder = (joint - paired).abs();
        let bound: f64 = (1..k).map(|l| alpha.powi((idx[2 * l] - idx[2 * l - 1]) as i32)).sum();
        let ratio = if remainder <= 1e-14 {
            0.0
        } else if bound == 0.0 {
            f64::INFINITY
        } else {
            remainder / bound
        };
        report.max_abs_remainder = report.max_abs_remainder.max(remainder);
        report.max_ratio = report.max_ratio.max(ratio);
    }
    Ok(report)
}
