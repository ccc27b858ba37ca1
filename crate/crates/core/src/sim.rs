//! Monte Carlo simulation of `W = (1/n) X Xᵀ` with i.i.d. model columns.
//!
//! Replicate `r` always draws from `replicate_stream(seed, r)` and results
//! are reduced in replicate order, so a report depends only on the config,
//! never on the number of worker threads.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{jacobi_eigenvalues, normalized_power_sums};
use crate::error::{Error, Result};
use crate::format::{round_sig, round_sig_opt};
use crate::models::{covariance_matrix, fill_path, h_finite, h_limit, StationaryModel, MAX_H_ORDER};
use crate::moments::{limiting_moment, AspectRatio, HSequence};
use crate::rng::{replicate_stream, Normals, Stream};

/// Desk-scale limits applied by [`Budget::Desk`].
pub const DESK_MAX_M: usize = 512;
pub const DESK_MAX_N: usize = 1024;
pub const DESK_MAX_REPLICATES: usize = 1000;
/// Matrix entries drawn over a whole run (`m · n · replicates`).
pub const DESK_MAX_CELLS: u64 = 1 << 28;

/// Pass rule shared by all comparisons.
pub const Z_THRESHOLD: f64 = 3.0;
pub const REL_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMode {
    /// Columns are sampled paths of the model.
    #[serde(rename = "direct")]
    Direct,
    /// Columns are `L_m · ξ` with `T_m = L_m L_mᵀ` and `ξ` standard Gaussian.
    #[serde(rename = "remark1")]
    Remark1Gaussian,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Direct => "direct",
            SimMode::Remark1Gaussian => "remark1",
        })
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SimMode::Direct),
            "remark1" | "remark1-gaussian" => Ok(SimMode::Remark1Gaussian),
            other => Err(Error::Parse(format!("unknown mode {other:?} (expected direct or remark1)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: StationaryModel,
    pub m: usize,
    pub n: usize,
    pub replicates: usize,
    pub k_max: usize,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < 2 {
            return Err(Error::Domain(format!("need m, n >= 2, got m={}, n={}", self.m, self.n)));
        }
        if self.k_max == 0 || self.k_max > MAX_H_ORDER {
            return Err(Error::Domain(format!("k_max must lie in 1..={MAX_H_ORDER}, got {}", self.k_max)));
        }
        if self.replicates == 0 {
            return Err(Error::Domain("need at least one replicate".into()));
        }
        Ok(())
    }

    pub fn aspect_ratio(&self) -> AspectRatio {
        AspectRatio::from_dims(self.m, self.n).expect("validated dimensions")
    }

    fn cells(&self) -> u64 {
        (self.m as u64).saturating_mul(self.n as u64).saturating_mul(self.replicates as u64)
    }
}

/// Compute guard checked before any sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Budget {
    /// `m ≤ 512`, `n ≤ 1024`, `replicates ≤ 1000` and at most 2^28 cells.
    #[default]
    Desk,
    /// Only the cell count is limited.
    Cells(u64),
    Unlimited,
}

impl Budget {
    pub fn check(&self, config: &SimConfig) -> Result<()> {
        let cells = config.cells();
        match *self {
            Budget::Unlimited => Ok(()),
            Budget::Cells(limit) if cells > limit => Err(Error::Budget(format!(
                "m*n*replicates = {cells} exceeds the budget of {limit}"
            ))),
            Budget::Cells(_) => Ok(()),
            Budget::Desk => {
                if config.m > DESK_MAX_M || config.n > DESK_MAX_N || config.replicates > DESK_MAX_REPLICATES {
                    return Err(Error::Budget(format!(
                        "desk scale is m <= {DESK_MAX_M}, n <= {DESK_MAX_N}, replicates <= {DESK_MAX_REPLICATES}"
                    )));
                }
                Budget::Cells(DESK_MAX_CELLS).check(config)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    pub budget: Budget,
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }
}

/// Draws data matrices for one configuration. In remark1 mode the Cholesky
/// factor of `T_m` is computed once here.
pub struct MatrixSampler<'a> {
    config: &'a SimConfig,
    cholesky: Option<DMatrix<f64>>,
}

impl<'a> MatrixSampler<'a> {
    pub fn new(config: &'a SimConfig) -> Result<Self> {
        config.validate()?;
        let cholesky = match config.mode {
            SimMode::Direct => None,
            SimMode::Remark1Gaussian => {
                let t = covariance_matrix(&config.model, config.m)?;
                let chol = nalgebra::Cholesky::new(t).ok_or_else(|| {
                    Error::Numeric("covariance matrix is not positive definite; Cholesky failed".into())
                })?;
                Some(chol.l())
            }
        };
        Ok(Self { config, cholesky })
    }

    /// An `m × n` matrix with independent columns.
    pub fn sample(&self, rng: &mut Stream) -> DMatrix<f64> {
        let (m, n) = (self.config.m, self.config.n);
        match &self.cholesky {
            None => {
                let mut data = Vec::with_capacity(m * n);
                for _ in 0..n {
                    fill_path(&self.config.model, &mut data, m, rng);
                }
                DMatrix::from_vec(m, n, data)
            }
            Some(l) => {
                let mut g = Normals::new();
                let y = DMatrix::from_fn(m, n, |_, _| g.next(rng));
                l * y
            }
        }
    }
}

pub fn sample_matrix(config: &SimConfig, replicate: usize, rng: &mut Stream) -> Result<DMatrix<f64>> {
    if replicate >= config.replicates {
        return Err(Error::Domain(format!(
            "replicate {replicate} out of range for {} replicates",
            config.replicates
        )));
    }
    Ok(MatrixSampler::new(config)?.sample(rng))
}

/// `(1/n) X Xᵀ`.
pub fn sample_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x * x.transpose()) / x.ncols() as f64
}

/// Eigenvalues of one sampled `W`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub replicate: usize,
    pub eigenvalues: Vec<f64>,
}

impl SpectrumSample {
    /// Computes the spectrum and checks `W` is PSD up to roundoff
    /// (`λ_min ≥ −1e-8 · max |λ|`).
    pub fn from_matrix(w: &DMatrix<f64>, replicate: usize) -> Result<Self> {
        let eigenvalues = jacobi_eigenvalues(w)?;
        let scale = eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if let Some(&min) = eigenvalues.first() {
            if min < -1e-8 * scale {
                return Err(Error::Numeric(format!(
                    "sample covariance has eigenvalue {min} below roundoff (scale {scale})"
                )));
            }
        }
        Ok(Self { replicate, eigenvalues })
    }
}

/// `(1/m) tr(W^k)` for `k = 1..=k_max` from the eigenvalues of `w`.
pub fn spectral_moments(w: &DMatrix<f64>, k_max: usize) -> Result<Vec<f64>> {
    Ok(normalized_power_sums(&jacobi_eigenvalues(w)?, k_max))
}

fn replicate_spectrum(sampler: &MatrixSampler<'_>, config: &SimConfig, replicate: usize) -> Result<SpectrumSample> {
    let mut rng = replicate_stream(config.seed, replicate as u64);
    let x = sampler.sample(&mut rng);
    SpectrumSample::from_matrix(&sample_covariance(&x), replicate)
}

/// Maps `f` over replicates on `workers` threads, keeping replicate order.
fn map_replicates<T, F>(replicates: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers == 1 {
        return (0..replicates).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..replicates).into_par_iter().map(&f).collect())
}

/// Predicted moments at aspect ratio `y`: from `H` of the limiting law (when
/// available) and from `H` of `T_m` at the simulated `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub limit: Option<Vec<f64>>,
    pub finite: Vec<f64>,
}

pub fn predictions(model: &StationaryModel, m: usize, y: AspectRatio, k_max: usize) -> Result<Predictions> {
    let moments = |h: &HSequence| (1..=k_max).map(|k| limiting_moment(k, y, h)).collect::<Result<Vec<_>>>();
    let finite = moments(&h_finite(model, m, k_max)?)?;
    let limit = match h_limit(model, k_max) {
        Ok(h) => Some(moments(&h)?),
        Err(_) => None,
    };
    Ok(Predictions { limit, finite })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub model: String,
    pub m: usize,
    pub n: usize,
    pub y: f64,
    pub replicates: usize,
    pub k_max: usize,
    pub seed: u64,
    pub mode: SimMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: usize,
    pub predicted_limit: Option<f64>,
    pub predicted_finite: f64,
    pub empirical_mean: f64,
    pub empirical_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub config: ConfigEcho,
    pub moments: Vec<MomentRow>,
    pub runtime_seconds: Option<f64>,
}

impl MomentReport {
    /// JSON with every float rounded to 12 significant digits. Wall time is
    /// written only when `include_timing` is set, so that equal seeds give
    /// byte-identical output.
    pub fn to_json(&self, include_timing: bool) -> String {
        let mut rounded = self.clone();
        rounded.config.y = round_sig(rounded.config.y);
        for row in &mut rounded.moments {
            row.predicted_limit = round_sig_opt(row.predicted_limit);
            row.predicted_finite = round_sig(row.predicted_finite);
            row.empirical_mean = round_sig(row.empirical_mean);
            row.empirical_stderr = round_sig(row.empirical_stderr);
        }
        rounded.runtime_seconds = if include_timing {
            rounded.runtime_seconds.map(round_sig)
        } else {
            None
        };
        serde_json::to_string_pretty(&rounded).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("moment report: {e}")))
    }
}

/// Averages the spectral moments of `W` over replicates and attaches the predictions.
pub fn run_monte_carlo(config: &SimConfig, options: &RunOptions) -> Result<MomentReport> {
    let start = Instant::now();
    config.validate()?;
    options.budget.check(config)?;
    let sampler = MatrixSampler::new(config)?;
    let per_replicate = map_replicates(config.replicates, options.workers, |r| {
        let spectrum = replicate_spectrum(&sampler, config, r)?;
        Ok(normalized_power_sums(&spectrum.eigenvalues, config.k_max))
    })?;

    let reps = config.replicates as f64;
    let pred = predictions(&config.model, config.m, config.aspect_ratio(), config.k_max)?;
    let moments = (0..config.k_max)
        .map(|j| {
            let mean = per_replicate.iter().map(|v| v[j]).sum::<f64>() / reps;
            let stderr = if config.replicates > 1 {
                let ss: f64 = per_replicate.iter().map(|v| (v[j] - mean) * (v[j] - mean)).sum();
                (ss / (reps - 1.0)).sqrt() / reps.sqrt()
            } else {
                0.0
            };
            MomentRow {
                k: j + 1,
                predicted_limit: pred.limit.as_ref().map(|l| l[j]),
                predicted_finite: pred.finite[j],
                empirical_mean: mean,
                empirical_stderr: stderr,
            }
        })
        .collect();

    Ok(MomentReport {
        config: ConfigEcho {
            model: config.model.to_string(),
            m: config.m,
            n: config.n,
            y: config.aspect_ratio().y(),
            replicates: config.replicates,
            k_max: config.k_max,
            seed: config.seed,
            mode: config.mode,
        },
        moments,
        runtime_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

/// One row of a comparison: `z = (empirical − reference) / stderr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub k: usize,
    pub empirical: f64,
    pub reference: f64,
    pub stderr: f64,
    pub z: f64,
    pub relative_error: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn new(k: usize, empirical: f64, reference: f64, stderr: f64) -> Self {
        let diff = empirical - reference;
        let z = if diff == 0.0 {
            0.0
        } else if stderr > 0.0 {
            diff / stderr
        } else {
            f64::INFINITY.copysign(diff)
        };
        let relative_error = if reference != 0.0 {
            (diff / reference).abs()
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            k,
            empirical,
            reference,
            stderr,
            z,
            relative_error,
            pass: z.abs() <= Z_THRESHOLD || relative_error <= REL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionTarget {
    Finite,
    Limit,
}

/// Empirical means against the report's own predictions.
pub fn compare_to_prediction(report: &MomentReport, target: PredictionTarget) -> Result<Vec<Verdict>> {
    report
        .moments
        .iter()
        .map(|row| {
            let reference = match target {
                PredictionTarget::Finite => row.predicted_finite,
                PredictionTarget::Limit => row
                    .predicted_limit
                    .ok_or_else(|| Error::Unsupported(format!("report for {} has no limiting prediction", report.config.model)))?,
            };
            Ok(Verdict::new(row.k, row.empirical_mean, reference, row.empirical_stderr))
        })
        .collect()
}

/// Empirical means of `a` against those of `b`, with combined standard error.
pub fn compare_reports(a: &MomentReport, b: &MomentReport) -> Result<Vec<Verdict>> {
    if a.config.k_max != b.config.k_max || a.moments.len() != b.moments.len() {
        return Err(Error::Domain(format!(
            "reports have different k_max ({} vs {})",
            a.config.k_max, b.config.k_max
        )));
    }
    Ok(a.moments
        .iter()
        .zip(&b.moments)
        .map(|(ra, rb)| {
            let se = ra.empirical_stderr.hypot(rb.empirical_stderr);
            Verdict::new(ra.k, ra.empirical_mean, rb.empirical_mean, se)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    /// Values binned.
    pub total: usize,
    /// Values outside the range, not binned.
    pub outside: usize,
}

impl Histogram {
    /// Uniform bins over `range` (default `[0, 1.05 · max]`). Densities are
    /// normalized over the binned values, so `Σ density · width = 1`.
    pub fn from_values(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Domain("histogram needs at least one bin".into()));
        }
        let (lo, hi) = match range {
            Some(r) => r,
            None => (0.0, 1.05 * values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        };
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Domain(format!("empty histogram range [{lo}, {hi}]")));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut outside = 0;
        for &v in values {
            if v < lo || v > hi {
                outside += 1;
                continue;
            }
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let total = values.len() - outside;
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                lo: lo + i as f64 * width,
                hi: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
                count,
                density: if total > 0 { count as f64 / (total as f64 * width) } else { 0.0 },
            })
            .collect();
        Ok(Self { bins, total, outside })
    }

    pub fn to_csv(&self) -> String {
        use crate::format::fmt_sig;
        let mut out = String::from("bin_lo,bin_hi,count,density\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{},{}\n", fmt_sig(b.lo), fmt_sig(b.hi), b.count, fmt_sig(b.density)));
        }
        out
    }
}

/// Eigenvalues pooled over all replicates of `config`, binned.
pub fn eigenvalue_histogram(
    config: &SimConfig,
    bins: usize,
    range: Option<(f64, f64)>,
    options: &RunOptions,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    config.validate()?;
    options.budget.check(config)?;
    let sampler = MatrixSampler::new(config)?;
    let spectra = map_replicates(config.replicates, options.workers, |r| replicate_spectrum(&sampler, config, r))?;
    let pooled: Vec<f64> = spectra.into_iter().flat_map(|s| s.eigenvalues).collect();
    Histogram::from_values(&pooled, bins, range)
}
