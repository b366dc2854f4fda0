//! Experiment orchestration: Monte Carlo power estimates, best-subset search
//! over fusion dimensions, and detection sweeps over an observed series.
//!
//! Monte Carlo replicate `r` always draws from stream `r` of the master seed,
//! so changing `q` or the fused subset reuses the same random numbers.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{self, DetectionResult, Matrix, WeightKind, WeightScheme};
use crate::graph::GraphSeries;
use crate::invariants::{
    all_features, FeatureMatrix, InvariantConfig, LocalStats, NUM_FEATURES,
};
use crate::simulate::{make_latent, sample_rdpg_series, KappaParams, SeededRng};
use crate::temporal::{apply_vertex_standardization, normalize, NormalizedFeatures, WindowParams};

/// Everything needed to turn graphs into standardized features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window: WindowParams,
    pub invariants: InvariantConfig,
    pub vertex_standardize: bool,
}

impl PipelineConfig {
    /// Time steps of raw history consumed before the first standardized value.
    pub fn lead_in(&self) -> usize {
        if self.vertex_standardize {
            2 * self.window.ell
        } else {
            self.window.ell
        }
    }
}

/// Raw features for the graphs of `series` from time `from` on.
fn raw_features(
    series: &GraphSeries,
    from: usize,
    cfg: &PipelineConfig,
) -> Result<(FeatureMatrix, Vec<LocalStats>)> {
    let mut rows = Vec::new();
    let mut locals = Vec::new();
    for (_, g) in series.iter().filter(|(t, _)| *t >= from) {
        rows.push(all_features(g, &cfg.invariants)?.0.to_vec());
        if cfg.vertex_standardize {
            locals.push(LocalStats::of(g));
        }
    }
    let first = from.max(series.first_t());
    Ok((FeatureMatrix::from_rows(first, vec![rows])?, locals))
}

fn standardize_from(
    series: &GraphSeries,
    from: usize,
    cfg: &PipelineConfig,
) -> Result<NormalizedFeatures> {
    let (raw, locals) = raw_features(series, from, cfg)?;
    let raw = if cfg.vertex_standardize {
        apply_vertex_standardization(&raw, &[locals], &cfg.window)?
    } else {
        raw
    };
    normalize(&raw, &cfg.window)
}

/// Standardized features of a whole series (single replicate).
pub fn standardized_series(series: &GraphSeries, cfg: &PipelineConfig) -> Result<NormalizedFeatures> {
    standardize_from(series, series.first_t(), cfg)
}

/// Null rows (`S(t* - 1)`) and alternative rows (`S(t*)`) of `reps`
/// simulated replicates at one value of `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub q: f64,
    pub null: Matrix,
    pub alt: Matrix,
}

/// Simulates `reps` random dot product series and standardizes the features
/// at `t* - 1` and `t*`.
pub fn simulate_power_sample(
    kappa: &KappaParams,
    reps: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<PowerSample> {
    kappa.validate()?;
    cfg.window.validate()?;
    let t_star = kappa.t_star;
    if kappa.t_max < t_star {
        return Err(Error::invalid(format!(
            "t_max = {} ends before t* = {t_star}",
            kappa.t_max
        )));
    }
    if t_star < cfg.lead_in() + 2 {
        return Err(Error::InsufficientHistory {
            required: cfg.lead_in() + 2,
            available: t_star,
        });
    }
    let latent = make_latent(kappa.p, kappa.q)?;
    let params = KappaParams {
        t_max: t_star,
        ..*kappa
    };
    let from = t_star - 1 - cfg.lead_in();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = SeededRng::new(seed, r as u64);
            let series = sample_rdpg_series(&params, &latent, &mut rng)?;
            let s = standardize_from(&series, from, cfg)?;
            Ok((s.row(0, t_star - 1).to_vec(), s.row(0, t_star).to_vec()))
        })
        .collect::<Result<_>>()?;
    let (null, alt): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(PowerSample {
        q: kappa.q,
        null: Matrix::from_rows(&null)?,
        alt: Matrix::from_rows(&alt)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetMode {
    /// Use each scheme's subset as given.
    Fixed,
    /// Replace each scheme's subset with the best of all `C(9, d')` subsets.
    BestOf(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kappa: KappaParams,
    pub q_grid: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub pipeline: PipelineConfig,
    pub schemes: Vec<WeightScheme>,
    pub subset_mode: SubsetMode,
    /// Also report every single feature under both weightings.
    pub individual: bool,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kappa: KappaParams::default(),
            q_grid: vec![0.2, 0.3, 0.4, 0.5],
            reps: 10_000,
            alpha: 0.05,
            pipeline: PipelineConfig::default(),
            schemes: vec![
                WeightScheme::full(WeightKind::Equal),
                WeightScheme::full(WeightKind::Adaptive),
            ],
            subset_mode: SubsetMode::Fixed,
            individual: false,
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.kappa.validate()?;
        self.pipeline.window.validate()?;
        if self.reps < 100 {
            return Err(Error::invalid(format!(
                "at least 100 replicates required, got {}",
                self.reps
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.q_grid.is_empty() {
            return Err(Error::invalid("q grid is empty"));
        }
        if let Some(q) = self.q_grid.iter().find(|&&q| !(self.kappa.p..=1.0).contains(&q)) {
            return Err(Error::invalid(format!(
                "q = {q} outside [p, 1] with p = {}",
                self.kappa.p
            )));
        }
        for s in &self.schemes {
            s.validate(NUM_FEATURES)?;
        }
        if let SubsetMode::BestOf(d) = self.subset_mode {
            if d == 0 || d > NUM_FEATURES {
                return Err(Error::invalid(format!("fusion dimension {d} outside 1..=9")));
            }
        }
        Ok(())
    }
}

/// One power estimate. `error` is set (and `power` is NaN) when the
/// configuration could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub scheme: WeightKind,
    pub subset: Vec<usize>,
    pub q: f64,
    pub power: f64,
    pub se: f64,
    pub reps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PowerResult {
    fn from_count(scheme: &WeightScheme, q: f64, count: usize, reps: usize) -> Self {
        let power = count as f64 / reps as f64;
        Self {
            scheme: scheme.kind,
            subset: scheme.subset.clone(),
            q,
            power,
            se: (power * (1.0 - power) / reps as f64).sqrt(),
            reps,
            error: None,
        }
    }

    fn failed(scheme: &WeightScheme, q: f64, reps: usize, err: &Error) -> Self {
        Self {
            scheme: scheme.kind,
            subset: scheme.subset.clone(),
            q,
            power: f64::NAN,
            se: f64::NAN,
            reps,
            error: Some(err.to_string()),
        }
    }
}

/// Power of one scheme on a simulated sample.
pub fn evaluate(sample: &PowerSample, scheme: &WeightScheme, alpha: f64) -> Result<PowerResult> {
    let count = fusion::rejection_count(&sample.null, &sample.alt, scheme, alpha)?;
    Ok(PowerResult::from_count(scheme, sample.q, count, sample.alt.rows()))
}

/// Exhaustive search over all `C(9, d')` subsets on one shared sample.
/// Ties go to the lexicographically first subset.
pub fn best_subset_on(
    sample: &PowerSample,
    kind: WeightKind,
    d_prime: usize,
    alpha: f64,
) -> Result<(Vec<usize>, PowerResult)> {
    if d_prime == 0 || d_prime > sample.null.cols() {
        return Err(Error::invalid(format!(
            "fusion dimension {d_prime} outside 1..={}",
            sample.null.cols()
        )));
    }
    let candidates: Vec<Vec<usize>> = (1..=sample.null.cols()).combinations(d_prime).collect();
    let results = candidates
        .into_par_iter()
        .map(|subset| evaluate(sample, &WeightScheme { kind, subset }, alpha))
        .collect::<Result<Vec<_>>>()?;
    let best = results
        .into_iter()
        .reduce(|a, b| if b.power > a.power { b } else { a })
        .expect("at least one subset");
    Ok((best.subset.clone(), best))
}

/// Best subset of size `d_prime` at the experiment's first `q`.
pub fn best_subset(
    spec: &ExperimentSpec,
    kind: WeightKind,
    d_prime: usize,
) -> Result<(Vec<usize>, PowerResult)> {
    spec.validate()?;
    let kappa = spec.kappa.with_q(spec.q_grid[0]);
    let sample = simulate_power_sample(&kappa, spec.reps, spec.seed, &spec.pipeline)?;
    best_subset_on(&sample, kind, d_prime, spec.alpha)
}

/// Runs every scheme at every `q` of the grid.
pub fn run_power(spec: &ExperimentSpec) -> Result<Vec<PowerResult>> {
    spec.validate()?;
    let mut out = Vec::new();
    for &q in &spec.q_grid {
        let sample = simulate_power_sample(&spec.kappa.with_q(q), spec.reps, spec.seed, &spec.pipeline);
        let sample = match sample {
            Ok(s) => s,
            Err(e) => {
                out.extend(spec.schemes.iter().map(|s| PowerResult::failed(s, q, spec.reps, &e)));
                continue;
            }
        };
        for scheme in &spec.schemes {
            let res = match spec.subset_mode {
                SubsetMode::Fixed => evaluate(&sample, scheme, spec.alpha),
                SubsetMode::BestOf(d) => {
                    best_subset_on(&sample, scheme.kind, d, spec.alpha).map(|(_, r)| r)
                }
            };
            out.push(res.unwrap_or_else(|e| PowerResult::failed(scheme, q, spec.reps, &e)));
        }
        if spec.individual {
            for kind in [WeightKind::Equal, WeightKind::Adaptive] {
                for i in 1..=NUM_FEATURES {
                    let scheme = WeightScheme {
                        kind,
                        subset: vec![i],
                    };
                    out.push(evaluate(&sample, &scheme, spec.alpha)?);
                }
            }
        }
    }
    Ok(out)
}

/// Rows of `s` for times `from..=to` as a matrix.
fn history(s: &NormalizedFeatures, from: usize, to: usize) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = (from..=to).map(|t| s.row(0, t).to_vec()).collect();
    Matrix::from_rows(&rows)
}

/// Tests every time step that has at least two standardized predecessors,
/// using all earlier standardized rows as the null reference. Results are
/// ordered by time, then by scheme.
pub fn detect_series(
    series: &GraphSeries,
    cfg: &PipelineConfig,
    alpha: f64,
    schemes: &[WeightScheme],
) -> Result<Vec<DetectionResult>> {
    let required = cfg.lead_in() + 3;
    if series.len() < required {
        return Err(Error::InsufficientHistory {
            required,
            available: series.len(),
        });
    }
    let s = standardized_series(series, cfg)?;
    detect_standardized(&s, alpha, schemes)
}

/// As [`detect_series`], starting from already standardized features.
pub fn detect_standardized(
    s: &NormalizedFeatures,
    alpha: f64,
    schemes: &[WeightScheme],
) -> Result<Vec<DetectionResult>> {
    let (first, last) = s.valid_range();
    if last < first + 2 {
        return Err(Error::InsufficientHistory {
            required: 3,
            available: last + 1 - first,
        });
    }
    for sc in schemes {
        sc.validate(s.width())?;
    }
    (first + 2..=last)
        .into_par_iter()
        .map(|t| {
            let null = history(s, first, t - 1)?;
            schemes
                .iter()
                .map(|sc| fusion::test_at(s.row(0, t), &null, sc, alpha).map(|r| r.at_time(t)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Detection counts at one fusion dimension, split by which weighting fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub d_prime: usize,
    pub combinations: usize,
    pub both: usize,
    pub equal_only: usize,
    pub adaptive_only: usize,
    pub neither: usize,
}

/// Classifies detection at one test row for every subset of every size.
pub fn compare_schemes(test_row: &[f64], null: &Matrix, alpha: f64) -> Result<Vec<ComparisonRow>> {
    let width = null.cols();
    (1..=width)
        .map(|d| {
            let mut row = ComparisonRow {
                d_prime: d,
                combinations: 0,
                both: 0,
                equal_only: 0,
                adaptive_only: 0,
                neither: 0,
            };
            for subset in (1..=width).combinations(d) {
                let fire = |kind| {
                    fusion::test_at(test_row, null, &WeightScheme { kind, subset: subset.clone() }, alpha)
                        .map(|r| r.reject)
                };
                match (fire(WeightKind::Equal)?, fire(WeightKind::Adaptive)?) {
                    (true, true) => row.both += 1,
                    (true, false) => row.equal_only += 1,
                    (false, true) => row.adaptive_only += 1,
                    (false, false) => row.neither += 1,
                }
                row.combinations += 1;
            }
            Ok(row)
        })
        .collect()
}

/// Per-dimension counts of {both, equal-only, adaptive-only} detections at
/// `t_star`, against all standardized rows before it.
pub fn scheme_comparison_table(
    series: &GraphSeries,
    t_star: usize,
    cfg: &PipelineConfig,
    alpha: f64,
) -> Result<Vec<ComparisonRow>> {
    let s = standardized_series(series, cfg)?;
    let (first, last) = s.valid_range();
    if t_star > last || t_star < first + 2 {
        return Err(Error::invalid(format!(
            "t* = {t_star} needs at least two standardized steps before it within {first}..={last}"
        )));
    }
    let null = history(&s, first, t_star - 1)?;
    compare_schemes(s.row(0, t_star), &null, alpha)
}
