//! Sliding-window standardization of feature time series.
//!
//! `S_i(t) = (F_i(t) - mean) / sd`, where mean and sample sd (divisor
//! `ell - 1`) are taken over the `ell` steps strictly before `t`. A window
//! with zero spread yields 0 for an equal value and `±sigma_cap` otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{Feature, FeatureMatrix, LocalStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub ell: usize,
    pub sigma_cap: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            ell: 5,
            sigma_cap: 10.0,
        }
    }
}

impl WindowParams {
    pub fn new(ell: usize, sigma_cap: f64) -> Result<Self> {
        let p = Self { ell, sigma_cap };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell < 2 {
            return Err(Error::invalid(format!(
                "window length must be at least 2, got {}",
                self.ell
            )));
        }
        if !(self.sigma_cap > 0.0) || !self.sigma_cap.is_finite() {
            return Err(Error::invalid(format!(
                "sigma_cap must be positive and finite, got {}",
                self.sigma_cap
            )));
        }
        Ok(())
    }
}

/// Running mean and sample standard deviation of `series` over the `ell`
/// values preceding 1-based time `t` (i.e. `series[t-ell-1 .. t-1]`).
pub fn running_stats(series: &[f64], t: usize, ell: usize) -> Result<(f64, f64)> {
    if ell < 2 {
        return Err(Error::invalid("window length must be at least 2"));
    }
    let available = t.saturating_sub(1).min(series.len());
    if t <= ell || t - 1 > series.len() {
        return Err(Error::InsufficientHistory {
            required: ell,
            available,
        });
    }
    Ok(window_stats(&series[t - 1 - ell..t - 1]))
}

fn window_stats(window: &[f64]) -> (f64, f64) {
    let len = window.len() as f64;
    let mean = window.iter().sum::<f64>() / len;
    let ss = window.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, (ss / (len - 1.0)).sqrt())
}

/// Standardized deviation with the degenerate-window cap rule.
pub fn zscore(value: f64, mean: f64, sd: f64, sigma_cap: f64) -> f64 {
    if sd > 0.0 {
        (value - mean) / sd
    } else if value == mean {
        0.0
    } else {
        sigma_cap.copysign(value - mean)
    }
}

/// Temporally standardized features together with the window that produced
/// them. Defined only for `t` from `first valid` through the last raw time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFeatures {
    pub window: WindowParams,
    s: FeatureMatrix,
}

impl NormalizedFeatures {
    pub fn valid_range(&self) -> (usize, usize) {
        (self.s.first_t(), self.s.last_t())
    }

    pub fn reps(&self) -> usize {
        self.s.reps()
    }

    pub fn width(&self) -> usize {
        self.s.width()
    }

    pub fn get(&self, rep: usize, t: usize, i: usize) -> f64 {
        self.s.get(rep, t, i)
    }

    pub fn row(&self, rep: usize, t: usize) -> &[f64] {
        self.s.row(rep, t)
    }

    /// All replicates at time `t`, row-major `reps x width`.
    pub fn slice_at(&self, t: usize) -> Vec<f64> {
        self.s.slice_at(t)
    }

    pub fn as_matrix(&self) -> &FeatureMatrix {
        &self.s
    }
}

/// Standardizes every replicate and feature independently.
pub fn normalize(features: &FeatureMatrix, params: &WindowParams) -> Result<NormalizedFeatures> {
    params.validate()?;
    let ell = params.ell;
    if features.times() <= ell {
        return Err(Error::InsufficientHistory {
            required: ell + 1,
            available: features.times(),
        });
    }
    let first = features.first_t() + ell;
    let times = features.times() - ell;
    let mut s = FeatureMatrix::zeros(features.reps(), times, features.width(), first);
    for rep in 0..features.reps() {
        for i in 0..features.width() {
            let col = features.column(rep, i);
            for k in ell..col.len() {
                let (mean, sd) = window_stats(&col[k - ell..k]);
                let z = zscore(col[k], mean, sd, params.sigma_cap);
                s.set(rep, features.first_t() + k, i, z);
            }
        }
    }
    Ok(NormalizedFeatures {
        window: *params,
        s,
    })
}

/// Per-vertex standardized locality statistics.
///
/// `locality[k][v]` is the statistic of vertex `v` at the `k`-th time step.
/// Returns one row per time step from `ell` onward (0-based), holding
/// `(psi - mean_v) / max(sd_v, 1)` over each vertex's own window.
pub fn vertex_standardized(locality: &[Vec<f64>], params: &WindowParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let ell = params.ell;
    if locality.len() <= ell {
        return Err(Error::InsufficientHistory {
            required: ell + 1,
            available: locality.len(),
        });
    }
    let n = locality[0].len();
    if let Some(row) = locality.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: row.len(),
        });
    }
    let mut out = Vec::with_capacity(locality.len() - ell);
    let mut window = vec![0.0; ell];
    for k in ell..locality.len() {
        let row = (0..n)
            .map(|v| {
                for (j, w) in window.iter_mut().enumerate() {
                    *w = locality[k - ell + j][v];
                }
                let (mean, sd) = window_stats(&window);
                (locality[k][v] - mean) / sd.max(1.0)
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Max over vertices of the vertex-standardized statistic, one value per
/// time step from `ell` onward.
pub fn vertex_standardize(locality: &[Vec<f64>], params: &WindowParams) -> Result<Vec<f64>> {
    Ok(vertex_standardized(locality, params)?
        .into_iter()
        .map(|row| row.into_iter().fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// Replaces the localized feature columns (max degree, scan 1..3) with their
/// vertex-standardized maxima.
///
/// `locals[rep][k]` holds the per-vertex statistics of the `k`-th graph of
/// replicate `rep`. The first `ell` time steps have no vertex window, so the
/// result starts `ell` steps later than `raw`. Columns for MAD and the global
/// features are passed through unchanged.
pub fn apply_vertex_standardization(
    raw: &FeatureMatrix,
    locals: &[Vec<LocalStats>],
    params: &WindowParams,
) -> Result<FeatureMatrix> {
    params.validate()?;
    if locals.len() != raw.reps() {
        return Err(Error::DimensionMismatch {
            expected: raw.reps(),
            actual: locals.len(),
        });
    }
    if raw.times() <= params.ell {
        return Err(Error::InsufficientHistory {
            required: params.ell + 1,
            available: raw.times(),
        });
    }
    let first = raw.first_t() + params.ell;
    let times = raw.times() - params.ell;
    let mut out = FeatureMatrix::zeros(raw.reps(), times, raw.width(), first);
    for (rep, rep_locals) in locals.iter().enumerate() {
        if rep_locals.len() != raw.times() {
            return Err(Error::DimensionMismatch {
                expected: raw.times(),
                actual: rep_locals.len(),
            });
        }
        for t in first..=raw.last_t() {
            for i in 0..raw.width() {
                out.set(rep, t, i, raw.get(rep, t, i));
            }
        }
        for f in Feature::ALL.into_iter().filter(|f| f.is_localized()) {
            if f.index() >= raw.width() {
                continue;
            }
            let locality: Vec<Vec<f64>> = rep_locals
                .iter()
                .map(|l| l.for_feature(f).unwrap_or_default().to_vec())
                .collect();
            let maxima = vertex_standardize(&locality, params)?;
            for (k, m) in maxima.into_iter().enumerate() {
                out.set(rep, first + k, f.index(), m);
            }
        }
    }
    Ok(out)
}
