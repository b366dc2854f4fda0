//! Fusion of standardized features and the Monte Carlo fusion test.
//!
//! The fused statistic is `S^w = sum_i w_i S_i` over a chosen feature subset.
//! Equal weighting uses `w_i = 1/d'`. Adaptive weighting scores each feature
//! by how far the tested point sits from the null mean in null standard
//! deviations, `w_i = |S_i - mu_i| / sigma_i`, and applies those same weights
//! to every null row before taking the critical value. The adaptive rejection
//! region therefore depends on the tested point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::NUM_FEATURES;

/// Floor applied to null standard deviations before dividing.
pub const SIGMA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Equal,
    Adaptive,
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Equal => "equal",
            WeightKind::Adaptive => "adaptive",
        })
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(WeightKind::Equal),
            "adaptive" => Ok(WeightKind::Adaptive),
            other => Err(Error::invalid(format!("unknown weighting {other:?}"))),
        }
    }
}

/// A weighting kind applied to an ordered subset of 1-based feature ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightScheme {
    pub kind: WeightKind,
    pub subset: Vec<usize>,
}

impl WeightScheme {
    pub fn new(kind: WeightKind, subset: Vec<usize>) -> Result<Self> {
        let s = Self { kind, subset };
        s.validate(NUM_FEATURES)?;
        Ok(s)
    }

    /// Fuses all nine features.
    pub fn full(kind: WeightKind) -> Self {
        Self {
            kind,
            subset: (1..=NUM_FEATURES).collect(),
        }
    }

    /// Checks the subset is non-empty, distinct, and within `1..=width`.
    pub fn validate(&self, width: usize) -> Result<()> {
        if self.subset.is_empty() {
            return Err(Error::invalid("feature subset is empty"));
        }
        let mut seen = vec![false; width + 1];
        for &i in &self.subset {
            if i == 0 || i > width {
                return Err(Error::invalid(format!(
                    "feature index {i} outside 1..={width}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("feature index {i} repeated")));
            }
        }
        Ok(())
    }

    pub fn d_prime(&self) -> usize {
        self.subset.len()
    }

    /// Subset rendered as `1,2,6`.
    pub fn subset_label(&self) -> String {
        subset_label(&self.subset)
    }

    fn columns(&self) -> Vec<usize> {
        self.subset.iter().map(|i| i - 1).collect()
    }
}

pub fn subset_label(subset: &[usize]) -> String {
    subset
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `1,2,6` into feature ids.
pub fn parse_subset(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad feature index {p:?}")))
        })
        .collect()
}

/// Dense row-major sample matrix (one row per replicate or time step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }
}

/// Null sample restricted to the fused features, with its per-feature mean
/// and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullReference {
    columns: Vec<Vec<f64>>,
    pub mu0: Vec<f64>,
    pub sigma0: Vec<f64>,
}

impl NullReference {
    /// Builds the reference from feature columns (one vector per feature).
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if n < 2 {
            return Err(Error::invalid(format!(
                "null reference needs at least 2 samples, got {n}"
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: c.len(),
            });
        }
        let (mu0, sigma0) = columns
            .iter()
            .map(|c| {
                let mean = c.iter().sum::<f64>() / n as f64;
                let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (mean, var.sqrt())
            })
            .unzip();
        Ok(Self {
            columns,
            mu0,
            sigma0,
        })
    }

    /// Reference over the given 0-based columns of `samples`.
    pub fn from_matrix(samples: &Matrix, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= samples.cols()) {
            return Err(Error::DimensionMismatch {
                expected: samples.cols(),
                actual: c + 1,
            });
        }
        Self::from_columns(cols.iter().map(|&c| samples.column(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Fused value of every null sample under `w`, written into `out`.
    pub fn fuse_into(&self, w: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.len(), 0.0);
        for (col, &wi) in self.columns.iter().zip(w) {
            for (o, x) in out.iter_mut().zip(col) {
                *o += wi * x;
            }
        }
    }
}

pub fn equal_weights(d_prime: usize) -> Vec<f64> {
    vec![1.0 / d_prime as f64; d_prime]
}

/// `|s_i - mu_i| / max(sigma_i, SIGMA_FLOOR)`, element-wise.
pub fn adaptive_weights(s_test: &[f64], reference: &NullReference) -> Vec<f64> {
    s_test
        .iter()
        .zip(reference.mu0.iter().zip(&reference.sigma0))
        .map(|(s, (mu, sigma))| (s - mu).abs() / sigma.max(SIGMA_FLOOR))
        .collect()
}

pub fn fuse(s: &[f64], w: &[f64]) -> f64 {
    s.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// 1-based rank of the order statistic used as the `(1 - alpha)` quantile of
/// `n` samples: `ceil((1 - alpha) * n)`, clamped to `1..=n`.
pub fn quantile_rank(n: usize, alpha: f64) -> usize {
    // The slack absorbs representation error in products like 0.95 * 100.
    let k = ((1.0 - alpha) * n as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(n)
}

/// Empirical critical value: the `ceil((1 - alpha) N)`-th smallest null value.
pub fn critical_value(null_fused: &[f64], alpha: f64) -> Result<f64> {
    let mut buf = null_fused.to_vec();
    critical_value_in_place(&mut buf, alpha)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// As [`critical_value`], reordering `buf`.
pub fn critical_value_in_place(buf: &mut [f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if buf.is_empty() {
        return Err(Error::EmptySample);
    }
    let k = quantile_rank(buf.len(), alpha);
    let (_, v, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*v)
}

/// Outcome of one fusion test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Tested time step; 0 when the test point carries no time index.
    pub t: usize,
    pub scheme: WeightKind,
    pub subset: Vec<usize>,
    pub fused: f64,
    pub weights: Vec<f64>,
    pub cv: f64,
    pub reject: bool,
    pub alpha: f64,
}

impl DetectionResult {
    pub fn at_time(mut self, t: usize) -> Self {
        self.t = t;
        self
    }
}

fn test_against(
    s_sub: &[f64],
    reference: &NullReference,
    scheme: &WeightScheme,
    alpha: f64,
) -> Result<DetectionResult> {
    let weights = match scheme.kind {
        WeightKind::Equal => equal_weights(scheme.d_prime()),
        WeightKind::Adaptive => adaptive_weights(s_sub, reference),
    };
    let mut null_fused = Vec::new();
    reference.fuse_into(&weights, &mut null_fused);
    let cv = critical_value_in_place(&mut null_fused, alpha)?;
    let fused = fuse(s_sub, &weights);
    Ok(DetectionResult {
        t: 0,
        scheme: scheme.kind,
        subset: scheme.subset.clone(),
        fused,
        weights,
        cv,
        reject: fused > cv,
        alpha,
    })
}

/// Tests one standardized feature row against a null sample.
///
/// `s_test` and the rows of `null_s` are full-width feature rows; the scheme's
/// subset selects which columns are fused.
pub fn test_at(
    s_test: &[f64],
    null_s: &Matrix,
    scheme: &WeightScheme,
    alpha: f64,
) -> Result<DetectionResult> {
    check_alpha(alpha)?;
    if s_test.len() != null_s.cols() {
        return Err(Error::DimensionMismatch {
            expected: null_s.cols(),
            actual: s_test.len(),
        });
    }
    scheme.validate(null_s.cols())?;
    let cols = scheme.columns();
    let reference = NullReference::from_matrix(null_s, &cols)?;
    let s_sub: Vec<f64> = cols.iter().map(|&c| s_test[c]).collect();
    test_against(&s_sub, &reference, scheme, alpha)
}

/// Number of alternative rows rejected, reusing one null reference.
pub fn rejection_count(
    null_s: &Matrix,
    alt_s: &Matrix,
    scheme: &WeightScheme,
    alpha: f64,
) -> Result<usize> {
    check_alpha(alpha)?;
    if alt_s.rows() == 0 {
        return Err(Error::EmptySample);
    }
    if alt_s.cols() != null_s.cols() {
        return Err(Error::DimensionMismatch {
            expected: null_s.cols(),
            actual: alt_s.cols(),
        });
    }
    scheme.validate(null_s.cols())?;
    let cols = scheme.columns();
    let reference = NullReference::from_matrix(null_s, &cols)?;
    let subrow = |r: &[f64]| cols.iter().map(|&c| r[c]).collect::<Vec<f64>>();

    match scheme.kind {
        WeightKind::Equal => {
            let w = equal_weights(cols.len());
            let mut null_fused = Vec::new();
            reference.fuse_into(&w, &mut null_fused);
            let cv = critical_value_in_place(&mut null_fused, alpha)?;
            Ok(alt_s
                .iter_rows()
                .filter(|r| fuse(&subrow(r), &w) > cv)
                .count())
        }
        WeightKind::Adaptive if cols.len() == 1 => {
            // w * x is monotone in x for w > 0, so the order statistic of the
            // scaled null is the scaled order statistic.
            let mut col = reference.columns[0].clone();
            let q = critical_value_in_place(&mut col, alpha)?;
            Ok(alt_s
                .iter_rows()
                .filter(|r| {
                    let x = subrow(r);
                    let w = adaptive_weights(&x, &reference);
                    let cv = if w[0] > 0.0 { w[0] * q } else { 0.0 };
                    fuse(&x, &w) > cv
                })
                .count())
        }
        WeightKind::Adaptive => {
            let rows: Vec<&[f64]> = alt_s.iter_rows().collect();
            let count = rows
                .par_iter()
                .map_init(Vec::new, |buf, r| {
                    let x = subrow(r);
                    let w = adaptive_weights(&x, &reference);
                    reference.fuse_into(&w, buf);
                    let cv = critical_value_in_place(buf, alpha).unwrap_or(f64::INFINITY);
                    usize::from(fuse(&x, &w) > cv)
                })
                .sum();
            Ok(count)
        }
    }
}

/// Fraction of alternative rows the test rejects.
pub fn power(null_s: &Matrix, alt_s: &Matrix, scheme: &WeightScheme, alpha: f64) -> Result<f64> {
    Ok(rejection_count(null_s, alt_s, scheme, alpha)? as f64 / alt_s.rows() as f64)
}
