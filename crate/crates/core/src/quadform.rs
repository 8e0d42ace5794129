//! Streaming computation of the scalar quadratic forms y·S·yᵀ.
//!
//! The sample covariance never materializes: y·S·yᵀ equals the sample
//! variance of the weighted row sums, so each group costs O(n·p) time and
//! O(n) extra space. Dimensions can reach the 10⁵–10⁶ range, so all inner
//! accumulations use compensated (Kahan–Neumaier) summation. An explicit
//! O(n·p²) covariance oracle is provided for cross-checking at small p.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Compensated accumulator (Neumaier variant); rounding error stays bounded
/// independently of the number of terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One group of i.i.d. sample vectors: an n × p matrix stored row-major,
/// rows = samples, columns = coordinates. Requires n ≥ 2 and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl GroupSample {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!(
                "a group needs at least 2 sample rows, got {n}"
            )));
        }
        if p == 0 {
            return Err(Error::Dimension("dimension p must be positive".to_string()));
        }
        if data.len() != n * p {
            return Err(Error::Dimension(format!(
                "expected {n} x {p} = {} entries, got {}",
                n * p,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "entry at row {}, column {} is not finite",
                pos / p + 1,
                pos % p + 1
            )));
        }
        Ok(GroupSample { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Dimension(format!(
                "row {} has {} entries, expected {p}",
                i + 1,
                row.len()
            )));
        }
        GroupSample::new(n, p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.data[l * self.p..(l + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A p-dimensional weight vector defining the quadratic form y·S·yᵀ.
/// Canonical forms are the all-ones vector and contiguous block indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorVector {
    weights: Vec<f64>,
}

impl SelectorVector {
    pub fn ones(p: usize) -> Self {
        SelectorVector {
            weights: vec![1.0; p],
        }
    }

    /// Indicator of the 0-based half-open coordinate range `start..end`.
    pub fn block_indicator(start: usize, end: usize, p: usize) -> Result<Self> {
        if start >= end || end > p {
            return Err(Error::Dimension(format!(
                "block {start}..{end} does not fit in dimension {p}"
            )));
        }
        let mut weights = vec![0.0; p];
        weights[start..end].fill(1.0);
        Ok(SelectorVector { weights })
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Dimension("selector must not be empty".to_string()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain(
                "selector weights must be finite".to_string(),
            ));
        }
        Ok(SelectorVector { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }
}

/// The scalar Ŝ = y·S·yᵀ; nonnegative by construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QuadFormValue(f64);

impl QuadFormValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Weighted row sums s_l = Σ_j y_j · X_{jl}, one pass over the matrix.
pub fn weighted_row_sums(sample: &GroupSample, selector: &SelectorVector) -> Result<Vec<f64>> {
    if selector.len() != sample.p() {
        return Err(Error::Dimension(format!(
            "selector length {} does not match data dimension {}",
            selector.len(),
            sample.p()
        )));
    }
    let w = selector.weights();
    Ok(sample
        .rows()
        .map(|row| {
            let mut acc = CompensatedSum::default();
            for (x, y) in row.iter().zip(w) {
                acc.add(x * y);
            }
            acc.total()
        })
        .collect())
}

/// y·S·yᵀ as the sample variance of the weighted row sums, two-pass
/// (mean first, then squared deviations). Returns exactly 0 when every
/// deviation vanishes.
pub fn quad_form(sample: &GroupSample, selector: &SelectorVector) -> Result<QuadFormValue> {
    let sums = weighted_row_sums(sample, selector)?;
    let n = sums.len();
    let mut mean_acc = CompensatedSum::default();
    for &s in &sums {
        mean_acc.add(s);
    }
    let mean = mean_acc.total() / n as f64;
    let mut ss = CompensatedSum::default();
    for &s in &sums {
        let d = s - mean;
        ss.add(d * d);
    }
    let value = ss.total() / (n as f64 - 1.0);
    Ok(QuadFormValue(value.max(0.0)))
}

/// Guard for the explicit covariance path; beyond this, use `quad_form`.
pub const ORACLE_DIM_LIMIT: usize = 2000;

/// Explicit sample covariance S = Σ_l (x_l − x̄)(x_l − x̄)ᵀ / (n − 1).
/// O(n·p²); guarded to small p. Symmetric and positive semidefinite.
pub fn sample_covariance_oracle(sample: &GroupSample) -> Result<Array2<f64>> {
    let (n, p) = (sample.n(), sample.p());
    if p > ORACLE_DIM_LIMIT {
        return Err(Error::Dimension(format!(
            "explicit covariance is guarded to p <= {ORACLE_DIM_LIMIT} (got {p}); \
             use the streaming quadratic form instead"
        )));
    }
    let mut means = vec![CompensatedSum::default(); p];
    for row in sample.rows() {
        for (m, &x) in means.iter_mut().zip(row) {
            m.add(x);
        }
    }
    let means: Vec<f64> = means.iter().map(|m| m.total() / n as f64).collect();

    let mut cov = Array2::<f64>::zeros((p, p));
    let mut dev = vec![0.0; p];
    for row in sample.rows() {
        for ((d, &x), &m) in dev.iter_mut().zip(row).zip(&means) {
            *d = x - m;
        }
        for a in 0..p {
            let da = dev[a];
            for b in a..p {
                cov[[a, b]] += da * dev[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..p {
        for b in a..p {
            let v = cov[[a, b]] / denom;
            cov[[a, b]] = v;
            cov[[b, a]] = v;
        }
    }
    Ok(cov)
}
