//! Equality tests for several covariance matrices.
//!
//! The headline statistic replaces the log-determinants of the classical
//! Box's M with scalar quadratic forms of a selector vector:
//!
//!   L_k = (n−k)·log V̂ − Σ_i (n_i−1)·log Ŝ_i,
//!
//! where Ŝ_i = y·S_i·yᵀ and V̂ is their (n_i−1)-weighted mean. Under the
//! null it is asymptotically χ²_{k−1}; decisions use the Bartlett-scaled
//! ρ·L_k. Block tests run the same statistic on contiguous coordinate
//! blocks to localize a rejection. The determinant-based Box's M is kept
//! as a small-p reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadform::{quad_form, sample_covariance_oracle, GroupSample, SelectorVector};
use crate::statmath::{chi2_sf, chi2_quantile, DegreesOfFreedom, Probability};

/// How a test turns a scaled statistic into a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionMode {
    /// Reject when the upper-tail p-value falls below α (the default).
    UpperTail,
    /// Reject when the statistic lands in [0, χ₁) ∪ (χ₂, ∞) with
    /// χ₁, χ₂ the α/2 and 1−α/2 quantiles.
    TwoSidedRegion,
}

/// k ≥ 2 groups sharing the coordinate dimension p.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGroupData {
    groups: Vec<GroupSample>,
}

impl MultiGroupData {
    pub fn new(groups: Vec<GroupSample>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 groups, got {}",
                groups.len()
            )));
        }
        let p = groups[0].p();
        if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.p() != p) {
            return Err(Error::Dimension(format!(
                "group {} has dimension {}, expected {p}",
                i + 1,
                g.p()
            )));
        }
        Ok(MultiGroupData { groups })
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn p(&self) -> usize {
        self.groups[0].p()
    }

    pub fn n_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(GroupSample::n).collect()
    }

    pub fn min_n(&self) -> usize {
        self.groups.iter().map(GroupSample::n).min().unwrap()
    }

    pub fn max_n(&self) -> usize {
        self.groups.iter().map(GroupSample::n).max().unwrap()
    }

    pub fn groups(&self) -> &[GroupSample] {
        &self.groups
    }
}

/// Outcome of a single test: raw and scaled statistics, p-value, optional
/// two-sided region, decision, and the per-group scalar summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// L_k (or M for the determinant reference).
    pub statistic: f64,
    /// Bartlett ρ (or φ for the determinant reference).
    pub scale_factor: f64,
    /// scale_factor · statistic.
    pub scaled_statistic: f64,
    pub df: u64,
    /// Upper-tail p-value of the scaled statistic.
    pub p_value_upper: f64,
    /// (χ₁, χ₂) when the two-sided region mode was requested.
    pub region: Option<(f64, f64)>,
    pub reject: bool,
    /// The k per-group scalars Ŝ_i (log-determinants for Box's M).
    pub group_quadforms: Vec<f64>,
    /// The pooled V̂ (pooled log-determinant for Box's M).
    pub pooled: f64,
}

fn check_group_sizes(n_sizes: &[usize]) -> Result<()> {
    if n_sizes.len() < 2 {
        return Err(Error::Dimension(format!(
            "need at least 2 groups, got {}",
            n_sizes.len()
        )));
    }
    if let Some((i, &n)) = n_sizes.iter().enumerate().find(|(_, &n)| n < 2) {
        return Err(Error::Dimension(format!(
            "group {} has {n} samples; at least 2 are required",
            i + 1
        )));
    }
    Ok(())
}

/// Bartlett scale factor ρ = 1/C with
/// C = 1 + (Σ_i 1/(n_i−1) − 1/(n−k)) / (3(k−1)). Always in (0, 1).
pub fn rho_factor(n_sizes: &[usize]) -> Result<f64> {
    check_group_sizes(n_sizes)?;
    let k = n_sizes.len() as f64;
    let pooled_df: f64 = n_sizes.iter().map(|&n| (n - 1) as f64).sum();
    let inv_sum: f64 = n_sizes.iter().map(|&n| 1.0 / (n - 1) as f64).sum();
    let c = 1.0 + (inv_sum - 1.0 / pooled_df) / (3.0 * (k - 1.0));
    Ok(1.0 / c)
}

fn lk_and_pooled(quadforms: &[f64], n_sizes: &[usize]) -> Result<(f64, f64)> {
    check_group_sizes(n_sizes)?;
    if quadforms.len() != n_sizes.len() {
        return Err(Error::Dimension(format!(
            "{} quadratic forms for {} group sizes",
            quadforms.len(),
            n_sizes.len()
        )));
    }
    for (i, &s) in quadforms.iter().enumerate() {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::Degenerate {
                group: i + 1,
                detail: format!(
                    "quadratic form is {s}; constant or rank-deficient data cannot enter the log statistic"
                ),
            });
        }
    }
    let weights: Vec<f64> = n_sizes.iter().map(|&n| (n - 1) as f64).collect();
    let pooled_df: f64 = weights.iter().sum();
    let pooled = weights
        .iter()
        .zip(quadforms)
        .map(|(w, s)| w * s)
        .sum::<f64>()
        / pooled_df;
    let log_sum: f64 = weights.iter().zip(quadforms).map(|(w, s)| w * s.ln()).sum();
    Ok((pooled_df * pooled.ln() - log_sum, pooled))
}

/// L_k from precomputed quadratic forms. Nonnegative (log of the weighted
/// mean dominates the weighted mean of logs); zero iff all Ŝ_i agree;
/// invariant under a common rescaling of the Ŝ_i.
pub fn lk_from_quadforms(quadforms: &[f64], n_sizes: &[usize]) -> Result<f64> {
    lk_and_pooled(quadforms, n_sizes).map(|(l, _)| l)
}

/// Two-sided rejection region (χ₁, χ₂): the α/2 and 1−α/2 quantiles of
/// χ²_df. The region itself is [0, χ₁) ∪ (χ₂, ∞).
pub fn rejection_region(alpha: Probability, df: DegreesOfFreedom) -> Result<(f64, f64)> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::Domain(format!(
            "significance level must lie strictly inside (0, 1), got {a}"
        )));
    }
    let lower = chi2_quantile(Probability::new(a / 2.0)?, df)?;
    let upper = chi2_quantile(Probability::new(1.0 - a / 2.0)?, df)?;
    Ok((lower, upper))
}

/// The ρL_k test of one selector vector against k groups.
pub fn lk_test(
    data: &MultiGroupData,
    selector: &SelectorVector,
    alpha: Probability,
    mode: DecisionMode,
) -> Result<TestResult> {
    if selector.is_zero() {
        return Err(Error::Domain(
            "selector vector must not be identically zero".to_string(),
        ));
    }
    let quadforms: Vec<f64> = data
        .groups()
        .iter()
        .map(|g| quad_form(g, selector).map(|v| v.value()))
        .collect::<Result<_>>()?;
    let n_sizes = data.n_sizes();
    let (statistic, pooled) = lk_and_pooled(&quadforms, &n_sizes)?;
    let scale_factor = rho_factor(&n_sizes)?;
    let scaled = scale_factor * statistic;
    let df = DegreesOfFreedom::new((data.k() - 1) as u64)?;
    // L_k is nonnegative up to rounding; clamp the dust before the tail call.
    let p_value_upper = chi2_sf(scaled.max(0.0), df)?.value();
    let (region, reject) = match mode {
        DecisionMode::UpperTail => (None, p_value_upper < alpha.value()),
        DecisionMode::TwoSidedRegion => {
            let (lo, hi) = rejection_region(alpha, df)?;
            (Some((lo, hi)), scaled < lo || scaled > hi)
        }
    };
    Ok(TestResult {
        statistic,
        scale_factor,
        scaled_statistic: scaled,
        df: df.get(),
        p_value_upper,
        region,
        reject,
        group_quadforms: quadforms,
        pooled,
    })
}

/// A contiguous partition of coordinates 1..p into blocks, stored as the
/// increasing boundaries p_1 < … < p_m = p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    boundaries: Vec<usize>,
}

impl BlockPartition {
    pub fn from_boundaries(boundaries: Vec<usize>, p: usize) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::Dimension(
                "partition needs at least one boundary".to_string(),
            ));
        }
        if boundaries[0] == 0 || boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Dimension(format!(
                "boundaries must be strictly increasing and positive, got {boundaries:?}"
            )));
        }
        if *boundaries.last().unwrap() != p {
            return Err(Error::Dimension(format!(
                "last boundary {} must equal the dimension {p}",
                boundaries.last().unwrap()
            )));
        }
        Ok(BlockPartition { boundaries })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn block_count(&self) -> usize {
        self.boundaries.len()
    }

    /// 0-based half-open coordinate range of block `j` (0-based).
    pub fn block_range(&self, j: usize) -> (usize, usize) {
        let start = if j == 0 { 0 } else { self.boundaries[j - 1] };
        (start, self.boundaries[j])
    }

    pub fn dimension(&self) -> usize {
        *self.boundaries.last().unwrap()
    }
}

/// Default partition with boundaries p_j = min(j·(n_min−1), p). Collapses
/// to a single block when p fits inside the first block width.
pub fn default_partition(p: usize, n_min: usize) -> Result<BlockPartition> {
    if p < 2 {
        return Err(Error::Dimension(format!(
            "dimension must be at least 2 to partition, got {p}"
        )));
    }
    if n_min < 3 {
        return Err(Error::Dimension(format!(
            "smallest group size must be at least 3 (block width n_min−1 ≥ 2), got {n_min}"
        )));
    }
    let width = n_min - 1;
    if p <= width {
        return BlockPartition::from_boundaries(vec![p], p);
    }
    let mut boundaries = Vec::new();
    let mut j = 1;
    loop {
        let b = (j * width).min(p);
        boundaries.push(b);
        if b == p {
            break;
        }
        j += 1;
    }
    BlockPartition::from_boundaries(boundaries, p)
}

/// One block's outcome; degenerate blocks are reported without aborting
/// the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    /// 1-based block index.
    pub index: usize,
    /// 1-based inclusive coordinate range covered by the block.
    pub coord_start: usize,
    pub coord_end: usize,
    pub status: BlockStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStatus {
    Tested(TestResult),
    Degenerate { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTestReport {
    pub blocks: Vec<BlockOutcome>,
    /// OR over the tested blocks' decisions.
    pub overall_reject: bool,
}

impl BlockTestReport {
    pub fn rejected_blocks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| matches!(&b.status, BlockStatus::Tested(r) if r.reject))
            .map(|b| b.index)
            .collect()
    }
}

/// Per-block L_kj tests over a partition; the overall decision rejects
/// when at least one block rejects.
pub fn block_tests(
    data: &MultiGroupData,
    partition: &BlockPartition,
    alpha: Probability,
    mode: DecisionMode,
) -> Result<BlockTestReport> {
    if partition.dimension() != data.p() {
        return Err(Error::Dimension(format!(
            "partition covers {} coordinates but the data has {}",
            partition.dimension(),
            data.p()
        )));
    }
    let mut blocks = Vec::with_capacity(partition.block_count());
    let mut overall = false;
    for j in 0..partition.block_count() {
        let (start, end) = partition.block_range(j);
        let selector = SelectorVector::block_indicator(start, end, data.p())?;
        let status = match lk_test(data, &selector, alpha, mode) {
            Ok(result) => {
                overall |= result.reject;
                BlockStatus::Tested(result)
            }
            Err(e @ Error::Degenerate { .. }) => BlockStatus::Degenerate {
                message: e.to_string(),
            },
            Err(e) => return Err(e),
        };
        blocks.push(BlockOutcome {
            index: j + 1,
            coord_start: start + 1,
            coord_end: end,
            status,
        });
    }
    Ok(BlockTestReport {
        blocks,
        overall_reject: overall,
    })
}

/// Log-determinant via a Cholesky factorization; fails when the matrix is
/// not positive definite.
fn cholesky_log_det(m: &ndarray::Array2<f64>, label: &str) -> Result<f64> {
    let p = m.nrows();
    let mut l = m.clone();
    let mut log_det = 0.0;
    for a in 0..p {
        for b in a..p {
            let mut acc = l[[a, b]];
            for t in 0..a {
                acc -= l[[a, t]] * l[[b, t]];
            }
            if a == b {
                if !acc.is_finite() || acc <= 0.0 {
                    return Err(Error::NotPositiveDefinite(format!(
                        "{label}: pivot {} is {acc}",
                        a + 1
                    )));
                }
                let d = acc.sqrt();
                l[[a, a]] = d;
                log_det += 2.0 * d.ln();
            } else {
                l[[b, a]] = acc / l[[a, a]];
            }
        }
    }
    Ok(log_det)
}

/// Classical Box's M with the Bartlett-style factor φ, as a reference for
/// p below the smallest group size. log-determinants come from symmetric
/// positive definite factorizations of the sample covariances.
pub fn box_m(data: &MultiGroupData, alpha: Probability) -> Result<TestResult> {
    let p = data.p();
    let k = data.k();
    let n_min = data.min_n();
    if p >= n_min {
        return Err(Error::Dimension(format!(
            "Box's M requires p < min group size (p = {p}, smallest n = {n_min}); \
             a group sample covariance would be singular"
        )));
    }
    let n_sizes = data.n_sizes();
    let weights: Vec<f64> = n_sizes.iter().map(|&n| (n - 1) as f64).collect();
    let pooled_df: f64 = weights.iter().sum();

    let covariances: Vec<_> = data
        .groups()
        .iter()
        .map(sample_covariance_oracle)
        .collect::<Result<_>>()?;
    let mut pooled_cov = ndarray::Array2::<f64>::zeros((p, p));
    for (w, cov) in weights.iter().zip(&covariances) {
        pooled_cov.scaled_add(*w, cov);
    }
    pooled_cov /= pooled_df;

    let group_log_dets: Vec<f64> = covariances
        .iter()
        .enumerate()
        .map(|(i, cov)| cholesky_log_det(cov, &format!("group {} covariance", i + 1)))
        .collect::<Result<_>>()?;
    let pooled_log_det = cholesky_log_det(&pooled_cov, "pooled covariance")?;

    let statistic = pooled_df * pooled_log_det
        - weights
            .iter()
            .zip(&group_log_dets)
            .map(|(w, d)| w * d)
            .sum::<f64>();

    let pf = p as f64;
    let kf = k as f64;
    let inv_sum: f64 = weights.iter().map(|w| 1.0 / w).sum();
    let phi = 1.0
        - (2.0 * pf * pf + 3.0 * pf - 1.0) / (6.0 * (pf + 1.0) * (kf - 1.0))
            * (inv_sum - 1.0 / pooled_df);

    let df = DegreesOfFreedom::new((k as u64 - 1) * (p as u64) * (p as u64 + 1) / 2)?;
    let scaled = phi * statistic;
    let p_value_upper = chi2_sf(scaled.max(0.0), df)?.value();
    Ok(TestResult {
        statistic,
        scale_factor: phi,
        scaled_statistic: scaled,
        df: df.get(),
        p_value_upper,
        region: None,
        reject: p_value_upper < alpha.value(),
        group_quadforms: group_log_dets,
        pooled: pooled_log_det,
    })
}

/// Advisory report on the dimension-vs-sample-size growth conditions.
/// Never blocks a test; callers surface `satisfied = false` as a warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionConditionReport {
    pub p: usize,
    pub n_max: usize,
    /// Moment order; must exceed 2.
    pub r: f64,
    pub c: f64,
    /// c · n_max^{3r/(r−2)}, the joint-statistic condition.
    pub threshold: f64,
    pub satisfied: bool,
    /// c · n_max^{r/(r−2)}, the per-group quadratic-form condition.
    pub per_group_threshold: f64,
    pub per_group_satisfied: bool,
}

pub fn dimension_condition(
    p: usize,
    n_max: usize,
    r: f64,
    c: f64,
) -> Result<DimensionConditionReport> {
    if !r.is_finite() || r <= 2.0 {
        return Err(Error::Domain(format!(
            "moment order r must exceed 2, got {r}"
        )));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::Domain(format!("constant c must be positive, got {c}")));
    }
    let nf = n_max as f64;
    let threshold = c * nf.powf(3.0 * r / (r - 2.0));
    let per_group_threshold = c * nf.powf(r / (r - 2.0));
    Ok(DimensionConditionReport {
        p,
        n_max,
        r,
        c,
        threshold,
        satisfied: p as f64 >= threshold,
        per_group_threshold,
        per_group_satisfied: p as f64 >= per_group_threshold,
    })
}
