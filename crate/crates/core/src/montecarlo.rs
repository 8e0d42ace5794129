//! Monte Carlo orchestration: size/power scenarios, the preset experiment
//! grid, and distributional validation of the scaled quadratic form.
//!
//! Replications are independent; each derives its own RNG substream from
//! (master_seed, scenario stream id, replication index), so results do not
//! depend on the worker count or scheduling order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::homtest::{
    block_tests, default_partition, lk_test, BlockPartition, DecisionMode, MultiGroupData,
};
use crate::procsim::{
    ar1_group, fnv1a64, long_run_variance_ar1, sample_group, CovModel, InnovationLaw, SeededRng,
};
use crate::quadform::{quad_form, SelectorVector};
use crate::statmath::{chi2_cdf, ks_distance, DegreesOfFreedom, Probability};

/// 5% asymptotic Kolmogorov–Smirnov critical value is 1.358/√N.
pub const KS_CRITICAL_95_SCALE: f64 = 1.358;

/// Default master seed used by the bundled presets.
pub const DEFAULT_MASTER_SEED: u64 = 42;

/// One group's generator: covariance model plus innovation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub model: CovModel,
    pub law: InnovationLaw,
}

/// How a scenario partitions coordinates, if at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSpec {
    /// Boundaries min(j·(n_min−1), p) derived from the data.
    Auto,
    Boundaries(Vec<usize>),
}

impl PartitionSpec {
    pub fn resolve(&self, p: usize, n_min: usize) -> Result<BlockPartition> {
        match self {
            PartitionSpec::Auto => default_partition(p, n_min),
            PartitionSpec::Boundaries(b) => BlockPartition::from_boundaries(b.clone(), p),
        }
    }
}

fn default_decision_mode() -> DecisionMode {
    DecisionMode::UpperTail
}

/// A complete Monte Carlo experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub n_sizes: Vec<usize>,
    pub p: usize,
    pub groups: Vec<GroupSpec>,
    pub alpha: f64,
    pub replications: u64,
    pub master_seed: u64,
    #[serde(default = "default_decision_mode")]
    pub decision_mode: DecisionMode,
    #[serde(default)]
    pub partition: Option<PartitionSpec>,
}

impl Scenario {
    pub fn k(&self) -> usize {
        self.groups.len()
    }

    fn validate(&self) -> Result<()> {
        if self.groups.len() < 2 {
            return Err(Error::Scenario(format!(
                "`{}` needs at least 2 groups",
                self.name
            )));
        }
        if self.groups.len() != self.n_sizes.len() {
            return Err(Error::Scenario(format!(
                "`{}` has {} groups but {} sample sizes",
                self.name,
                self.groups.len(),
                self.n_sizes.len()
            )));
        }
        if self.n_sizes.iter().any(|&n| n < 2) {
            return Err(Error::Scenario(format!(
                "`{}` has a group with fewer than 2 samples",
                self.name
            )));
        }
        if self.replications == 0 {
            return Err(Error::Scenario(format!(
                "`{}` needs at least 1 replication",
                self.name
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Scenario(format!(
                "`{}` has significance level {} outside (0, 1)",
                self.name, self.alpha
            )));
        }
        Ok(())
    }

    /// True when every group shares one generator (a null-hypothesis design).
    pub fn is_null_design(&self) -> bool {
        self.groups.windows(2).all(|w| w[0] == w[1])
    }

    /// Stream id for substream derivation, stable across runs.
    pub fn stream_id(&self) -> u64 {
        fnv1a64(self.name.as_bytes())
    }
}

/// A Monte Carlo rejection-rate estimate with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rejections: u64,
    pub replications: u64,
    pub rejection_rate: f64,
    pub wilson_ci_95: (f64, f64),
}

impl RateEstimate {
    pub fn from_counts(rejections: u64, replications: u64) -> Self {
        let rate = rejections as f64 / replications as f64;
        RateEstimate {
            rejections,
            replications,
            rejection_rate: rate,
            wilson_ci_95: wilson_interval(rejections, replications),
        }
    }
}

/// Wilson score interval; keeps sensible coverage at rates near 0 and 1.
/// The interval always contains the point estimate, also under rounding.
fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        (center - half).max(0.0).min(phat),
        (center + half).min(1.0).max(phat),
    )
}

/// Run one scenario: `replications` independent draws of the k groups,
/// tested with ρL_k (or the block OR-rule when a partition is set).
/// Deterministic given the master seed, regardless of worker count.
pub fn run_scenario(scenario: &Scenario) -> Result<RateEstimate> {
    scenario.validate()?;
    let seeds = SeededRng::new(scenario.master_seed);
    let stream = scenario.stream_id();
    let alpha = Probability::new(scenario.alpha).map_err(|e| Error::Scenario(e.to_string()))?;
    let partition = scenario
        .partition
        .as_ref()
        .map(|spec| spec.resolve(scenario.p, *scenario.n_sizes.iter().min().unwrap()))
        .transpose()?;
    let selector = SelectorVector::ones(scenario.p);

    let rejections = (0..scenario.replications)
        .into_par_iter()
        .map(|rep| -> Result<u64> {
            let run = || -> Result<bool> {
                let mut rng = seeds.substream(stream, rep);
                let groups = scenario
                    .groups
                    .iter()
                    .zip(&scenario.n_sizes)
                    .map(|(spec, &n)| sample_group(&spec.model, spec.law, n, scenario.p, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let data = MultiGroupData::new(groups)?;
                match &partition {
                    Some(part) => {
                        Ok(block_tests(&data, part, alpha, scenario.decision_mode)?.overall_reject)
                    }
                    None => Ok(lk_test(&data, &selector, alpha, scenario.decision_mode)?.reject),
                }
            };
            run().map(u64::from).map_err(|e| e.in_replication(rep))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    Ok(RateEstimate::from_counts(rejections, scenario.replications))
}

const TABLE1_DIMS: [usize; 5] = [20, 50, 100, 200, 300];
const TABLE1_GROUP_SIZES: [usize; 4] = [10, 20, 50, 100];
const TABLE1_LAWS: [InnovationLaw; 3] = [
    InnovationLaw::Gaussian,
    InnovationLaw::CenteredExponential,
    InnovationLaw::CenteredUniform,
];

pub fn law_label(law: InnovationLaw) -> &'static str {
    match law {
        InnovationLaw::Gaussian => "normal",
        InnovationLaw::CenteredExponential => "exp",
        InnovationLaw::CenteredUniform => "uniform",
    }
}

fn null_groups(law: InnovationLaw) -> Vec<GroupSpec> {
    vec![
        GroupSpec {
            model: CovModel::OmegaJ { j: 0 },
            law,
        };
        3
    ]
}

/// The alternative designs behind the power columns: the Gaussian column
/// separates the three Ω_J structures; the exponential and uniform columns
/// separate compound symmetry, the base-0.40 structure and centered-gamma
/// noise.
fn power_groups(law: InnovationLaw) -> Vec<GroupSpec> {
    match law {
        InnovationLaw::Gaussian => vec![
            GroupSpec {
                model: CovModel::OmegaJ { j: 0 },
                law,
            },
            GroupSpec {
                model: CovModel::OmegaJ { j: 1 },
                law,
            },
            GroupSpec {
                model: CovModel::OmegaJ { j: 2 },
                law,
            },
        ],
        _ => vec![
            GroupSpec {
                model: CovModel::CompoundSymmetry { k: 1.0, phi: 0.70 },
                law,
            },
            GroupSpec {
                model: CovModel::Ar1 { base: 0.40 },
                law,
            },
            GroupSpec {
                model: CovModel::CenteredGammaIid,
                law,
            },
        ],
    }
}

/// The bundled experiment presets: the full size/power grid
/// (p × n × law × {size, power}) plus the two worked examples on the
/// base-0.40 structure at p = 350 (whole-vector test at n_i = 100, and the
/// four-block test at n_i = 101), each under Gaussian and exponential
/// innovations.
pub fn scenario_presets() -> Vec<Scenario> {
    let mut presets = Vec::new();
    for &p in &TABLE1_DIMS {
        for &n in &TABLE1_GROUP_SIZES {
            for &law in &TABLE1_LAWS {
                presets.push(Scenario {
                    name: format!("table1-size-{}-p{p}-n{n}", law_label(law)),
                    n_sizes: vec![n; 3],
                    p,
                    groups: null_groups(law),
                    alpha: 0.05,
                    replications: 1000,
                    master_seed: DEFAULT_MASTER_SEED,
                    decision_mode: DecisionMode::UpperTail,
                    partition: None,
                });
                presets.push(Scenario {
                    name: format!("table1-power-{}-p{p}-n{n}", law_label(law)),
                    n_sizes: vec![n; 3],
                    p,
                    groups: power_groups(law),
                    alpha: 0.05,
                    replications: 1000,
                    master_seed: DEFAULT_MASTER_SEED,
                    decision_mode: DecisionMode::UpperTail,
                    partition: None,
                });
            }
        }
    }
    for law in [InnovationLaw::Gaussian, InnovationLaw::CenteredExponential] {
        presets.push(Scenario {
            name: format!("example1-{}", example_law_label(law)),
            n_sizes: vec![100; 3],
            p: 350,
            groups: vec![
                GroupSpec {
                    model: CovModel::Ar1 { base: 0.40 },
                    law,
                };
                3
            ],
            alpha: 0.05,
            replications: 1000,
            master_seed: DEFAULT_MASTER_SEED,
            decision_mode: DecisionMode::TwoSidedRegion,
            partition: None,
        });
        presets.push(Scenario {
            name: format!("example2-{}", example_law_label(law)),
            n_sizes: vec![101; 3],
            p: 350,
            groups: vec![
                GroupSpec {
                    model: CovModel::Ar1 { base: 0.40 },
                    law,
                };
                3
            ],
            alpha: 0.05,
            replications: 1000,
            master_seed: DEFAULT_MASTER_SEED,
            decision_mode: DecisionMode::TwoSidedRegion,
            partition: Some(PartitionSpec::Auto),
        });
    }
    presets
}

fn example_law_label(law: InnovationLaw) -> &'static str {
    match law {
        InnovationLaw::Gaussian => "gaussian",
        InnovationLaw::CenteredExponential => "exponential",
        InnovationLaw::CenteredUniform => "uniform",
    }
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<Scenario> {
    scenario_presets().into_iter().find(|s| s.name == name)
}

/// Result of checking the scaled quadratic form (n−1)·Ŝ/(p·σ²) against its
/// asymptotic χ²_{n−1} law with a KS distance at the 5% critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionCheck {
    pub n: usize,
    pub p: usize,
    pub phi: f64,
    pub law: InnovationLaw,
    pub replications: u64,
    pub ks_distance: f64,
    pub critical_value: f64,
    pub pass: bool,
}

/// Simulate `replications` values of (n−1)·𝟙S𝟙ᵀ/(p·σ²) from AR(1) groups
/// and measure the KS distance to the χ²_{n−1} CDF. σ² is the long-run
/// variance (1+φ)/(1−φ).
pub fn theorem31_check(
    n: usize,
    p: usize,
    phi: f64,
    law: InnovationLaw,
    replications: u64,
    seeds: &SeededRng,
    stream_id: u64,
) -> Result<DistributionCheck> {
    if n < 3 {
        return Err(Error::Dimension(format!(
            "distribution check needs at least 3 samples per group, got {n}"
        )));
    }
    if replications == 0 {
        return Err(Error::Scenario("need at least 1 replication".to_string()));
    }
    let sigma2 = long_run_variance_ar1(phi)?;
    let selector = SelectorVector::ones(p);
    let mut stats: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let run = || -> Result<f64> {
                let mut rng = seeds.substream(stream_id, rep);
                let group = ar1_group(phi, law, n, p, &mut rng)?;
                let qf = quad_form(&group, &selector)?.value();
                Ok((n - 1) as f64 * qf / (p as f64 * sigma2))
            };
            run().map_err(|e| e.in_replication(rep))
        })
        .collect::<Result<_>>()?;
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let df = DegreesOfFreedom::new((n - 1) as u64)?;
    let ks = ks_distance(&stats, |x| {
        chi2_cdf(x.max(0.0), df)
            .expect("nonnegative statistic")
            .value()
    })?;
    let critical = KS_CRITICAL_95_SCALE / (replications as f64).sqrt();
    Ok(DistributionCheck {
        n,
        p,
        phi,
        law,
        replications,
        ks_distance: ks,
        critical_value: critical,
        pass: ks < critical,
    })
}

/// One row of the size/power table: rates by innovation law column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizePowerRow {
    pub p: usize,
    pub n: usize,
    /// Columns: normal, exp, uniform.
    pub size: [Option<f64>; 3],
    pub power: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizePowerTable {
    pub rows: Vec<SizePowerRow>,
}

fn law_column(law: InnovationLaw) -> usize {
    match law {
        InnovationLaw::Gaussian => 0,
        InnovationLaw::CenteredExponential => 1,
        InnovationLaw::CenteredUniform => 2,
    }
}

/// Arrange scenario results into the size/power grid layout: one row per
/// (p, n), size and power cells split by the innovation-law column.
pub fn size_power_table(entries: &[(Scenario, RateEstimate)]) -> SizePowerTable {
    let mut rows: Vec<SizePowerRow> = Vec::new();
    for (scenario, rate) in entries {
        let p = scenario.p;
        let n = scenario.n_sizes.first().copied().unwrap_or(0);
        let col = law_column(scenario.groups.first().map(|g| g.law).unwrap_or(InnovationLaw::Gaussian));
        let row = match rows.iter_mut().find(|r| r.p == p && r.n == n) {
            Some(r) => r,
            None => {
                rows.push(SizePowerRow {
                    p,
                    n,
                    size: [None; 3],
                    power: [None; 3],
                });
                rows.last_mut().unwrap()
            }
        };
        if scenario.is_null_design() {
            row.size[col] = Some(rate.rejection_rate);
        } else {
            row.power[col] = Some(rate.rejection_rate);
        }
    }
    rows.sort_by_key(|r| (r.p, r.n));
    SizePowerTable { rows }
}

impl fmt::Display for SizePowerTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn cell(v: Option<f64>) -> String {
            match v {
                Some(x) => format!("{x:7.4}"),
                None => format!("{:>7}", "-"),
            }
        }
        writeln!(
            f,
            "{:>5} {:>5} | {:^23} | {:^23}",
            "p", "n", "empirical size", "power"
        )?;
        writeln!(
            f,
            "{:>5} {:>5} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
            "", "", "normal", "exp", "uniform", "normal", "exp", "uniform"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>5} {:>5} | {} {} {} | {} {} {}",
                r.p,
                r.n,
                cell(r.size[0]),
                cell(r.size[1]),
                cell(r.size[2]),
                cell(r.power[0]),
                cell(r.power[1]),
                cell(r.power[2]),
            )?;
        }
        Ok(())
    }
}
