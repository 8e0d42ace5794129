//! Generators for the stationary processes and covariance structures used by
//! the Monte Carlo experiments, with reproducible counter-based substreams.
//!
//! The alternating-sign geometric structure Ω_J (entries
//! (−1)^{a+b}·(0.2(J+2))^{|a−b|}) is realized as an AR(1) process with
//! coefficient φ = −0.2(J+2) and innovations scaled by √(1−φ²), which gives
//! exactly that covariance in population. Gaussian paths start from the
//! stationary law; other innovation laws rely on a long burn-in.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadform::GroupSample;

/// Burn-in used for AR(1) paths whose innovations are not Gaussian; at
/// |φ| ≤ 0.8 the initialization bias decays below any representable level.
pub const DEFAULT_BURNIN: usize = 1000;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Mean-zero, variance-one innovation laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationLaw {
    /// N(0, 1)
    Gaussian,
    /// Exp(1) − 1
    CenteredExponential,
    /// Uniform(−√3, √3)
    CenteredUniform,
}

impl InnovationLaw {
    pub fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            InnovationLaw::Gaussian => rng.sample(StandardNormal),
            InnovationLaw::CenteredExponential => rng.sample::<f64, _>(Exp1) - 1.0,
            InnovationLaw::CenteredUniform => (rng.random::<f64>() - 0.5) * 2.0 * SQRT_3,
        }
    }
}

/// One standardized variate of the given law.
pub fn draw_innovation(law: InnovationLaw, rng: &mut impl Rng) -> f64 {
    law.draw(rng)
}

/// Parametric covariance / process structures for group generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovModel {
    /// Alternating-sign geometric covariance with base 0.2·(J+2), J ∈ {0,1,2}.
    OmegaJ { j: u8 },
    /// Alternating-sign geometric covariance with an arbitrary base in (0, 1).
    Ar1 { base: f64 },
    /// Compound symmetry K·I + φ·J (J the all-ones matrix).
    CompoundSymmetry { k: f64, phi: f64 },
    /// i.i.d. centered Γ(1,1) = Exp(1) − 1 coordinates; covariance I.
    /// The coordinate law is fixed by the model itself.
    CenteredGammaIid,
}

impl CovModel {
    /// Population covariance matrix of one sample vector.
    pub fn covariance_matrix(&self, p: usize) -> Result<Array2<f64>> {
        match *self {
            CovModel::OmegaJ { j } => omega_matrix(j, p),
            CovModel::Ar1 { base } => {
                check_ar1_base(base)?;
                Ok(ar1_matrix(base, p))
            }
            CovModel::CompoundSymmetry { k, phi } => {
                check_cs_params(k, phi)?;
                Ok(Array2::from_shape_fn((p, p), |(a, b)| {
                    if a == b {
                        k + phi
                    } else {
                        phi
                    }
                }))
            }
            CovModel::CenteredGammaIid => Ok(Array2::eye(p)),
        }
    }
}

/// Master seed plus the (stream, replication) → substream derivation.
/// Identical triples give identical sequences regardless of thread schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    master_seed: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64) -> Self {
        SeededRng { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Independent generator for (master_seed, stream_id, replication).
    pub fn substream(&self, stream_id: u64, replication: u64) -> ChaCha12Rng {
        let mut state = self.master_seed;
        state = mix64(state ^ mix64(stream_id));
        state = mix64(state ^ mix64(replication.wrapping_mul(0xd134_2543_de82_ef95)));
        let mut seed = [0u8; 32];
        let mut s = state;
        for chunk in seed.chunks_exact_mut(8) {
            s = mix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash, used to derive stream ids from scenario names.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn check_ar1_phi(phi: f64) -> Result<()> {
    if !phi.is_finite() || phi.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "AR(1) coefficient must satisfy |phi| < 1, got {phi}"
        )));
    }
    Ok(())
}

fn check_ar1_base(base: f64) -> Result<()> {
    if !base.is_finite() || base <= 0.0 || base >= 1.0 {
        return Err(Error::Domain(format!(
            "AR(1) covariance base must lie in (0, 1), got {base}"
        )));
    }
    Ok(())
}

fn check_cs_params(k: f64, phi: f64) -> Result<()> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!(
            "compound-symmetry variance K must be positive, got {k}"
        )));
    }
    if !phi.is_finite() || phi < 0.0 {
        return Err(Error::Domain(format!(
            "compound-symmetry correlation phi must be nonnegative, got {phi}"
        )));
    }
    Ok(())
}

/// One stationary AR(1) path X_j = φ·X_{j−1} + √(1−φ²)·ε_j of length `p`,
/// after discarding `burnin` steps. Unit marginal variance; lag-h
/// autocovariance φ^h (exact for the Gaussian start, approached after
/// burn-in otherwise).
pub fn ar1_path(
    phi: f64,
    law: InnovationLaw,
    p: usize,
    burnin: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    check_ar1_phi(phi)?;
    let scale = (1.0 - phi * phi).sqrt();
    // Gaussian N(0,1) start is exactly stationary; other laws have the
    // right mean and variance and mix geometrically over the burn-in.
    let mut x = match law {
        InnovationLaw::Gaussian => rng.sample(StandardNormal),
        _ => law.draw(rng),
    };
    for _ in 0..burnin {
        x = phi * x + scale * law.draw(rng);
    }
    let mut path = Vec::with_capacity(p);
    for _ in 0..p {
        x = phi * x + scale * law.draw(rng);
        path.push(x);
    }
    Ok(path)
}

/// A group of n independent AR(1) paths of length p as rows.
/// Burn-in is 0 for Gaussian innovations and `DEFAULT_BURNIN` otherwise.
pub fn ar1_group(
    phi: f64,
    law: InnovationLaw,
    n: usize,
    p: usize,
    rng: &mut impl Rng,
) -> Result<GroupSample> {
    let burnin = match law {
        InnovationLaw::Gaussian => 0,
        _ => DEFAULT_BURNIN,
    };
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        data.extend(ar1_path(phi, law, p, burnin, rng)?);
    }
    GroupSample::new(n, p, data)
}

/// AR(1) coefficient that realizes Ω_J.
pub fn omega_phi(j: u8) -> f64 {
    -(0.2 * (f64::from(j) + 2.0))
}

/// Alternating-sign geometric matrix with entries (−base)^{|a−b|}.
pub fn ar1_matrix(base: f64, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((p, p), |(a, b)| {
        (-base).powi((a as i64 - b as i64).unsigned_abs() as i32)
    })
}

/// The Ω_J matrix: entries (−1)^{a+b}·(0.2(J+2))^{|a−b|}, J ∈ {0, 1, 2}.
pub fn omega_matrix(j: u8, p: usize) -> Result<Array2<f64>> {
    if j > 2 {
        return Err(Error::Domain(format!(
            "omega structure index must be 0, 1 or 2, got {j}"
        )));
    }
    if p == 0 {
        return Err(Error::Dimension("dimension p must be positive".to_string()));
    }
    Ok(ar1_matrix(-omega_phi(j), p))
}

/// Compound-symmetry group: each row is √φ·z₀·𝟙 + √K·z with z₀ and the
/// coordinates of z independent draws from `law`. Row covariance is
/// K·I + φ·J for every innovation law; no matrix square root needed.
pub fn cs_sample(
    k: f64,
    phi_cs: f64,
    n: usize,
    p: usize,
    law: InnovationLaw,
    rng: &mut impl Rng,
) -> Result<GroupSample> {
    check_cs_params(k, phi_cs)?;
    let shared = phi_cs.sqrt();
    let own = k.sqrt();
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let z0 = law.draw(rng);
        for _ in 0..p {
            data.push(shared * z0 + own * law.draw(rng));
        }
    }
    GroupSample::new(n, p, data)
}

/// i.i.d. centered Γ(1,1) entries (= Exp(1) − 1); covariance is the identity.
pub fn gamma_iid_sample(n: usize, p: usize, rng: &mut impl Rng) -> Result<GroupSample> {
    let data: Vec<f64> = (0..n * p)
        .map(|_| rng.sample::<f64, _>(Exp1) - 1.0)
        .collect();
    GroupSample::new(n, p, data)
}

/// Long-run variance Σ_{h∈Z} φ^{|h|} = (1+φ)/(1−φ) of a unit-marginal-
/// variance AR(1) process.
pub fn long_run_variance_ar1(phi: f64) -> Result<f64> {
    check_ar1_phi(phi)?;
    Ok((1.0 + phi) / (1.0 - phi))
}

/// n i.i.d. rows whose population covariance equals the model's matrix.
pub fn sample_group(
    model: &CovModel,
    law: InnovationLaw,
    n: usize,
    p: usize,
    rng: &mut impl Rng,
) -> Result<GroupSample> {
    match *model {
        CovModel::OmegaJ { j } => {
            if j > 2 {
                return Err(Error::Domain(format!(
                    "omega structure index must be 0, 1 or 2, got {j}"
                )));
            }
            ar1_group(omega_phi(j), law, n, p, rng)
        }
        CovModel::Ar1 { base } => {
            check_ar1_base(base)?;
            ar1_group(-base, law, n, p, rng)
        }
        CovModel::CompoundSymmetry { k, phi } => cs_sample(k, phi, n, p, law, rng),
        CovModel::CenteredGammaIid => gamma_iid_sample(n, p, rng),
    }
}
