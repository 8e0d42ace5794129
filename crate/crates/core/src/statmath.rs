//! Chi-square distribution kernel and the Kolmogorov–Smirnov sup distance.
//!
//! The CDF/survival pair is computed through the regularized incomplete gamma
//! function with the usual series / continued-fraction split, so both tails
//! keep full precision (the survival function is never formed as `1 - cdf`
//! when the result would underflow). Quantiles are obtained by bracketed
//! bisection on the CDF; they are not on any hot path.

use crate::error::{Error, Result};

/// A probability, guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!(
                "probability must lie in [0, 1], got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Degrees of freedom of a chi-square distribution; at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreesOfFreedom(u64);

impl DegreesOfFreedom {
    pub fn new(df: u64) -> Result<Self> {
        if df >= 1 {
            Ok(DegreesOfFreedom(df))
        } else {
            Err(Error::Domain(
                "degrees of freedom must be at least 1".to_string(),
            ))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

// Lanczos approximation, g = 7, 9 coefficients. Relative error is a few
// ulp over the positive axis, which the oracle tests pin down.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "ln_gamma requires a positive argument, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 800;

/// Regularized lower incomplete gamma P(a, z) by its power series.
/// Converges quickly for z < a + 1.
fn lower_gamma_series(a: f64, z: f64) -> f64 {
    let mut denom = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= z / denom;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (a * z.ln() - z - ln_gamma_unchecked(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, z) by a modified Lentz
/// continued fraction. Converges quickly for z >= a + 1.
fn upper_gamma_continued_fraction(a: f64, z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    h * (a * z.ln() - z - ln_gamma_unchecked(a)).exp()
}

fn check_chi2_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "chi-square distribution is supported on [0, inf), got {x}"
        )));
    }
    Ok(())
}

/// Chi-square CDF: P(df/2, x/2).
pub fn chi2_cdf(x: f64, df: DegreesOfFreedom) -> Result<Probability> {
    check_chi2_arg(x)?;
    let a = df.as_f64() / 2.0;
    let z = x / 2.0;
    let p = if z == 0.0 {
        0.0
    } else if z < a + 1.0 {
        lower_gamma_series(a, z)
    } else {
        1.0 - upper_gamma_continued_fraction(a, z)
    };
    Probability::new(p.clamp(0.0, 1.0))
}

/// Chi-square survival function 1 − CDF, accurate deep into the upper tail.
pub fn chi2_sf(x: f64, df: DegreesOfFreedom) -> Result<Probability> {
    check_chi2_arg(x)?;
    let a = df.as_f64() / 2.0;
    let z = x / 2.0;
    let q = if z == 0.0 {
        1.0
    } else if z < a + 1.0 {
        1.0 - lower_gamma_series(a, z)
    } else {
        upper_gamma_continued_fraction(a, z)
    };
    Probability::new(q.clamp(0.0, 1.0))
}

/// Chi-square quantile: the `x` with `chi2_cdf(x, df) = q`, for `q` strictly
/// inside (0, 1). Bracketed bisection on the CDF.
pub fn chi2_quantile(q: Probability, df: DegreesOfFreedom) -> Result<f64> {
    let qv = q.value();
    if qv <= 0.0 || qv >= 1.0 {
        return Err(Error::Domain(format!(
            "quantile is defined for probabilities strictly inside (0, 1), got {qv}"
        )));
    }
    let dff = df.as_f64();
    let mut hi = dff + 20.0 * (2.0 * dff).sqrt() + 20.0;
    while chi2_cdf(hi, df)?.value() < qv {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!(
                "quantile bracket failed to enclose q = {qv}"
            )));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // f64 resolution exhausted
        }
        if chi2_cdf(mid, df)?.value() < qv {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-sided Kolmogorov–Smirnov distance between the empirical CDF of
/// `sorted_samples` (ascending) and a reference CDF:
/// D = max_i max(i/n − F(x_i), F(x_i) − (i−1)/n).
pub fn ks_distance<F>(sorted_samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if sorted_samples.is_empty() {
        return Err(Error::Domain(
            "KS distance requires at least one sample".to_string(),
        ));
    }
    if sorted_samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain(
            "KS distance requires samples sorted in ascending order".to_string(),
        ));
    }
    let n = sorted_samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted_samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle values keep their full digits
mod tests {
    use super::*;

    fn df(n: u64) -> DegreesOfFreedom {
        DegreesOfFreedom::new(n).unwrap()
    }

    fn prob(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    // High-precision reference values (40-digit arithmetic), frozen.
    const LN_GAMMA_ORACLE: [(f64, f64); 12] = [
        (0.5, 0.5723649429247000870717),
        (1.0, 0.0),
        (1.5, -0.1207822376352452223455),
        (2.0, 0.0),
        (2.5, 0.2846828704729191596325),
        (5.0, 3.178053830347945619647),
        (10.0, 12.80182748008146961121),
        (30.5, 72.95347118416940832384),
        (100.0, 359.134205369575398776),
        (1234.5, 7550.55090107789489573),
        (1e5, 1051287.708973656894901),
        (1e6, 12815504.56914761165998),
    ];

    #[test]
    fn ln_gamma_matches_oracle_grid() {
        for &(x, want) in &LN_GAMMA_ORACLE {
            let got = ln_gamma(x).unwrap();
            let tol = 1e-12f64.max(want.abs() * 4e-15);
            assert!(
                (got - want).abs() <= tol,
                "ln_gamma({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn ln_gamma_closed_forms() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-13);
        assert!((ln_gamma(5.0).unwrap() - 24.0f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5).unwrap() - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_gamma_rejects_nonpositive() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-3.0).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn chi2_cdf_at_zero_is_zero() {
        for d in 1..=10 {
            assert_eq!(chi2_cdf(0.0, df(d)).unwrap().value(), 0.0);
        }
    }

    #[test]
    fn chi2_cdf_df2_closed_form() {
        // For df = 2 the CDF is exactly 1 - exp(-x/2).
        let d = df(2);
        let mut x = 0.0f64;
        while x <= 200.0 {
            let want = 1.0 - (-x / 2.0).exp();
            let got = chi2_cdf(x, d).unwrap().value();
            assert!(
                (got - want).abs() <= 1e-12,
                "cdf({x}, 2) = {got}, want {want}"
            );
            x += 0.25;
        }
        assert!((chi2_cdf(7.3778, d).unwrap().value() - 0.975).abs() < 1e-4);
    }

    // Simpson quadrature of the chi2_3 density with the substitution
    // x = t^2, which removes the sqrt kink at the origin. Independent of
    // the incomplete-gamma path.
    fn chi2_3_cdf_quadrature(x: f64) -> f64 {
        let upper = x.sqrt();
        let m = 20_000; // even
        let h = upper / m as f64;
        let integrand =
            |t: f64| 2.0 * t * t * (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = integrand(0.0) + integrand(upper);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn chi2_cdf_df3_matches_quadrature_oracle() {
        let oracle = chi2_3_cdf_quadrature(3.0);
        // frozen from the oracle (and cross-checked at 40-digit precision)
        assert!((oracle - 0.6083748237289110).abs() < 1e-10);
        let got = chi2_cdf(3.0, df(3)).unwrap().value();
        assert!((got - oracle).abs() <= 1e-8, "got {got}, oracle {oracle}");
    }

    #[test]
    fn chi2_cdf_df7_matches_frozen_oracle() {
        let got = chi2_cdf(2.5, df(7)).unwrap().value();
        assert!((got - 0.07290293498652623).abs() < 1e-12);
    }

    #[test]
    fn chi2_cdf_monotone_on_grids() {
        for d in 1..=10 {
            let d = df(d);
            let mut prev = -1.0;
            for i in 0..1000 {
                let x = i as f64 * 0.1;
                let v = chi2_cdf(x, d).unwrap().value();
                assert!(v >= prev, "cdf not monotone at x = {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn chi2_cdf_tends_to_one() {
        for d in 1..=10 {
            assert!(chi2_cdf(1e4, df(d)).unwrap().value() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn chi2_cdf_rejects_negative() {
        assert!(chi2_cdf(-0.5, df(3)).is_err());
    }

    #[test]
    fn chi2_sf_examples() {
        let d = df(2);
        assert_eq!(chi2_sf(0.0, d).unwrap().value(), 1.0);
        // Upper-tail values for df = 2 are exactly exp(-x/2).
        let got = chi2_sf(15.1066, d).unwrap().value();
        assert!((got - 5.24376825217684e-4).abs() < 5e-5);
        let far = chi2_sf(39.7810, d).unwrap().value();
        assert!((far - 2.299670465835386e-9).abs() < 1e-14);
        assert!(far < 1e-8);
    }

    #[test]
    fn chi2_sf_cdf_complement() {
        for d in [1u64, 2, 3, 5, 10] {
            let d = df(d);
            let mut x = 0.0;
            while x <= 50.0 {
                let s = chi2_sf(x, d).unwrap().value() + chi2_cdf(x, d).unwrap().value();
                assert!((s - 1.0).abs() <= 1e-12, "sum {s} at x = {x}");
                x += 0.375;
            }
        }
    }

    #[test]
    fn chi2_quantile_closed_forms() {
        let d2 = df(2);
        let q975 = chi2_quantile(prob(0.975), d2).unwrap();
        assert!((q975 - 7.3777589082278725).abs() < 1e-4);
        let q025 = chi2_quantile(prob(0.025), d2).unwrap();
        assert!((q025 - 0.050635615968579795).abs() < 1e-4);
        // df = 1: the square of the standard normal quantile
        let q95 = chi2_quantile(prob(0.95), df(1)).unwrap();
        assert!((q95 - 3.8414588206941254).abs() < 1e-6);
    }

    #[test]
    fn chi2_quantile_roundtrip() {
        // The roundtrip can only hold where the CDF value itself keeps
        // enough f64 resolution; once cdf(x) is within ~1e-9 of 1, a 1-ulp
        // step in q moves x by more than 1e-7 relative, for any inverse.
        for d in [1u64, 2, 3, 7, 10] {
            let d = df(d);
            let mut x = 0.01;
            while x <= 100.0 {
                let p = chi2_cdf(x, d).unwrap();
                if p.value() > 0.0 && p.value() < 1.0 - 1e-9 {
                    let back = chi2_quantile(p, d).unwrap();
                    assert!(
                        (back - x).abs() <= 1e-7 * x.max(1.0),
                        "roundtrip df {:?} x {x} -> {back}",
                        d
                    );
                }
                x *= 1.7;
            }
        }
    }

    #[test]
    fn chi2_quantile_quality() {
        // |cdf(quantile(q)) - q| <= 1e-9 over a probability grid
        for d in [1u64, 2, 5, 10, 50] {
            let d = df(d);
            for i in 1..100 {
                let q = i as f64 / 100.0;
                let x = chi2_quantile(prob(q), d).unwrap();
                let back = chi2_cdf(x, d).unwrap().value();
                assert!((back - q).abs() <= 1e-9, "df {:?} q {q} -> {back}", d);
            }
        }
    }

    #[test]
    fn chi2_quantile_rejects_endpoints() {
        assert!(chi2_quantile(prob(0.0), df(2)).is_err());
        assert!(chi2_quantile(prob(1.0), df(2)).is_err());
    }

    #[test]
    fn ks_distance_at_quantile_midpoints() {
        // samples placed exactly at the (i - 0.5)/n quantiles of U(0,1)
        let n = 10;
        let samples: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let d = ks_distance(&samples, |x| x).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_single_median() {
        let d = ks_distance(&[0.5], |x| x).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_three_point_enumeration() {
        // candidates: i/n - F(x_i) and F(x_i) - (i-1)/n for the six gaps
        let d = ks_distance(&[0.1, 0.5, 0.9], |x| x).unwrap();
        assert!((d - 7.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_rejects_bad_input() {
        assert!(ks_distance(&[], |x| x).is_err());
        assert!(ks_distance(&[0.3, 0.1], |x| x).is_err());
    }

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.1).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert_eq!(Probability::new(1.0).unwrap().value(), 1.0);
    }

    #[test]
    fn degrees_of_freedom_at_least_one() {
        assert!(DegreesOfFreedom::new(0).is_err());
        assert_eq!(DegreesOfFreedom::new(3).unwrap().get(), 3);
    }
}
