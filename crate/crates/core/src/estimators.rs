//! Distribution function estimators: the EDF, Szasz, Bernstein, Gaussian
//! kernel and half-line Hermite estimators behind one fitted type.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::models::TrueDistribution;
use crate::special_fn::{
    hermite_functions_into, hermite_integrals_into, normal_cdf, poisson_pmf_real, reg_incomplete_beta,
    reg_lower_gamma,
};

/// Observations sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    /// Sorts the values; rejects empty input and non-finite values.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("a sample needs at least one observation");
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return domain(format!("sample values must be finite, got {bad}"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Number of observations `≤ x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    /// Empirical distribution function at `x`.
    pub fn edf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }
}

/// Estimator family without its smoothing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Edf,
    Szasz,
    Bernstein,
    Kernel,
    HermiteHalf,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Edf => "edf",
            EstimatorKind::Szasz => "szasz",
            EstimatorKind::Bernstein => "bernstein",
            EstimatorKind::Kernel => "kernel",
            EstimatorKind::HermiteHalf => "hermite_half",
        }
    }
}

/// Serializable estimator description, e.g. `{"kind":"szasz","m":50}` or
/// `{"kind":"hermite_half","N":20,"standardize":true}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Edf,
    Szasz {
        m: u64,
    },
    Bernstein {
        m: u64,
    },
    Kernel {
        h: f64,
    },
    HermiteHalf {
        #[serde(rename = "N")]
        order: usize,
        #[serde(default)]
        standardize: bool,
        /// Scale for standardization; defaults to the model's standard deviation.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default)]
        clip: bool,
    },
}

impl EstimatorSpec {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            EstimatorSpec::Edf => EstimatorKind::Edf,
            EstimatorSpec::Szasz { .. } => EstimatorKind::Szasz,
            EstimatorSpec::Bernstein { .. } => EstimatorKind::Bernstein,
            EstimatorSpec::Kernel { .. } => EstimatorKind::Kernel,
            EstimatorSpec::HermiteHalf { .. } => EstimatorKind::HermiteHalf,
        }
    }

    /// Fits the described estimator. `truth` supplies the standard deviation
    /// for standardized Hermite fits that give no explicit `sigma`.
    pub fn fit(&self, sample: &Sample, truth: Option<&TrueDistribution>) -> Result<FittedEstimator> {
        match *self {
            EstimatorSpec::Edf => Ok(FittedEstimator::edf(sample)),
            EstimatorSpec::Szasz { m } => FittedEstimator::szasz(sample, m),
            EstimatorSpec::Bernstein { m } => FittedEstimator::bernstein(sample, m),
            EstimatorSpec::Kernel { h } => FittedEstimator::kernel(sample, h),
            EstimatorSpec::HermiteHalf { order, standardize, sigma, clip } => {
                let fit = if standardize {
                    let sigma = match (sigma, truth) {
                        (Some(s), _) => s,
                        (None, Some(dist)) => dist.std_dev(),
                        (None, None) => return domain("standardized Hermite fit needs sigma or a model"),
                    };
                    FittedEstimator::hermite_half_standardized(sample, order, sigma)?
                } else {
                    FittedEstimator::hermite_half(sample, order)?
                };
                Ok(fit.with_clip(clip))
            }
        }
    }
}

/// Anything that yields a CDF estimate at a point; lets ISE computations take
/// fitted estimators and test oracles alike.
pub trait CdfEstimate {
    fn cdf_at(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> CdfEstimate for F {
    fn cdf_at(&self, x: f64) -> f64 {
        self(x)
    }
}

impl CdfEstimate for FittedEstimator {
    fn cdf_at(&self, x: f64) -> f64 {
        self.evaluate(x).unwrap_or(0.0)
    }
}

/// A fitted estimator; immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedEstimator {
    Edf {
        sample: Sample,
    },
    Szasz {
        sample: Sample,
        m: u64,
        /// `max(1, ⌈m X_i⌉)` per observation, ascending.
        ceilings: Vec<u64>,
        /// Distinct ceilings with multiplicities.
        groups: Vec<(u64, usize)>,
    },
    Bernstein {
        sample: Sample,
        m: u64,
        /// `⌈m X_i⌉` per observation, grouped with multiplicities.
        groups: Vec<(u64, usize)>,
    },
    Kernel {
        sample: Sample,
        h: f64,
    },
    HermiteHalf {
        sample: Sample,
        /// `â_0, …, â_N` of the (possibly rescaled) observations.
        coefficients: Vec<f64>,
        /// Observations and evaluation points are divided by this factor.
        scale: f64,
        clip: bool,
    },
}

/// Smallest integer `k ≥ 0` with `x ≤ k/m` (quotient as computed in floating
/// point), i.e. the first grid index at which the EDF counts `x`. Plain
/// `⌈m x⌉` can miss by one when `m x` rounds across an integer.
pub(crate) fn grid_ceiling(x: f64, m: u64) -> u64 {
    let mf = m as f64;
    let mut k = (mf * x).ceil().max(0.0) as u64;
    while k > 0 && x <= (k - 1) as f64 / mf {
        k -= 1;
    }
    while x > k as f64 / mf {
        k += 1;
    }
    k
}

fn group_sorted(values: impl Iterator<Item = u64>) -> Vec<(u64, usize)> {
    let mut groups: Vec<(u64, usize)> = Vec::new();
    for v in values {
        match groups.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => groups.push((v, 1)),
        }
    }
    groups
}

fn require_non_negative(sample: &Sample, what: &str) -> Result<()> {
    if sample.min() < 0.0 {
        return domain(format!("{what} needs non-negative observations, got {}", sample.min()));
    }
    Ok(())
}

const QUANTILE_X_MAX: f64 = 1e6;

impl FittedEstimator {
    pub fn edf(sample: &Sample) -> Self {
        FittedEstimator::Edf { sample: sample.clone() }
    }

    pub fn szasz(sample: &Sample, m: u64) -> Result<Self> {
        if m == 0 {
            return domain("Szasz order m must be at least 1");
        }
        require_non_negative(sample, "the Szasz estimator")?;
        let ceilings: Vec<u64> = sample.values().iter().map(|&x| grid_ceiling(x, m).max(1)).collect();
        let groups = group_sorted(ceilings.iter().copied());
        Ok(FittedEstimator::Szasz { sample: sample.clone(), m, ceilings, groups })
    }

    pub fn bernstein(sample: &Sample, m: u64) -> Result<Self> {
        if m == 0 {
            return domain("Bernstein order m must be at least 1");
        }
        if sample.min() < 0.0 || sample.max() > 1.0 {
            return domain("the Bernstein estimator needs observations in [0, 1]");
        }
        let groups = group_sorted(sample.values().iter().map(|&x| grid_ceiling(x, m).min(m)));
        Ok(FittedEstimator::Bernstein { sample: sample.clone(), m, groups })
    }

    pub fn kernel(sample: &Sample, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return domain(format!("kernel bandwidth must be positive, got {h}"));
        }
        Ok(FittedEstimator::Kernel { sample: sample.clone(), h })
    }

    pub fn hermite_half(sample: &Sample, order: usize) -> Result<Self> {
        Self::hermite_scaled(sample, order, 1.0)
    }

    /// Half-line Hermite estimator on the rescaled data `X_i / sigma`,
    /// evaluated at `x / sigma`. Experimental.
    pub fn hermite_half_standardized(sample: &Sample, order: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("standardization scale must be positive, got {sigma}"));
        }
        Self::hermite_scaled(sample, order, sigma)
    }

    fn hermite_scaled(sample: &Sample, order: usize, scale: f64) -> Result<Self> {
        require_non_negative(sample, "the half-line Hermite estimator")?;
        let mut coefficients = vec![0.0; order + 1];
        let mut basis = vec![0.0; order + 1];
        for &x in sample.values() {
            hermite_functions_into(x / scale, &mut basis);
            for (a, h) in coefficients.iter_mut().zip(&basis) {
                *a += h;
            }
        }
        let n = sample.len() as f64;
        coefficients.iter_mut().for_each(|a| *a /= n);
        Ok(FittedEstimator::HermiteHalf { sample: sample.clone(), coefficients, scale, clip: false })
    }

    /// Toggles clipping of Hermite output to `[0, 1]`; other kinds are unchanged.
    pub fn with_clip(mut self, on: bool) -> Self {
        if let FittedEstimator::HermiteHalf { clip, .. } = &mut self {
            *clip = on;
        }
        self
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            FittedEstimator::Edf { .. } => EstimatorKind::Edf,
            FittedEstimator::Szasz { .. } => EstimatorKind::Szasz,
            FittedEstimator::Bernstein { .. } => EstimatorKind::Bernstein,
            FittedEstimator::Kernel { .. } => EstimatorKind::Kernel,
            FittedEstimator::HermiteHalf { .. } => EstimatorKind::HermiteHalf,
        }
    }

    pub fn sample(&self) -> &Sample {
        match self {
            FittedEstimator::Edf { sample }
            | FittedEstimator::Szasz { sample, .. }
            | FittedEstimator::Bernstein { sample, .. }
            | FittedEstimator::Kernel { sample, .. }
            | FittedEstimator::HermiteHalf { sample, .. } => sample,
        }
    }

    /// The Szasz ceilings `max(1, ⌈m X_i⌉)`, ascending.
    pub fn szasz_ceilings(&self) -> Option<&[u64]> {
        match self {
            FittedEstimator::Szasz { ceilings, .. } => Some(ceilings),
            _ => None,
        }
    }

    /// The Hermite coefficients `â_0, …, â_N`.
    pub fn hermite_coefficients(&self) -> Option<&[f64]> {
        match self {
            FittedEstimator::HermiteHalf { coefficients, .. } => Some(coefficients),
            _ => None,
        }
    }

    /// The estimate at `x`. Szasz and Hermite fits reject `x < 0`; the
    /// Bernstein fit rejects `x ∉ [0, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return domain("evaluation point is NaN");
        }
        let n = self.sample().len() as f64;
        match self {
            FittedEstimator::Edf { sample } => Ok(sample.edf(x)),
            FittedEstimator::Szasz { m, groups, .. } => {
                if x < 0.0 {
                    return domain(format!("Szasz estimator is defined for x ≥ 0, got {x}"));
                }
                if x == 0.0 {
                    return Ok(0.0);
                }
                let lambda = *m as f64 * x;
                let mut total = 0.0;
                for &(c, count) in groups {
                    total += count as f64 * reg_lower_gamma(c as f64, lambda)?;
                }
                Ok((total / n).min(1.0))
            }
            FittedEstimator::Bernstein { m, groups, .. } => {
                if !(0.0..=1.0).contains(&x) {
                    return domain(format!("Bernstein estimator is defined on [0, 1], got {x}"));
                }
                let mut total = 0.0;
                for &(c, count) in groups {
                    // Σ_{k ≥ c} P_{k,m}(x) = I_x(c, m − c + 1)
                    let tail =
                        if c == 0 { 1.0 } else { reg_incomplete_beta(c as f64, (*m - c + 1) as f64, x)? };
                    total += count as f64 * tail;
                }
                Ok((total / n).min(1.0))
            }
            FittedEstimator::Kernel { sample, h } => {
                // Terms beyond nine bandwidths are 0 or 1 to double precision.
                let v = sample.values();
                let lo = v.partition_point(|&xi| xi < x - 9.0 * h);
                let hi = v.partition_point(|&xi| xi <= x + 9.0 * h);
                let inner: f64 = v[lo..hi].iter().map(|&xi| normal_cdf((x - xi) / h)).sum();
                Ok((lo as f64 + inner) / n)
            }
            FittedEstimator::HermiteHalf { coefficients, scale, clip, .. } => {
                if x < 0.0 {
                    return domain(format!("half-line Hermite estimator needs x ≥ 0, got {x}"));
                }
                let z = x / scale;
                let mut basis = vec![0.0; coefficients.len()];
                let mut integrals = vec![0.0; coefficients.len()];
                hermite_functions_into(z, &mut basis);
                hermite_integrals_into(z, &basis, &mut integrals);
                let value: f64 = coefficients.iter().zip(&integrals).map(|(a, i)| a * i).sum();
                Ok(if *clip { value.clamp(0.0, 1.0) } else { value })
            }
        }
    }

    /// Density of the Szasz estimate, `(m/n) Σ_i V_{c_i − 1, m}(x)`.
    pub fn szasz_density(&self, x: f64) -> Result<f64> {
        let FittedEstimator::Szasz { m, groups, sample, .. } = self else {
            return domain("density is only provided for Szasz fits");
        };
        if !(x >= 0.0) {
            return domain(format!("Szasz density is defined for x ≥ 0, got {x}"));
        }
        let mf = *m as f64;
        let lambda = mf * x;
        let total: f64 =
            groups.iter().map(|&(c, count)| count as f64 * poisson_pmf_real((c - 1) as f64, lambda)).sum();
        Ok(mf * total / sample.len() as f64)
    }

    /// `inf{x : F̂(x) ≥ p}` for `p ∈ (0, 1)`, located to 1e-10 in `x` or
    /// better. For Hermite fits, which need not be monotone, the first
    /// crossing on a fine grid is refined.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile level must lie in (0, 1), got {p}"));
        }
        let sample = self.sample();
        let n = sample.len();
        if let FittedEstimator::Edf { .. } = self {
            let rank = ((n as f64 * p).ceil() as usize).clamp(1, n);
            return Ok(sample.values()[rank - 1]);
        }
        let f = |x: f64| self.evaluate(x);
        let (mut lo, scale) = match self {
            FittedEstimator::Kernel { h, .. } => (sample.min() - 40.0 * h, *h),
            FittedEstimator::Szasz { m, .. } => (0.0, 1.0 / *m as f64),
            FittedEstimator::Bernstein { m, .. } => (0.0, 1.0 / *m as f64),
            FittedEstimator::HermiteHalf { scale, .. } => (0.0, *scale),
            FittedEstimator::Edf { .. } => unreachable!(),
        };
        if let FittedEstimator::Kernel { h, .. } = self {
            let mut width = 40.0 * h;
            while f(lo)? >= p {
                width *= 2.0;
                lo = sample.min() - width;
                if width > QUANTILE_X_MAX {
                    return Err(Error::UnattainableQuantile { p, x_max: -QUANTILE_X_MAX });
                }
            }
        }
        let mut hi = if let FittedEstimator::Bernstein { .. } = self {
            1.0
        } else {
            2.0 * sample.max().abs() + 10.0 * scale
        };
        while f(hi)? < p {
            if hi >= QUANTILE_X_MAX || matches!(self, FittedEstimator::Bernstein { .. }) {
                return Err(Error::UnattainableQuantile { p, x_max: hi });
            }
            hi = (2.0 * hi).min(QUANTILE_X_MAX);
        }
        if let FittedEstimator::HermiteHalf { .. } = self {
            let steps = 20_000;
            let step = (hi - lo) / steps as f64;
            let mut prev = lo;
            for i in 1..=steps {
                let x = lo + step * i as f64;
                if f(x)? >= p {
                    hi = x;
                    lo = prev;
                    break;
                }
                prev = x;
            }
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * hi.abs().max(1.0) || mid <= lo || mid >= hi {
                break;
            }
            if f(mid)? >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}
