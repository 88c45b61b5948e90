//! Ground-truth distributions for simulations: exponential, finite Weibull
//! mixtures and beta. Each exposes its CDF, density, density derivative,
//! quantile function and a seeded inverse-transform sampler.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimators::Sample;
use crate::rng::UniformStream;
use crate::special_fn::{ln_gamma, reg_incomplete_beta};

/// One Weibull component, `F(x) = 1 − exp(−(x/scale)^shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullComponent {
    pub weight: f64,
    pub shape: f64,
    pub scale: f64,
}

impl WeibullComponent {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(-(x / self.scale).powf(self.shape)).exp_m1()
    }

    fn pdf(&self, x: f64) -> f64 {
        let (k, lambda) = (self.shape, self.scale);
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return match k {
                k if k < 1.0 => f64::INFINITY,
                1.0 => 1.0 / lambda,
                _ => 0.0,
            };
        }
        let z = x / lambda;
        (k / lambda) * z.powf(k - 1.0) * (-z.powf(k)).exp()
    }

    fn pdf_prime(&self, x: f64) -> f64 {
        let (k, lambda) = (self.shape, self.scale);
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return match k {
                k if k < 1.0 => f64::NEG_INFINITY,
                1.0 => -1.0 / (lambda * lambda),
                k if k < 2.0 => f64::INFINITY,
                2.0 => 2.0 / (lambda * lambda),
                _ => 0.0,
            };
        }
        let z = x / lambda;
        let t = z.powf(k);
        (k / (lambda * lambda)) * z.powf(k - 2.0) * (-t).exp() * ((k - 1.0) - k * t)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape)
    }

    fn raw_moment(&self, order: f64) -> f64 {
        self.scale.powf(order) * ln_gamma(1.0 + order / self.shape).exp()
    }
}

/// A validated finite mixture of Weibull distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    components: Vec<WeibullComponent>,
}

impl MixtureSpec {
    /// Components given as `(weight, shape, scale)`.
    pub fn new(components: &[(f64, f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return domain("a mixture needs at least one component");
        }
        let mut parts = Vec::with_capacity(components.len());
        for &(weight, shape, scale) in components {
            if !(weight > 0.0 && weight <= 1.0) {
                return domain(format!("mixture weight must lie in (0, 1], got {weight}"));
            }
            if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
                return domain(format!("Weibull shape and scale must be positive, got ({shape}, {scale})"));
            }
            parts.push(WeibullComponent { weight, shape, scale });
        }
        let total: f64 = parts.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("mixture weights must sum to 1, got {total}"));
        }
        Ok(Self { components: parts })
    }

    pub fn components(&self) -> &[WeibullComponent] {
        &self.components
    }

    /// 0.5·Weibull(1,1) + 0.5·Weibull(4,4)
    pub fn weibull_1() -> Self {
        Self::new(&[(0.5, 1.0, 1.0), (0.5, 4.0, 4.0)]).expect("valid preset")
    }

    /// 0.5·Weibull(1.5,1.5) + 0.5·Weibull(5,5)
    pub fn weibull_2() -> Self {
        Self::new(&[(0.5, 1.5, 1.5), (0.5, 5.0, 5.0)]).expect("valid preset")
    }

    /// 0.35·Weibull(1.5,1.5) + 0.35·Weibull(4.5,4.5) + 0.3·Weibull(8,8)
    pub fn weibull_3() -> Self {
        Self::new(&[(0.35, 1.5, 1.5), (0.35, 4.5, 4.5), (0.3, 8.0, 8.0)]).expect("valid preset")
    }
}

/// Serializable model description used in configuration files, e.g.
/// `{"kind":"weibull_mixture","components":[[0.5,1,1],[0.5,4,4]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Exponential {
        rate: f64,
    },
    /// Components as `[weight, shape, scale]`.
    WeibullMixture {
        components: Vec<[f64; 3]>,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<TrueDistribution> {
        match self {
            ModelSpec::Exponential { rate } => make_exponential(*rate),
            ModelSpec::WeibullMixture { components } => {
                let parts: Vec<_> = components.iter().map(|c| (c[0], c[1], c[2])).collect();
                Ok(make_weibull_mixture(MixtureSpec::new(&parts)?))
            }
            ModelSpec::Beta { alpha, beta } => make_beta(*alpha, *beta),
        }
    }
}

/// A fully specified continuous distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum TrueDistribution {
    Exponential { rate: f64 },
    WeibullMixture(MixtureSpec),
    Beta { alpha: f64, beta: f64, ln_beta_fn: f64 },
}

pub fn make_exponential(rate: f64) -> Result<TrueDistribution> {
    if !(rate > 0.0 && rate.is_finite()) {
        return domain(format!("exponential rate must be positive, got {rate}"));
    }
    Ok(TrueDistribution::Exponential { rate })
}

pub fn make_weibull_mixture(spec: MixtureSpec) -> TrueDistribution {
    TrueDistribution::WeibullMixture(spec)
}

pub fn make_beta(alpha: f64, beta: f64) -> Result<TrueDistribution> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return domain(format!("beta parameters must be positive, got ({alpha}, {beta})"));
    }
    let ln_beta_fn = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
    Ok(TrueDistribution::Beta { alpha, beta, ln_beta_fn })
}

/// The four half-line models of the benchmark study: Exp(2) and the three
/// Weibull mixtures.
pub fn benchmark_models() -> Vec<TrueDistribution> {
    vec![
        TrueDistribution::Exponential { rate: 2.0 },
        make_weibull_mixture(MixtureSpec::weibull_1()),
        make_weibull_mixture(MixtureSpec::weibull_2()),
        make_weibull_mixture(MixtureSpec::weibull_3()),
    ]
}

/// Safeguarded Newton inversion of a continuous CDF on a bracket.
fn invert_cdf(dist: &TrueDistribution, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = dist.cdf(x) - p;
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = dist.pdf(x);
        let newton = x - fx / dens;
        let next = if dens > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-16 * hi.abs() {
            return next;
        }
        x = next;
    }
    x
}

impl TrueDistribution {
    pub fn name(&self) -> String {
        match self {
            TrueDistribution::Exponential { rate } => format!("Exponential({rate})"),
            TrueDistribution::WeibullMixture(spec) => {
                let parts: Vec<String> = spec
                    .components
                    .iter()
                    .map(|c| format!("{}·Weibull({}, {})", c.weight, c.shape, c.scale))
                    .collect();
                parts.join(" + ")
            }
            TrueDistribution::Beta { alpha, beta, .. } => format!("Beta({alpha}, {beta})"),
        }
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            TrueDistribution::Exponential { rate } => ModelSpec::Exponential { rate: *rate },
            TrueDistribution::WeibullMixture(spec) => ModelSpec::WeibullMixture {
                components: spec.components.iter().map(|c| [c.weight, c.shape, c.scale]).collect(),
            },
            TrueDistribution::Beta { alpha, beta, .. } => ModelSpec::Beta { alpha: *alpha, beta: *beta },
        }
    }

    /// Closed support interval; the upper end may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            TrueDistribution::Beta { .. } => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            TrueDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            TrueDistribution::WeibullMixture(spec) => {
                spec.components.iter().map(|c| c.weight * c.cdf(x)).sum()
            }
            TrueDistribution::Beta { alpha, beta, .. } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    reg_incomplete_beta(*alpha, *beta, x).expect("arguments validated")
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            TrueDistribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            TrueDistribution::WeibullMixture(spec) => {
                spec.components.iter().map(|c| c.weight * c.pdf(x)).sum()
            }
            TrueDistribution::Beta { alpha, beta, ln_beta_fn } => {
                if !(0.0..=1.0).contains(&x) {
                    return 0.0;
                }
                if x == 0.0 || x == 1.0 {
                    let exponent = if x == 0.0 { *alpha } else { *beta };
                    return match exponent {
                        e if e < 1.0 => f64::INFINITY,
                        1.0 => (-ln_beta_fn).exp(),
                        _ => 0.0,
                    };
                }
                ((alpha - 1.0) * x.ln() + (beta - 1.0) * (-x).ln_1p() - ln_beta_fn).exp()
            }
        }
    }

    pub fn pdf_prime(&self, x: f64) -> f64 {
        match self {
            TrueDistribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    -rate * rate * (-rate * x).exp()
                }
            }
            TrueDistribution::WeibullMixture(spec) => {
                spec.components.iter().map(|c| c.weight * c.pdf_prime(x)).sum()
            }
            TrueDistribution::Beta { alpha, beta, .. } => {
                if !(0.0..=1.0).contains(&x) {
                    return 0.0;
                }
                if x > 0.0 && x < 1.0 {
                    return self.pdf(x) * ((alpha - 1.0) / x - (beta - 1.0) / (1.0 - x));
                }
                // One-sided limits at the endpoints.
                let (e, sign) = if x == 0.0 { (*alpha, 1.0) } else { (*beta, -1.0) };
                let c = (-self.ln_beta()).exp();
                match e {
                    e if e < 2.0 && e != 1.0 => sign * f64::INFINITY * (e - 1.0).signum(),
                    1.0 => {
                        let other = if x == 0.0 { *beta } else { *alpha };
                        -sign * c * (other - 1.0)
                    }
                    2.0 => sign * c,
                    _ => 0.0,
                }
            }
        }
    }

    fn ln_beta(&self) -> f64 {
        match self {
            TrueDistribution::Beta { ln_beta_fn, .. } => *ln_beta_fn,
            _ => 0.0,
        }
    }

    /// F^{-1}(p) for `p ∈ (0, 1)`; `p = 0` and `p = 1` map to the support ends.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("quantile level must lie in [0, 1], got {p}"));
        }
        let (lo, hi) = self.support();
        if p == 0.0 {
            return Ok(lo);
        }
        if p == 1.0 {
            return Ok(hi);
        }
        Ok(match self {
            TrueDistribution::Exponential { rate } => -(-p).ln_1p() / rate,
            TrueDistribution::WeibullMixture(spec) => {
                // The mixture quantile lies between the extreme component quantiles.
                let qs = spec.components.iter().map(|c| c.quantile(p));
                let (a, b) = qs.fold((f64::INFINITY, 0.0f64), |(a, b), q| (a.min(q), b.max(q)));
                if spec.components.len() == 1 || a == b {
                    a
                } else {
                    invert_cdf(self, p, a, b)
                }
            }
            TrueDistribution::Beta { .. } => invert_cdf(self, p, 0.0, 1.0),
        })
    }

    pub fn mean(&self) -> f64 {
        match self {
            TrueDistribution::Exponential { rate } => 1.0 / rate,
            TrueDistribution::WeibullMixture(spec) => {
                spec.components.iter().map(|c| c.weight * c.raw_moment(1.0)).sum()
            }
            TrueDistribution::Beta { alpha, beta, .. } => alpha / (alpha + beta),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            TrueDistribution::Exponential { rate } => 1.0 / (rate * rate),
            TrueDistribution::WeibullMixture(spec) => {
                let second: f64 = spec.components.iter().map(|c| c.weight * c.raw_moment(2.0)).sum();
                let mean = self.mean();
                second - mean * mean
            }
            TrueDistribution::Beta { alpha, beta, .. } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// One inverse-transform draw; mixtures consume two uniforms
    /// (component, then position), the other models one.
    fn draw(&self, stream: &mut UniformStream) -> f64 {
        match self {
            TrueDistribution::WeibullMixture(spec) => {
                let pick = stream.next_open01();
                let u = stream.next_open01();
                let mut acc = 0.0;
                let last = spec.components.len() - 1;
                for (i, c) in spec.components.iter().enumerate() {
                    acc += c.weight;
                    if pick <= acc || i == last {
                        return c.quantile(u);
                    }
                }
                unreachable!("the last component always matches")
            }
            _ => self.quantile(stream.next_open01()).expect("open-interval uniform"),
        }
    }

    /// `n` i.i.d. draws from the stream identified by `seed`, sorted ascending.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Sample> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        let mut stream = UniformStream::new(seed);
        let values: Vec<f64> = (0..n).map(|_| self.draw(&mut stream)).collect();
        Sample::new(values)
    }
}

/// Free-function form of [`TrueDistribution::sample`].
pub fn sample(dist: &TrueDistribution, seed: u64, n: usize) -> Result<Sample> {
    dist.sample(seed, n)
}
