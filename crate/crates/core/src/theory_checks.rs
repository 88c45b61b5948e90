//! Exact Poisson-weight sums behind the Szasz estimator: the operator
//! `S_m(F; x)`, the sums `L_m`, `R_{j,m}` and `R̃_{1,m}`, the weighted
//! integral of `L_m`, and exact finite-sample bias and variance.
//!
//! Double sums over `F((k ∧ l)/m) V_k V_l` are reduced to single sums
//! through `Σ_{k,l} g(k ∧ l) V_k V_l = Σ_k g(k) V_k (2 Q_k − V_k)` with the
//! suffix masses `Q_k = Σ_{l ≥ k} V_l`. Brute-force `O(K²)` versions are kept
//! for cross-checking small instances.

use serde::Serialize;
use std::f64::consts::PI;

use crate::asymptotics::{c_opt_local, pointwise_coeffs};
use crate::error::{domain, Error, Result};
use crate::models::{make_exponential, TrueDistribution};
use crate::rng::UniformStream;
use crate::special_fn::{poisson_pmf, reg_lower_gamma};

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        iter.into_iter().for_each(|v| acc.add(v));
        acc
    }
}

/// Truncation index `⌈λ + 12√λ + 30⌉` for a Poisson(λ) weight vector.
pub fn truncation_index(lambda: f64) -> usize {
    (lambda + 12.0 * lambda.sqrt() + 30.0).ceil() as usize
}

/// `V_{k,m}(x) = e^{−mx}(mx)^k/k!` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeightVector {
    pub m: u64,
    pub x: f64,
    pub k_max: usize,
    pub weights: Vec<f64>,
    /// `Σ_{k > k_max} V_{k,m}(x)`.
    pub tail_mass: f64,
}

impl PoissonWeightVector {
    /// Suffix masses `Q_k = Σ_{l ≥ k} V_l` including the tail beyond `k_max`,
    /// for `k = 0..=k_max + 1`.
    pub fn suffix_masses(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.weights.len() + 1];
        q[self.weights.len()] = self.tail_mass;
        let mut acc = CompensatedSum::default();
        acc.add(self.tail_mass);
        for k in (0..self.weights.len()).rev() {
            acc.add(self.weights[k]);
            q[k] = acc.value();
        }
        q
    }
}

pub fn poisson_weights(m: u64, x: f64) -> Result<PoissonWeightVector> {
    if m == 0 {
        return domain("order m must be at least 1");
    }
    if !(x >= 0.0 && x.is_finite()) {
        return domain(format!("Poisson weights need finite x ≥ 0, got {x}"));
    }
    let lambda = m as f64 * x;
    if lambda == 0.0 {
        return Ok(PoissonWeightVector { m, x, k_max: 0, weights: vec![1.0], tail_mass: 0.0 });
    }
    let k_max = truncation_index(lambda);
    let weights: Vec<f64> = (0..=k_max as u64).map(|k| poisson_pmf(k, lambda)).collect();
    let tail_mass = reg_lower_gamma((k_max + 1) as f64, lambda)?;
    Ok(PoissonWeightVector { m, x, k_max, weights, tail_mass })
}

/// A truncated series value and a bound on the neglected remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedSum {
    pub value: f64,
    pub truncation_bound: f64,
}

/// `S_m(F; x) = Σ_k F(k/m) V_{k,m}(x)`.
pub fn szasz_operator(dist: &TrueDistribution, m: u64, x: f64) -> Result<TruncatedSum> {
    let w = poisson_weights(m, x)?;
    let mf = m as f64;
    let sum: CompensatedSum =
        w.weights.iter().enumerate().map(|(k, v)| dist.cdf(k as f64 / mf) * v).collect();
    Ok(TruncatedSum { value: sum.value(), truncation_bound: w.tail_mass })
}

/// `L_m(x) = Σ_k V_{k,m}(x)²`.
pub fn l_m(m: u64, x: f64) -> Result<TruncatedSum> {
    let w = poisson_weights(m, x)?;
    let sum: CompensatedSum = w.weights.iter().map(|v| v * v).collect();
    Ok(TruncatedSum { value: sum.value(), truncation_bound: w.tail_mass })
}

/// `Σ_{k,l} g(k ∧ l) V_k V_l` in `O(K)` via suffix masses.
pub fn min_double_sum(w: &PoissonWeightVector, g: impl Fn(usize) -> f64) -> f64 {
    let q = w.suffix_masses();
    w.weights.iter().enumerate().map(|(k, v)| g(k) * v * (2.0 * q[k] - v)).collect::<CompensatedSum>().value()
}

/// `Σ_{k,l ≤ K} g(k ∧ l) V_k V_l` by direct double summation.
pub fn min_double_sum_brute(w: &PoissonWeightVector, g: impl Fn(usize) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for (k, vk) in w.weights.iter().enumerate() {
        for (l, vl) in w.weights.iter().enumerate() {
            acc.add(g(k.min(l)) * vk * vl);
        }
    }
    acc.value()
}

/// `R̃_{1,m}(x) = m^{1/2} Σ_{k,l} ((k ∧ l)/m − x) V_k V_l`.
pub fn r_tilde_1(m: u64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("R̃_1 needs x > 0, got {x}"));
    }
    let w = poisson_weights(m, x)?;
    let mf = m as f64;
    Ok(mf.sqrt() * min_double_sum(&w, |k| k as f64 / mf - x))
}

/// `R_{j,m}(x) = m^{−j} Σ_{0 ≤ k < l} (k − mx)^j V_k V_l`.
pub fn r_j(m: u64, x: f64, j: u32) -> Result<f64> {
    if j > 2 {
        return domain(format!("R_j is provided for j ∈ {{0, 1, 2}}, got {j}"));
    }
    let w = poisson_weights(m, x)?;
    let q = w.suffix_masses();
    let mf = m as f64;
    let lambda = mf * x;
    let sum: CompensatedSum = w
        .weights
        .iter()
        .enumerate()
        .map(|(k, v)| (k as f64 - lambda).powi(j as i32) * v * q[k + 1])
        .collect();
    Ok(sum.value() / mf.powi(j as i32))
}

/// `R_{j,m}(x)` by direct double summation over `k < l ≤ K`.
pub fn r_j_brute(m: u64, x: f64, j: u32) -> Result<f64> {
    let w = poisson_weights(m, x)?;
    let mf = m as f64;
    let lambda = mf * x;
    let mut acc = CompensatedSum::default();
    for k in 0..w.weights.len() {
        for l in k + 1..w.weights.len() {
            acc.add((k as f64 - lambda).powi(j as i32) * w.weights[k] * w.weights[l]);
        }
    }
    Ok(acc.value() / mf.powi(j as i32))
}

/// `m^{1/2} ∫₀^∞ x^p L_m(x) e^{−ax} dx` for `p ∈ {0, 1}`, summed
/// termwise and in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedIntegral {
    pub m: u64,
    pub a: f64,
    pub moment: u32,
    pub termwise: f64,
    pub closed_form: f64,
    pub difference: f64,
}

/// Termwise: `m^{1/2}/(2m+a)^{p+1} Σ_k (2k+1)^p C(2k,k) q^{2k}` with
/// `q = m/(2m+a)`. Closed forms: `√(m/(a(a+4m)))` for `p = 0` and
/// `√m (a+2m)/(a(a+4m))^{3/2}` for `p = 1`.
pub fn weighted_l_integral(m: u64, a: f64, moment: u32) -> Result<WeightedIntegral> {
    if m == 0 {
        return domain("order m must be at least 1");
    }
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("weight decay a must be positive, got {a}"));
    }
    if moment > 1 {
        return domain(format!("moment must be 0 or 1, got {moment}"));
    }
    let mf = m as f64;
    let q2 = (mf / (2.0 * mf + a)).powi(2);
    let mut term = 1.0; // C(2k, k) q^{2k}
    let mut acc = CompensatedSum::default();
    let mut k = 0u64;
    loop {
        let weighted = if moment == 1 { (2 * k + 1) as f64 * term } else { term };
        acc.add(weighted);
        if weighted < 1e-19 * acc.value() || k > 100_000_000 {
            break;
        }
        let kf = k as f64;
        term *= 2.0 * (2.0 * kf + 1.0) / (kf + 1.0) * q2;
        k += 1;
    }
    let termwise = mf.sqrt() / (2.0 * mf + a).powi(moment as i32 + 1) * acc.value();
    let closed_form = if moment == 0 {
        (mf / (a * (a + 4.0 * mf))).sqrt()
    } else {
        mf.sqrt() * (a + 2.0 * mf) / (a * (a + 4.0 * mf)).powf(1.5)
    };
    Ok(WeightedIntegral { m, a, moment, termwise, closed_form, difference: termwise - closed_form })
}

/// Exact mean and variance of the Szasz estimator at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactMoments {
    pub m: u64,
    pub n: u64,
    pub x: f64,
    pub s_m: f64,
    pub bias: f64,
    pub variance: f64,
    pub truncation_error_bound: f64,
}

/// `E F̂ = S_m(F; x)` and `Var F̂ = (1/n)[Σ_{k,l} F((k∧l)/m) V_k V_l − S_m²]`.
pub fn szasz_exact_moments(dist: &TrueDistribution, m: u64, n: u64, x: f64) -> Result<ExactMoments> {
    if n == 0 {
        return domain("sample size n must be at least 1");
    }
    if !(x > 0.0) {
        return domain(format!("exact moments need x > 0, got {x}"));
    }
    let w = poisson_weights(m, x)?;
    let mf = m as f64;
    let f_grid: Vec<f64> = (0..w.weights.len()).map(|k| dist.cdf(k as f64 / mf)).collect();
    let fx = dist.cdf(x);
    let s_m: CompensatedSum = f_grid.iter().zip(&w.weights).map(|(f, v)| f * v).collect();
    let s_m = s_m.value();
    // Centering at F(x) keeps the small bias free of cancellation.
    let mut centered: CompensatedSum = f_grid.iter().zip(&w.weights).map(|(f, v)| (f - fx) * v).collect();
    centered.add(-fx * w.tail_mass);
    let second = min_double_sum(&w, |k| f_grid[k]);
    let variance = ((second - s_m * s_m) / n as f64).max(0.0);
    Ok(ExactMoments {
        m,
        n,
        x,
        s_m,
        bias: centered.value(),
        variance,
        truncation_error_bound: 2.0 * w.tail_mass,
    })
}

/// `min{k : σ²(x)/k ≤ MSE[F̂^S_{m,n}(x)]} = ⌈σ²(x)/MSE⌉`.
pub fn exact_deficiency_local(dist: &TrueDistribution, m: u64, n: u64, x: f64) -> Result<u64> {
    let fx = dist.cdf(x);
    if !(fx > 0.0 && fx < 1.0) {
        return Err(Error::Undefined(format!("F(x) = {fx} at x = {x}")));
    }
    let moments = szasz_exact_moments(dist, m, n, x)?;
    let mse = moments.bias * moments.bias + moments.variance;
    if mse <= 0.0 {
        return Err(Error::UnboundedDeficiency);
    }
    Ok(((fx * (1.0 - fx) / mse).ceil() as u64).max(1))
}

/// Depth of [`run_suite`]: `Fast` keeps `m ≤ 10³`, `Full` goes to `m = 10⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteLevel {
    Fast,
    Full,
}

/// One numeric check: `passed` iff `|observed − predicted| ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub observed: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, observed: f64, predicted: f64, tolerance: f64) -> Self {
        let passed = (observed - predicted).abs() <= tolerance;
        Self { name: name.into(), observed, predicted, tolerance, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub level: SuiteLevel,
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
}

/// Runs the Poisson-weight identities and limits at finite scale.
pub fn run_suite(level: SuiteLevel) -> Result<SuiteReport> {
    let m_top: u64 = match level {
        SuiteLevel::Fast => 1_000,
        SuiteLevel::Full => 10_000,
    };
    let mt = m_top as f64;
    let mut checks = Vec::new();

    for m in [1u64, 10, m_top] {
        checks.push(CheckOutcome::new(format!("L_m(0) = 1, m = {m}"), l_m(m, 0.0)?.value, 1.0, 0.0));
    }
    for x in [0.5, 1.0, 4.0] {
        let scaled = (4.0 * PI * mt * x).sqrt() * l_m(m_top, x)?.value;
        checks.push(CheckOutcome::new(
            format!("sqrt(4 pi m x) L_m(x), m = {m_top}, x = {x}"),
            scaled,
            1.0,
            0.01,
        ));
    }
    for x in [0.5, 1.0, 4.0] {
        let ratio = r_tilde_1(m_top, x)? / -(x / PI).sqrt();
        checks.push(CheckOutcome::new(
            format!("R~_1 / (-sqrt(x/pi)), m = {m_top}, x = {x}"),
            ratio,
            1.0,
            0.02,
        ));
        let ratio = mt.sqrt() * r_j(m_top, x, 1)? / -(x / (4.0 * PI)).sqrt();
        checks.push(CheckOutcome::new(
            format!("sqrt(m) R_1 / (-sqrt(x/(4 pi))), m = {m_top}, x = {x}"),
            ratio,
            1.0,
            0.02,
        ));
    }
    for j in 0..=2 {
        checks.push(CheckOutcome::new(format!("R_{j}(0) = 0"), r_j(m_top, 0.0, j)?, 0.0, 0.0));
    }
    let mut stream = UniformStream::new(0x5EED);
    let mut worst_violation = 0.0f64;
    for _ in 0..100 {
        let m = 1 + (stream.next_open01() * mt) as u64;
        let x = 10.0 * stream.next_open01();
        let r2 = r_j(m, x, 2)?;
        let bound = x / m as f64;
        worst_violation = worst_violation.max(-r2).max(r2 - bound);
    }
    checks.push(CheckOutcome::new(
        "0 <= R_2 <= x/m on 100 random inputs (worst violation)",
        worst_violation.max(0.0),
        0.0,
        1e-15,
    ));
    let mut worst_identity = 0.0f64;
    for _ in 0..20 {
        let m = 1 + (stream.next_open01() * 100.0) as u64;
        let x = 3.0 * stream.next_open01();
        let w = poisson_weights(m, x)?;
        let g = |k: usize| ((k as f64) * 0.37).sin();
        worst_identity = worst_identity.max((min_double_sum(&w, g) - min_double_sum_brute(&w, g)).abs());
    }
    checks.push(CheckOutcome::new(
        "min-identity vs double sum (worst |difference|)",
        worst_identity,
        0.0,
        1e-10,
    ));
    for (m, a) in [(3u64, 4.0), (50, 1.0), (500, 0.25)] {
        for moment in [0, 1] {
            let wi = weighted_l_integral(m, a, moment)?;
            checks.push(CheckOutcome::new(
                format!("weighted L integral, moment {moment}, m = {m}, a = {a}"),
                wi.termwise,
                wi.closed_form,
                1e-10,
            ));
        }
    }

    let exp2 = make_exponential(2.0)?;
    let coeffs = pointwise_coeffs(&exp2, 1.0)?;
    let moments = szasz_exact_moments(&exp2, m_top, 1, 1.0)?;
    checks.push(CheckOutcome::new(
        format!("m bias / b^S, Exp(2), x = 1, m = {m_top}"),
        mt * moments.bias / coeffs.b_s,
        1.0,
        0.02,
    ));
    checks.push(CheckOutcome::new(
        format!("(sigma^2 - n var) sqrt(m) / V^S, Exp(2), x = 1, m = {m_top}"),
        (coeffs.sigma2 - moments.variance) * mt.sqrt() / coeffs.v_s,
        1.0,
        0.05,
    ));

    if level == SuiteLevel::Full {
        let n = 10_000u64;
        let c = c_opt_local(&coeffs)?;
        let m = (c * (n as f64).powf(2.0 / 3.0)).round() as u64;
        let i_l = exact_deficiency_local(&exp2, m, n, 1.0)?;
        let scaled = (i_l as f64 - n as f64) / ((m as f64).powf(-0.5) * n as f64);
        let theta = coeffs.theta_s.expect("0 < F(1) < 1");
        let gamma = coeffs.gamma_s.expect("0 < F(1) < 1");
        let predicted = theta - c.powf(-1.5) * gamma;
        checks.push(CheckOutcome::new(
            format!("local deficiency (i_L - n)/(m^-1/2 n), n = {n}, m = {m}"),
            scaled,
            predicted,
            0.25 * predicted.abs(),
        ));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { level, checks, all_passed })
}
