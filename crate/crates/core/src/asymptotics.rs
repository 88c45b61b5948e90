//! Leading-order bias, variance, MSE and MISE expansions of the Szasz
//! estimator, the resulting optimal orders `m`, and deficiency expressions
//! relative to the EDF.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::models::TrueDistribution;
use crate::quadrature::integrate_adaptive;

/// Pointwise coefficients of the Szasz expansions at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseCoeffs {
    pub x: f64,
    /// `F(x)(1 − F(x))`
    pub sigma2: f64,
    /// `x f′(x) / 2`
    #[serde(rename = "bS")]
    pub b_s: f64,
    /// `f(x) √(x/π)`
    #[serde(rename = "VS")]
    pub v_s: f64,
    /// `V^S / σ²`; `None` when `F(x) ∈ {0, 1}`.
    #[serde(rename = "thetaS")]
    pub theta_s: Option<f64>,
    /// `(b^S)² / σ²`; `None` when `F(x) ∈ {0, 1}`.
    #[serde(rename = "gammaS")]
    pub gamma_s: Option<f64>,
}

pub fn pointwise_coeffs(dist: &TrueDistribution, x: f64) -> Result<PointwiseCoeffs> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("pointwise coefficients need x > 0, got {x}"));
    }
    let f_cdf = dist.cdf(x);
    let sigma2 = f_cdf * (1.0 - f_cdf);
    let b_s = 0.5 * x * dist.pdf_prime(x);
    let v_s = dist.pdf(x) * (x / PI).sqrt();
    let (theta_s, gamma_s) =
        if sigma2 > 0.0 { (Some(v_s / sigma2), Some(b_s * b_s / sigma2)) } else { (None, None) };
    Ok(PointwiseCoeffs { x, sigma2, b_s, v_s, theta_s, gamma_s })
}

/// `σ²/n − V^S/(√m n) + (b^S)²/m²`.
pub fn mse_asymptotic(coeffs: &PointwiseCoeffs, m: f64, n: f64) -> f64 {
    coeffs.sigma2 / n - coeffs.v_s / (m.sqrt() * n) + coeffs.b_s * coeffs.b_s / (m * m)
}

/// Minimizer of a three-term expansion and the expansion value there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalOrder {
    /// Real-valued optimum; round to the nearest integer ≥ 1 before use.
    pub m_opt: f64,
    /// `A/n − (3/4) n^{−4/3} [B⁴/(4C)]^{1/3}` for the expansion `A/n − B/(√m n) + C/m²`.
    pub optimal_value: f64,
}

fn optimal_order(first: f64, second: f64, third: f64, n: f64) -> OptimalOrder {
    let m_opt = n.powf(2.0 / 3.0) * (4.0 * third / second).powf(2.0 / 3.0);
    let optimal_value = first / n - 0.75 * n.powf(-4.0 / 3.0) * (second.powi(4) / (4.0 * third)).cbrt();
    OptimalOrder { m_opt, optimal_value }
}

/// MSE-optimal order `n^{2/3}[4(b^S)²/V^S]^{2/3}`.
pub fn m_opt_mse(coeffs: &PointwiseCoeffs, n: f64) -> Result<OptimalOrder> {
    if coeffs.b_s == 0.0 || !coeffs.b_s.is_finite() {
        return Err(Error::Degenerate(format!("bias coefficient is {} at x = {}", coeffs.b_s, coeffs.x)));
    }
    if !(coeffs.v_s > 0.0 && coeffs.v_s.is_finite()) {
        return Err(Error::Degenerate(format!("variance coefficient is {} at x = {}", coeffs.v_s, coeffs.x)));
    }
    Ok(optimal_order(coeffs.sigma2, coeffs.v_s, coeffs.b_s * coeffs.b_s, n))
}

/// Weighted integrals of `σ²`, `V^S` and `(b^S)²` against `e^{−ax} f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiseConstants {
    pub a: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    /// Sum of quadrature error estimates plus the neglected tail mass.
    pub quadrature_error_estimate: f64,
}

/// Upper integration limit and a bound on the mass of `f` beyond it.
fn integration_range(dist: &TrueDistribution) -> Result<(f64, f64)> {
    let (_, hi) = dist.support();
    if hi.is_finite() {
        return Ok((hi, 0.0));
    }
    let tail = 1e-16;
    Ok((dist.quantile(1.0 - tail)?, tail))
}

fn weighted_integral(dist: &TrueDistribution, a: f64, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let (top, tail) = integration_range(dist)?;
    let r = integrate_adaptive(|x| g(x) * (-a * x).exp() * dist.pdf(x), 0.0, top, 1e-15, 1e-10)?;
    Ok((r.value, r.error_estimate + tail))
}

/// `C1 = ∫ F(1 − F) e^{−ax} f dx`, finite for every `a ≥ 0`.
pub fn mise_c1(dist: &TrueDistribution, a: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return domain(format!("weight decay a must be non-negative for C1, got {a}"));
    }
    Ok(weighted_integral(dist, a, |x| {
        let f = dist.cdf(x);
        f * (1.0 - f)
    })?
    .0)
}

pub fn mise_constants(dist: &TrueDistribution, a: f64) -> Result<MiseConstants> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("weight decay a must be positive, got {a}"));
    }
    let (c1, e1) = weighted_integral(dist, a, |x| {
        let f = dist.cdf(x);
        f * (1.0 - f)
    })?;
    let (c2, e2) = weighted_integral(dist, a, |x| dist.pdf(x) * (x / PI).sqrt())?;
    let (c3, e3) = weighted_integral(dist, a, |x| {
        if x == 0.0 {
            return 0.0;
        }
        let b = 0.5 * x * dist.pdf_prime(x);
        b * b
    })?;
    Ok(MiseConstants { a, c1, c2, c3, quadrature_error_estimate: e1 + e2 + e3 })
}

/// `C1/n − C2/(√m n) + C3/m²`.
pub fn mise_asymptotic(consts: &MiseConstants, m: f64, n: f64) -> f64 {
    consts.c1 / n - consts.c2 / (m.sqrt() * n) + consts.c3 / (m * m)
}

fn check_constants(consts: &MiseConstants) -> Result<()> {
    if !(consts.c2 > 0.0 && consts.c3 > 0.0) {
        return Err(Error::Degenerate(format!(
            "MISE constants need C2, C3 > 0, got C2 = {}, C3 = {}",
            consts.c2, consts.c3
        )));
    }
    Ok(())
}

/// MISE-optimal order `n^{2/3}[4 C3/C2]^{2/3}`.
pub fn m_opt_mise(consts: &MiseConstants, n: f64) -> Result<OptimalOrder> {
    check_constants(consts)?;
    Ok(optimal_order(consts.c1, consts.c2, consts.c3, n))
}

/// `c* = (C3/C2)^{2/3}`: below it the global deficiency in the proportional
/// regime is negative.
pub fn c_star(consts: &MiseConstants) -> Result<f64> {
    check_constants(consts)?;
    Ok((consts.c3 / consts.c2).powf(2.0 / 3.0))
}

/// `c_opt = (4 C3/C2)^{2/3} = 2^{4/3} c*`, the maximizer of the global deficiency.
pub fn c_opt(consts: &MiseConstants) -> Result<f64> {
    check_constants(consts)?;
    Ok((4.0 * consts.c3 / consts.c2).powf(2.0 / 3.0))
}

/// `(4γ^S/θ^S)^{2/3}`, the maximizer of the local deficiency.
pub fn c_opt_local(coeffs: &PointwiseCoeffs) -> Result<f64> {
    let (theta, gamma) = local_ratios(coeffs)?;
    if !(theta > 0.0 && gamma > 0.0) {
        return Err(Error::Degenerate(format!("θ^S = {theta}, γ^S = {gamma}")));
    }
    Ok((4.0 * gamma / theta).powf(2.0 / 3.0))
}

fn local_ratios(coeffs: &PointwiseCoeffs) -> Result<(f64, f64)> {
    match (coeffs.theta_s, coeffs.gamma_s) {
        (Some(t), Some(g)) => Ok((t, g)),
        _ => Err(Error::Undefined(format!("F(x) ∈ {{0, 1}} at x = {}", coeffs.x))),
    }
}

/// Pointwise or integrated coefficients the deficiency is computed from.
#[derive(Debug, Clone, Copy)]
pub enum DeficiencyBasis<'a> {
    Local(&'a PointwiseCoeffs),
    Global(&'a MiseConstants),
}

/// Growth regime of `m` relative to `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderRegime {
    /// `m` grows faster than `n^{2/3}`; the bias term is negligible.
    Dominant { m: f64 },
    /// `m = c n^{2/3}`.
    Proportional { c: f64 },
}

/// Leading term of the deficiency `i − n`: in the dominant regime
/// `m^{−1/2} n θ` (local) or `m^{−1/2} n C2/C1` (global); in the
/// proportional regime `n^{2/3}(c^{−1/2} θ − c^{−2} γ)` or
/// `n^{2/3}(c^{−1/2} C2/C1 − c^{−2} C3/C1)`.
pub fn deficiency_asymptotic(basis: DeficiencyBasis<'_>, n: f64, regime: OrderRegime) -> Result<f64> {
    let (ratio_v, ratio_b) = match basis {
        DeficiencyBasis::Local(coeffs) => local_ratios(coeffs)?,
        DeficiencyBasis::Global(consts) => {
            if !(consts.c1 > 0.0) {
                return Err(Error::Degenerate("C1 must be positive".into()));
            }
            (consts.c2 / consts.c1, consts.c3 / consts.c1)
        }
    };
    match regime {
        OrderRegime::Dominant { m } => {
            if !(m > 0.0) {
                return domain(format!("order m must be positive, got {m}"));
            }
            Ok(n * ratio_v / m.sqrt())
        }
        OrderRegime::Proportional { c } => {
            if !(c > 0.0) {
                return domain(format!("proportionality constant c must be positive, got {c}"));
            }
            Ok(n.powf(2.0 / 3.0) * (ratio_v / c.sqrt() - ratio_b / (c * c)))
        }
    }
}
