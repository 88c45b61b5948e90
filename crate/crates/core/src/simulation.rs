//! Monte Carlo ISE/MISE estimation, parameter sweeps with common random
//! numbers, and the pointwise normality experiment.
//!
//! ISE is computed in probability space, `∫₀¹ (F̂(Q(u)) − u)² du`, with a
//! Gauss–Legendre rule on (0, 1); for the EDF the integral is exact. Each
//! repetition `i` draws its sample from the stream `stream_seed(master, i)`,
//! and every parameter of a sweep reuses the same samples. Results are
//! reduced in repetition order, so they do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimators::{grid_ceiling, CdfEstimate, EstimatorKind, EstimatorSpec, FittedEstimator, Sample};
use crate::models::{ModelSpec, TrueDistribution};
use crate::quadrature::QuadratureRule;
use crate::rng::stream_seed;
use crate::special_fn::{
    hermite_functions_into, hermite_integrals_into, normal_cdf, normal_pdf, poisson_pmf, reg_lower_gamma,
};

/// Quadrature nodes in probability space and their images `x_j = Q(u_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IseGrid {
    pub u: Vec<f64>,
    pub weights: Vec<f64>,
    pub x: Vec<f64>,
}

impl IseGrid {
    pub fn new(dist: &TrueDistribution, nodes: usize) -> Result<Self> {
        let rule = QuadratureRule::gauss_legendre(nodes)?.on_interval(0.0, 1.0);
        let x = rule.nodes.iter().map(|&u| dist.quantile(u)).collect::<Result<Vec<_>>>()?;
        Ok(Self { u: rule.nodes, weights: rule.weights, x })
    }

    /// `Σ_j w_j (values_j − u_j)²` for estimates at the nodes.
    pub fn integrate_squared_error(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values
            .into_iter()
            .zip(self.u.iter().zip(&self.weights))
            .map(|(v, (u, w))| w * (v - u) * (v - u))
            .sum()
    }
}

/// ISE of any CDF estimate by Gauss–Legendre quadrature in probability space.
pub fn ise<E: CdfEstimate + ?Sized>(estimate: &E, grid: &IseGrid) -> f64 {
    grid.integrate_squared_error(grid.x.iter().map(|&x| estimate.cdf_at(x)))
}

/// Exact ISE of the EDF: `Σ_i ∫_{u_(i)}^{u_(i+1)} (i/n − u)² du` with
/// `u_(i) = F(X_(i))`, `u_(0) = 0` and `u_(n+1) = 1`.
pub fn edf_ise(sample: &Sample, dist: &TrueDistribution) -> f64 {
    let n = sample.len() as f64;
    let segment = |c: f64, a: f64, b: f64| ((c - a).powi(3) - (c - b).powi(3)) / 3.0;
    let mut total = 0.0;
    let mut left = 0.0;
    for (i, &x) in sample.values().iter().enumerate() {
        let right = dist.cdf(x);
        total += segment(i as f64 / n, left, right);
        left = right;
    }
    total + segment(1.0, left, 1.0)
}

/// ISE of a fitted estimator: exact for the EDF, quadrature otherwise.
pub fn ise_fitted(fit: &FittedEstimator, dist: &TrueDistribution, grid: &IseGrid) -> f64 {
    match fit {
        FittedEstimator::Edf { sample } => edf_ise(sample, dist),
        _ => ise(fit, grid),
    }
}

/// Estimator family of a sweep; the smoothing parameter comes from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorFamily {
    Edf,
    Szasz,
    Bernstein,
    Kernel,
    HermiteHalf {
        #[serde(default)]
        standardize: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default)]
        clip: bool,
    },
}

fn integral_param(kind: EstimatorKind, p: f64, min: u64) -> Result<u64> {
    if p.fract() != 0.0 || p < min as f64 || p > u32::MAX as f64 {
        return domain(format!("{} parameter must be an integer ≥ {min}, got {p}", kind.name()));
    }
    Ok(p as u64)
}

impl EstimatorFamily {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            EstimatorFamily::Edf => EstimatorKind::Edf,
            EstimatorFamily::Szasz => EstimatorKind::Szasz,
            EstimatorFamily::Bernstein => EstimatorKind::Bernstein,
            EstimatorFamily::Kernel => EstimatorKind::Kernel,
            EstimatorFamily::HermiteHalf { .. } => EstimatorKind::HermiteHalf,
        }
    }

    /// The benchmark grids: `m ∈ 2..=200`, `h = i/1000` for `i ∈ 2..=200`,
    /// `N ∈ 2..=60`; a single dummy point for the EDF.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            EstimatorFamily::Edf => vec![0.0],
            EstimatorFamily::Szasz | EstimatorFamily::Bernstein => (2..=200).map(f64::from).collect(),
            EstimatorFamily::Kernel => (2..=200).map(|i| i as f64 / 1000.0).collect(),
            EstimatorFamily::HermiteHalf { .. } => (2..=60).map(f64::from).collect(),
        }
    }

    pub fn spec_for(&self, param: f64) -> Result<EstimatorSpec> {
        Ok(match self {
            EstimatorFamily::Edf => EstimatorSpec::Edf,
            EstimatorFamily::Szasz => EstimatorSpec::Szasz { m: integral_param(self.kind(), param, 1)? },
            EstimatorFamily::Bernstein => {
                EstimatorSpec::Bernstein { m: integral_param(self.kind(), param, 1)? }
            }
            EstimatorFamily::Kernel => {
                if !(param > 0.0 && param.is_finite()) {
                    return domain(format!("kernel bandwidth must be positive, got {param}"));
                }
                EstimatorSpec::Kernel { h: param }
            }
            EstimatorFamily::HermiteHalf { standardize, sigma, clip } => EstimatorSpec::HermiteHalf {
                order: integral_param(self.kind(), param, 0)? as usize,
                standardize: *standardize,
                sigma: *sigma,
                clip: *clip,
            },
        })
    }
}

fn default_nodes() -> usize {
    512
}

/// A Monte Carlo experiment over a grid of smoothing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dist: ModelSpec,
    #[serde(alias = "estimator_family")]
    pub estimator: EstimatorFamily,
    /// Strictly increasing; defaults to the family's benchmark grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_grid: Option<Vec<f64>>,
    pub n: usize,
    #[serde(rename = "M", alias = "repetitions")]
    pub repetitions: usize,
    pub master_seed: u64,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Vec<f64> {
        self.param_grid.clone().unwrap_or_else(|| self.estimator.default_grid())
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid();
        if grid.is_empty() {
            return domain("parameter grid must not be empty");
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return domain("parameter grid must be strictly increasing");
        }
        for &p in &grid {
            self.estimator.spec_for(p)?;
        }
        if self.n == 0 || self.repetitions == 0 {
            return domain("n and M must be at least 1");
        }
        if self.quadrature_nodes == 0 {
            return domain("quadrature_nodes must be at least 1");
        }
        Ok(())
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub mise: f64,
    /// Monte Carlo standard error; `None` for a single repetition.
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub argmin_param: f64,
    pub argmin_mise: f64,
    pub argmin_se: Option<f64>,
}

fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, Some((var / m).sqrt()))
}

/// The `M` samples of an experiment, one per repetition stream.
pub fn draw_samples(dist: &TrueDistribution, n: usize, reps: usize, master_seed: u64) -> Result<Vec<Sample>> {
    (0..reps as u64).into_par_iter().map(|i| dist.sample(stream_seed(master_seed, i), n)).collect()
}

/// Φ by cubic Hermite interpolation on `[−9, 9]`; absolute error below 1e-14.
/// Each cell stores its polynomial in Horner form.
struct NormalCdfTable {
    cells: Vec<[f64; 4]>,
}

const PHI_TABLE_STEPS_PER_UNIT: f64 = 1024.0;
const PHI_TABLE_HALF_WIDTH: f64 = 9.0;

impl NormalCdfTable {
    fn new() -> Self {
        let count = (2.0 * PHI_TABLE_HALF_WIDTH * PHI_TABLE_STEPS_PER_UNIT) as usize;
        let point = |i: usize| -PHI_TABLE_HALF_WIDTH + i as f64 / PHI_TABLE_STEPS_PER_UNIT;
        let cells = (0..count)
            .map(|i| {
                let (p0, p1) = (normal_cdf(point(i)), normal_cdf(point(i + 1)));
                let m0 = normal_pdf(point(i)) / PHI_TABLE_STEPS_PER_UNIT;
                let m1 = normal_pdf(point(i + 1)) / PHI_TABLE_STEPS_PER_UNIT;
                [p0, m0, 3.0 * (p1 - p0) - 2.0 * m0 - m1, 2.0 * (p0 - p1) + m0 + m1]
            })
            .collect();
        Self { cells }
    }

    /// Φ at `s / STEPS − HALF_WIDTH`, i.e. `s` is the position in table units.
    #[inline]
    fn eval_scaled(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let i = s as usize;
        if i >= self.cells.len() {
            return 1.0;
        }
        let t = s - i as f64;
        let [a, b, c, d] = self.cells[i];
        a + t * (b + t * (c + t * d))
    }

    #[cfg(test)]
    fn eval(&self, z: f64) -> f64 {
        self.eval_scaled((z + PHI_TABLE_HALF_WIDTH) * PHI_TABLE_STEPS_PER_UNIT)
    }
}

/// Kernel estimate at every node; nodes and sample both ascending.
fn kernel_at_nodes(table: &NormalCdfTable, sample: &[f64], h: f64, nodes: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let n = sample.len() as f64;
    let reach = PHI_TABLE_HALF_WIDTH * h;
    let scale = PHI_TABLE_STEPS_PER_UNIT / h;
    let offset = PHI_TABLE_HALF_WIDTH * PHI_TABLE_STEPS_PER_UNIT;
    let (mut lo, mut hi) = (0usize, 0usize);
    for &x in nodes {
        while lo < sample.len() && sample[lo] < x - reach {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < sample.len() && sample[hi] <= x + reach {
            hi += 1;
        }
        let base = x * scale + offset;
        let inner: f64 = sample[lo..hi].iter().map(|&xi| table.eval_scaled(base - xi * scale)).sum();
        out.push((lo as f64 + inner) / n);
    }
}

/// Poisson(m x_j) weights on a window around the mean, for each node, with
/// the matching survival probabilities `Pr(Y ≥ k)`.
struct SzaszNodeTable {
    m: u64,
    lo: Vec<usize>,
    weights: Vec<Vec<f64>>,
    /// `survival[j][k − lo] = Pr(Y ≥ k)` for `k = lo..=hi + 1`.
    survival: Vec<Vec<f64>>,
    k_top: usize,
}

impl SzaszNodeTable {
    fn new(m: u64, nodes: &[f64]) -> Result<Self> {
        let mut lo = Vec::with_capacity(nodes.len());
        let mut weights = Vec::with_capacity(nodes.len());
        let mut survival = Vec::with_capacity(nodes.len());
        let mut k_top = 0;
        for &x in nodes {
            let lambda = m as f64 * x;
            // Mass outside λ ± (8√λ + 12) is below 1e-13.
            let half = 8.0 * lambda.sqrt() + 12.0;
            let a = (lambda - half).floor().max(0.0) as usize;
            let b = (lambda + half).ceil() as usize;
            let w: Vec<f64> = (a..=b).map(|k| poisson_pmf(k as u64, lambda)).collect();
            let tail = if lambda == 0.0 { 0.0 } else { reg_lower_gamma((b + 1) as f64, lambda)? };
            let mut s = vec![0.0; w.len() + 1];
            s[w.len()] = tail;
            for k in (0..w.len()).rev() {
                s[k] = s[k + 1] + w[k];
            }
            weights.push(w);
            survival.push(s);
            lo.push(a);
            k_top = k_top.max(b + 1);
        }
        Ok(Self { m, lo, weights, survival, k_top })
    }

    /// `(1/n) Σ_i Pr(Y_j ≥ c_i)` at every node, with `c_i = max(1, ⌈m X_i⌉)`;
    /// ceilings below the window count as `lo`, above it as never reached.
    /// Uses whichever of the grouped lookup or the count-weighted dot
    /// product is shorter; both give the same sum.
    fn eval(&self, sample: &[f64], scratch: &mut SzaszScratch, out: &mut Vec<f64>) {
        let n = sample.len() as f64;
        scratch.groups.clear();
        for &x in sample {
            let c = grid_ceiling(x, self.m).max(1) as usize;
            match scratch.groups.last_mut() {
                Some((last, count)) if *last == c => *count += 1.0,
                _ => scratch.groups.push((c, 1.0)),
            }
        }
        let counts = &mut scratch.counts;
        counts.clear();
        out.clear();
        let groups = &scratch.groups;
        for j in 0..self.lo.len() {
            let lo = self.lo[j];
            let w = &self.weights[j];
            if groups.len() <= w.len() {
                let s = &self.survival[j];
                let total: f64 = groups
                    .iter()
                    .map(|&(c, count)| {
                        let idx = c.saturating_sub(lo);
                        if idx < s.len() {
                            count * s[idx]
                        } else {
                            0.0
                        }
                    })
                    .sum();
                out.push(total / n);
            } else {
                if counts.is_empty() {
                    counts.resize(self.k_top + 1, 0.0);
                    let mut g = 0;
                    let mut running = 0.0;
                    for (k, slot) in counts.iter_mut().enumerate() {
                        while g < groups.len() && groups[g].0 <= k {
                            running += groups[g].1;
                            g += 1;
                        }
                        *slot = running;
                    }
                }
                let window = &counts[lo..lo + w.len()];
                let dot: f64 = window.iter().zip(w).map(|(c, v)| c * v).sum();
                out.push((dot + counts[lo + w.len()] * self.survival[j][w.len()]) / n);
            }
        }
    }
}

#[derive(Default)]
struct SzaszScratch {
    groups: Vec<(usize, f64)>,
    counts: Vec<f64>,
}

/// `ise[param][rep]` for the whole grid.
pub fn ise_matrix(
    dist: &TrueDistribution,
    family: &EstimatorFamily,
    grid_params: &[f64],
    samples: &[Sample],
    grid: &IseGrid,
) -> Result<Vec<Vec<f64>>> {
    match family {
        EstimatorFamily::Edf => {
            let row: Vec<f64> = samples.par_iter().map(|s| edf_ise(s, dist)).collect();
            Ok(vec![row; grid_params.len()])
        }
        EstimatorFamily::Szasz => {
            for s in samples {
                if s.min() < 0.0 {
                    return domain("the Szasz estimator needs non-negative observations");
                }
            }
            grid_params
                .iter()
                .map(|&p| {
                    let m = integral_param(EstimatorKind::Szasz, p, 1)?;
                    let table = SzaszNodeTable::new(m, &grid.x)?;
                    Ok(samples
                        .par_iter()
                        .map_init(
                            || (SzaszScratch::default(), Vec::new()),
                            |(scratch, out), s| {
                                table.eval(s.values(), scratch, out);
                                grid.integrate_squared_error(out.iter().copied())
                            },
                        )
                        .collect())
                })
                .collect()
        }
        EstimatorFamily::Kernel => {
            let table = NormalCdfTable::new();
            grid_params
                .iter()
                .map(|&h| {
                    family.spec_for(h)?;
                    Ok(samples
                        .par_iter()
                        .map_init(Vec::new, |out, s| {
                            kernel_at_nodes(&table, s.values(), h, &grid.x, out);
                            grid.integrate_squared_error(out.iter().copied())
                        })
                        .collect())
                })
                .collect()
        }
        EstimatorFamily::HermiteHalf { standardize, sigma, clip } => {
            let orders = grid_params
                .iter()
                .map(|&p| integral_param(EstimatorKind::HermiteHalf, p, 0).map(|v| v as usize))
                .collect::<Result<Vec<_>>>()?;
            let top = *orders.iter().max().expect("grid validated non-empty");
            let scale = if *standardize { sigma.unwrap_or_else(|| dist.std_dev()) } else { 1.0 };
            if !(scale > 0.0 && scale.is_finite()) {
                return domain(format!("standardization scale must be positive, got {scale}"));
            }
            for s in samples {
                if s.min() < 0.0 {
                    return domain("the half-line Hermite estimator needs non-negative observations");
                }
            }
            // I_k(x_j / scale) for all nodes and k ≤ top.
            let mut basis = vec![0.0; top + 1];
            let integrals: Vec<Vec<f64>> = grid
                .x
                .iter()
                .map(|&x| {
                    let mut out = vec![0.0; top + 1];
                    hermite_functions_into(x / scale, &mut basis);
                    hermite_integrals_into(x / scale, &basis, &mut out);
                    out
                })
                .collect();
            let per_rep: Vec<Vec<f64>> = samples
                .par_iter()
                .map(|s| {
                    let mut coefficients = vec![0.0; top + 1];
                    let mut basis = vec![0.0; top + 1];
                    for &x in s.values() {
                        hermite_functions_into(x / scale, &mut basis);
                        coefficients.iter_mut().zip(&basis).for_each(|(a, h)| *a += h);
                    }
                    let n = s.len() as f64;
                    coefficients.iter_mut().for_each(|a| *a /= n);
                    // ise_by_order[k] accumulates the ISE of the order-k estimate.
                    let mut ise_by_order = vec![0.0; top + 1];
                    for (j, row) in integrals.iter().enumerate() {
                        let (u, w) = (grid.u[j], grid.weights[j]);
                        let mut value = 0.0;
                        for k in 0..=top {
                            value += coefficients[k] * row[k];
                            let v = if *clip { value.clamp(0.0, 1.0) } else { value };
                            ise_by_order[k] += w * (v - u) * (v - u);
                        }
                    }
                    orders.iter().map(|&k| ise_by_order[k]).collect()
                })
                .collect();
            Ok((0..orders.len()).map(|p| per_rep.iter().map(|r| r[p]).collect()).collect())
        }
        EstimatorFamily::Bernstein => grid_params
            .iter()
            .map(|&p| {
                let spec = family.spec_for(p)?;
                samples.par_iter().map(|s| Ok(ise_fitted(&spec.fit(s, Some(dist))?, dist, grid))).collect()
            })
            .collect(),
    }
}

/// Mean ISE over the repetitions, with its standard error.
pub fn mise_monte_carlo(config: &ExperimentConfig, param: f64) -> Result<(f64, Option<f64>)> {
    let single = ExperimentConfig { param_grid: Some(vec![param]), ..config.clone() };
    let result = parameter_sweep(&single)?;
    Ok((result.rows[0].mise, result.rows[0].se))
}

/// MISE at every grid point with common random numbers; the argmin breaks
/// ties toward the smaller parameter.
pub fn parameter_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let dist = config.dist.build()?;
    let grid_params = config.grid();
    let samples = draw_samples(&dist, config.n, config.repetitions, config.master_seed)?;
    let grid = IseGrid::new(&dist, config.quadrature_nodes)?;
    let matrix = ise_matrix(&dist, &config.estimator, &grid_params, &samples, &grid)?;
    let rows: Vec<SweepRow> = grid_params
        .iter()
        .zip(&matrix)
        .map(|(&param, ises)| {
            let (mise, se) = mean_and_se(ises);
            SweepRow { param, mise, se }
        })
        .collect();
    let best = rows.iter().fold(&rows[0], |best, row| if row.mise < best.mise { row } else { best });
    Ok(SweepResult { argmin_param: best.param, argmin_mise: best.mise, argmin_se: best.se, rows })
}

/// Distribution of `F̂(x)` over repetitions against its normal limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityResult {
    pub x: f64,
    pub n: usize,
    #[serde(rename = "M")]
    pub repetitions: usize,
    pub values: Vec<f64>,
    pub reference_mean: f64,
    pub reference_sd: f64,
    pub ks_distance: f64,
}

/// Kolmogorov distance between the empirical CDF of `values` and `N(mean, sd²)`.
pub fn ks_distance_normal(values: &[f64], mean: f64, sd: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let phi = normal_cdf((v - mean) / sd);
        d.max((i as f64 + 1.0) / m - phi).max(phi - i as f64 / m)
    })
}

/// `M` fits of `spec`, each on a fresh sample of size `n`, evaluated at `x`
/// and compared with `N(F(x), F(x)(1 − F(x))/n)`.
pub fn normality_experiment(
    dist: &TrueDistribution,
    spec: &EstimatorSpec,
    x: f64,
    n: usize,
    repetitions: usize,
    master_seed: u64,
) -> Result<NormalityResult> {
    let fx = dist.cdf(x);
    if !(fx > 0.0 && fx < 1.0) {
        return domain(format!("normality experiment needs 0 < F(x) < 1, got F({x}) = {fx}"));
    }
    if n == 0 || repetitions == 0 {
        return domain("n and M must be at least 1");
    }
    let values = (0..repetitions as u64)
        .into_par_iter()
        .map(|i| {
            let sample = dist.sample(stream_seed(master_seed, i), n)?;
            spec.fit(&sample, Some(dist))?.evaluate(x)
        })
        .collect::<Result<Vec<f64>>>()?;
    let reference_sd = (fx * (1.0 - fx) / n as f64).sqrt();
    let ks_distance = ks_distance_normal(&values, fx, reference_sd);
    Ok(NormalityResult { x, n, repetitions, values, reference_mean: fx, reference_sd, ks_distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_beta, make_exponential, make_weibull_mixture, MixtureSpec};

    fn exp2() -> TrueDistribution {
        make_exponential(2.0).unwrap()
    }

    fn config(estimator: EstimatorFamily, grid: Option<Vec<f64>>, n: usize, reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            dist: ModelSpec::Exponential { rate: 2.0 },
            estimator,
            param_grid: grid,
            n,
            repetitions: reps,
            master_seed: 2024,
            quadrature_nodes: 512,
        }
    }

    #[test]
    fn ise_examples() {
        let d = exp2();
        let grid = IseGrid::new(&d, 512).unwrap();
        let oracle = |x: f64| d.cdf(x);
        assert!(ise(&oracle, &grid) < 1e-12);
        let zero = |_x: f64| 0.0;
        assert!((ise(&zero, &grid) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn edf_ise_matches_fine_quadrature() {
        let d = exp2();
        let s = d.sample(4, 7).unwrap();
        let fit = FittedEstimator::edf(&s);
        let exact = edf_ise(&s, &d);
        let fine = crate::quadrature::integrate_adaptive(
            |u| {
                let v = fit.evaluate(d.quantile(u).unwrap()).unwrap();
                (v - u) * (v - u)
            },
            1e-15,
            1.0 - 1e-15,
            1e-13,
            1e-12,
        )
        .unwrap()
        .value;
        assert!((exact - fine).abs() < 1e-9);
    }

    #[test]
    fn quadrature_converges_for_smooth_estimators() {
        let d = exp2();
        let s = d.sample(8, 50).unwrap();
        let coarse = IseGrid::new(&d, 512).unwrap();
        let fine = IseGrid::new(&d, 2048).unwrap();
        for fit in [FittedEstimator::szasz(&s, 50).unwrap(), FittedEstimator::kernel(&s, 0.1).unwrap()] {
            let a = ise(&fit, &coarse);
            let b = ise(&fit, &fine);
            assert!(((a - b) / b).abs() < 1e-9, "{:?}: {a} vs {b}", fit.kind());
        }
        // The Hermite curve levels off below 1, so its u-space integrand is not
        // analytic at u = 1 and the rule converges more slowly.
        let fit = FittedEstimator::hermite_half(&s, 20).unwrap();
        let (a, b) = (ise(&fit, &coarse), ise(&fit, &fine));
        assert!(((a - b) / b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn fast_node_evaluators_agree_with_fitted_estimators() {
        let d = make_weibull_mixture(MixtureSpec::weibull_3());
        let grid = IseGrid::new(&d, 128).unwrap();
        let samples = draw_samples(&d, 40, 3, 9).unwrap();
        let families = [
            (EstimatorFamily::Szasz, vec![2.0, 37.0, 200.0]),
            (EstimatorFamily::Kernel, vec![0.002, 0.05, 0.2]),
            (EstimatorFamily::HermiteHalf { standardize: false, sigma: None, clip: false }, vec![2.0, 30.0]),
            (EstimatorFamily::HermiteHalf { standardize: true, sigma: None, clip: true }, vec![5.0, 60.0]),
        ];
        for (family, params) in families {
            let matrix = ise_matrix(&d, &family, &params, &samples, &grid).unwrap();
            for (p, row) in params.iter().zip(&matrix) {
                let spec = family.spec_for(*p).unwrap();
                for (s, fast) in samples.iter().zip(row) {
                    let slow = ise(&spec.fit(s, Some(&d)).unwrap(), &grid);
                    assert!(
                        (fast - slow).abs() <= 1e-12 * slow.max(1e-3),
                        "{family:?} {p}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn phi_table_is_accurate() {
        let table = NormalCdfTable::new();
        for i in 0..200_001 {
            let z = -10.0 + i as f64 * 1e-4;
            assert!((table.eval(z) - normal_cdf(z)).abs() < 1e-14, "z = {z}");
        }
    }

    #[test]
    fn edf_mise_matches_theory() {
        for n in [20usize, 100] {
            let c = config(EstimatorFamily::Edf, None, n, 4000);
            let (mise, se) = mise_monte_carlo(&c, 0.0).unwrap();
            let target = 1.0 / (6.0 * n as f64);
            assert!((mise - target).abs() < 3.0 * se.unwrap(), "n={n}: {mise} vs {target}");
        }
    }

    #[test]
    fn single_repetition_has_no_standard_error() {
        let c = config(EstimatorFamily::Szasz, Some(vec![10.0]), 30, 1);
        let (mise, se) = mise_monte_carlo(&c, 10.0).unwrap();
        assert!(se.is_none());
        let d = exp2();
        let s = d.sample(stream_seed(2024, 0), 30).unwrap();
        let grid = IseGrid::new(&d, 512).unwrap();
        let direct = ise(&FittedEstimator::szasz(&s, 10).unwrap(), &grid);
        assert!((mise - direct).abs() < 1e-14);
    }

    #[test]
    fn sweeps_are_deterministic_and_thread_independent() {
        let c = config(EstimatorFamily::Kernel, Some(vec![0.02, 0.05, 0.1, 0.2]), 25, 40);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| parameter_sweep(&c)).unwrap();
        let b = three.install(|| parameter_sweep(&c)).unwrap();
        assert_eq!(a, b);
        let min = a.rows.iter().map(|r| r.mise).fold(f64::INFINITY, f64::min);
        assert_eq!(a.argmin_mise, min);
        assert!(a.rows.iter().all(|r| r.mise >= 0.0));
    }

    #[test]
    fn degenerate_grids_and_edf_sweeps() {
        let c = config(EstimatorFamily::Szasz, Some(vec![17.0]), 20, 10);
        let r = parameter_sweep(&c).unwrap();
        assert_eq!(r.argmin_param, 17.0);
        let c = config(EstimatorFamily::Edf, Some(vec![1.0, 2.0, 3.0]), 20, 10);
        let r = parameter_sweep(&c).unwrap();
        assert!(r.rows.windows(2).all(|w| w[0].mise == w[1].mise));
        assert_eq!(r.argmin_param, 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(config(EstimatorFamily::Szasz, Some(vec![]), 20, 10).validate().is_err());
        assert!(config(EstimatorFamily::Szasz, Some(vec![3.0, 2.0]), 20, 10).validate().is_err());
        assert!(config(EstimatorFamily::Szasz, Some(vec![2.5]), 20, 10).validate().is_err());
        assert!(config(EstimatorFamily::Szasz, None, 0, 10).validate().is_err());
        assert!(config(EstimatorFamily::Szasz, None, 20, 0).validate().is_err());
        let text = r#"{"dist":{"kind":"exponential","rate":2},"estimator":{"kind":"szasz"},
                       "n":20,"M":100,"master_seed":1}"#;
        let parsed: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(parsed.quadrature_nodes, 512);
        assert_eq!(parsed.grid().len(), 199);
        assert!(serde_json::from_str::<ExperimentConfig>(&text.replace("szasz", "spline")).is_err());
    }

    #[test]
    fn edf_normality_at_moderate_n() {
        let d = make_beta(3.0, 3.0).unwrap();
        let r = normality_experiment(&d, &EstimatorSpec::Edf, 0.4, 500, 5000, 11).unwrap();
        assert!((r.reference_mean - 0.31744).abs() < 1e-12);
        assert!((r.reference_sd - 0.020_82).abs() < 1e-5);
        assert!(r.ks_distance < 0.03, "{}", r.ks_distance);
        assert_eq!(r.values.len(), 5000);
    }

    #[test]
    fn szasz_centering_follows_the_bias_coefficient() {
        // m = c √n: √n (F̂ − F) has mean ≈ b^S(x)/c.
        let d = exp2();
        let (n, c, x) = (2000usize, 2.0, 1.0);
        let m = (c * (n as f64).sqrt()).round() as u64;
        let r = normality_experiment(&d, &EstimatorSpec::Szasz { m }, x, n, 2000, 5).unwrap();
        let centered: Vec<f64> =
            r.values.iter().map(|v| (n as f64).sqrt() * (v - r.reference_mean)).collect();
        let (mean, se) = mean_and_se(&centered);
        let b = crate::asymptotics::pointwise_coeffs(&d, x).unwrap().b_s;
        let c_eff = m as f64 / (n as f64).sqrt();
        assert!((mean - b / c_eff).abs() < 3.0 * se.unwrap(), "{mean} vs {}", b / c_eff);
    }

    #[test]
    fn ks_distance_examples() {
        assert!((ks_distance_normal(&[0.0], 0.0, 1.0) - 0.5).abs() < 1e-15);
        let values: Vec<f64> =
            (1..1000).map(|i| crate::special_fn::normal_cdf(0.0) * 0.0 + i as f64).collect();
        let d = ks_distance_normal(&values, 500.0, 1e9);
        assert!((0.0..=1.0).contains(&d));
    }
}
