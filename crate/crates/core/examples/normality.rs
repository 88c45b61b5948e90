//! Sampling distribution of F_hat(0.4) for Beta(3,3) samples of size 500,
//! for the EDF and the Szasz estimator, against N(F, F(1-F)/n).
//!
//! Usage: cargo run --release --example normality -- [M]

use smoothcdf::estimators::EstimatorSpec;
use smoothcdf::models::make_beta;
use smoothcdf::simulation::normality_experiment;
use smoothcdf::theory_checks::szasz_exact_moments;

fn histogram(values: &[f64], mean: f64, sd: f64) {
    let bins = 13;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let z = ((v - mean) / sd + 3.25) / 0.5;
        if (0.0..bins as f64).contains(&z) {
            counts[z as usize] += 1;
        }
    }
    let top = *counts.iter().max().unwrap_or(&1) as f64;
    for (i, &c) in counts.iter().enumerate() {
        let z = -3.0 + 0.5 * i as f64;
        println!("  {z:+5.1} sd |{}", "#".repeat((50.0 * c as f64 / top).round() as usize));
    }
}

fn main() -> smoothcdf::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(3000, |a| a.parse().expect("M must be an integer"));
    let dist = make_beta(3.0, 3.0)?;
    let (x, n) = (0.4, 500);
    let m = (4.0 * (n as f64).powf(2.0 / 3.0)).round() as u64;

    for (name, spec) in [("EDF", EstimatorSpec::Edf), ("Szasz", EstimatorSpec::Szasz { m })] {
        let r = normality_experiment(&dist, &spec, x, n, reps, 5)?;
        let mean = r.values.iter().sum::<f64>() / reps as f64;
        let sd = (r.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        println!("{name}: KS {:.4}, sample mean {mean:.5}, sample sd {sd:.5}", r.ks_distance);
        println!("  reference N({:.5}, {:.5}^2)", r.reference_mean, r.reference_sd);
        histogram(&r.values, r.reference_mean, r.reference_sd);
    }
    let exact = szasz_exact_moments(&dist, m, n as u64, x)?;
    println!("Szasz m = {m}: exact bias {:+.2e}, exact sd {:.5}", exact.bias, exact.variance.sqrt());
    Ok(())
}
