//! Sweep each estimator family over its benchmark grid for Exp(2), n = 20,
//! and report the MISE-minimizing parameter.
//!
//! Usage: cargo run --release --example mise_sweep -- [M] [n]

use smoothcdf::models::ModelSpec;
use smoothcdf::simulation::{parameter_sweep, EstimatorFamily, ExperimentConfig};

fn main() -> smoothcdf::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(1000, |a| a.parse().expect("M must be an integer"));
    let n: usize = args.next().map_or(20, |a| a.parse().expect("n must be an integer"));
    let families = [
        ("EDF", EstimatorFamily::Edf),
        ("Szasz", EstimatorFamily::Szasz),
        ("Kernel", EstimatorFamily::Kernel),
        ("Hermite", EstimatorFamily::HermiteHalf { standardize: false, sigma: None, clip: false }),
        (
            "Hermite (standardized)",
            EstimatorFamily::HermiteHalf { standardize: true, sigma: None, clip: false },
        ),
    ];
    println!("Exp(2), n = {n}, M = {reps}");
    for (name, estimator) in families {
        let start = std::time::Instant::now();
        let config = ExperimentConfig {
            dist: ModelSpec::Exponential { rate: 2.0 },
            estimator,
            param_grid: None,
            n,
            repetitions: reps,
            master_seed: 1,
            quadrature_nodes: 512,
        };
        let r = parameter_sweep(&config)?;
        println!(
            "{name:<24} param {:>7}  MISE {:.4e}  (se {:.1e})  [{:.1?}]",
            r.argmin_param,
            r.argmin_mise,
            r.argmin_se.unwrap_or(0.0),
            start.elapsed()
        );
    }
    Ok(())
}
