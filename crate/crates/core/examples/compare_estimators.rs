//! One Exp(2) sample of size 50, every estimator at a reasonable
//! parameter, scored by ISE against the true distribution function.
//!
//! Usage: cargo run --release --example compare_estimators -- [seed]

use smoothcdf::estimators::FittedEstimator;
use smoothcdf::models::make_exponential;
use smoothcdf::simulation::{edf_ise, ise_fitted, IseGrid};

fn main() -> smoothcdf::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(2, |a| a.parse().expect("seed must be an integer"));
    let dist = make_exponential(2.0)?;
    let sample = dist.sample(seed, 50)?;
    let grid = IseGrid::new(&dist, 512)?;
    let sigma = dist.std_dev();

    let fits = [
        ("Szasz m=17", FittedEstimator::szasz(&sample, 17)?),
        ("kernel h=0.12", FittedEstimator::kernel(&sample, 0.12)?),
        ("Hermite N=40", FittedEstimator::hermite_half(&sample, 40)?),
        ("Hermite std N=30", FittedEstimator::hermite_half_standardized(&sample, 30, sigma)?),
    ];

    println!("{:<18} {:>10}", "estimator", "ISE");
    println!("{:<18} {:>10.3e}", "EDF", edf_ise(&sample, &dist));
    for (name, fit) in &fits {
        println!("{name:<18} {:>10.3e}", ise_fitted(fit, &dist, &grid));
    }

    println!();
    println!("{:>5} {:>8} {:>8} {:>8} {:>8} {:>8}", "x", "F", "Szasz", "kernel", "Herm", "Herm std");
    for x in [0.1, 0.3, 0.6, 1.0, 1.5, 2.5] {
        print!("{x:>5.2} {:>8.4}", dist.cdf(x));
        for (_, fit) in &fits {
            print!(" {:>8.4}", fit.evaluate(x)?);
        }
        println!();
    }
    Ok(())
}
