//! Fit the Szasz estimator to a small lifetime sample and look at the
//! estimate, its density and a few quantiles.

use smoothcdf::estimators::{FittedEstimator, Sample};

fn main() -> smoothcdf::Result<()> {
    // Hours to failure of twelve pumps.
    let hours = vec![0.31, 0.42, 0.55, 0.71, 0.95, 1.08, 1.34, 1.62, 1.97, 2.40, 3.15, 4.02];
    let sample = Sample::new(hours)?;

    for m in [2, 8, 32] {
        let fit = FittedEstimator::szasz(&sample, m)?;
        println!("m = {m}");
        println!("  {:>5}  {:>8}  {:>8}  {:>8}", "x", "EDF", "F_hat", "f_hat");
        for x in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
            println!(
                "  {x:>5.2}  {:>8.4}  {:>8.4}  {:>8.4}",
                sample.edf(x),
                fit.evaluate(x)?,
                fit.szasz_density(x)?
            );
        }
        let q: Vec<String> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&p| fit.quantile(p).map(|q| format!("{q:.3}")))
            .collect::<Result<_, _>>()?;
        println!("  quantiles 10/50/90%: {}", q.join(", "));
    }
    Ok(())
}
