//! Exact bias and variance of the Szasz estimator for Exp(2) at x = 1,
//! next to the first-order expansion. Also the exact local deficiency.

use smoothcdf::asymptotics::pointwise_coeffs;
use smoothcdf::models::make_exponential;
use smoothcdf::theory_checks::{exact_deficiency_local, szasz_exact_moments};

fn main() -> smoothcdf::Result<()> {
    let dist = make_exponential(2.0)?;
    let x = 1.0;
    let n = 100u64;
    let c = pointwise_coeffs(&dist, x)?;
    println!("bS = {:.6}, VS = {:.6}, sigma2 = {:.6}", c.b_s, c.v_s, c.sigma2);
    println!("{:>7} {:>12} {:>10} {:>14} {:>10}", "m", "bias", "m bias/bS", "n var", "var ratio");
    for m in [10u64, 30, 100, 300, 1_000, 3_000, 10_000] {
        let e = szasz_exact_moments(&dist, m, n, x)?;
        let ratio = (c.sigma2 - n as f64 * e.variance) * (m as f64).sqrt() / c.v_s;
        println!(
            "{m:>7} {:>12.4e} {:>10.5} {:>14.8} {ratio:>10.5}",
            e.bias,
            m as f64 * e.bias / c.b_s,
            n as f64 * e.variance
        );
    }

    println!();
    println!("EDF sample size matching the Szasz MSE, m = 2 n^(2/3)");
    for n in [50u64, 200, 1_000] {
        let m = (2.0 * (n as f64).powf(2.0 / 3.0)).round() as u64;
        let i_l = exact_deficiency_local(&dist, m, n, x)?;
        println!("  n = {n:>5}, m = {m:>4}: EDF needs {i_l}");
    }
    Ok(())
}
