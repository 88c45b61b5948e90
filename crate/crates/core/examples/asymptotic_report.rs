//! Bias and variance coefficients, optimal orders and deficiencies for the
//! benchmark models.

use smoothcdf::asymptotics::{
    c_opt, deficiency_asymptotic, m_opt_mise, m_opt_mse, mise_constants, pointwise_coeffs, DeficiencyBasis,
    OrderRegime,
};
use smoothcdf::models::{benchmark_models, make_beta};

fn main() -> smoothcdf::Result<()> {
    let mut models = benchmark_models();
    models.push(make_beta(3.0, 3.0)?);

    println!("pointwise at x = 1 (x = 0.4 for beta), n = 100");
    println!("{:>9} {:>9} {:>9} {:>8}  model", "sigma2", "bS", "VS", "m_opt");
    for d in &models {
        let x = if d.support().1 <= 1.0 { 0.4 } else { 1.0 };
        let c = pointwise_coeffs(d, x)?;
        let m = m_opt_mse(&c, 100.0).map(|o| format!("{:.1}", o.m_opt)).unwrap_or_else(|_| "-".into());
        println!("{:>9.5} {:>9.5} {:>9.5} {m:>8}  {}", c.sigma2, c.b_s, c.v_s, d.name());
    }

    println!();
    println!("global, weight e^(-x) f(x)");
    // i_G − n: extra observations the EDF needs at n = 500 when m = c_opt n^(2/3).
    println!(
        "{:>8} {:>8} {:>8} {:>10} {:>7} {:>9}  model",
        "C1", "C2", "C3", "m_opt n=50", "c_opt", "i_G - n"
    );
    for d in &models {
        let k = mise_constants(d, 1.0)?;
        let m50 = m_opt_mise(&k, 50.0)?.m_opt;
        let co = c_opt(&k)?;
        let extra =
            deficiency_asymptotic(DeficiencyBasis::Global(&k), 500.0, OrderRegime::Proportional { c: co })?;
        println!(
            "{:>8.5} {:>8.5} {:>8.5} {m50:>10.1} {co:>7.4} {extra:>9.1}  {}",
            k.c1,
            k.c2,
            k.c3,
            d.name()
        );
    }
    Ok(())
}
