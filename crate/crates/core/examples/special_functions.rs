//! χ² tails and binomial tails in log space, far beyond f64 underflow.

use anodet::numerics::{binomial_tail, chi2_isf, chi2_sf};

fn main() -> anodet::Result<()> {
    println!("{:>6} {:>8} {:>14}", "dof", "d", "log10 P(X>d)");
    for &(dof, d) in &[(1, 3.84), (45, 69.96), (45, 500.0), (72, 5000.0)] {
        println!("{dof:>6} {d:>8} {:>14.6}", chi2_sf(d, dof)?.value());
    }

    let tau = chi2_isf(0.01, 45)?;
    println!("\nchi2 quantile with upper tail 0.01, dof 45: {tau:.6}");

    println!("\n{:>6} {:>6} {:>6} {:>14}", "n", "k", "p", "log10 tail");
    for &(n, k, p) in &[(9, 3, 0.01), (9, 9, 0.01), (1000, 100, 0.01), (50_000, 5_000, 0.05)] {
        println!("{n:>6} {k:>6} {p:>6} {:>14.6}", binomial_tail(n, k, p)?.value());
    }
    Ok(())
}
