//! Drive the sharpness ladder from the command line.
//!
//! Usage: sharpness_ladder [beta alpha n_points tol]
//! Defaults: 2.5 1 6 1e-6
//!
//! Builds the default stationary ladder for the power pair, measures
//! |m(ξₙ, ηₙ)| at every point, and prints the per-point table, the ratio
//! sequence, the fitted log-log slope, and whether divergence is expected.
//! Exits 1 if any point failed to converge.

use oscint_core::{default_t_list, sharpness_growth, PhasePair};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let get = |i: usize, d: f64| args.get(i).copied().unwrap_or(d);
    let beta = get(0, 2.5);
    let alpha = get(1, 1.0);
    let n_points = get(2, 6.0) as usize;
    let tol = get(3, 1e-6);

    let pair = PhasePair::power(beta, alpha).expect("valid power pair");
    let t_list = default_t_list(&pair, n_points);
    let report = sharpness_growth(&pair, &t_list, tol).expect("growth report");

    println!("sharpness ladder for power(beta={beta}, alpha={alpha}), tol={tol:.1e}:");
    println!("{:>12} {:>14} {:>14} {:>12} {:>10}", "t_n", "predicted", "measured", "ratio", "conv");
    for p in &report.points {
        println!(
            "{:>12.6} {:>14.6e} {:>14.6e} {:>12.6} {:>10}",
            p.t_n,
            p.predicted,
            p.measured_abs_m,
            p.measured_abs_m / p.predicted,
            p.converged
        );
    }
    println!(
        "slope = {:.4}  constant = {:.4}  growth_expected = {}",
        report.slope, report.constant, report.growth_expected
    );
    if report.points.iter().any(|p| !p.converged) {
        std::process::exit(1);
    }
}
