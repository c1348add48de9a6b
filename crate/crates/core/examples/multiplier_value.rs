//! Compute the multiplier value m(xi, eta) for a power-law pair from the
//! command line and print it with its certified error budget.
//!
//! Usage: multiplier_value [beta] [alpha] [xi] [eta] [tol]
//! Defaults: beta = 3, alpha = 1, xi = 0, eta = 0, tol = 1e-8.

use oscint_core::{FrequencyPoint, OperatorSpec, OscEngine, PhasePair};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("numeric argument"))
        .collect();
    let beta = args.first().copied().unwrap_or(3.0);
    let alpha = args.get(1).copied().unwrap_or(1.0);
    let xi = args.get(2).copied().unwrap_or(0.0);
    let eta = args.get(3).copied().unwrap_or(0.0);
    let tol = args.get(4).copied().unwrap_or(1e-8);

    let pair = PhasePair::power(beta, alpha).expect("valid power pair");
    let spec = OperatorSpec::plain(2).expect("valid operator spec");
    let engine = OscEngine::multiplier(&pair, spec).expect("engine");
    let r = engine
        .eval_from_zero(FrequencyPoint::new(xi, eta), 1.0, tol)
        .expect("evaluation");

    println!("m({xi}, {eta}) for power(beta={beta}, alpha={alpha}):");
    println!("  value       = {:+.12e} {:+.12e} i", r.value.re, r.value.im);
    println!("  |value|     = {:.12e}", r.value.norm());
    println!("  quad error  = {:.3e}", r.abs_error_estimate);
    println!("  tail bound  = {:.3e}  (below t = {:.6e})", r.truncation_tail_bound, r.t_min_used);
    println!("  cells used  = {}", r.cells_used);
    println!("  converged   = {}", r.converged);
    if !r.converged {
        std::process::exit(1);
    }
}
