//! Drive the multiplier split and region scan from the command line.
//!
//! Usage: multiplier_scan [beta alpha eta_split xi_max eta_max n tol levels]
//! Defaults: 3 1 8 50 50 6 1e-4 1
//!
//! Prints the curvature split for (0, eta_split), the split-vs-direct
//! consistency check, then runs a TwoSidedLog scan over
//! [-xi_max, xi_max] x [-eta_max, eta_max] and prints the summary JSON and
//! the first CSV rows.  Exits 1 if the split check fails or any scan sample
//! failed to converge.

use oscint_core::{
    compute_multiplier, compute_multiplier_split, scan_multiplier, scan_summary_json,
    write_scan_csv, FrequencyPoint, GridLaw, OperatorSpec, PhasePair, ScanRegion,
};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let get = |i: usize, d: f64| args.get(i).copied().unwrap_or(d);
    let beta = get(0, 3.0);
    let alpha = get(1, 1.0);
    let eta_split = get(2, 8.0);
    let xi_max = get(3, 50.0);
    let eta_max = get(4, 50.0);
    let n = get(5, 6.0) as usize;
    let tol = get(6, 1e-4);
    let levels = get(7, 1.0) as u32;

    let pair = PhasePair::power(beta, alpha).expect("valid power pair");
    let spec = OperatorSpec::plain(2).expect("valid spec");

    let f = FrequencyPoint::new(0.0, eta_split);
    let split = compute_multiplier_split(&pair, spec, f, tol).expect("split evaluation");
    let direct = compute_multiplier(&pair, spec, f, tol).expect("direct evaluation");
    let diff = (split.sum - direct.value).norm();
    let allow = split.total_error() + direct.error;
    println!(
        "split at eta={eta_split}: t0={:.6} l={} a={:.6} b={:.6}",
        split.split.t0, split.split.l, split.split.a, split.split.b
    );
    println!(
        "pieces sum {:+.6e}{:+.6e}i vs direct {:+.6e}{:+.6e}i  |diff|={:.3e} (allowed {:.3e})",
        split.sum.re, split.sum.im, direct.value.re, direct.value.im, diff, allow
    );
    let split_ok = diff <= allow && split.converged() && direct.converged;

    let region = ScanRegion {
        xi_min: -xi_max,
        xi_max,
        n_xi: n,
        eta_min: -eta_max,
        eta_max,
        n_eta: n,
        law: GridLaw::TwoSidedLog,
    };
    let scan = scan_multiplier(&pair, spec, &region, tol, levels).expect("scan");
    println!("scan summary: {}", scan_summary_json(&scan));
    let mut csv = Vec::new();
    write_scan_csv(&scan, &mut csv).expect("csv");
    for line in String::from_utf8(csv).unwrap().lines().take(4) {
        println!("csv: {line}");
    }
    println!(
        "scan: {} samples, {} failed, sup |m| = {:.8e} at (xi, eta) = ({:.6e}, {:.6e})",
        scan.samples.len(),
        scan.n_failed,
        scan.sup_abs,
        scan.argmax.xi,
        scan.argmax.eta
    );

    if !split_ok || scan.n_failed > 0 {
        std::process::exit(1);
    }
}
