//! Print the dyadic piece table and the interpolated series for a power
//! pair: per-level L1 mass and L2 sup against their scaling values, then
//! the series totals and convergence verdicts for a few interpolation
//! weights.
//!
//! Usage: lp_table [beta alpha theta j_max rel_tol series_j_max]

use oscint_core::{
    dyadic_piece_table, interpolation_summary_json, interpolation_table, write_piece_csv,
    OperatorSpec, PhasePair,
};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let beta = args.first().copied().unwrap_or(3.0);
    let alpha = args.get(1).copied().unwrap_or(1.0);
    let theta = args.get(2).copied().unwrap_or(0.5);
    let j_max = args.get(3).copied().unwrap_or(8.0) as u32;
    let rel_tol = args.get(4).copied().unwrap_or(1e-3);
    let series_j_max = args.get(5).copied().unwrap_or(256.0) as u32;

    let pair = PhasePair::power(beta, alpha).expect("valid power pair");
    let spec = OperatorSpec::new(2, theta).expect("valid operator spec");

    let rows = dyadic_piece_table(&pair, spec, j_max, rel_tol).expect("piece table");
    let mut csv = Vec::new();
    write_piece_csv(&rows, &mut csv).expect("csv");
    print!("{}", String::from_utf8(csv).unwrap());

    println!();
    println!("ratios (measured / scaling):");
    let mut failed = 0usize;
    for r in &rows {
        println!(
            "  j = {:>3}   l1 {:.6}   l2 {:.6}   failed_samples {}",
            r.j, r.l1_ratio, r.l2_ratio, r.l2_failed_samples
        );
        failed += r.l2_failed_samples;
    }

    let taus = [0.0, 0.25, theta.min(0.999)];
    let table = interpolation_table(&pair, spec, &taus, series_j_max).expect("series table");
    println!();
    println!(
        "{}",
        serde_json::to_string_pretty(&interpolation_summary_json(&table)).unwrap()
    );

    if failed > 0 {
        eprintln!("{failed} scan samples failed to converge");
        std::process::exit(1);
    }
}
