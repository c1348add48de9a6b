//! Throwaway probe: pre-validate acceptance numerics and runtimes.

use num_complex::Complex64;
use oscint_core::{
    compute_multiplier, compute_multiplier_split, dyadic_piece_table, sharpness_growth,
    FrequencyPoint, OperatorSpec, PhasePair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let spec = OperatorSpec::new(2, 0.5).unwrap();
    let t_list: Vec<f64> = (1..=6).map(|n| 2f64.powi(-n)).collect();

    // --- criterion 5 ladder: (2.5, 1) ---
    let t0 = Instant::now();
    let p25 = PhasePair::power(2.5, 1.0).unwrap();
    let rep = sharpness_growth(&p25, &t_list, 1e-5).unwrap();
    println!("sharpness (2.5,1) in {:.2?}", t0.elapsed());
    for p in &rep.points {
        println!(
            "  t = {:10.6}  |m| = {:.6e}  conv = {}  predicted = {:.6e}",
            p.t_n, p.measured_abs_m, p.converged, p.predicted
        );
    }
    let xs: Vec<f64> = rep.points.iter().map(|p| p.t_n.ln()).collect();
    let ys: Vec<f64> = rep.points.iter().map(|p| p.measured_abs_m.ln()).collect();
    let n = xs.len() as f64;
    let (xm, ym) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    println!("  slope ln|m| vs ln t = {:.6} (target -1/6 = -0.1667, band [-0.2, -0.1333])", sxy / sxx);
    let increasing = rep.points.windows(2).skip(1).all(|w| w[1].measured_abs_m > w[0].measured_abs_m);
    println!("  increasing from n>=2: {increasing}");

    // --- criterion 5 control: (3, 1) ---
    let t0 = Instant::now();
    let p31 = PhasePair::power(3.0, 1.0).unwrap();
    let ctl = sharpness_growth(&p31, &t_list, 1e-5).unwrap();
    println!("control (3,1) in {:.2?}", t0.elapsed());
    for p in &ctl.points {
        println!("  t = {:10.6}  |m| = {:.6e}  conv = {}", p.t_n, p.measured_abs_m, p.converged);
    }
    let cmax = ctl.points.iter().map(|p| p.measured_abs_m).fold(0.0f64, f64::max);
    println!("  control max |m| = {cmax:.6e}  (1.1 * 0.315 = {:.4e})", 1.1 * 0.315);

    // --- criterion 8: piece table to j = 14 ---
    let t0 = Instant::now();
    let table = dyadic_piece_table(&p31, spec, 14, 1e-3).unwrap();
    println!("piece table j<=14 in {:.2?}", t0.elapsed());
    for r in &table {
        println!("  j = {:2}  l1_ratio = {:.6}  l2_ratio = {:.6}  failed = {}", r.j, r.l1_ratio, r.l2_ratio, r.l2_failed_samples);
    }
    for (name, f) in [("l1", 0), ("l2", 1)] {
        let ratios: Vec<f64> = table.iter().map(|r| if f == 0 { r.l1_ratio } else { r.l2_ratio }).collect();
        let (lo10, hi10) = ratios[..11].iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let hi14 = ratios.iter().fold(0.0f64, |b, &x| b.max(x));
        println!("  {name}: j<=10 spread {lo10:.4}..{hi10:.4} factor {:.3}; max change to j<=14: {:.2}%", hi10 / lo10, 100.0 * (hi14 - hi10).abs() / hi10);
    }

    // --- criterion 4: split vs direct on 100 random frequencies ---
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut fails = 0;
    for _ in 0..100 {
        let xi = rng.gen_range(-2000.0..2000.0);
        let eta = (rng.gen_range(0.1f64.ln()..2000.0f64.ln())).exp();
        let fp = FrequencyPoint::new(xi, eta);
        let sp = compute_multiplier_split(&p31, spec, fp, 1e-6).unwrap();
        let di = compute_multiplier(&p31, spec, fp, 1e-6).unwrap();
        let diff = (sp.sum - di.value).norm();
        let budget = 2.0 * (sp.total_error() + di.error);
        if diff > budget {
            fails += 1;
            println!("  FAIL at ({xi:.3}, {eta:.3}): diff {diff:.3e} > budget {budget:.3e}");
        }
        worst = worst.max(diff / budget);
        let _ = Complex64::new(0.0, 0.0);
    }
    println!("split consistency in {:.2?}: worst diff/budget = {worst:.4}, fails = {fails}", t0.elapsed());
}
