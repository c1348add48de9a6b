//! Throwaway probe: full criterion-3 scans (both pairs) at acceptance settings.

use oscint_core::{scan_multiplier, GridLaw, OperatorSpec, PhasePair, ScanRegion};
use std::time::Instant;

fn main() {
    let spec = OperatorSpec::new(2, 0.5).unwrap();
    let region = ScanRegion {
        xi_min: -1e4,
        xi_max: 1e4,
        n_xi: 200,
        eta_min: -1e4,
        eta_max: 1e4,
        n_eta: 200,
        law: GridLaw::TwoSidedLog,
    };
    for (name, pair) in [
        ("power(3,1)", PhasePair::power(3.0, 1.0).unwrap()),
        ("exp(3,1)", PhasePair::exp(3.0, 1.0).unwrap()),
    ] {
        let t0 = Instant::now();
        let r = scan_multiplier(&pair, spec, &region, 1e-5, 3).unwrap();
        let sup2 = r.history[2].sup_abs;
        let sup3 = r.history[3].sup_abs;
        println!(
            "{name}: {:.1?}  sup2 = {:.9e} at ({:.4e}, {:.4e})  sup3 = {:.9e}  rel change = {:.4}%  failed = {}",
            t0.elapsed(),
            sup2,
            r.history[2].argmax_xi,
            r.history[2].argmax_eta,
            sup3,
            100.0 * (sup3 - sup2) / sup2,
            r.n_failed
        );
        for h in &r.history {
            println!(
                "  level {}: sup {:.6e} at ({:.4e}, {:.4e})  [{} samples]",
                h.level, h.sup_abs, h.argmax_xi, h.argmax_eta, h.n_samples
            );
        }
    }
}
