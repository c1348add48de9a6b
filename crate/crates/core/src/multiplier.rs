//! The operator's Fourier multiplier: pointwise evaluation, the three-piece
//! split at the curvature balance point, dyadic cell integrals, and
//! sup-seeking scans over frequency regions.
//!
//! For a frequency pair (ξ, η) the multiplier is
//! `m(ξ,η) = ∫_0^1 e^{2πi(γ(t) − ξt − ηt^k)} · t^{-θ}ψ(t)^{-(1-θ)} dt`.
//! For η > 0 and k ≥ 2 the modulated curvature g'' = γ'' − ηk(k-1)t^{k-2}
//! has a unique zero t₀; curvature dominates below it and the frequency term
//! dominates above it.  The split brackets t₀ two dyadic curvature levels
//! away on each side, so each piece carries a one-sided comparison that the
//! oscillation estimates need.

use crate::error::QuadError;
use crate::exec::par_map;
use crate::oscquad::{FrequencyPoint, OperatorSpec, OscEngine, QuadResult};
use crate::phase::PhasePair;
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Location of the curvature balance point t₀ and the dyadic bracket around
/// it.  Level l is defined by γ''(t₀) ∈ [γ''(1)·2^l, γ''(1)·2^{l+1}); the
/// split points sit two levels below (a) and one level above (b) so that
/// curvature strictly dominates on (0, a] and the frequency term strictly
/// dominates on [b, 1] (the latter only exists when l > 1).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SplitInfo {
    pub t0: f64,
    pub l: u32,
    pub a: f64,
    pub b: f64,
}

/// One evaluated multiplier point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultiplierSample {
    pub freq: FrequencyPoint,
    pub value: Complex64,
    pub abs: f64,
    pub error: f64,
    pub converged: bool,
    pub split: Option<SplitInfo>,
}

/// The multiplier evaluated piecewise across the curvature split.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultiplierSplit {
    pub split: SplitInfo,
    /// ∫ over (0, a]: curvature-dominated piece.
    pub piece1: QuadResult,
    /// ∫ over [a, b]: the stationary neighborhood.
    pub piece2: QuadResult,
    /// ∫ over [b, 1]: frequency-dominated piece; absent when l ≤ 1.
    pub piece3: Option<QuadResult>,
    pub sum: Complex64,
}

impl MultiplierSplit {
    pub fn total_error(&self) -> f64 {
        self.piece1.total_error()
            + self.piece2.total_error()
            + self.piece3.map_or(0.0, |p| p.total_error())
    }

    pub fn converged(&self) -> bool {
        self.piece1.converged
            && self.piece2.converged
            && self.piece3.map_or(true, |p| p.converged)
    }
}

/// Find the zero t₀ of the modulated curvature g'' = γ'' − ηk(k-1)t^{k-2}
/// on (0, 1] and its dyadic bracket.
///
/// Requires k ≥ 2 and η > 0 (otherwise g'' never vanishes and there is
/// nothing to split — [`QuadError::NoSplit`]).  When ηk(k-1) ≤ γ''(1) the
/// curvature dominates everywhere and t₀ = 1.  Otherwise t₀ solves
/// γ''(t) = ηk(k-1)t^{k-2} by bisection in ln t (the left side decreases,
/// the right side does not, so the root is unique); the bisection runs to
/// ~1e-13 relative, far below any quadrature tolerance in use.
pub fn find_t0(pair: &PhasePair, spec: OperatorSpec, eta: f64) -> Result<SplitInfo, QuadError> {
    if spec.k < 2 || !(eta > 0.0) {
        return Err(QuadError::NoSplit);
    }
    let k = spec.k as f64;
    let c = eta * k * (k - 1.0);
    let g21 = pair.gamma2_at_1();
    let phi = |t: f64| pair.gamma2_ln(t).ln_abs - c.ln() - (k - 2.0) * t.ln();
    let t0 = if c <= g21 {
        1.0
    } else {
        let t_floor = 1e-12;
        if phi(t_floor) <= 0.0 {
            // frequency beyond any representable curvature depth; clamp
            t_floor
        } else {
            let (mut lo, mut hi) = (t_floor.ln(), 0.0_f64);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if phi(mid.exp()) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.5 * (lo + hi)).exp()
        }
    };
    // dyadic level of t₀: γ''(t₀) ∈ [γ''(1)2^l, γ''(1)2^{l+1}); the small
    // nudge resolves exact level boundaries to the inclusive side
    let ratio_log2 = (pair.gamma2_ln(t0).ln_abs - g21.ln()) / std::f64::consts::LN_2;
    let l = (ratio_log2 + 1e-9).floor().max(0.0) as u32;
    let ln2 = std::f64::consts::LN_2;
    let a = pair
        .invert_gamma2_ln(g21.ln() + (l as f64 + 2.0) * ln2)
        .map_err(QuadError::from)?;
    let b = if l <= 1 {
        1.0
    } else {
        pair.invert_gamma2_ln(g21.ln() + (l as f64 - 1.0) * ln2)
            .map_err(QuadError::from)?
    };
    Ok(SplitInfo { t0, l, a, b })
}

/// Evaluate m(ξ, η) to the requested total-error tolerance.
pub fn compute_multiplier(
    pair: &PhasePair,
    spec: OperatorSpec,
    f: FrequencyPoint,
    tol: f64,
) -> Result<MultiplierSample, QuadError> {
    let engine = OscEngine::multiplier(pair, spec)?;
    let r = engine.eval_from_zero(f, 1.0, tol)?;
    let split = find_t0(pair, spec, f.eta).ok();
    Ok(MultiplierSample {
        freq: f,
        value: r.value,
        abs: r.value.norm(),
        error: r.total_error(),
        converged: r.converged,
        split,
    })
}

/// Evaluate m(ξ, η) as the three pieces (0, a], [a, b], [b, 1] of the
/// curvature split (the third piece exists only when l > 1).
pub fn compute_multiplier_split(
    pair: &PhasePair,
    spec: OperatorSpec,
    f: FrequencyPoint,
    tol: f64,
) -> Result<MultiplierSplit, QuadError> {
    let split = find_t0(pair, spec, f.eta)?;
    let engine = OscEngine::multiplier(pair, spec)?;
    let piece_tol = tol / 3.0;
    let piece1 = engine.eval_from_zero(f, split.a, piece_tol)?;
    let piece2 = engine.eval_interval(f, split.a, split.b, piece_tol)?;
    let piece3 = if split.l > 1 {
        Some(engine.eval_interval(f, split.b, 1.0, piece_tol)?)
    } else {
        None
    };
    let sum = piece1.value + piece2.value + piece3.map_or(Complex64::new(0.0, 0.0), |p| p.value);
    Ok(MultiplierSplit {
        split,
        piece1,
        piece2,
        piece3,
        sum,
    })
}

/// The multiplier's restriction to dyadic curvature cell j:
/// `m_j = ∫_{t_{j+1}}^{t_j} e^{2πig} t^{-θ}ψ^{-(1-θ)} dt` with
/// γ''(t_j) = γ''(1)·2^j.
pub fn compute_mj(
    pair: &PhasePair,
    spec: OperatorSpec,
    j: u32,
    f: FrequencyPoint,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    let grid = pair.dyadic_grid(j + 1).map_err(QuadError::from)?;
    let (lo, hi) = grid.cell(j);
    OscEngine::multiplier(pair, spec)?.eval_interval(f, lo, hi, tol)
}

// ---------------------------------------------------------------------------
// Frequency-region scans
// ---------------------------------------------------------------------------

/// Spacing law for scan axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GridLaw {
    /// Evenly spaced, endpoints included.
    Linear,
    /// Log-spaced magnitudes; bounds must share one sign and exclude zero.
    Log,
    /// Log-spaced magnitudes on each sign present in the range, half the
    /// points per sign, magnitudes spanning six decades below the extreme.
    TwoSidedLog,
}

/// A rectangular frequency region with its sampling plan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRegion {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    pub eta_min: f64,
    pub eta_max: f64,
    pub n_eta: usize,
    pub law: GridLaw,
}

/// One scanned frequency sample.  Failed evaluations keep their grid slot
/// with `converged = false` and an infinite error so they are visible, never
/// silently dropped.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanSample {
    pub xi: f64,
    pub eta: f64,
    pub value: Complex64,
    pub abs: f64,
    pub error: f64,
    pub converged: bool,
}

/// State of the running maximum after one refinement level.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RefinementStep {
    pub level: u32,
    pub region: ScanRegion,
    pub sup_abs: f64,
    pub argmax_xi: f64,
    pub argmax_eta: f64,
    pub n_samples: usize,
}

/// Full scan output: every sample from every level in deterministic grid
/// order, the global sup over converged samples, and the refinement history.
#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub region: ScanRegion,
    pub samples: Vec<ScanSample>,
    pub sup_abs: f64,
    pub argmax: FrequencyPoint,
    pub history: Vec<RefinementStep>,
    pub n_failed: usize,
}

const LOG_SPAN_DECADES: f64 = 6.0;

fn log_spaced(lo_mag: f64, hi_mag: f64, n: usize, sign: f64, out: &mut Vec<f64>) {
    // ascending magnitudes for sign > 0, descending for sign < 0 (so the
    // overall axis is ascending in value)
    let (a, b) = (lo_mag.ln(), hi_mag.ln());
    for i in 0..n {
        let frac = if n == 1 {
            0.5
        } else {
            i as f64 / (n - 1) as f64
        };
        let u = if sign > 0.0 {
            a + (b - a) * frac
        } else {
            b - (b - a) * frac
        };
        out.push(sign * u.exp());
    }
}

fn axis_points(min: f64, max: f64, n: usize, law: GridLaw) -> Result<Vec<f64>, QuadError> {
    if !(min.is_finite() && max.is_finite() && min <= max) || n == 0 {
        return Err(QuadError::InvalidSpec {
            reason: "scan axis needs finite ordered bounds and at least one point",
        });
    }
    let mut pts = Vec::with_capacity(n);
    match law {
        GridLaw::Linear => {
            for i in 0..n {
                let frac = if n == 1 {
                    0.5
                } else {
                    i as f64 / (n - 1) as f64
                };
                pts.push(min + (max - min) * frac);
            }
        }
        GridLaw::Log => {
            if min > 0.0 {
                log_spaced(min, max, n, 1.0, &mut pts);
            } else if max < 0.0 {
                log_spaced(-max, -min, n, -1.0, &mut pts);
            } else {
                return Err(QuadError::InvalidSpec {
                    reason: "log axis needs nonzero bounds of one sign",
                });
            }
        }
        GridLaw::TwoSidedLog => {
            let span = 10.0_f64.powf(-LOG_SPAN_DECADES);
            if min < 0.0 && max > 0.0 {
                let n_neg = n / 2;
                let n_pos = n - n_neg;
                log_spaced(-min * span, -min, n_neg, -1.0, &mut pts);
                log_spaced(max * span, max, n_pos, 1.0, &mut pts);
            } else if max > 0.0 {
                let lo = if min > 0.0 { min } else { max * span };
                log_spaced(lo, max, n, 1.0, &mut pts);
            } else if min < 0.0 {
                let hi = if max < 0.0 { -max } else { -min * span };
                log_spaced(hi, -min, n, -1.0, &mut pts);
            } else {
                return Err(QuadError::InvalidSpec {
                    reason: "two-sided log axis needs a nonzero bound",
                });
            }
        }
    }
    Ok(pts)
}

fn validate_region(r: &ScanRegion) -> Result<(), QuadError> {
    if r.n_xi == 0 || r.n_eta == 0 {
        return Err(QuadError::InvalidSpec {
            reason: "scan region is empty",
        });
    }
    let finite = r.xi_min.is_finite()
        && r.xi_max.is_finite()
        && r.eta_min.is_finite()
        && r.eta_max.is_finite();
    if !finite || r.xi_min > r.xi_max || r.eta_min > r.eta_max {
        return Err(QuadError::InvalidSpec {
            reason: "scan region bounds must be finite and ordered",
        });
    }
    Ok(())
}

/// Shrink one axis around the running argmax: half the extent (in the
/// sampling space) at the same point count, clamped inside the original
/// axis, so each refinement doubles the sampling density near the argmax.
fn refine_axis(
    prev_min: f64,
    prev_max: f64,
    orig_min: f64,
    orig_max: f64,
    center: f64,
    law: GridLaw,
) -> (f64, f64, GridLaw) {
    match law {
        GridLaw::Linear => {
            let w = (prev_max - prev_min) * 0.5;
            let lo = (center - 0.5 * w).max(orig_min);
            let hi = (center + 0.5 * w).min(orig_max);
            if hi > lo {
                (lo, hi, GridLaw::Linear)
            } else {
                (prev_min, prev_max, GridLaw::Linear)
            }
        }
        GridLaw::Log | GridLaw::TwoSidedLog => {
            if center == 0.0 {
                return (prev_min, prev_max, law);
            }
            let sign = center.signum();
            // previous extent on the argmax side, in ln-magnitude
            let (p_lo, p_hi) = side_magnitudes(prev_min, prev_max, sign, law);
            let (o_lo, o_hi) = side_magnitudes(orig_min, orig_max, sign, law);
            let extent = (p_hi / p_lo).ln() * 0.5;
            let c_ln = center.abs().ln();
            let mut lo_ln = c_ln - 0.5 * extent;
            let mut hi_ln = c_ln + 0.5 * extent;
            lo_ln = lo_ln.max(o_lo.ln());
            hi_ln = hi_ln.min(o_hi.ln());
            if hi_ln <= lo_ln {
                return (prev_min, prev_max, law);
            }
            if sign > 0.0 {
                (lo_ln.exp(), hi_ln.exp(), GridLaw::Log)
            } else {
                (-hi_ln.exp(), -lo_ln.exp(), GridLaw::Log)
            }
        }
    }
}

/// The magnitude range an axis covers on one sign.
fn side_magnitudes(min: f64, max: f64, sign: f64, law: GridLaw) -> (f64, f64) {
    let span = 10.0_f64.powf(-LOG_SPAN_DECADES);
    match law {
        GridLaw::TwoSidedLog => {
            if sign > 0.0 {
                let hi = max.max(0.0);
                (hi * span, hi)
            } else {
                let hi = (-min).max(0.0);
                (hi * span, hi)
            }
        }
        _ => {
            // one-sided range: bounds already share the sign
            if sign > 0.0 {
                (min.abs().min(max.abs()), max.abs().max(min.abs()))
            } else {
                (min.abs().min(max.abs()), min.abs().max(max.abs()))
            }
        }
    }
}

fn refine_region(prev: &ScanRegion, orig: &ScanRegion, argmax: FrequencyPoint) -> ScanRegion {
    let (xi_min, xi_max, law_x) = refine_axis(
        prev.xi_min,
        prev.xi_max,
        orig.xi_min,
        orig.xi_max,
        argmax.xi,
        prev.law,
    );
    let (eta_min, eta_max, law_e) = refine_axis(
        prev.eta_min,
        prev.eta_max,
        orig.eta_min,
        orig.eta_max,
        argmax.eta,
        prev.law,
    );
    // one law per region: refined axes are one-sided, so Log serves both
    // unless the original was linear
    let law = if prev.law == GridLaw::Linear {
        GridLaw::Linear
    } else {
        debug_assert!(law_x != GridLaw::TwoSidedLog && law_e != GridLaw::TwoSidedLog);
        GridLaw::Log
    };
    ScanRegion {
        xi_min,
        xi_max,
        n_xi: prev.n_xi,
        eta_min,
        eta_max,
        n_eta: prev.n_eta,
        law,
    }
}

/// Grid-and-refine driver shared by the full-multiplier scans and the
/// per-cell sup scans: evaluate `eval` over the sampling grid of `region`,
/// then `refinement_levels` times halve the region around the running
/// argmax (same point count) and rescan.  Evaluation runs in parallel when
/// the `parallel` feature is on; ordering and results are identical either
/// way.  `eval` must record its own failures in the returned sample
/// (`converged = false`); failed samples stay in place, are excluded from
/// the sup, and never abort the scan.
pub(crate) fn scan_with<F>(
    region: &ScanRegion,
    refinement_levels: u32,
    eval: F,
) -> Result<ScanResult, QuadError>
where
    F: Fn(FrequencyPoint) -> ScanSample + Sync,
{
    validate_region(region)?;

    let mut samples: Vec<ScanSample> = Vec::new();
    let mut history: Vec<RefinementStep> = Vec::new();
    let mut sup_abs = 0.0_f64;
    let mut argmax = FrequencyPoint::zero();
    let mut n_failed = 0usize;
    let mut current = *region;

    for level in 0..=refinement_levels {
        if level > 0 {
            current = refine_region(&current, region, argmax);
        }
        let xi_pts = axis_points(current.xi_min, current.xi_max, current.n_xi, current.law)?;
        let eta_pts = axis_points(
            current.eta_min,
            current.eta_max,
            current.n_eta,
            current.law,
        )?;
        let mut points = Vec::with_capacity(xi_pts.len() * eta_pts.len());
        for &xi in &xi_pts {
            for &eta in &eta_pts {
                points.push(FrequencyPoint::new(xi, eta));
            }
        }
        let level_samples: Vec<ScanSample> = par_map(&points, |fp| eval(*fp));
        for s in &level_samples {
            if s.converged {
                if s.abs > sup_abs {
                    sup_abs = s.abs;
                    argmax = FrequencyPoint::new(s.xi, s.eta);
                }
            } else {
                n_failed += 1;
            }
        }
        history.push(RefinementStep {
            level,
            region: current,
            sup_abs,
            argmax_xi: argmax.xi,
            argmax_eta: argmax.eta,
            n_samples: level_samples.len(),
        });
        samples.extend(level_samples);
    }

    Ok(ScanResult {
        region: *region,
        samples,
        sup_abs,
        argmax,
        history,
        n_failed,
    })
}

/// Scan |m| over a frequency region, then refine around the running argmax
/// `refinement_levels` times (each level halves the region extent around the
/// argmax at the same point count).  Samples are evaluated in parallel when
/// the `parallel` feature is on; ordering and results are identical either
/// way.  Per-sample failures are recorded in place and excluded from the
/// sup; they never abort the scan.
pub fn scan_multiplier(
    pair: &PhasePair,
    spec: OperatorSpec,
    region: &ScanRegion,
    tol: f64,
    refinement_levels: u32,
) -> Result<ScanResult, QuadError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance { tol });
    }
    // fail fast on constructions scan workers would hit anyway
    OscEngine::multiplier(pair, spec)?;
    scan_with(region, refinement_levels, |fp| {
        match compute_multiplier(pair, spec, fp, tol) {
            Ok(s) => ScanSample {
                xi: fp.xi,
                eta: fp.eta,
                value: s.value,
                abs: s.abs,
                error: s.error,
                converged: s.converged,
            },
            Err(_) => ScanSample {
                xi: fp.xi,
                eta: fp.eta,
                value: Complex64::new(0.0, 0.0),
                abs: 0.0,
                error: f64::INFINITY,
                converged: false,
            },
        }
    })
}

/// Write scan samples as CSV: header `xi,eta,re_m,im_m,abs_m,err`, one row
/// per sample, full-precision decimal (17 significant digits).
pub fn write_scan_csv<W: Write>(result: &ScanResult, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "xi,eta,re_m,im_m,abs_m,err")?;
    for s in &result.samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.xi, s.eta, s.value.re, s.value.im, s.abs, s.error
        )?;
    }
    Ok(())
}

/// JSON summary of a scan: the sup, where it sits, and how hard we looked.
pub fn scan_summary_json(result: &ScanResult) -> serde_json::Value {
    serde_json::json!({
        "sup_abs": result.sup_abs,
        "argmax_xi": result.argmax.xi,
        "argmax_eta": result.argmax.eta,
        "n_samples": result.samples.len(),
        "refinements": result.history.len().saturating_sub(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscquad::integrate_oscillatory;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn power_pair(beta: f64, alpha: f64) -> PhasePair {
        PhasePair::power(beta, alpha).unwrap()
    }

    #[test]
    fn split_point_closed_form() {
        // β = 1, k = 2: γ'' = 2t^{-3}; η = 8 balances at 2t^{-3} = 16 ⇒ t₀ = 1/2
        let pair = power_pair(1.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let info = find_t0(&pair, spec, 8.0).unwrap();
        assert!((info.t0 - 0.5).abs() <= 1e-12, "t0 = {}", info.t0);
        assert_eq!(info.l, 3); // γ''(1/2)/γ''(1) = 16/2 = 2^3
        // a two levels deeper, b one level shallower
        assert!((pair.gamma2_val(info.a) - 2.0 * 32.0).abs() <= 1e-9);
        assert!((pair.gamma2_val(info.b) - 2.0 * 4.0).abs() <= 1e-10);
        assert!(info.a < info.t0 && info.t0 <= info.b);
        // small η: curvature dominates everywhere
        let info = find_t0(&pair, spec, 1.0).unwrap();
        assert_eq!(info.t0, 1.0);
        assert_eq!(info.l, 0);
        assert_eq!(info.b, 1.0);
        // no-split cases
        assert!(matches!(
            find_t0(&pair, OperatorSpec::new(1, 0.0).unwrap(), 8.0),
            Err(QuadError::NoSplit)
        ));
        assert!(matches!(find_t0(&pair, spec, -3.0), Err(QuadError::NoSplit)));
        assert!(matches!(find_t0(&pair, spec, 0.0), Err(QuadError::NoSplit)));
    }

    #[test]
    fn split_invariants_across_eta_range() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        for exp in 0..14 {
            let eta = 1.5 * 2.0_f64.powi(exp);
            let info = find_t0(&pair, spec, eta).unwrap();
            // the balance inequality at t₀ (equality when interior)
            let lhs = pair.gamma2_val(info.t0);
            let rhs = 2.0 * eta; // ηk(k-1)t^{k-2} with k = 2
            assert!(
                lhs >= rhs * (1.0 - 1e-10),
                "eta = {eta}: gamma''(t0) = {lhs} < {rhs}"
            );
            assert!(info.a < info.t0 && info.t0 <= info.b * (1.0 + 1e-12));
            // dyadic bracket: t_{l+1} < t0 ≤ t_l
            let tl = pair
                .invert_gamma2_ln(pair.gamma2_at_1().ln() + info.l as f64 * std::f64::consts::LN_2)
                .unwrap();
            let tl1 = pair
                .invert_gamma2_ln(
                    pair.gamma2_at_1().ln() + (info.l as f64 + 1.0) * std::f64::consts::LN_2,
                )
                .unwrap();
            assert!(
                tl1 * (1.0 - 1e-9) < info.t0 && info.t0 <= tl * (1.0 + 1e-9),
                "eta = {eta}: bracket violated: {tl1} < {} <= {tl}",
                info.t0
            );
        }
    }

    #[test]
    fn curvature_dominates_first_piece_and_frequency_the_third() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        for &eta in &[5.0, 50.0, 500.0, 5000.0] {
            let info = find_t0(&pair, spec, eta).unwrap();
            let freq_term = |_t: f64| eta * 2.0; // ηk(k-1)t^{k-2}, k = 2
            // on (0, a]: modulated curvature keeps at least half of γ''
            for i in 0..300 {
                let t = info.a * (1e-6_f64).powf(1.0 - i as f64 / 299.0);
                let g2 = pair.gamma2_val(t) - freq_term(t);
                assert!(
                    g2 >= 0.5 * pair.gamma2_val(t) * (1.0 - 1e-12),
                    "eta = {eta}, t = {t}: curvature not dominant on piece 1"
                );
            }
            // on [b, 1] (when it exists): the frequency term dominates γ''
            if info.l > 1 {
                for i in 0..300 {
                    let t = info.b + (1.0 - info.b) * i as f64 / 299.0;
                    assert!(
                        freq_term(t) >= pair.gamma2_val(t) * (1.0 - 1e-12),
                        "eta = {eta}, t = {t}: frequency not dominant on piece 3"
                    );
                }
            }
        }
    }

    #[test]
    fn split_pieces_sum_to_direct_value() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let tol = 1e-6;
        for _ in 0..100 {
            let eta = 10.0_f64.powf(rng.gen_range(0.5..2.5));
            let xi = if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
                * 10.0_f64.powf(rng.gen_range(0.0..2.5));
            let f = FrequencyPoint::new(xi, eta);
            let split = compute_multiplier_split(&pair, spec, f, tol).unwrap();
            let direct = compute_multiplier(&pair, spec, f, tol).unwrap();
            let diff = (split.sum - direct.value).norm();
            assert!(
                diff <= 2.0 * (tol + tol),
                "(xi, eta) = ({xi}, {eta}): |pieces - direct| = {diff}"
            );
            assert!(
                diff <= split.total_error() + direct.error + 1e-9,
                "(xi, eta) = ({xi}, {eta}): disagreement {diff} exceeds stated errors"
            );
        }
    }

    #[test]
    fn middle_piece_obeys_the_stationary_bound() {
        // |piece2| ≤ C · |γ'''(b)|^{-1/3} / |ψ(a)| with one C across an η sweep
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let mut worst = 0.0_f64;
        for &eta in &[10.0, 100.0, 1000.0, 10000.0] {
            let split = compute_multiplier_split(
                &pair,
                spec,
                FrequencyPoint::new(0.0, eta),
                1e-6,
            )
            .unwrap();
            let scale = pair.gamma3_val(split.split.b).abs().powf(-1.0 / 3.0)
                / pair.psi_val(split.split.a).abs();
            let ratio = split.piece2.value.norm() / scale;
            worst = worst.max(ratio);
        }
        assert!(
            worst <= 8.0,
            "middle-piece constant {worst} exceeds the stationary-phase scale"
        );
        assert!(worst > 0.0);
    }

    #[test]
    fn line_curve_folds_frequencies_together() {
        // k = 1: t^k = t, so m(ξ, η) = m(ξ + η, 0)
        let pair = power_pair(2.0, 1.0);
        let spec = OperatorSpec::new(1, 0.0).unwrap();
        let a = compute_multiplier(&pair, spec, FrequencyPoint::new(37.5, -12.25), 1e-8).unwrap();
        let b = compute_multiplier(&pair, spec, FrequencyPoint::new(25.25, 0.0), 1e-8).unwrap();
        assert!(
            (a.value - b.value).norm() <= a.error + b.error + 1e-9,
            "collapsed-frequency identity violated: {:?} vs {:?}",
            a.value,
            b.value
        );
    }

    #[test]
    fn multiplier_value_matches_substitution_oracle() {
        // β = 3, θ = 0: m(0,0) = (1/3)∫_1^∞ e^{2πiu} u^{-2/3} du via u = t^{-3}
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let m = compute_multiplier(&pair, spec, FrequencyPoint::zero(), 1e-8).unwrap();
        assert!(m.converged);
        assert!(m.error <= 1e-8);
        assert_eq!(m.abs, m.value.norm());
        let head = integrate_oscillatory(|u| u, |u| u.powf(-2.0 / 3.0), 1.0, 200.0, 1e-12).unwrap();
        // four-term endpoint expansion of the remainder beyond 200
        let p = 2.0 / 3.0;
        let u0: f64 = 200.0;
        let d = Complex64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI));
        let phi = [
            u0.powf(-p),
            -p * u0.powf(-p - 1.0),
            p * (p + 1.0) * u0.powf(-p - 2.0),
            -p * (p + 1.0) * (p + 2.0) * u0.powf(-p - 3.0),
        ];
        let pb = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * u0);
        let tail = pb * (-d * phi[0] + d * d * phi[1] - d * d * d * phi[2] + d * d * d * d * phi[3]);
        let oracle = (head.value + tail) / 3.0;
        let allow = (head.abs_error_estimate + phi[3].abs()) / 3.0 + m.error + 1e-9;
        assert!(
            (m.value - oracle).norm() <= allow,
            "multiplier {:?} vs oracle {:?}",
            m.value,
            oracle
        );
    }

    #[test]
    fn reversing_the_phase_conjugates_the_multiplier() {
        let pair = power_pair(2.5, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let f = FrequencyPoint::new(30.0, 70.0);
        let engine = OscEngine::multiplier(&pair, spec).unwrap();
        let fwd = engine.eval_interval(f, 0.02, 1.0, 1e-9).unwrap();
        let g = |t: f64| -(pair.gamma_val(t) - f.xi * t - f.eta * t * t);
        let w = |t: f64| 1.0 / pair.psi_val(t);
        let rev = integrate_oscillatory(g, w, 0.02, 1.0, 1e-9).unwrap();
        assert!(
            (fwd.value.conj() - rev.value).norm()
                <= fwd.total_error() + rev.abs_error_estimate + 1e-11
        );
    }

    #[test]
    fn dyadic_cells_tile_the_truncated_multiplier() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::new(2, 0.5).unwrap();
        let f = FrequencyPoint::new(2.0, 3.0);
        let j_top: u32 = 15;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut errs = 0.0;
        for j in 0..=j_top {
            let r = compute_mj(&pair, spec, j, f, 1e-11).unwrap();
            assert!(r.converged);
            sum += r.value;
            errs += r.total_error();
        }
        let grid = pair.dyadic_grid(j_top + 1).unwrap();
        let t_bottom = grid.breakpoints[(j_top + 1) as usize];
        let full = OscEngine::multiplier(&pair, spec)
            .unwrap()
            .eval_interval(f, t_bottom, 1.0, 1e-10)
            .unwrap();
        let rel = (sum - full.value).norm() / full.value.norm();
        assert!(
            rel < 1e-8,
            "cell sum vs truncated multiplier: relative difference {rel}"
        );
        assert!(errs < 1e-9);
    }

    #[test]
    fn cell_integral_stable_under_tolerance_refinement() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::new(2, 0.5).unwrap();
        let coarse = compute_mj(&pair, spec, 4, FrequencyPoint::zero(), 5e-9).unwrap();
        let fine = compute_mj(&pair, spec, 4, FrequencyPoint::zero(), 5e-10).unwrap();
        assert!((coarse.value - fine.value).norm() <= 1e-9);
    }

    #[test]
    fn unweighted_cell_matches_explicit_kernel() {
        // θ = 0 reduces the cell weight to 1/ψ exactly
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let f = FrequencyPoint::new(1.0, 2.0);
        let r = compute_mj(&pair, spec, 3, f, 1e-10).unwrap();
        let grid = pair.dyadic_grid(4).unwrap();
        let (lo, hi) = grid.cell(3);
        let g = |t: f64| pair.gamma_val(t) - f.xi * t - f.eta * t * t;
        let w = |t: f64| 1.0 / pair.psi_val(t);
        let direct = integrate_oscillatory(g, w, lo, hi, 1e-10).unwrap();
        assert!((r.value - direct.value).norm() <= 1e-9);
    }

    #[test]
    fn scan_is_deterministic_and_reports_its_sup() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let region = ScanRegion {
            xi_min: -50.0,
            xi_max: 50.0,
            n_xi: 6,
            eta_min: -50.0,
            eta_max: 50.0,
            n_eta: 6,
            law: GridLaw::TwoSidedLog,
        };
        let a = scan_multiplier(&pair, spec, &region, 1e-4, 1).unwrap();
        let b = scan_multiplier(&pair, spec, &region, 1e-4, 1).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_scan_csv(&a, &mut csv_a).unwrap();
        write_scan_csv(&b, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b, "identical scans must emit identical bytes");
        // sup matches the stored samples
        let max_abs = a
            .samples
            .iter()
            .filter(|s| s.converged)
            .map(|s| s.abs)
            .fold(0.0_f64, f64::max);
        assert_eq!(a.sup_abs, max_abs);
        assert_eq!(a.n_failed, 0);
        // refinement history: density increases (extent shrinks at fixed counts)
        assert_eq!(a.history.len(), 2);
        let ext = |r: &ScanRegion| (r.xi_max - r.xi_min) * (r.eta_max - r.eta_min);
        assert!(ext(&a.history[1].region) < ext(&a.history[0].region));
        // header format
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with("xi,eta,re_m,im_m,abs_m,err\n"));
        let row1 = text.lines().nth(1).unwrap();
        assert_eq!(row1.split(',').count(), 6);
        // full-precision roundtrip
        let xi_back: f64 = row1.split(',').next().unwrap().parse().unwrap();
        assert_eq!(xi_back, a.samples[0].xi);
    }

    #[test]
    fn scan_sup_stabilizes_under_refinement() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let region = ScanRegion {
            xi_min: -100.0,
            xi_max: 100.0,
            n_xi: 8,
            eta_min: -100.0,
            eta_max: 100.0,
            n_eta: 8,
            law: GridLaw::TwoSidedLog,
        };
        let r = scan_multiplier(&pair, spec, &region, 1e-5, 2).unwrap();
        assert_eq!(r.history.len(), 3);
        let last = r.history[2].sup_abs;
        let prev = r.history[1].sup_abs;
        assert!(last >= prev, "running sup must be monotone");
        assert!(
            (last - prev) <= 0.05 * last,
            "sup still moving after refinement: {prev} -> {last}"
        );
        let json = scan_summary_json(&r);
        assert_eq!(json["n_samples"], serde_json::json!(r.samples.len()));
        assert_eq!(json["refinements"], serde_json::json!(2));
    }

    #[test]
    fn empty_region_is_rejected() {
        let pair = power_pair(3.0, 1.0);
        let spec = OperatorSpec::plain(2).unwrap();
        let region = ScanRegion {
            xi_min: 0.0,
            xi_max: 0.0,
            n_xi: 0,
            eta_min: -1.0,
            eta_max: 1.0,
            n_eta: 4,
            law: GridLaw::Linear,
        };
        assert!(matches!(
            scan_multiplier(&pair, spec, &region, 1e-4, 0),
            Err(QuadError::InvalidSpec { .. })
        ));
    }
}
