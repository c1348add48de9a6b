//! Divergence probe for the parabola multiplier (k = 2).
//!
//! For each point tₙ of a decreasing ladder, the frequencies
//! `ηₙ = γ''(tₙ)/2`, `ξₙ = γ'(tₙ) − γ''(tₙ)tₙ` make the modulated phase
//! g stationary to second order at tₙ (g'(tₙ) = g''(tₙ) = 0 by algebra),
//! so the integral picks up a cubic stationary-point contribution of size
//! `~ 1/(ψ(tₙ)|γ'''(tₙ)|^{1/3})`.  When that amplitude is unbounded as
//! tₙ → 0, |m(ξₙ, ηₙ)| must diverge along the ladder — the measured
//! counterpart of the operator being unbounded.  This module builds the
//! ladder, measures |m| at each point, and fits measured against predicted.

use crate::error::QuadError;
use crate::exec::par_map;
use crate::multiplier::compute_multiplier;
use crate::oscquad::{phase_g, FrequencyPoint, OperatorSpec};
use crate::phase::{ids, GridSpec, PhasePair};
use serde::Serialize;
use std::io::Write;

/// One ladder point: location, the stationary frequencies, the closed-form
/// amplitude prediction, and the measured |m| once [`sharpness_growth`] has
/// run (until then `measured_abs_m` is NaN, `error` infinite, `converged`
/// false).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SharpnessPoint {
    pub t_n: f64,
    pub xi_n: f64,
    pub eta_n: f64,
    /// 1/(|ψ(tₙ)| · |γ'''(tₙ)|^{1/3}) — the stationary-point amplitude scale.
    pub predicted: f64,
    pub measured_abs_m: f64,
    pub error: f64,
    pub converged: bool,
}

/// Measured growth along a sharpness ladder.
///
/// `slope` is the least-squares slope of ln(measured) against ln(predicted)
/// over the converged points; proportionality means slope ≈ 1.  It is NaN
/// when fewer than four points converged or when the predicted sequence is
/// numerically constant (no abscissa spread to fit against — the bounded
/// control case).  `constant` is the geometric mean of measured/predicted,
/// the empirical stand-in for the proportionality constant the asymptotic
/// statement leaves unspecified.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub points: Vec<SharpnessPoint>,
    pub slope: f64,
    /// measured/predicted per converged point, in ladder order.
    pub ratios: Vec<f64>,
    pub constant: f64,
    /// Whether the amplitude quotient 1/(ψ|γ'''|^{1/3}) is unbounded toward
    /// 0 for this pair (audited on a deep grid); when false the ladder is
    /// still measurable but no divergence is predicted.
    pub growth_expected: bool,
}

/// Geometric ladder tₙ = 2^{−n}, starting at the first n ≥ 1 where
/// γ''(tₙ) ≥ 32·γ''(1), so the curvature-split machinery is in-regime from
/// the first point.
pub fn default_t_list(pair: &PhasePair, count: usize) -> Vec<f64> {
    let g21 = pair.gamma2_at_1();
    let mut n = 1i32;
    while n < 60 {
        let t = 2f64.powi(-n);
        if pair.gamma2_val(t) >= 32.0 * g21 * (1.0 - 1e-12) {
            break;
        }
        n += 1;
    }
    (0..count as i32).map(|i| 2f64.powi(-(n + i))).collect()
}

/// Build the stationary sequence over a strictly decreasing ladder in
/// (0, 1).  The construction is specific to the parabola (k = 2): with
/// ηₙ = γ''(tₙ)/2 the curvature correction cancels γ'' exactly, and ξₙ then
/// zeroes the slope.  Each point is audited against the modulated-phase
/// evaluator: relative residuals of g' and g'' above 1e−9 are an error, not
/// a warning, since they would invalidate everything downstream.
pub fn sharpness_points(
    pair: &PhasePair,
    t_list: &[f64],
) -> Result<Vec<SharpnessPoint>, QuadError> {
    if t_list.is_empty() {
        return Err(QuadError::InvalidSpec {
            reason: "sharpness ladder is empty",
        });
    }
    if t_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(QuadError::InvalidSpec {
            reason: "sharpness ladder must be strictly decreasing",
        });
    }
    if !(t_list[0] < 1.0 && t_list[t_list.len() - 1] > 0.0) {
        return Err(QuadError::InvalidSpec {
            reason: "sharpness ladder must lie strictly inside (0, 1)",
        });
    }
    let spec = OperatorSpec::plain(2)?;
    t_list
        .iter()
        .map(|&t| {
            let v = pair.eval(t)?;
            let eta = 0.5 * v.gamma2;
            let xi = v.gamma1 - v.gamma2 * t;
            let predicted = 1.0 / (v.psi.abs() * v.gamma3.abs().powf(1.0 / 3.0));
            let g = phase_g(pair, spec, FrequencyPoint::new(xi, eta), t)?;
            let s1 = g.g1.abs() / (v.gamma1.abs() + xi.abs());
            let s2 = g.g2.abs() / v.gamma2.abs();
            if !(s1 < 1e-9 && s2 < 1e-9) {
                return Err(QuadError::InvalidSpec {
                    reason: "stationarity identity failed beyond tolerance",
                });
            }
            Ok(SharpnessPoint {
                t_n: t,
                xi_n: xi,
                eta_n: eta,
                predicted,
                measured_abs_m: f64::NAN,
                error: f64::INFINITY,
                converged: false,
            })
        })
        .collect()
}

/// Measure |m(ξₙ, ηₙ)| along the ladder and fit the growth.
///
/// Points are evaluated concurrently and assembled back in ladder order.
/// A point whose evaluation fails or does not converge stays flagged
/// (`converged = false`) and is excluded from the ratio sequence and the
/// slope fit; it never aborts the run.
pub fn sharpness_growth(
    pair: &PhasePair,
    t_list: &[f64],
    tol: f64,
) -> Result<GrowthReport, QuadError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance { tol });
    }
    let mut points = sharpness_points(pair, t_list)?;
    let spec = OperatorSpec::plain(2)?;
    let freqs: Vec<FrequencyPoint> = points
        .iter()
        .map(|p| FrequencyPoint::new(p.xi_n, p.eta_n))
        .collect();
    let measured = par_map(&freqs, |f| {
        compute_multiplier(pair, spec, *f, tol)
            .ok()
            .map(|s| (s.abs, s.error, s.converged))
    });
    for (p, m) in points.iter_mut().zip(measured) {
        if let Some((abs, err, conv)) = m {
            p.measured_abs_m = abs;
            p.error = err;
            p.converged = conv;
        }
    }

    let conv: Vec<&SharpnessPoint> = points.iter().filter(|p| p.converged).collect();
    let ratios: Vec<f64> = conv.iter().map(|p| p.measured_abs_m / p.predicted).collect();
    let constant = if ratios.is_empty() {
        f64::NAN
    } else {
        (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
    };
    let slope = fit_loglog_slope(&conv);
    let growth_expected = match pair.check_assumptions(&GridSpec::default()) {
        Ok(report) => report.holds(ids::WEIGHT_THIRD_QUOTIENT_UNBOUNDED),
        // audit grid out of range for this pair: fall back to the ladder's
        // own amplitude trend
        Err(_) => {
            let first = points.first().map(|p| p.predicted).unwrap_or(f64::NAN);
            let last = points.last().map(|p| p.predicted).unwrap_or(f64::NAN);
            last > 10.0 * first
        }
    };

    Ok(GrowthReport {
        points,
        slope,
        ratios,
        constant,
        growth_expected,
    })
}

fn fit_loglog_slope(conv: &[&SharpnessPoint]) -> f64 {
    if conv.len() < 4 {
        return f64::NAN;
    }
    let xs: Vec<f64> = conv.iter().map(|p| p.predicted.ln()).collect();
    let ys: Vec<f64> = conv.iter().map(|p| p.measured_abs_m.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    if sxx <= 1e-20 * n {
        return f64::NAN;
    }
    sxy / sxx
}

/// Two-column CSV of the converged points: header `predicted,measured`,
/// full-precision decimal, ladder order.  Flagged points are omitted (they
/// have no trustworthy measurement); their count is visible in the report.
pub fn write_growth_csv<W: Write>(report: &GrowthReport, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "predicted,measured")?;
    for p in report.points.iter().filter(|p| p.converged) {
        writeln!(out, "{:.16e},{:.16e}", p.predicted, p.measured_abs_m)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscquad::integrate_oscillatory;

    #[test]
    fn stationary_sequence_closed_forms() {
        // β = 2.5, α = 1: γ' = −2.5t^{−3.5}, γ'' = 8.75t^{−4.5}
        let pair = PhasePair::power(2.5, 1.0).unwrap();
        let pts = sharpness_points(&pair, &[0.5, 0.25]).unwrap();
        let eta = 4.375 * 2f64.powf(4.5);
        let xi = -11.25 * 2f64.powf(3.5);
        assert!((pts[0].eta_n - eta).abs() <= 1e-10 * eta, "eta = {}", pts[0].eta_n);
        assert!((pts[0].xi_n - xi).abs() <= 1e-10 * xi.abs(), "xi = {}", pts[0].xi_n);
        // predicted = t^{−1/6}/39.375^{1/3}: halving t multiplies by 2^{1/6}
        let ratio = pts[1].predicted / pts[0].predicted;
        assert!((ratio - 2f64.powf(1.0 / 6.0)).abs() <= 1e-12);
        let expect = 2f64.powf(1.0 / 6.0) / 39.375f64.powf(1.0 / 3.0);
        assert!((pts[0].predicted - expect).abs() <= 1e-12 * expect);
        // stationarity residuals near machine precision
        let spec = OperatorSpec::plain(2).unwrap();
        for p in &pts {
            let g = phase_g(&pair, spec, FrequencyPoint::new(p.xi_n, p.eta_n), p.t_n).unwrap();
            assert!(g.g1.abs() / (p.xi_n.abs()) < 1e-13);
            assert_eq!(g.g2, 0.0, "curvature cancellation is exact in algebra");
        }
    }

    #[test]
    fn default_ladder_starts_where_curvature_is_32x() {
        // β = 2.5: γ''(0.5)/γ''(1) = 2^{4.5} ≈ 22.6 < 32, but 0.25 gives 2^9
        let pair = PhasePair::power(2.5, 1.0).unwrap();
        let list = default_t_list(&pair, 4);
        assert_eq!(list, vec![0.25, 0.125, 0.0625, 0.03125]);
        // β = 3: γ''(0.5)/γ''(1) = 2^5 = 32 exactly — boundary included
        let pair = PhasePair::power(3.0, 1.0).unwrap();
        let list = default_t_list(&pair, 3);
        assert_eq!(list, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn ladder_validation() {
        let pair = PhasePair::power(2.5, 1.0).unwrap();
        assert!(matches!(
            sharpness_points(&pair, &[]),
            Err(QuadError::InvalidSpec { .. })
        ));
        assert!(matches!(
            sharpness_points(&pair, &[0.25, 0.5]),
            Err(QuadError::InvalidSpec { .. })
        ));
        assert!(matches!(
            sharpness_points(&pair, &[1.0, 0.5]),
            Err(QuadError::InvalidSpec { .. })
        ));
        assert!(sharpness_growth(&pair, &[0.5, 0.25], 0.0).is_err());
    }

    #[test]
    fn growth_ladder_diverges_for_supercritical_decay() {
        // β = 2.5, α = 1 sits in the window 2α < β < 3α: amplitude t^{−1/6}
        let pair = PhasePair::power(2.5, 1.0).unwrap();
        let t_list: Vec<f64> = (1..=6).map(|n| 2f64.powi(-n)).collect();
        let report = sharpness_growth(&pair, &t_list, 1e-6).unwrap();
        assert!(report.growth_expected);
        assert_eq!(report.points.len(), 6);
        assert!(
            report.points.iter().all(|p| p.converged),
            "non-converged ladder points: {:?}",
            report
                .points
                .iter()
                .filter(|p| !p.converged)
                .map(|p| p.t_n)
                .collect::<Vec<_>>()
        );
        // measured |m| eventually strictly increasing (first point may sit
        // off-asymptotic)
        let m: Vec<f64> = report.points.iter().map(|p| p.measured_abs_m).collect();
        for i in 1..m.len() - 1 {
            assert!(
                m[i + 1] > m[i],
                "measured not increasing at step {i}: {m:?}"
            );
        }
        assert!(report.ratios.iter().all(|&r| r > 0.0));
        // proportionality: ratio varies by < factor 3 across the last four
        let tail = &report.ratios[report.ratios.len() - 4..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        assert!(hi / lo < 3.0, "ratio drift {lo}..{hi} exceeds factor 3");
        assert!(
            report.slope > 0.8 && report.slope < 1.2,
            "log-log slope {} outside [0.8, 1.2]",
            report.slope
        );
        assert!(report.constant.is_finite() && report.constant > 0.0);

        // CSV emitter: converged rows only, full precision
        let mut csv = Vec::new();
        write_growth_csv(&report, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("predicted,measured\n"));
        assert_eq!(text.lines().count(), 7);
        let first: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, report.points[0].predicted);
    }

    #[test]
    fn measured_point_matches_cubic_model_integral() {
        // at tₙ the phase is locally g(tₙ) + γ'''(tₙ)(t−tₙ)³/6; the model
        // integral with frozen weight must reproduce the measured |m| to
        // leading order, and its size against the closed-form amplitude is
        // the universal cubic-phase constant ∫e^{iv³}dv = 2Γ(4/3)cos(π/6)
        let pair = PhasePair::power(2.5, 1.0).unwrap();
        let t_n = 0.0625_f64;
        let pts = sharpness_points(&pair, &[t_n]).unwrap();
        let p = pts[0];
        let mu = pair.gamma3_val(t_n); // < 0
        // window: |v| ≤ 10 in the normalized variable v = (π|μ|/3)^{1/3}(t−tₙ)
        let v_scale = (std::f64::consts::PI * mu.abs() / 3.0).powf(-1.0 / 3.0);
        let half = 10.0 * v_scale;
        let model = integrate_oscillatory(
            |t| mu * (t - t_n).powi(3) / 6.0,
            |_| 1.0,
            t_n - half,
            t_n + half,
            1e-10,
        )
        .unwrap();
        let model_abs = model.value.norm() / pair.psi_val(t_n);
        // against the closed-form amplitude: constant ≈ 1.5466/(π/3)^{1/3}
        let gamma_4_3 = 0.8929795115692492_f64;
        let line_constant = 2.0 * gamma_4_3 * (std::f64::consts::PI / 6.0).cos();
        let expect = line_constant / (std::f64::consts::PI / 3.0).powf(1.0 / 3.0);
        let got = model_abs / p.predicted;
        assert!(
            (got - expect).abs() <= 0.02 * expect,
            "cubic-model constant {got} vs closed form {expect}"
        );
        // and the actual multiplier sits within the leading-order window
        let spec = OperatorSpec::plain(2).unwrap();
        let m = compute_multiplier(&pair, spec, FrequencyPoint::new(p.xi_n, p.eta_n), 1e-6)
            .unwrap();
        assert!(m.converged);
        let ratio = m.abs / model_abs;
        assert!(
            ratio > 0.75 && ratio < 1.35,
            "measured/model = {ratio} (measured {}, model {model_abs})",
            m.abs
        );
    }

    #[test]
    fn control_experiment_stays_bounded() {
        // β = 3, α = 1 sits on the boundedness boundary: the predicted
        // amplitude is the constant 60^{−1/3}, so no divergence
        let pair = PhasePair::power(3.0, 1.0).unwrap();
        let t_list: Vec<f64> = (1..=6).map(|n| 2f64.powi(-n)).collect();
        let report = sharpness_growth(&pair, &t_list, 1e-5).unwrap();
        assert!(!report.growth_expected);
        assert!(report.points.iter().all(|p| p.converged));
        let expect = 60f64.powf(-1.0 / 3.0);
        for p in &report.points {
            assert!((p.predicted - expect).abs() <= 1e-12 * expect);
        }
        // bounded: the measured sequence stays within a fixed band
        let m: Vec<f64> = report.points.iter().map(|p| p.measured_abs_m).collect();
        let (lo, hi) = m
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        assert!(
            hi / lo < 2.0,
            "control sequence not bounded within factor 2: {m:?}"
        );
        // ratio drift across the last four still within factor 3
        let tail = &report.ratios[report.ratios.len() - 4..];
        let (rlo, rhi) = tail
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        assert!(rhi / rlo < 3.0);
        // constant predicted sequence: slope is undefined, reported as NaN
        assert!(report.slope.is_nan());
    }
}
