//! Per-level size estimates for the dyadic pieces of the multiplier and
//! the interpolated series that decides the piecewise operator bounds.
//!
//! Level `j` of the decomposition owns the cell `(t_{j+1}, t_j)` on which
//! the curvature passes `gamma''(1) 2^j`.  Two numbers describe the piece,
//! both against the scaling quantity `X_j = t_j |gamma'''(t_j)|^{1/3}`:
//!
//! * an L1-type mass — the integral of the positive kernel weight
//!   `t^{-theta} psi(t)^{-(1-theta)}` over the cell, whose scaling value
//!   is `X_j^{1-theta}` ([`tj_l1_bound`]);
//! * an L2-type size — the sup of `|m_j|` over a frequency box sized to
//!   the cell, whose scaling value is `X_j^{-theta}` ([`tj_l2_sup`]).
//!
//! Interpolating the two with weight `tau` gives per-level bounds
//! `X_j^{tau - theta}`, so the summed series decays geometrically exactly
//! when `tau < theta` (`X_j` grows dyadically); [`interpolation_table`]
//! assembles those series with their partial sums and a convergence
//! verdict, one row per `tau`, with the exponent `p` recovered from
//! `1/p = tau + (1 - tau)/2`.
//!
//! Both measured quantities are grid quantities — a weight integral at
//! fixed tolerance and a sup over finitely many frequency samples — so
//! they are honest lower-bound surrogates for the true norms; the ratio
//! fields report measured/scaling so growth in `j` is visible directly.

use crate::error::QuadError;
use crate::exec::par_map;
use crate::multiplier::{compute_mj, scan_with, GridLaw, ScanRegion, ScanSample};
use crate::oscquad::{integrate_oscillatory, OperatorSpec};
use crate::phase::PhasePair;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::io::Write;

// ---------------------------------------------------------------------------
// Per-piece reports
// ---------------------------------------------------------------------------

/// L1 half of a piece report: measured weight mass of cell j and its
/// scaling value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct L1Piece {
    pub j: u32,
    /// Integral of t^{-theta} psi(t)^{-(1-theta)} over (t_{j+1}, t_j).
    pub measured: f64,
    /// Scaling value X_j^{1-theta} with X_j = t_j |gamma'''(t_j)|^{1/3}.
    pub bound: f64,
    /// measured / bound.
    pub ratio: f64,
    /// Absolute quadrature error estimate for `measured`.
    pub quad_error: f64,
}

/// L2 half of a piece report: measured sup of |m_j| over a frequency box
/// and its scaling value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct L2Piece {
    pub j: u32,
    /// Sup of |m_j| over the converged scan samples.
    pub measured: f64,
    /// Scaling value X_j^{-theta}.
    pub bound: f64,
    /// measured / bound.
    pub ratio: f64,
    /// The frequency box that was scanned.
    pub region: ScanRegion,
    /// Total samples evaluated (all refinement levels).
    pub n_samples: usize,
    /// Samples that failed to converge (excluded from the sup).
    pub n_failed: usize,
}

/// Combined size report for one dyadic piece.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DyadicPieceReport {
    pub j: u32,
    pub l1_measured: f64,
    pub l1_bound: f64,
    pub l2_measured: f64,
    pub l2_bound: f64,
    pub l1_ratio: f64,
    pub l2_ratio: f64,
    /// Scan samples excluded from the L2 sup because they failed.
    pub l2_failed_samples: usize,
}

/// One interpolated series: exponent data and the partial sums of
/// sum_j l1_bound_j^tau * l2_bound_j^{1-tau} = sum_j X_j^{tau-theta}.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolationSpec {
    pub theta: f64,
    pub tau: f64,
    /// Lebesgue exponent p = 2 / (1 + tau).
    pub p: f64,
    /// 1/p stored as (1 + tau)/2 so the identity 1/p = tau + (1-tau)/2
    /// holds exactly in the emitted decimals.
    pub one_over_p: f64,
    /// Per-level interpolated bounds X_j^{tau-theta}, j = 0..=j_max.
    pub terms: Vec<f64>,
    /// Running partial sums of `terms` (same length, increasing).
    pub partial_sums: Vec<f64>,
    /// Final partial sum.
    pub total: f64,
    /// Sum of the last quarter of the terms.
    pub last_quarter_increment: f64,
    /// Cauchy heuristic: the last quarter added less than 1% of the total.
    pub convergent: bool,
}

// ---------------------------------------------------------------------------
// Scaling values
// ---------------------------------------------------------------------------

/// ln X_j at the cell's right edge t_j, computed in log space so deep
/// levels stay finite: ln t + ln|gamma'''(t)| / 3.
fn ln_scaling_x(pair: &PhasePair, t_j: f64) -> Result<f64, QuadError> {
    // validated evaluation catches non-finite derivative values first
    pair.eval(t_j)?;
    Ok(t_j.ln() + pair.gamma3_ln(t_j).ln_abs / 3.0)
}

/// Right edge t_j of cell j (the j-th dyadic breakpoint, t_0 = 1).
fn cell_edges(pair: &PhasePair, j: u32) -> Result<(f64, f64), QuadError> {
    let grid = pair.dyadic_grid(j + 1)?;
    Ok(grid.cell(j))
}

// ---------------------------------------------------------------------------
// L1 mass of a piece
// ---------------------------------------------------------------------------

/// Measure the L1 mass of piece j — the integral of the positive weight
/// t^{-theta} psi(t)^{-(1-theta)} over the cell (t_{j+1}, t_j) — and
/// compare it to the scaling value X_j^{1-theta}.
///
/// The weight carries no oscillation, so plain adaptive quadrature at an
/// absolute tolerance of 1e-11 times the scaling value is exact for all
/// practical purposes; the report carries the actual error estimate.
pub fn tj_l1_bound(pair: &PhasePair, spec: OperatorSpec, j: u32) -> Result<L1Piece, QuadError> {
    let theta = spec.theta;
    let (lo, hi) = cell_edges(pair, j)?;
    let bound = ((1.0 - theta) * ln_scaling_x(pair, hi)?).exp();
    if !bound.is_finite() {
        return Err(QuadError::InvalidSpec {
            reason: "scaling value overflows at this depth",
        });
    }
    let weight = |t: f64| t.powf(-theta) * pair.psi_val(t).powf(theta - 1.0);
    let q = integrate_oscillatory(|_| 0.0, weight, lo, hi, 1e-11 * bound)?;
    if !q.converged {
        return Err(QuadError::ToleranceUnreachable { level: j as u64 });
    }
    let measured = q.value.re;
    Ok(L1Piece {
        j,
        measured,
        bound,
        ratio: measured / bound,
        quad_error: q.abs_error_estimate,
    })
}

// ---------------------------------------------------------------------------
// L2 sup of a piece
// ---------------------------------------------------------------------------

/// Default frequency box for the piece-j sup scan, sized to the cell's
/// most oscillatory edge t_{j+1}: |eta| up to 4 gamma''(t_{j+1}) / (k(k-1))
/// and |xi| up to 4 |gamma'(t_{j+1})|, so every frequency at which the
/// phase can be stationary inside the cell lies well inside the box.
///
/// The sampling law is linear: the sup ridge of a single cell sits at
/// frequencies comparable to the cell's own derivative scales — within a
/// decade of the box edge — so log-spaced magnitudes would spend most of
/// the budget far below it.  For k = 1 the eta direction only shifts xi,
/// so the box collapses to the xi axis (eta = 0) with the full point
/// budget spent there.
pub fn default_cell_region(
    pair: &PhasePair,
    spec: OperatorSpec,
    j: u32,
) -> Result<ScanRegion, QuadError> {
    let (lo, _) = cell_edges(pair, j)?;
    let v = pair.eval(lo)?;
    let xi_max = 4.0 * v.gamma1.abs();
    if spec.k == 1 {
        return Ok(ScanRegion {
            xi_min: -xi_max,
            xi_max,
            n_xi: 36,
            eta_min: 0.0,
            eta_max: 0.0,
            n_eta: 1,
            law: GridLaw::Linear,
        });
    }
    let kk = spec.k as f64;
    let eta_max = 4.0 * v.gamma2 / (kk * (kk - 1.0));
    Ok(ScanRegion {
        xi_min: -xi_max,
        xi_max,
        n_xi: 6,
        eta_min: -eta_max,
        eta_max,
        n_eta: 6,
        law: GridLaw::Linear,
    })
}

/// Measure the sup of |m_j| over a frequency box (the [`default_cell_region`]
/// when `region` is `None`) and compare it to the scaling value X_j^{-theta}.
///
/// The scan samples the box, refines once around the argmax, and excludes
/// failed samples from the sup while counting them in `n_failed`.  `tol` is
/// the absolute per-sample quadrature tolerance; a value near 1e-3 times
/// the expected sup is plenty for a sup accurate to grid resolution.
pub fn tj_l2_sup(
    pair: &PhasePair,
    spec: OperatorSpec,
    j: u32,
    region: Option<ScanRegion>,
    tol: f64,
) -> Result<L2Piece, QuadError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance { tol });
    }
    let (_, hi) = cell_edges(pair, j)?;
    let bound = (-spec.theta * ln_scaling_x(pair, hi)?).exp();
    let region = match region {
        Some(r) => r,
        None => default_cell_region(pair, spec, j)?,
    };
    let scan = scan_with(&region, 1, |fp| match compute_mj(pair, spec, j, fp, tol) {
        Ok(q) if q.converged => ScanSample {
            xi: fp.xi,
            eta: fp.eta,
            value: q.value,
            abs: q.value.norm(),
            error: q.abs_error_estimate,
            converged: true,
        },
        Ok(q) => ScanSample {
            xi: fp.xi,
            eta: fp.eta,
            value: q.value,
            abs: q.value.norm(),
            error: q.abs_error_estimate,
            converged: false,
        },
        Err(_) => ScanSample {
            xi: fp.xi,
            eta: fp.eta,
            value: Complex64::new(0.0, 0.0),
            abs: 0.0,
            error: f64::INFINITY,
            converged: false,
        },
    })?;
    Ok(L2Piece {
        j,
        measured: scan.sup_abs,
        bound,
        ratio: scan.sup_abs / bound,
        region,
        n_samples: scan.samples.len(),
        n_failed: scan.n_failed,
    })
}

// ---------------------------------------------------------------------------
// Assembled tables
// ---------------------------------------------------------------------------

/// Both halves of the piece-j report.  `rel_tol` sets the sup scan's
/// absolute tolerance as a fraction of the piece's L2 scaling value, so
/// every level is resolved equally well in relative terms.
pub fn dyadic_piece_report(
    pair: &PhasePair,
    spec: OperatorSpec,
    j: u32,
    rel_tol: f64,
) -> Result<DyadicPieceReport, QuadError> {
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(QuadError::InvalidTolerance { tol: rel_tol });
    }
    let l1 = tj_l1_bound(pair, spec, j)?;
    let (_, hi) = cell_edges(pair, j)?;
    let l2_bound = (-spec.theta * ln_scaling_x(pair, hi)?).exp();
    let l2 = tj_l2_sup(pair, spec, j, None, rel_tol * l2_bound)?;
    Ok(DyadicPieceReport {
        j,
        l1_measured: l1.measured,
        l1_bound: l1.bound,
        l2_measured: l2.measured,
        l2_bound: l2.bound,
        l1_ratio: l1.ratio,
        l2_ratio: l2.ratio,
        l2_failed_samples: l2.n_failed,
    })
}

/// Piece reports for every level 0..=j_max, evaluated in parallel when the
/// `parallel` feature is on; assembly order is by `j` either way.
pub fn dyadic_piece_table(
    pair: &PhasePair,
    spec: OperatorSpec,
    j_max: u32,
    rel_tol: f64,
) -> Result<Vec<DyadicPieceReport>, QuadError> {
    let js: Vec<u32> = (0..=j_max).collect();
    par_map(&js, |&j| dyadic_piece_report(pair, spec, j, rel_tol))
        .into_iter()
        .collect()
}

/// Build the interpolated series sum_j X_j^{tau-theta} for each tau, using
/// the closed-form scaling values only (no quadrature), with partial sums
/// and a Cauchy-style convergence verdict: convergent when the last
/// quarter of the levels adds less than 1% of the total.
///
/// Requires theta in (0, 1) (the interpolation is between a theta-weighted
/// L1 endpoint and its dual), each tau in [0, 1], and j_max >= 8 so the
/// quarter-tail heuristic has something to look at.
pub fn interpolation_table(
    pair: &PhasePair,
    spec: OperatorSpec,
    taus: &[f64],
    j_max: u32,
) -> Result<Vec<InterpolationSpec>, QuadError> {
    let theta = spec.theta;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(QuadError::InvalidSpec {
            reason: "interpolation requires theta strictly inside (0, 1)",
        });
    }
    if taus.is_empty() {
        return Err(QuadError::InvalidSpec {
            reason: "interpolation requires at least one tau",
        });
    }
    if taus.iter().any(|t| !(t.is_finite() && (0.0..=1.0).contains(t))) {
        return Err(QuadError::InvalidSpec {
            reason: "every tau must lie in [0, 1]",
        });
    }
    if j_max < 8 {
        return Err(QuadError::InvalidSpec {
            reason: "interpolation table needs j_max >= 8",
        });
    }
    let grid = pair.dyadic_grid(j_max)?;
    let ln_x: Vec<f64> = grid
        .breakpoints
        .iter()
        .map(|&t| ln_scaling_x(pair, t))
        .collect::<Result<_, _>>()?;

    let n = ln_x.len();
    let quarter_start = n - n / 4;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        let terms: Vec<f64> = ln_x.iter().map(|&lx| ((tau - theta) * lx).exp()).collect();
        let mut partial_sums = Vec::with_capacity(n);
        let mut acc = 0.0_f64;
        for &t in &terms {
            acc += t;
            partial_sums.push(acc);
        }
        let total = acc;
        let last_quarter_increment = total - partial_sums[quarter_start - 1];
        out.push(InterpolationSpec {
            theta,
            tau,
            p: 2.0 / (1.0 + tau),
            one_over_p: (1.0 + tau) / 2.0,
            terms,
            partial_sums,
            total,
            last_quarter_increment,
            convergent: last_quarter_increment < 0.01 * total,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

/// Write piece reports as CSV: header `j,l1_measured,l1_bound,l2_measured,
/// l2_bound`, one row per level, full-precision decimal.
pub fn write_piece_csv<W: Write>(
    rows: &[DyadicPieceReport],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "j,l1_measured,l1_bound,l2_measured,l2_bound")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.j, r.l1_measured, r.l1_bound, r.l2_measured, r.l2_bound
        )?;
    }
    Ok(())
}

/// JSON summary of an interpolation table: one object per tau with the
/// exponent data, totals, and the convergence verdict (terms elided).
pub fn interpolation_summary_json(rows: &[InterpolationSpec]) -> serde_json::Value {
    json!({
        "table": rows
            .iter()
            .map(|r| {
                json!({
                    "theta": r.theta,
                    "tau": r.tau,
                    "p": r.p,
                    "one_over_p": r.one_over_p,
                    "n_terms": r.terms.len(),
                    "total": r.total,
                    "last_quarter_increment": r.last_quarter_increment,
                    "convergent": r.convergent,
                })
            })
            .collect::<Vec<_>>()
    })
}

// ---------------------------------------------------------------------------
