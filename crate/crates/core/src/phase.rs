//! Phase/weight pairs (gamma, psi) on (0, 1] and their structural checks.
//!
//! A pair consists of a phase gamma with gamma'' > 0 decreasing and blowing
//! up at the origin, and an integrable weight psi vanishing there. Two
//! closed-form families are built in:
//!
//! * power:  gamma(t) = t^-beta,        psi(t) = t^(alpha+1)
//! * exp:    gamma(t) = exp(sg / t),    psi(t) = exp(-sp / t)
//!
//! plus user-supplied closures. Everything downstream (dyadic decomposition,
//! quadrature truncation, L^p bounds) keys off the curvature gamma'': dyadic
//! breakpoints are t_j = gamma''^{-1}(gamma''(1) * 2^j), so the decomposition
//! is invariant under rescaling gamma by a constant.
//!
//! Evaluators compute log-magnitudes internally; plain-value accessors
//! report overflow instead of returning infinities.

use crate::error::PhaseError;
use crate::logval::LogVal;
use serde::Serialize;
use std::sync::Arc;

/// Slope tolerance for the grid trend criterion: an inequality
/// `lhs <= C * rhs` "holds" when the least-squares slope of
/// `ln(lhs/rhs)` against `ln t` stays above `-SLOPE_TOL`, so the ratio
/// does not grow toward the singular endpoint.
pub const SLOPE_TOL: f64 = 0.02;

/// Minimal growth factor of gamma'' across the audit grid for the
/// "curvature unbounded" verdict.
const CURVATURE_GROWTH_MIN: f64 = 1e6;

/// Exponent ladder used when fitting the curvature-power inequalities.
pub const RHO_LADDER: [f64; 5] = [0.5, 0.25, 0.1, 0.05, 0.01];

/// User-supplied phase pair: closures for the phase, its first three
/// derivatives, the weight, and the weight derivative.
#[derive(Clone)]
pub struct CustomPhase {
    pub gamma: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub gamma1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub gamma2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub gamma3: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub psi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub psi1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for CustomPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CustomPhase {{ .. }}")
    }
}

#[derive(Clone, Debug)]
pub enum PhaseFamily {
    Power { beta: f64, alpha: f64 },
    Exp { sigma_gamma: f64, sigma_psi: f64 },
    Custom(CustomPhase),
}

/// All six phase/weight quantities at one point, in plain `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseValues {
    pub t: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub psi: f64,
    pub psi1: f64,
}

#[derive(Clone, Debug)]
pub struct PhasePair {
    family: PhaseFamily,
    gamma2_at_1: f64,
}

fn check_param(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), PhaseError> {
    if !(value.is_finite() && value > lo && value <= hi) {
        return Err(PhaseError::InvalidParameter {
            name,
            value,
            range: "(0, 60]",
        });
    }
    Ok(())
}

impl PhasePair {
    /// Power-law pair gamma = t^-beta, psi = t^(alpha+1).
    pub fn power(beta: f64, alpha: f64) -> Result<Self, PhaseError> {
        check_param("beta", beta, 0.0, 60.0)?;
        if !(alpha.is_finite() && (0.0..=60.0).contains(&alpha)) {
            return Err(PhaseError::InvalidParameter {
                name: "alpha",
                value: alpha,
                range: "[0, 60]",
            });
        }
        let family = PhaseFamily::Power { beta, alpha };
        let gamma2_at_1 = beta * (beta + 1.0);
        Ok(PhasePair {
            family,
            gamma2_at_1,
        })
    }

    /// Exponential pair gamma = exp(sigma_gamma / t), psi = exp(-sigma_psi / t).
    pub fn exp(sigma_gamma: f64, sigma_psi: f64) -> Result<Self, PhaseError> {
        check_param("sigma_gamma", sigma_gamma, 0.0, 50.0)?;
        check_param("sigma_psi", sigma_psi, 0.0, 50.0)?;
        let family = PhaseFamily::Exp {
            sigma_gamma,
            sigma_psi,
        };
        let gamma2_at_1 = sigma_gamma * (sigma_gamma + 2.0) * sigma_gamma.exp();
        Ok(PhasePair {
            family,
            gamma2_at_1,
        })
    }

    /// User-supplied pair. Audited on a coarse grid: psi must be nonzero with
    /// constant sign, gamma'' strictly positive, strictly decreasing, and
    /// growing by at least 100x from t = 1e-4 to t = 1.
    pub fn custom(c: CustomPhase) -> Result<Self, PhaseError> {
        let n = 64;
        let ts: Vec<f64> = (0..n)
            .map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / (n - 1) as f64))
            .collect();
        let mut prev_g2: Option<f64> = None;
        let mut psi_sign: Option<f64> = None;
        for &t in &ts {
            let g2 = (c.gamma2)(t);
            if !(g2.is_finite() && g2 > 0.0) {
                return Err(PhaseError::StructuralAudit {
                    reason: format!("gamma'' = {g2} at t = {t}; need strictly positive"),
                });
            }
            if let Some(p) = prev_g2 {
                if g2 >= p {
                    return Err(PhaseError::StructuralAudit {
                        reason: format!("gamma'' not strictly decreasing near t = {t}"),
                    });
                }
            }
            prev_g2 = Some(g2);
            let ps = (c.psi)(t);
            if ps == 0.0 || !ps.is_finite() {
                return Err(PhaseError::StructuralAudit {
                    reason: format!("psi = {ps} at t = {t}; need finite and nonzero"),
                });
            }
            match psi_sign {
                None => psi_sign = Some(ps.signum()),
                Some(s) if s != ps.signum() => {
                    return Err(PhaseError::StructuralAudit {
                        reason: format!("psi changes sign near t = {t}"),
                    });
                }
                _ => {}
            }
        }
        let deep = (c.gamma2)(1e-4);
        let shallow = (c.gamma2)(1.0);
        if deep < 100.0 * shallow {
            return Err(PhaseError::StructuralAudit {
                reason: format!(
                    "gamma'' grows only {:.3}x from t = 1e-4 to t = 1; curvature must blow up",
                    deep / shallow
                ),
            });
        }
        let gamma2_at_1 = shallow;
        Ok(PhasePair {
            family: PhaseFamily::Custom(c),
            gamma2_at_1,
        })
    }

    pub fn family(&self) -> &PhaseFamily {
        &self.family
    }

    /// Short tag for reports ("power", "exp", "custom").
    pub fn family_tag(&self) -> &'static str {
        match self.family {
            PhaseFamily::Power { .. } => "power",
            PhaseFamily::Exp { .. } => "exp",
            PhaseFamily::Custom(_) => "custom",
        }
    }

    pub fn gamma2_at_1(&self) -> f64 {
        self.gamma2_at_1
    }

    fn check_t(t: f64) -> Result<(), PhaseError> {
        if !(t.is_finite() && t > 0.0 && t <= 1.0) {
            return Err(PhaseError::OutOfDomain { t });
        }
        Ok(())
    }

    // Log-magnitude evaluators. Valid for any t in (0, 1]; they never
    // overflow. Callers are expected to have validated t.

    pub fn gamma_ln(&self, t: f64) -> LogVal {
        match &self.family {
            PhaseFamily::Power { beta, .. } => LogVal::new(-beta * t.ln(), 1.0),
            PhaseFamily::Exp { sigma_gamma, .. } => LogVal::new(sigma_gamma / t, 1.0),
            PhaseFamily::Custom(c) => LogVal::from_value((c.gamma)(t)),
        }
    }

    pub fn gamma1_ln(&self, t: f64) -> LogVal {
        match &self.family {
            PhaseFamily::Power { beta, .. } => {
                LogVal::new(beta.ln() - (beta + 1.0) * t.ln(), -1.0)
            }
            PhaseFamily::Exp { sigma_gamma, .. } => {
                LogVal::new(sigma_gamma.ln() - 2.0 * t.ln() + sigma_gamma / t, -1.0)
            }
            PhaseFamily::Custom(c) => LogVal::from_value((c.gamma1)(t)),
        }
    }

    pub fn gamma2_ln(&self, t: f64) -> LogVal {
        match &self.family {
            PhaseFamily::Power { beta, .. } => LogVal::new(
                (beta * (beta + 1.0)).ln() - (beta + 2.0) * t.ln(),
                1.0,
            ),
            PhaseFamily::Exp { sigma_gamma, .. } => LogVal::new(
                (sigma_gamma * (sigma_gamma + 2.0 * t)).ln() - 4.0 * t.ln() + sigma_gamma / t,
                1.0,
            ),
            PhaseFamily::Custom(c) => LogVal::from_value((c.gamma2)(t)),
        }
    }

    pub fn gamma3_ln(&self, t: f64) -> LogVal {
        match &self.family {
            PhaseFamily::Power { beta, .. } => LogVal::new(
                (beta * (beta + 1.0) * (beta + 2.0)).ln() - (beta + 3.0) * t.ln(),
                -1.0,
            ),
            PhaseFamily::Exp { sigma_gamma, .. } => {
                let s = *sigma_gamma;
                let poly = s * (s * s + 6.0 * s * t + 6.0 * t * t);
                LogVal::new(poly.ln() - 6.0 * t.ln() + s / t, -1.0)
            }
            PhaseFamily::Custom(c) => LogVal::from_value((c.gamma3)(t)),
        }
    }

    pub fn psi_ln(&self, t: f64) -> LogVal {
        match &self.family {
            PhaseFamily::Power { alpha, .. } => LogVal::new((alpha + 1.0) * t.ln(), 1.0),
            PhaseFamily::Exp { sigma_psi, .. } => LogVal::new(-sigma_psi / t, 1.0),
            PhaseFamily::Custom(c) => LogVal::from_value((c.psi)(t)),
        }
    }

    pub fn psi1_ln(&self, t: f64) -> LogVal {
        match &self.family {
            PhaseFamily::Power { alpha, .. } => {
                if *alpha == 0.0 {
                    LogVal::new(0.0, 1.0)
                } else {
                    LogVal::new((alpha + 1.0).ln() + alpha * t.ln(), 1.0)
                }
            }
            PhaseFamily::Exp { sigma_psi, .. } => {
                LogVal::new(sigma_psi.ln() - 2.0 * t.ln() - sigma_psi / t, 1.0)
            }
            PhaseFamily::Custom(c) => LogVal::from_value((c.psi1)(t)),
        }
    }

    // Fast plain-value paths for quadrature inner loops. May return
    // infinities; the quadrature engine keeps itself inside representable
    // territory and the checked `eval` below is the validating entry point.

    #[inline]
    pub fn gamma_val(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { beta, .. } => t.powf(-beta),
            PhaseFamily::Exp { sigma_gamma, .. } => (sigma_gamma / t).exp(),
            PhaseFamily::Custom(c) => (c.gamma)(t),
        }
    }

    #[inline]
    pub fn gamma1_val(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { beta, .. } => -beta * t.powf(-beta - 1.0),
            PhaseFamily::Exp { sigma_gamma, .. } => {
                -sigma_gamma / (t * t) * (sigma_gamma / t).exp()
            }
            PhaseFamily::Custom(c) => (c.gamma1)(t),
        }
    }

    #[inline]
    pub fn gamma2_val(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { beta, .. } => beta * (beta + 1.0) * t.powf(-beta - 2.0),
            PhaseFamily::Exp { sigma_gamma, .. } => {
                let s = *sigma_gamma;
                s * (s + 2.0 * t) / (t * t * t * t) * (s / t).exp()
            }
            PhaseFamily::Custom(c) => (c.gamma2)(t),
        }
    }

    #[inline]
    pub fn gamma3_val(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { beta, .. } => {
                -beta * (beta + 1.0) * (beta + 2.0) * t.powf(-beta - 3.0)
            }
            PhaseFamily::Exp { sigma_gamma, .. } => {
                let s = *sigma_gamma;
                -s * (s * s + 6.0 * s * t + 6.0 * t * t) / t.powi(6) * (s / t).exp()
            }
            PhaseFamily::Custom(c) => (c.gamma3)(t),
        }
    }

    #[inline]
    pub fn psi_val(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { alpha, .. } => t.powf(alpha + 1.0),
            PhaseFamily::Exp { sigma_psi, .. } => (-sigma_psi / t).exp(),
            PhaseFamily::Custom(c) => (c.psi)(t),
        }
    }

    #[inline]
    pub fn psi1_val(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { alpha, .. } => (alpha + 1.0) * t.powf(*alpha),
            PhaseFamily::Exp { sigma_psi, .. } => {
                sigma_psi / (t * t) * (-sigma_psi / t).exp()
            }
            PhaseFamily::Custom(c) => (c.psi1)(t),
        }
    }

    /// Logarithmic derivative psi'/psi, safe arbitrarily deep.
    #[inline]
    pub fn psi_logderiv(&self, t: f64) -> f64 {
        match &self.family {
            PhaseFamily::Power { alpha, .. } => (alpha + 1.0) / t,
            PhaseFamily::Exp { sigma_psi, .. } => sigma_psi / (t * t),
            PhaseFamily::Custom(c) => (c.psi1)(t) / (c.psi)(t),
        }
    }

    /// Validated evaluation of all six quantities at t.
    pub fn eval(&self, t: f64) -> Result<PhaseValues, PhaseError> {
        Self::check_t(t)?;
        let quantities: [(&'static str, LogVal); 6] = [
            ("gamma", self.gamma_ln(t)),
            ("gamma'", self.gamma1_ln(t)),
            ("gamma''", self.gamma2_ln(t)),
            ("gamma'''", self.gamma3_ln(t)),
            ("psi", self.psi_ln(t)),
            ("psi'", self.psi1_ln(t)),
        ];
        for (what, v) in quantities {
            if v.overflows() {
                return Err(PhaseError::RangeOverflow { what, t });
            }
        }
        Ok(PhaseValues {
            t,
            gamma: quantities[0].1.value(),
            gamma1: quantities[1].1.value(),
            gamma2: quantities[2].1.value(),
            gamma3: quantities[3].1.value(),
            psi: quantities[4].1.value(),
            psi1: quantities[5].1.value(),
        })
    }

    /// Solve gamma''(t) = s for t in (0, 1], with s given as ln s.
    ///
    /// Bisection on ln t against the strictly decreasing ln gamma''; the
    /// bracket is tightened to near machine resolution, so the roundtrip
    /// gamma''(invert(s)) = s holds to ~1e-12 relative for moderate depths.
    pub fn invert_gamma2_ln(&self, ln_s: f64) -> Result<f64, PhaseError> {
        let ln_floor = self.gamma2_at_1.ln();
        if ln_s < ln_floor - 1e-12 {
            return Err(PhaseError::InversionBelowRange { ln_s, ln_floor });
        }
        if ln_s <= ln_floor {
            return Ok(1.0);
        }
        let target = ln_s;
        let mut x_hi = 0.0f64;
        let mut x_lo = -0.5f64;
        let mut steps = 0;
        while self.gamma2_ln(x_lo.exp()).ln_abs < target {
            x_lo *= 2.0;
            steps += 1;
            if steps > 60 {
                return Err(PhaseError::RangeOverflow {
                    what: "gamma'' inversion depth",
                    t: x_lo.exp(),
                });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (x_lo + x_hi);
            if self.gamma2_ln(mid.exp()).ln_abs >= target {
                x_lo = mid;
            } else {
                x_hi = mid;
            }
            if x_hi - x_lo <= 1e-15 + 4.0 * f64::EPSILON * x_lo.abs() {
                break;
            }
        }
        Ok((0.5 * (x_lo + x_hi)).exp())
    }

    /// Solve gamma''(t) = s for t in (0, 1].
    pub fn invert_gamma2(&self, s: f64) -> Result<f64, PhaseError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(PhaseError::InvalidParameter {
                name: "s",
                value: s,
                range: "(0, inf)",
            });
        }
        self.invert_gamma2_ln(s.ln())
    }

    /// Curvature-dyadic breakpoints t_j with gamma''(t_j) = gamma''(1) * 2^j,
    /// j = 0..=j_max, descending from t_0 = 1.
    pub fn dyadic_grid(&self, j_max: u32) -> Result<DyadicGrid, PhaseError> {
        if j_max > 4000 {
            return Err(PhaseError::InvalidParameter {
                name: "j_max",
                value: j_max as f64,
                range: "[0, 4000]",
            });
        }
        let ln_g21 = self.gamma2_at_1.ln();
        let mut breakpoints = Vec::with_capacity(j_max as usize + 1);
        breakpoints.push(1.0);
        for j in 1..=j_max {
            let ln_s = ln_g21 + j as f64 * std::f64::consts::LN_2;
            breakpoints.push(self.invert_gamma2_ln(ln_s)?);
        }
        Ok(DyadicGrid {
            gamma2_at_1: self.gamma2_at_1,
            breakpoints,
        })
    }
}

/// Dyadic-in-curvature grid: breakpoints[j] = t_j, descending, t_0 = 1.
#[derive(Clone, Debug, Serialize)]
pub struct DyadicGrid {
    pub gamma2_at_1: f64,
    pub breakpoints: Vec<f64>,
}

impl DyadicGrid {
    pub fn j_max(&self) -> u32 {
        (self.breakpoints.len() - 1) as u32
    }

    /// Curvature level gamma''(1) * 2^j; may overflow for very deep j.
    pub fn level(&self, j: u32) -> f64 {
        self.gamma2_at_1 * 2f64.powi(j as i32)
    }

    pub fn ln_level(&self, j: u32) -> f64 {
        self.gamma2_at_1.ln() + j as f64 * std::f64::consts::LN_2
    }

    /// Cell [t_{j+1}, t_j]; requires j + 1 <= j_max.
    pub fn cell(&self, j: u32) -> (f64, f64) {
        let j = j as usize;
        (self.breakpoints[j + 1], self.breakpoints[j])
    }
}

/// Logarithmically spaced audit grid on [t_min, t_max].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            t_min: 1e-8,
            t_max: 1.0,
            n: 256,
        }
    }
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self, PhaseError> {
        if !(t_min.is_finite() && t_min > 0.0 && t_min < t_max && t_max <= 1.0) {
            return Err(PhaseError::InvalidParameter {
                name: "t_min..t_max",
                value: t_min,
                range: "0 < t_min < t_max <= 1",
            });
        }
        if n < 16 {
            return Err(PhaseError::InvalidParameter {
                name: "n",
                value: n as f64,
                range: "[16, ..)",
            });
        }
        Ok(GridSpec { t_min, t_max, n })
    }

    /// Ascending log-spaced sample points.
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.n)
            .map(|i| (a + (b - a) * i as f64 / (self.n - 1) as f64).exp())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// One audited structural inequality with its fitted constants and the
/// sample point where it is tightest (or first fails).
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionRecord {
    pub id: &'static str,
    pub verdict: Verdict,
    /// Fitted multiplicative constant C where the inequality has one.
    pub constant: Option<f64>,
    /// Fitted exponent (rho or epsilon) where the inequality has one.
    pub exponent: Option<f64>,
    /// Least-squares slope of ln(lhs/rhs) against ln t, where applicable.
    pub slope: Option<f64>,
    pub witness_t: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub family: String,
    pub grid: GridSpec,
    pub records: Vec<AssumptionRecord>,
}

impl AssumptionReport {
    pub fn get(&self, id: &str) -> Option<&AssumptionRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn holds(&self, id: &str) -> bool {
        self.get(id).map(|r| r.verdict == Verdict::Holds) == Some(true)
    }

    /// Fitted rho from the |gamma'''| <= C gamma''^(3/2 - rho) fit.
    pub fn rho_third_vs_curvature(&self) -> Option<f64> {
        self.get(ids::THIRD_VS_CURVATURE).and_then(|r| r.exponent)
    }

    /// Fitted rho from the 1/|psi| <= C gamma''^(1/2 - rho) fit.
    pub fn rho_weight_vs_curvature(&self) -> Option<f64> {
        self.get(ids::WEIGHT_VS_CURVATURE).and_then(|r| r.exponent)
    }

    /// Fitted epsilon from the curvature-halving-step fit.
    pub fn epsilon_halving(&self) -> Option<f64> {
        self.get(ids::CURVATURE_HALVING).and_then(|r| r.exponent)
    }

    /// Fitted C from the 1/|psi| <= C |gamma'''|^(1/3) fit.
    pub fn c_weight_vs_third(&self) -> Option<f64> {
        self.get(ids::WEIGHT_VS_THIRD).and_then(|r| r.constant)
    }
}

/// Stable identifiers for the audited inequalities.
pub mod ids {
    /// gamma, gamma', gamma'', gamma''', psi, psi' monotone near 0;
    /// gamma'' positive, decreasing, unbounded.
    pub const MONOTONE_STRUCTURE: &str = "monotone-structure";
    /// |gamma'''| comparable at consecutive curvature-doubling points.
    pub const THIRD_DOUBLING_COMPARABLE: &str = "third-doubling-comparable";
    /// |gamma'''(t)| <= C gamma''(t)^(3/2 - rho).
    pub const THIRD_VS_CURVATURE: &str = "third-vs-curvature";
    /// 1/|psi(t)| <= C |gamma'''(t)|^(1/3).
    pub const WEIGHT_VS_THIRD: &str = "weight-vs-third";
    /// gamma''(t) >= 2 gamma''((1+eps) t) for small t, with (1+eps)^2 < 2.
    pub const CURVATURE_HALVING: &str = "curvature-halving";
    /// 1/|psi(t)| <= C gamma''(t)^(1/2 - rho).
    pub const WEIGHT_VS_CURVATURE: &str = "weight-vs-curvature";
    /// 1/(|psi||gamma'''|^(1/3)) grows without bound toward 0.
    pub const WEIGHT_THIRD_QUOTIENT_UNBOUNDED: &str = "weight-third-quotient-unbounded";
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

struct TrendFit {
    slope: f64,
    max_r: f64,
    argmax_t: f64,
    min_r: f64,
    argmin_t: f64,
}

fn trend_fit(ts: &[f64], rs: &[f64]) -> TrendFit {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let slope = lsq_slope(&xs, rs);
    let mut max_r = f64::NEG_INFINITY;
    let mut min_r = f64::INFINITY;
    let mut argmax_t = ts[0];
    let mut argmin_t = ts[0];
    for (&t, &r) in ts.iter().zip(rs) {
        if r > max_r {
            max_r = r;
            argmax_t = t;
        }
        if r < min_r {
            min_r = r;
            argmin_t = t;
        }
    }
    TrendFit {
        slope,
        max_r,
        argmax_t,
        min_r,
        argmin_t,
    }
}

/// Direction of a sampled sequence: monotone (ties allowed) or not.
fn is_monotone(vals: &[LogVal]) -> Option<usize> {
    use std::cmp::Ordering::*;
    let mut dir = Equal;
    for i in 1..vals.len() {
        let ord = vals[i].cmp_value(vals[i - 1]);
        match (dir, ord) {
            (_, Equal) => {}
            (Equal, o) => dir = o,
            (Less, Greater) | (Greater, Less) => return Some(i),
            _ => {}
        }
    }
    None
}

impl PhasePair {
    /// Audit the structural inequalities on a log grid and fit their
    /// constants. Monotonicity and trend verdicts describe behavior toward
    /// the singular endpoint: monotonicity is required on the deep half of
    /// the grid (the weight derivative of the exponential family turns
    /// around at t = sigma_psi / 2, which is irrelevant near 0), and a
    /// bounded-ratio verdict means the ratio does not trend upward as
    /// t -> 0.
    pub fn check_assumptions(&self, grid: &GridSpec) -> Result<AssumptionReport, PhaseError> {
        let ts = grid.points();
        let ln2 = std::f64::consts::LN_2;
        let mut records = Vec::new();

        // Monotone structure.
        {
            let t_half = (grid.t_min * grid.t_max).sqrt();
            let deep: Vec<f64> = ts.iter().copied().filter(|&t| t <= t_half).collect();
            let series: [(&str, Vec<LogVal>); 6] = [
                ("gamma", deep.iter().map(|&t| self.gamma_ln(t)).collect()),
                ("gamma'", deep.iter().map(|&t| self.gamma1_ln(t)).collect()),
                ("gamma''", deep.iter().map(|&t| self.gamma2_ln(t)).collect()),
                ("gamma'''", deep.iter().map(|&t| self.gamma3_ln(t)).collect()),
                ("psi", deep.iter().map(|&t| self.psi_ln(t)).collect()),
                ("psi'", deep.iter().map(|&t| self.psi1_ln(t)).collect()),
            ];
            let mut verdict = Verdict::Holds;
            let mut witness = None;
            let mut note = String::new();
            for (name, vals) in &series {
                if let Some(i) = is_monotone(vals) {
                    verdict = Verdict::Fails;
                    witness = Some(deep[i]);
                    note = format!("{name} not monotone on the deep half of the grid");
                    break;
                }
            }
            let g2_deep = self.gamma2_ln(grid.t_min).ln_abs;
            let g2_shallow = self.gamma2_ln(grid.t_max).ln_abs;
            if verdict == Verdict::Holds {
                let g2s: Vec<LogVal> = ts.iter().map(|&t| self.gamma2_ln(t)).collect();
                if g2s.iter().any(|v| v.sign <= 0.0) {
                    verdict = Verdict::Fails;
                    note = "gamma'' not strictly positive".into();
                } else if is_monotone(&g2s).is_some()
                    || g2s[0].cmp_value(g2s[g2s.len() - 1]) != std::cmp::Ordering::Greater
                {
                    verdict = Verdict::Fails;
                    note = "gamma'' not decreasing across the grid".into();
                } else if g2_deep - g2_shallow < CURVATURE_GROWTH_MIN.ln() {
                    verdict = Verdict::Inconclusive;
                    note = format!(
                        "gamma'' grows only {:.3e}x across the grid; cannot attest blow-up",
                        (g2_deep - g2_shallow).exp()
                    );
                } else {
                    note = format!(
                        "all six monotone on deep half; gamma'' grows {:.3e}x across grid",
                        (g2_deep - g2_shallow).exp()
                    );
                }
            }
            records.push(AssumptionRecord {
                id: ids::MONOTONE_STRUCTURE,
                verdict,
                constant: None,
                exponent: None,
                slope: None,
                witness_t: witness,
                note,
            });
        }

        // |gamma'''| comparability under curvature doubling.
        {
            let ln_lo = self.gamma2_ln(grid.t_max).ln_abs;
            let ln_hi = self.gamma2_ln(grid.t_min).ln_abs - ln2;
            let m = 64;
            let mut max_ratio_ln = f64::NEG_INFINITY;
            let mut witness = None;
            let mut deep_ratio_ln = 0.0;
            for i in 0..m {
                let ln_s = ln_lo + (ln_hi - ln_lo) * i as f64 / (m - 1) as f64;
                let t1 = self.invert_gamma2_ln(ln_s)?;
                let t2 = self.invert_gamma2_ln(ln_s + ln2)?;
                let r = self.gamma3_ln(t2).ln_abs - self.gamma3_ln(t1).ln_abs;
                deep_ratio_ln = r;
                if r > max_ratio_ln {
                    max_ratio_ln = r;
                    witness = Some(t1);
                }
            }
            records.push(AssumptionRecord {
                id: ids::THIRD_DOUBLING_COMPARABLE,
                verdict: Verdict::Holds,
                constant: Some(max_ratio_ln.exp()),
                exponent: None,
                slope: None,
                witness_t: witness,
                note: format!(
                    "max |gamma'''| ratio {:.6} across doubling; {:.6} at the deep end",
                    max_ratio_ln.exp(),
                    deep_ratio_ln.exp()
                ),
            });
        }

        // |gamma'''| <= C gamma''^(3/2 - rho), largest rho on the ladder.
        {
            let rec = self.fit_ladder_upper(
                &ts,
                ids::THIRD_VS_CURVATURE,
                |t| self.gamma3_ln(t).ln_abs,
                |t, rho| (1.5 - rho) * self.gamma2_ln(t).ln_abs,
            );
            records.push(rec);
        }

        // 1/|psi| <= C |gamma'''|^(1/3): single inequality, no ladder.
        {
            let rs: Vec<f64> = ts
                .iter()
                .map(|&t| -self.psi_ln(t).ln_abs - self.gamma3_ln(t).ln_abs / 3.0)
                .collect();
            let fit = trend_fit(&ts, &rs);
            let verdict = if fit.slope >= -SLOPE_TOL {
                Verdict::Holds
            } else {
                Verdict::Fails
            };
            records.push(AssumptionRecord {
                id: ids::WEIGHT_VS_THIRD,
                verdict,
                constant: Some(fit.max_r.exp()),
                exponent: None,
                slope: Some(fit.slope),
                witness_t: Some(fit.argmax_t),
                note: if verdict == Verdict::Holds {
                    format!("ratio bounded by {:.6e}; trend slope {:.4}", fit.max_r.exp(), fit.slope)
                } else {
                    format!("ratio grows toward 0 (trend slope {:.4})", fit.slope)
                },
            });
        }

        // Curvature halving step: minimal eps with gamma''(t) >= 2 gamma''((1+eps)t).
        {
            let eps_cap = std::f64::consts::SQRT_2 - 1.0 - 1e-9;
            let margin = |eps: f64| -> (f64, f64) {
                let mut worst = f64::INFINITY;
                let mut worst_t = ts[0];
                // Also probe the exact cap point t_max/(1+eps): for phases
                // with shallow-end-binding margins the grid alone can miss
                // the continuum minimum by a grid step.
                let cap = grid.t_max / (1.0 + eps);
                for t in ts.iter().copied().chain(std::iter::once(cap)) {
                    let t2 = (1.0 + eps) * t;
                    if t2 > grid.t_max || t < grid.t_min {
                        continue;
                    }
                    let m = self.gamma2_ln(t).ln_abs - self.gamma2_ln(t2).ln_abs - ln2;
                    if m < worst {
                        worst = m;
                        worst_t = t;
                    }
                }
                (worst, worst_t)
            };
            let (cap_margin, cap_witness) = margin(eps_cap);
            if cap_margin < 0.0 {
                records.push(AssumptionRecord {
                    id: ids::CURVATURE_HALVING,
                    verdict: Verdict::Fails,
                    constant: None,
                    exponent: None,
                    slope: None,
                    witness_t: Some(cap_witness),
                    note: "no eps below sqrt(2)-1 halves the curvature per step".into(),
                });
            } else {
                let mut lo = 1e-4;
                let mut hi = eps_cap;
                if margin(lo).0 >= 0.0 {
                    hi = lo;
                } else {
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if margin(mid).0 >= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                }
                let (m, w) = margin(hi);
                records.push(AssumptionRecord {
                    id: ids::CURVATURE_HALVING,
                    verdict: Verdict::Holds,
                    constant: Some(m.exp()),
                    exponent: Some(hi),
                    slope: None,
                    witness_t: Some(w),
                    note: format!("minimal eps = {hi:.8}; (1+eps)^2 = {:.6} < 2", (1.0 + hi) * (1.0 + hi)),
                });
            }
        }

        // 1/|psi| <= C gamma''^(1/2 - rho), largest rho on the ladder.
        {
            let rec = self.fit_ladder_upper(
                &ts,
                ids::WEIGHT_VS_CURVATURE,
                |t| -self.psi_ln(t).ln_abs,
                |t, rho| (0.5 - rho) * self.gamma2_ln(t).ln_abs,
            );
            records.push(rec);
        }

        // Quotient 1/(|psi| |gamma'''|^(1/3)) unbounded toward 0.
        {
            let q = |t: f64| -self.psi_ln(t).ln_abs - self.gamma3_ln(t).ln_abs / 3.0;
            let growth_ln = q(grid.t_min) - q(grid.t_max);
            let verdict = if growth_ln >= 10f64.ln() {
                Verdict::Holds
            } else {
                Verdict::Fails
            };
            records.push(AssumptionRecord {
                id: ids::WEIGHT_THIRD_QUOTIENT_UNBOUNDED,
                verdict,
                constant: Some(growth_ln.exp()),
                exponent: None,
                slope: None,
                witness_t: Some(grid.t_min),
                note: format!(
                    "quotient grows {:.4e}x from t = {:.1e} to t = {:.1e} (needs >= 10x)",
                    growth_ln.exp(),
                    grid.t_max,
                    grid.t_min
                ),
            });
        }

        Ok(AssumptionReport {
            family: self.family_tag().to_string(),
            grid: *grid,
            records,
        })
    }

    fn fit_ladder_upper(
        &self,
        ts: &[f64],
        id: &'static str,
        lhs_ln: impl Fn(f64) -> f64,
        rhs_ln: impl Fn(f64, f64) -> f64,
    ) -> AssumptionRecord {
        for &rho in &RHO_LADDER {
            let rs: Vec<f64> = ts.iter().map(|&t| lhs_ln(t) - rhs_ln(t, rho)).collect();
            let fit = trend_fit(ts, &rs);
            if fit.slope >= -SLOPE_TOL {
                return AssumptionRecord {
                    id,
                    verdict: Verdict::Holds,
                    constant: Some(fit.max_r.exp()),
                    exponent: Some(rho),
                    slope: Some(fit.slope),
                    witness_t: Some(fit.argmax_t),
                    note: format!(
                        "holds at rho = {rho} with C = {:.6e} (trend slope {:.4})",
                        fit.max_r.exp(),
                        fit.slope
                    ),
                };
            }
        }
        let rho = RHO_LADDER[RHO_LADDER.len() - 1];
        let rs: Vec<f64> = ts.iter().map(|&t| lhs_ln(t) - rhs_ln(t, rho)).collect();
        let fit = trend_fit(ts, &rs);
        AssumptionRecord {
            id,
            verdict: Verdict::Fails,
            constant: None,
            exponent: None,
            slope: Some(fit.slope),
            witness_t: Some(fit.argmax_t),
            note: format!(
                "ratio grows toward 0 even at rho = {rho} (trend slope {:.4})",
                fit.slope
            ),
        }
    }

    /// Fit the largest delta with |gamma'''(t)| >= C gamma''(t)^delta / t^3
    /// holding across the grid (residual bounded below toward 0).
    pub fn fit_lemma_lower(&self, grid: &GridSpec) -> Result<LemmaFit, PhaseError> {
        let ts = grid.points();
        let mut delta = 0.95;
        while delta >= 0.049 {
            let rs: Vec<f64> = ts
                .iter()
                .map(|&t| {
                    self.gamma3_ln(t).ln_abs + 3.0 * t.ln() - delta * self.gamma2_ln(t).ln_abs
                })
                .collect();
            let fit = trend_fit(&ts, &rs);
            if fit.slope <= SLOPE_TOL {
                return Ok(LemmaFit {
                    holds: true,
                    delta,
                    c: fit.min_r.exp(),
                    slope: fit.slope,
                    witness_t: fit.argmin_t,
                });
            }
            delta -= 0.05;
        }
        Ok(LemmaFit {
            holds: false,
            delta: 0.0,
            c: 0.0,
            slope: f64::NAN,
            witness_t: f64::NAN,
        })
    }
}

/// Fitted lower bound |gamma'''| >= c gamma''^delta / t^3.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaFit {
    pub holds: bool,
    pub delta: f64,
    pub c: f64,
    pub slope: f64,
    pub witness_t: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(beta: f64, alpha: f64) -> PhasePair {
        PhasePair::power(beta, alpha).unwrap()
    }

    fn expf(sg: f64, sp: f64) -> PhasePair {
        PhasePair::exp(sg, sp).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn power_closed_forms_at_half() {
        let v = power(1.0, 1.0).eval(0.5).unwrap();
        assert_eq!(v.gamma, 2.0);
        assert_eq!(v.gamma1, -4.0);
        assert!(rel(v.gamma2, 16.0) < 1e-14);
        assert!(rel(v.gamma3, -96.0) < 1e-14);
        assert!(rel(v.psi, 0.25) < 1e-14);
        assert!(rel(v.psi1, 1.0) < 1e-14);

        let v = power(2.5, 1.0).eval(0.5).unwrap();
        assert!(rel(v.gamma2, 8.75 * 2f64.powf(4.5)) < 1e-13);
    }

    #[test]
    fn exp_closed_forms() {
        let p = expf(3.0, 1.0);
        assert!(rel(p.gamma2_at_1(), 15.0 * 3f64.exp()) < 1e-14);
        let v = p.eval(0.5).unwrap();
        assert!(rel(v.gamma2, 192.0 * 6f64.exp()) < 1e-13);
        assert!(rel(v.gamma1, -12.0 * 6f64.exp()) < 1e-13);
        assert!(rel(v.psi, (-2.0f64).exp()) < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in [power(3.0, 1.0), power(2.5, 1.0), expf(3.0, 1.0)] {
            for &t in &[0.1, 0.3, 0.7] {
                let h = t * 1e-5;
                let v = p.eval(t).unwrap();
                let fd1 = (p.gamma_val(t + h) - p.gamma_val(t - h)) / (2.0 * h);
                assert!(rel(fd1, v.gamma1) < 1e-7, "gamma' fd mismatch at {t}");
                let fd2 = (p.gamma1_val(t + h) - p.gamma1_val(t - h)) / (2.0 * h);
                assert!(rel(fd2, v.gamma2) < 1e-7, "gamma'' fd mismatch at {t}");
                let fd3 = (p.gamma2_val(t + h) - p.gamma2_val(t - h)) / (2.0 * h);
                assert!(rel(fd3, v.gamma3) < 1e-7, "gamma''' fd mismatch at {t}");
                let fdp = (p.psi_val(t + h) - p.psi_val(t - h)) / (2.0 * h);
                assert!(rel(fdp, v.psi1) < 1e-7, "psi' fd mismatch at {t}");
            }
        }
    }

    #[test]
    fn domain_and_parameter_validation() {
        assert!(matches!(
            power(3.0, 1.0).eval(0.0),
            Err(PhaseError::OutOfDomain { .. })
        ));
        assert!(matches!(
            power(3.0, 1.0).eval(1.5),
            Err(PhaseError::OutOfDomain { .. })
        ));
        assert!(PhasePair::power(0.0, 1.0).is_err());
        assert!(PhasePair::power(-2.0, 1.0).is_err());
        assert!(PhasePair::power(61.0, 1.0).is_err());
        assert!(PhasePair::exp(0.0, 1.0).is_err());
    }

    #[test]
    fn exp_overflow_is_reported_not_silent() {
        let p = expf(3.0, 1.0);
        let err = p.eval(0.004).unwrap_err();
        assert!(matches!(err, PhaseError::RangeOverflow { .. }));
        // The log evaluator stays finite at the same point.
        let v = p.gamma2_ln(0.004);
        assert!(v.ln_abs.is_finite() && v.ln_abs > 700.0);
    }

    #[test]
    fn inversion_hits_closed_forms() {
        let p = power(1.0, 1.0);
        assert!(rel(p.invert_gamma2(2.0).unwrap(), 1.0) < 1e-12);
        assert!(rel(p.invert_gamma2(16.0).unwrap(), 0.5) < 1e-12);
        let e = expf(3.0, 1.0);
        assert!(rel(e.invert_gamma2(15.0 * 3f64.exp()).unwrap(), 1.0) < 1e-12);
        assert!(matches!(
            p.invert_gamma2(1.0),
            Err(PhaseError::InversionBelowRange { .. })
        ));
    }

    #[test]
    fn inversion_roundtrip_deep() {
        for p in [power(3.0, 1.0), power(1.0, 1.0), expf(3.0, 1.0)] {
            let ln_g21 = p.gamma2_at_1().ln();
            for i in 0..50 {
                let ln_s = ln_g21 + 40.0 * std::f64::consts::LN_2 * i as f64 / 49.0;
                let t = p.invert_gamma2_ln(ln_s).unwrap();
                let back = p.gamma2_ln(t).ln_abs;
                assert!(
                    (back - ln_s).abs() < 1e-12,
                    "roundtrip drift {:.3e} at ln_s = {ln_s}",
                    (back - ln_s).abs()
                );
            }
        }
    }

    #[test]
    fn dyadic_grid_power_closed_form() {
        let g = power(3.0, 1.0).dyadic_grid(10).unwrap();
        assert_eq!(g.breakpoints[0], 1.0);
        for j in 0..=10u32 {
            let expect = 2f64.powf(-(j as f64) / 5.0);
            assert!(rel(g.breakpoints[j as usize], expect) < 1e-12);
        }
        let g = power(1.0, 1.0).dyadic_grid(3).unwrap();
        assert!(rel(g.breakpoints[3], 0.5) < 1e-12);
    }

    #[test]
    fn assumption_fits_power_3_1() {
        let p = power(3.0, 1.0);
        let rep = p.check_assumptions(&GridSpec::default()).unwrap();
        assert!(rep.holds(ids::MONOTONE_STRUCTURE));
        assert!(rep.holds(ids::THIRD_DOUBLING_COMPARABLE));
        assert!(rep.holds(ids::THIRD_VS_CURVATURE));
        assert!(rep.holds(ids::WEIGHT_VS_THIRD));
        assert!(rep.holds(ids::CURVATURE_HALVING));
        // rho <= beta / (2(beta+2)) = 0.3, so the ladder fits 0.25.
        assert_eq!(rep.rho_third_vs_curvature(), Some(0.25));
        // Doubling ratio for t^-beta is exactly 2^((beta+3)/(beta+2)).
        let c = rep.get(ids::THIRD_DOUBLING_COMPARABLE).unwrap().constant.unwrap();
        assert!(rel(c, 2f64.powf(6.0 / 5.0)) < 1e-6);
        // beta = 3 alpha: the quotient 1/(|psi||gamma'''|^(1/3)) is constant.
        assert!(!rep.holds(ids::WEIGHT_THIRD_QUOTIENT_UNBOUNDED));
        let q = rep
            .get(ids::WEIGHT_THIRD_QUOTIENT_UNBOUNDED)
            .unwrap()
            .constant
            .unwrap();
        assert!(rel(q, 1.0) < 1e-9);
        // Minimal halving eps for t^-beta solves (1+eps)^(beta+2) = 2.
        let eps = rep.epsilon_halving().unwrap();
        assert!(rel(eps, 2f64.powf(0.2) - 1.0) < 1e-5);
    }

    #[test]
    fn assumption_fits_power_1_third() {
        // beta = 1, alpha = 1/3 sits exactly on beta = 3 alpha: the
        // weight-vs-third ratio is the constant 6^(-1/3).
        let p = power(1.0, 1.0 / 3.0);
        let rep = p.check_assumptions(&GridSpec::default()).unwrap();
        let c = rep.c_weight_vs_third().unwrap();
        assert!(rel(c, 6f64.powf(-1.0 / 3.0)) < 1e-9);
        let eps = rep.epsilon_halving().unwrap();
        assert!(rel(eps, 2f64.powf(1.0 / 3.0) - 1.0) < 1e-5);
        assert_eq!(rep.rho_third_vs_curvature(), Some(0.1));
    }

    #[test]
    fn assumption_fits_power_sharpness_window() {
        // 2 alpha < beta < 3 alpha: weight-vs-curvature holds with small rho
        // and the weight-third quotient blows up.
        let p = power(2.5, 1.0);
        let rep = p.check_assumptions(&GridSpec::default()).unwrap();
        assert!(rep.holds(ids::WEIGHT_VS_CURVATURE));
        // rho <= 1/2 - (alpha+1)/(beta+2) = 0.0556: ladder fits 0.05.
        assert_eq!(rep.rho_weight_vs_curvature(), Some(0.05));
        assert!(rep.holds(ids::WEIGHT_THIRD_QUOTIENT_UNBOUNDED));
        // Quotient ~ t^(-1/6): growth across 8 decades is 10^(8/6).
        let growth = rep
            .get(ids::WEIGHT_THIRD_QUOTIENT_UNBOUNDED)
            .unwrap()
            .constant
            .unwrap();
        assert!(rel(growth, 10f64.powf(8.0 / 6.0)) < 1e-6);
    }

    #[test]
    fn assumption_fits_exp_3_1() {
        let p = expf(3.0, 1.0);
        let rep = p.check_assumptions(&GridSpec::default()).unwrap();
        assert!(rep.holds(ids::MONOTONE_STRUCTURE));
        assert!(rep.holds(ids::THIRD_VS_CURVATURE));
        assert!(rep.holds(ids::WEIGHT_VS_THIRD));
        assert!(rep.holds(ids::CURVATURE_HALVING));
        assert_eq!(rep.rho_third_vs_curvature(), Some(0.25));
        // Deep-end doubling ratio tends to 2 (the cubic-over-quadratic
        // prefactor ratio washes out), with the max near the shallow end.
        let rec = rep.get(ids::THIRD_DOUBLING_COMPARABLE).unwrap();
        let c = rec.constant.unwrap();
        assert!((2.0..2.5).contains(&c), "doubling constant {c}");
        let ln_deep = p.gamma2_ln(1e-8).ln_abs - std::f64::consts::LN_2;
        let t1 = p.invert_gamma2_ln(ln_deep).unwrap();
        let t2 = p.invert_gamma2_ln(ln_deep + std::f64::consts::LN_2).unwrap();
        let deep_ratio = (p.gamma3_ln(t2).ln_abs - p.gamma3_ln(t1).ln_abs).exp();
        assert!((deep_ratio - 2.0).abs() < 0.01, "deep-end ratio {deep_ratio}");
    }

    #[test]
    fn weight_vs_third_fails_when_weight_decays_too_fast() {
        let p = expf(3.0, 2.0);
        let rep = p.check_assumptions(&GridSpec::default()).unwrap();
        assert!(!rep.holds(ids::WEIGHT_VS_THIRD));
    }

    #[test]
    fn lemma_lower_bound_fits() {
        // t^-1: |gamma'''| t^3 / gamma''^delta bounded below iff
        // delta <= beta/(beta+2) = 1/3; the 0.05 ladder lands on 0.3.
        let fit = power(1.0, 1.0).fit_lemma_lower(&GridSpec::default()).unwrap();
        assert!(fit.holds);
        assert!((fit.delta - 0.3).abs() < 1e-12);
        assert!(fit.c > 0.0);

        // The guaranteed exponent from the halving step: with
        // (1+eps)^3 = 2, a = ln(2/(1+eps))/ln(1+eps) = 2 and
        // delta = (a-1)/(a+1) = 1/3. Verify that delta directly.
        let p = power(1.0, 1.0);
        let ts = GridSpec::default().points();
        let mut min_r = f64::INFINITY;
        for &t in &ts {
            let r = p.gamma3_ln(t).ln_abs + 3.0 * t.ln() - p.gamma2_ln(t).ln_abs / 3.0;
            min_r = min_r.min(r);
        }
        // Residual is exactly constant for beta = 1 at delta = 1/3.
        assert!(min_r.exp() > 0.0);
        let expect = 6.0 / 2f64.powf(1.0 / 3.0);
        assert!(rel(min_r.exp(), expect) < 1e-9);

        let fit3 = power(3.0, 1.0).fit_lemma_lower(&GridSpec::default()).unwrap();
        assert!(fit3.holds && fit3.delta >= 0.25);
        assert!((fit3.delta - 0.6).abs() < 1e-12);

        let grid = GridSpec::new(0.02, 0.2, 64).unwrap();
        let fite = expf(3.0, 1.0).fit_lemma_lower(&grid).unwrap();
        assert!(fite.holds && fite.delta >= 0.5);
    }

    #[test]
    fn lemma_feeds_series_lower_bound() {
        // gamma''^{-1}(s) |gamma'''(gamma''^{-1}(s))|^(1/3) >= c^(1/3) s^(delta/3).
        for p in [power(3.0, 1.0), power(1.0, 1.0)] {
            let fit = p.fit_lemma_lower(&GridSpec::default()).unwrap();
            let ln_g21 = p.gamma2_at_1().ln();
            for i in 0..40 {
                let ln_s = ln_g21 + 30.0 * std::f64::consts::LN_2 * i as f64 / 39.0;
                let t = p.invert_gamma2_ln(ln_s).unwrap();
                let lhs_ln = t.ln() + p.gamma3_ln(t).ln_abs / 3.0;
                let rhs_ln = fit.c.ln() / 3.0 + fit.delta / 3.0 * ln_s;
                assert!(
                    lhs_ln >= rhs_ln - 1e-9,
                    "series lower bound violated at ln_s = {ln_s}"
                );
            }
        }
    }

    #[test]
    fn inverse_doubling_comparability() {
        // gamma''^{-1}(2s) <= gamma''^{-1}(s) <= (1+eps) gamma''^{-1}(2s).
        for p in [power(3.0, 1.0), expf(3.0, 1.0)] {
            let rep = p.check_assumptions(&GridSpec::default()).unwrap();
            let eps = rep.epsilon_halving().unwrap();
            let ln_g21 = p.gamma2_at_1().ln();
            for i in 0..30 {
                let ln_s = ln_g21 + 25.0 * std::f64::consts::LN_2 * i as f64 / 29.0;
                let t_s = p.invert_gamma2_ln(ln_s).unwrap();
                let t_2s = p.invert_gamma2_ln(ln_s + std::f64::consts::LN_2).unwrap();
                assert!(t_2s <= t_s * (1.0 + 1e-12));
                assert!(t_s <= (1.0 + eps) * t_2s * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn custom_pair_audit() {
        let lin = CustomPhase {
            gamma: Arc::new(|t| 5.0 * t),
            gamma1: Arc::new(|_| 5.0),
            gamma2: Arc::new(|_| 0.0),
            gamma3: Arc::new(|_| 0.0),
            psi: Arc::new(|t| t),
            psi1: Arc::new(|_| 1.0),
        };
        assert!(matches!(
            PhasePair::custom(lin),
            Err(PhaseError::StructuralAudit { .. })
        ));

        let powerlike = CustomPhase {
            gamma: Arc::new(|t: f64| t.powi(-1)),
            gamma1: Arc::new(|t: f64| -t.powi(-2)),
            gamma2: Arc::new(|t: f64| 2.0 * t.powi(-3)),
            gamma3: Arc::new(|t: f64| -6.0 * t.powi(-4)),
            psi: Arc::new(|t: f64| t * t),
            psi1: Arc::new(|t: f64| 2.0 * t),
        };
        let p = PhasePair::custom(powerlike).unwrap();
        assert!(rel(p.invert_gamma2(16.0).unwrap(), 0.5) < 1e-12);
    }

    #[test]
    fn monotone_audit_spots_oscillation() {
        let wobble = CustomPhase {
            gamma: Arc::new(|t: f64| t.powi(-1)),
            gamma1: Arc::new(|t: f64| -t.powi(-2)),
            gamma2: Arc::new(|t: f64| 2.0 * t.powi(-3)),
            gamma3: Arc::new(|t: f64| -6.0 * t.powi(-4) * (1.0 + 0.5 * (40.0 * t.ln()).sin())),
            psi: Arc::new(|t: f64| t * t),
            psi1: Arc::new(|t: f64| 2.0 * t),
        };
        let p = PhasePair::custom(wobble).unwrap();
        let rep = p
            .check_assumptions(&GridSpec::new(1e-6, 1.0, 256).unwrap())
            .unwrap();
        let rec = rep.get(ids::MONOTONE_STRUCTURE).unwrap();
        assert_eq!(rec.verdict, Verdict::Fails);
        assert!(rec.note.contains("gamma'''"));
    }
}
