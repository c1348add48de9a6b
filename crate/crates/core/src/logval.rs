//! Sign/log-magnitude representation for quantities that overflow `f64`.
//!
//! Derivatives of the exponential phase family grow like `exp(sigma/t)` and
//! leave `f64` range long before the singular endpoint is reached. All phase
//! evaluators therefore work in log-magnitude form internally and only
//! exponentiate when a caller asks for a plain value.

/// A real number stored as `sign * exp(ln_abs)`.
///
/// `sign` is `-1.0`, `0.0`, or `1.0`; zero is represented with
/// `ln_abs = -inf`. Arithmetic never overflows: products and quotients add
/// or subtract logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogVal {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogVal {
    pub const ZERO: LogVal = LogVal {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn new(ln_abs: f64, sign: f64) -> Self {
        debug_assert!(sign == 0.0 || sign == 1.0 || sign == -1.0);
        if sign == 0.0 {
            Self::ZERO
        } else {
            LogVal { ln_abs, sign }
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogVal {
                ln_abs: x.abs().ln(),
                sign: x.signum(),
            }
        }
    }

    /// Plain `f64` value; overflows to `±inf` when `ln_abs > ~709.78`.
    pub fn value(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    /// True when `value()` would not be finite.
    pub fn overflows(self) -> bool {
        self.sign != 0.0 && self.ln_abs > f64::MAX.ln()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn abs(self) -> Self {
        LogVal::new(self.ln_abs, if self.sign == 0.0 { 0.0 } else { 1.0 })
    }

    pub fn neg(self) -> Self {
        LogVal::new(self.ln_abs, -self.sign)
    }

    pub fn mul(self, o: Self) -> Self {
        LogVal::new(self.ln_abs + o.ln_abs, self.sign * o.sign)
    }

    pub fn div(self, o: Self) -> Self {
        debug_assert!(o.sign != 0.0, "division by LogVal zero");
        LogVal::new(self.ln_abs - o.ln_abs, self.sign * o.sign)
    }

    pub fn recip(self) -> Self {
        debug_assert!(self.sign != 0.0);
        LogVal::new(-self.ln_abs, self.sign)
    }

    /// Real power of a nonnegative quantity.
    pub fn powf(self, e: f64) -> Self {
        debug_assert!(self.sign >= 0.0, "powf needs a nonnegative base");
        if self.sign == 0.0 {
            return Self::ZERO;
        }
        LogVal::new(self.ln_abs * e, 1.0)
    }

    /// Compare by actual numeric value (sign first, then magnitude).
    pub fn cmp_value(self, o: Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match self
            .sign
            .partial_cmp(&o.sign)
            .expect("LogVal signs are never NaN")
        {
            Equal => {
                if self.sign > 0.0 {
                    self.ln_abs.partial_cmp(&o.ln_abs).unwrap_or(Equal)
                } else if self.sign < 0.0 {
                    o.ln_abs.partial_cmp(&self.ln_abs).unwrap_or(Equal)
                } else {
                    Equal
                }
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_plain_values() {
        for &x in &[3.5, -0.25, 1e300, -1e-300] {
            let v = LogVal::from_value(x);
            assert!((v.value() - x).abs() <= x.abs() * 1e-13);
        }
        assert_eq!(LogVal::from_value(0.0).value(), 0.0);
    }

    #[test]
    fn products_track_signs_beyond_f64_range() {
        let a = LogVal::new(500.0, -1.0);
        let b = LogVal::new(400.0, -1.0);
        let p = a.mul(b);
        assert_eq!(p.sign, 1.0);
        assert!((p.ln_abs - 900.0).abs() < 1e-12);
        assert!(p.overflows());
        let q = p.div(LogVal::new(899.0, 1.0));
        assert!(!q.overflows());
        assert!((q.value() - 1.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn value_ordering_handles_mixed_signs() {
        use std::cmp::Ordering::*;
        let small_neg = LogVal::from_value(-1e-8);
        let big_neg = LogVal::from_value(-1e8);
        let pos = LogVal::from_value(2.0);
        assert_eq!(big_neg.cmp_value(small_neg), Less);
        assert_eq!(small_neg.cmp_value(pos), Less);
        assert_eq!(pos.cmp_value(pos), Equal);
    }
}
