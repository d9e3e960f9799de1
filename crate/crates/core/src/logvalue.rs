//! Signed magnitudes stored as natural logarithms.

use std::fmt;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            -1 => Ok(Sign::Negative),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Positive),
            _ => Err(format!("sign must be -1, 0 or 1, got {v}")),
        }
    }
}

impl Sign {
    fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

/// `sign · exp(ln)`; `ln` is `None` exactly when the value is zero.
///
/// Serialises as `{"sign": ±1|0, "ln": <f64|null>}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    sign: Sign,
    ln: Option<f64>,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: Sign::Zero,
        ln: None,
    };
    pub const ONE: LogValue = LogValue {
        sign: Sign::Positive,
        ln: Some(0.0),
    };

    /// Positive value `exp(ln)`.
    pub fn from_ln(ln: f64) -> Self {
        LogValue {
            sign: Sign::Positive,
            ln: Some(ln),
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                sign: if x > 0.0 { Sign::Positive } else { Sign::Negative },
                ln: Some(x.abs().ln()),
            }
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Natural log of the magnitude, `None` for zero.
    pub fn ln_abs(&self) -> Option<f64> {
        self.ln
    }

    pub fn log10_abs(&self) -> Option<f64> {
        self.ln.map(|l| l / std::f64::consts::LN_10)
    }

    /// Plain double; overflows to ±∞ and underflows to ±0 outside the
    /// representable range.
    pub fn to_f64(&self) -> f64 {
        match (self.sign, self.ln) {
            (Sign::Zero, _) | (_, None) => 0.0,
            (Sign::Positive, Some(l)) => l.exp(),
            (Sign::Negative, Some(l)) => -l.exp(),
        }
    }

    pub fn recip(&self) -> Self {
        match self.ln {
            None => LogValue {
                sign: Sign::Positive,
                ln: Some(f64::INFINITY),
            },
            Some(l) => LogValue {
                sign: self.sign,
                ln: Some(-l),
            },
        }
    }

    /// `|x|^e` carried with the sign of `x` only for positive `x`.
    ///
    /// # Panics
    /// On negative values, whose real powers are undefined.
    pub fn powf(&self, e: f64) -> Self {
        match self.sign {
            Sign::Zero => Self::ZERO,
            Sign::Positive => LogValue::from_ln(self.ln.expect("nonzero") * e),
            Sign::Negative => panic!("real power of a negative LogValue"),
        }
    }

    /// Scientific-notation rendering, only when `|ln| < 700` so that the
    /// value is an ordinary double.
    pub fn to_decimal_string(&self) -> Option<String> {
        match self.ln {
            None => Some("0".to_string()),
            Some(l) if l.abs() < 700.0 => Some(format!("{:.12e}", self.to_f64())),
            Some(_) => None,
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        let sign = self.sign.times(rhs.sign);
        match (sign, self.ln, rhs.ln) {
            (Sign::Zero, _, _) => LogValue::ZERO,
            (s, Some(a), Some(b)) => LogValue { sign: s, ln: Some(a + b) },
            _ => LogValue::ZERO,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        self * rhs.recip()
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.sign, self.ln) {
            (Sign::Zero, _) | (_, None) => write!(f, "0"),
            (s, Some(l)) => {
                let e10 = l / std::f64::consts::LN_10;
                let exp = e10.floor();
                let mant = 10f64.powf(e10 - exp);
                let sgn = if s == Sign::Negative { "-" } else { "" };
                write!(f, "{sgn}{mant:.6}e{exp}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_and_sign_rules() {
        assert_eq!(LogValue::from_f64(0.0), LogValue::ZERO);
        let a = LogValue::from_f64(-2.0);
        let b = LogValue::from_f64(-3.0);
        assert_eq!((a * b).sign(), Sign::Positive);
        assert!(((a * b).to_f64() - 6.0).abs() < 1e-14);
        assert_eq!((a * LogValue::ZERO).to_f64(), 0.0);
        assert!(((a / b).to_f64() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn extreme_magnitudes_stay_finite() {
        let tiny = LogValue::from_ln(-60_000.0);
        let big = LogValue::from_ln(60_000.0);
        assert_eq!((tiny * big).ln_abs(), Some(0.0));
        assert_eq!(tiny.to_f64(), 0.0);
        assert!(tiny.to_decimal_string().is_none());
        assert!(tiny.to_string().ends_with("e-26058"));
        assert_eq!(tiny.powf(0.5).ln_abs(), Some(-30_000.0));
    }

    #[test]
    fn json_shape() {
        let v = LogValue::from_ln(-3.5);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"sign":1,"ln":-3.5}"#);
        assert_eq!(serde_json::to_string(&LogValue::ZERO).unwrap(), r#"{"sign":0,"ln":null}"#);
        let back: LogValue = serde_json::from_str(r#"{"sign":-1,"ln":2.0}"#).unwrap();
        assert_eq!(back.sign(), Sign::Negative);
    }

    proptest! {
        #[test]
        fn round_trips_representable_doubles(m in 1.0f64..10.0, e in -299i32..299, neg in any::<bool>()) {
            let x = if neg { -m * 10f64.powi(e) } else { m * 10f64.powi(e) };
            let back = LogValue::from_f64(x).to_f64();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs());
        }

        #[test]
        fn multiplication_adds_logs(a in -500.0f64..500.0, b in -500.0f64..500.0, e in -3.0f64..3.0) {
            let (x, y) = (LogValue::from_ln(a), LogValue::from_ln(b));
            prop_assert_eq!((x * y).ln_abs(), Some(a + b));
            prop_assert_eq!(x.powf(e).ln_abs(), Some(a * e));
        }
    }
}
