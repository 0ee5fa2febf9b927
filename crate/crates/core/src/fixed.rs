//! Fixed-point simulation time.
//!
//! All travel times and timestamps in the simulator are binary fixed-point
//! numbers with [`FRAC_BITS`] fractional bits. Conversions from rationals and
//! square roots round to nearest, ties to even. Every component (scheduler,
//! honest parties, verification predicates) goes through the same conversion
//! routine, so expected-time comparisons are exact bit equalities.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::bigint::BigInt;
use num::integer::Integer;
use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Fractional bits carried by every [`Fix`] value.
pub const FRAC_BITS: u32 = 96;

/// A signed fixed-point time value with 96 fractional bits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fix(i128);

impl Fix {
    pub const ZERO: Fix = Fix(0);

    pub fn from_raw(raw: i128) -> Fix {
        Fix(raw)
    }

    pub fn raw(self) -> i128 {
        self.0
    }

    pub fn from_int(v: i64) -> Fix {
        Fix((v as i128) << FRAC_BITS)
    }

    /// Rounds a rational to the fixed-point grid, ties to even.
    pub fn from_rational(r: &BigRational) -> Fix {
        let shifted = r.numer() << FRAC_BITS;
        let q = div_round_half_even(&shifted, r.denom());
        Fix(bigint_to_i128(&q))
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::one() << FRAC_BITS)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2f64.powi(FRAC_BITS as i32)
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Exact decimal rendering, with trailing zeros trimmed.
    pub fn to_decimal_string(self) -> String {
        let neg = self.0 < 0;
        let a = self.0.unsigned_abs();
        let int = a >> FRAC_BITS;
        let frac = a & ((1u128 << FRAC_BITS) - 1);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&int.to_string());
        if frac != 0 {
            // frac / 2^96 == frac * 5^96 / 10^96, which is exact in decimal.
            let scaled = BigInt::from(frac) * BigInt::from(5u8).pow(FRAC_BITS);
            let digits = scaled.to_string();
            let mut s = format!("{:0>width$}", digits, width = FRAC_BITS as usize);
            while s.ends_with('0') {
                s.pop();
            }
            out.push('.');
            out.push_str(&s);
        }
        out
    }
}

impl fmt::Debug for Fix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fix({})", self.to_decimal_string())
    }
}

impl fmt::Display for Fix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Add for Fix {
    type Output = Fix;
    fn add(self, rhs: Fix) -> Fix {
        Fix(self.0.checked_add(rhs.0).expect("fixed-point time overflow"))
    }
}

impl Sub for Fix {
    type Output = Fix;
    fn sub(self, rhs: Fix) -> Fix {
        Fix(self.0.checked_sub(rhs.0).expect("fixed-point time overflow"))
    }
}

impl Neg for Fix {
    type Output = Fix;
    fn neg(self) -> Fix {
        Fix(-self.0)
    }
}

fn bigint_to_i128(v: &BigInt) -> i128 {
    i128::try_from(v).expect("fixed-point time out of representable range")
}

/// `num / den` rounded to the nearest integer, ties to even. `den > 0`.
fn div_round_half_even(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let neg = num.is_negative();
    let a = num.abs();
    let (q, r) = a.div_rem(den);
    let twice: BigInt = &r * 2;
    let rounded = match twice.cmp(den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    };
    if neg {
        -rounded
    } else {
        rounded
    }
}

/// Floor of `sqrt(num / den)` scaled by `2^FRAC_BITS`, rounded to nearest,
/// ties to even. `num >= 0`, `den > 0`. Returns `(raw_value, value_is_exact)`,
/// where exactness means the scaled square root itself is an integer.
pub(crate) fn sqrt_fixed_round_half_even(num: &BigInt, den: &BigInt) -> (i128, bool) {
    debug_assert!(!num.is_negative() && den.is_positive());
    if num.is_zero() {
        return (0, true);
    }
    // t = sqrt(num * 2^192 / den); floor(t) = isqrt(floor(num * 2^192 / den)).
    let scaled = num << (2 * FRAC_BITS);
    let v = scaled.div_floor(den).sqrt();
    // Compare t with v + 1/2 by comparing 4 * num * 2^192 with den * (2v+1)^2.
    let lhs: BigInt = &scaled * 4;
    let two_v_plus_one = (&v * 2) + 1;
    let rhs = den * (&two_v_plus_one * &two_v_plus_one);
    let rounded = match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => &v + 1,
        std::cmp::Ordering::Less => v.clone(),
        std::cmp::Ordering::Equal => {
            if v.is_even() {
                v.clone()
            } else {
                &v + 1
            }
        }
    };
    let exact = (&v * &v) * den == scaled;
    (bigint_to_i128(&rounded), exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn integer_round_trip() {
        for v in [-7i64, -1, 0, 1, 3, 1000] {
            let f = Fix::from_int(v);
            assert_eq!(f.to_decimal_string(), v.to_string());
            assert_eq!(Fix::from_rational(&BigRational::from_i64(v).unwrap()), f);
        }
    }

    #[test]
    fn decimal_rendering_is_exact() {
        let f = Fix::from_rational(&rat(7, 2));
        assert_eq!(f.to_decimal_string(), "3.5");
        let f = Fix::from_rational(&rat(-13, 4));
        assert_eq!(f.to_decimal_string(), "-3.25");
        // 2^-96 = 5^96/10^96 needs all 96 fractional digits and ends in 5.
        let tiny = Fix::from_raw(1);
        let s = tiny.to_decimal_string();
        assert!(s.starts_with("0.0000"));
        assert_eq!(s.len(), 2 + 96);
        assert!(s.ends_with('5'));
    }

    #[test]
    fn ties_round_to_even() {
        // 1/2^97 is exactly half an ulp; rounds to 0 (even).
        let half_ulp = BigRational::new(BigInt::one(), BigInt::one() << 97);
        assert_eq!(Fix::from_rational(&half_ulp).raw(), 0);
        // 3/2^97 is one and a half ulps; rounds to 2 (even).
        let three_halves = BigRational::new(BigInt::from(3), BigInt::one() << 97);
        assert_eq!(Fix::from_rational(&three_halves).raw(), 2);
        // Negative mirror.
        let neg = BigRational::new(BigInt::from(-3), BigInt::one() << 97);
        assert_eq!(Fix::from_rational(&neg).raw(), -2);
    }

    #[test]
    fn sqrt_exact_cases() {
        let (v, exact) = sqrt_fixed_round_half_even(&BigInt::from(25), &BigInt::one());
        assert_eq!(v, 5i128 << FRAC_BITS);
        assert!(exact);
        let (v, exact) = sqrt_fixed_round_half_even(&BigInt::from(9), &BigInt::from(4));
        assert_eq!(v, 3i128 << (FRAC_BITS - 1));
        assert!(exact);
    }

    #[test]
    fn sqrt_inexact_is_correctly_rounded() {
        // sqrt(2) * 2^96: check the rounded value against a high-precision
        // squaring argument: v must satisfy (v - 1/2)^2 <= 2*2^192 <= (v + 1/2)^2.
        let (v, exact) = sqrt_fixed_round_half_even(&BigInt::from(2), &BigInt::one());
        assert!(!exact);
        let v = BigInt::from(v);
        let target = BigInt::from(2) << (2 * FRAC_BITS);
        let two_v: BigInt = &v * 2;
        let lo: BigInt = (&two_v - BigInt::one()).pow(2);
        let hi: BigInt = (&two_v + BigInt::one()).pow(2);
        assert!(lo <= &target * 4 && &target * 4 <= hi);
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = Fix::from_rational(&rat(1, 3));
        let b = Fix::from_rational(&rat(2, 3));
        // Fixed-point addition is exact on the representations themselves.
        assert_eq!((a + b) - b, a);
    }
}
