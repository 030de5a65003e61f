//! Exact rational arithmetic helpers.
//!
//! Rational values back every computation whose contract is exact: the
//! defect recursion, rational dipole solves, and regression fixtures.
//! The carrier is [`num_rational::BigRational`], which keeps numerator and
//! denominator coprime with a positive denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Canonical exact rational: arbitrary-precision, reduced, positive denominator.
pub type Rational = BigRational;

/// Parses `"p"` or `"p/q"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Exact rational value of a finite `f64` (every finite double is dyadic).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Parse(format!("{x} is not finite")))
}

/// Nearest `f64` to an exact rational (round to nearest even), safe for
/// operands far beyond the `f64` exponent range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_integer::Integer;
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().abs().into_parts().1;
    let den = r.denom().abs().into_parts().1;
    // Scale so the integer quotient carries at least 55 significant bits:
    // the bits below the f64 mantissa then act as round and sticky bits,
    // with the remainder folded into the sticky position.
    let shift = 55 - (num.bits() as i64 - den.bits() as i64);
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num << shift as u64, den)
    } else {
        (num, den << (-shift) as u64)
    };
    let (q, rem) = scaled_num.div_rem(&scaled_den);
    let mut q64 = u64::try_from(&q).expect("scaled quotient fits in 64 bits");
    if !rem.is_zero() {
        q64 |= 1;
    }
    let exponent = -shift;
    if exponent > 1024 {
        return sign * f64::INFINITY;
    }
    if exponent < -1140 {
        return sign * 0.0;
    }
    sign * (q64 as f64) * 2f64.powi(exponent as i32)
}

/// Formats a rational as `p/q` (or `p` when the denominator is one).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
