//! Exact rational scalars and their text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type ExactScalar = BigRational;

pub fn from_int<T: Into<BigInt>>(value: T) -> ExactScalar {
    BigRational::from_integer(value.into())
}

pub fn ratio<T: Into<BigInt>, U: Into<BigInt>>(numer: T, denom: U) -> ExactScalar {
    BigRational::new(numer.into(), denom.into())
}

pub fn zero() -> ExactScalar {
    ExactScalar::zero()
}

pub fn one() -> ExactScalar {
    ExactScalar::one()
}

/// Lossless `numerator/denominator` rendering (`"142/1"` for integers).
pub fn to_exact_string(value: &ExactScalar) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Inverse of [`to_exact_string`]. A bare integer is also accepted.
pub fn parse_exact(text: &str) -> Result<ExactScalar> {
    let text = text.trim();
    let parsed = match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad_rational(text))?;
            let d: BigInt = d.trim().parse().map_err(|_| bad_rational(text))?;
            if d.is_zero() {
                return Err(bad_rational(text));
            }
            BigRational::new(n, d)
        }
        None => from_int(text.parse::<BigInt>().map_err(|_| bad_rational(text))?),
    };
    Ok(parsed)
}

fn bad_rational(text: &str) -> Error {
    Error::Domain(format!("not a rational number: {text:?}"))
}

/// Nearest `f64`; only used for display.
pub fn to_f64(value: &ExactScalar) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // both parts overflow f64: scale down by a common power of two
        let shift = value.numer().bits().max(value.denom().bits()).saturating_sub(1000);
        let n = (value.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (value.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_integers_with_unit_denominator() {
        assert_eq!(to_exact_string(&from_int(142)), "142/1");
        assert_eq!(to_exact_string(&ratio(-6, 8)), "-3/4");
    }

    #[test]
    fn rejects_garbage_and_zero_denominator() {
        assert!(parse_exact("1/0").is_err());
        assert!(parse_exact("abc").is_err());
        assert_eq!(parse_exact(" 7 ").unwrap(), from_int(7));
    }

    #[test]
    fn huge_values_still_convert() {
        let big = ratio(BigInt::from(3) << 2000usize, BigInt::from(1) << 2000usize);
        assert!((to_f64(&big) - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn exact_string_round_trips(n in any::<i64>(), d in 1i64..=i64::MAX) {
            let value = ratio(n, d);
            prop_assert_eq!(parse_exact(&to_exact_string(&value)).unwrap(), value);
        }
    }
}
