//! Exact rational numbers and the small helpers the rest of the crate leans on.

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.46"` or `"-1.25"`.
///
/// Decimals are converted exactly: `"0.46"` is `46/100`, never a binary float.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = parse_int(p)?;
        let den: BigInt = parse_int(q)?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("malformed decimal `{s}`"));
        }
        let int_part: BigInt = if digits.is_empty() { BigInt::zero() } else { parse_int(digits)? };
        let frac_part: BigInt = parse_int(frac)?;
        let scale = num::pow(BigInt::from(10u32), frac.len());
        let mag = Rational::new(int_part * &scale + frac_part, scale);
        return Ok(if negative { -mag } else { mag });
    }
    Ok(Rational::from_integer(parse_int(s)?))
}

fn parse_int(s: &str) -> Result<BigInt, String> {
    let t = s.trim();
    let body = t.trim_start_matches(['-', '+']);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("malformed number `{t}`"));
    }
    t.parse::<BigInt>().map_err(|e| format!("malformed number `{t}`: {e}"))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Twelve significant digits with a leading `~`, the marker for numerically computed values.
pub fn format_approx(x: f64) -> String {
    if x == 0.0 {
        return "~0".into();
    }
    let s = format!("{:.*e}", 11, x);
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        };
        format!("~{trimmed}")
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("~{m}e{exp}")
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Huge operands: scale both down by a common power of two first.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Largest integer `<= r`.
pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.46").unwrap(), rat(46, 100));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("46/100").unwrap(), rat(23, 50));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational(&rat(6, 10)), "3/5");
        assert_eq!(format_rational(&int(-4)), "-4");
        assert_eq!(format_approx(2.0 / 5f64.sqrt()), "~0.894427191");
        assert_eq!(format_approx(1.0), "~1");
        assert_eq!(format_approx(1234.5), "~1234.5");
        assert_eq!(format_approx(1e-9), "~1e-9");
    }

    #[test]
    fn huge_values_convert() {
        let big = Rational::new(num::pow(BigInt::from(3), 900), num::pow(BigInt::from(3), 899));
        assert_eq!(to_f64(&big), 3.0);
    }

    proptest! {
        #[test]
        fn add_then_subtract_is_identity(a in -10_000i64..10_000, b in 1i64..500, c in -10_000i64..10_000, d in 1i64..500) {
            let x = rat(a, b);
            let y = rat(c, d);
            prop_assert_eq!((&x + &y) - &y, x.clone());
            prop_assert!(x.denom().is_positive());
            prop_assert!(x.numer().gcd(x.denom()).is_one());
        }

        #[test]
        fn format_parse_round_trip(a in -10_000i64..10_000, b in 1i64..500) {
            let x = rat(a, b);
            prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
        }
    }
}
