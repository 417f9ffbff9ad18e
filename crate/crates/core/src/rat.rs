//! Exact rational numbers: parsing, printing and JSON encoding.
//!
//! Probabilities are arbitrary-precision rationals.  Decimal literals are read
//! exactly, so `0.1` is the rational `1/10`, never a binary float.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

/// Exact rational number, always kept in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Builds `n / d`.  Panics if `d` is zero.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// The rational `n`.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Whether `p` lies in the closed unit interval.
pub fn is_probability(p: &Rat) -> bool {
    !p.is_negative() && *p <= Rat::one()
}

/// `1 - p`.
pub fn complement(p: &Rat) -> Rat {
    Rat::one() - p
}

/// Parses `"3"`, `"1/3"`, `"0.25"` or `".5"` into an exact rational.
///
/// Returns `None` on anything else, including a zero denominator and signs.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_digits(num.trim())?;
        let den = parse_digits(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(Rat::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        let whole = if whole.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(whole)?
        };
        let frac_value = if frac.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(frac)?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rat::new(whole * &scale + frac_value, scale));
    }
    parse_digits(text).map(Rat::from_integer)
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Prints a rational as `n` or `n/d`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

/// JSON encoding `[numerator, denominator]`.  Components that do not fit in
/// 64 bits are written as decimal strings.
pub fn rat_json(r: &Rat) -> Value {
    Value::Array(vec![int_json(r.numer()), int_json(r.denom())])
}

/// Decodes a rational written as `[n, d]`, `"n/d"`, a decimal string, or a
/// JSON integer.
pub fn rat_from_json(v: &Value) -> Option<Rat> {
    match v {
        Value::Array(items) if items.len() == 2 => {
            let part = |x: &Value| -> Option<BigInt> {
                match x {
                    Value::Number(n) => n.as_i64().map(BigInt::from),
                    Value::String(s) => s.parse().ok(),
                    _ => None,
                }
            };
            let n = part(&items[0])?;
            let d = part(&items[1])?;
            if d.is_zero() {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        Value::String(s) => parse_rat(s),
        Value::Number(n) => n.as_u64().map(|v| Rat::from_integer(BigInt::from(v))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rat("0.1"), Some(rat(1, 10)));
        assert_eq!(parse_rat(".5"), Some(rat(1, 2)));
        assert_eq!(parse_rat("1.25"), Some(rat(5, 4)));
        assert_eq!(parse_rat("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rat("7"), Some(int(7)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("-1"), None);
        assert_eq!(parse_rat("."), None);
    }

    #[test]
    fn printing_round_trips() {
        for r in [rat(1, 3), int(0), int(1), rat(471, 1000)] {
            assert_eq!(parse_rat(&fmt_rat(&r)), Some(r.clone()));
            assert_eq!(rat_from_json(&rat_json(&r)), Some(r));
        }
        assert_eq!(fmt_rat(&rat(2, 4)), "1/2");
    }
}
