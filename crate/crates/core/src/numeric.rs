//! Exact rationals, arbitrary-size factorials and high-precision floats.
//!
//! Every algebraic quantity in the crate is a [`Rational`]. Floats appear
//! only where an exponential `e^{-λt}` or a logarithm is unavoidable.

use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

use crate::error::{Error, Result};

pub type Rational = RBig;
pub type Float = FBig<HalfEven>;

/// Default working precision for floats, in bits.
pub const DEFAULT_PRECISION: usize = 256;
/// Smallest accepted working precision, in bits.
pub const MIN_PRECISION: usize = 64;

/// Summation for iterators of rationals or references to them.
pub trait RationalSum: Iterator {
    fn sum_rational(self) -> Rational;
}

impl<I> RationalSum for I
where
    I: Iterator,
    I::Item: std::borrow::Borrow<Rational>,
{
    fn sum_rational(self) -> Rational {
        self.fold(RBig::ZERO, |acc, x| {
            acc + std::borrow::Borrow::<Rational>::borrow(&x)
        })
    }
}

pub fn factorial(n: usize) -> UBig {
    (1..=n).fold(UBig::ONE, |acc, k| acc * UBig::from(k))
}

pub fn rational_from_int(n: i64) -> Rational {
    RBig::from(IBig::from(n))
}

pub fn ratio(num: i64, den: u64) -> Rational {
    RBig::from_parts(IBig::from(num), UBig::from(den))
}

/// Integer power with a nonnegative exponent.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = RBig::ONE;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Parses `p/q`, integers, plain decimals (`0.05`) and scientific
/// notation (`1e8`, `2.5e-3`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: IBig = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let den: IBig = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if den == IBig::ZERO {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(RBig::from(num) / RBig::from(den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let exp: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..i], exp)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("no digits in {s:?}")));
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let digits: String = format!("{int_part}{frac_part}");
    let digits: UBig = if digits.is_empty() {
        UBig::ZERO
    } else {
        digits
            .parse()
            .map_err(|_| Error::Parse(format!("not a number: {s:?}")))?
    };
    let scale = exponent - frac_part.len() as i64;
    let ten = UBig::from(10u8);
    let mut value = RBig::from(digits);
    if scale >= 0 {
        value *= RBig::from(ten.pow(scale as usize));
    } else {
        value /= RBig::from(ten.pow((-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if *r.denominator() == UBig::ONE {
        r.numerator().to_string()
    } else {
        format!("{}/{}", r.numerator(), r.denominator())
    }
}

pub fn to_float(r: &Rational, precision: usize) -> Float {
    let num = Float::from(r.numerator().clone())
        .with_precision(precision)
        .value();
    let den = Float::from(IBig::from(r.denominator().clone()))
        .with_precision(precision)
        .value();
    num / den
}

pub fn float_from_int(n: i64, precision: usize) -> Float {
    Float::from(IBig::from(n)).with_precision(precision).value()
}

pub fn to_f64(r: &Rational) -> f64 {
    to_float(r, 64).to_f64().value()
}

/// Number of significant decimal digits that round-trip a float of the
/// given binary precision.
pub fn decimal_digits(precision: usize) -> usize {
    (precision as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

/// Decimal scientific notation (`d.ddddde±x`) carrying enough digits to
/// round-trip the configured binary precision.
pub fn format_float(x: &Float, precision: usize) -> String {
    if *x.repr().significand() == IBig::ZERO {
        return "0".to_string();
    }
    let digits = decimal_digits(precision);
    let negative = x.repr().significand() < &IBig::ZERO;
    let abs = if negative { -x.clone() } else { x.clone() };
    // exponent estimate from the binary representation, then corrected
    let ln10 = Float::from(10u8)
        .with_precision(precision + 32)
        .value()
        .ln();
    let work = abs.clone().with_precision(precision + 32).value();
    let log10 = work.ln() / ln10.clone();
    let mut exp10: i64 = log10.floor().to_int().value().try_into().unwrap_or(0);
    let mut scaled = scale_by_pow10(&work, -exp10, precision + 32);
    let ten = Float::from(10u8).with_precision(precision + 32).value();
    let one = Float::ONE.with_precision(precision + 32).value();
    while scaled >= ten {
        scaled /= ten.clone();
        exp10 += 1;
    }
    while scaled < one {
        scaled *= ten.clone();
        exp10 -= 1;
    }
    let mantissa_int = scale_by_pow10(&scaled, digits as i64 - 1, precision + 32)
        .round()
        .to_int()
        .value();
    let mut text = mantissa_int.to_string();
    if text.len() > digits {
        // rounding carried into a new digit
        text.truncate(digits);
        exp10 += 1;
    }
    let trimmed = text.trim_end_matches('0');
    let (head, tail) = trimmed.split_at(1);
    let sign = if negative { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp10}")
    } else {
        format!("{sign}{head}.{tail}e{exp10}")
    }
}

fn scale_by_pow10(x: &Float, exp: i64, precision: usize) -> Float {
    let factor = Float::from(UBig::from(10u8).pow(exp.unsigned_abs() as usize))
        .with_precision(precision)
        .value();
    if exp >= 0 {
        x.clone() * factor
    } else {
        x.clone() / factor
    }
}
