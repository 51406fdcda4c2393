//! Exact arithmetic for β-expansions.
//!
//! A [`BetaNumber`] is an element `p + q·√d` of a real quadratic field (or of
//! ℚ when `q = 0`). Every floor decision in the greedy expansion of 1 is then
//! decided exactly, including the boundary cases where `β·r` lands on an
//! integer (the golden mean hits one at the second digit).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};
use crate::symbolic::{Symbol, Word};

/// Exact real number `rational + irrational·√radicand`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaNumber {
    rational: BigRational,
    irrational: BigRational,
    radicand: u64,
}

impl BetaNumber {
    pub fn from_rational(value: BigRational) -> Self {
        BetaNumber {
            rational: value,
            irrational: BigRational::zero(),
            radicand: 0,
        }
    }

    /// `(a + b·√d) / c`.
    pub fn quadratic(a: i64, b: i64, c: i64, d: u64) -> Result<Self> {
        if c == 0 {
            return Err(LabError::Parse("zero denominator".into()));
        }
        let root = integer_sqrt(d);
        let c = BigInt::from(c);
        if root * root == d {
            let value = BigRational::new(BigInt::from(a) + BigInt::from(b) * BigInt::from(root), c);
            return Ok(Self::from_rational(value));
        }
        Ok(BetaNumber {
            rational: BigRational::new(BigInt::from(a), c.clone()),
            irrational: BigRational::new(BigInt::from(b), c),
            radicand: d,
        })
    }

    pub fn golden() -> Self {
        Self::quadratic(1, 1, 2, 5).expect("valid constant")
    }

    /// Parses `1.8`, `9/5`, `golden`, `sqrt:2` or `quad:a,b,c,d` (meaning `(a+b√d)/c`).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("golden") || t.eq_ignore_ascii_case("phi") {
            return Ok(Self::golden());
        }
        if let Some(rest) = t.strip_prefix("sqrt:") {
            let d: u64 = rest
                .trim()
                .parse()
                .map_err(|_| LabError::Parse(format!("bad radicand in {t}")))?;
            return Self::quadratic(0, 1, 1, d);
        }
        if let Some(rest) = t.strip_prefix("quad:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(LabError::Parse(format!("expected quad:a,b,c,d, got {t}")));
            }
            let ints: std::result::Result<Vec<i64>, _> =
                parts.iter().map(|p| p.parse::<i64>()).collect();
            let ints = ints.map_err(|_| LabError::Parse(format!("bad integer in {t}")))?;
            if ints[3] < 0 {
                return Err(LabError::Parse("negative radicand".into()));
            }
            return Self::quadratic(ints[0], ints[1], ints[2], ints[3] as u64);
        }
        if let Some((num, den)) = t.split_once('/') {
            let num: BigInt = num
                .trim()
                .parse()
                .map_err(|_| LabError::Parse(format!("bad numerator in {t}")))?;
            let den: BigInt = den
                .trim()
                .parse()
                .map_err(|_| LabError::Parse(format!("bad denominator in {t}")))?;
            if den.is_zero() {
                return Err(LabError::Parse("zero denominator".into()));
            }
            return Ok(Self::from_rational(BigRational::new(num, den)));
        }
        parse_decimal(t).map(Self::from_rational)
    }

    pub fn is_integer(&self) -> bool {
        self.irrational.is_zero() && self.rational.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.irrational.is_zero() {
            return p;
        }
        p + self.irrational.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
    }

    pub fn signum(&self) -> Ordering {
        let p = self.rational.signum();
        let q = self.irrational.signum();
        if q.is_zero() || self.radicand == 0 {
            return p.cmp(&BigRational::zero());
        }
        let zero = BigRational::zero();
        match (p.cmp(&zero), q.cmp(&zero)) {
            (Ordering::Less | Ordering::Equal, Ordering::Less) => Ordering::Less,
            (Ordering::Greater | Ordering::Equal, Ordering::Greater) => Ordering::Greater,
            (pos, _) => {
                // opposite signs: compare p² with q²·d
                let p2 = &self.rational * &self.rational;
                let q2d = &self.irrational
                    * &self.irrational
                    * BigRational::from_integer(BigInt::from(self.radicand));
                let magnitude = p2.cmp(&q2d);
                match pos {
                    Ordering::Greater => magnitude,
                    _ => magnitude.reverse(),
                }
            }
        }
    }

    fn radicand_of(&self, other: &Self) -> u64 {
        if self.irrational.is_zero() {
            other.radicand
        } else {
            self.radicand
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.radicand_of(other);
        debug_assert!(
            self.irrational.is_zero() || other.irrational.is_zero() || self.radicand == other.radicand
        );
        let dd = BigRational::from_integer(BigInt::from(d));
        let irrational = &self.rational * &other.irrational + &self.irrational * &other.rational;
        let radicand = if irrational.is_zero() { 0 } else { d };
        BetaNumber {
            rational: &self.rational * &other.rational + &self.irrational * &other.irrational * dd,
            irrational,
            radicand,
        }
    }

    pub fn sub_integer(&self, n: &BigInt) -> Self {
        BetaNumber {
            rational: &self.rational - BigRational::from_integer(n.clone()),
            irrational: self.irrational.clone(),
            radicand: self.radicand,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let approx = self.to_f64();
        let mut n = if approx.is_finite() {
            BigInt::from(approx.floor() as i64)
        } else {
            self.rational.floor().to_integer()
        };
        while self.sub_integer(&n).signum() == Ordering::Less {
            n -= 1;
        }
        loop {
            let next = &n + 1;
            if self.sub_integer(&next).signum() != Ordering::Less {
                n = next;
            } else {
                break;
            }
        }
        n
    }

    /// `⌈log₂ β⌉` for β > 1.
    pub fn ceil_log2(&self) -> u32 {
        let v = self.to_f64();
        v.log2().ceil().max(1.0) as u32
    }
}

impl fmt::Display for BetaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irrational.is_zero() {
            write!(f, "{}", self.rational)
        } else {
            write!(f, "{} + {}*sqrt({})", self.rational, self.irrational, self.radicand)
        }
    }
}

fn integer_sqrt(d: u64) -> u64 {
    let mut r = (d as f64).sqrt() as u64;
    while r * r > d {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= d {
        r += 1;
    }
    r
}

fn parse_decimal(t: &str) -> Result<BigRational> {
    let bad = || LabError::Parse(format!("not a decimal number: {t}"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(num, den);
    Ok(if neg { -value } else { value })
}

/// Greedy expansion of 1 in base β.
#[derive(Clone, Debug, PartialEq)]
pub struct Kneading {
    pub digits: Word,
    /// The expansion of 1 is finite (the remainder hit zero within the computed depth).
    pub terminates: bool,
}

/// Minimum working precision accepted by [`beta_kneading`].
pub fn required_precision_bits(beta: &BetaNumber, digits: usize) -> u32 {
    64 + digits as u32 * beta.ceil_log2()
}

/// Digits `a_1 … a_N` of 1 = Σ a_n β^(−n) from `r_0 = 1, a_n = ⌊β r_{n−1}⌋, r_n = β r_{n−1} − a_n`.
///
/// The recurrence runs in exact field arithmetic, so the floors are certified
/// outright; `precision_bits` is the caller's declared working precision and
/// must cover the digit budget.
pub fn beta_kneading(beta: &BetaNumber, digits: usize, precision_bits: u32) -> Result<Kneading> {
    validate_beta(beta)?;
    let required = required_precision_bits(beta, digits);
    if precision_bits < required {
        return Err(LabError::InsufficientPrecision {
            digit: digits,
            required,
            available: precision_bits,
        });
    }
    let max_digit = beta.floor();
    let mut r = BetaNumber::from_rational(BigRational::one());
    let mut out = Vec::with_capacity(digits);
    let mut terminates = false;
    for _ in 0..digits {
        if terminates {
            out.push(0);
            continue;
        }
        let t = beta.mul(&r);
        let a = t.floor();
        debug_assert!(a >= BigInt::zero() && a <= max_digit);
        out.push(a.to_u8().ok_or_else(|| LabError::Numerical("digit overflow".into()))? as Symbol);
        r = t.sub_integer(&a);
        if r.is_zero() {
            terminates = true;
        }
    }
    let digits = Word::new(out);
    if !self_comparison_holds(digits.as_slice()) {
        return Err(LabError::Numerical("kneading prefix fails self-comparison".into()));
    }
    Ok(Kneading { digits, terminates })
}

pub fn validate_beta(beta: &BetaNumber) -> Result<()> {
    if beta.is_integer() {
        return Err(LabError::IntegerBeta(beta.to_string()));
    }
    let one = BetaNumber::from_rational(BigRational::one());
    let diff = BetaNumber {
        rational: &beta.rational - &one.rational,
        irrational: beta.irrational.clone(),
        radicand: beta.radicand,
    };
    if diff.signum() != Ordering::Greater {
        return Err(LabError::InvalidSpace(format!("beta must exceed 1, got {beta}")));
    }
    Ok(())
}

/// Every left shift of `a` is lexicographically ≤ `a` on the overlap.
pub fn self_comparison_holds(a: &[Symbol]) -> bool {
    (1..a.len()).all(|shift| a[shift..] <= a[..a.len() - shift])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_exactly() {
        let b = BetaNumber::parse("1.8").unwrap();
        assert_eq!(b, BetaNumber::from_rational(BigRational::new(9.into(), 5.into())));
        assert!(BetaNumber::parse("1.x").is_err());
        assert!(BetaNumber::parse("2").unwrap().is_integer());
        assert!(BetaNumber::parse("4/2").unwrap().is_integer());
    }

    #[test]
    fn quadratic_sign_and_floor() {
        let g = BetaNumber::golden();
        assert_eq!(g.floor(), BigInt::from(1));
        let g2 = g.mul(&g);
        // g² = g + 1
        assert_eq!(g2.floor(), BigInt::from(2));
        assert_eq!(g2.sub_integer(&BigInt::from(1)), g);
        let s2 = BetaNumber::parse("sqrt:2").unwrap();
        assert_eq!(s2.floor(), BigInt::from(1));
        assert_eq!(s2.mul(&s2), BetaNumber::from_rational(BigRational::from_integer(2.into())));
        // perfect squares collapse to rationals
        assert!(BetaNumber::parse("sqrt:9").unwrap().is_integer());
    }

    #[test]
    fn golden_kneading_terminates() {
        let k = beta_kneading(&BetaNumber::golden(), 8, 256).unwrap();
        assert_eq!(k.digits.as_slice(), &[1, 1, 0, 0, 0, 0, 0, 0]);
        assert!(k.terminates);
    }

    #[test]
    fn first_digit_is_integer_part() {
        let k = beta_kneading(&BetaNumber::parse("1.8").unwrap(), 1, 128).unwrap();
        assert_eq!(k.digits.as_slice(), &[1]);
        let k = beta_kneading(&BetaNumber::parse("3.5").unwrap(), 1, 128).unwrap();
        assert_eq!(k.digits.as_slice(), &[3]);
    }

    #[test]
    fn rejects_integer_and_small_beta() {
        assert!(matches!(
            beta_kneading(&BetaNumber::parse("2").unwrap(), 4, 256),
            Err(LabError::IntegerBeta(_))
        ));
        assert!(beta_kneading(&BetaNumber::parse("0.5").unwrap(), 4, 256).is_err());
    }

    #[test]
    fn demands_precision() {
        let b = BetaNumber::parse("1.8").unwrap();
        let err = beta_kneading(&b, 64, 100).unwrap_err();
        assert!(matches!(err, LabError::InsufficientPrecision { required: 128, .. }));
    }
}
