//! Exact arithmetic in ℚ and real quadratic extensions ℚ(√d).
//!
//! Every scalar in the crate is a [`FieldElement`]: a pair `a + b·√d` of
//! reduced rationals, totally ordered by the real embedding. Comparisons are
//! decided by rational case analysis on the signs of `a`, `b` and of
//! `a² − b²·d`; no floating point is ever consulted for a decision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mismatched field descriptors: {0} vs {1}")]
    MismatchedFields(FieldDescriptor, FieldDescriptor),
    #[error("radicand must be at least 2, got {0}")]
    RadicandTooSmall(u64),
    #[error("radicand {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("cannot parse field element {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("sqrt({found}) does not belong to {expected}")]
    ForeignRadicand {
        expected: FieldDescriptor,
        found: u64,
    },
}

/// The carrier field: ℚ itself or a single real quadratic extension ℚ(√d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldDescriptor {
    Rational,
    /// d ≥ 2 and squarefree.
    Quadratic(u64),
}

impl FieldDescriptor {
    pub fn rational() -> Self {
        FieldDescriptor::Rational
    }

    /// ℚ(√d); rejects d < 2 and non-squarefree d.
    pub fn quadratic(d: u64) -> Result<Self, FieldError> {
        if d < 2 {
            return Err(FieldError::RadicandTooSmall(d));
        }
        if !is_squarefree(d) {
            return Err(FieldError::NotSquarefree(d));
        }
        Ok(FieldDescriptor::Quadratic(d))
    }

    pub fn radicand(&self) -> Option<u64> {
        match self {
            FieldDescriptor::Rational => None,
            FieldDescriptor::Quadratic(d) => Some(*d),
        }
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDescriptor::Rational => write!(f, "Q"),
            FieldDescriptor::Quadratic(d) => write!(f, "Q(sqrt({d}))"),
        }
    }
}

fn is_squarefree(d: u64) -> bool {
    let mut p = 2u64;
    while p.checked_mul(p).map_or(false, |sq| sq <= d) {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// An element `a + b·√d` of the field, in canonical form: both fractions
/// reduced with positive denominators, and `b = 0` forced over ℚ.
/// Equality of values coincides with structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: FieldDescriptor,
    a: BigRational,
    b: BigRational,
}

impl FieldElement {
    pub fn new(field: FieldDescriptor, a: BigRational, b: BigRational) -> Self {
        debug_assert!(
            field != FieldDescriptor::Rational || b.is_zero(),
            "rational field elements carry no sqrt part"
        );
        let b = match field {
            FieldDescriptor::Rational => BigRational::zero(),
            FieldDescriptor::Quadratic(_) => b,
        };
        FieldElement { field, a, b }
    }

    pub fn zero(field: FieldDescriptor) -> Self {
        Self::new(field, BigRational::zero(), BigRational::zero())
    }

    pub fn one(field: FieldDescriptor) -> Self {
        Self::new(field, BigRational::one(), BigRational::zero())
    }

    pub fn from_int(field: FieldDescriptor, n: impl Into<BigInt>) -> Self {
        Self::new(field, BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(field: FieldDescriptor, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Self::new(
            field,
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    pub fn from_rational(field: FieldDescriptor, a: BigRational) -> Self {
        Self::new(field, a, BigRational::zero())
    }

    /// The generator √d of a quadratic field.
    pub fn sqrt_generator(field: FieldDescriptor) -> Result<Self, FieldError> {
        match field {
            FieldDescriptor::Rational => Err(FieldError::ForeignRadicand {
                expected: field,
                found: 0,
            }),
            FieldDescriptor::Quadratic(_) => {
                Ok(Self::new(field, BigRational::zero(), BigRational::one()))
            }
        }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    /// Expansion over the ℚ-basis {1, √d}: returns (a, b). The element is
    /// rational iff b = 0.
    pub fn rational_coords(&self) -> (BigRational, BigRational) {
        (self.a.clone(), self.b.clone())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Rational value of a b = 0 element.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.b.is_zero().then_some(&self.a)
    }

    /// Integer value, when the element is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        (self.b.is_zero() && self.a.is_integer()).then(|| self.a.to_integer())
    }

    fn require_same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::MismatchedFields(self.field, other.field))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.require_same_field(other)?;
        Ok(Self::new(self.field, &self.a + &other.a, &self.b + &other.b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.require_same_field(other)?;
        Ok(Self::new(self.field, &self.a - &other.a, &self.b - &other.b))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.require_same_field(other)?;
        match self.field {
            FieldDescriptor::Rational => Ok(Self::new(
                self.field,
                &self.a * &other.a,
                BigRational::zero(),
            )),
            FieldDescriptor::Quadratic(d) => {
                let d = BigRational::from_integer(BigInt::from(d));
                // (a + b√d)(a' + b'√d) = (aa' + bb'd) + (ab' + a'b)√d
                let a = &self.a * &other.a + &self.b * &other.b * &d;
                let b = &self.a * &other.b + &other.a * &self.b;
                Ok(Self::new(self.field, a, b))
            }
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        self.require_same_field(other)?;
        self.checked_mul(&other.inverse()?)
    }

    /// Multiplicative inverse via the norm form: 1/(a+b√d) = (a−b√d)/(a²−b²d).
    pub fn inverse(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        match self.field {
            FieldDescriptor::Rational => Ok(Self::new(
                self.field,
                self.a.recip(),
                BigRational::zero(),
            )),
            FieldDescriptor::Quadratic(d) => {
                let d = BigRational::from_integer(BigInt::from(d));
                let norm = &self.a * &self.a - &self.b * &self.b * &d;
                // norm = 0 with (a,b) ≠ 0 would make √d rational
                debug_assert!(!norm.is_zero());
                Ok(Self::new(self.field, &self.a / &norm, -(&self.b / &norm)))
            }
        }
    }

    /// Sign of the real value: −1, 0 or +1, decided without floating point.
    pub fn signum(&self) -> i8 {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        match (sa, sb) {
            (s, 0) => s,
            (0, s) => s,
            (1, 1) => 1,
            (-1, -1) => -1,
            _ => {
                // opposite signs: |a| vs |b|√d decided by a² vs b²d
                let d = BigInt::from(
                    self.field
                        .radicand()
                        .expect("sqrt part is zero over the rationals"),
                );
                let lhs = &self.a * &self.a;
                let rhs = &self.b * &self.b * BigRational::from_integer(d);
                let cmp = match lhs.cmp(&rhs) {
                    Ordering::Greater => 1,
                    Ordering::Equal => 0,
                    Ordering::Less => -1,
                };
                if sa > 0 {
                    cmp
                } else {
                    -cmp
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    /// Total order matching the real embedding; errors on mixed descriptors.
    pub fn compare(&self, other: &Self) -> Result<Ordering, FieldError> {
        self.require_same_field(other)?;
        Ok(self.checked_sub(other)?.signum().cmp(&0))
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.field);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Largest integer n with n ≤ self, computed exactly via integer square
    /// roots.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        let d = BigInt::from(self.field.radicand().expect("quadratic element"));
        // ⌊|b|·√d⌋ = ⌊√(numer²·d·denom²)⌋ div denom², using ⌊⌊√m⌋/k⌋ = ⌊√m/k⌋
        let num = self.b.numer() * self.b.numer() * &d;
        let den = self.b.denom() * self.b.denom();
        let sqrt_floor = (num * &den).sqrt() / &den;
        let sqrt_term = if self.b.is_negative() {
            // b√d is irrational, hence never an integer
            -sqrt_floor - 1
        } else {
            sqrt_floor
        };
        let mut n = self.a.floor().to_integer() + sqrt_term;
        // self − n ∈ [0, 2); one correction step suffices
        let diff = self - &Self::from_int(self.field, n.clone());
        debug_assert!(!diff.is_negative());
        if (&diff - &Self::one(self.field)).signum() >= 0 {
            n += 1;
        }
        n
    }

    /// Nearest integer, rounding half up.
    pub fn nearest_int(&self) -> BigInt {
        let half = Self::from_ratio(self.field, 1, 2);
        (self + &half).floor()
    }

    /// Approximate value for display only; never used in decisions.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        match self.field.radicand() {
            None => a,
            Some(d) => a + self.b.to_f64().unwrap_or(f64::NAN) * (d as f64).sqrt(),
        }
    }

    /// Canonical text form: "p/q" or "p/q+r/s*sqrt(d)" / "p/q-r/s*sqrt(d)",
    /// with "/1" suppressed.
    pub fn to_canonical_string(&self) -> String {
        if self.b.is_zero() {
            return format_rational(&self.a);
        }
        let d = self.field.radicand().expect("quadratic element");
        let sign = if self.b.is_negative() { '-' } else { '+' };
        format!(
            "{}{}{}*sqrt({})",
            format_rational(&self.a),
            sign,
            format_rational(&self.b.abs()),
            d
        )
    }

    /// Parses the canonical form plus the shorthands "sqrt(d)", "r/s*sqrt(d)"
    /// and leading-sign variants. The radicand in the text must match the
    /// descriptor.
    pub fn parse(field: FieldDescriptor, text: &str) -> Result<Self, FieldError> {
        parse_element(field, text)
    }
}

fn rational_sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_negative() {
        -1
    } else {
        1
    }
}

fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

macro_rules! binop_impl {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field descriptors must agree")
            }
        }
        impl $trait for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop_impl!(Add, add, checked_add);
binop_impl!(Sub, sub, checked_sub);
binop_impl!(Mul, mul, checked_mul);
binop_impl!(Div, div, checked_div);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::new(self.field, -self.a.clone(), -self.b.clone())
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_canonical_string())
    }
}

fn parse_element(field: FieldDescriptor, text: &str) -> Result<FieldElement, FieldError> {
    let err = |reason: &str| FieldError::Parse {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err("empty string"));
    }
    // split into at most two signed terms at top level
    let bytes = s.as_bytes();
    let mut split_at = None;
    for (i, &c) in bytes.iter().enumerate().skip(1) {
        if (c == b'+' || c == b'-') && bytes[i - 1] != b'(' && bytes[i - 1] != b'*' {
            if split_at.is_some() {
                return Err(err("more than two terms"));
            }
            split_at = Some(i);
        }
    }
    let (first, second) = match split_at {
        None => (s, None),
        Some(i) => (&s[..i], Some((&s[i..i + 1], &s[i + 1..]))),
    };

    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    let mut saw_sqrt = false;
    let mut saw_rational = false;
    let mut apply = |term: &str, negate: bool| -> Result<(), FieldError> {
        let term = term.trim();
        let (coeff, is_sqrt) = parse_term(field, term, text)?;
        let coeff = if negate { -coeff } else { coeff };
        if is_sqrt {
            if saw_sqrt {
                return Err(FieldError::Parse {
                    text: text.to_string(),
                    reason: "duplicate sqrt term".to_string(),
                });
            }
            saw_sqrt = true;
            b = coeff;
        } else {
            if saw_rational {
                return Err(FieldError::Parse {
                    text: text.to_string(),
                    reason: "duplicate rational term".to_string(),
                });
            }
            saw_rational = true;
            a = coeff;
        }
        Ok(())
    };
    apply(first, false)?;
    if let Some((sign, rest)) = second {
        apply(rest, sign == "-")?;
    }
    Ok(FieldElement::new(field, a, b))
}

/// Parses one term; returns (coefficient, refers-to-sqrt).
fn parse_term(
    field: FieldDescriptor,
    term: &str,
    whole: &str,
) -> Result<(BigRational, bool), FieldError> {
    let err = |reason: String| FieldError::Parse {
        text: whole.to_string(),
        reason,
    };
    let (negate, term) = match term.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, term),
    };
    let (coeff_text, sqrt_text) = match term.find("sqrt(") {
        None => (term, None),
        Some(pos) => {
            let coeff = term[..pos].trim().trim_end_matches('*').trim();
            (coeff, Some(&term[pos..]))
        }
    };
    let is_sqrt = match sqrt_text {
        None => false,
        Some(sq) => {
            let inner = sq
                .strip_prefix("sqrt(")
                .and_then(|rest| rest.strip_suffix(')'))
                .ok_or_else(|| err("malformed sqrt(...)".to_string()))?;
            let found: u64 = inner
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid radicand {inner:?}")))?;
            if field.radicand() != Some(found) {
                return Err(FieldError::ForeignRadicand {
                    expected: field,
                    found,
                });
            }
            true
        }
    };
    let coeff = if coeff_text.is_empty() {
        if is_sqrt {
            BigRational::one()
        } else {
            return Err(err("empty term".to_string()));
        }
    } else {
        parse_rational(coeff_text).map_err(err)?
    };
    Ok((if negate { -coeff } else { coeff }, is_sqrt))
}

fn parse_rational(text: &str) -> Result<BigRational, String> {
    let parse_int = |s: &str| -> Result<BigInt, String> {
        s.trim()
            .parse::<BigInt>()
            .map_err(|_| format!("invalid integer {s:?}"))
    };
    match text.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(text)?)),
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err("zero denominator".to_string());
            }
            Ok(BigRational::new(parse_int(num)?, den))
        }
    }
}
