//! Exact ordered-field scalars: rationals and real quadratic irrationals.
//!
//! A [`Scalar`] stores a value `a + b*sqrt(D)` with `a`, `b` reduced rationals
//! and `D` a square-free non-negative integer (`D = 0` forces `b = 0`, i.e. a
//! pure rational).  All geometric predicates in this crate reduce to exact sign
//! computations on these values; no floating point is ever consulted for a
//! decision.  Two scalars taking part in one computation must share the same
//! `D`: mixing discriminants is a [`NumError::MixedDiscriminant`] error (a
//! rational scalar is compatible with every `D`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use thiserror::Error;

/// Errors produced by scalar arithmetic and parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    /// Two quadratic scalars with different square-free discriminants met in
    /// one operation.
    #[error("mixed discriminants: sqrt({0}) vs sqrt({1})")]
    MixedDiscriminant(u64, u64),
    /// Division by an exactly zero scalar.
    #[error("division by zero")]
    DivisionByZero,
    /// Text did not match the scalar grammar.
    #[error("scalar syntax error: {0}")]
    SyntaxError(String),
    /// A `sqrt(D)` literal with `D` not square-free (or zero).
    #[error("discriminant {0} is not square-free")]
    NonSquareFreeD(u64),
}

/// Returns true iff `d` is square-free (no repeated prime factor).
fn is_square_free(mut d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= d {
        if d % p == 0 {
            d /= p;
            if d % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// An exact element `a + b*sqrt(d)` of ℚ or a real quadratic field ℚ(√d).
///
/// Invariants: `a`, `b` are reduced rationals with positive denominators
/// (maintained by `BigRational`); `d` is square-free; `b = 0` implies `d = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
    d: u64,
}

impl Scalar {
    /// The rational scalar `a`.
    pub fn from_rational(a: BigRational) -> Self {
        Scalar { a, b: BigRational::zero(), d: 0 }
    }

    /// The integer scalar `n`.
    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// The rational scalar `p/q` (`q != 0`).
    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Scalar::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// Builds `a + b*sqrt(d)` after checking that `d` is square-free.
    pub fn quadratic(a: BigRational, b: BigRational, d: u64) -> Result<Self, NumError> {
        if !b.is_zero() && !is_square_free(d) {
            return Err(NumError::NonSquareFreeD(d));
        }
        Ok(Scalar { a, b, d }.normalized())
    }

    /// The scalar `sqrt(d)` for square-free `d > 0`.
    pub fn sqrt(d: u64) -> Result<Self, NumError> {
        Scalar::quadratic(BigRational::zero(), BigRational::from_integer(BigInt::from(1)), d)
    }

    /// Zero.
    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    /// One.
    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    fn normalized(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 0;
        }
        self
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    /// Irrational coefficient `b`.
    pub fn sqrt_coefficient(&self) -> &BigRational {
        &self.b
    }

    /// The discriminant `d` (0 for pure rationals).
    pub fn discriminant(&self) -> u64 {
        self.d
    }

    /// True iff the value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True iff the value is a pure rational.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The common discriminant of two scalars, or an error when both are
    /// genuinely quadratic over different fields.
    fn join_d(&self, rhs: &Scalar) -> Result<u64, NumError> {
        match (self.d, rhs.d) {
            (0, d) | (d, 0) => Ok(d),
            (d1, d2) if d1 == d2 => Ok(d1),
            (d1, d2) => Err(NumError::MixedDiscriminant(d1, d2)),
        }
    }

    /// Exact addition.
    pub fn checked_add(&self, rhs: &Scalar) -> Result<Scalar, NumError> {
        let d = self.join_d(rhs)?;
        Ok(Scalar { a: &self.a + &rhs.a, b: &self.b + &rhs.b, d }.normalized())
    }

    /// Exact subtraction.
    pub fn checked_sub(&self, rhs: &Scalar) -> Result<Scalar, NumError> {
        let d = self.join_d(rhs)?;
        Ok(Scalar { a: &self.a - &rhs.a, b: &self.b - &rhs.b, d }.normalized())
    }

    /// Exact multiplication: `(a1 + b1√D)(a2 + b2√D) = a1a2 + b1b2 D + (a1b2 + a2b1)√D`.
    pub fn checked_mul(&self, rhs: &Scalar) -> Result<Scalar, NumError> {
        let d = self.join_d(rhs)?;
        let big_d = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &rhs.a + &self.b * &rhs.b * big_d;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Ok(Scalar { a, b, d }.normalized())
    }

    /// Exact division via multiplication by the conjugate.
    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, NumError> {
        if rhs.is_zero() {
            return Err(NumError::DivisionByZero);
        }
        let d = self.join_d(rhs)?;
        let big_d = BigRational::from_integer(BigInt::from(d));
        // 1/(a + b√D) = (a − b√D)/(a² − b²D); the norm a² − b²D vanishes only
        // for the zero scalar because D is square-free (√D is irrational).
        let norm = &rhs.a * &rhs.a - &rhs.b * &rhs.b * big_d;
        debug_assert!(!norm.is_zero());
        let conj = Scalar { a: rhs.a.clone(), b: -rhs.b.clone(), d };
        let num = self.checked_mul(&conj)?;
        Ok(Scalar { a: &num.a / &norm, b: &num.b / &norm, d }.normalized())
    }

    /// Exact sign of `a + b√d`, decided by rational case analysis
    /// (comparing `a²` against `b²·d` when the parts disagree in sign).
    pub fn signum(&self) -> i8 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        match (sa, sb) {
            (0, 0) => 0,
            (s, 0) | (0, s) => s,
            (s1, s2) if s1 == s2 => s1,
            (s1, _) => {
                // a and b√d disagree in sign; compare magnitudes a² vs b²·d.
                if self.d <= 64 {
                    if let (Some((an, ad)), Some((bn, bd))) =
                        (small_rat(&self.a), small_rat(&self.b))
                    {
                        // |an·bd|, |bn·ad| < 2^28, so the squares stay below
                        // 2^56 and the d-weighted side below 2^62 in i128.
                        let x = (an * bd).pow(2);
                        let y = (bn * ad).pow(2) * self.d as i128;
                        return if x > y { s1 } else { -s1 };
                    }
                }
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
                match a2.cmp(&b2d) {
                    Ordering::Greater => s1,
                    Ordering::Less => -s1,
                    // a² = b²·d with b ≠ 0 would make √d rational.
                    Ordering::Equal => unreachable!("square-free d admits no rational sqrt"),
                }
            }
        }
    }

    /// True iff the value is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    /// True iff the value is strictly negative.
    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    /// Absolute value.
    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact total-order comparison; panics on mixed discriminants (callers
    /// compare values from one document, which share a single `D`).
    pub fn cmp_exact(&self, rhs: &Scalar) -> Ordering {
        let d = self.d.max(rhs.d);
        if (self.d == 0 || self.d == d) && (rhs.d == 0 || rhs.d == d) && d <= 64 {
            if let (Some((a1n, a1d)), Some((b1n, b1d)), Some((a2n, a2d)), Some((b2n, b2d))) = (
                small_rat(&self.a),
                small_rat(&self.b),
                small_rat(&rhs.a),
                small_rat(&rhs.b),
            ) {
                // Sign of (a1−a2) + (b1−b2)√d via cross-multiplied integers:
                // |un|, |vn| < 2^29 and denominators < 2^14, so |u|, |v| < 2^57
                // and the squared comparison (times d <= 64) fits in i128.
                let un = a1n * a2d - a2n * a1d;
                let vn = b1n * b2d - b2n * b1d;
                let u = un * (b1d * b2d);
                let v = vn * (a1d * a2d);
                let sign = match (u.signum(), v.signum()) {
                    (0, 0) => 0,
                    (s, 0) | (0, s) => s,
                    (s1, s2) if s1 == s2 => s1,
                    (s1, _) => {
                        if u * u > v * v * d as i128 {
                            s1
                        } else {
                            -s1
                        }
                    }
                };
                return match sign {
                    -1 => Ordering::Less,
                    0 => Ordering::Equal,
                    _ => Ordering::Greater,
                };
            }
        }
        match self.checked_sub(rhs).expect("comparison across discriminants").signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// The whole scalar as scaled integers `(a + b√d) / e` with `e > 0`,
    /// all three bounded by 2^28, for the determinant fast path.
    fn small_scaled(&self) -> Option<(i128, i128, i128)> {
        let (an, ad) = small_rat(&self.a)?;
        let (bn, bd) = small_rat(&self.b)?;
        Some((an * bd, bn * ad, ad * bd))
    }

    /// Exact sign of `p·q − r·s`, the building block of every 2×2
    /// determinant predicate.  Operands with small parts take an
    /// all-integer path (the common case in chart development); anything
    /// else falls back to full scalar arithmetic.
    pub fn det2_sign(p: &Scalar, q: &Scalar, r: &Scalar, s: &Scalar) -> i8 {
        let d = p.d.max(q.d).max(r.d).max(s.d);
        if d <= 64 && [p, q, r, s].iter().all(|t| t.d == 0 || t.d == d) {
            if let (Some((pa, pb, pe)), Some((qa, qb, qe)), Some((ra, rb, re)), Some((sa, sb, se))) =
                (p.small_scaled(), q.small_scaled(), r.small_scaled(), s.small_scaled())
            {
                // Each product numerator part is below 2^63 and the cross
                // denominators below 2^56, so `na`, `nb` stay below 2^120.
                let di = d as i128;
                let na = (pa * qa + pb * qb * di) * (re * se) - (ra * sa + rb * sb * di) * (pe * qe);
                let nb = (pa * qb + pb * qa) * (re * se) - (ra * sb + rb * sa) * (pe * qe);
                return match (na.signum() as i8, nb.signum() as i8) {
                    (0, 0) => 0,
                    (t, 0) | (0, t) => t,
                    (t1, t2) if t1 == t2 => t1,
                    (t1, _) => {
                        // na² and nb²·d exceed i128; two BigInt squarings
                        // still beat the rational path by a wide margin.
                        let x = BigInt::from(na).pow(2);
                        let y = BigInt::from(nb).pow(2) * BigInt::from(d);
                        if x > y {
                            t1
                        } else {
                            -t1
                        }
                    }
                };
            }
        }
        (&(p * q) - &(r * s)).signum()
    }

    /// A floating-point approximation, for display only — never for decisions.
    pub fn to_f64(&self) -> f64 {
        use num::ToPrimitive;
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }
}

/// Both parts of `r` as `i128` when they are small enough for the
/// overflow-free integer comparisons above; `None` sends the caller to the
/// general big-rational path.  The bound keeps every product of four parts
/// (and its square times `d <= 64`) inside `i128`.
fn small_rat(r: &BigRational) -> Option<(i128, i128)> {
    use num::ToPrimitive;
    const LIM: i64 = 1 << 14;
    let n = r.numer().to_i64()?;
    let d = r.denom().to_i64()?;
    (n.abs() < LIM && d < LIM).then_some((n as i128, d as i128))
}

fn rat_sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_exact(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$checked(&rhs).expect("scalar arithmetic")
            }
        }
        impl<'a> $trait<&'a Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                self.$checked(rhs).expect("scalar arithmetic")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Canonical text form: `p/q` (or `p`) for rationals, and
    /// `a+b*sqrt(D)` / `a-b*sqrt(D)` for quadratics (with `|b|` printed).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", format_rational(&self.a))
        } else {
            let op = if self.b.is_negative() { "-" } else { "+" };
            write!(f, "{}{}{}*sqrt({})", format_rational(&self.a), op, format_rational(&self.b.abs()), self.d)
        }
    }
}

fn parse_rational(text: &str) -> Result<BigRational, NumError> {
    let err = || NumError::SyntaxError(format!("bad rational {text:?}"));
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    if numer.is_empty()
        || denom.is_empty()
        || !numer.bytes().all(|c| c.is_ascii_digit())
        || !denom.bytes().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let n = BigInt::parse_bytes(numer.as_bytes(), 10).ok_or_else(err)?;
    let d = BigInt::parse_bytes(denom.as_bytes(), 10).ok_or_else(err)?;
    if d.is_zero() {
        return Err(NumError::SyntaxError(format!("zero denominator in {text:?}")));
    }
    Ok(BigRational::new(BigInt::from(sign) * n, d))
}

impl FromStr for Scalar {
    type Err = NumError;

    /// Parses the grammar `rational := [-]digits[/digits]`,
    /// `scalar := rational | rational ("+"|"-") rational "*sqrt(" digits ")"`.
    fn from_str(text: &str) -> Result<Self, NumError> {
        let text = text.trim();
        let Some(head) = text.strip_suffix(')') else {
            // No sqrt suffix: a plain rational.
            return Ok(Scalar::from_rational(parse_rational(text)?));
        };
        let (lhs, d_text) = head
            .split_once("*sqrt(")
            .ok_or_else(|| NumError::SyntaxError(format!("bad scalar {text:?}")))?;
        if d_text.is_empty() || !d_text.bytes().all(|c| c.is_ascii_digit()) {
            return Err(NumError::SyntaxError(format!("bad discriminant in {text:?}")));
        }
        let d: u64 = d_text
            .parse()
            .map_err(|_| NumError::SyntaxError(format!("discriminant overflow in {text:?}")))?;
        // Split `lhs` into `a ± b`: the separator is the first sign character
        // past position 0 (the leading character may be the sign of `a`).
        let sep = lhs
            .char_indices()
            .skip(1)
            .find(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .ok_or_else(|| NumError::SyntaxError(format!("bad scalar {text:?}")))?;
        let a = parse_rational(&lhs[..sep])?;
        let b_mag = parse_rational(&lhs[sep + 1..])?;
        let b = if lhs.as_bytes()[sep] == b'-' { -b_mag } else { b_mag };
        if b.is_zero() {
            return Ok(Scalar::from_rational(a));
        }
        Scalar::quadratic(a, b, d)
    }
}
