//! Scalar fields for coefficient arithmetic.
//!
//! [`Exact`] is the number field `Q(λ)` where λ is the real root of
//! `6λ³ − 18λ² + 9λ − 1 = 0`, the diagonal coefficient of the singly diagonally
//! implicit methods. Every built-in coefficient, rational or λ-dependent, is an
//! element of this field, so order conditions evaluate to exact zero residuals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Printed 24-digit approximation used to seed the Newton iteration for λ.
pub const LAMBDA_SEED: &str = "0.435866521508458999416019";

/// Digits kept for the high-precision value of λ.
const LAMBDA_DIGITS: u32 = 80;

/// Arithmetic needed by the generic order-condition and expansion code.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(p: i64, q: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn from_int(p: i64) -> Self {
        Self::from_ratio(p, 1)
    }

    /// Equality up to the storage precision of the field.
    fn close_to(&self, other: &Self) -> bool;

    /// Sign test that is exact whenever the value is exactly zero.
    fn is_negative(&self) -> bool {
        !self.is_zero() && self.to_f64() < 0.0
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn close_to(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-14 * (1.0 + self.abs().max(other.abs()))
    }
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Cubic whose real root is λ, lowest degree first: −1 + 9x − 18x² + 6x³.
fn cubic(x: &BigRational) -> BigRational {
    let x2 = x * x;
    let x3 = &x2 * x;
    rat(-1, 1) + rat(9, 1) * x - rat(18, 1) * &x2 + rat(6, 1) * x3
}

fn cubic_prime(x: &BigRational) -> BigRational {
    rat(9, 1) - rat(36, 1) * x + rat(18, 1) * x * x
}

/// Parse a decimal literal such as `-0.125` or `3` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let m = parse_decimal(mantissa)?;
        let e: i32 = exp.parse().ok()?;
        let p = BigRational::from_integer(BigInt::from(10u32).pow(e.unsigned_abs()));
        return Some(if e >= 0 { m * p } else { m / p });
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Render a rational as a decimal string truncated toward zero at `digits` fractional digits.
pub fn rational_to_decimal(x: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (x.abs() * BigRational::from_integer(scale.clone())).to_integer();
    let int_part = &scaled / &scale;
    let frac = (&scaled % &scale).to_string();
    let sign = if x.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac:0>width$}", width = digits as usize)
}

/// λ to [`LAMBDA_DIGITS`] decimal digits, from exact Newton iteration on the cubic
/// starting at [`LAMBDA_SEED`].
pub fn lambda_rational() -> &'static BigRational {
    static CELL: OnceLock<BigRational> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut x = parse_decimal(LAMBDA_SEED).expect("seed literal");
        // Quadratic convergence from 24 digits: two steps give > 90 digits.
        for _ in 0..2 {
            x = &x - cubic(&x) / cubic_prime(&x);
        }
        let scale = BigInt::from(10u32).pow(LAMBDA_DIGITS);
        let truncated = (&x * BigRational::from_integer(scale.clone())).round().to_integer();
        BigRational::new(truncated, scale)
    })
}

/// λ as the nearest double.
pub fn lambda_f64() -> f64 {
    lambda_rational().to_f64().expect("finite")
}

/// Residual of the defining cubic at the stored high-precision λ.
pub fn lambda_cubic_residual() -> BigRational {
    cubic(lambda_rational())
}

/// Element `p0 + p1 λ + p2 λ²` of `Q(λ)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exact {
    parts: [BigRational; 3],
}

impl Exact {
    pub fn rational(r: BigRational) -> Self {
        Exact { parts: [r, BigRational::zero(), BigRational::zero()] }
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::rational(rat(p, q))
    }

    pub fn int(p: i64) -> Self {
        Self::ratio(p, 1)
    }

    /// The generator λ itself.
    pub fn lambda() -> Self {
        Exact { parts: [BigRational::zero(), BigRational::one(), BigRational::zero()] }
    }

    /// Polynomial in λ with integer coefficients, lowest degree first.
    pub fn lambda_poly(coeffs: &[i64]) -> Self {
        let l = Self::lambda();
        let mut acc = Self::int(0);
        for &c in coeffs.iter().rev() {
            acc = acc * l.clone() + Self::int(c);
        }
        acc
    }

    pub fn parts(&self) -> &[BigRational; 3] {
        &self.parts
    }

    /// `Some` when the element has no λ component.
    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.parts[1].is_zero() && self.parts[2].is_zero()).then_some(&self.parts[0])
    }

    /// High-precision rational approximation of the real value.
    pub fn approx(&self) -> BigRational {
        let l = lambda_rational();
        &self.parts[0] + &self.parts[1] * l + &self.parts[2] * l * l
    }

    pub fn to_decimal(&self, digits: u32) -> String {
        rational_to_decimal(&self.approx(), digits)
    }

    /// Parse `"p/q"`, an integer, or a decimal literal.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            return Some(Self::rational(BigRational::new(p, q)));
        }
        parse_decimal(s).map(Self::rational)
    }

    /// Multiplicative inverse, by solving `self · y = 1` in the basis {1, λ, λ²}.
    pub fn inv(&self) -> Self {
        assert!(!Field::is_zero(self), "division by zero in Q(λ)");
        // Columns: self·1, self·λ, self·λ².
        let mut cols = Vec::with_capacity(3);
        let mut e = self.clone();
        for _ in 0..3 {
            cols.push(e.parts.clone());
            e = e * Self::lambda();
        }
        let mut m: Vec<Vec<BigRational>> = (0..3)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..3).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for col in 0..3 {
            let piv = (col..3).find(|&r| !m[r][col].is_zero()).expect("field element is invertible");
            m.swap(col, piv);
            let p = m[col][col].clone();
            for v in m[col].iter_mut() {
                *v = &*v / &p;
            }
            for r in 0..3 {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in 0..4 {
                        let sub = &f * &m[col][c];
                        m[r][c] = &m[r][c] - sub;
                    }
                }
            }
        }
        Exact { parts: [m[0][3].clone(), m[1][3].clone(), m[2][3].clone()] }
    }
}

impl Field for Exact {
    fn zero() -> Self {
        Exact::int(0)
    }
    fn one() -> Self {
        Exact::int(1)
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        Exact::ratio(p, q)
    }
    fn is_zero(&self) -> bool {
        self.parts.iter().all(Zero::is_zero)
    }
    fn to_f64(&self) -> f64 {
        match self.as_rational() {
            Some(r) => r.to_f64().unwrap_or(f64::NAN),
            None => self.approx().to_f64().unwrap_or(f64::NAN),
        }
    }
    fn close_to(&self, other: &Self) -> bool {
        if self == other {
            return true;
        }
        let d = (self.clone() - other.clone()).approx().abs();
        d <= rat(1, 1_000_000_000_000_000) * rat(1, 1_000_000_000_000_000)
    }
    fn is_negative(&self) -> bool {
        self.approx().is_negative()
    }
}

impl From<i64> for Exact {
    fn from(v: i64) -> Self {
        Exact::int(v)
    }
}

impl Add for Exact {
    type Output = Exact;
    fn add(self, rhs: Exact) -> Exact {
        let [a0, a1, a2] = self.parts;
        let [b0, b1, b2] = rhs.parts;
        Exact { parts: [a0 + b0, a1 + b1, a2 + b2] }
    }
}

impl Sub for Exact {
    type Output = Exact;
    fn sub(self, rhs: Exact) -> Exact {
        self + (-rhs)
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        let [a0, a1, a2] = self.parts;
        Exact { parts: [-a0, -a1, -a2] }
    }
}

impl Mul for Exact {
    type Output = Exact;
    fn mul(self, rhs: Exact) -> Exact {
        if let (Some(a), Some(b)) = (self.as_rational(), rhs.as_rational()) {
            return Exact::rational(a * b);
        }
        let mut prod: Vec<BigRational> = vec![BigRational::zero(); 5];
        for (i, a) in self.parts.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.parts.iter().enumerate() {
                prod[i + j] = &prod[i + j] + a * b;
            }
        }
        // λ³ = 3λ² − (3/2)λ + 1/6
        for d in (3..5).rev() {
            let k = std::mem::replace(&mut prod[d], BigRational::zero());
            if k.is_zero() {
                continue;
            }
            prod[d - 1] = &prod[d - 1] + &k * rat(3, 1);
            prod[d - 2] = &prod[d - 2] + &k * rat(-3, 2);
            prod[d - 3] = &prod[d - 3] + &k * rat(1, 6);
        }
        let mut it = prod.into_iter();
        Exact { parts: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()] }
    }
}

impl Div for Exact {
    type Output = Exact;
    fn div(self, rhs: Exact) -> Exact {
        match rhs.as_rational() {
            Some(r) => {
                assert!(!r.is_zero(), "division by zero in Q(λ)");
                let [a0, a1, a2] = self.parts;
                Exact { parts: [a0 / r, a1 / r, a2 / r] }
            }
            None => self * rhs.inv(),
        }
    }
}

impl fmt::Display for Exact {
    /// Rationals print as `p/q` (or `p`); λ-dependent elements as a 40-digit decimal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.to_decimal(40)),
        }
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(_) => write!(f, "{self}"),
            None => write!(f, "({} + {}·λ + {}·λ²)", self.parts[0], self.parts[1], self.parts[2]),
        }
    }
}
