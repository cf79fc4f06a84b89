//! High-precision software real used for reference solves and as the exact
//! intermediate of every soft-format operation.
//!
//! A finite non-zero value is `mant * 2^(exp - 127)` with `mant` normalized so
//! that bit 127 is set. Every operation rounds once to 128 significant bits
//! (round to nearest, ties to even), giving a unit roundoff of `2^-128`. The
//! exponent is a 32-bit integer clamped to `±EXP_LIMIT`, far beyond any range a
//! benchmark can reach.
//!
//! 128 bits of precision also keep rounding into the narrower formats exact: every
//! code of the 8..64-bit formats carries at most 60 significant bits, so sums,
//! products, quotients and roots of such codes never land on a rounding midpoint
//! of the narrower format unless the exact result does.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

/// Exponents beyond this magnitude overflow to infinity or underflow to zero.
pub const EXP_LIMIT: i32 = 1 << 30;

const TOP: u128 = 1 << 127;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Zero,
    Finite,
    Infinite,
    NaN,
}

/// A 128-bit-mantissa binary floating-point number with signed zeros,
/// infinities and a single NaN class.
#[derive(Clone, Copy)]
pub struct Reference {
    kind: Kind,
    neg: bool,
    exp: i32,
    mant: u128,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid number literal `{0}`")]
pub struct ParseReferenceError(pub String);

// ---------------------------------------------------------------------------
// 256-bit helper

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct U256 {
    hi: u128,
    lo: u128,
}

impl U256 {
    const ZERO: U256 = U256 { hi: 0, lo: 0 };

    fn is_zero(self) -> bool {
        self.hi == 0 && self.lo == 0
    }

    fn leading_zeros(self) -> u32 {
        if self.hi != 0 {
            self.hi.leading_zeros()
        } else {
            128 + self.lo.leading_zeros()
        }
    }

    fn shl(self, s: u32) -> U256 {
        match s {
            0 => self,
            1..=127 => U256 {
                hi: (self.hi << s) | (self.lo >> (128 - s)),
                lo: self.lo << s,
            },
            128..=255 => U256 {
                hi: self.lo << (s - 128),
                lo: 0,
            },
            _ => U256::ZERO,
        }
    }

    /// Shift right, reporting whether any set bit fell off.
    fn shr_sticky(self, s: u32) -> (U256, bool) {
        match s {
            0 => (self, false),
            1..=127 => (
                U256 {
                    hi: self.hi >> s,
                    lo: (self.lo >> s) | (self.hi << (128 - s)),
                },
                self.lo << (128 - s) != 0,
            ),
            128 => (U256 { hi: 0, lo: self.hi }, self.lo != 0),
            129..=255 => (
                U256 {
                    hi: 0,
                    lo: self.hi >> (s - 128),
                },
                self.lo != 0 || self.hi << (256 - s) != 0,
            ),
            _ => (U256::ZERO, !self.is_zero()),
        }
    }

    fn add(self, o: U256) -> U256 {
        let (lo, c) = self.lo.overflowing_add(o.lo);
        U256 {
            hi: self.hi.wrapping_add(o.hi).wrapping_add(c as u128),
            lo,
        }
    }

    fn sub(self, o: U256) -> U256 {
        let (lo, b) = self.lo.overflowing_sub(o.lo);
        U256 {
            hi: self.hi.wrapping_sub(o.hi).wrapping_sub(b as u128),
            lo,
        }
    }

    fn cmp(self, o: U256) -> Ordering {
        (self.hi, self.lo).cmp(&(o.hi, o.lo))
    }

    fn mul(a: u128, b: u128) -> U256 {
        let (a1, a0) = (a >> 64, a & u64::MAX as u128);
        let (b1, b0) = (b >> 64, b & u64::MAX as u128);
        let p00 = a0 * b0;
        let p01 = a0 * b1;
        let p10 = a1 * b0;
        let p11 = a1 * b1;
        let mid = (p00 >> 64) + (p01 & u64::MAX as u128) + (p10 & u64::MAX as u128);
        let lo = (p00 & u64::MAX as u128) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        U256 { hi, lo }
    }
}

fn isqrt_u256(mut n: U256) -> (u128, U256) {
    let mut res = U256::ZERO;
    let mut bit = U256 { hi: 1 << 126, lo: 0 };
    while bit.cmp(U256 { hi: 0, lo: 0 }) == Ordering::Greater {
        if bit.cmp(n) == Ordering::Greater {
            bit = bit.shr_sticky(2).0;
        } else {
            break;
        }
    }
    while !bit.is_zero() {
        let t = res.add(bit);
        if n.cmp(t) != Ordering::Less {
            n = n.sub(t);
            res = res.shr_sticky(1).0.add(bit);
        } else {
            res = res.shr_sticky(1).0;
        }
        bit = bit.shr_sticky(2).0;
    }
    (res.lo, n)
}

// ---------------------------------------------------------------------------

impl Reference {
    pub const ZERO: Reference = Reference {
        kind: Kind::Zero,
        neg: false,
        exp: 0,
        mant: 0,
    };
    pub const ONE: Reference = Reference {
        kind: Kind::Finite,
        neg: false,
        exp: 0,
        mant: TOP,
    };
    pub const INFINITY: Reference = Reference {
        kind: Kind::Infinite,
        neg: false,
        exp: 0,
        mant: 0,
    };
    pub const NAN: Reference = Reference {
        kind: Kind::NaN,
        neg: false,
        exp: 0,
        mant: 0,
    };

    /// Significant bits carried by every finite value.
    pub const PRECISION: u32 = 128;

    /// Unit roundoff `2^-128`.
    pub fn epsilon() -> Reference {
        Reference::pow2(-(Self::PRECISION as i32))
    }

    pub fn zero_signed(neg: bool) -> Reference {
        Reference {
            neg,
            ..Reference::ZERO
        }
    }

    pub fn infinity(neg: bool) -> Reference {
        Reference {
            neg,
            ..Reference::INFINITY
        }
    }

    /// Exactly `2^e`.
    pub fn pow2(e: i32) -> Reference {
        Reference::from_parts(false, e, TOP)
    }

    /// Build `mant * 2^(exp - 127)`; `mant` must have bit 127 set.
    pub(crate) fn from_parts(neg: bool, exp: i32, mant: u128) -> Reference {
        debug_assert!(mant & TOP != 0);
        if exp > EXP_LIMIT {
            Reference::infinity(neg)
        } else if exp < -EXP_LIMIT {
            Reference::zero_signed(neg)
        } else {
            Reference {
                kind: Kind::Finite,
                neg,
                exp,
                mant,
            }
        }
    }

    /// Exact value of an unsigned integer scaled by `2^scale`.
    pub fn from_u128_scaled(neg: bool, v: u128, scale: i32) -> Reference {
        if v == 0 {
            return Reference::zero_signed(neg);
        }
        let lz = v.leading_zeros();
        Reference::from_parts(neg, 127 - lz as i32 + scale, v << lz)
    }

    pub fn from_i64(v: i64) -> Reference {
        Reference::from_u128_scaled(v < 0, v.unsigned_abs() as u128, 0)
    }

    /// Exact conversion from binary64.
    pub fn from_f64(v: f64) -> Reference {
        if v.is_nan() {
            return Reference::NAN;
        }
        if v.is_infinite() {
            return Reference::infinity(v < 0.0);
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let e = ((bits >> 52) & 0x7ff) as i32;
        let f = (bits & ((1 << 52) - 1)) as u128;
        if e == 0 {
            Reference::from_u128_scaled(neg, f, -1074)
        } else {
            Reference::from_u128_scaled(neg, f | (1 << 52), e - 1075)
        }
    }

    /// Nearest binary64 value (ties to even, with subnormals).
    pub fn to_f64(&self) -> f64 {
        f64::from_bits(super::codec::encode(super::Format::Float64, self))
    }

    pub fn is_nan(&self) -> bool {
        self.kind == Kind::NaN
    }

    pub fn is_infinite(&self) -> bool {
        self.kind == Kind::Infinite
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, Kind::Zero | Kind::Finite)
    }

    pub fn is_zero(&self) -> bool {
        self.kind == Kind::Zero
    }

    /// True for negative values including `-0` and `-inf`.
    pub fn is_sign_negative(&self) -> bool {
        self.neg && self.kind != Kind::NaN
    }

    /// Binary exponent of the leading bit: the value lies in `[2^e, 2^(e+1))`.
    /// Only meaningful for finite non-zero values.
    pub fn exponent(&self) -> i32 {
        self.exp
    }

    /// Normalized 128-bit significand with bit 127 set. Only meaningful for
    /// finite non-zero values.
    pub fn mantissa(&self) -> u128 {
        self.mant
    }

    pub fn abs(self) -> Reference {
        if self.is_nan() {
            return self;
        }
        Reference { neg: false, ..self }
    }

    pub fn signum(&self) -> i32 {
        match self.kind {
            Kind::NaN | Kind::Zero => 0,
            _ if self.neg => -1,
            _ => 1,
        }
    }

    /// Bitwise identity, distinguishing `+0` from `-0`; all NaNs are identical.
    pub fn identical(&self, other: &Reference) -> bool {
        match (self.kind, other.kind) {
            (Kind::NaN, Kind::NaN) => true,
            (a, b) if a != b => false,
            (Kind::Finite, _) => {
                self.neg == other.neg && self.exp == other.exp && self.mant == other.mant
            }
            _ => self.neg == other.neg,
        }
    }

    /// Multiply by `2^k` exactly (barring exponent overflow).
    pub fn scale2(self, k: i32) -> Reference {
        match self.kind {
            Kind::Finite => Reference::from_parts(self.neg, self.exp.saturating_add(k), self.mant),
            _ => self,
        }
    }

    pub fn max(self, other: Reference) -> Reference {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Reference) -> Reference {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }

    /// Normalize and round `v * 2^(top - 255)` to 128 bits. `sticky` flags
    /// non-zero bits below `v`.
    fn round_wide(neg: bool, top: i32, v: U256, sticky: bool) -> Reference {
        if v.is_zero() {
            // sticky without any retained bit cannot happen for the callers
            return Reference::zero_signed(neg);
        }
        let lz = v.leading_zeros();
        let v = v.shl(lz);
        let exp = top - lz as i32;
        let mut mant = v.hi;
        let round = v.lo >> 127 == 1;
        let rest = (v.lo << 1) != 0 || sticky;
        let mut exp = exp;
        if round && (rest || mant & 1 == 1) {
            mant = mant.wrapping_add(1);
            if mant == 0 {
                mant = TOP;
                exp += 1;
            }
        }
        Reference::from_parts(neg, exp, mant)
    }

    fn add_impl(a: Reference, b: Reference) -> Reference {
        match (a.kind, b.kind) {
            (Kind::NaN, _) | (_, Kind::NaN) => return Reference::NAN,
            (Kind::Infinite, Kind::Infinite) => {
                return if a.neg == b.neg { a } else { Reference::NAN };
            }
            (Kind::Infinite, _) => return a,
            (_, Kind::Infinite) => return b,
            (Kind::Zero, Kind::Zero) => return Reference::zero_signed(a.neg && b.neg),
            (Kind::Zero, _) => return b,
            (_, Kind::Zero) => return a,
            _ => {}
        }
        // order by magnitude so that `big - small` never goes negative
        let (big, small) = if (a.exp, a.mant) >= (b.exp, b.mant) {
            (a, b)
        } else {
            (b, a)
        };
        let d = (big.exp as i64 - small.exp as i64) as u64;
        // big's leading bit sits at 254, leaving one bit of headroom for carries
        let x = U256 {
            hi: big.mant >> 1,
            lo: big.mant << 127,
        };
        let y = U256 {
            hi: small.mant >> 1,
            lo: small.mant << 127,
        };
        let (y, sticky) = y.shr_sticky(d.min(512) as u32);
        let top = big.exp + 1;
        if big.neg == small.neg {
            Reference::round_wide(big.neg, top, x.add(y), sticky)
        } else {
            // borrow one unit for the sticky bits shifted out of y
            let diff = if sticky {
                x.sub(y).sub(U256 { hi: 0, lo: 1 })
            } else {
                x.sub(y)
            };
            if diff.is_zero() && !sticky {
                return Reference::ZERO;
            }
            Reference::round_wide(big.neg, top, diff, sticky)
        }
    }

    fn mul_impl(a: Reference, b: Reference) -> Reference {
        let neg = a.neg != b.neg;
        match (a.kind, b.kind) {
            (Kind::NaN, _) | (_, Kind::NaN) => Reference::NAN,
            (Kind::Infinite, Kind::Zero) | (Kind::Zero, Kind::Infinite) => Reference::NAN,
            (Kind::Infinite, _) | (_, Kind::Infinite) => Reference::infinity(neg),
            (Kind::Zero, _) | (_, Kind::Zero) => Reference::zero_signed(neg),
            _ => {
                let p = U256::mul(a.mant, b.mant);
                Reference::round_wide(neg, a.exp + b.exp + 1, p, false)
            }
        }
    }

    fn div_impl(a: Reference, b: Reference) -> Reference {
        let neg = a.neg != b.neg;
        match (a.kind, b.kind) {
            (Kind::NaN, _) | (_, Kind::NaN) => Reference::NAN,
            (Kind::Infinite, Kind::Infinite) | (Kind::Zero, Kind::Zero) => Reference::NAN,
            (Kind::Infinite, _) => Reference::infinity(neg),
            (_, Kind::Infinite) => Reference::zero_signed(neg),
            (Kind::Zero, _) => Reference::zero_signed(neg),
            (_, Kind::Zero) => Reference::infinity(neg),
            _ => {
                // restoring division producing 130 quotient bits
                let d = b.mant;
                let mut r = a.mant;
                let mut carry = false;
                let mut q = U256::ZERO;
                for _ in 0..130 {
                    let bit = carry || r >= d;
                    if bit {
                        r = r.wrapping_sub(d);
                    }
                    q = q.shl(1);
                    q.lo |= bit as u128;
                    carry = r >> 127 == 1;
                    r <<= 1;
                }
                let sticky = r != 0 || carry;
                Reference::round_wide(neg, a.exp - b.exp + 126, q, sticky)
            }
        }
    }

    /// Correctly rounded square root; negative non-zero inputs give NaN.
    pub fn sqrt(self) -> Reference {
        match self.kind {
            Kind::NaN => Reference::NAN,
            Kind::Zero => self,
            _ if self.neg => Reference::NAN,
            Kind::Infinite => self,
            Kind::Finite => {
                // N = mant * 2^s lies in [2^254, 2^256) with exp - 127 - s even
                let s: u32 = if (self.exp - 127 - 127).rem_euclid(2) == 0 {
                    127
                } else {
                    128
                };
                let n = U256 {
                    hi: 0,
                    lo: self.mant,
                }
                .shl(s);
                let (root, rem) = isqrt_u256(n);
                let half = (self.exp - 127 - s as i32) / 2;
                let mut mant = root;
                let mut exp = 127 + half;
                // sqrt(N) >= root + 1/2  <=>  N - root^2 > root (no exact ties)
                if rem.cmp(U256 { hi: 0, lo: root }) == Ordering::Greater {
                    mant = mant.wrapping_add(1);
                    if mant == 0 {
                        mant = TOP;
                        exp += 1;
                    }
                }
                Reference::from_parts(false, exp, mant)
            }
        }
    }

    /// `self^k` by repeated squaring (one rounding per multiplication).
    pub fn powi(self, mut k: u32) -> Reference {
        let mut base = self;
        let mut acc = Reference::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    fn pow10(k: u32) -> Reference {
        Reference::from_i64(10).powi(k)
    }

    /// Parse a decimal literal such as `-1.25e-3`.
    ///
    /// Up to 38 significant digits are kept exactly; the power of ten is
    /// applied with a single division or multiplication, which is exact for
    /// literals like `0.5` and otherwise accurate to a few units of `2^-128`.
    pub fn parse_decimal(s: &str) -> Result<Reference, ParseReferenceError> {
        let err = || ParseReferenceError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        if body.is_empty() {
            return Err(err());
        }
        let (num, exp_part) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], Some(&body[i + 1..])),
            None => (body, None),
        };
        let mut exp10: i64 = match exp_part {
            Some(e) => e.parse::<i64>().map_err(|_| err())?,
            None => 0,
        };
        let mut digits: u128 = 0;
        let mut n_digits = 0u32;
        let mut seen_digit = false;
        let mut seen_dot = false;
        for c in num.chars() {
            match c {
                '0'..='9' => {
                    seen_digit = true;
                    let d = c as u128 - '0' as u128;
                    if digits == 0 && d == 0 {
                        if seen_dot {
                            exp10 -= 1;
                        }
                    } else if n_digits < 38 {
                        digits = digits * 10 + d;
                        n_digits += 1;
                        if seen_dot {
                            exp10 -= 1;
                        }
                    } else if !seen_dot {
                        exp10 += 1;
                    }
                }
                '.' if !seen_dot => seen_dot = true,
                _ => return Err(err()),
            }
        }
        if !seen_digit {
            return Err(err());
        }
        let mag = Reference::from_u128_scaled(false, digits, 0);
        if digits == 0 {
            return Ok(Reference::zero_signed(neg));
        }
        if exp10.abs() > 400_000_000 {
            return Ok(if exp10 > 0 {
                Reference::infinity(neg)
            } else {
                Reference::zero_signed(neg)
            });
        }
        let v = if exp10 >= 0 {
            mag * Reference::pow10(exp10 as u32)
        } else {
            mag / Reference::pow10((-exp10) as u32)
        };
        Ok(if neg { -v } else { v })
    }

    /// Canonical exact text form: `[-]0x<odd hex integer>p<exponent>`, or one
    /// of `0`, `-0`, `inf`, `-inf`, `nan`.
    pub fn to_hex(&self) -> String {
        let sign = if self.neg { "-" } else { "" };
        match self.kind {
            Kind::NaN => "nan".to_string(),
            Kind::Infinite => format!("{sign}inf"),
            Kind::Zero => format!("{sign}0"),
            Kind::Finite => {
                let tz = self.mant.trailing_zeros();
                let m = self.mant >> tz;
                let e = self.exp as i64 - 127 + tz as i64;
                format!("{sign}0x{m:x}p{e}")
            }
        }
    }

    /// Inverse of [`Reference::to_hex`].
    pub fn parse_hex(s: &str) -> Result<Reference, ParseReferenceError> {
        let err = || ParseReferenceError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        match body {
            "nan" if !neg => return Ok(Reference::NAN),
            "inf" => return Ok(Reference::infinity(neg)),
            "0" => return Ok(Reference::zero_signed(neg)),
            _ => {}
        }
        let rest = body.strip_prefix("0x").ok_or_else(err)?;
        let (m, e) = rest.split_once('p').ok_or_else(err)?;
        let m = u128::from_str_radix(m, 16).map_err(|_| err())?;
        let e: i64 = e.parse().map_err(|_| err())?;
        if m == 0 || m & 1 == 0 || e.abs() > EXP_LIMIT as i64 {
            return Err(err());
        }
        Ok(Reference::from_u128_scaled(neg, m, e as i32))
    }
}

impl Default for Reference {
    fn default() -> Self {
        Reference::ZERO
    }
}

impl Add for Reference {
    type Output = Reference;
    fn add(self, rhs: Reference) -> Reference {
        Reference::add_impl(self, rhs)
    }
}

impl Sub for Reference {
    type Output = Reference;
    fn sub(self, rhs: Reference) -> Reference {
        Reference::add_impl(self, -rhs)
    }
}

impl Mul for Reference {
    type Output = Reference;
    fn mul(self, rhs: Reference) -> Reference {
        Reference::mul_impl(self, rhs)
    }
}

impl Div for Reference {
    type Output = Reference;
    fn div(self, rhs: Reference) -> Reference {
        Reference::div_impl(self, rhs)
    }
}

impl Neg for Reference {
    type Output = Reference;
    fn neg(self) -> Reference {
        if self.is_nan() {
            return self;
        }
        Reference {
            neg: !self.neg,
            ..self
        }
    }
}

impl PartialEq for Reference {
    fn eq(&self, other: &Reference) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Reference {
    fn partial_cmp(&self, other: &Reference) -> Option<Ordering> {
        if self.is_nan() || other.is_nan() {
            return None;
        }
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        if sa == 0 {
            return Some(Ordering::Equal);
        }
        let mag = match (self.kind, other.kind) {
            (Kind::Infinite, Kind::Infinite) => Ordering::Equal,
            (Kind::Infinite, _) => Ordering::Greater,
            (_, Kind::Infinite) => Ordering::Less,
            _ => (self.exp, self.mant).cmp(&(other.exp, other.mant)),
        };
        Some(if sa < 0 { mag.reverse() } else { mag })
    }
}

impl fmt::Debug for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{:e})", self.to_hex(), self.to_f64())
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl FromStr for Reference {
    type Err = ParseReferenceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Reference::parse_decimal(s)
    }
}

impl From<f64> for Reference {
    fn from(v: f64) -> Self {
        Reference::from_f64(v)
    }
}

impl From<i64> for Reference {
    fn from(v: i64) -> Self {
        Reference::from_i64(v)
    }
}
