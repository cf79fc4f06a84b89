use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::codec;
use super::{Family, Format, Reference, Scalar};

/// Software scalar of a compile-time format. Equality and ordering are numeric.
#[derive(Clone, Copy)]
pub struct Soft<const ID: u8> {
    bits: u64,
}

pub type Float8E4M3 = Soft<{ Format::Float8E4M3 as u8 }>;
pub type Float8E5M2 = Soft<{ Format::Float8E5M2 as u8 }>;
pub type BFloat16 = Soft<{ Format::BFloat16 as u8 }>;
pub type Float16 = Soft<{ Format::Float16 as u8 }>;
pub type Posit8 = Soft<{ Format::Posit8 as u8 }>;
pub type Posit16 = Soft<{ Format::Posit16 as u8 }>;
pub type Posit32 = Soft<{ Format::Posit32 as u8 }>;
pub type Posit64 = Soft<{ Format::Posit64 as u8 }>;
pub type Takum8 = Soft<{ Format::Takum8 as u8 }>;
pub type Takum16 = Soft<{ Format::Takum16 as u8 }>;
pub type Takum32 = Soft<{ Format::Takum32 as u8 }>;
pub type Takum64 = Soft<{ Format::Takum64 as u8 }>;

impl<const ID: u8> Soft<ID> {
    pub const FMT: Format = Format::from_id(ID);

    pub fn from_bits(bits: u64) -> Self {
        Soft { bits }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    fn lift(f: impl FnOnce(Reference, Reference) -> Reference, a: Self, b: Self) -> Self {
        let r = f(a.to_reference(), b.to_reference());
        Self::from_reference(&r)
    }

    /// Sign-extended code, whose integer order is the numeric order for
    /// posits and takums.
    fn signed_code(&self) -> i64 {
        let n = Self::FMT.total_bits().unwrap();
        ((self.bits << (64 - n)) as i64) >> (64 - n)
    }
}

impl<const ID: u8> fmt::Debug for Soft<ID> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = Self::FMT.total_bits().unwrap() as usize / 4;
        write!(
            f,
            "{}(0x{:0w$x} = {})",
            Self::FMT.name(),
            self.bits,
            self.to_f64(),
            w = width
        )
    }
}

impl<const ID: u8> PartialEq for Soft<ID> {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl<const ID: u8> PartialOrd for Soft<ID> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_non_real() || other.is_non_real() {
            return None;
        }
        match Self::FMT.family() {
            Family::Posit | Family::Takum => Some(self.signed_code().cmp(&other.signed_code())),
            _ => self.to_reference().partial_cmp(&other.to_reference()),
        }
    }
}

impl<const ID: u8> Add for Soft<ID> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::lift(|a, b| a + b, self, rhs)
    }
}

impl<const ID: u8> Sub for Soft<ID> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::lift(|a, b| a - b, self, rhs)
    }
}

impl<const ID: u8> Mul for Soft<ID> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::lift(|a, b| a * b, self, rhs)
    }
}

impl<const ID: u8> Div for Soft<ID> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::lift(|a, b| a / b, self, rhs)
    }
}

impl<const ID: u8> Neg for Soft<ID> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_reference(&-self.to_reference())
    }
}

impl<const ID: u8> Scalar for Soft<ID> {
    const FORMAT: Format = Format::from_id(ID);

    fn from_reference(x: &Reference) -> Self {
        Soft {
            bits: codec::encode(Self::FMT, x),
        }
    }
    fn to_reference(&self) -> Reference {
        codec::decode(Self::FMT, self.bits)
    }
    fn sqrt(self) -> Self {
        Self::from_reference(&self.to_reference().sqrt())
    }
    fn zero() -> Self {
        Soft { bits: 0 }
    }
    fn one() -> Self {
        Self::from_reference(&Reference::ONE)
    }
    fn abs(self) -> Self {
        Self::from_reference(&self.to_reference().abs())
    }
    fn is_non_real(&self) -> bool {
        codec::is_non_real_code(Self::FMT, self.bits)
    }
}

macro_rules! native_float {
    ($name:ident, $prim:ty, $fmt:expr, $nan:expr) => {
        /// Hardware binary floating point with canonicalized NaN results.
        #[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
        pub struct $name(pub $prim);

        impl $name {
            #[inline]
            fn canon(v: $prim) -> Self {
                if v.is_nan() {
                    $name(<$prim>::from_bits($nan))
                } else {
                    $name(v)
                }
            }

            /// Encoding with every NaN reported as the canonical one; the
            /// optimizer may fold `canon` away since NaN payloads are unspecified.
            pub fn bits(&self) -> u64 {
                if self.0.is_nan() {
                    $nan
                } else {
                    self.0.to_bits() as u64
                }
            }
        }

        impl Add for $name {
            type Output = Self;
            #[inline]
            fn add(self, rhs: Self) -> Self {
                Self::canon(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            #[inline]
            fn sub(self, rhs: Self) -> Self {
                Self::canon(self.0 - rhs.0)
            }
        }

        impl Mul for $name {
            type Output = Self;
            #[inline]
            fn mul(self, rhs: Self) -> Self {
                Self::canon(self.0 * rhs.0)
            }
        }

        impl Div for $name {
            type Output = Self;
            #[inline]
            fn div(self, rhs: Self) -> Self {
                Self::canon(self.0 / rhs.0)
            }
        }

        impl Neg for $name {
            type Output = Self;
            #[inline]
            fn neg(self) -> Self {
                Self::canon(-self.0)
            }
        }

        impl Scalar for $name {
            const FORMAT: Format = $fmt;

            fn from_reference(x: &Reference) -> Self {
                $name(<$prim>::from_bits(codec::encode($fmt, x) as _))
            }
            fn to_reference(&self) -> Reference {
                codec::decode($fmt, self.0.to_bits() as u64)
            }
            #[inline]
            fn sqrt(self) -> Self {
                Self::canon(self.0.sqrt())
            }
            fn zero() -> Self {
                $name(0.0)
            }
            fn one() -> Self {
                $name(1.0)
            }
            #[inline]
            fn abs(self) -> Self {
                Self::canon(self.0.abs())
            }
            fn is_zero(&self) -> bool {
                self.0 == 0.0
            }
            fn is_finite(&self) -> bool {
                self.0.is_finite()
            }
            fn is_non_real(&self) -> bool {
                self.0.is_nan()
            }
            fn from_f64(v: f64) -> Self {
                $name(v as $prim)
            }
            fn to_f64(&self) -> f64 {
                self.0 as f64
            }
        }
    };
}

native_float!(Float32, f32, Format::Float32, 0x7FC0_0000);
native_float!(Float64, f64, Format::Float64, 0x7FF8_0000_0000_0000);

/// Arithmetic operations of the runtime scalar interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

impl ArithOp {
    pub const BINARY: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];

    pub fn apply(self, a: Reference, b: Reference) -> Reference {
        match self {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => a / b,
            ArithOp::Sqrt => a.sqrt(),
        }
    }
}

/// A code together with its runtime format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SoftScalar {
    pub bits: u64,
    pub format: Format,
}

impl SoftScalar {
    /// Correctly rounded code of `x`. Panics for [`Format::Reference`].
    pub fn round_from_reference(x: &Reference, format: Format) -> SoftScalar {
        SoftScalar {
            bits: codec::encode(format, x),
            format,
        }
    }

    pub fn to_reference(&self) -> Reference {
        codec::decode(self.format, self.bits)
    }

    /// `op(a, b)` rounded once into the operands' format (`b` is ignored
    /// for `Sqrt`).
    pub fn arith(op: ArithOp, a: SoftScalar, b: SoftScalar) -> SoftScalar {
        assert_eq!(a.format, b.format, "operands of different formats");
        SoftScalar::round_from_reference(&op.apply(a.to_reference(), b.to_reference()), a.format)
    }

    pub fn neg(self) -> SoftScalar {
        SoftScalar::round_from_reference(&-self.to_reference(), self.format)
    }

    pub fn abs(self) -> SoftScalar {
        SoftScalar::round_from_reference(&self.to_reference().abs(), self.format)
    }

    pub fn compare(&self, other: &SoftScalar) -> Option<Ordering> {
        self.to_reference().partial_cmp(&other.to_reference())
    }

    pub fn is_zero(&self) -> bool {
        self.to_reference().is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.to_reference().is_finite()
    }

    pub fn is_non_real(&self) -> bool {
        codec::is_non_real_code(self.format, self.bits)
    }

    pub fn machine_epsilon(format: Format) -> Reference {
        format.machine_epsilon()
    }
}
