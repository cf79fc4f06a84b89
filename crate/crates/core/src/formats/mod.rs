//! Machine-number formats under evaluation and the scalar contract the solver
//! is written against.
//!
//! Every bit format is a [`Soft`] value: a code plus a compile-time format
//! tag. Arithmetic decodes both operands exactly into [`Reference`], applies
//! the operation there, and rounds the result once. `Float32`/`Float64` use the
//! hardware instead, which is bit-identical for round-to-nearest-even (NaN
//! results are canonicalized); the runtime [`SoftScalar`] path always goes
//! through the reference so the two can be compared.

pub mod codec;
mod reference;
mod soft;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use reference::{ParseReferenceError, Reference, EXP_LIMIT};
pub use soft::{
    ArithOp,
    BFloat16, Float16, Float32, Float64, Float8E4M3, Float8E5M2, Posit16, Posit32, Posit64,
    Posit8, Soft, SoftScalar, Takum16, Takum32, Takum64, Takum8,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    IeeeLike,
    Posit,
    Takum,
    Reference,
}

/// The evaluated number formats. Discriminants are stable and used as the
/// const parameter of [`Soft`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Format {
    Float8E4M3 = 0,
    Float8E5M2 = 1,
    BFloat16 = 2,
    Float16 = 3,
    Float32 = 4,
    Float64 = 5,
    Posit8 = 6,
    Posit16 = 7,
    Posit32 = 8,
    Posit64 = 9,
    Takum8 = 10,
    Takum16 = 11,
    Takum32 = 12,
    Takum64 = 13,
    Reference = 14,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown number format `{0}`")]
pub struct UnknownFormat(pub String);

/// Static description of a format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormatDescriptor {
    pub name: &'static str,
    pub family: Family,
    /// `None` for the reference scalar.
    pub total_bits: Option<u32>,
    /// Exponent field width, IEEE-like formats only.
    pub exponent_bits: Option<u32>,
}

impl Format {
    pub const ALL: [Format; 15] = [
        Format::Float8E4M3,
        Format::Float8E5M2,
        Format::BFloat16,
        Format::Float16,
        Format::Float32,
        Format::Float64,
        Format::Posit8,
        Format::Posit16,
        Format::Posit32,
        Format::Posit64,
        Format::Takum8,
        Format::Takum16,
        Format::Takum32,
        Format::Takum64,
        Format::Reference,
    ];

    /// Every format with a bit encoding, in report column order.
    pub fn evaluated() -> impl Iterator<Item = Format> {
        Format::ALL.into_iter().filter(|f| *f != Format::Reference)
    }

    pub const fn from_id(id: u8) -> Format {
        match id {
            0 => Format::Float8E4M3,
            1 => Format::Float8E5M2,
            2 => Format::BFloat16,
            3 => Format::Float16,
            4 => Format::Float32,
            5 => Format::Float64,
            6 => Format::Posit8,
            7 => Format::Posit16,
            8 => Format::Posit32,
            9 => Format::Posit64,
            10 => Format::Takum8,
            11 => Format::Takum16,
            12 => Format::Takum32,
            13 => Format::Takum64,
            14 => Format::Reference,
            _ => panic!("invalid format id"),
        }
    }

    /// Name used on the command line and in CSV headers.
    pub const fn name(self) -> &'static str {
        match self {
            Format::Float8E4M3 => "Float8_4",
            Format::Float8E5M2 => "Float8_5",
            Format::BFloat16 => "BFloat16",
            Format::Float16 => "Float16",
            Format::Float32 => "Float32",
            Format::Float64 => "Float64",
            Format::Posit8 => "Posit8",
            Format::Posit16 => "Posit16",
            Format::Posit32 => "Posit32",
            Format::Posit64 => "Posit64",
            Format::Takum8 => "LinearTakum8",
            Format::Takum16 => "LinearTakum16",
            Format::Takum32 => "LinearTakum32",
            Format::Takum64 => "LinearTakum64",
            Format::Reference => "Reference",
        }
    }

    pub const fn family(self) -> Family {
        match self {
            Format::Float8E4M3
            | Format::Float8E5M2
            | Format::BFloat16
            | Format::Float16
            | Format::Float32
            | Format::Float64 => Family::IeeeLike,
            Format::Posit8 | Format::Posit16 | Format::Posit32 | Format::Posit64 => Family::Posit,
            Format::Takum8 | Format::Takum16 | Format::Takum32 | Format::Takum64 => Family::Takum,
            Format::Reference => Family::Reference,
        }
    }

    pub const fn total_bits(self) -> Option<u32> {
        match self {
            Format::Float8E4M3 | Format::Float8E5M2 | Format::Posit8 | Format::Takum8 => Some(8),
            Format::BFloat16 | Format::Float16 | Format::Posit16 | Format::Takum16 => Some(16),
            Format::Float32 | Format::Posit32 | Format::Takum32 => Some(32),
            Format::Float64 | Format::Posit64 | Format::Takum64 => Some(64),
            Format::Reference => None,
        }
    }

    pub fn descriptor(self) -> FormatDescriptor {
        FormatDescriptor {
            name: self.name(),
            family: self.family(),
            total_bits: self.total_bits(),
            exponent_bits: codec::ieee_layout(self).map(|l| l.exp_bits),
        }
    }

    /// Unit roundoff at 1: half the distance from 1 to the next larger value,
    /// the smallest `e` with `round(1 + e) > 1` up to the tie.
    pub fn machine_epsilon(self) -> Reference {
        match self.total_bits() {
            None => Reference::epsilon(),
            Some(_) => {
                let one = codec::encode(self, &Reference::ONE);
                let next = codec::decode(self, one + 1);
                (next - Reference::ONE).scale2(-1)
            }
        }
    }

    /// Largest finite magnitude.
    pub fn max_finite(self) -> Reference {
        match self.family() {
            Family::IeeeLike => {
                let l = codec::ieee_layout(self).unwrap();
                codec::decode(self, l.max_finite_code())
            }
            Family::Posit | Family::Takum => {
                codec::decode(self, (1u64 << (self.total_bits().unwrap() - 1)) - 1)
            }
            Family::Reference => Reference::pow2(EXP_LIMIT),
        }
    }

    /// Smallest positive magnitude (subnormal for IEEE-like formats).
    pub fn min_positive(self) -> Reference {
        match self.family() {
            Family::Reference => Reference::pow2(-EXP_LIMIT),
            _ => codec::decode(self, 1),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = UnknownFormat;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Format::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFormat(s.to_string()))
    }
}

/// Arithmetic contract shared by every format the eigensolver runs in.
///
/// Implementations are plain immutable data; every operation is deterministic
/// and rounds exactly once.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + 'static
{
    const FORMAT: Format;

    fn from_reference(x: &Reference) -> Self;
    /// Exact for every finite code.
    fn to_reference(&self) -> Reference;
    fn sqrt(self) -> Self;

    fn zero() -> Self;
    fn one() -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn is_zero(&self) -> bool {
        self.to_reference().is_zero()
    }
    fn is_finite(&self) -> bool {
        self.to_reference().is_finite()
    }
    fn is_non_real(&self) -> bool {
        self.to_reference().is_nan()
    }

    fn machine_epsilon() -> Self {
        Self::from_reference(&Self::FORMAT.machine_epsilon())
    }

    fn from_f64(v: f64) -> Self {
        Self::from_reference(&Reference::from_f64(v))
    }

    fn to_f64(&self) -> f64 {
        self.to_reference().to_f64()
    }
}

impl Scalar for Reference {
    const FORMAT: Format = Format::Reference;

    fn from_reference(x: &Reference) -> Self {
        *x
    }
    fn to_reference(&self) -> Reference {
        *self
    }
    fn sqrt(self) -> Self {
        Reference::sqrt(self)
    }
    fn zero() -> Self {
        Reference::ZERO
    }
    fn one() -> Self {
        Reference::ONE
    }
    fn abs(self) -> Self {
        Reference::abs(self)
    }
    fn is_zero(&self) -> bool {
        Reference::is_zero(self)
    }
    fn is_finite(&self) -> bool {
        Reference::is_finite(self)
    }
    fn is_non_real(&self) -> bool {
        self.is_nan()
    }
    fn machine_epsilon() -> Self {
        Reference::epsilon()
    }
}

/// Run `$body` with `$t` bound to the scalar type implementing `$fmt`.
#[macro_export]
macro_rules! with_scalar {
    ($fmt:expr, $t:ident => $body:expr) => {{
        use $crate::formats as __f;
        match $fmt {
            __f::Format::Float8E4M3 => {
                type $t = __f::Float8E4M3;
                $body
            }
            __f::Format::Float8E5M2 => {
                type $t = __f::Float8E5M2;
                $body
            }
            __f::Format::BFloat16 => {
                type $t = __f::BFloat16;
                $body
            }
            __f::Format::Float16 => {
                type $t = __f::Float16;
                $body
            }
            __f::Format::Float32 => {
                type $t = __f::Float32;
                $body
            }
            __f::Format::Float64 => {
                type $t = __f::Float64;
                $body
            }
            __f::Format::Posit8 => {
                type $t = __f::Posit8;
                $body
            }
            __f::Format::Posit16 => {
                type $t = __f::Posit16;
                $body
            }
            __f::Format::Posit32 => {
                type $t = __f::Posit32;
                $body
            }
            __f::Format::Posit64 => {
                type $t = __f::Posit64;
                $body
            }
            __f::Format::Takum8 => {
                type $t = __f::Takum8;
                $body
            }
            __f::Format::Takum16 => {
                type $t = __f::Takum16;
                $body
            }
            __f::Format::Takum32 => {
                type $t = __f::Takum32;
                $body
            }
            __f::Format::Takum64 => {
                type $t = __f::Takum64;
                $body
            }
            __f::Format::Reference => {
                type $t = __f::Reference;
                $body
            }
        }
    }};
}
