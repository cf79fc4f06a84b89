//! Bit-level encoding and decoding of the evaluated formats.
//!
//! All three families are rounded the same way: the infinitely long encoding
//! of the positive magnitude is produced bit by bit, truncated after `n - 1`
//! bits, and rounded to nearest with ties to even on that bit string. For the
//! IEEE-like formats this coincides with value rounding; for posits and takums
//! it is the rounding rule of their standards (midpoints in tapered regions are
//! the `n + 1`-bit codes). Formats then apply their own overflow policy.

use super::reference::Reference;
use super::{Family, Format};

/// Layout of an IEEE-style binary format.
#[derive(Clone, Copy, Debug)]
pub(crate) struct IeeeLayout {
    pub bits: u32,
    pub exp_bits: u32,
    pub frac_bits: u32,
    /// OFP8 E4M3: no infinities, only the all-ones magnitude is NaN.
    pub extended_range: bool,
}

impl IeeeLayout {
    fn bias(&self) -> i32 {
        (1 << (self.exp_bits - 1)) - 1
    }

    fn emin(&self) -> i32 {
        1 - self.bias()
    }

    fn sign_bit(&self) -> u64 {
        1 << (self.bits - 1)
    }

    fn exp_mask(&self) -> u64 {
        (1 << self.exp_bits) - 1
    }

    fn frac_mask(&self) -> u64 {
        (1 << self.frac_bits) - 1
    }

    /// Magnitude code of +infinity (or of the NaN for E4M3).
    fn inf_code(&self) -> u64 {
        self.exp_mask() << self.frac_bits
    }

    pub fn max_finite_code(&self) -> u64 {
        if self.extended_range {
            (self.exp_mask() << self.frac_bits) | (self.frac_mask() - 1)
        } else {
            self.inf_code() - 1
        }
    }

    pub fn canonical_nan(&self) -> u64 {
        if self.extended_range {
            (self.exp_mask() << self.frac_bits) | self.frac_mask()
        } else {
            self.inf_code() | (1 << (self.frac_bits - 1))
        }
    }
}

pub(crate) fn ieee_layout(fmt: Format) -> Option<IeeeLayout> {
    let (bits, exp_bits, extended_range) = match fmt {
        Format::Float8E4M3 => (8, 4, true),
        Format::Float8E5M2 => (8, 5, false),
        Format::BFloat16 => (16, 8, false),
        Format::Float16 => (16, 5, false),
        Format::Float32 => (32, 8, false),
        Format::Float64 => (64, 11, false),
        _ => return None,
    };
    Some(IeeeLayout {
        bits,
        exp_bits,
        frac_bits: bits - 1 - exp_bits,
        extended_range,
    })
}

fn width(fmt: Format) -> u32 {
    fmt.total_bits()
        .expect("bit-level codec used with the reference format")
}

fn mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

/// Exact value of `code` in `fmt`. Non-real codes decode to NaN.
pub fn decode(fmt: Format, code: u64) -> Reference {
    match fmt.family() {
        Family::IeeeLike => decode_ieee(ieee_layout(fmt).unwrap(), code),
        Family::Posit => decode_tapered(width(fmt), code, decode_posit_body),
        Family::Takum => decode_tapered(width(fmt), code, decode_takum_body),
        Family::Reference => panic!("the reference format has no bit encoding"),
    }
}

/// Correctly rounded code of `x` in `fmt`.
pub fn encode(fmt: Format, x: &Reference) -> u64 {
    match fmt.family() {
        Family::IeeeLike => encode_ieee(ieee_layout(fmt).unwrap(), x),
        Family::Posit => encode_tapered(width(fmt), x, posit_body),
        Family::Takum => encode_tapered(width(fmt), x, takum_body),
        Family::Reference => panic!("the reference format has no bit encoding"),
    }
}

/// The single non-real code (NaN for IEEE-like formats, NaR otherwise).
pub fn non_real_code(fmt: Format) -> u64 {
    match fmt.family() {
        Family::IeeeLike => ieee_layout(fmt).unwrap().canonical_nan(),
        _ => 1 << (width(fmt) - 1),
    }
}

pub fn is_non_real_code(fmt: Format, code: u64) -> bool {
    match fmt.family() {
        Family::IeeeLike => {
            let l = ieee_layout(fmt).unwrap();
            let mag = code & !l.sign_bit();
            if l.extended_range {
                mag == l.canonical_nan()
            } else {
                mag > l.inf_code()
            }
        }
        _ => code == 1 << (width(fmt) - 1),
    }
}

// ---------------------------------------------------------------------------
// IEEE-like

fn decode_ieee(l: IeeeLayout, code: u64) -> Reference {
    let neg = code & l.sign_bit() != 0;
    let e = ((code >> l.frac_bits) & l.exp_mask()) as i32;
    let f = code & l.frac_mask();
    if e as u64 == l.exp_mask() {
        if l.extended_range {
            if f == l.frac_mask() {
                return Reference::NAN;
            }
        } else if f == 0 {
            return Reference::infinity(neg);
        } else {
            return Reference::NAN;
        }
    }
    let fb = l.frac_bits as i32;
    if e == 0 {
        Reference::from_u128_scaled(neg, f as u128, l.emin() - fb)
    } else {
        Reference::from_u128_scaled(neg, (f | (1 << l.frac_bits)) as u128, e - l.bias() - fb)
    }
}

/// `round(m / 2^shift)` to nearest, ties to even, for a full 128-bit `m`.
fn shr_round_even(m: u128, shift: u32) -> u128 {
    if shift == 0 {
        return m;
    }
    if shift > 128 {
        return 0;
    }
    if shift == 128 {
        // m / 2^128 lies in [1/2, 1) for normalized m
        return (m > 1 << 127) as u128;
    }
    let q = m >> shift;
    let rem = m & ((1u128 << shift) - 1);
    let half = 1u128 << (shift - 1);
    if rem > half || (rem == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

fn encode_ieee(l: IeeeLayout, x: &Reference) -> u64 {
    if x.is_nan() {
        return l.canonical_nan();
    }
    let sign = if x.is_sign_negative() { l.sign_bit() } else { 0 };
    if x.is_infinite() {
        return overflow(l, sign);
    }
    if x.is_zero() {
        return sign;
    }
    let e = x.exponent();
    let emin = l.emin();
    // generous cap so the shifts below stay in range
    if e > (1 << l.exp_bits) {
        return overflow(l, sign);
    }
    let mag = if e >= emin {
        let m_int = shr_round_even(x.mantissa(), 127 - l.frac_bits) as u64;
        (((e + l.bias() - 1) as u64) << l.frac_bits) + m_int
    } else {
        let shift = (127 - l.frac_bits) as i64 + (emin - e) as i64;
        shr_round_even(x.mantissa(), shift.min(200) as u32) as u64
    };
    if mag > l.max_finite_code() {
        return overflow(l, sign);
    }
    mag | sign
}

fn overflow(l: IeeeLayout, sign: u64) -> u64 {
    if l.extended_range {
        l.canonical_nan()
    } else {
        l.inf_code() | sign
    }
}

// ---------------------------------------------------------------------------
// Tapered formats (posit, takum)

/// Collects the leading `cap` bits of an encoding and a sticky flag for the rest.
struct BitString {
    acc: u128,
    len: u32,
    cap: u32,
    sticky: bool,
}

impl BitString {
    fn new(cap: u32) -> Self {
        BitString {
            acc: 0,
            len: 0,
            cap,
            sticky: false,
        }
    }

    /// Append `count` identical bits.
    fn run(&mut self, bit: bool, count: u64) {
        let room = (self.cap - self.len) as u64;
        let take = count.min(room) as u32;
        if take > 0 {
            self.acc <<= take;
            if bit {
                self.acc |= (1u128 << take) - 1;
            }
            self.len += take;
        }
        if count > room && bit {
            self.sticky = true;
        }
    }

    /// Append the low `count` bits of `v`, most significant first (count <= 127).
    fn push(&mut self, v: u128, count: u32) {
        let room = self.cap - self.len;
        let take = count.min(room);
        if take > 0 {
            self.acc = (self.acc << take) | ((v >> (count - take)) & ((1u128 << take) - 1));
            self.len += take;
        }
        if count > take && v & ((1u128 << (count - take)) - 1) != 0 {
            self.sticky = true;
        }
    }

    /// Round the first `cap - 1` bits to nearest, ties to even on the string.
    fn finish(self) -> u128 {
        debug_assert_eq!(self.len, self.cap);
        let body = self.acc >> 1;
        let round = self.acc & 1 == 1;
        if round && (self.sticky || body & 1 == 1) {
            body + 1
        } else {
            body
        }
    }
}

/// Write the encoding of a positive finite non-zero `x` (after the sign bit).
fn posit_body(bs: &mut BitString, x: &Reference) {
    let e = x.exponent() as i64;
    let k = e.div_euclid(4);
    let ex = e.rem_euclid(4) as u128;
    if k >= 0 {
        bs.run(true, k as u64 + 1);
        bs.run(false, 1);
    } else {
        bs.run(false, (-k) as u64);
        bs.run(true, 1);
    }
    bs.push(ex, 2);
    bs.push(x.mantissa() & !(1 << 127), 127);
}

/// Characteristic range of linear takums.
pub(crate) const TAKUM_C_MIN: i32 = -255;
pub(crate) const TAKUM_C_MAX: i32 = 254;

fn takum_body(bs: &mut BitString, x: &Reference) {
    let c = x.exponent();
    if c > TAKUM_C_MAX {
        bs.run(true, u64::MAX);
        return;
    }
    if c < TAKUM_C_MIN {
        // below minpos: all zeros plus sticky, saturated by the caller
        bs.run(false, bs.cap as u64);
        bs.sticky = true;
        return;
    }
    let (d, r, field) = if c >= 0 {
        let r = 31 - (c as u32 + 1).leading_zeros();
        (true, r, (c - ((1 << r) - 1)) as u128)
    } else {
        let r = 31 - ((-c) as u32).leading_zeros();
        (false, r, (c + (1 << (r + 1)) - 1) as u128)
    };
    let regime = if d { r } else { 7 - r } as u128;
    bs.push(d as u128, 1);
    bs.push(regime, 3);
    if r > 0 {
        bs.push(field, r);
    }
    bs.push(x.mantissa() & !(1 << 127), 127);
}

fn encode_tapered(n: u32, x: &Reference, body: fn(&mut BitString, &Reference)) -> u64 {
    if !x.is_finite() {
        return 1 << (n - 1);
    }
    if x.is_zero() {
        return 0;
    }
    let mut bs = BitString::new(n);
    body(&mut bs, &x.abs());
    let maxpos = (1u128 << (n - 1)) - 1;
    let mag = bs.finish().clamp(1, maxpos) as u64;
    if x.is_sign_negative() {
        mag.wrapping_neg() & mask(n)
    } else {
        mag
    }
}

fn decode_tapered(n: u32, code: u64, body: fn(u32, u64) -> Reference) -> Reference {
    let code = code & mask(n);
    if code == 0 {
        return Reference::ZERO;
    }
    if code == 1 << (n - 1) {
        return Reference::NAN;
    }
    if code >> (n - 1) == 1 {
        -body(n, code.wrapping_neg() & mask(n))
    } else {
        body(n, code)
    }
}

/// Left-align the `n - 1` magnitude bits in a u128 (padding with zeros).
fn align(n: u32, mag: u64) -> u128 {
    (mag as u128) << (128 - (n - 1))
}

fn decode_posit_body(n: u32, mag: u64) -> Reference {
    let w = align(n, mag);
    let first = w >> 127 == 1;
    let run = if first {
        w.leading_ones()
    } else {
        w.leading_zeros()
    }
    .min(n - 1);
    let k = if first { run as i32 - 1 } else { -(run as i32) };
    let w = w.checked_shl(run + 1).unwrap_or(0);
    let ex = (w >> 126) as i32;
    let frac = w << 2;
    Reference::from_parts(false, 4 * k + ex, (1 << 127) | (frac >> 1))
}

fn decode_takum_body(n: u32, mag: u64) -> Reference {
    let w = align(n, mag);
    let d = w >> 127 == 1;
    let regime = ((w >> 124) & 7) as u32;
    let r = if d { regime } else { 7 - regime };
    let w = w << 4;
    let field = if r > 0 { (w >> (128 - r)) as i32 } else { 0 };
    let frac = w << r;
    let c = if d {
        (1 << r) - 1 + field
    } else {
        -(1 << (r + 1)) + 1 + field
    };
    Reference::from_parts(false, c, (1 << 127) | (frac >> 1))
}
