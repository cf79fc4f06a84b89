//! Bit-exact oracle for the 8- and 16-bit formats.
//!
//! Every 8/16-bit value and every midpoint between neighbours is an exact
//! `f64`, and so are products of two such values. Sums and quotients are
//! captured as an `f64` plus the sign of the rounding error (TwoSum for
//! addition, the fma residual for division and square root), which is enough
//! to place the exact result against any `f64` threshold.

use std::cmp::Ordering;

use eigenformats::formats::{ArithOp, Family, Format};

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    /// exponent bits, fraction bits, E4M3-style extended range without infinities
    Ieee(u32, u32, bool),
    Posit,
    Takum,
}

pub fn kind(fmt: Format) -> Kind {
    match fmt {
        Format::Float8E4M3 => Kind::Ieee(4, 3, true),
        Format::Float8E5M2 => Kind::Ieee(5, 2, false),
        Format::BFloat16 => Kind::Ieee(8, 7, false),
        Format::Float16 => Kind::Ieee(5, 10, false),
        Format::Float32 => Kind::Ieee(8, 23, false),
        Format::Float64 => Kind::Ieee(11, 52, false),
        f => match f.family() {
            Family::Posit => Kind::Posit,
            Family::Takum => Kind::Takum,
            _ => unreachable!(),
        },
    }
}

fn ieee_value(e_bits: u32, f_bits: u32, extended: bool, code: u64) -> f64 {
    let n = 1 + e_bits + f_bits;
    let sign = if code >> (n - 1) & 1 == 1 { -1.0 } else { 1.0 };
    let e = (code >> f_bits) & ((1 << e_bits) - 1);
    let f = code & ((1 << f_bits) - 1);
    let bias = (1i32 << (e_bits - 1)) - 1;
    let e_max = (1 << e_bits) - 1;
    if e == e_max && !extended {
        return if f == 0 { sign * f64::INFINITY } else { f64::NAN };
    }
    if extended && e == e_max && f == (1 << f_bits) - 1 {
        return f64::NAN;
    }
    let frac = f as f64 / (1u64 << f_bits) as f64;
    if e == 0 {
        sign * frac * 2f64.powi(1 - bias)
    } else {
        sign * (1.0 + frac) * 2f64.powi(e as i32 - bias)
    }
}

/// Posit with es = 2, read as an `n`-bit string.
fn posit_value(n: u32, code: u64) -> f64 {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let code = code & mask;
    if code == 0 {
        return 0.0;
    }
    if code == 1 << (n - 1) {
        return f64::NAN;
    }
    let neg = code >> (n - 1) == 1;
    let p = if neg { code.wrapping_neg() & mask } else { code };
    // bits after the sign, most significant first
    let bits: Vec<u8> = (0..n - 1).rev().map(|i| (p >> i & 1) as u8).collect();
    let first = bits[0];
    let run = bits.iter().take_while(|&&b| b == first).count();
    let k = if first == 1 { run as i32 - 1 } else { -(run as i32) };
    let rest: &[u8] = if run + 1 <= bits.len() { &bits[run + 1..] } else { &[] };
    let mut e = 0i32;
    for i in 0..2 {
        e = 2 * e + *rest.get(i).unwrap_or(&0) as i32;
    }
    let mut f = 1.0;
    let mut w = 0.5;
    for &b in rest.iter().skip(2) {
        f += w * b as f64;
        w /= 2.0;
    }
    let v = f * 2f64.powi(4 * k + e);
    if neg {
        -v
    } else {
        v
    }
}

/// Linear takum read straight from the bit string:
/// `(1 - 3S + f) * 2^((-1)^S (c + S))`.
fn takum_value(n: u32, code: u64) -> f64 {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let code = code & mask;
    if code == 0 {
        return 0.0;
    }
    if code == 1 << (n - 1) {
        return f64::NAN;
    }
    // pad to 64 bits so the characteristic is always complete
    let x = code << (64 - n);
    let s = (x >> 63) as i32;
    let d = (x >> 62 & 1) as i32;
    let r_field = (x >> 59 & 7) as i32;
    let r = if d == 1 { r_field } else { 7 - r_field };
    let c_field = if r == 0 { 0 } else { (x << 5 >> (64 - r)) as i32 };
    let c = if d == 1 {
        (1 << r) - 1 + c_field
    } else {
        -(1 << (r + 1)) + 1 + c_field
    };
    let m_bits = x << (5 + r);
    let f = m_bits as f64 / 2f64.powi(64);
    let e = if s == 1 { -(c + 1) } else { c };
    (1.0 - 3.0 * s as f64 + f) * 2f64.powi(e)
}

/// Value of `code` as an `n`-bit string of the format's kind.
pub fn value_n(fmt: Format, n: u32, code: u64) -> f64 {
    match kind(fmt) {
        Kind::Ieee(e, f, ext) => ieee_value(e, f + n - fmt.total_bits().unwrap(), ext, code),
        Kind::Posit => posit_value(n, code),
        Kind::Takum => takum_value(n, code),
    }
}

pub fn value(fmt: Format, code: u64) -> f64 {
    value_n(fmt, fmt.total_bits().unwrap(), code)
}

/// Exact real `v + tail` where only the sign of `tail` matters.
#[derive(Clone, Copy, Debug)]
pub struct Exact {
    pub v: f64,
    pub dir: Ordering,
}

impl Exact {
    fn cmp_to(&self, t: f64) -> Ordering {
        match self.v.partial_cmp(&t).unwrap() {
            Ordering::Equal => self.dir,
            o => o,
        }
    }
}

pub fn exact(op: ArithOp, a: f64, b: f64) -> Exact {
    let sign = |x: f64| x.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    match op {
        ArithOp::Add | ArithOp::Sub => {
            let b = if matches!(op, ArithOp::Sub) { -b } else { b };
            let s = a + b;
            if !s.is_finite() {
                return Exact { v: s, dir: Ordering::Equal };
            }
            let bb = s - a;
            let err = (a - (s - bb)) + (b - bb);
            Exact { v: s, dir: sign(err) }
        }
        ArithOp::Mul => Exact { v: a * b, dir: Ordering::Equal },
        ArithOp::Div => {
            let q = a / b;
            if !q.is_finite() || q == 0.0 {
                return Exact { v: q, dir: Ordering::Equal };
            }
            let r = (-q).mul_add(b, a);
            let d = if b < 0.0 { sign(r).reverse() } else { sign(r) };
            Exact { v: q, dir: d }
        }
        ArithOp::Sqrt => {
            let s = a.sqrt();
            if !s.is_finite() || s == 0.0 {
                return Exact { v: s, dir: Ordering::Equal };
            }
            Exact { v: s, dir: sign((-s).mul_add(s, a)) }
        }
    }
}

/// Positive codes in increasing order with the thresholds between them.
pub struct Table {
    pub fmt: Format,
    /// `codes[i]` has value `values[i]`; index 0 is the zero code
    codes: Vec<u64>,
    values: Vec<f64>,
    /// `mids[i]` separates `values[i]` and `values[i + 1]`
    mids: Vec<f64>,
    n: u32,
}

impl Table {
    pub fn new(fmt: Format) -> Table {
        let n = fmt.total_bits().unwrap();
        assert!(n <= 16);
        let half = 1u64 << (n - 1);
        let mut codes = Vec::new();
        let mut values = Vec::new();
        let mut mids = Vec::new();
        for c in 0..half {
            let v = value(fmt, c);
            if !v.is_finite() {
                break;
            }
            if c > 0 {
                let m = match kind(fmt) {
                    Kind::Ieee(..) => (values[values.len() - 1] + v) / 2.0,
                    _ => value_n(fmt, n + 1, 2 * c - 1),
                };
                mids.push(m);
            }
            codes.push(c);
            values.push(v);
        }
        if let Kind::Ieee(..) = kind(fmt) {
            // the code after the largest finite one: infinity, or NaN for E4M3
            let last = values.len() - 1;
            let ulp = values[last] - values[last - 1];
            mids.push(values[last] + ulp / 2.0);
        }
        Table { fmt, codes, values, mids, n }
    }

    pub fn bits(&self) -> u32 {
        self.n
    }

    fn nan(&self) -> u64 {
        match kind(self.fmt) {
            Kind::Ieee(_, _, true) => (1 << self.n) - 1 >> 1,
            Kind::Ieee(e, f, false) => (((1u64 << e) - 1) << f) | 1 << (f - 1),
            _ => 1 << (self.n - 1),
        }
    }

    fn overflow(&self) -> u64 {
        match kind(self.fmt) {
            Kind::Ieee(_, _, true) => self.nan(),
            Kind::Ieee(..) => self.codes[self.codes.len() - 1] + 1,
            _ => unreachable!(),
        }
    }

    fn negate(&self, c: u64) -> u64 {
        match kind(self.fmt) {
            Kind::Ieee(..) => c | 1 << (self.n - 1),
            _ => c.wrapping_neg() & ((1 << self.n) - 1),
        }
    }

    /// Correctly rounded code of the exact value.
    pub fn round(&self, x: Exact) -> u64 {
        let tapered = !matches!(kind(self.fmt), Kind::Ieee(..));
        if x.v.is_nan() {
            return self.nan();
        }
        if x.v.is_infinite() {
            if tapered {
                return self.nan();
            }
            let c = self.overflow();
            return if x.v < 0.0 && c != self.nan() { self.negate(c) } else { c };
        }
        let neg = x.v.is_sign_negative();
        let mag = if neg {
            Exact { v: -x.v, dir: x.dir.reverse() }
        } else {
            x
        };
        if mag.v == 0.0 && mag.dir == Ordering::Equal {
            return if neg && !tapered { self.negate(0) } else { 0 };
        }
        // the first threshold strictly above, or the tie
        let mut lo = 0usize;
        let mut hi = self.mids.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if mag.cmp_to(self.mids[mid]) == Ordering::Greater {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let mut i = lo;
        if i < self.mids.len() && mag.cmp_to(self.mids[i]) == Ordering::Equal {
            // tie between codes i and i + 1: pick the even one
            let upper = if i + 1 < self.codes.len() {
                self.codes[i + 1]
            } else {
                self.overflow()
            };
            if upper % 2 == 0 {
                i += 1;
            }
        }
        let code = if i >= self.codes.len() {
            if tapered {
                self.codes[self.codes.len() - 1]
            } else {
                self.overflow()
            }
        } else if i == 0 && tapered {
            1
        } else {
            self.codes[i]
        };
        if self.fmt == Format::Float8E4M3 && code == self.nan() {
            return code;
        }
        if neg {
            self.negate(code)
        } else {
            code
        }
    }

    /// Expected result code of `op` on two codes.
    pub fn apply(&self, op: ArithOp, a: u64, b: u64) -> u64 {
        let tapered = !matches!(kind(self.fmt), Kind::Ieee(..));
        let (x, y) = (value(self.fmt, a), value(self.fmt, b));
        if tapered {
            let bad = x.is_nan()
                || y.is_nan() && op != ArithOp::Sqrt
                || op == ArithOp::Div && y == 0.0
                || op == ArithOp::Sqrt && x < 0.0;
            if bad {
                return self.nan();
            }
        }
        self.round(exact(op, x, y))
    }

    /// Canonical form of a code: every NaN pattern maps to the canonical one.
    pub fn canonical(&self, c: u64) -> u64 {
        if value(self.fmt, c).is_nan() {
            self.nan()
        } else {
            c
        }
    }
}
