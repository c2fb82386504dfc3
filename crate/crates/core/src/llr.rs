//! LLR arithmetic.
//!
//! Floating-point LLRs are plain `f64`. Fixed-point LLRs are [`QLlr`]: one
//! sign bit and `Q - 1` magnitude bits, with a single (positive) zero. The
//! decoder is generic over the [`Arithmetic`] trait so the same recursion runs
//! with the exact `f`, the min-sum `f`, or Q-bit sign-magnitude min-sum.

use std::fmt;

use crate::error::{invalid, Result};

/// Hard decision of an LLR: 0 for `l >= 0`, 1 otherwise.
pub fn sign_bit(l: f64) -> u8 {
    if l >= 0.0 {
        0
    } else {
        1
    }
}

/// Min-sum check-node update: sign product times the smaller magnitude.
pub fn f_minsum(l1: f64, l2: f64) -> f64 {
    let m = l1.abs().min(l2.abs());
    let r = if (l1 < 0.0) != (l2 < 0.0) { -m } else { m };
    // Adding +0.0 turns a -0.0 result into +0.0.
    r + 0.0
}

/// Exact check-node update `2 atanh(tanh(l1/2) tanh(l2/2))`.
///
/// Small products use the tanh form directly. Once the product nears 1 it is
/// evaluated as `min(|l1|,|l2|) - ln(1+e^-||l1|-|l2||) + ln(1+e^-(|l1|+|l2|))`,
/// which stays finite where `tanh` rounds to 1.
pub fn f_exact(l1: f64, l2: f64) -> f64 {
    let (a, b) = (l1.abs(), l2.abs());
    let m = a.min(b);
    let p = (a / 2.0).tanh() * (b / 2.0).tanh();
    let mag = if p < 0.5 {
        (2.0 * p.atanh()).min(m)
    } else {
        let correction = (-(a - b).abs()).exp().ln_1p() - (-(a + b)).exp().ln_1p();
        (m - correction).clamp(0.0, m)
    };
    if mag == 0.0 {
        0.0
    } else if sign_bit(l1) ^ sign_bit(l2) == 1 {
        -mag
    } else {
        mag
    }
}

/// Variable-node update `l2 + (1 - 2v) l1`.
pub fn g_fn(l1: f64, l2: f64, v: u8) -> f64 {
    l2 + (1.0 - 2.0 * v as f64) * l1
}

/// Fixed-point format: total width `q` (sign plus `q - 1` magnitude bits) and
/// the multiplier applied to channel LLRs before rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QFormat {
    q: u8,
    scale: f64,
}

impl QFormat {
    pub const MAX_BITS: u8 = 16;

    pub fn new(q: u8, scale: f64) -> Result<Self> {
        if !(2..=Self::MAX_BITS).contains(&q) {
            return Err(invalid(format!(
                "quantizer width {q} outside 2..={}",
                Self::MAX_BITS
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("quantizer scale {scale} must be > 0")));
        }
        Ok(Self { q, scale })
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Largest representable magnitude, `2^(q-1) - 1`.
    pub fn max_magnitude(&self) -> u16 {
        max_magnitude(self.q)
    }
}

fn max_magnitude(q: u8) -> u16 {
    ((1u32 << (q - 1)) - 1) as u16
}

/// Sign-magnitude fixed-point LLR.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct QLlr {
    sign: u8,
    magnitude: u16,
    q: u8,
}

impl QLlr {
    /// Builds a value, normalizing a zero magnitude to sign 0.
    pub fn new(sign: u8, magnitude: u16, q: u8) -> Result<Self> {
        if !(2..=QFormat::MAX_BITS).contains(&q) {
            return Err(invalid(format!("quantizer width {q} outside 2..=16")));
        }
        if sign > 1 {
            return Err(invalid(format!("sign {sign} is not a bit")));
        }
        if magnitude > max_magnitude(q) {
            return Err(invalid(format!(
                "magnitude {magnitude} exceeds {} for Q={q}",
                max_magnitude(q)
            )));
        }
        Ok(Self::normalized(sign, magnitude, q))
    }

    fn normalized(sign: u8, magnitude: u16, q: u8) -> Self {
        Self {
            sign: if magnitude == 0 { 0 } else { sign },
            magnitude,
            q,
        }
    }

    /// Saturating conversion from a signed integer.
    pub fn from_signed(value: i32, q: u8) -> Self {
        let max = max_magnitude(q) as i32;
        let mag = value.unsigned_abs().min(max as u32) as u16;
        Self::normalized(u8::from(value < 0), mag, q)
    }

    pub fn sign(&self) -> u8 {
        self.sign
    }

    pub fn magnitude(&self) -> u16 {
        self.magnitude
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn to_signed(&self) -> i32 {
        if self.sign == 1 {
            -(self.magnitude as i32)
        } else {
            self.magnitude as i32
        }
    }

    pub fn is_saturated(&self) -> bool {
        self.magnitude == max_magnitude(self.q)
    }
}

impl fmt::Debug for QLlr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QLlr({}{}/Q{})",
            if self.sign == 1 { "-" } else { "+" },
            self.magnitude,
            self.q
        )
    }
}

/// Rounds `|l| * scale` half away from zero and saturates at `2^(q-1) - 1`.
pub fn quantize(l: f64, fmt: &QFormat) -> QLlr {
    let max = fmt.max_magnitude();
    let scaled = (l.abs() * fmt.scale).round();
    let mag = if scaled >= max as f64 {
        max
    } else {
        scaled as u16
    };
    QLlr::normalized(sign_bit(l), mag, fmt.q)
}

fn same_width(a: &QLlr, b: &QLlr) -> Result<()> {
    if a.q != b.q {
        return Err(invalid(format!(
            "mixed quantizer widths Q={} and Q={}",
            a.q, b.q
        )));
    }
    Ok(())
}

/// Sign-magnitude min-sum: XOR of signs, minimum of magnitudes.
pub fn qf_minsum(a: QLlr, b: QLlr) -> Result<QLlr> {
    same_width(&a, &b)?;
    Ok(qf_unchecked(a, b))
}

/// `b + (1 - 2v) a` on the signed values, saturated to the format.
pub fn qg_fn(a: QLlr, b: QLlr, v: u8) -> Result<QLlr> {
    same_width(&a, &b)?;
    if v > 1 {
        return Err(invalid(format!("partial sum {v} is not a bit")));
    }
    Ok(qg_unchecked(a, b, v))
}

#[inline]
fn qf_unchecked(a: QLlr, b: QLlr) -> QLlr {
    QLlr::normalized(a.sign ^ b.sign, a.magnitude.min(b.magnitude), a.q)
}

#[inline]
fn qg_unchecked(a: QLlr, b: QLlr, v: u8) -> QLlr {
    let a = if v == 0 {
        a.to_signed()
    } else {
        -a.to_signed()
    };
    QLlr::from_signed(b.to_signed() + a, b.q)
}

/// Operations every LLR representation supports for hard decisions.
pub trait LlrValue: Copy + fmt::Debug + Send + Sync {
    /// 0 for non-negative values, 1 for negative.
    fn sign_bit(self) -> u8;
    /// `|self| >= |other|`.
    fn magnitude_ge(self, other: Self) -> bool;
}

impl LlrValue for f64 {
    #[inline]
    fn sign_bit(self) -> u8 {
        sign_bit(self)
    }

    #[inline]
    fn magnitude_ge(self, other: Self) -> bool {
        self.abs() >= other.abs()
    }
}

impl LlrValue for QLlr {
    #[inline]
    fn sign_bit(self) -> u8 {
        self.sign
    }

    #[inline]
    fn magnitude_ge(self, other: Self) -> bool {
        self.magnitude >= other.magnitude
    }
}

/// LLR arithmetic used by the SC recursion.
///
/// `even_decision` and `odd_decision` are hooks so that instrumentation
/// wrappers can observe which hardware unit a decoder step maps to; the
/// defaults are the plain definitions.
pub trait Arithmetic {
    type Llr: LlrValue;

    /// Converts a channel LLR into this representation.
    fn channel_value(&self, l: f64) -> Self::Llr;
    fn f(&self, l1: Self::Llr, l2: Self::Llr) -> Self::Llr;
    fn g(&self, l1: Self::Llr, l2: Self::Llr, v: u8) -> Self::Llr;

    /// Decision on an even-indexed bit at a length-2 leaf, before masking.
    #[inline]
    fn even_decision(&self, l1: Self::Llr, l2: Self::Llr) -> u8 {
        self.f(l1, l2).sign_bit()
    }

    /// Comparator-based decision on an odd-indexed bit, including masking.
    #[inline]
    fn odd_decision(&self, l1: Self::Llr, l2: Self::Llr, u_even: u8, a_odd: u8) -> u8 {
        crate::decoder::decide_odd(l1, l2, u_even, a_odd)
    }
}

impl<A: Arithmetic + ?Sized> Arithmetic for &A {
    type Llr = A::Llr;

    fn channel_value(&self, l: f64) -> Self::Llr {
        (**self).channel_value(l)
    }
    fn f(&self, l1: Self::Llr, l2: Self::Llr) -> Self::Llr {
        (**self).f(l1, l2)
    }
    fn g(&self, l1: Self::Llr, l2: Self::Llr, v: u8) -> Self::Llr {
        (**self).g(l1, l2, v)
    }
    fn even_decision(&self, l1: Self::Llr, l2: Self::Llr) -> u8 {
        (**self).even_decision(l1, l2)
    }
    fn odd_decision(&self, l1: Self::Llr, l2: Self::Llr, u_even: u8, a_odd: u8) -> u8 {
        (**self).odd_decision(l1, l2, u_even, a_odd)
    }
}

/// Floating point with the exact (tanh-domain) `f`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactFloat;

impl Arithmetic for ExactFloat {
    type Llr = f64;

    fn channel_value(&self, l: f64) -> f64 {
        l
    }
    #[inline]
    fn f(&self, l1: f64, l2: f64) -> f64 {
        f_exact(l1, l2)
    }
    #[inline]
    fn g(&self, l1: f64, l2: f64, v: u8) -> f64 {
        g_fn(l1, l2, v)
    }
}

/// Floating point with the min-sum `f`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinSumFloat;

impl Arithmetic for MinSumFloat {
    type Llr = f64;

    fn channel_value(&self, l: f64) -> f64 {
        l
    }
    #[inline]
    fn f(&self, l1: f64, l2: f64) -> f64 {
        f_minsum(l1, l2)
    }
    #[inline]
    fn g(&self, l1: f64, l2: f64, v: u8) -> f64 {
        g_fn(l1, l2, v)
    }
}

/// Q-bit sign-magnitude min-sum with saturating `g`.
#[derive(Debug, Clone, Copy)]
pub struct FixedMinSum {
    pub format: QFormat,
}

impl FixedMinSum {
    pub fn new(format: QFormat) -> Self {
        Self { format }
    }
}

impl Arithmetic for FixedMinSum {
    type Llr = QLlr;

    fn channel_value(&self, l: f64) -> QLlr {
        quantize(l, &self.format)
    }
    #[inline]
    fn f(&self, l1: QLlr, l2: QLlr) -> QLlr {
        qf_unchecked(l1, l2)
    }
    #[inline]
    fn g(&self, l1: QLlr, l2: QLlr, v: u8) -> QLlr {
        qg_unchecked(l1, l2, v)
    }
}
