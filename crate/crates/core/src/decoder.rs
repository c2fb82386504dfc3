//! Successive-cancellation decoding.
//!
//! [`ScDecoder`] runs the recursive SC algorithm: a length-`N` instance
//! computes `f` over adjacent LLR pairs, decodes the first half, re-encodes
//! the first-half decisions into partial sums `v`, computes `g` with those
//! partial sums and decodes the second half. Length-2 instances make the bit
//! decisions. Every decision is ANDed with its frozen indicator.
//!
//! In [`DecisionMode::Shortcut`] the odd-indexed bit at each length-2 leaf is
//! decided with a magnitude comparison instead of evaluating `g`
//! ([`decide_odd`]). The two modes differ only when `|l1| == |l2|` and `g`
//! evaluates to exactly zero.

use std::cell::Cell;

use crate::error::{invalid, Result};
use crate::llr::{Arithmetic, ExactFloat, FixedMinSum, LlrValue, MinSumFloat, QFormat};
use crate::polar::{encode_in_place, BitVec, FrozenMask};

/// How odd-indexed bits are decided at the length-2 leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecisionMode {
    /// `s(g(l1, l2, u_even))`.
    Plain,
    /// Comparator form: `s(l2)` if `|l2| >= |l1|`, else `s(l1) ^ u_even`.
    #[default]
    Shortcut,
}

/// LLR arithmetic selected for a decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithmeticKind {
    /// Floating point, exact `f`.
    Exact,
    /// Floating point, min-sum `f`.
    MinSum,
    /// Q-bit sign-magnitude min-sum.
    Fixed(QFormat),
}

/// Arithmetic plus decision mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderKernel {
    pub arithmetic: ArithmeticKind,
    pub mode: DecisionMode,
}

impl DecoderKernel {
    pub fn new(arithmetic: ArithmeticKind, mode: DecisionMode) -> Self {
        Self { arithmetic, mode }
    }

    pub fn min_sum() -> Self {
        Self::new(ArithmeticKind::MinSum, DecisionMode::Shortcut)
    }

    pub fn exact() -> Self {
        Self::new(ArithmeticKind::Exact, DecisionMode::Shortcut)
    }

    pub fn fixed(format: QFormat) -> Self {
        Self::new(ArithmeticKind::Fixed(format), DecisionMode::Shortcut)
    }

    pub fn with_mode(self, mode: DecisionMode) -> Self {
        Self { mode, ..self }
    }
}

impl Default for DecoderKernel {
    fn default() -> Self {
        Self::min_sum()
    }
}

/// Odd-bit decision of the comparator shortcut.
///
/// Returns 0 if `a_odd == 0`; `s(l2)` if `|l2| >= |l1|`; otherwise
/// `s(l1) ^ u_even`.
#[inline]
pub fn decide_odd<L: LlrValue>(l1: L, l2: L, u_even: u8, a_odd: u8) -> u8 {
    if a_odd == 0 {
        0
    } else if l2.magnitude_ge(l1) {
        l2.sign_bit()
    } else {
        l1.sign_bit() ^ u_even
    }
}

/// First decision of a length-4 decoder as the XOR of the four channel signs.
///
/// Equal to `s(f(f(l0, l1), f(l2, l3)))` under min-sum whenever no input is
/// zero.
pub fn decide_even_simplified<L: LlrValue>(l: [L; 4], a: u8) -> u8 {
    (l[0].sign_bit() ^ l[1].sign_bit() ^ l[2].sign_bit() ^ l[3].sign_bit()) & a
}

fn check_block_length(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!(
            "block length {n} is not a power of two >= 2"
        )));
    }
    Ok(())
}

/// Reusable SC decoder for one block length, holding its scratch buffers.
#[derive(Debug, Clone)]
pub struct ScDecoder<A: Arithmetic> {
    arith: A,
    mode: DecisionMode,
    n: usize,
    llr_scratch: Vec<A::Llr>,
    partial_sums: Vec<u8>,
    codeword: Vec<u8>,
}

impl<A: Arithmetic> ScDecoder<A> {
    pub fn new(arith: A, mode: DecisionMode, n: usize) -> Result<Self> {
        check_block_length(n)?;
        let zero = arith.channel_value(0.0);
        Ok(Self {
            arith,
            mode,
            n,
            llr_scratch: vec![zero; n],
            partial_sums: vec![0; 2 * n],
            codeword: vec![0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arithmetic(&self) -> &A {
        &self.arith
    }

    pub fn mode(&self) -> DecisionMode {
        self.mode
    }

    /// Re-encoding of the most recent decisions, a by-product of the partial sums.
    pub fn last_codeword(&self) -> &[u8] {
        &self.codeword
    }

    /// Decodes `llrs` into `out` (both length `N`, `mask` too).
    pub fn decode_into(&mut self, llrs: &[A::Llr], mask: &[u8], out: &mut [u8]) -> Result<()> {
        if llrs.len() != self.n || mask.len() != self.n || out.len() != self.n {
            return Err(invalid(format!(
                "decoder for N={} given llrs/mask/out of lengths {}/{}/{}",
                self.n,
                llrs.len(),
                mask.len(),
                out.len()
            )));
        }
        decode_recursive(
            &self.arith,
            self.mode,
            llrs,
            mask,
            out,
            &mut self.codeword,
            &mut self.llr_scratch,
            &mut self.partial_sums,
        );
        Ok(())
    }

    pub fn decode(&mut self, llrs: &[A::Llr], mask: &FrozenMask) -> Result<BitVec> {
        let mut out = vec![0u8; self.n];
        self.decode_into(llrs, mask.as_slice(), &mut out)?;
        Ok(BitVec::from_raw(out))
    }

    /// Converts channel LLRs with [`Arithmetic::channel_value`] and decodes.
    pub fn decode_channel(&mut self, llrs: &[f64], mask: &FrozenMask) -> Result<BitVec> {
        let converted: Vec<A::Llr> = llrs.iter().map(|&l| self.arith.channel_value(l)).collect();
        self.decode(&converted, mask)
    }
}

/// Decodes `llr` into `out` and writes the re-encoding of `out` into `x`.
///
/// `sums` is scratch for the children's re-encodings and must hold at least
/// `2 * llr.len()` entries.
#[allow(clippy::too_many_arguments)]
fn decode_recursive<A: Arithmetic>(
    arith: &A,
    mode: DecisionMode,
    llr: &[A::Llr],
    mask: &[u8],
    out: &mut [u8],
    x: &mut [u8],
    scratch: &mut [A::Llr],
    sums: &mut [u8],
) {
    let n = llr.len();
    if n == 2 {
        let u0 = arith.even_decision(llr[0], llr[1]) & mask[0];
        let u1 = match mode {
            DecisionMode::Shortcut => arith.odd_decision(llr[0], llr[1], u0, mask[1]),
            DecisionMode::Plain => arith.g(llr[0], llr[1], u0).sign_bit() & mask[1],
        };
        out[0] = u0;
        out[1] = u1;
        x[0] = u0 ^ u1;
        x[1] = u1;
        return;
    }
    let half = n / 2;
    let (child, rest) = scratch.split_at_mut(half);
    let (out_first, out_second) = out.split_at_mut(half);
    let (x_first, tail) = sums.split_at_mut(half);
    let (x_second, deeper) = tail.split_at_mut(half);

    for (c, pair) in child.iter_mut().zip(llr.chunks_exact(2)) {
        *c = arith.f(pair[0], pair[1]);
    }
    decode_recursive(
        arith,
        mode,
        child,
        &mask[..half],
        out_first,
        x_first,
        rest,
        deeper,
    );

    for ((c, pair), &vi) in child
        .iter_mut()
        .zip(llr.chunks_exact(2))
        .zip(x_first.iter())
    {
        *c = arith.g(pair[0], pair[1], vi);
    }
    decode_recursive(
        arith,
        mode,
        child,
        &mask[half..],
        out_second,
        x_second,
        rest,
        deeper,
    );

    for ((pair, &a), &b) in x
        .chunks_exact_mut(2)
        .zip(x_first.iter())
        .zip(x_second.iter())
    {
        pair[0] = a ^ b;
        pair[1] = b;
    }
}

/// Decodes with an explicit arithmetic.
pub fn decode_with<A: Arithmetic>(
    arith: A,
    mode: DecisionMode,
    llrs: &[A::Llr],
    mask: &FrozenMask,
) -> Result<BitVec> {
    if llrs.len() != mask.n() {
        return Err(invalid(format!(
            "{} LLRs for a mask of length {}",
            llrs.len(),
            mask.n()
        )));
    }
    ScDecoder::new(arith, mode, mask.n())?.decode(llrs, mask)
}

/// Decodes channel LLRs with the arithmetic and mode chosen by `kernel`.
///
/// The output has length `N` and is 0 at every frozen position.
pub fn decode(llrs: &[f64], mask: &FrozenMask, kernel: &DecoderKernel) -> Result<BitVec> {
    if llrs.len() != mask.n() {
        return Err(invalid(format!(
            "{} LLRs for a mask of length {}",
            llrs.len(),
            mask.n()
        )));
    }
    if let Some(bad) = llrs.iter().find(|l| !l.is_finite()) {
        return Err(invalid(format!("non-finite channel LLR {bad}")));
    }
    match kernel.arithmetic {
        ArithmeticKind::Exact => {
            ScDecoder::new(ExactFloat, kernel.mode, mask.n())?.decode_channel(llrs, mask)
        }
        ArithmeticKind::MinSum => {
            ScDecoder::new(MinSumFloat, kernel.mode, mask.n())?.decode_channel(llrs, mask)
        }
        ArithmeticKind::Fixed(fmt) => {
            ScDecoder::new(FixedMinSum::new(fmt), kernel.mode, mask.n())?.decode_channel(llrs, mask)
        }
    }
}

/// LLRs entering component decoder `index` (0-based) of size `N / 2^depth`.
///
/// Walks the top `depth` stages of the decoding trellis: at each stage the
/// path takes the `f` branch for a left subtree and the `g` branch, with
/// partial sums re-encoded from `decided`, for a right subtree. `decided` must
/// hold at least the decisions of all components before `index`.
pub fn component_llrs<A: Arithmetic>(
    arith: &A,
    llrs: &[A::Llr],
    decided: &[u8],
    depth: u32,
    index: usize,
) -> Vec<A::Llr> {
    let n = llrs.len();
    debug_assert!(n.is_power_of_two() && (n >> depth) >= 1);
    debug_assert!(index < (1 << depth));
    let mut current = llrs.to_vec();
    let mut offset = 0;
    let mut size = n;
    for level in (0..depth).rev() {
        let half = size / 2;
        let next: Vec<A::Llr> = if (index >> level) & 1 == 0 {
            current
                .chunks_exact(2)
                .map(|p| arith.f(p[0], p[1]))
                .collect()
        } else {
            let mut v = decided[offset..offset + half].to_vec();
            encode_in_place(&mut v);
            offset += half;
            current
                .chunks_exact(2)
                .zip(&v)
                .map(|(p, &vi)| arith.g(p[0], p[1], vi))
                .collect()
        };
        current = next;
        size = half;
    }
    current
}

/// Hardware units a decoder instantiates, counted by walking the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UnitCounts {
    /// `f` blocks (one comparator each).
    pub f_units: u64,
    /// `g` blocks (an adder and a subtractor each).
    pub g_units: u64,
    /// Odd-bit decision comparators.
    pub decision_comparators: u64,
    /// Even-bit decisions, which reduce to sign logic.
    pub sign_decisions: u64,
}

/// Arithmetic wrapper that counts how often each unit is exercised.
#[derive(Debug, Default)]
pub struct UnitCounter<A> {
    inner: A,
    f_units: Cell<u64>,
    g_units: Cell<u64>,
    decision_comparators: Cell<u64>,
    sign_decisions: Cell<u64>,
}

impl<A: Arithmetic> UnitCounter<A> {
    pub fn new(inner: A) -> Self {
        Self {
            inner,
            f_units: Cell::new(0),
            g_units: Cell::new(0),
            decision_comparators: Cell::new(0),
            sign_decisions: Cell::new(0),
        }
    }

    pub fn counts(&self) -> UnitCounts {
        UnitCounts {
            f_units: self.f_units.get(),
            g_units: self.g_units.get(),
            decision_comparators: self.decision_comparators.get(),
            sign_decisions: self.sign_decisions.get(),
        }
    }
}

fn bump(c: &Cell<u64>) {
    c.set(c.get() + 1);
}

impl<A: Arithmetic> Arithmetic for UnitCounter<A> {
    type Llr = A::Llr;

    fn channel_value(&self, l: f64) -> Self::Llr {
        self.inner.channel_value(l)
    }
    fn f(&self, l1: Self::Llr, l2: Self::Llr) -> Self::Llr {
        bump(&self.f_units);
        self.inner.f(l1, l2)
    }
    fn g(&self, l1: Self::Llr, l2: Self::Llr, v: u8) -> Self::Llr {
        bump(&self.g_units);
        self.inner.g(l1, l2, v)
    }
    fn even_decision(&self, l1: Self::Llr, l2: Self::Llr) -> u8 {
        bump(&self.sign_decisions);
        self.inner.even_decision(l1, l2)
    }
    fn odd_decision(&self, l1: Self::Llr, l2: Self::Llr, u_even: u8, a_odd: u8) -> u8 {
        bump(&self.decision_comparators);
        self.inner.odd_decision(l1, l2, u_even, a_odd)
    }
}

/// Units instantiated by a length-`n` shortcut-mode decoder, found by running
/// one decode through a [`UnitCounter`].
pub fn structural_counts(n: usize) -> Result<UnitCounts> {
    check_block_length(n)?;
    let mut dec = ScDecoder::new(UnitCounter::new(MinSumFloat), DecisionMode::Shortcut, n)?;
    let mut out = vec![0u8; n];
    dec.decode_into(&vec![1.0; n], &vec![1; n], &mut out)?;
    Ok(dec.arithmetic().counts())
}
