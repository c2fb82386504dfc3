//! Polar code definition: bit vectors, frozen masks, code construction and
//! the GF(2) polar transform.
//!
//! The transform used everywhere in this crate is the one whose recursion
//! matches the decoder's pairing of adjacent LLRs: for `u = (u', u'')`,
//!
//! ```text
//! x[2i]   = enc(u')[i] ^ enc(u'')[i]
//! x[2i+1] = enc(u'')[i]
//! ```
//!
//! so the decoder's first half-length decoder sees `f(l[2i], l[2i+1])` and the
//! partial sums `v = enc(u')` line up with `g(l[2i], l[2i+1], v[i])`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// A vector of bits over GF(2), stored one bit per byte.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec(Vec<u8>);

impl BitVec {
    /// Builds a bit vector, rejecting any element outside `{0, 1}`.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(invalid(format!(
                "bit {} at index {pos} is not 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.0.get(i).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Element-wise XOR of two equal-length vectors.
    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        if self.len() != other.len() {
            return Err(invalid(format!(
                "xor of vectors with lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(BitVec(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub(crate) fn from_raw(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self(bits)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec(")?;
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitVec {
    /// Space-separated `0`/`1` values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<u8>> for BitVec {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::from_bits(bits)
    }
}

impl AsRef<[u8]> for BitVec {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

/// Frozen-bit indicator: `a[i] = 1` marks a data position, `a[i] = 0` a
/// frozen one. Frozen positions always carry 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FrozenMask {
    bits: BitVec,
    k: usize,
}

impl FrozenMask {
    pub fn new(bits: BitVec) -> Result<Self> {
        let n = bits.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid(format!(
                "mask length {n} is not a power of two >= 2"
            )));
        }
        let k = bits.count_ones();
        Ok(Self { bits, k })
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        Self::new(BitVec::from_bits(bits)?)
    }

    /// Mask with data positions at `indices`.
    pub fn from_data_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![0u8; n];
        for &i in indices {
            if i >= n {
                return Err(invalid(format!("data index {i} out of range for n={n}")));
            }
            bits[i] = 1;
        }
        Self::from_bits(bits)
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn as_slice(&self) -> &[u8] {
        self.bits.as_slice()
    }

    pub fn is_data(&self, i: usize) -> bool {
        self.bits.0[i] == 1
    }

    pub fn data_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_data(i)).collect()
    }

    pub fn frozen_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.is_data(i)).collect()
    }

    /// Places `data` (length K) at the data positions, zeros elsewhere.
    pub fn embed(&self, data: &BitVec) -> Result<BitVec> {
        if data.len() != self.k {
            return Err(invalid(format!(
                "expected {} data bits, got {}",
                self.k,
                data.len()
            )));
        }
        let mut u = vec![0u8; self.n()];
        for (slot, bit) in self
            .bits
            .iter()
            .enumerate()
            .filter(|&(_, a)| a == 1)
            .map(|(i, _)| i)
            .zip(data.iter())
        {
            u[slot] = bit;
        }
        Ok(BitVec(u))
    }

    /// Mask file contents: `N` on the first line, the `N` indicator values on
    /// the second.
    pub fn to_file_string(&self) -> String {
        format!("{}\n{}\n", self.n(), self.bits)
    }

    pub fn parse_file(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mask file".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad block length line {header:?}")))?;
        let body = lines
            .next()
            .ok_or_else(|| Error::Parse("missing indicator line".into()))?;
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines after indicator line".into()));
        }
        let bits = body
            .split_whitespace()
            .map(|tok| match tok {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::Parse(format!("indicator {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.len() != n {
            return Err(Error::Parse(format!(
                "header says N={n} but {} indicators follow",
                bits.len()
            )));
        }
        Self::from_bits(bits)
    }
}

impl fmt::Debug for FrozenMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FrozenMask(n={}, k={}, {:?})",
            self.n(),
            self.k,
            self.bits
        )
    }
}

impl FromStr for FrozenMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_file(s)
    }
}

/// A concrete polar code: block length, frozen mask and derived data length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    pub n: usize,
    pub k: usize,
    pub mask: FrozenMask,
}

impl CodeSpec {
    pub fn new(mask: FrozenMask) -> Self {
        Self {
            n: mask.n(),
            k: mask.k(),
            mask,
        }
    }

    /// Bhattacharyya construction, see [`construct_frozen_mask`].
    pub fn construct(n: usize, k: usize, design_erasure: f64) -> Result<Self> {
        Ok(Self::new(construct_frozen_mask(n, k, design_erasure)?))
    }

    pub fn rate(&self) -> f64 {
        self.mask.rate()
    }
}

/// Polar transform of `u`. The length must be a power of two.
pub fn encode(u: &BitVec) -> Result<BitVec> {
    let n = u.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("encode length {n} is not a power of two")));
    }
    let mut x = u.0.clone();
    encode_in_place(&mut x);
    Ok(BitVec(x))
}

/// In-place polar transform. `bits.len()` must be a power of two.
pub(crate) fn encode_in_place(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    // Butterflies of the Kronecker power, then the bit-reversal that turns the
    // block-concatenated form into the adjacent-pair form.
    let mut h = 1;
    while h < n {
        for block in bits.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        h *= 2;
    }
    bit_reverse_permute(bits);
}

fn bit_reverse_permute<T>(v: &mut [T]) {
    let n = v.len();
    if n <= 2 {
        return;
    }
    let shift = usize::BITS - n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if i < j {
            v.swap(i, j);
        }
    }
}

/// Bhattacharyya parameters of the `n` synthetic channels of a BEC with
/// erasure probability `z0`, index `i` splitting into `2i` (worse,
/// `2z - z^2`) and `2i + 1` (better, `z^2`).
pub fn bhattacharyya(n: usize, z0: f64) -> Vec<f64> {
    let mut z = vec![z0];
    while z.len() < n {
        z = z
            .iter()
            .flat_map(|&zi| [2.0 * zi - zi * zi, zi * zi])
            .collect();
    }
    z
}

/// Frozen mask with the `k` most reliable positions (smallest Bhattacharyya
/// parameter) as data. Ties freeze the lower index first.
pub fn construct_frozen_mask(n: usize, k: usize, design_erasure: f64) -> Result<FrozenMask> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!("n={n} is not a power of two >= 2")));
    }
    if k > n {
        return Err(invalid(format!("k={k} exceeds n={n}")));
    }
    if !(design_erasure > 0.0 && design_erasure < 1.0) {
        return Err(invalid(format!(
            "design erasure probability {design_erasure} not in (0, 1)"
        )));
    }
    let z = bhattacharyya(n, design_erasure);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(b.cmp(&a)));
    let mut bits = vec![0u8; n];
    for &i in &order[..k] {
        bits[i] = 1;
    }
    FrozenMask::from_bits(bits)
}

/// The bits of `u` at the data positions of `mask`, in index order.
pub fn extract_data(u: &BitVec, mask: &FrozenMask) -> Result<BitVec> {
    if u.len() != mask.n() {
        return Err(invalid(format!(
            "vector length {} does not match mask length {}",
            u.len(),
            mask.n()
        )));
    }
    Ok(BitVec(
        u.iter()
            .zip(mask.bits.iter())
            .filter(|&(_, a)| a == 1)
            .map(|(b, _)| b)
            .collect(),
    ))
}
