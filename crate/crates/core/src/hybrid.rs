//! Hybrid-logic decoding: a synchronous SC schedule that hands every
//! length-`N'` component code to a combinational decoder.
//!
//! [`hybrid_decode`] is the functional model. It walks the top
//! `log2(N/N')` trellis stages to produce the component LLRs, then runs the
//! component decoder on them with the matching slice of the frozen mask.
//! [`latency_gain`] is the analytical latency and throughput model.

use crate::decoder::{component_llrs, ArithmeticKind, DecisionMode, DecoderKernel, ScDecoder};
use crate::error::{invalid, Error, Result};
use crate::llr::{Arithmetic, ExactFloat, FixedMinSum, MinSumFloat};
use crate::polar::{BitVec, FrozenMask};

/// Splits a mask into `N / N'` component masks of length `N'`.
pub fn component_masks(mask: &FrozenMask, n_prime: usize) -> Result<Vec<FrozenMask>> {
    check_split(mask.n(), n_prime)?;
    mask.as_slice()
        .chunks_exact(n_prime)
        .map(|c| FrozenMask::from_bits(c.to_vec()))
        .collect()
}

fn check_split(n: usize, n_prime: usize) -> Result<u32> {
    if n_prime < 2 || !n_prime.is_power_of_two() || n_prime > n || !n.is_multiple_of(n_prime) {
        return Err(invalid(format!(
            "component length {n_prime} must be a power of two >= 2 dividing N={n}"
        )));
    }
    Ok((n / n_prime).trailing_zeros())
}

/// Hybrid decoding with an explicit arithmetic.
pub fn hybrid_decode_with<A: Arithmetic>(
    arith: A,
    mode: DecisionMode,
    llrs: &[A::Llr],
    mask: &FrozenMask,
    n_prime: usize,
) -> Result<BitVec> {
    let n = mask.n();
    if llrs.len() != n {
        return Err(invalid(format!(
            "{} LLRs for a mask of length {n}",
            llrs.len()
        )));
    }
    let depth = check_split(n, n_prime)?;
    let mut component = ScDecoder::new(&arith, mode, n_prime)?;
    let mut decided = vec![0u8; n];
    for i in 0..(n / n_prime) {
        let lambda = component_llrs(&arith, llrs, &decided, depth, i);
        let range = i * n_prime..(i + 1) * n_prime;
        let (_, tail) = decided.split_at_mut(range.start);
        component.decode_into(
            &lambda,
            &mask.as_slice()[range.clone()],
            &mut tail[..n_prime],
        )?;
    }
    Ok(BitVec::from_raw(decided))
}

/// Hybrid decoding of channel LLRs with the arithmetic chosen by `kernel`.
pub fn hybrid_decode(
    llrs: &[f64],
    mask: &FrozenMask,
    n_prime: usize,
    kernel: &DecoderKernel,
) -> Result<BitVec> {
    fn run<A: Arithmetic>(
        arith: A,
        mode: DecisionMode,
        llrs: &[f64],
        mask: &FrozenMask,
        n_prime: usize,
    ) -> Result<BitVec> {
        let converted: Vec<A::Llr> = llrs.iter().map(|&l| arith.channel_value(l)).collect();
        hybrid_decode_with(arith, mode, &converted, mask, n_prime)
    }
    if let Some(bad) = llrs.iter().find(|l| !l.is_finite()) {
        return Err(invalid(format!("non-finite channel LLR {bad}")));
    }
    match kernel.arithmetic {
        ArithmeticKind::Exact => run(ExactFloat, kernel.mode, llrs, mask, n_prime),
        ArithmeticKind::MinSum => run(MinSumFloat, kernel.mode, llrs, mask, n_prime),
        ArithmeticKind::Fixed(fmt) => run(FixedMinSum::new(fmt), kernel.mode, llrs, mask, n_prime),
    }
}

/// Latency in cycles of a semi-parallel SC decoder with `p` processing
/// elements: `2N + (N/P) log2(N/(4P))`.
pub fn semi_parallel_latency(n: usize, p: usize) -> Result<u64> {
    if n < 4 || !n.is_power_of_two() {
        return Err(invalid(format!(
            "block length {n} must be a power of two >= 4"
        )));
    }
    if p == 0 || !p.is_power_of_two() {
        return Err(invalid(format!(
            "processing elements {p} must be a power of two >= 1"
        )));
    }
    if p > n / 4 {
        return Err(Error::OutOfModel(format!(
            "P={p} exceeds N/4={} where the latency formula is defined",
            n / 4
        )));
    }
    let log_term = (n / (4 * p)).trailing_zeros() as u64;
    Ok(2 * n as u64 + (n / p) as u64 * log_term)
}

/// Inputs of the hybrid latency model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    pub n: usize,
    pub n_prime: usize,
    /// Processing elements of the synchronous decoder.
    pub p: usize,
    /// Synchronous clock frequency in Hz.
    pub f_c: f64,
    /// Combinational delay of the length-`N'` decoder in seconds.
    pub d_nprime: f64,
}

impl HybridConfig {
    /// Takes `D_{N'}` from a measured combinational throughput: `D = N' / TP`.
    pub fn from_comb_throughput(
        n: usize,
        n_prime: usize,
        p: usize,
        f_c: f64,
        comb_tp: f64,
    ) -> Result<Self> {
        if !(comb_tp.is_finite() && comb_tp > 0.0) {
            return Err(invalid(format!(
                "combinational throughput must be > 0, got {comb_tp}"
            )));
        }
        let cfg = Self {
            n,
            n_prime,
            p,
            f_c,
            d_nprime: n_prime as f64 / comb_tp,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_split(self.n, self.n_prime)?;
        if self.p == 0 {
            return Err(invalid("P must be >= 1"));
        }
        if !(self.f_c.is_finite() && self.f_c > 0.0) {
            return Err(invalid(format!("f_c must be > 0, got {}", self.f_c)));
        }
        if !(self.d_nprime.is_finite() && self.d_nprime > 0.0) {
            return Err(invalid(format!("D_N' must be > 0, got {}", self.d_nprime)));
        }
        Ok(())
    }
}

/// Outputs of the hybrid latency model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridReport {
    /// Synchronous decoder latency `L_S(N)` in cycles.
    pub l_s: u64,
    /// Cycles the synchronous decoder waits for each combinational call.
    pub wait_cycles: u64,
    /// Latency reduction per component, `L_S(N') - wait_cycles`.
    pub l_r: i64,
    pub gain: f64,
    /// Synchronous throughput in b/s.
    pub tp_s: f64,
    /// Hybrid throughput in b/s.
    pub tp_hl: f64,
}

/// Evaluates `g = L_S(N) / (L_S(N) - (N/N') L_r(N'))` with
/// `L_r(N') = (2N' - 2) - ceil(D_{N'} f_c)`.
pub fn latency_gain(cfg: &HybridConfig) -> Result<HybridReport> {
    cfg.validate()?;
    let l_s = semi_parallel_latency(cfg.n, cfg.p)?;
    let wait_cycles = (cfg.d_nprime * cfg.f_c).ceil() as u64;
    let l_r = (2 * cfg.n_prime as i64 - 2) - wait_cycles as i64;
    let reps = (cfg.n / cfg.n_prime) as i64;
    let denom = l_s as i64 - reps * l_r;
    if denom <= 0 {
        return Err(Error::ModelBreakdown(format!(
            "hybrid latency L_S - (N/N')L_r = {denom} is not positive"
        )));
    }
    let gain = l_s as f64 / denom as f64;
    let tp_s = cfg.f_c * cfg.n as f64 / l_s as f64;
    Ok(HybridReport {
        l_s,
        wait_cycles,
        l_r,
        gain,
        tp_s,
        tp_hl: gain * tp_s,
    })
}

/// Measured combinational throughputs (b/s) used as default `D_{N'}` inputs,
/// keyed by `N'`.
pub const DEFAULT_COMB_THROUGHPUT: [(usize, f64); 3] = [(16, 1.05e9), (32, 0.88e9), (64, 0.85e9)];

/// Default combinational delay `N' / TP` for the tabulated component lengths.
pub fn default_comb_delay(n_prime: usize) -> Option<f64> {
    DEFAULT_COMB_THROUGHPUT
        .iter()
        .find(|(n, _)| *n == n_prime)
        .map(|(n, tp)| *n as f64 / tp)
}
