//! Cycle-level model of a pipelined combinational decoder.
//!
//! An `S`-stage pipeline splits the decoder into `2^S` segments, each a
//! combinational decoder for one length-`N/2^S` component code, separated by
//! registers. A codeword registered at cycle `t` occupies segment `j` at cycle
//! `t + 1 + j` and leaves at cycle `t + 2^S`, so one codeword completes per
//! cycle once the pipeline is full.

use crate::decoder::{component_llrs, DecisionMode, ScDecoder};
use crate::error::{invalid, Result};
use crate::llr::Arithmetic;
use crate::polar::{encode_in_place, BitVec, FrozenMask};

#[derive(Debug, Clone)]
struct Token<L> {
    id: u64,
    input_cycle: u64,
    llrs: Vec<L>,
    /// Decisions made so far; only the prefix before `next_segment` is valid.
    decided: Vec<u8>,
    /// Partial sums of the first half, registered once that half is decided.
    v: Option<Vec<u8>>,
    next_segment: usize,
}

/// A codeword leaving the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOutput {
    /// Sequence number assigned at input, starting at 0.
    pub id: u64,
    pub input_cycle: u64,
    pub output_cycle: u64,
    pub bits: BitVec,
}

/// One segment evaluation during a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentEvent {
    pub segment: usize,
    pub id: u64,
    /// Decisions produced by the segment for its component code.
    pub bits: Vec<u8>,
}

/// Pipelined decoder state. Each call to [`PipelineDecoder::step`] is one clock cycle.
#[derive(Debug, Clone)]
pub struct PipelineDecoder<A: Arithmetic> {
    arith: A,
    mode: DecisionMode,
    mask: FrozenMask,
    stages: u32,
    segment_len: usize,
    cycle: u64,
    next_id: u64,
    tokens: Vec<Token<A::Llr>>,
    component: ScDecoder<A>,
    events: Vec<SegmentEvent>,
}

impl<A: Arithmetic + Clone> PipelineDecoder<A> {
    /// Requires `N / 2^stages >= 2`.
    pub fn new(arith: A, mode: DecisionMode, mask: FrozenMask, stages: u32) -> Result<Self> {
        let n = mask.n();
        if stages >= usize::BITS || (n >> stages) < 2 {
            return Err(invalid(format!(
                "{stages} pipeline stages leave segments shorter than 2 for N={n}"
            )));
        }
        let segment_len = n >> stages;
        Ok(Self {
            component: ScDecoder::new(arith.clone(), mode, segment_len)?,
            arith,
            mode,
            mask,
            stages,
            segment_len,
            cycle: 0,
            next_id: 0,
            tokens: Vec::new(),
            events: Vec::new(),
        })
    }
}

impl<A: Arithmetic> PipelineDecoder<A> {
    pub fn n(&self) -> usize {
        self.mask.n()
    }

    pub fn stages(&self) -> u32 {
        self.stages
    }

    pub fn mode(&self) -> DecisionMode {
        self.mode
    }

    pub fn segments(&self) -> usize {
        1 << self.stages
    }

    /// Cycles from registering an input to its output.
    pub fn latency(&self) -> u64 {
        1 << self.stages
    }

    /// Number of completed cycles.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn in_flight(&self) -> usize {
        self.tokens.len()
    }

    /// Segment evaluations of the most recent cycle, in segment order.
    pub fn events(&self) -> &[SegmentEvent] {
        &self.events
    }

    /// Advances one cycle. Every registered codeword moves through its next
    /// segment, then `input` (if any) is registered. `None` inserts a bubble.
    pub fn step(&mut self, input: Option<Vec<A::Llr>>) -> Result<Option<PipelineOutput>> {
        let n = self.n();
        if let Some(llrs) = &input {
            if llrs.len() != n {
                return Err(invalid(format!(
                    "pipeline for N={n} given {} LLRs",
                    llrs.len()
                )));
            }
        }
        self.cycle += 1;
        self.events.clear();

        let segments = self.segments();
        let half = n / 2;
        let mut output = None;
        for token in &mut self.tokens {
            let j = token.next_segment;
            let lambda = component_llrs(&self.arith, &token.llrs, &token.decided, self.stages, j);
            let range = j * self.segment_len..(j + 1) * self.segment_len;
            self.component.decode_into(
                &lambda,
                &self.mask.as_slice()[range.clone()],
                &mut token.decided[range.clone()],
            )?;
            self.events.push(SegmentEvent {
                segment: j,
                id: token.id,
                bits: token.decided[range.clone()].to_vec(),
            });
            if segments > 1 && range.end == half {
                let mut v = token.decided[..half].to_vec();
                encode_in_place(&mut v);
                token.v = Some(v);
            }
            token.next_segment += 1;
        }
        self.events.sort_by_key(|e| e.segment);
        if let Some(pos) = self.tokens.iter().position(|t| t.next_segment == segments) {
            let t = self.tokens.remove(pos);
            output = Some(PipelineOutput {
                id: t.id,
                input_cycle: t.input_cycle,
                output_cycle: self.cycle,
                bits: BitVec::from_raw(t.decided),
            });
        }

        if let Some(llrs) = input {
            self.tokens.push(Token {
                id: self.next_id,
                input_cycle: self.cycle,
                llrs,
                decided: vec![0; n],
                v: None,
                next_segment: 0,
            });
            self.next_id += 1;
        }
        Ok(output)
    }

    /// Checks that every registered partial-sum vector equals the encoding
    /// of the first-half decisions of its codeword.
    pub fn registers_consistent(&self) -> bool {
        let half = self.n() / 2;
        self.tokens.iter().all(|t| match &t.v {
            Some(v) => {
                let mut expect = t.decided[..half].to_vec();
                encode_in_place(&mut expect);
                *v == expect && t.next_segment * self.segment_len >= half
            }
            None => t.next_segment * self.segment_len < half || self.segments() == 1,
        })
    }
}

/// Throughput model of an `S`-stage pipeline: each stage halves the critical path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineTimingModel {
    pub n: usize,
    /// Combinational delay `D_N` of the unpipelined decoder in seconds.
    pub d_n: f64,
    pub stages: u32,
}

impl PipelineTimingModel {
    pub fn new(n: usize, d_n: f64, stages: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("block length must be > 0"));
        }
        if !(d_n.is_finite() && d_n > 0.0) {
            return Err(invalid(format!("D_N must be > 0, got {d_n}")));
        }
        if stages > 30 {
            return Err(invalid(format!("{stages} stages is out of range")));
        }
        Ok(Self { n, d_n, stages })
    }

    /// Clock period `D_N / 2^S`.
    pub fn period(&self) -> f64 {
        self.d_n / (1u64 << self.stages) as f64
    }

    /// `N / (D_N / 2^S)` in b/s.
    pub fn throughput(&self) -> f64 {
        self.n as f64 / self.period()
    }
}
