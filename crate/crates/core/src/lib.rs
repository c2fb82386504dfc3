//! Successive-cancellation decoding of polar codes modelled after a fully
//! combinational decoder.
//!
//! The crate is organised around the pieces of such a decoder:
//!
//! - [`polar`]: bit vectors, frozen masks, code construction and the GF(2)
//!   encoder that also produces the decoder's partial sums.
//! - [`llr`]: LLR arithmetic in floating point and in Q-bit sign-magnitude
//!   fixed point.
//! - [`decoder`]: the recursive SC decoder, generic over the arithmetic, with
//!   the comparator-based odd-bit decision shortcut.
//! - [`pipeline`]: a cycle-accurate model of the pipelined combinational decoder.
//! - [`hybrid`]: hybrid-logic decoding (synchronous front end feeding a
//!   combinational component decoder) and its latency-gain model.
//! - [`hw`]: complexity, delay, throughput and energy formulas.
//! - [`channel`]: BPSK/AWGN channel and the Monte Carlo FER/BER harness.

pub mod channel;
pub mod decoder;
mod error;
pub mod hw;
pub mod hybrid;
pub mod llr;
pub mod pipeline;
pub mod polar;

pub use decoder::{decode, ArithmeticKind, DecisionMode, DecoderKernel, ScDecoder};
pub use error::{Error, Result};
pub use llr::{Arithmetic, LlrValue, QFormat, QLlr};
pub use polar::{construct_frozen_mask, encode, extract_data, BitVec, CodeSpec, FrozenMask};
