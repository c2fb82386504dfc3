//! Complexity, delay and figure-of-merit formulas for combinational decoders.
//!
//! Block counts follow the recursive construction (two half-length decoders
//! plus an `f` block, a `g` block and an encoder): `c_N = N/2 log2(N/2)`
//! comparators in `f` blocks, `s_N = N/2` decision comparators and
//! `r_N = N log2(N/2)` adders/subtractors, anchored at `c_4 = s_4 = 2`.
//!
//! The delay model adds, per recursion level, `delta_c + delta_m` for the `f`
//! block, `delta_m` for the precomputed `g` block and `log2(N/2) delta_x` for
//! the partial-sum encoder, down to the length-4 decoder
//! `D'_4 = 3 delta_c + 4 delta_m + delta_x + 2 delta_a`.

use crate::error::{invalid, Result};

/// Elementary delays in seconds (any consistent time unit works).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateDelays {
    /// Comparator.
    pub delta_c: f64,
    /// Multiplexer.
    pub delta_m: f64,
    /// Two-input XOR.
    pub delta_x: f64,
    /// Two-input AND.
    pub delta_a: f64,
    /// Interconnect delay of the whole design.
    pub t_n: f64,
}

impl GateDelays {
    pub fn new(delta_c: f64, delta_m: f64, delta_x: f64, delta_a: f64, t_n: f64) -> Result<Self> {
        let d = Self {
            delta_c,
            delta_m,
            delta_x,
            delta_a,
            t_n,
        };
        let all = [delta_c, delta_m, delta_x, delta_a, t_n];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!(
                "gate delays must be finite and >= 0, got {all:?}"
            )));
        }
        Ok(d)
    }

    /// All four gate delays equal to 1, no interconnect term.
    pub fn unit() -> Self {
        Self {
            delta_c: 1.0,
            delta_m: 1.0,
            delta_x: 1.0,
            delta_a: 1.0,
            t_n: 0.0,
        }
    }

    /// Whether the length-4 delay expression applies (`delta_c >= 3 delta_x + delta_a`).
    pub fn applicable(&self) -> bool {
        self.delta_c >= 3.0 * self.delta_x + self.delta_a
    }

    /// Delay of the length-4 base decoder.
    pub fn base_decoder_delay(&self) -> f64 {
        3.0 * self.delta_c + 4.0 * self.delta_m + self.delta_x + 2.0 * self.delta_a
    }
}

/// Raised when the gate library violates `delta_c >= 3 delta_x + delta_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComparatorAssumptionViolated;

/// A delay value together with the model applicability warning, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEstimate {
    pub seconds: f64,
    pub warning: Option<ComparatorAssumptionViolated>,
}

impl DelayEstimate {
    fn new(seconds: f64, d: &GateDelays) -> Self {
        Self {
            seconds,
            warning: (!d.applicable()).then_some(ComparatorAssumptionViolated),
        }
    }
}

/// Block counts of a length-`N` combinational decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Complexity {
    /// `c_N`, comparators in `f` blocks.
    pub comparators: u64,
    /// `s_N`, decision comparators.
    pub decision_comparators: u64,
    /// `r_N`, adders and subtractors.
    pub adders: u64,
    pub total: u64,
}

fn log2_exact(n: usize, min: usize) -> Result<u32> {
    if n < min || !n.is_power_of_two() {
        return Err(invalid(format!(
            "block length {n} must be a power of two >= {min}"
        )));
    }
    Ok(n.trailing_zeros())
}

pub fn complexity(n: usize) -> Result<Complexity> {
    let m = log2_exact(n, 4)? as u64;
    let n = n as u64;
    let comparators = n / 2 * (m - 1);
    let decision_comparators = n / 2;
    let adders = n * (m - 1);
    Ok(Complexity {
        comparators,
        decision_comparators,
        adders,
        total: comparators + decision_comparators + adders,
    })
}

/// `N (3/2 log2 N - 1)`, the total from the closed form directly.
pub fn total_blocks_closed(n: usize) -> Result<u64> {
    let m = log2_exact(n, 4)? as u64;
    Ok(n as u64 * (3 * m - 2) / 2)
}

/// Unrolls `D_N = 2 D_{N/2} + delta_c + 2 delta_m + log2(N/2) delta_x` down
/// to `D'_4`. Ignores `t_n`.
pub fn delay_recursive(n: usize, d: &GateDelays) -> Result<DelayEstimate> {
    log2_exact(n, 8)?;
    let mut size = 4usize;
    let mut delay = d.base_decoder_delay();
    while size < n {
        let glue = d.delta_c + 2.0 * d.delta_m + (size.trailing_zeros() as f64) * d.delta_x;
        delay = 2.0 * delay + glue;
        size *= 2;
    }
    Ok(DelayEstimate::new(delay, d))
}

/// `N (3/2 delta_m + delta_c + delta_x + delta_a/2)
///  - (delta_c + 2 delta_m + (log2 N + 1) delta_x) + T_N`.
pub fn delay_closed(n: usize, d: &GateDelays) -> Result<DelayEstimate> {
    let m = log2_exact(n, 8)? as f64;
    let n = n as f64;
    let per_bit = 1.5 * d.delta_m + d.delta_c + d.delta_x + 0.5 * d.delta_a;
    let offset = d.delta_c + 2.0 * d.delta_m + (m + 1.0) * d.delta_x;
    Ok(DelayEstimate::new(n * per_bit - offset + d.t_n, d))
}

/// Throughput, energy per bit and hardware efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// bits per second.
    pub throughput: f64,
    /// joules per bit.
    pub energy_per_bit: f64,
    /// bits per second per square metre.
    pub hw_efficiency: f64,
}

/// `TP = N / D`, `E = P / TP`, `HE = TP / A`. SI units throughout.
pub fn metrics(n: usize, delay_s: f64, power_w: f64, area_m2: f64) -> Result<Metrics> {
    if n == 0 {
        return Err(invalid("block length must be > 0"));
    }
    for (name, v) in [("delay", delay_s), ("power", power_w), ("area", area_m2)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    let throughput = n as f64 / delay_s;
    Ok(Metrics {
        throughput,
        energy_per_bit: power_w / throughput,
        hw_efficiency: throughput / area_m2,
    })
}

/// `alpha C V_DD^2 f_c`.
pub fn dynamic_power(alpha: f64, c_farads: f64, v_dd: f64, f_c: f64) -> f64 {
    alpha * c_farads * v_dd * v_dd * f_c
}

/// Everything the analyzer reports for one block length.
#[derive(Debug, Clone, PartialEq)]
pub struct HwReport {
    pub n: usize,
    pub complexity: Complexity,
    /// Model delay from [`delay_closed`], absent for `N = 4`.
    pub model_delay: Option<DelayEstimate>,
    /// Delay used for the metrics: caller-supplied or the model delay.
    pub delay_s: Option<f64>,
    pub metrics: Option<Metrics>,
    pub dynamic_power: Option<f64>,
}

/// Inputs for [`analyze`] beyond the block length and gate delays.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisInputs {
    /// Overrides the model delay for the metrics (e.g. a measured clock period).
    pub delay_s: Option<f64>,
    pub power_w: Option<f64>,
    pub area_m2: Option<f64>,
    /// `(alpha, C, V_DD, f_c)` for the dynamic power estimate.
    pub switching: Option<(f64, f64, f64, f64)>,
}

pub fn analyze(n: usize, delays: &GateDelays, inputs: &AnalysisInputs) -> Result<HwReport> {
    let complexity = complexity(n)?;
    let model_delay = if n >= 8 {
        Some(delay_closed(n, delays)?)
    } else {
        None
    };
    let delay_s = inputs.delay_s.or(model_delay.map(|d| d.seconds));
    let metrics = match (delay_s, inputs.power_w, inputs.area_m2) {
        (Some(d), Some(p), Some(a)) => Some(metrics(n, d, p, a)?),
        _ => None,
    };
    let dynamic_power = inputs
        .switching
        .map(|(alpha, c, v, f)| dynamic_power(alpha, c, v, f));
    Ok(HwReport {
        n,
        complexity,
        model_delay,
        delay_s,
        metrics,
        dynamic_power,
    })
}
