//! BPSK over AWGN and the Monte Carlo FER/BER harness.
//!
//! Trials are independent: trial `t` of SNR point `p` draws everything from a
//! ChaCha8 stream keyed by `(seed, p)` and positioned at stream `t`. Trials
//! run in fixed batches and the stop rule is checked only between batches, so
//! the counts do not depend on the number of worker threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::decoder::{ArithmeticKind, DecisionMode, DecoderKernel, ScDecoder};
use crate::error::{invalid, Result};
use crate::llr::{Arithmetic, ExactFloat, FixedMinSum, MinSumFloat};
use crate::polar::{encode_in_place, BitVec, CodeSpec};

/// Unit-energy BPSK over an AWGN channel, parameterized by `Eb/N0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnChannel {
    ebn0_db: f64,
    rate: f64,
    sigma2: f64,
}

impl AwgnChannel {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !ebn0_db.is_finite() {
            return Err(invalid(format!("Eb/N0 must be finite, got {ebn0_db}")));
        }
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(invalid(format!("code rate must be in (0, 1], got {rate}")));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(invalid(format!(
                "Eb/N0 {ebn0_db} dB gives noise variance {sigma2}"
            )));
        }
        Ok(Self {
            ebn0_db,
            rate,
            sigma2,
        })
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// LLR `2y / sigma^2` of a received sample.
    pub fn llr(&self, y: f64) -> f64 {
        2.0 * y / self.sigma2
    }
}

/// Maps bits to `1 - 2x`, adds the given noise samples and returns the LLRs.
pub fn llrs_with_noise(x: &[u8], chan: &AwgnChannel, noise: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(noise)
        .map(|(&b, &n)| chan.llr(1.0 - 2.0 * b as f64 + n))
        .collect()
}

/// Transmits `x` over the channel and returns the channel LLRs.
pub fn channel_llrs<R: Rng + ?Sized>(x: &BitVec, chan: &AwgnChannel, rng: &mut R) -> Vec<f64> {
    let sigma = chan.sigma2.sqrt();
    let noise: Vec<f64> = (0..x.len())
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    llrs_with_noise(x.as_slice(), chan, &noise)
}

/// Monte Carlo configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub kernel: DecoderKernel,
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    pub min_errors: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(code: CodeSpec, kernel: DecoderKernel, snr_db: Vec<f64>) -> Self {
        Self {
            code,
            kernel,
            snr_db,
            max_trials: 1_000_000,
            min_errors: 200,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_trials == 0 {
            return Err(invalid("max trials must be >= 1"));
        }
        if self.min_errors == 0 {
            return Err(invalid("min frame errors must be >= 1"));
        }
        if let Some(bad) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(invalid(format!("non-finite SNR {bad}")));
        }
        Ok(())
    }
}

/// Counts for one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    /// Half-width of the normal-approximation 95% interval on `fer`.
    pub ci95: f64,
}

impl FerPoint {
    fn from_counts(snr_db: f64, k: usize, c: Counts) -> Self {
        let fer = if c.trials == 0 {
            0.0
        } else {
            c.frame_errors as f64 / c.trials as f64
        };
        let bits = c.trials as f64 * k as f64;
        let ber = if bits == 0.0 {
            0.0
        } else {
            c.bit_errors as f64 / bits
        };
        let ci95 = if c.trials == 0 {
            0.0
        } else {
            1.96 * (fer * (1.0 - fer) / c.trials as f64).sqrt()
        };
        Self {
            snr_db,
            trials: c.trials,
            frame_errors: c.frame_errors,
            bit_errors: c.bit_errors,
            fer,
            ber,
            ci95,
        }
    }
}

/// One row per SNR point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FerCurve {
    pub points: Vec<FerPoint>,
}

impl FerCurve {
    pub const CSV_HEADER: &'static str = "snr_db,trials,frame_errors,bit_errors,fer,ber,ci95";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p.snr_db, p.trials, p.frame_errors, p.bit_errors, p.fer, p.ber, p.ci95
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    trials: u64,
    frame_errors: u64,
    bit_errors: u64,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
        }
    }
}

/// The RNG for one trial.
pub fn trial_rng(seed: u64, point: usize, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(point as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

const FIRST_BATCH: u64 = 256;
const MAX_BATCH: u64 = 1 << 16;

struct Worker<A: Arithmetic> {
    decoder: ScDecoder<A>,
    u: Vec<u8>,
    x: Vec<u8>,
    llrs: Vec<A::Llr>,
    out: Vec<u8>,
}

fn run_trial<A: Arithmetic>(
    w: &mut Worker<A>,
    code: &CodeSpec,
    data_idx: &[usize],
    chan: &AwgnChannel,
    rng: &mut ChaCha8Rng,
) -> Counts {
    w.u.fill(0);
    for &i in data_idx {
        w.u[i] = rng.random::<bool>() as u8;
    }
    w.x.copy_from_slice(&w.u);
    encode_in_place(&mut w.x);
    let sigma = chan.sigma2.sqrt();
    let arith = w.decoder.arithmetic();
    for (l, &b) in w.llrs.iter_mut().zip(&w.x) {
        let n: f64 = rng.sample(StandardNormal);
        *l = arith.channel_value(chan.llr(1.0 - 2.0 * b as f64 + sigma * n));
    }
    w.decoder
        .decode_into(&w.llrs, code.mask.as_slice(), &mut w.out)
        .expect("buffers sized to the code");
    let bit_errors = data_idx.iter().filter(|&&i| w.out[i] != w.u[i]).count() as u64;
    Counts {
        trials: 1,
        frame_errors: (bit_errors > 0) as u64,
        bit_errors,
    }
}

fn run_point_with<A>(
    arith: A,
    mode: DecisionMode,
    cfg: &SimConfig,
    point: usize,
) -> Result<FerPoint>
where
    A: Arithmetic + Clone + Send + Sync,
{
    let code = &cfg.code;
    let snr = cfg.snr_db[point];
    let k = code.mask.k();
    let n = code.mask.n();
    if k == 0 {
        // Nothing is transmitted, so no frame can be in error.
        return Ok(FerPoint::from_counts(
            snr,
            0,
            Counts {
                trials: cfg.max_trials,
                ..Counts::default()
            },
        ));
    }
    let chan = AwgnChannel::new(snr, code.rate())?;
    let data_idx = code.mask.data_indices();
    let zero = arith.channel_value(0.0);
    let mut total = Counts::default();
    let mut batch = FIRST_BATCH;
    while total.frame_errors < cfg.min_errors && total.trials < cfg.max_trials {
        let start = total.trials;
        let end = (start + batch).min(cfg.max_trials);
        let counts = (start..end)
            .into_par_iter()
            .map_init(
                || Worker {
                    decoder: ScDecoder::new(arith.clone(), mode, n)
                        .expect("validated block length"),
                    u: vec![0; n],
                    x: vec![0; n],
                    llrs: vec![zero; n],
                    out: vec![0; n],
                },
                |w, t| {
                    run_trial(
                        w,
                        code,
                        &data_idx,
                        &chan,
                        &mut trial_rng(cfg.seed, point, t),
                    )
                },
            )
            .reduce(Counts::default, Counts::merge);
        total = total.merge(counts);
        batch = (batch * 2).min(MAX_BATCH);
    }
    Ok(FerPoint::from_counts(snr, k, total))
}

/// Simulates one SNR point (by index into `cfg.snr_db`) on the current rayon pool.
pub fn run_point(cfg: &SimConfig, point: usize) -> Result<FerPoint> {
    cfg.validate()?;
    if point >= cfg.snr_db.len() {
        return Err(invalid(format!(
            "point {point} out of range for {} SNR values",
            cfg.snr_db.len()
        )));
    }
    let mode = cfg.kernel.mode;
    match cfg.kernel.arithmetic {
        ArithmeticKind::Exact => run_point_with(ExactFloat, mode, cfg, point),
        ArithmeticKind::MinSum => run_point_with(MinSumFloat, mode, cfg, point),
        ArithmeticKind::Fixed(fmt) => run_point_with(FixedMinSum::new(fmt), mode, cfg, point),
    }
}

/// Simulates every SNR point. `jobs` selects a dedicated pool of that many
/// threads; `None` uses the global rayon pool.
pub fn run(cfg: &SimConfig, jobs: Option<usize>) -> Result<FerCurve> {
    cfg.validate()?;
    let all = || -> Result<FerCurve> {
        let points = (0..cfg.snr_db.len())
            .map(|p| run_point(cfg, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(FerCurve { points })
    };
    match jobs {
        None => all(),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
            pool.install(all)
        }
    }
}

/// Parses an `a:b:step` SNR range (inclusive of `b` up to rounding).
pub fn parse_snr_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| invalid(format!("bad SNR range {s:?}: {e}")))?;
    let (a, b, step) = match nums[..] {
        [a] => (a, a, 1.0),
        [a, b] => (a, b, 1.0),
        [a, b, step] => (a, b, step),
        _ => return Err(invalid(format!("bad SNR range {s:?}, expected a:b:step"))),
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite() && step > 0.0 && b >= a) {
        return Err(invalid(format!("bad SNR range {s:?}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llr::QFormat;
    use crate::polar::{encode, FrozenMask};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn noise_variance() {
        let c = AwgnChannel::new(0.0, 0.5).unwrap();
        assert_relative_eq!(c.sigma2(), 1.0);
        assert_eq!(c.llr(1.0), 2.0);
        let c = AwgnChannel::new(3.0, 1.0).unwrap();
        assert_relative_eq!(c.sigma2(), 0.5 / 10f64.powf(0.3));
        assert!(AwgnChannel::new(0.0, 0.0).is_err());
        assert!(AwgnChannel::new(0.0, 1.5).is_err());
        assert!(AwgnChannel::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn llr_formula() {
        let c = AwgnChannel::new(0.0, 0.5).unwrap();
        assert_eq!(llrs_with_noise(&[0], &c, &[0.0]), vec![2.0]);
        assert_eq!(llrs_with_noise(&[1], &c, &[0.5]), vec![-1.0]);
    }

    #[test]
    fn high_snr_signs_match() {
        let c = AwgnChannel::new(60.0, 0.5).unwrap();
        let mut rng = trial_rng(1, 0, 0);
        let x = BitVec::from_bits((0..256).map(|_| rng.random_range(0..2)).collect()).unwrap();
        let l = channel_llrs(&x, &c, &mut rng);
        for (b, l) in x.iter().zip(l) {
            assert_eq!(b, (l < 0.0) as u8);
        }
    }

    proptest! {
        #[test]
        fn channel_symmetry(bits in proptest::collection::vec(0u8..2, 1..64),
                            noise in proptest::collection::vec(-3.0f64..3.0, 64),
                            snr in -2.0f64..6.0) {
            let c = AwgnChannel::new(snr, 0.5).unwrap();
            let flipped: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
            let neg: Vec<f64> = noise.iter().map(|n| -n).collect();
            let a = llrs_with_noise(&bits, &c, &noise);
            let b = llrs_with_noise(&flipped, &c, &neg);
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(*x, -*y);
            }
        }
    }

    #[test]
    fn trial_streams_differ() {
        let a: u64 = trial_rng(7, 0, 0).random();
        let b: u64 = trial_rng(7, 0, 1).random();
        let c: u64 = trial_rng(7, 1, 0).random();
        let d: u64 = trial_rng(8, 0, 0).random();
        assert!(a != b && a != c && a != d);
        assert_eq!(a, trial_rng(7, 0, 0).random::<u64>());
    }

    fn small_config() -> SimConfig {
        let code = CodeSpec::construct(64, 32, 0.5).unwrap();
        let mut cfg = SimConfig::new(code, DecoderKernel::min_sum(), vec![0.0, 1.0, 2.0]);
        cfg.max_trials = 3000;
        cfg.min_errors = 50;
        cfg.seed = 11;
        cfg
    }

    #[test]
    fn all_frozen_code_never_fails() {
        let code = CodeSpec::new(FrozenMask::from_bits(vec![0; 16]).unwrap());
        let mut cfg = SimConfig::new(code, DecoderKernel::min_sum(), vec![-5.0, 0.0, 5.0]);
        cfg.max_trials = 100;
        let curve = run(&cfg, Some(1)).unwrap();
        for p in &curve.points {
            assert_eq!((p.frame_errors, p.fer, p.ber), (0, 0.0, 0.0));
        }
    }

    #[test]
    fn deterministic_across_job_counts() {
        let cfg = small_config();
        let one = run(&cfg, Some(1)).unwrap();
        let three = run(&cfg, Some(3)).unwrap();
        let again = run(&cfg, Some(1)).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.to_csv(), again.to_csv());
    }

    #[test]
    fn curve_invariants() {
        let mut cfg = small_config();
        cfg.kernel = DecoderKernel::fixed(QFormat::new(5, 2.0).unwrap());
        let curve = run(&cfg, None).unwrap();
        for p in &curve.points {
            assert!(p.ber <= p.fer);
            assert!((0.0..=1.0).contains(&p.fer));
            assert_eq!(p.fer, p.frame_errors as f64 / p.trials as f64);
            assert!(p.frame_errors >= cfg.min_errors || p.trials == cfg.max_trials);
        }
    }

    #[test]
    fn confidence_shrinks_with_trials() {
        let c = |trials| {
            FerPoint::from_counts(
                0.0,
                8,
                Counts {
                    trials,
                    frame_errors: trials / 10,
                    bit_errors: trials / 10,
                },
            )
            .ci95
        };
        assert_relative_eq!(c(1000) / c(4000), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn huge_snr_is_error_free() {
        let mut cfg = small_config();
        cfg.snr_db = vec![20.0];
        cfg.max_trials = 500;
        let p = run(&cfg, Some(2)).unwrap().points[0];
        assert_eq!((p.trials, p.frame_errors), (500, 0));
    }

    #[test]
    fn csv_format() {
        let mut cfg = small_config();
        cfg.snr_db = vec![1.5];
        cfg.max_trials = 300;
        let csv = run(&cfg, Some(1)).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), FerCurve::CSV_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[0], "1.5");
        assert!(lines.next().is_none());
    }

    #[test]
    fn snr_ranges() {
        assert_eq!(parse_snr_range("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_snr_range("10:10:1").unwrap(), vec![10.0]);
        assert_eq!(parse_snr_range("3").unwrap(), vec![3.0]);
        let r = parse_snr_range("0:1:0.1").unwrap();
        assert_eq!(r.len(), 11);
        assert!(parse_snr_range("2:1:1").is_err());
        assert!(parse_snr_range("1:2:0").is_err());
        assert!(parse_snr_range("a:b").is_err());
    }

    #[test]
    fn decoded_frames_match_encoder() {
        let code = CodeSpec::construct(32, 16, 0.5).unwrap();
        let chan = AwgnChannel::new(40.0, code.rate()).unwrap();
        let mut rng = trial_rng(0, 0, 0);
        let data = BitVec::from_bits((0..16).map(|_| rng.random_range(0..2)).collect()).unwrap();
        let u = code.mask.embed(&data).unwrap();
        let l = channel_llrs(&encode(&u).unwrap(), &chan, &mut rng);
        let got = crate::decoder::decode(&l, &code.mask, &DecoderKernel::default()).unwrap();
        assert_eq!(got, u);
    }
}
