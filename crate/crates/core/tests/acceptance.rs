//! Acceptance suite. Each test prints one `PASS`/`FAIL` line.

use std::sync::OnceLock;

use polar_comb::channel::{run, FerCurve, SimConfig};
use polar_comb::decoder::{decode_with, structural_counts};
use polar_comb::hw::{complexity, delay_closed, delay_recursive, metrics, GateDelays};
use polar_comb::hybrid::{hybrid_decode, latency_gain, HybridConfig};
use polar_comb::llr::{f_minsum, g_fn, sign_bit, FixedMinSum, MinSumFloat, QLlr};
use polar_comb::pipeline::PipelineDecoder;
use polar_comb::{
    decode, encode, BitVec, CodeSpec, DecisionMode, DecoderKernel, FrozenMask, QFormat,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, what: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {verdict} {what}: {detail}");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn random_mask(rng: &mut impl Rng, n: usize) -> FrozenMask {
    FrozenMask::from_bits((0..n).map(|_| rng.random_range(0..2u8)).collect()).unwrap()
}

#[test]
fn criterion_01_hybrid_gain_rows() {
    // (N, f_c, N', combinational TP, reference g, reference TP_HL in Mb/s)
    let rows = [
        (1024, 173e6, 16, 1.05e9, 5.90, 501.0),
        (1024, 173e6, 32, 0.88e9, 6.50, 552.0),
        (1024, 173e6, 64, 0.85e9, 7.22, 613.0),
        (2048, 171e6, 16, 1.05e9, 5.70, 473.0),
        (2048, 171e6, 32, 0.88e9, 6.23, 517.0),
        (2048, 171e6, 64, 0.85e9, 7.27, 603.0),
    ];
    let mut worst = 0.0f64;
    for (n, f_c, np, tp, g, tp_hl) in rows {
        let cfg = HybridConfig::from_comb_throughput(n, np, 64, f_c, tp).unwrap();
        let r = latency_gain(&cfg).unwrap();
        worst = worst
            .max(rel_err(r.gain, g))
            .max(rel_err(r.tp_hl / 1e6, tp_hl));
    }
    report(
        1,
        "hybrid latency gain rows",
        worst <= 0.015,
        &format!("worst relative error {:.3}% (limit 1.5%)", worst * 100.0),
    );
}

#[test]
fn criterion_02_asic_metrics() {
    // (N, f [Hz], power [W], area [m^2], TP [Gb/s], EPB [pJ/b], HE [Mb/s/mm^2])
    let cols = [
        (64, 45.5e6, 99.8e-3, 0.153e-6, 2.92, 34.1, 19084.0),
        (128, 22.2e6, 138.8e-3, 0.338e-6, 2.83, 49.0, 8372.0),
        (256, 11.0e6, 158.7e-3, 0.759e-6, 2.81, 56.4, 3700.0),
        (512, 5.2e6, 181.4e-3, 1.514e-6, 2.69, 67.4, 1776.0),
        (1024, 2.5e6, 190.7e-3, 3.213e-6, 2.56, 74.5, 796.0),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (n, f, p, a, tp, epb, he) in cols {
        let m = metrics(n, 1.0 / f, p, a).unwrap();
        let err = rel_err(m.throughput / 1e9, tp)
            .max(rel_err(m.energy_per_bit * 1e12, epb))
            .max(rel_err(m.hw_efficiency / 1e12, he));
        let limit = if n == 1024 { 0.01 } else { 0.015 };
        ok &= err <= limit;
        details.push(format!("N={n} {:.2}%", err * 100.0));
    }
    report(2, "ASIC metric columns", ok, &details.join(", "));
}

#[test]
fn criterion_03_delay_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = GateDelays::new(
            rng.random_range(0.0..1e-9),
            rng.random_range(0.0..1e-9),
            rng.random_range(0.0..1e-9),
            rng.random_range(0.0..1e-9),
            0.0,
        )
        .unwrap();
        for m in 3..=16 {
            let n = 1usize << m;
            let a = delay_recursive(n, &d).unwrap().seconds;
            let b = delay_closed(n, &d).unwrap().seconds;
            if a != 0.0 {
                worst = worst.max(rel_err(b, a));
            }
        }
    }
    report(
        3,
        "delay recursion equals closed form",
        worst <= 1e-12,
        &format!("worst relative error {worst:.2e} over 1000 delay vectors, N=2^3..2^16"),
    );
}

#[test]
fn criterion_04_complexity_anchors() {
    let c4 = complexity(4).unwrap();
    let c1024 = complexity(1024).unwrap();
    let mut ok = (c4.comparators, c4.decision_comparators, c4.adders, c4.total) == (2, 2, 4, 8);
    ok &= c1024.total == 14336 && 1024 * (3 * 10 - 2) / 2 == 14336;
    for n in [4usize, 8, 16, 32] {
        let walk = structural_counts(n).unwrap();
        let c = complexity(n).unwrap();
        ok &= walk.f_units == c.comparators
            && walk.decision_comparators == c.decision_comparators
            && 2 * walk.g_units == c.adders;
    }
    report(
        4,
        "complexity anchors",
        ok,
        &format!(
            "N=4 -> {:?}, N=1024 total {}",
            (c4.comparators, c4.decision_comparators, c4.adders, c4.total),
            c1024.total
        ),
    );
}

/// The four unrolled length-4 expressions. Odd bits use either the sign of
/// `g` or the magnitude-comparison rule.
fn n4_oracle(l: [f64; 4], a: [u8; 4], shortcut: bool) -> [u8; 4] {
    let odd = |l1: f64, l2: f64, u_even: u8, a_odd: u8| -> u8 {
        if a_odd == 0 {
            0
        } else if !shortcut {
            sign_bit(g_fn(l1, l2, u_even))
        } else if l2.abs() >= l1.abs() {
            sign_bit(l2)
        } else {
            sign_bit(l1) ^ u_even
        }
    };
    let l0p = f_minsum(l[0], l[1]);
    let l1p = f_minsum(l[2], l[3]);
    let u0 = sign_bit(f_minsum(l0p, l1p)) & a[0];
    let u1 = odd(l0p, l1p, u0, a[1]);
    let l0pp = g_fn(l[0], l[1], u0 ^ u1);
    let l1pp = g_fn(l[2], l[3], u1);
    let u2 = sign_bit(f_minsum(l0pp, l1pp)) & a[2];
    let u3 = odd(l0pp, l1pp, u2, a[3]);
    [u0, u1, u2, u3]
}

#[test]
fn criterion_05_length4_oracle() {
    let fixed = FixedMinSum::new(QFormat::new(5, 1.0).unwrap());
    let mut cases = 0;
    let mut mismatches = 0;
    for mask_bits in 0..16u8 {
        let a = [
            mask_bits & 1,
            (mask_bits >> 1) & 1,
            (mask_bits >> 2) & 1,
            (mask_bits >> 3) & 1,
        ];
        let mask = FrozenMask::from_bits(a.to_vec()).unwrap();
        for idx in 0..9usize.pow(4) {
            let l: [f64; 4] =
                std::array::from_fn(|k| ((idx / 9usize.pow(k as u32)) % 9) as f64 - 4.0);
            cases += 1;
            let want = n4_oracle(l, a, true);
            let float = decode_with(MinSumFloat, DecisionMode::Shortcut, &l, &mask).unwrap();
            let q: Vec<QLlr> = l.iter().map(|&x| QLlr::from_signed(x as i32, 5)).collect();
            let fixed_out = decode_with(fixed, DecisionMode::Shortcut, &q, &mask).unwrap();
            let plain = decode_with(MinSumFloat, DecisionMode::Plain, &l, &mask).unwrap();
            if float.as_slice() != want
                || fixed_out.as_slice() != want
                || plain.as_slice() != n4_oracle(l, a, false)
            {
                mismatches += 1;
            }
        }
    }
    report(
        5,
        "length-4 closed-form oracle",
        mismatches == 0 && cases == 6561 * 16,
        &format!("{mismatches} mismatches over {cases} cases"),
    );
}

#[test]
fn criterion_06_noiseless_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let q5 = DecoderKernel::fixed(QFormat::new(5, 1.0).unwrap());
    let float = DecoderKernel::min_sum();
    let mut failures = 0;
    let instances = 10_000;
    for _ in 0..instances {
        let n = 1usize << rng.random_range(1..=10u32);
        let k = rng.random_range(0..=n);
        let mask = polar_comb::construct_frozen_mask(n, k, rng.random_range(0.05..0.95)).unwrap();
        let data = BitVec::from_bits((0..k).map(|_| rng.random_range(0..2u8)).collect()).unwrap();
        let u = mask.embed(&data).unwrap();
        let x = encode(&u).unwrap();
        let m = rng.random_range(1..=15) as f64;
        let llrs: Vec<f64> = x.iter().map(|b| if b == 0 { m } else { -m }).collect();
        for kernel in [&float, &q5] {
            if decode(&llrs, &mask, kernel).unwrap() != u {
                failures += 1;
            }
        }
    }
    report(
        6,
        "noiseless encode/decode roundtrip",
        failures == 0,
        &format!("{failures} failures over {instances} instances x 2 arithmetics"),
    );
}

#[test]
fn criterion_07_hybrid_transparency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let kernels = [
        DecoderKernel::min_sum(),
        DecoderKernel::fixed(QFormat::new(5, 1.0).unwrap()),
    ];
    let mut checks = 0;
    let mut failures = 0;
    for i in 0..1000 {
        let n = 1usize << rng.random_range(1..=8u32);
        let mask = random_mask(&mut rng, n);
        let llrs: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let kernel = &kernels[i % 2];
        let reference = decode(&llrs, &mask, kernel).unwrap();
        let mut np = 2;
        while np <= n {
            checks += 1;
            if hybrid_decode(&llrs, &mask, np, kernel).unwrap() != reference {
                failures += 1;
            }
            np *= 2;
        }
    }
    report(
        7,
        "hybrid decoding transparency",
        failures == 0,
        &format!("{failures} failures over {checks} (instance, N') pairs"),
    );
}

#[test]
fn criterion_08_pipeline_schedule() {
    // Six back-to-back codewords through a single-stage pipeline.
    let mask = FrozenMask::from_bits(vec![0, 0, 0, 1, 0, 1, 1, 1]).unwrap();
    let mut p = PipelineDecoder::new(MinSumFloat, DecisionMode::Shortcut, mask, 1).unwrap();
    let mut rows = (Vec::new(), Vec::new(), Vec::new());
    for cycle in 1..=8u64 {
        let out = p.step((cycle <= 6).then(|| vec![cycle as f64; 8])).unwrap();
        for e in p.events() {
            let row = if e.segment == 0 {
                &mut rows.0
            } else {
                &mut rows.1
            };
            row.push((e.id + 1, cycle));
        }
        if let Some(o) = out {
            rows.2.push((o.id + 1, o.output_cycle));
        }
    }
    let shifted = |d: u64| (1..=6u64).map(|i| (i, i + d)).collect::<Vec<_>>();
    let schedule_ok = rows.0 == shifted(1) && rows.1 == shifted(2) && rows.2 == shifted(2);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut streams = 0;
    let mut stream_failures = 0;
    for n in [4usize, 8, 16] {
        for stages in [1u32, 2] {
            if (n >> stages) < 2 {
                continue;
            }
            for _ in 0..50 {
                let mask = random_mask(&mut rng, n);
                let m = rng.random_range(1..=20);
                let mut inputs = Vec::new();
                for _ in 0..m {
                    while rng.random_bool(0.3) {
                        inputs.push(None);
                    }
                    inputs.push(Some(
                        (0..n)
                            .map(|_| rng.random_range(-8.0..8.0))
                            .collect::<Vec<f64>>(),
                    ));
                }
                let expected: Vec<BitVec> = inputs
                    .iter()
                    .flatten()
                    .map(|l| decode_with(MinSumFloat, DecisionMode::Shortcut, l, &mask).unwrap())
                    .collect();
                let mut p = PipelineDecoder::new(MinSumFloat, DecisionMode::Shortcut, mask, stages)
                    .unwrap();
                let mut got = Vec::new();
                for inp in inputs {
                    got.extend(p.step(inp).unwrap());
                }
                while p.in_flight() > 0 {
                    got.extend(p.step(None).unwrap());
                }
                streams += 1;
                let bits: Vec<BitVec> = got.iter().map(|o| o.bits.clone()).collect();
                let latency_ok = got
                    .iter()
                    .all(|o| o.output_cycle - o.input_cycle == 1 << stages);
                if bits != expected || !latency_ok {
                    stream_failures += 1;
                }
            }
        }
    }
    report(
        8,
        "pipeline schedule and stream equivalence",
        schedule_ok && stream_failures == 0,
        &format!(
            "schedule {}, {stream_failures} failing streams of {streams}",
            if schedule_ok { "matches" } else { "differs" }
        ),
    );
}

const HALF_RATE_GRID: [f64; 4] = [2.0, 2.5, 3.0, 3.5];
const MIN_ERRORS: u64 = 200;
const MAX_TRIALS: u64 = 4_000_000;

fn simulate(
    n: usize,
    k: usize,
    design_erasure: f64,
    kernel: DecoderKernel,
    snr: &[f64],
    seed: u64,
) -> FerCurve {
    let code = CodeSpec::construct(n, k, design_erasure).unwrap();
    let mut cfg = SimConfig::new(code, kernel, snr.to_vec());
    cfg.min_errors = MIN_ERRORS;
    cfg.max_trials = MAX_TRIALS;
    cfg.seed = seed;
    run(&cfg, None).unwrap()
}

/// Float min-sum curve of the (1024, 512) code, shared by criteria 9 and 10.
fn half_rate_float() -> &'static FerCurve {
    static CURVE: OnceLock<FerCurve> = OnceLock::new();
    CURVE.get_or_init(|| {
        simulate(
            1024,
            512,
            0.32,
            DecoderKernel::min_sum(),
            &HALF_RATE_GRID,
            1024,
        )
    })
}

#[test]
fn criterion_09_quantization_loss() {
    let float = half_rate_float();
    let points: Vec<_> = float
        .points
        .iter()
        .filter(|p| (1e-3..=1e-1).contains(&p.fer) && p.frame_errors >= MIN_ERRORS)
        .copied()
        .collect();
    let snr: Vec<f64> = points.iter().map(|p| p.snr_db).collect();
    let q5 = simulate(
        1024,
        512,
        0.32,
        DecoderKernel::fixed(QFormat::new(5, 1.0).unwrap()),
        &snr,
        55,
    );
    let q4 = simulate(
        1024,
        512,
        0.32,
        DecoderKernel::fixed(QFormat::new(4, 1.0).unwrap()),
        &snr,
        44,
    );
    let mut ok = !points.is_empty();
    let mut details = Vec::new();
    for ((f, a), b) in points.iter().zip(&q5.points).zip(&q4.points) {
        let r5 = a.fer / f.fer;
        ok &= (0.5..=2.0).contains(&r5) && a.frame_errors >= MIN_ERRORS;
        details.push(format!(
            "{} dB: float {:.2e} Q5 x{:.2} Q4 x{:.2}",
            f.snr_db,
            f.fer,
            r5,
            b.fer / f.fer
        ));
    }
    if let (Some(f), Some(a), Some(b)) = (points.last(), q5.points.last(), q4.points.last()) {
        ok &= b.fer / f.fer > a.fer / f.fer;
    }
    report(9, "5-bit quantization loss", ok, &details.join("; "));
}

fn waterfall_ok(curve: &FerCurve) -> (bool, String) {
    let enough = curve.points.iter().all(|p| p.frame_errors >= MIN_ERRORS);
    let decreasing = curve.points.windows(2).all(|w| w[1].fer < w[0].fer);
    let lowest = curve.points.last().map_or(1.0, |p| p.fer);
    let fers: Vec<String> = curve
        .points
        .iter()
        .map(|p| format!("{}:{:.2e}", p.snr_db, p.fer))
        .collect();
    (enough && decreasing && lowest <= 2e-4, fers.join(" "))
}

#[test]
fn criterion_10_waterfall() {
    let cases = [
        (
            "N=256 R=1/2",
            simulate(
                256,
                128,
                0.32,
                DecoderKernel::min_sum(),
                &[2.0, 2.5, 3.0, 3.5, 4.0, 4.5],
                256,
            ),
        ),
        ("N=1024 R=1/2", half_rate_float().clone()),
        (
            "N=1024 R=5/6",
            simulate(
                1024,
                853,
                0.1,
                DecoderKernel::min_sum(),
                &[3.5, 4.0, 4.5, 5.0, 5.25],
                1056,
            ),
        ),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, curve) in &cases {
        let (good, fers) = waterfall_ok(curve);
        ok &= good;
        details.push(format!("{name} [{fers}]"));
    }
    report(10, "FER waterfall to 1e-4", ok, &details.join("; "));
}
