//! `polar-comb` command-line tool.

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use polar_comb::channel::{parse_snr_range, run, FerCurve, SimConfig};
use polar_comb::hw::{analyze, AnalysisInputs, GateDelays};
use polar_comb::hybrid::{latency_gain, HybridConfig, DEFAULT_COMB_THROUGHPUT};
use polar_comb::llr::MinSumFloat;
use polar_comb::pipeline::{PipelineDecoder, PipelineTimingModel};
use polar_comb::{
    construct_frozen_mask, decode, encode, extract_data, ArithmeticKind, BitVec, CodeSpec,
    DecisionMode, DecoderKernel, FrozenMask, QFormat,
};

#[derive(Parser, Debug)]
#[command(name = "polar-comb", version, about = "Polar code SC decoding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a frozen mask by Bhattacharyya ranking.
    Construct(ConstructArgs),
    /// Encode frames of data bits read from stdin.
    Encode(EncodeArgs),
    /// Decode frames of channel LLRs read from stdin.
    Decode(DecodeArgs),
    /// Monte Carlo FER/BER simulation over BPSK/AWGN.
    Simulate(SimulateArgs),
    /// Pipelined decoder throughput and schedule.
    Pipeline(PipelineArgs),
    /// Hybrid-logic decoder latency gain.
    Hybrid(HybridArgs),
    /// Complexity, delay and metric analysis.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Erasure probability of the design channel.
    #[arg(long, default_value_t = 0.5)]
    design_erasure: f64,
    /// Mask file to write; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    mask: PathBuf,
    /// Emit noiseless LLRs of this magnitude instead of codeword bits.
    #[arg(long)]
    llr: Option<f64>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Fixed-point width; 0 selects floating point.
    #[arg(long, default_value_t = 0)]
    qbits: u8,
    /// Quantizer scale (fixed-point LLR units per channel LLR unit).
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Exact f instead of min-sum (floating point only).
    #[arg(long, conflicts_with = "qbits")]
    exact: bool,
    /// Decide odd bits from g instead of the magnitude comparison.
    #[arg(long)]
    plain: bool,
}

impl KernelArgs {
    fn kernel(&self) -> Result<DecoderKernel> {
        let arithmetic = match (self.qbits, self.exact) {
            (0, true) => ArithmeticKind::Exact,
            (0, false) => ArithmeticKind::MinSum,
            (q, false) => ArithmeticKind::Fixed(QFormat::new(q, self.scale)?),
            (_, true) => bail!("--exact requires floating point (--qbits 0)"),
        };
        let mode = if self.plain {
            DecisionMode::Plain
        } else {
            DecisionMode::Shortcut
        };
        Ok(DecoderKernel::new(arithmetic, mode))
    }
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Print all N decisions instead of the K data bits.
    #[arg(long)]
    full: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Eb/N0 grid in dB as start:stop:step.
    #[arg(long)]
    snr: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_trials: u64,
    #[arg(long, default_value_t = 200)]
    min_errors: u64,
    /// CSV output file; the CSV goes to stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "POLAR_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    n: usize,
    /// Combinational delay of the unpipelined decoder in seconds.
    #[arg(long)]
    comb_delay: f64,
    #[arg(long, default_value_t = 1)]
    stages: u32,
    /// Also print the cycle schedule for this many back-to-back codewords.
    #[arg(long)]
    schedule: Option<usize>,
}

#[derive(Args, Debug)]
struct HybridArgs {
    #[arg(long)]
    n: usize,
    /// Component length; sweeps the tabulated lengths if absent.
    #[arg(long)]
    nprime: Option<usize>,
    #[arg(long, default_value_t = 64)]
    p: usize,
    /// Synchronous clock frequency in Hz.
    #[arg(long)]
    fc: f64,
    /// Combinational throughput of the component decoder in b/s.
    #[arg(long, conflicts_with = "comb_delay")]
    comb_tp: Option<f64>,
    /// Combinational delay of the component decoder in seconds.
    #[arg(long)]
    comb_delay: Option<f64>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    delta_c: f64,
    #[arg(long, default_value_t = 1.0)]
    delta_m: f64,
    #[arg(long, default_value_t = 1.0)]
    delta_x: f64,
    #[arg(long, default_value_t = 1.0)]
    delta_a: f64,
    #[arg(long, default_value_t = 0.0)]
    t_n: f64,
    /// Decoding delay in seconds used for the metrics instead of the model delay.
    #[arg(long, conflicts_with = "freq")]
    delay: Option<f64>,
    /// Clock frequency in Hz (one codeword per cycle).
    #[arg(long)]
    freq: Option<f64>,
    /// Power in watts.
    #[arg(long)]
    power: Option<f64>,
    /// Area in square metres.
    #[arg(long)]
    area: Option<f64>,
    /// Switching activity for the dynamic power estimate.
    #[arg(long, requires_all = ["cap", "vdd", "fclk"])]
    alpha: Option<f64>,
    /// Switched capacitance in farads.
    #[arg(long)]
    cap: Option<f64>,
    /// Supply voltage in volts.
    #[arg(long)]
    vdd: Option<f64>,
    /// Clock frequency for the dynamic power estimate in Hz.
    #[arg(long)]
    fclk: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cmd {
        Command::Construct(a) => construct_cmd(a, &mut out),
        Command::Encode(a) => encode_cmd(a, io::stdin().lock(), &mut out),
        Command::Decode(a) => decode_cmd(a, io::stdin().lock(), &mut out),
        Command::Simulate(a) => simulate_cmd(a, &mut out),
        Command::Pipeline(a) => pipeline_cmd(a, &mut out),
        Command::Hybrid(a) => hybrid_cmd(a, &mut out),
        Command::Analyze(a) => analyze_cmd(a, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn read_mask(path: &Path) -> Result<FrozenMask> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading mask {}", path.display()))?;
    FrozenMask::parse_file(&text).with_context(|| format!("parsing mask {}", path.display()))
}

fn construct_cmd(a: ConstructArgs, out: &mut impl Write) -> Result<()> {
    let mask = construct_frozen_mask(a.n, a.k, a.design_erasure)?;
    let summary = format!("N={} K={} rate={}", mask.n(), mask.k(), mask.rate());
    match a.out {
        Some(path) => {
            fs::write(&path, mask.to_file_string())
                .with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "{summary}")?;
        }
        None => {
            write!(out, "{}", mask.to_file_string())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Non-empty lines of stdin, one frame each.
fn frames(input: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| Ok((i + 1, l?)))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn encode_cmd(a: EncodeArgs, input: impl BufRead, out: &mut impl Write) -> Result<()> {
    let mask = read_mask(&a.mask)?;
    if let Some(m) = a.llr {
        if !(m.is_finite() && m > 0.0) {
            bail!("--llr magnitude must be > 0, got {m}");
        }
    }
    for frame in frames(input) {
        let (line_no, line) = frame?;
        let bits = line
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => bail!("line {line_no}: {other:?} is not a bit"),
            })
            .collect::<Result<Vec<u8>>>()?;
        let data = BitVec::from_bits(bits)?;
        let u = mask
            .embed(&data)
            .with_context(|| format!("line {line_no}"))?;
        let x = encode(&u)?;
        match a.llr {
            None => writeln!(out, "{x}")?,
            Some(m) => {
                let llrs: Vec<String> = x
                    .iter()
                    .map(|b| format!("{}", if b == 0 { m } else { -m }))
                    .collect();
                writeln!(out, "{}", llrs.join(" "))?;
            }
        }
    }
    Ok(())
}

fn decode_cmd(a: DecodeArgs, input: impl BufRead, out: &mut impl Write) -> Result<()> {
    let mask = read_mask(&a.mask)?;
    let kernel = a.kernel.kernel()?;
    for frame in frames(input) {
        let (line_no, line) = frame?;
        let llrs = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .with_context(|| format!("line {line_no}: bad LLR {t:?}"))
            })
            .collect::<Result<Vec<f64>>>()?;
        let u = decode(&llrs, &mask, &kernel).with_context(|| format!("line {line_no}"))?;
        if a.full {
            writeln!(out, "{u}")?;
        } else {
            writeln!(out, "{}", extract_data(&u, &mask)?)?;
        }
    }
    Ok(())
}

fn simulate_cmd(a: SimulateArgs, out: &mut impl Write) -> Result<()> {
    let mask = read_mask(&a.mask)?;
    let snr = parse_snr_range(&a.snr)?;
    let mut cfg = SimConfig::new(CodeSpec::new(mask), a.kernel.kernel()?, snr);
    cfg.seed = a.seed;
    cfg.max_trials = a.max_trials;
    cfg.min_errors = a.min_errors;
    let curve = run(&cfg, a.jobs)?;
    match a.out {
        Some(path) => {
            let file =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            curve.write_csv(BufWriter::new(file))?;
            print_curve(&curve, out)?;
        }
        None => curve.write_csv(out)?,
    }
    Ok(())
}

fn print_curve(curve: &FerCurve, out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "{:>8} {:>10} {:>8} {:>12} {:>12}",
        "Eb/N0", "trials", "errors", "FER", "BER"
    )?;
    for p in &curve.points {
        writeln!(
            out,
            "{:>8.2} {:>10} {:>8} {:>12.4e} {:>12.4e}",
            p.snr_db, p.trials, p.frame_errors, p.fer, p.ber
        )?;
    }
    Ok(())
}

fn pipeline_cmd(a: PipelineArgs, out: &mut impl Write) -> Result<()> {
    let base = PipelineTimingModel::new(a.n, a.comb_delay, 0)?;
    let model = PipelineTimingModel::new(a.n, a.comb_delay, a.stages)?;
    writeln!(
        out,
        "N={} stages={} segments={}",
        a.n,
        a.stages,
        1u64 << a.stages
    )?;
    writeln!(out, "clock period      {:.4e} s", model.period())?;
    writeln!(out, "latency           {} cycles", 1u64 << a.stages)?;
    writeln!(
        out,
        "throughput        {:.4} Gb/s",
        model.throughput() / 1e9
    )?;
    writeln!(out, "combinational     {:.4} Gb/s", base.throughput() / 1e9)?;
    if let Some(m) = a.schedule {
        let mask = FrozenMask::from_bits(vec![1; a.n])?;
        let mut p = PipelineDecoder::new(MinSumFloat, DecisionMode::Shortcut, mask, a.stages)?;
        let segments = p.segments();
        writeln!(out)?;
        write!(out, "{:>6} {:>6}", "cycle", "input")?;
        for s in 0..segments {
            write!(out, " {:>6}", format!("seg{s}"))?;
        }
        writeln!(out, " {:>6}", "output")?;
        let mut fed = 0;
        loop {
            let input = (fed < m).then(|| vec![1.0; a.n]);
            let label = if input.is_some() {
                format!("l{}", fed + 1)
            } else {
                String::new()
            };
            fed += input.is_some() as usize;
            let done = p.step(input)?;
            let mut cells = vec![String::new(); segments];
            for e in p.events() {
                cells[e.segment] = format!("u{}", e.id + 1);
            }
            write!(out, "{:>6} {:>6}", p.cycle(), label)?;
            for c in &cells {
                write!(out, " {c:>6}")?;
            }
            let done = done.map(|o| format!("u{}", o.id + 1)).unwrap_or_default();
            writeln!(out, " {done:>6}")?;
            if fed == m && p.in_flight() == 0 {
                break;
            }
        }
    }
    Ok(())
}

fn hybrid_cmd(a: HybridArgs, out: &mut impl Write) -> Result<()> {
    let rows: Vec<(usize, f64)> = match a.nprime {
        Some(np) => {
            let d = match (a.comb_tp, a.comb_delay) {
                (Some(tp), None) => {
                    if !(tp.is_finite() && tp > 0.0) {
                        bail!("--comb-tp must be > 0");
                    }
                    np as f64 / tp
                }
                (None, Some(d)) => d,
                (None, None) => polar_comb::hybrid::default_comb_delay(np).with_context(|| {
                    format!("no tabulated combinational throughput for N'={np}; pass --comb-tp or --comb-delay")
                })?,
                (Some(_), Some(_)) => unreachable!("clap rejects both"),
            };
            vec![(np, d)]
        }
        None => {
            if a.comb_tp.is_some() || a.comb_delay.is_some() {
                bail!("--comb-tp/--comb-delay need --nprime");
            }
            DEFAULT_COMB_THROUGHPUT
                .iter()
                .filter(|(np, _)| *np <= a.n)
                .map(|&(np, tp)| (np, np as f64 / tp))
                .collect()
        }
    };
    writeln!(
        out,
        "{:>6} {:>6} {:>4} {:>8} {:>6} {:>6} {:>8} {:>10} {:>10}",
        "N", "N'", "P", "L_S", "wait", "L_r", "gain", "TP_S Mb/s", "TP_HL Mb/s"
    )?;
    for (np, d) in rows {
        let cfg = HybridConfig {
            n: a.n,
            n_prime: np,
            p: a.p,
            f_c: a.fc,
            d_nprime: d,
        };
        let r = latency_gain(&cfg)?;
        writeln!(
            out,
            "{:>6} {:>6} {:>4} {:>8} {:>6} {:>6} {:>8.2} {:>10.1} {:>10.1}",
            a.n,
            np,
            a.p,
            r.l_s,
            r.wait_cycles,
            r.l_r,
            r.gain,
            r.tp_s / 1e6,
            r.tp_hl / 1e6
        )?;
    }
    Ok(())
}

fn analyze_cmd(a: AnalyzeArgs, out: &mut impl Write) -> Result<()> {
    let delays = GateDelays::new(a.delta_c, a.delta_m, a.delta_x, a.delta_a, a.t_n)?;
    let delay_s = match (a.delay, a.freq) {
        (Some(d), _) => Some(d),
        (None, Some(f)) => {
            if !(f.is_finite() && f > 0.0) {
                bail!("--freq must be > 0");
            }
            Some(1.0 / f)
        }
        (None, None) => None,
    };
    let switching = match (a.alpha, a.cap, a.vdd, a.fclk) {
        (Some(al), Some(c), Some(v), Some(f)) => Some((al, c, v, f)),
        _ => None,
    };
    let inputs = AnalysisInputs {
        delay_s,
        power_w: a.power,
        area_m2: a.area,
        switching,
    };
    let r = analyze(a.n, &delays, &inputs)?;
    let c = r.complexity;
    writeln!(out, "N                      {}", r.n)?;
    writeln!(out, "comparators c_N        {}", c.comparators)?;
    writeln!(out, "decision comps s_N     {}", c.decision_comparators)?;
    writeln!(out, "adders r_N             {}", c.adders)?;
    writeln!(out, "total blocks           {}", c.total)?;
    if let Some(d) = r.model_delay {
        writeln!(out, "model delay D_N        {}", d.seconds)?;
        if d.warning.is_some() {
            writeln!(out, "warning: delta_c < 3 delta_x + delta_a, the base-decoder delay model does not apply")?;
        }
    }
    if let Some(m) = r.metrics {
        writeln!(out, "throughput             {:.4} Gb/s", m.throughput / 1e9)?;
        writeln!(
            out,
            "energy per bit         {:.4} pJ/b",
            m.energy_per_bit * 1e12
        )?;
        writeln!(
            out,
            "hardware efficiency    {:.1} Mb/s/mm^2",
            m.hw_efficiency / 1e12
        )?;
    } else if a.power.is_some() || a.area.is_some() {
        bail!("metrics need --power, --area and a delay (--delay, --freq or N >= 8)");
    }
    if let Some(p) = r.dynamic_power {
        writeln!(out, "dynamic power          {:.4e} W", p)?;
    }
    Ok(())
}
