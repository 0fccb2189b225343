//! `hqsim` command-line driver.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage, 3 IO or parse
//! failure, 4 resource cap.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::bits::{BitString, BitStringError};
use crate::circuit::{Circuit, CircuitError, GateDensity, GeneratorSpec, MAX_K};
use crate::engine::{
    EngineConfig, EngineError, EngineReport, Method, QuickCheckMode, Simulator, HARD_MAX_SLICED,
};
use crate::oracle::{self, OracleError};
use crate::phasepoly::extract;
use crate::rng::SplitMix64;
use crate::sampler::{Sampler, SamplerError};

/// Environment variable overriding the sliced-register cap.
pub const MAX_MR_ENV: &str = "HQSIM_MAX_MR";

/// Engine-vs-oracle tolerance used by `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: CircuitError,
    },
    #[error("verification failed at y = {y}: engine {engine}, oracle {oracle}")]
    Mismatch { y: String, engine: f64, oracle: f64 },
    #[error("polynomial cross-check failed: {0}")]
    PolynomialMismatch(String),
    #[error("{0}")]
    Resource(String),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Mismatch { .. } | Self::PolynomialMismatch(_) => 1,
            Self::Usage(_) => 2,
            Self::Io { .. } | Self::Parse { .. } | Self::Output(_) => 3,
            Self::Resource(_) => 4,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::ResourceLimit { .. } => Self::Resource(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Engine {
                source: EngineError::ResourceLimit { .. },
                ..
            } => Self::Resource(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<BitStringError> for CliError {
    fn from(e: BitStringError) -> Self {
        Self::Usage(format!("bad outcome string: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hqsim",
    version,
    about = "Exact amplitudes and samples for hypercube IQP circuits"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = QuickCheckArg::Auto)]
    quickcheck: QuickCheckArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuickCheckArg {
    Auto,
    On,
    Off,
}

impl From<QuickCheckArg> for QuickCheckMode {
    fn from(a: QuickCheckArg) -> Self {
        match a {
            QuickCheckArg::Auto => Self::Auto,
            QuickCheckArg::On => Self::On,
            QuickCheckArg::Off => Self::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random circuit
    Gen(GenArgs),
    /// Compute one amplitude
    Amp(AmpArgs),
    /// Draw samples from the output distribution
    Sample(SampleArgs),
    /// Compare the engine against the dense simulator
    Verify(VerifyArgs),
    /// Time random-outcome amplitudes over generated circuits
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[arg(long, default_value_t = 0.5)]
    ccz_density: f64,
    #[arg(long, default_value_t = 0.5)]
    cz_density: f64,
    #[arg(long, default_value_t = 0.5)]
    z_density: f64,
    /// Draw CZ(wire 1, wire 2) independently instead of pairing it with CCZ
    #[arg(long)]
    independent_gb_cz: bool,
}

impl DensityArgs {
    fn density(&self) -> GateDensity {
        GateDensity {
            ccz: self.ccz_density,
            cz: self.cz_density,
            z: self.z_density,
            pair_gb_cz_with_ccz: !self.independent_gb_cz,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_K as i64))]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    extra_layers: usize,
    #[command(flatten)]
    density: DensityArgs,
    /// Output path (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AmpArgs {
    circuit: PathBuf,
    /// Outcome as a 0/1 string (qubit 0 first) or 0x-prefixed hex
    #[arg(
        long,
        conflicts_with = "random_y",
        required_unless_present = "random_y"
    )]
    y: Option<String>,
    #[arg(long)]
    random_y: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SampleArgs {
    circuit: PathBuf,
    #[arg(short = 'N', long = "count", default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    circuit: PathBuf,
    /// Compare every outcome
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    all: bool,
    /// Compare this many random outcomes
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=MAX_K as i64))]
    k: u32,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Single count `N` or inclusive range `A..B`
    #[arg(long, default_value = "0")]
    extra_layers: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    density: DensityArgs,
}

/// One row of `bench` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub k: u32,
    pub n: usize,
    pub extra_layers: usize,
    pub trials: usize,
    pub mean_seconds: f64,
    pub worst_seconds: f64,
    /// Fraction of sliced patterns the quick-check did not discard.
    pub nonzero_fraction: f64,
    pub threads: usize,
}

fn parse_layer_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("--extra-layers expects N or A..B, got {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        Ok(vec![text.trim().parse().map_err(|_| bad())?])
    }
}

/// `HQSIM_MAX_MR` value, if set.
fn max_sliced_override() -> Result<Option<u32>, CliError> {
    let Some(raw) = std::env::var_os(MAX_MR_ENV) else {
        return Ok(None);
    };
    let raw = raw.to_string_lossy();
    match raw.trim().parse::<u32>() {
        Ok(v) if v <= HARD_MAX_SLICED => Ok(Some(v)),
        _ => Err(CliError::Usage(format!(
            "{MAX_MR_ENV} must be an integer in 0..={HARD_MAX_SLICED}, got {raw:?}"
        ))),
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Circuit::from_json(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn random_outcome(n: usize, rng: &mut SplitMix64) -> BitString {
    let words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
    BitString::from_words(n, &words)
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

struct Context {
    engine: EngineConfig,
    format: Format,
}

/// Parse `args` (including the program name) and run the command, writing
/// the report to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let mut engine = EngineConfig::default().with_quickcheck(cli.quickcheck.into());
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        engine.threads = t;
    }
    if let Some(cap) = max_sliced_override()? {
        engine.max_sliced = cap;
    }
    let ctx = Context {
        engine,
        format: cli.format,
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a, out),
        Command::Amp(a) => cmd_amp(&ctx, a, out),
        Command::Sample(a) => cmd_sample(&ctx, a, out),
        Command::Verify(a) => cmd_verify(&ctx, a, out),
        Command::Bench(a) => cmd_bench(&ctx, a, out),
    }
}

fn cmd_gen(ctx: &Context, a: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let c = GeneratorSpec::new(a.k, a.seed)
        .with_extra_layers(a.extra_layers)
        .with_density(a.density.density())
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let counts = c.gate_counts();
    let summary = match ctx.format {
        Format::Text => format!(
            "n={} blocks={} cnot_layers={} cnot={} ccz={} cz={} z={}\n",
            c.n(),
            c.blocks(),
            counts.cnot_layers,
            counts.cnot,
            counts.ccz,
            counts.cz,
            counts.z
        ),
        Format::Json => format!(
            "{}\n",
            json!({
                "n": c.n(), "blocks": c.blocks(), "cnot_layers": counts.cnot_layers,
                "cnot": counts.cnot, "ccz": counts.ccz, "cz": counts.cz, "z": counts.z,
            })
        ),
        Format::Csv => {
            let mut s = String::from("n,blocks,cnot_layers,cnot,ccz,cz,z\n");
            s += &csv_line(&[
                c.n().to_string(),
                c.blocks().to_string(),
                counts.cnot_layers.to_string(),
                counts.cnot.to_string(),
                counts.ccz.to_string(),
                counts.cz.to_string(),
                counts.z.to_string(),
            ]);
            s
        }
    };
    match &a.output {
        Some(path) => {
            std::fs::write(path, c.to_json_pretty()).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            out.write_all(summary.as_bytes())?;
        }
        None => {
            writeln!(out, "{}", c.to_json_pretty())?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::GrayCode => "gray-code",
        Method::QuadraticForm => "quadratic-form",
    }
}

fn surviving_fraction(r: &EngineReport) -> f64 {
    if r.total_patterns == 0 {
        0.0
    } else {
        r.evaluated as f64 / r.total_patterns as f64
    }
}

fn cmd_amp(ctx: &Context, a: AmpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(&a.circuit)?;
    let n = c.n();
    let y = match &a.y {
        Some(text) => BitString::parse_with_len(text, n)?,
        None => random_outcome(n, &mut SplitMix64::new(a.seed)),
    };
    let sim = Simulator::new(&c)?;
    let r = sim.amplitude(&y, &ctx.engine)?;
    let p = r.amplitude.probability();
    let text = match ctx.format {
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "y                 {y}");
            let _ = writeln!(s, "amplitude         {}", r.amplitude);
            let _ = writeln!(s, "decimal           {}", r.amplitude.to_f64());
            let _ = writeln!(s, "probability       {p} ({})", p.to_f64());
            let _ = writeln!(s, "method            {}", method_name(r.method));
            let _ = writeln!(s, "patterns          {}", r.total_patterns);
            let _ = writeln!(s, "discarded         {}", r.discarded_by_quickcheck);
            let _ = writeln!(s, "evaluated         {}", r.evaluated);
            let _ = writeln!(s, "nonzero_terms     {}", r.nonzero_contributions);
            let _ = writeln!(s, "nonzero_fraction  {:.6}", surviving_fraction(&r));
            let _ = writeln!(s, "quickcheck        {}", r.quickcheck_used);
            let _ = writeln!(s, "threads           {}", r.threads);
            let _ = writeln!(s, "seconds           {:.6}", r.wall_time.as_secs_f64());
            s
        }
        Format::Json => format!(
            "{}\n",
            json!({
                "y": y.to_string(),
                "amplitude": r.amplitude.to_string(),
                "decimal": r.amplitude.to_f64(),
                "probability": p.to_string(),
                "probability_decimal": p.to_f64(),
                "method": method_name(r.method),
                "total_patterns": r.total_patterns,
                "discarded_by_quickcheck": r.discarded_by_quickcheck,
                "evaluated": r.evaluated,
                "nonzero_contributions": r.nonzero_contributions,
                "nonzero_fraction": surviving_fraction(&r),
                "quickcheck_used": r.quickcheck_used,
                "threads": r.threads,
                "seconds": r.wall_time.as_secs_f64(),
            })
        ),
        Format::Csv => {
            let mut s = String::from(
                "y,amplitude,decimal,probability,method,total_patterns,discarded,evaluated,nonzero_contributions,nonzero_fraction,quickcheck_used,threads,seconds\n",
            );
            s += &csv_line(&[
                y.to_string(),
                r.amplitude.to_string(),
                r.amplitude.to_f64().to_string(),
                p.to_string(),
                method_name(r.method).into(),
                r.total_patterns.to_string(),
                r.discarded_by_quickcheck.to_string(),
                r.evaluated.to_string(),
                r.nonzero_contributions.to_string(),
                format!("{:.6}", surviving_fraction(&r)),
                r.quickcheck_used.to_string(),
                r.threads.to_string(),
                format!("{:.6}", r.wall_time.as_secs_f64()),
            ]);
            s
        }
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_sample(ctx: &Context, a: SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(&a.circuit)?;
    let sampler = Sampler::new(&c)?
        .with_engine(ctx.engine.clone().with_threads(1))
        .with_workers(ctx.engine.threads);
    let samples = sampler.sample(a.seed, a.count)?;
    let mut text = String::new();
    match ctx.format {
        Format::Text => {
            for s in &samples {
                let _ = writeln!(text, "{s}");
            }
        }
        Format::Json => {
            let list: Vec<String> = samples.iter().map(ToString::to_string).collect();
            let _ = writeln!(text, "{}", json!({ "seed": a.seed, "samples": list }));
        }
        Format::Csv => {
            text.push_str("index,sample\n");
            for (i, s) in samples.iter().enumerate() {
                let _ = writeln!(text, "{i},{s}");
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::TooLarge { .. } => CliError::Resource(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn cmd_verify(ctx: &Context, a: VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let c = load_circuit(&a.circuit)?;
    let n = c.n();
    let state = oracle::statevector(&c).map_err(oracle_error)?;

    // symbolic expansion against the extracted polynomial, in qubit labels
    let (f, _) = extract(&c);
    let extracted: std::collections::BTreeSet<Vec<usize>> = f
        .monomials()
        .into_iter()
        .map(|m| {
            let mut q: Vec<usize> = m.iter().map(|&v| f.coloring().qubit(v)).collect();
            q.sort_unstable();
            q
        })
        .collect();
    let symbolic = oracle::expand_symbolic(&c).monomials;
    if extracted != symbolic {
        let first = extracted
            .symmetric_difference(&symbolic)
            .next()
            .map(|m| format!("{m:?}"))
            .unwrap_or_default();
        return Err(CliError::PolynomialMismatch(format!(
            "{} extracted vs {} expanded monomials, first difference {first}",
            extracted.len(),
            symbolic.len()
        )));
    }

    let sim = Simulator::new(&c)?;
    let outcomes: Vec<usize> = if a.all {
        (0..1usize << n).collect()
    } else {
        let mut rng = SplitMix64::new(a.seed);
        let r = a.random.unwrap_or(0);
        (0..r).map(|_| rng.below(1u64 << n) as usize).collect()
    };
    let mut worst = 0.0f64;
    for &idx in &outcomes {
        let y = BitString::from_u128(n, idx as u128);
        let got = sim.amplitude(&y, &ctx.engine)?.amplitude.to_f64();
        let want = state.amplitude_at(idx);
        let diff = (got - want).abs();
        if diff > VERIFY_TOLERANCE {
            return Err(CliError::Mismatch {
                y: y.to_string(),
                engine: got,
                oracle: want,
            });
        }
        worst = worst.max(diff);
    }
    let text = match ctx.format {
        Format::Text => format!(
            "pass: {} amplitudes compared, max |diff| {worst:e}; polynomial {} monomials match\n",
            outcomes.len(),
            symbolic.len()
        ),
        Format::Json => format!(
            "{}\n",
            json!({
                "pass": true, "compared": outcomes.len(), "max_abs_diff": worst,
                "monomials": symbolic.len(),
            })
        ),
        Format::Csv => format!(
            "pass,compared,max_abs_diff,monomials\ntrue,{},{worst:e},{}\n",
            outcomes.len(),
            symbolic.len()
        ),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Time `trials` random-outcome amplitudes per extra-layer setting. Trial
/// `t` uses circuit seed `seed + t` and outcome stream `(seed, t)`; the
/// timed region covers preprocessing and the amplitude itself.
pub fn bench(
    k: u32,
    trials: usize,
    extra_layers: &[usize],
    seed: u64,
    density: GateDensity,
    cfg: &EngineConfig,
) -> Result<Vec<BenchResult>, CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(extra_layers.len());
    for &extra in extra_layers {
        let mut total = 0.0f64;
        let mut worst = 0.0f64;
        let mut surviving = 0.0f64;
        let mut n = 0;
        for t in 0..trials {
            let c = GeneratorSpec::new(k, seed.wrapping_add(t as u64))
                .with_extra_layers(extra)
                .with_density(density)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            n = c.n();
            let y = random_outcome(n, &mut SplitMix64::stream(seed, t as u64));
            let start = Instant::now();
            let sim = Simulator::new(&c)?;
            let r = sim.amplitude(&y, cfg)?;
            let secs = start.elapsed().as_secs_f64();
            total += secs;
            worst = worst.max(secs);
            surviving += surviving_fraction(&r);
        }
        rows.push(BenchResult {
            k,
            n,
            extra_layers: extra,
            trials,
            mean_seconds: total / trials as f64,
            worst_seconds: worst,
            nonzero_fraction: surviving / trials as f64,
            threads: cfg.threads,
        });
    }
    Ok(rows)
}

fn cmd_bench(ctx: &Context, a: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let layers = parse_layer_range(&a.extra_layers)?;
    let rows = bench(
        a.k,
        a.trials,
        &layers,
        a.seed,
        a.density.density(),
        &ctx.engine,
    )?;
    let mut text = String::new();
    match ctx.format {
        Format::Text => {
            let _ = writeln!(
                text,
                "{:>3} {:>4} {:>6} {:>7} {:>14} {:>14} {:>10} {:>7}",
                "k", "n", "extra", "trials", "mean_s", "worst_s", "nonzero", "threads"
            );
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{:>3} {:>4} {:>6} {:>7} {:>14.8} {:>14.8} {:>10.6} {:>7}",
                    r.k,
                    r.n,
                    r.extra_layers,
                    r.trials,
                    r.mean_seconds,
                    r.worst_seconds,
                    r.nonzero_fraction,
                    r.threads
                );
            }
            if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
                if rows.len() > 1 {
                    let _ = writeln!(
                        text,
                        "mean ratio extra={} / extra={}: {:.3}",
                        last.extra_layers,
                        first.extra_layers,
                        last.mean_seconds / first.mean_seconds
                    );
                }
            }
        }
        Format::Json => {
            let _ = writeln!(
                text,
                "{}",
                serde_json::to_string(&rows).expect("rows serialize")
            );
        }
        Format::Csv => {
            text.push_str(
                "k,n,extra_layers,trials,nonzero_fraction,threads,mean_seconds,worst_seconds\n",
            );
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{:.6},{},{:.9},{:.9}",
                    r.k,
                    r.n,
                    r.extra_layers,
                    r.trials,
                    r.nonzero_fraction,
                    r.threads,
                    r.mean_seconds,
                    r.worst_seconds
                );
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}
