//! `rlim`: command-line access to RLIM codes, the diffusion channel and the
//! experiment harness.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::Rng;

use rlim_core::channel::{write_counts_csv, Channel, ChannelParams, CHANNEL_KEYS};
use rlim_core::codec::correct;
use rlim_core::config::KeyValues;
use rlim_core::harness::storage::{storage_runtime_report, write_storage_csv, write_storage_json, TimingPlan};
use rlim_core::harness::sweep::{mean_ber, sweep, write_csv, RunPlan};
use rlim_core::rng::{stream_rng, streams};
use rlim_core::{BitWord, CodeParams, CountingTables, Error, Mode, RlimCodec};

#[derive(Parser)]
#[command(name = "rlim", version, about = "RLIM codes, diffusion channel simulation and BER/storage experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build counting tables and report lengths, layers and storage.
    Tables {
        #[command(flatten)]
        code: CodeArgs,
        /// Also write the tables as a binary container.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Encode a message index.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        /// Message index in [0, 2^k).
        #[arg(long)]
        m: u128,
    },
    /// Correct and projection-decode a detected word, printing every step.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        /// Detected word, MSB-first.
        #[arg(long)]
        word: BitWord,
    },
    /// Rank an admissible word in weight-then-lex order.
    Rank {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        word: BitWord,
    },
    /// Apply the run-length correction to a detected word.
    Correct {
        /// Run-length order i.
        #[arg(long)]
        i: usize,
        #[arg(long)]
        word: BitWord,
    },
    /// Simulate received counts for a symbol sequence.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a BER sweep described by a plan file.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Storage and runtime comparison of the enumerative and full-codebook
    /// realizations.
    Bench {
        /// Run-length order i.
        #[arg(long, conflicts_with = "config")]
        i: Option<usize>,
        /// Information dimensions, comma-separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "config")]
        k: Vec<u32>,
        #[arg(long, default_value = "E", conflicts_with = "config")]
        mode: Mode,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format.
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// Run-length order i.
    #[arg(long)]
    i: usize,
    /// Information bits k.
    #[arg(long)]
    k: u32,
    /// E (enhanced) or N (non-enhanced).
    #[arg(long)]
    mode: Mode,
}

impl CodeArgs {
    fn params(&self) -> Result<CodeParams, Error> {
        CodeParams::new(self.i, self.k, self.mode)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
    /// The reader closed stdout early; not an error for a pipeline.
    ClosedPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::BitString(_)
            | Error::MessageOutOfRange { .. }
            | Error::LengthMismatch { .. }
            | Error::Config { .. } => Failure::Usage(e.to_string()),
            Error::Io(io) => io.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::ClosedPipe
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn cmd_tables(code: &CodeArgs, save: Option<&Path>, out: &mut impl Write) -> CmdResult {
    let params = code.params()?;
    let tables = CountingTables::build(params.order(), params.internal_len())?;
    let w_max = tables.max_weight();
    writeln!(out, "i = {}", params.order())?;
    writeln!(out, "k = {}", params.info_bits())?;
    writeln!(out, "mode = {}", params.mode())?;
    writeln!(out, "n = {}", params.length())?;
    writeln!(out, "T = {}", params.internal_len())?;
    writeln!(out, "family_size = {}", tables.family_size())?;
    writeln!(out, "max_weight = {w_max}")?;
    writeln!(out, "layer_sizes = {}", join((0..=w_max).map(|w| tables.layer_size(w))))?;
    writeln!(out, "layer_offsets = {}", join(tables.layer_offsets()))?;
    writeln!(out, "table_entries = {}", tables.stored_entries())?;
    writeln!(out, "table_bits = {}", tables.stored_bits())?;
    writeln!(out, "full_codebook_bits = {}", BigUint::from(params.length()) << params.info_bits())?;
    if let Some(path) = save {
        let file = File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        tables.write_to(BufWriter::new(file))?;
        writeln!(out, "saved = {}", path.display())?;
    }
    Ok(())
}

fn cmd_decode(code: &CodeArgs, word: &BitWord, out: &mut impl Write) -> CmdResult {
    let codec = RlimCodec::new(code.params()?)?;
    let decoded = codec.decode(word)?;
    writeln!(out, "detected = {word}")?;
    writeln!(out, "corrected = {}", decoded.corrected)?;
    for (j, step) in decoded.steps.iter().enumerate() {
        let rank = step.rank.as_ref().map_or("-".to_string(), |r| r.to_string());
        let verdict = if step.accepted { "accept" } else { "erase rightmost 1" };
        writeln!(out, "step {j}: word = {} rank = {rank} {verdict}", step.word)?;
    }
    writeln!(out, "message = {}", decoded.message)?;
    Ok(())
}

fn cmd_rank(code: &CodeArgs, word: &BitWord, out: &mut impl Write) -> CmdResult {
    let codec = RlimCodec::new(code.params()?)?;
    let rank = codec.rank_word(word)?;
    writeln!(out, "rank = {rank}")?;
    match codec.message_of_rank(&rank) {
        Some(m) => writeln!(out, "message = {m}")?,
        None => writeln!(out, "message = none (outside the selected codebook)")?,
    }
    Ok(())
}

fn cmd_simulate(run: &RunArgs) -> CmdResult {
    let kv = KeyValues::parse(&read_config(&run.config)?)?;
    let mut known = CHANNEL_KEYS.to_vec();
    known.extend(["symbols", "random_symbols"]);
    kv.reject_unknown(&known)?;
    let mut params = ChannelParams::default();
    if let Some(seed) = params.apply_config(&kv)? {
        if seed != run.seed {
            return Err(Failure::Usage(format!(
                "config seed {seed} conflicts with --seed {}",
                run.seed
            )));
        }
    }
    let symbols = match (kv.get::<BitWord>("symbols")?, kv.get::<usize>("random_symbols")?) {
        (Some(w), None) => w.into_bits(),
        (None, Some(count)) => {
            let mut rng = stream_rng(run.seed, streams::INFO_BITS);
            (0..count).map(|_| u8::from(rng.random::<bool>())).collect()
        }
        _ => {
            return Err(Failure::Usage(
                "config must set exactly one of symbols or random_symbols".into(),
            ))
        }
    };
    let channel = Channel::new(params)?;
    let counts = channel.simulate_reception(&symbols, &mut stream_rng(run.seed, streams::CHANNEL));
    let mut out = open_out(run.out.as_deref())?;
    write_counts_csv(&counts, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_sweep(run: &RunArgs) -> CmdResult {
    let plan = RunPlan::from_config(&read_config(&run.config)?, run.seed)?;
    let report = sweep(&plan);
    for f in &report.failures {
        let point = f.swept.as_ref().map_or(String::new(), |(p, v)| format!(" {}={v}", p.name()));
        eprintln!("warning\tpoint\t{}{point} seed={}: {}", f.scheme, f.seed, f.message);
    }
    let mut out = open_out(run.out.as_deref())?;
    write_csv(&report.results, &mut out)?;
    out.flush()?;
    if run.out.is_some() {
        let stdout = &mut io::stdout().lock();
        for (scheme, value, ber) in mean_ber(&report.results) {
            let value = value.map_or(String::new(), |v| format!(" at {v}"));
            writeln!(stdout, "{scheme}{value}: mean BER {ber:.6e}")?;
        }
    }
    Ok(())
}

const BENCH_KEYS: [&str; 6] = ["i", "k", "mode", "blocks", "runs", "size_guard"];

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    i: Option<usize>,
    k: &[u32],
    mode: Mode,
    config: Option<&Path>,
    seed: u64,
    out: Option<&Path>,
    format: &str,
) -> CmdResult {
    let mut timing = TimingPlan::default();
    let (order, grid, mode) = match config {
        Some(path) => {
            let kv = KeyValues::parse(&read_config(path)?)?;
            kv.reject_unknown(&BENCH_KEYS)?;
            let order = kv.get::<usize>("i")?.ok_or(Failure::Usage("config needs i".into()))?;
            let grid = kv.list::<u32>("k")?.ok_or(Failure::Usage("config needs k".into()))?;
            timing.blocks = kv.get("blocks")?.unwrap_or(timing.blocks);
            timing.runs = kv.get("runs")?.unwrap_or(timing.runs);
            timing.size_guard = kv.get("size_guard")?.unwrap_or(timing.size_guard);
            (order, grid, kv.get::<Mode>("mode")?.unwrap_or(Mode::Enhanced))
        }
        None => {
            let order = i.ok_or(Failure::Usage("--i or --config is required".into()))?;
            if k.is_empty() {
                return Err(Failure::Usage("--k or --config is required".into()));
            }
            (order, k.to_vec(), mode)
        }
    };
    if timing.blocks == 0 || timing.runs == 0 {
        return Err(Failure::Usage("blocks and runs must be positive".into()));
    }
    for &k in &grid {
        CodeParams::new(order, k, mode)?;
    }
    let reports = grid
        .iter()
        .map(|&k| storage_runtime_report(order, k, mode, &timing, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = open_out(out)?;
    if format == "json" {
        write_storage_json(&reports, &mut out)?;
    } else {
        write_storage_csv(&reports, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let stdout = &mut io::stdout().lock();
    match &cli.command {
        Command::Tables { code, save } => cmd_tables(code, save.as_deref(), stdout),
        Command::Encode { code, m } => {
            let codec = RlimCodec::new(code.params()?)?;
            writeln!(stdout, "{}", codec.encode(*m)?)?;
            Ok(())
        }
        Command::Decode { code, word } => cmd_decode(code, word, stdout),
        Command::Rank { code, word } => cmd_rank(code, word, stdout),
        Command::Correct { i, word } => {
            if *i == 0 {
                return Err(Failure::Usage("order i must be at least 1".into()));
            }
            writeln!(stdout, "{}", correct(*i, word))?;
            Ok(())
        }
        Command::Simulate { run } => cmd_simulate(run),
        Command::Sweep { run } => cmd_sweep(run),
        Command::Bench { i, k, mode, config, seed, out, format } => {
            cmd_bench(*i, k, *mode, config.as_deref(), *seed, out.as_deref(), format)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let text = e.to_string();
            let summary = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("error\tusage\t{}", summary.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error\tusage\t{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error\truntime\t{msg}");
            ExitCode::from(1)
        }
    }
}
