//! Storage and runtime comparison between the enumerative and full-codebook
//! realizations.

use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng as _;
use serde::{Serialize, Serializer};

use crate::codec::RlimCodec;
use crate::enumeration::{CodeParams, CountingTables, Mode};
use crate::error::Result;
use crate::oracle::{full_codebook_bits, FullCodebook, DEFAULT_SIZE_GUARD};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingPlan {
    /// Random blocks per timed run.
    pub blocks: usize,
    /// Timed runs after the warm-up pass.
    pub runs: usize,
    /// Largest `k` for which the full codebook is materialized.
    pub size_guard: u32,
}

impl Default for TimingPlan {
    fn default() -> Self {
        Self {
            blocks: 1_000,
            runs: 5,
            size_guard: DEFAULT_SIZE_GUARD,
        }
    }
}

/// Per-block time in seconds over the timed runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub mean: f64,
    pub median: f64,
}

impl Timing {
    fn from_runs(per_block: &mut [f64]) -> Self {
        per_block.sort_by(f64::total_cmp);
        let n = per_block.len();
        let median = if n % 2 == 1 {
            per_block[n / 2]
        } else {
            (per_block[n / 2 - 1] + per_block[n / 2]) / 2.0
        };
        Self {
            mean: per_block.iter().sum::<f64>() / n as f64,
            median,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationTiming {
    /// Seconds to build the stored structure, measured once.
    pub preprocessing: f64,
    pub encode: Timing,
    /// Decoding of clean codewords by rank or lookup.
    pub rank_decode: Timing,
    /// Correction plus projection decoding of perturbed words.
    pub projection: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageReport {
    pub i: usize,
    pub k: u32,
    pub mode: Mode,
    pub n: usize,
    #[serde(serialize_with = "as_decimal")]
    pub full_codebook_bits: BigUint,
    pub table_bits: u64,
    pub table_entries: usize,
    pub enumerative: RealizationTiming,
    /// Absent when `k` exceeds the materialization guard.
    pub full: Option<RealizationTiming>,
}

impl StorageReport {
    /// `full_codebook_bits / table_bits`.
    pub fn ratio(&self) -> f64 {
        let full: f64 = self.full_codebook_bits.to_string().parse().unwrap_or(f64::INFINITY);
        full / self.table_bits as f64
    }
}

fn as_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Table metrics alone, without timing.
pub fn storage_metrics(order: usize, info_bits: u32, mode: Mode) -> Result<(CodeParams, BigUint, u64, usize)> {
    let params = CodeParams::new(order, info_bits, mode)?;
    let tables = CountingTables::build(order, params.internal_len())?;
    Ok((
        params.clone(),
        full_codebook_bits(&params),
        tables.stored_bits(),
        tables.stored_entries(),
    ))
}

/// Runs `op` over every block: one warm-up pass, then `runs` timed passes.
fn time_blocks<T>(inputs: &[T], runs: usize, mut op: impl FnMut(&T)) -> Timing {
    for x in inputs {
        op(x);
    }
    let mut per_block: Vec<f64> = (0..runs.max(1))
        .map(|_| {
            let start = Instant::now();
            for x in inputs {
                op(x);
            }
            start.elapsed().as_secs_f64() / inputs.len() as f64
        })
        .collect();
    Timing::from_runs(&mut per_block)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Perturbs each codeword by flipping one to three random positions.
fn perturb<R: rand::Rng>(rng: &mut R, word: &[u8]) -> Vec<u8> {
    let mut out = word.to_vec();
    for _ in 0..rng.random_range(1..=3) {
        let j = rng.random_range(0..out.len());
        out[j] ^= 1;
    }
    out
}

pub fn storage_runtime_report(
    order: usize,
    info_bits: u32,
    mode: Mode,
    plan: &TimingPlan,
    seed: u64,
) -> Result<StorageReport> {
    let params = CodeParams::new(order, info_bits, mode)?;
    let (tables, build_time) = timed(|| CountingTables::build(order, params.internal_len()));
    let tables = tables?;
    let table_bits = tables.stored_bits();
    let table_entries = tables.stored_entries();
    let codec = RlimCodec::with_tables(params.clone(), tables.into())?;

    let mut rng = stream_rng(seed, streams::BENCH);
    let size = params.codebook_size();
    let messages: Vec<u128> = (0..plan.blocks.max(1))
        .map(|_| rng.random_range(0..size))
        .collect();
    let words: Vec<_> = messages
        .iter()
        .map(|&m| codec.encode(m).expect("message in range"))
        .collect();
    let noisy: Vec<Vec<u8>> = words.iter().map(|w| perturb(&mut rng, w.bits())).collect();

    let enumerative = RealizationTiming {
        preprocessing: build_time.as_secs_f64(),
        encode: time_blocks(&messages, plan.runs, |&m| {
            std::hint::black_box(codec.encode(m).ok());
        }),
        rank_decode: time_blocks(&words, plan.runs, |w| {
            let rank = codec.rank_word(w).expect("codeword is admissible");
            std::hint::black_box(codec.message_of_rank(&rank));
        }),
        projection: time_blocks(&noisy, plan.runs, |y| {
            std::hint::black_box(codec.decode_bits(y));
        }),
    };

    let full = if info_bits <= plan.size_guard {
        let (book, build_time) = timed(|| FullCodebook::build_with_limit(params.clone(), plan.size_guard));
        let book = book?;
        Some(RealizationTiming {
            preprocessing: build_time.as_secs_f64(),
            encode: time_blocks(&messages, plan.runs, |&m| {
                std::hint::black_box(book.encode(m).ok());
            }),
            rank_decode: time_blocks(&words, plan.runs, |w| {
                std::hint::black_box(book.lookup(w));
            }),
            projection: time_blocks(&noisy, plan.runs, |y| {
                std::hint::black_box(book.decode_bits(y));
            }),
        })
    } else {
        None
    };

    Ok(StorageReport {
        i: order,
        k: info_bits,
        mode,
        n: params.length(),
        full_codebook_bits: full_codebook_bits(&params),
        table_bits,
        table_entries,
        enumerative,
        full,
    })
}

pub const STORAGE_CSV_HEADER: &str = "i,k,mode,n,full_codebook_bits,table_bits,table_entries,\
realization,preprocessing_s,encode_mean_s,encode_median_s,rank_decode_mean_s,\
rank_decode_median_s,projection_mean_s,projection_median_s";

/// One row per realization; guarded-out full realizations are omitted.
pub fn write_storage_csv<W: Write>(reports: &[StorageReport], mut out: W) -> Result<()> {
    writeln!(out, "{STORAGE_CSV_HEADER}")?;
    for r in reports {
        let rows = [("enumerative", Some(&r.enumerative)), ("full", r.full.as_ref())];
        for (name, timing) in rows {
            let Some(t) = timing else { continue };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{name},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
                r.i,
                r.k,
                r.mode,
                r.n,
                r.full_codebook_bits,
                r.table_bits,
                r.table_entries,
                t.preprocessing,
                t.encode.mean,
                t.encode.median,
                t.rank_decode.mean,
                t.rank_decode.median,
                t.projection.mean,
                t.projection.median,
            )?;
        }
    }
    Ok(())
}

pub fn write_storage_json<W: Write>(reports: &[StorageReport], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)
        .map_err(|e| crate::error::Error::Container(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
