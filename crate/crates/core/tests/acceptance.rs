//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;

use rlim_core::channel::{absorption_cdf, emit, ChannelParams, TapProfile};
use rlim_core::codec::correct;
use rlim_core::harness::scheme::{uncoded_weight, SchemeKind};
use rlim_core::harness::sweep::{mean_ber, sweep, write_csv, BerResult, OperatingPoint, RunPlan};
use rlim_core::harness::SchemeConfig;
use rlim_core::oracle::{full_codebook_bits, oracle_codebook, CodebookOrder};
use rlim_core::rng::stream_rng;
use rlim_core::{shortest_length, BitWord, CodeParams, CountingTables, Mode, RlimCodec};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Admissible internal words of length `len`, by filtering all `2^len`
/// integers, sorted by weight then value.
fn brute_family(order: usize, len: usize) -> Vec<u32> {
    let mut words: Vec<u32> = (0u32..1 << len)
        .filter(|&v| {
            let mut last: Option<u32> = None;
            (0..len as u32).all(|j| {
                if v >> j & 1 == 0 {
                    return true;
                }
                let ok = last.is_none_or(|l| j - l > order as u32);
                last = Some(j);
                ok
            })
        })
        .collect();
    words.sort_by_key(|&v| (v.count_ones(), v));
    words
}

fn criterion_1() -> Outcome {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for order in 1..=5 {
        for len in 1..=18usize {
            let family = brute_family(order, len);
            let k = (usize::BITS - 1 - family.len().leading_zeros()).min(rlim_core::MAX_INFO_BITS);
            for mode in [Mode::Enhanced, Mode::NonEnhanced] {
                let k = if mode == Mode::NonEnhanced && family.len() == 1 << k { k - 1 } else { k };
                if k == 0 {
                    continue;
                }
                let p = CodeParams::with_length(order, k, mode, order + len).map_err(|e| e.to_string())?;
                let codec = RlimCodec::new(p).map_err(|e| e.to_string())?;
                let shift = usize::from(mode == Mode::NonEnhanced);
                mismatches += family
                    .par_iter()
                    .enumerate()
                    .filter(|&(pos, &v)| {
                        let word = BitWord::from_u128(u128::from(v), order + len);
                        let rank_ok = codec.rank_word(&word).ok() == Some(BigUint::from(pos));
                        let encode_ok = match pos.checked_sub(shift) {
                            Some(m) if m < 1 << k => codec.encode(m as u128).ok() == Some(word),
                            _ => true,
                        };
                        !(rank_ok && encode_ok)
                    })
                    .count();
                checked += family.len();
            }
        }
    }
    ensure(mismatches == 0, format!("{checked} positions, {mismatches} mismatches"))
}

fn criterion_2() -> Outcome {
    let cases: Vec<(usize, u32, Mode)> = (1..=5)
        .flat_map(|i| (1..=40).flat_map(move |k| [Mode::Enhanced, Mode::NonEnhanced].map(|m| (i, k, m))))
        .collect();
    let results: Vec<(u64, u64)> = cases
        .par_iter()
        .map(|&(order, k, mode)| {
            let p = CodeParams::new(order, k, mode).expect("valid parameters");
            let codec = RlimCodec::new(p).expect("tables build");
            let check = |m: u128| {
                let word = codec.encode(m).expect("message in range");
                codec.project_decode(&word).ok() == Some(m)
            };
            if k <= 12 {
                let failures = (0..1u128 << k).filter(|&m| !check(m)).count() as u64;
                (1 << k, failures)
            } else {
                let mut rng = stream_rng(u64::from(k) * 10 + order as u64, u64::from(mode.shift()));
                let failures = (0..10_000).filter(|_| !check(rng.random_range(0..1u128 << k))).count() as u64;
                (10_000, failures)
            }
        })
        .collect();
    let total: u64 = results.iter().map(|r| r.0).sum();
    let failures: u64 = results.iter().map(|r| r.1).sum();
    ensure(failures == 0, format!("{total} messages over {} codes, {failures} failures", cases.len()))
}

fn criterion_3() -> Outcome {
    let n_e = shortest_length(3, 16, Mode::Enhanced);
    let n_n = shortest_length(3, 16, Mode::NonEnhanced);
    let p = CodeParams::new(3, 16, Mode::Enhanced).map_err(|e| e.to_string())?;
    let full = full_codebook_bits(&p);
    let tables = CountingTables::build(3, p.internal_len()).map_err(|e| e.to_string())?;
    let table_bits = tables.stored_bits();
    let ratio = full.to_f64().unwrap() / table_bits as f64;
    ensure(
        n_e == 37
            && n_n == 37
            && full == BigUint::from(2_424_832u32)
            && (5_000..=20_000).contains(&table_bits)
            && ratio >= 100.0,
        format!("n = {n_e}/{n_n}, full = {full} bits, tables = {table_bits} bits, ratio = {ratio:.1}"),
    )
}

fn criterion_4() -> Outcome {
    let mut points = Vec::new();
    let mut identity_ok = true;
    let mut prev: Option<(usize, BigUint)> = None;
    for k in 8..=40u32 {
        let p = CodeParams::new(3, k, Mode::Enhanced).map_err(|e| e.to_string())?;
        let full = full_codebook_bits(&p);
        let n = p.length();
        identity_ok &= full == BigUint::from(n) * BigUint::from(2u32).pow(k);
        if let Some((prev_n, prev_full)) = &prev {
            // Per unit k the size doubles, up to the length ratio.
            identity_ok &= &full * prev_n == prev_full * 2u32 * n;
        }
        prev = Some((n, full));
        let tables = CountingTables::build(3, p.internal_len()).map_err(|e| e.to_string())?;
        points.push((f64::from(k).ln(), (tables.stored_bits() as f64).ln()));
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    ensure(
        identity_ok && slope <= 3.5,
        format!("n*2^k identity {}, log-log slope {slope:.3}", if identity_ok { "holds" } else { "broken" }),
    )
}

fn criterion_5() -> Outcome {
    let mut violations = 0u64;
    let mut words = 0u64;
    for order in 1..=3usize {
        for n in order + 1..=12usize {
            let admissible: Vec<u32> = brute_family(order, n - order);
            for y in 0u32..1 << n {
                let detected = BitWord::from_u128(u128::from(y), n);
                let z = correct(order, &detected);
                let best = admissible
                    .iter()
                    .map(|&v| (v ^ y).count_ones())
                    .min()
                    .unwrap();
                let got = (z.to_u128() as u32 ^ y).count_ones();
                if !z.is_admissible(order) || got != best {
                    violations += 1;
                }
                words += 1;
            }
        }
    }
    ensure(violations == 0, format!("{words} detected words, {violations} violations"))
}

fn criterion_6() -> Outcome {
    let params = ChannelParams::default();
    let profile = TapProfile::new(&params).map_err(|e| e.to_string())?;
    let sum: f64 = profile.taps().iter().sum::<f64>() + profile.tail();
    let limit = absorption_cdf(&params, 1e20).map_err(|e| e.to_string())?;

    let emissions = 100_000u64;
    let molecules = 100u64;
    let mut rng = stream_rng(2024, 7);
    let mut totals = vec![0u64; profile.memory() + 1];
    for _ in 0..emissions {
        for (t, x) in totals.iter_mut().zip(emit(&profile, molecules, &mut rng)) {
            *t += x;
        }
    }
    let trials = (emissions * molecules) as f64;
    let mut worst: f64 = 0.0;
    for (&p, &total) in profile.taps().iter().zip(&totals).take(10) {
        let se = (p * (1.0 - p) / trials).sqrt();
        worst = worst.max((total as f64 / trials - p).abs() / se);
    }
    ensure(
        (sum - 1.0).abs() <= 1e-12 && (limit - 0.5).abs() <= 1e-9 && worst <= 3.0,
        format!(
            "taps + tail - 1 = {:.1e}, |F(inf) - 0.5| = {:.1e}, worst deviation {worst:.2} SE",
            sum - 1.0,
            (limit - 0.5).abs()
        ),
    )
}

fn ber_plan() -> RunPlan {
    let base = OperatingPoint {
        channel: ChannelParams {
            noise_variance: 5.0,
            ..ChannelParams::default()
        },
        base_interval: Ratio::new(1, 5),
        base_molecules: 500,
        info_bits: 16,
    };
    let schemes = vec![
        SchemeConfig::uncoded(),
        SchemeConfig::rlim(3, Mode::Enhanced),
        SchemeConfig::rll(3, Mode::Enhanced),
    ];
    let mut plan = RunPlan::new(schemes, base, vec![1, 2, 3]);
    plan.train_bits = 10_000;
    plan.test_bits = 100_000;
    plan
}

fn run_ber() -> Result<Vec<BerResult>, String> {
    let report = sweep(&ber_plan());
    if let Some(f) = report.failures.first() {
        return Err(format!("{} failed: {}", f.scheme, f.message));
    }
    Ok(report.results)
}

fn criterion_7(results: &[BerResult]) -> Outcome {
    let means = mean_ber(results);
    let ber = |name: &str| means.iter().find(|(s, _, _)| s == name).map(|m| m.2);
    let (Some(uncoded), Some(rlim), Some(rll)) = (ber("uncoded"), ber("RLIM_3"), ber("RLL_3")) else {
        return Err("missing scheme results".into());
    };
    let tested = results.iter().all(|r| r.info_bits_tested >= 100_000);
    ensure(
        tested && rlim < uncoded && rlim < rll,
        format!("mean BER uncoded {uncoded:.4e}, RLIM_3 {rlim:.4e}, RLL_3 {rll:.4e}"),
    )
}

/// `round(num / den)` with ties to even, by integer comparison.
fn is_rounded_half_even(m: &BigUint, num: &BigUint, den: &BigUint) -> bool {
    let scaled = m * den;
    let (lo, hi) = if scaled > *num { (num, &scaled) } else { (&scaled, num) };
    let twice_gap = (hi - lo) * 2u32;
    twice_gap < *den || (twice_gap == *den && m % 2u32 == BigUint::ZERO)
}

fn criterion_8(results: &[BerResult]) -> Outcome {
    let plan = ber_plan();
    let ts0 = plan.base.base_interval;
    let m0 = BigUint::from(plan.base.base_molecules);
    let mut checked = 0;
    for config in &plan.schemes {
        let r = results
            .iter()
            .find(|r| r.config == *config)
            .ok_or_else(|| format!("no result for {config}"))?;
        let k = r.info_bits;
        let (n, brute_w) = match config.kind {
            SchemeKind::Uncoded => {
                let w: u64 = (0u32..1 << k).map(|v| u64::from(v.count_ones())).sum();
                (k as usize, BigUint::from(w))
            }
            kind => {
                let p = CodeParams::new(config.order, k, config.mode).map_err(|e| e.to_string())?;
                let order = if kind == SchemeKind::RllLexicographic {
                    CodebookOrder::LexGeneration
                } else {
                    CodebookOrder::WeightThenLex
                };
                let book = oracle_codebook(&p, order).map_err(|e| e.to_string())?;
                (p.length(), BigUint::from(book.total_weight()))
            }
        };
        let w0: u64 = (0u32..1 << k).map(|v| u64::from(v.count_ones())).sum();
        let w0 = BigUint::from(w0);
        if w0 != uncoded_weight(k as usize) {
            return Err(format!("W0 mismatch at k = {k}"));
        }
        if r.signal_interval * Ratio::from_integer(n as u64) != ts0 * Ratio::from_integer(u64::from(k)) {
            return Err(format!("{}: ts * n != ts0 * K", r.scheme));
        }
        let m = BigUint::from(r.molecules);
        if !is_rounded_half_even(&m, &(&m0 * &w0), &brute_w) {
            return Err(format!("{}: M = {} is not round(M0 W0 / W) with W = {brute_w}", r.scheme, r.molecules));
        }
        checked += 1;
    }
    Ok(format!("{checked} schemes: rational ts identity and M against brute-force W"))
}

fn criterion_9(first: &[BerResult]) -> Outcome {
    let second = run_ber()?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(first, &mut a).map_err(|e| e.to_string())?;
    write_csv(&second, &mut b).map_err(|e| e.to_string())?;
    ensure(a == b, format!("{} CSV bytes, repeat identical: {}", a.len(), a == b))
}

fn report(index: usize, name: &str, outcome: &Outcome, started: Instant) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => println!("criterion {index} [{name}]: PASS ({detail}; {secs:.1}s)"),
        Err(detail) => println!("criterion {index} [{name}]: FAIL ({detail}; {secs:.1}s)"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut all = true;
    let t = Instant::now();
    all &= report(1, "ordering equivalence", &criterion_1(), t);
    let t = Instant::now();
    all &= report(2, "bijection", &criterion_2(), t);
    let t = Instant::now();
    all &= report(3, "length and storage anchor", &criterion_3(), t);
    let t = Instant::now();
    all &= report(4, "asymptotic storage", &criterion_4(), t);
    let t = Instant::now();
    all &= report(5, "correction optimality", &criterion_5(), t);
    let t = Instant::now();
    all &= report(6, "channel statistics", &criterion_6(), t);

    let t = Instant::now();
    match run_ber() {
        Ok(results) => {
            all &= report(7, "BER trend", &criterion_7(&results), t);
            let t = Instant::now();
            all &= report(8, "normalization identities", &criterion_8(&results), t);
            let t = Instant::now();
            all &= report(9, "determinism", &criterion_9(&results), t);
        }
        Err(e) => {
            for (index, name) in [(7, "BER trend"), (8, "normalization identities"), (9, "determinism")] {
                all &= report(index, name, &Err(e.clone()), t);
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
