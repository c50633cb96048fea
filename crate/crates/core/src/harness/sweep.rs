//! Experiment orchestration: run plans, operating points and BER sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

use super::detector::{evaluate_ber, train_threshold, ThresholdSearch, TrainedDetector};
use super::scheme::{parse_decimal, ratio_to_f64, Rounding, Scheme, SchemeConfig, SchemeKind};
use crate::channel::{Channel, ChannelParams};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

pub const DEFAULT_TRAIN_BITS: usize = 10_000;
pub const DEFAULT_TEST_BITS: usize = 100_000;

/// Uncoded reference settings shared by every scheme at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Channel constants; `interval` and `molecules` are ignored in favour of
    /// the normalized per-scheme values.
    pub channel: ChannelParams,
    /// `t_{s,0}`, exact.
    pub base_interval: Ratio<u64>,
    /// `M_0`.
    pub base_molecules: u64,
    /// `k`.
    pub info_bits: u32,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            base_interval: Ratio::new(1, 5),
            base_molecules: 500,
            info_bits: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweptParam {
    M0,
    Ts0,
    R0,
    Sigma2,
    D,
    K,
}

impl SweptParam {
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::M0 => "M0",
            SweptParam::Ts0 => "ts0",
            SweptParam::R0 => "r0",
            SweptParam::Sigma2 => "sigma2",
            SweptParam::D => "D",
            SweptParam::K => "k",
        }
    }

    /// Returns `base` with this parameter set to `value`.
    pub fn apply(self, base: &OperatingPoint, value: &str) -> Result<OperatingPoint> {
        let bad = |e: &dyn fmt::Display| {
            Error::InvalidParameter(format!("{} = {value:?}: {e}", self.name()))
        };
        let mut point = base.clone();
        match self {
            SweptParam::M0 => point.base_molecules = value.parse().map_err(|e| bad(&e))?,
            SweptParam::Ts0 => point.base_interval = parse_decimal(value)?,
            SweptParam::R0 => point.channel.distance = value.parse().map_err(|e| bad(&e))?,
            SweptParam::Sigma2 => point.channel.noise_variance = value.parse().map_err(|e| bad(&e))?,
            SweptParam::D => point.channel.diffusion = value.parse().map_err(|e| bad(&e))?,
            SweptParam::K => point.info_bits = value.parse().map_err(|e| bad(&e))?,
        }
        Ok(point)
    }
}

impl FromStr for SweptParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "M0" => SweptParam::M0,
            "ts0" => SweptParam::Ts0,
            "r0" => SweptParam::R0,
            "sigma2" => SweptParam::Sigma2,
            "D" => SweptParam::D,
            "k" => SweptParam::K,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "cannot sweep {other:?}; expected M0, ts0, r0, sigma2, D or k"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub schemes: Vec<SchemeConfig>,
    pub base: OperatingPoint,
    /// Swept parameter and its grid; `None` runs the base point alone.
    pub sweep: Option<(SweptParam, Vec<String>)>,
    pub seeds: Vec<u64>,
    pub train_bits: usize,
    pub test_bits: usize,
    pub rounding: Rounding,
    pub search: ThresholdSearch,
}

pub const PLAN_KEYS: [&str; 17] = [
    "schemes", "k", "M0", "ts0", "D", "rR", "r0", "sigma2", "I", "sweep", "grid", "replicates",
    "train_bits", "test_bits", "rounding", "search", "coarse_step",
];

impl RunPlan {
    pub fn new(schemes: Vec<SchemeConfig>, base: OperatingPoint, seeds: Vec<u64>) -> Self {
        Self {
            schemes,
            base,
            sweep: None,
            seeds,
            train_bits: DEFAULT_TRAIN_BITS,
            test_bits: DEFAULT_TEST_BITS,
            rounding: Rounding::default(),
            search: ThresholdSearch::default(),
        }
    }

    /// Parses a plan file. Seeds are `base_seed, base_seed + 1, …` for the
    /// plan's `replicates` count.
    pub fn from_config(text: &str, base_seed: u64) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        kv.reject_unknown(&PLAN_KEYS)?;
        let schemes = kv
            .list::<SchemeConfig>("schemes")?
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Config {
                line: kv.line_of("schemes"),
                message: "a non-empty schemes list is required".into(),
            })?;
        let mut base = OperatingPoint::default();
        let mut channel = base.channel.clone();
        channel.apply_config(&kv)?;
        base.channel = channel;
        if let Some(k) = kv.get("k")? {
            base.info_bits = k;
        }
        if let Some(m) = kv.get("M0")? {
            base.base_molecules = m;
        }
        if let Some(ts) = kv.raw("ts0") {
            base.base_interval = parse_decimal(ts)?;
        }
        let sweep = match (kv.get::<SweptParam>("sweep")?, kv.list::<String>("grid")?) {
            (Some(p), Some(grid)) => Some((p, grid)),
            (Some(p), None) => Some((p, Vec::new())),
            (None, None) => None,
            (None, Some(_)) => {
                return Err(Error::Config {
                    line: kv.line_of("grid"),
                    message: "grid given without sweep".into(),
                })
            }
        };
        let replicates: u64 = kv.get("replicates")?.unwrap_or(1);
        if replicates == 0 {
            return Err(Error::Config {
                line: kv.line_of("replicates"),
                message: "replicates must be at least 1".into(),
            });
        }
        let search = match (kv.raw("search"), kv.get::<u64>("coarse_step")?) {
            (None | Some("exhaustive"), None) => ThresholdSearch::Exhaustive,
            (Some("coarse-to-fine"), step) => ThresholdSearch::CoarseToFine {
                step: step.unwrap_or(4),
            },
            (Some(other), _) if other != "exhaustive" => {
                return Err(Error::Config {
                    line: kv.line_of("search"),
                    message: format!("unknown search {other:?}"),
                })
            }
            _ => {
                return Err(Error::Config {
                    line: kv.line_of("coarse_step"),
                    message: "coarse_step requires search = coarse-to-fine".into(),
                })
            }
        };
        let plan = Self {
            schemes,
            base,
            sweep,
            seeds: (0..replicates).map(|r| base_seed.wrapping_add(r)).collect(),
            train_bits: kv.get("train_bits")?.unwrap_or(DEFAULT_TRAIN_BITS),
            test_bits: kv.get("test_bits")?.unwrap_or(DEFAULT_TEST_BITS),
            rounding: kv.get("rounding")?.unwrap_or_default(),
            search,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_bits == 0 || self.test_bits == 0 {
            return Err(Error::InvalidParameter("train_bits and test_bits must be positive".into()));
        }
        self.base.channel.validate()
    }

    /// Operating points in grid order, with the swept value as text.
    pub fn points(&self) -> Vec<(Option<String>, Result<OperatingPoint>)> {
        match &self.sweep {
            None => vec![(None, Ok(self.base.clone()))],
            Some((param, grid)) => grid
                .iter()
                .map(|v| (Some(v.clone()), param.apply(&self.base, v)))
                .collect(),
        }
    }
}

/// Test-BER outcome of one (scheme, operating point, seed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BerResult {
    pub scheme: String,
    pub config: SchemeConfig,
    pub info_bits: u32,
    pub swept: Option<(SweptParam, String)>,
    pub seed: u64,
    pub errors: u64,
    pub info_bits_tested: u64,
    pub detector: TrainedDetector,
    pub molecules: u64,
    pub signal_interval: Ratio<u64>,
}

impl BerResult {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.info_bits_tested as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointFailure {
    pub scheme: String,
    pub swept: Option<(SweptParam, String)>,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub results: Vec<BerResult>,
    pub failures: Vec<PointFailure>,
}

fn random_bits<R: Rng>(rng: &mut R, count: usize) -> Vec<u8> {
    (0..count).map(|_| u8::from(rng.random::<bool>())).collect()
}

fn encode_stream(scheme: &Scheme, info: &[u8]) -> Vec<u8> {
    let k = scheme.spec.info_bits;
    let mut out = Vec::with_capacity(info.len() / k * scheme.spec.block_len);
    for block in info.chunks_exact(k) {
        let message = super::scheme::bits_to_message(block);
        scheme.code.encode_block(message, &mut out);
    }
    out
}

/// Runs the full protocol for one scheme at one point: random training and
/// test information bits, transmitted back to back over one channel
/// realization, threshold trained on the first part and applied to the
/// second.
///
/// Information bits come from the seed's info stream, so every scheme at a
/// given seed carries the same data.
pub fn run_point(
    config: SchemeConfig,
    point: &OperatingPoint,
    seed: u64,
    train_bits: usize,
    test_bits: usize,
    rounding: Rounding,
    search: ThresholdSearch,
) -> Result<(Scheme, TrainedDetector, u64, u64)> {
    let scheme = Scheme::build(
        config,
        point.info_bits,
        point.base_interval,
        point.base_molecules,
        rounding,
    )?;
    let k = scheme.spec.info_bits;
    let train_len = train_bits.div_ceil(k) * k;
    let test_len = test_bits.div_ceil(k) * k;

    let mut info_rng = stream_rng(seed, streams::INFO_BITS);
    let train_info = random_bits(&mut info_rng, train_len);
    let test_info = random_bits(&mut info_rng, test_len);

    let mut symbols = encode_stream(&scheme, &train_info);
    let train_symbols = symbols.len();
    symbols.extend(encode_stream(&scheme, &test_info));

    let channel = Channel::new(ChannelParams {
        interval: ratio_to_f64(&scheme.spec.signal_interval),
        molecules: scheme.spec.molecules,
        ..point.channel.clone()
    })?;
    let counts = channel.simulate_reception(&symbols, &mut stream_rng(seed, streams::CHANNEL));
    let (train_counts, test_counts) = counts.split_at(train_symbols);

    let detector = train_threshold(&scheme, train_counts, &train_info, search);
    let (errors, total) = evaluate_ber(&detector, &scheme, test_counts, &test_info);
    Ok((scheme, detector, errors, total))
}

/// Runs every (point, scheme, seed) of a plan. Points run concurrently;
/// results keep plan order and failures are collected rather than fatal.
pub fn sweep(plan: &RunPlan) -> SweepReport {
    let swept_param = plan.sweep.as_ref().map(|(p, _)| *p);
    let jobs: Vec<_> = plan
        .points()
        .into_iter()
        .flat_map(|(value, point)| {
            let swept = value.map(|v| (swept_param.unwrap(), v));
            plan.schemes.iter().flat_map(move |&config| {
                let swept = swept.clone();
                let point = point.as_ref().map_err(|e| e.to_string()).cloned();
                plan.seeds
                    .iter()
                    .map(move |&seed| (config, swept.clone(), point.clone(), seed))
            })
        })
        .collect();

    let outcomes: Vec<std::result::Result<BerResult, PointFailure>> = jobs
        .into_par_iter()
        .map(|(config, swept, point, seed)| {
            let fail = |message: String| PointFailure {
                scheme: config.name(),
                swept: swept.clone(),
                seed,
                message,
            };
            let point = point.map_err(fail)?;
            let (scheme, detector, errors, total) = run_point(
                config,
                &point,
                seed,
                plan.train_bits,
                plan.test_bits,
                plan.rounding,
                plan.search,
            )
            .map_err(|e| fail(e.to_string()))?;
            Ok(BerResult {
                scheme: scheme.spec.name,
                config,
                info_bits: point.info_bits,
                swept: swept.clone(),
                seed,
                errors,
                info_bits_tested: total,
                detector,
                molecules: scheme.spec.molecules,
                signal_interval: scheme.spec.signal_interval,
            })
        })
        .collect();

    let mut report = SweepReport::default();
    for outcome in outcomes {
        match outcome {
            Ok(r) => report.results.push(r),
            Err(f) => report.failures.push(f),
        }
    }
    report
}

pub const CSV_HEADER: &str = "scheme,i,k,mode,param,value,seed,ber,tau,info_bits";

pub fn write_csv<W: Write>(results: &[BerResult], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        let (order, mode) = match r.config.kind {
            SchemeKind::Uncoded => (String::new(), String::new()),
            _ => (r.config.order.to_string(), r.config.mode.to_string()),
        };
        let (param, value) = r
            .swept
            .as_ref()
            .map_or((String::new(), String::new()), |(p, v)| (p.name().to_string(), v.clone()));
        writeln!(
            out,
            "{},{order},{},{mode},{param},{value},{},{:.9e},{},{}",
            r.scheme,
            r.info_bits,
            r.seed,
            r.ber(),
            r.detector.threshold,
            r.info_bits_tested
        )?;
    }
    Ok(())
}

/// Seed-averaged BER per (scheme, swept value), in first-seen order.
pub fn mean_ber(results: &[BerResult]) -> Vec<(String, Option<String>, f64)> {
    let mut out: Vec<(String, Option<String>, f64, usize)> = Vec::new();
    for r in results {
        let value = r.swept.as_ref().map(|(_, v)| v.clone());
        match out.iter_mut().find(|(s, v, _, _)| *s == r.scheme && *v == value) {
            Some(entry) => {
                entry.2 += r.ber();
                entry.3 += 1;
            }
            None => out.push((r.scheme.clone(), value, r.ber(), 1)),
        }
    }
    out.into_iter().map(|(s, v, sum, n)| (s, v, sum / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::Mode;

    fn small_plan() -> RunPlan {
        let mut plan = RunPlan::new(
            vec![SchemeConfig::uncoded(), SchemeConfig::rlim(2, Mode::Enhanced)],
            OperatingPoint { info_bits: 8, ..Default::default() },
            vec![1, 2],
        );
        plan.train_bits = 800;
        plan.test_bits = 2_000;
        plan
    }

    #[test]
    fn empty_grid_gives_no_results() {
        let mut plan = small_plan();
        plan.sweep = Some((SweptParam::M0, Vec::new()));
        let report = sweep(&plan);
        assert!(report.results.is_empty() && report.failures.is_empty());
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let mut plan = small_plan();
        plan.sweep = Some((SweptParam::M0, vec!["100".into(), "400".into()]));
        let a = sweep(&plan);
        let b = sweep(&plan);
        assert_eq!(a, b);
        assert_eq!(a.results.len(), 2 * 2 * 2);
        assert_eq!(a.results[0].scheme, "uncoded");
        assert_eq!(a.results[0].seed, 1);
        assert_eq!(a.results[2].scheme, "RLIM_2");
        assert!(a.results.iter().all(|r| r.info_bits_tested == 2_000));

        let mut x = Vec::new();
        let mut y = Vec::new();
        write_csv(&a.results, &mut x).unwrap();
        write_csv(&b.results, &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.lines().nth(3).unwrap().starts_with("RLIM_2,2,8,E,M0,100,1,"));
    }

    #[test]
    fn bad_points_are_recorded_not_fatal() {
        let mut plan = small_plan();
        plan.seeds = vec![5];
        plan.sweep = Some((SweptParam::R0, vec!["2".into(), "12".into(), "x".into()]));
        let report = sweep(&plan);
        assert_eq!(report.results.len(), 2);
        assert_eq!(report.failures.len(), 4);
    }

    #[test]
    fn plan_parsing() {
        let plan = RunPlan::from_config(
            "schemes = uncoded, rlim:3:E, rll:3\nM0 = 500\nts0 = 0.25\nsigma2 = 5\nsweep = k\ngrid = 8, 12\nreplicates = 3\ntest_bits = 5000\n",
            10,
        )
        .unwrap();
        assert_eq!(plan.schemes.len(), 3);
        assert_eq!(plan.seeds, vec![10, 11, 12]);
        assert_eq!(plan.base.base_interval, Ratio::new(1, 4));
        assert_eq!(plan.test_bits, 5000);
        assert_eq!(plan.train_bits, DEFAULT_TRAIN_BITS);
        let points = plan.points();
        assert_eq!(points[1].1.as_ref().unwrap().info_bits, 12);

        for bad in [
            "M0 = 5",
            "schemes = rlim:3\ngrid = 1,2",
            "schemes = rlim:3\nsweep = Z",
            "schemes = hamming",
            "schemes = rlim:3\nreplicates = 0",
            "schemes = rlim:3\nfoo = 1",
            "schemes = rlim:3\ncoarse_step = 3",
        ] {
            assert!(RunPlan::from_config(bad, 0).is_err(), "{bad}");
        }
        let plan = RunPlan::from_config("schemes = rlim:3\nsearch = coarse-to-fine\ncoarse_step = 3", 0).unwrap();
        assert_eq!(plan.search, ThresholdSearch::CoarseToFine { step: 3 });
    }

    #[test]
    fn strong_channel_decodes_perfectly() {
        let point = OperatingPoint {
            channel: ChannelParams { noise_variance: 0.0, memory: 1, ..Default::default() },
            base_molecules: 5_000,
            info_bits: 8,
            ..Default::default()
        };
        for config in [SchemeConfig::uncoded(), SchemeConfig::rlim(2, Mode::Enhanced), SchemeConfig::rll(2, Mode::NonEnhanced)] {
            let (_, _, errors, total) =
                run_point(config, &point, 3, 800, 4_000, Rounding::HalfEven, ThresholdSearch::Exhaustive).unwrap();
            assert_eq!(errors, 0, "{config}");
            assert_eq!(total, 4_000);
        }
    }
}
