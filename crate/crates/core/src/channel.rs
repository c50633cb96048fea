//! Diffusion channel with a fully absorbing spherical receiver and binary
//! concentration-shift keying.
//!
//! A molecule released at the start of an interval is absorbed during the
//! `ℓ`-th interval with probability `p_ℓ = F(ℓ t_s) − F((ℓ − 1) t_s)`, where
//! `F` is the first-passage CDF. One emission of `M` molecules is a
//! multinomial draw over the `I` retained taps plus a tail category, and the
//! receiver adds rounded Gaussian counting noise per interval.

use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::config::KeyValues;
use crate::error::{Error, Result};

/// Physical channel constants. Lengths in µm, times in s.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChannelParams {
    /// Diffusion coefficient `D`, µm²/s.
    pub diffusion: f64,
    pub receiver_radius: f64,
    /// Transmitter to receiver-centre distance `r_0`.
    pub distance: f64,
    /// Signal interval `t_s`.
    pub interval: f64,
    /// Molecules per emitted 1-symbol.
    pub molecules: u64,
    /// Counting-noise variance `σ²`.
    pub noise_variance: f64,
    /// Number of retained taps `I`.
    pub memory: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            diffusion: 79.4,
            receiver_radius: 5.0,
            distance: 10.0,
            interval: 0.2,
            molecules: 500,
            noise_variance: 5.0,
            memory: 100,
        }
    }
}

pub const CHANNEL_KEYS: [&str; 8] = ["D", "rR", "r0", "ts", "M", "sigma2", "I", "seed"];

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.diffusion,
            self.receiver_radius,
            self.distance,
            self.interval,
            self.noise_variance,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("channel constants must be finite".into()));
        }
        if self.receiver_radius <= 0.0 || self.distance <= self.receiver_radius {
            return Err(Error::InvalidParameter(format!(
                "need r0 > rR > 0, got r0 = {}, rR = {}",
                self.distance, self.receiver_radius
            )));
        }
        if self.diffusion <= 0.0 || self.interval <= 0.0 {
            return Err(Error::InvalidParameter("D and ts must be positive".into()));
        }
        if self.noise_variance < 0.0 {
            return Err(Error::InvalidParameter("sigma2 must be non-negative".into()));
        }
        if self.memory == 0 {
            return Err(Error::InvalidParameter("I must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies `D`, `rR`, `r0`, `ts`, `M`, `sigma2` and `I` from a config
    /// on top of `self`, returning the optional `seed` entry.
    pub fn apply_config(&mut self, kv: &KeyValues) -> Result<Option<u64>> {
        if let Some(v) = kv.get("D")? {
            self.diffusion = v;
        }
        if let Some(v) = kv.get("rR")? {
            self.receiver_radius = v;
        }
        if let Some(v) = kv.get("r0")? {
            self.distance = v;
        }
        if let Some(v) = kv.get("ts")? {
            self.interval = v;
        }
        if let Some(v) = kv.get("M")? {
            self.molecules = v;
        }
        if let Some(v) = kv.get("sigma2")? {
            self.noise_variance = v;
        }
        if let Some(v) = kv.get("I")? {
            self.memory = v;
        }
        self.validate()?;
        kv.get("seed")
    }

    /// Parses a channel config; unset keys keep their defaults.
    pub fn from_config(text: &str) -> Result<(Self, Option<u64>)> {
        let kv = KeyValues::parse(text)?;
        kv.reject_unknown(&CHANNEL_KEYS)?;
        let mut params = Self::default();
        let seed = params.apply_config(&kv)?;
        Ok((params, seed))
    }
}

/// Probability that a molecule has been absorbed by time `t`.
pub fn absorption_cdf(params: &ChannelParams, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ratio = params.receiver_radius / params.distance;
    let arg = (params.distance - params.receiver_radius) / (4.0 * params.diffusion * t).sqrt();
    Ok(ratio * libm::erfc(arg))
}

/// Per-interval absorption probabilities and the residual tail mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    taps: Vec<f64>,
    tail: f64,
}

impl TapProfile {
    pub fn new(params: &ChannelParams) -> Result<Self> {
        params.validate()?;
        let mut taps = Vec::with_capacity(params.memory);
        let mut prev = 0.0;
        for l in 1..=params.memory {
            let cur = absorption_cdf(params, l as f64 * params.interval)?;
            taps.push(cur - prev);
            prev = cur;
        }
        Self::from_taps(taps)
    }

    /// Profile from explicit tap probabilities; the tail takes the rest.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParameter("at least one tap is required".into()));
        }
        if taps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("tap probabilities must lie in [0, 1]".into()));
        }
        let sum: f64 = taps.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("taps sum to {sum} > 1")));
        }
        let tail = (1.0 - sum).max(0.0);
        Ok(Self { taps, tail })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn memory(&self) -> usize {
        self.taps.len()
    }
}

/// Draws `(X_1, …, X_I, X_{I+1})` for one emission of `molecules`
/// molecules, as a chain of conditional binomials.
pub fn emit<R: Rng + ?Sized>(profile: &TapProfile, molecules: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; profile.memory() + 1];
    let mut remaining = molecules;
    let mut mass = 1.0f64;
    for (slot, &p) in counts.iter_mut().zip(&profile.taps) {
        if remaining == 0 {
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let x = Binomial::new(remaining, q)
            .expect("conditional probability lies in [0, 1]")
            .sample(rng);
        *slot = x;
        remaining -= x;
        mass -= p;
    }
    counts[profile.memory()] = remaining;
    counts
}

/// A channel instance with its taps computed once.
#[derive(Debug, Clone)]
pub struct Channel {
    params: ChannelParams,
    profile: TapProfile,
}

impl Channel {
    pub fn new(params: ChannelParams) -> Result<Self> {
        let profile = TapProfile::new(&params)?;
        Ok(Self { params, profile })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn profile(&self) -> &TapProfile {
        &self.profile
    }

    /// Received counts `N_1, …, N_L` for the transmitted symbols `bits`.
    ///
    /// Noise is `N(0, σ²)` rounded half away from zero; totals below zero
    /// are clamped to zero.
    pub fn simulate_reception<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Vec<u64> {
        let memory = self.profile.memory();
        let noise = (self.params.noise_variance > 0.0).then(|| {
            Normal::new(0.0, self.params.noise_variance.sqrt()).expect("variance is finite")
        });
        // pending[(t + ℓ − 1) % I] collects absorptions due in interval t + ℓ − 1.
        let mut pending = vec![0u64; memory];
        let mut out = Vec::with_capacity(bits.len());
        for (t, &bit) in bits.iter().enumerate() {
            if bit == 1 {
                let counts = emit(&self.profile, self.params.molecules, rng);
                for (l, &x) in counts[..memory].iter().enumerate() {
                    pending[(t + l) % memory] += x;
                }
            }
            let slot = t % memory;
            let signal = std::mem::take(&mut pending[slot]) as i64;
            let w = noise.as_ref().map_or(0, |n| n.sample(rng).round() as i64);
            out.push((signal + w).max(0) as u64);
        }
        out
    }
}

/// Writes `interval,count` rows, intervals numbered from 1.
pub fn write_counts_csv<W: Write>(counts: &[u64], mut out: W) -> Result<()> {
    writeln!(out, "interval,count")?;
    for (t, c) in counts.iter().enumerate() {
        writeln!(out, "{},{c}", t + 1)?;
    }
    Ok(())
}
