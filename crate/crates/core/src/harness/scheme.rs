//! Coding schemes under the time and molecule-budget normalization.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::codec::RlimCodec;
use crate::enumeration::{CodeParams, Mode};
use crate::error::{Error, Result};
use crate::lexrll::LexRllCodec;
use crate::oracle::FullCodebook;

/// A block code as seen by the transmitter and the complete receiver.
pub trait BlockCode: Send + Sync + fmt::Debug {
    /// Information bits per block, `K`.
    fn info_bits(&self) -> usize;
    /// Coded block length, `n`.
    fn block_len(&self) -> usize;
    /// Total 1-bits over the whole codebook, `W`.
    fn codebook_weight(&self) -> BigUint;
    /// Appends the codeword of `message`.
    fn encode_block(&self, message: u128, out: &mut Vec<u8>);
    /// Decodes a threshold-detected block to a message index.
    fn decode_block(&self, detected: &[u8]) -> u128;
}

#[derive(Debug, Clone, Copy)]
pub struct Uncoded {
    pub info_bits: usize,
}

impl BlockCode for Uncoded {
    fn info_bits(&self) -> usize {
        self.info_bits
    }

    fn block_len(&self) -> usize {
        self.info_bits
    }

    fn codebook_weight(&self) -> BigUint {
        uncoded_weight(self.info_bits)
    }

    fn encode_block(&self, message: u128, out: &mut Vec<u8>) {
        out.extend((0..self.info_bits).rev().map(|j| ((message >> j) & 1) as u8));
    }

    fn decode_block(&self, detected: &[u8]) -> u128 {
        bits_to_message(detected)
    }
}

impl BlockCode for RlimCodec {
    fn info_bits(&self) -> usize {
        self.params().info_bits() as usize
    }

    fn block_len(&self) -> usize {
        self.params().length()
    }

    fn codebook_weight(&self) -> BigUint {
        self.selected_codebook_weight()
    }

    fn encode_block(&self, message: u128, out: &mut Vec<u8>) {
        out.extend_from_slice(self.encode(message).expect("message fits the codebook").bits());
    }

    fn decode_block(&self, detected: &[u8]) -> u128 {
        self.decode_bits(detected)
    }
}

impl BlockCode for LexRllCodec {
    fn info_bits(&self) -> usize {
        self.params().info_bits() as usize
    }

    fn block_len(&self) -> usize {
        self.params().length()
    }

    fn codebook_weight(&self) -> BigUint {
        self.selected_codebook_weight()
    }

    fn encode_block(&self, message: u128, out: &mut Vec<u8>) {
        out.extend_from_slice(self.encode(message).expect("message fits the codebook").bits());
    }

    fn decode_block(&self, detected: &[u8]) -> u128 {
        self.decode_bits(detected)
    }
}

impl BlockCode for FullCodebook {
    fn info_bits(&self) -> usize {
        self.params().info_bits() as usize
    }

    fn block_len(&self) -> usize {
        self.params().length()
    }

    fn codebook_weight(&self) -> BigUint {
        let total: u64 = (0..self.params().codebook_size())
            .map(|m| self.encode(m).expect("in range").weight() as u64)
            .sum();
        BigUint::from(total)
    }

    fn encode_block(&self, message: u128, out: &mut Vec<u8>) {
        out.extend_from_slice(self.encode(message).expect("message fits the codebook").bits());
    }

    fn decode_block(&self, detected: &[u8]) -> u128 {
        self.decode_bits(detected)
    }
}

/// Total 1-bits over all `2^K` uncoded words, `K · 2^(K − 1)`.
pub fn uncoded_weight(info_bits: usize) -> BigUint {
    if info_bits == 0 {
        return BigUint::zero();
    }
    BigUint::from(info_bits) << (info_bits - 1)
}

pub(crate) fn bits_to_message(bits: &[u8]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | u128::from(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum SchemeKind {
    Uncoded,
    RlimEnumerative,
    RllLexicographic,
    RlimFullCodebook,
}

/// A scheme before normalization: which code, at which order and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub order: usize,
    pub mode: Mode,
}

impl SchemeConfig {
    pub fn uncoded() -> Self {
        Self {
            kind: SchemeKind::Uncoded,
            order: 0,
            mode: Mode::Enhanced,
        }
    }

    pub fn rlim(order: usize, mode: Mode) -> Self {
        Self {
            kind: SchemeKind::RlimEnumerative,
            order,
            mode,
        }
    }

    pub fn rll(order: usize, mode: Mode) -> Self {
        Self {
            kind: SchemeKind::RllLexicographic,
            order,
            mode,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            SchemeKind::Uncoded => "uncoded".to_string(),
            SchemeKind::RlimEnumerative => format!("RLIM_{}", self.order),
            SchemeKind::RllLexicographic => format!("RLL_{}", self.order),
            SchemeKind::RlimFullCodebook => format!("RLIM-full_{}", self.order),
        }
    }

    /// Builds the code for `info_bits` information bits per block.
    pub fn build_code(&self, info_bits: u32) -> Result<Arc<dyn BlockCode>> {
        if self.kind == SchemeKind::Uncoded {
            if info_bits == 0 || info_bits > 127 {
                return Err(Error::InvalidParameter(format!(
                    "uncoded block size must lie in 1..=127, got {info_bits}"
                )));
            }
            return Ok(Arc::new(Uncoded {
                info_bits: info_bits as usize,
            }));
        }
        let params = CodeParams::new(self.order, info_bits, self.mode)?;
        Ok(match self.kind {
            SchemeKind::RlimEnumerative => Arc::new(RlimCodec::new(params)?),
            SchemeKind::RllLexicographic => Arc::new(LexRllCodec::new(params)),
            SchemeKind::RlimFullCodebook => Arc::new(FullCodebook::build(params)?),
            SchemeKind::Uncoded => unreachable!(),
        })
    }
}

impl fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::Uncoded => f.write_str("uncoded"),
            SchemeKind::RlimEnumerative => write!(f, "rlim:{}:{}", self.order, self.mode),
            SchemeKind::RllLexicographic => write!(f, "rll:{}:{}", self.order, self.mode),
            SchemeKind::RlimFullCodebook => write!(f, "rlim-full:{}:{}", self.order, self.mode),
        }
    }
}

impl FromStr for SchemeConfig {
    type Err = Error;

    /// `uncoded`, or `rlim:<i>[:<E|N>]`, `rll:<i>[:<E|N>]`,
    /// `rlim-full:<i>[:<E|N>]`; the mode defaults to enhanced.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or_default();
        if head == "uncoded" {
            return match parts.next() {
                None => Ok(Self::uncoded()),
                Some(_) => Err(Error::InvalidParameter(format!("uncoded takes no arguments: {s:?}"))),
            };
        }
        let kind = match head {
            "rlim" => SchemeKind::RlimEnumerative,
            "rll" => SchemeKind::RllLexicographic,
            "rlim-full" => SchemeKind::RlimFullCodebook,
            other => {
                return Err(Error::InvalidParameter(format!("unknown scheme {other:?}")));
            }
        };
        let order = parts
            .next()
            .and_then(|o| o.parse::<usize>().ok())
            .filter(|&o| o >= 1)
            .ok_or_else(|| Error::InvalidParameter(format!("scheme {s:?} needs an order >= 1")))?;
        let mode = parts.next().map_or(Ok(Mode::Enhanced), str::parse)?;
        if parts.next().is_some() {
            return Err(Error::InvalidParameter(format!("trailing fields in scheme {s:?}")));
        }
        Ok(Self { kind, order, mode })
    }
}

/// Rounding of the normalized molecule count at exact halves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Rounding {
    #[default]
    HalfEven,
    HalfAwayFromZero,
}

impl FromStr for Rounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half-even" => Ok(Rounding::HalfEven),
            "half-away" => Ok(Rounding::HalfAwayFromZero),
            other => Err(Error::InvalidParameter(format!(
                "rounding must be half-even or half-away, got {other:?}"
            ))),
        }
    }
}

/// Rounds `num / den` to the nearest integer.
pub fn round_ratio(num: &BigUint, den: &BigUint, rounding: Rounding) -> BigUint {
    assert!(!den.is_zero(), "zero denominator");
    let (q, r) = num.div_rem(den);
    let twice = &r << 1u32;
    let up = match twice.cmp(den) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match rounding {
            Rounding::HalfEven => q.is_odd(),
            Rounding::HalfAwayFromZero => true,
        },
    };
    if up {
        q + BigUint::one()
    } else {
        q
    }
}

/// Parses a non-negative decimal such as `0.25` into an exact ratio.
pub fn parse_decimal(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::InvalidParameter(format!("not a non-negative decimal: {s:?}"));
    let s = s.trim();
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = whole
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}

pub fn ratio_to_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A scheme with its normalized signal interval and molecule count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSpec {
    pub name: String,
    pub config: SchemeConfig,
    pub code_params: Option<CodeParams>,
    /// `K_m`.
    pub info_bits: usize,
    /// `n_m`.
    pub block_len: usize,
    /// `W_m`.
    pub codebook_weight: BigUint,
    /// `W_{0,m} = K_m · 2^(K_m − 1)`.
    pub uncoded_weight: BigUint,
    /// `t_{s,m} = t_{s,0} · K_m / n_m`, exact.
    pub signal_interval: Ratio<u64>,
    /// `M_m = round(M_0 · W_{0,m} / W_m)`.
    pub molecules: u64,
}

/// Normalizes a scheme so that one coded block lasts as long as `K_m`
/// uncoded bits and its codebook spends about the uncoded molecule budget.
pub fn normalize(
    config: SchemeConfig,
    code: &dyn BlockCode,
    base_interval: Ratio<u64>,
    base_molecules: u64,
    rounding: Rounding,
) -> Result<SchemeSpec> {
    let info_bits = code.info_bits();
    let block_len = code.block_len();
    let codebook_weight = code.codebook_weight();
    if codebook_weight.is_zero() {
        return Err(Error::ZeroWeight);
    }
    let uncoded = uncoded_weight(info_bits);
    let molecules = round_ratio(
        &(BigUint::from(base_molecules) * &uncoded),
        &codebook_weight,
        rounding,
    )
    .to_u64()
    .ok_or_else(|| Error::InvalidParameter("normalized molecule count overflows u64".into()))?;
    let signal_interval = base_interval * Ratio::new(info_bits as u64, block_len as u64);
    let code_params = match config.kind {
        SchemeKind::Uncoded => None,
        _ => Some(CodeParams::new(config.order, info_bits as u32, config.mode)?),
    };
    Ok(SchemeSpec {
        name: config.name(),
        config,
        code_params,
        info_bits,
        block_len,
        codebook_weight,
        uncoded_weight: uncoded,
        signal_interval,
        molecules,
    })
}

/// A normalized scheme together with its code.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub spec: SchemeSpec,
    pub code: Arc<dyn BlockCode>,
}

impl Scheme {
    pub fn build(
        config: SchemeConfig,
        info_bits: u32,
        base_interval: Ratio<u64>,
        base_molecules: u64,
        rounding: Rounding,
    ) -> Result<Self> {
        let code = config.build_code(info_bits)?;
        let spec = normalize(config, code.as_ref(), base_interval, base_molecules, rounding)?;
        Ok(Self { spec, code })
    }
}
