//! Counting tables and cardinalities for the `(i, ∞)`-RLL family.
//!
//! `F(ℓ, s, r)` counts the length-`ℓ` words of weight `s` in which successive
//! 1-bits are at least `i` zeros apart and whose first `min(r, ℓ)` bits are
//! zero. Layer sizes `N(w) = F(T, w, 0)` and the cumulative offsets
//! `Γ(w) = N(0) + … + N(w − 1)` turn a rank inside one weight layer into a
//! rank in the weight-then-lexicographic order of the whole family.

use std::collections::VecDeque;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::MAX_INFO_BITS;

/// Enhanced mode keeps the all-zero codeword; non-enhanced mode drops it and
/// shifts every rank by one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    Enhanced,
    NonEnhanced,
}

impl Mode {
    /// Rank shift between the message index and the enhanced-family rank.
    pub fn shift(self) -> u8 {
        match self {
            Mode::Enhanced => 0,
            Mode::NonEnhanced => 1,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Mode::Enhanced => "E",
            Mode::NonEnhanced => "N",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" | "e" | "enhanced" => Ok(Mode::Enhanced),
            "N" | "n" | "non-enhanced" => Ok(Mode::NonEnhanced),
            other => Err(Error::InvalidParameter(format!(
                "mode must be E or N, got {other:?}"
            ))),
        }
    }
}

/// Resolved parameters of one RLIM code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeParams {
    order: usize,
    info_bits: u32,
    mode: Mode,
    length: usize,
}

impl CodeParams {
    /// Parameters at the shortest admissible length for `mode`.
    pub fn new(order: usize, info_bits: u32, mode: Mode) -> Result<Self> {
        validate_order_and_bits(order, info_bits)?;
        let length = shortest_length(order, info_bits, mode);
        Ok(Self {
            order,
            info_bits,
            mode,
            length,
        })
    }

    /// Parameters at an explicit codeword length, which must hold at least
    /// `2^k + δ` admissible words.
    pub fn with_length(order: usize, info_bits: u32, mode: Mode, length: usize) -> Result<Self> {
        validate_order_and_bits(order, info_bits)?;
        if length < order + 1 {
            return Err(Error::InvalidParameter(format!(
                "length {length} is shorter than order + 1 = {}",
                order + 1
            )));
        }
        let needed = selection_size(info_bits, mode);
        let available = family_size(order, length - order);
        if available < needed {
            return Err(Error::InvalidParameter(format!(
                "length {length} holds only {available} admissible words, {needed} required"
            )));
        }
        Ok(Self {
            order,
            info_bits,
            mode,
            length,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn info_bits(&self) -> u32 {
        self.info_bits
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Codeword length `n`.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Internal length `T = n − i`.
    pub fn internal_len(&self) -> usize {
        self.length - self.order
    }

    pub fn shift(&self) -> u8 {
        self.mode.shift()
    }

    /// Number of codewords, `2^k`.
    pub fn codebook_size(&self) -> u128 {
        1u128 << self.info_bits
    }
}

fn validate_order_and_bits(order: usize, info_bits: u32) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if info_bits == 0 || info_bits > MAX_INFO_BITS {
        return Err(Error::InvalidParameter(format!(
            "information bits must lie in 1..={MAX_INFO_BITS}, got {info_bits}"
        )));
    }
    Ok(())
}

/// `2^k + δ`, the number of enhanced-family ranks a selection must cover.
pub(crate) fn selection_size(info_bits: u32, mode: Mode) -> BigUint {
    (BigUint::one() << info_bits) + BigUint::from(mode.shift())
}

/// Number of `(i, ∞)`-RLL words of length `len`.
pub fn family_size(order: usize, len: usize) -> BigUint {
    assert!(order >= 1, "order must be at least 1");
    if len <= order + 1 {
        return BigUint::from(len + 1);
    }
    // c(t) = c(t − 1) + c(t − i − 1), seeded with c(t) = t + 1 for t ≤ i + 1.
    let mut window: VecDeque<BigUint> = (0..=order + 1).map(BigUint::from).map(|c| c + 1u32).collect();
    for _ in order + 2..=len {
        let next = window.back().unwrap() + &window[1];
        window.pop_front();
        window.push_back(next);
    }
    window.pop_back().unwrap()
}

/// Smallest `n ≥ i + 1` whose family holds at least `2^k + δ` words.
pub fn shortest_length(order: usize, info_bits: u32, mode: Mode) -> usize {
    assert!(order >= 1, "order must be at least 1");
    let needed = selection_size(info_bits, mode);
    // window[j] = c(t − order − 1 + j), with c(negative) never read.
    let mut window: VecDeque<BigUint> = VecDeque::with_capacity(order + 2);
    let mut t = 0usize;
    loop {
        let count = if t <= order + 1 {
            BigUint::from(t + 1)
        } else {
            window.back().unwrap() + &window[1]
        };
        if t >= 1 && count >= needed {
            return t + order;
        }
        if window.len() == order + 2 {
            window.pop_front();
        }
        window.push_back(count);
        t += 1;
    }
}

/// State of a partially consumed internal word during ranking or unranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixState {
    order: usize,
    /// Bits left to place, `ℓ`.
    pub remaining_len: usize,
    /// 1-bits left to place, `s`.
    pub remaining_weight: usize,
    /// Zeros the suffix must start with, `r`.
    pub forced_zeros: usize,
    /// 1-bits in the prefix, `h(q)`.
    pub consumed_weight: usize,
    /// Zeros since the last 1-bit of the prefix, `z(q)`.
    pub trailing_zeros: usize,
}

impl PrefixState {
    pub fn new(order: usize, len: usize, weight: usize) -> Self {
        Self {
            order,
            remaining_len: len,
            remaining_weight: weight,
            forced_zeros: 0,
            consumed_weight: 0,
            trailing_zeros: 0,
        }
    }

    pub fn push_zero(&mut self) {
        debug_assert!(self.remaining_len > 0);
        self.remaining_len -= 1;
        self.trailing_zeros += 1;
        self.forced_zeros = self.forced_zeros.saturating_sub(1);
    }

    pub fn push_one(&mut self) {
        debug_assert!(self.remaining_len > 0 && self.remaining_weight > 0);
        debug_assert_eq!(self.forced_zeros, 0, "1-bit placed inside a forced-zero run");
        self.remaining_len -= 1;
        self.remaining_weight -= 1;
        self.consumed_weight += 1;
        self.trailing_zeros = 0;
        self.forced_zeros = self.order;
    }
}

/// Immutable counting tables for one `(i, T)` pair.
#[derive(Clone, PartialEq, Eq)]
pub struct CountingTables {
    order: usize,
    internal_len: usize,
    /// Dense `(T + 1) × (T + 1) × (i + 1)` array, row-major in `(ℓ, s, r)`.
    counts: Vec<BigUint>,
    layer_sizes: Vec<BigUint>,
    layer_offsets: Vec<BigUint>,
}

impl fmt::Debug for CountingTables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CountingTables")
            .field("order", &self.order)
            .field("internal_len", &self.internal_len)
            .field("layer_sizes", &self.layer_sizes)
            .finish_non_exhaustive()
    }
}

const CONTAINER_MAGIC: &[u8; 8] = b"RLIMTAB\0";
const CONTAINER_VERSION: u16 = 1;
const CONTAINER_MAX_LEN: u32 = 1 << 14;

impl CountingTables {
    pub fn build(order: usize, internal_len: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        if internal_len == 0 {
            return Err(Error::InvalidParameter("internal length must be at least 1".into()));
        }
        let dim = internal_len + 1;
        let depth = order + 1;
        let mut counts = vec![BigUint::zero(); dim * dim * depth];
        let at = |l: usize, s: usize, r: usize| (l * dim + s) * depth + r;
        for r in 0..depth {
            counts[at(0, 0, r)] = BigUint::one();
        }
        for l in 1..dim {
            // Weights above ⌈ℓ / (i + 1)⌉ cannot occur and stay zero.
            let max_s = l.div_ceil(depth).min(internal_len);
            for s in 0..=max_s {
                let mut free = counts[at(l - 1, s, 0)].clone();
                if s > 0 {
                    free += &counts[at(l - 1, s - 1, order)];
                }
                for r in 1..depth {
                    counts[at(l, s, r)] = counts[at(l - 1, s, r - 1)].clone();
                }
                counts[at(l, s, 0)] = free;
            }
        }
        Ok(Self::with_counts(order, internal_len, counts))
    }

    fn with_counts(order: usize, internal_len: usize, counts: Vec<BigUint>) -> Self {
        let dim = internal_len + 1;
        let depth = order + 1;
        let max_weight = internal_len.div_ceil(depth);
        let layer_sizes: Vec<BigUint> = (0..=max_weight)
            .map(|w| counts[(internal_len * dim + w) * depth].clone())
            .collect();
        let mut layer_offsets = Vec::with_capacity(max_weight + 2);
        layer_offsets.push(BigUint::zero());
        for size in &layer_sizes {
            let next = layer_offsets.last().unwrap() + size;
            layer_offsets.push(next);
        }
        Self {
            order,
            internal_len,
            counts,
            layer_sizes,
            layer_offsets,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn internal_len(&self) -> usize {
        self.internal_len
    }

    /// `F(ℓ, s, r)`; zero for weights beyond the table.
    pub fn count(&self, len: usize, weight: usize, forced: usize) -> &BigUint {
        assert!(len <= self.internal_len, "length {len} beyond table");
        assert!(forced <= self.order, "forced zeros {forced} beyond order");
        if weight > self.internal_len {
            return &BigUint::ZERO;
        }
        let dim = self.internal_len + 1;
        &self.counts[(len * dim + weight) * (self.order + 1) + forced]
    }

    /// Largest weight with a non-empty layer, `⌈T / (i + 1)⌉`.
    pub fn max_weight(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// `N(w)`, the number of admissible internal words of weight `w`.
    pub fn layer_size(&self, weight: usize) -> &BigUint {
        self.layer_sizes.get(weight).unwrap_or(&BigUint::ZERO)
    }

    pub fn layer_sizes(&self) -> &[BigUint] {
        &self.layer_sizes
    }

    /// `Γ(w)` for `w` in `0..=max_weight + 1`.
    pub fn layer_offset(&self, weight: usize) -> &BigUint {
        &self.layer_offsets[weight.min(self.layer_offsets.len() - 1)]
    }

    pub fn layer_offsets(&self) -> &[BigUint] {
        &self.layer_offsets
    }

    /// Size of the whole family, `Γ(max_weight + 1)`.
    pub fn family_size(&self) -> &BigUint {
        self.layer_offsets.last().unwrap()
    }

    /// Completions of the current prefix whose next bit is 0.
    pub fn count_with_zero(&self, state: &PrefixState) -> &BigUint {
        if state.remaining_len == 0 {
            return &BigUint::ZERO;
        }
        self.count(
            state.remaining_len - 1,
            state.remaining_weight,
            state.forced_zeros.saturating_sub(1),
        )
    }

    /// Splits an enhanced-family rank into its weight layer and the rank
    /// inside that layer.
    pub fn locate_layer(&self, rank: &BigUint) -> Result<(usize, BigUint)> {
        if rank >= self.family_size() {
            return Err(Error::RankOutOfRange {
                rank: rank.clone(),
                size: self.family_size().clone(),
            });
        }
        let layer = self
            .layer_offsets
            .windows(2)
            .position(|pair| rank < &pair[1])
            .expect("rank below family size lies in some layer");
        Ok((layer, rank - &self.layer_offsets[layer]))
    }

    /// Number of stored integers (counts, layer sizes and offsets).
    pub fn stored_entries(&self) -> usize {
        self.counts.len() + self.layer_sizes.len() + self.layer_offsets.len()
    }

    /// Sum of minimal bit lengths over every stored integer. A zero entry
    /// still occupies one bit.
    pub fn stored_bits(&self) -> u64 {
        self.counts
            .iter()
            .chain(&self.layer_sizes)
            .chain(&self.layer_offsets)
            .map(|c| c.bits().max(1))
            .sum()
    }

    /// Writes the binary container: magic, version, `i`, `T`, then every
    /// `F` entry in `(ℓ, s, r)` row-major order as a big-endian `u32` byte
    /// count followed by the big-endian magnitude.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(CONTAINER_MAGIC)?;
        out.write_all(&CONTAINER_VERSION.to_be_bytes())?;
        out.write_all(&u32_field(self.order)?.to_be_bytes())?;
        out.write_all(&u32_field(self.internal_len)?.to_be_bytes())?;
        for count in &self.counts {
            let bytes = if count.is_zero() {
                Vec::new()
            } else {
                count.to_bytes_be()
            };
            out.write_all(&u32_field(bytes.len())?.to_be_bytes())?;
            out.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Reads a container written by [`write_to`](Self::write_to) and checks
    /// every entry against the table recurrences.
    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CONTAINER_MAGIC {
            return Err(Error::Container("bad magic".into()));
        }
        let version = u16::from_be_bytes(read_array(&mut input)?);
        if version != CONTAINER_VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        let order = u32::from_be_bytes(read_array(&mut input)?);
        let internal_len = u32::from_be_bytes(read_array(&mut input)?);
        if order == 0 || internal_len == 0 || order > CONTAINER_MAX_LEN || internal_len > CONTAINER_MAX_LEN {
            return Err(Error::Container(format!(
                "implausible dimensions i = {order}, T = {internal_len}"
            )));
        }
        let (order, internal_len) = (order as usize, internal_len as usize);
        let entries = (internal_len + 1) * (internal_len + 1) * (order + 1);
        let mut counts = Vec::with_capacity(entries);
        for _ in 0..entries {
            let len = u32::from_be_bytes(read_array(&mut input)?) as usize;
            if len > internal_len / 8 + 1 {
                return Err(Error::Container(format!("entry of {len} bytes exceeds 2^T")));
            }
            let mut bytes = vec![0u8; len];
            input.read_exact(&mut bytes)?;
            counts.push(BigUint::from_bytes_be(&bytes));
        }
        let tables = Self::with_counts(order, internal_len, counts);
        tables.verify_recurrences()?;
        Ok(tables)
    }

    fn verify_recurrences(&self) -> Result<()> {
        let (i, t) = (self.order, self.internal_len);
        for r in 0..=i {
            for s in 0..=t {
                let expected = u32::from(s == 0);
                if *self.count(0, s, r) != BigUint::from(expected) {
                    return Err(Error::Container(format!("bad base entry F(0, {s}, {r})")));
                }
            }
        }
        for l in 1..=t {
            for s in 0..=t {
                let mut free = self.count(l - 1, s, 0).clone();
                if s > 0 {
                    free += self.count(l - 1, s - 1, i);
                }
                if *self.count(l, s, 0) != free {
                    return Err(Error::Container(format!("bad entry F({l}, {s}, 0)")));
                }
                for r in 1..=i {
                    if self.count(l, s, r) != self.count(l - 1, s, r - 1) {
                        return Err(Error::Container(format!("bad entry F({l}, {s}, {r})")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn u32_field(value: usize) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::Container(format!("{value} does not fit in u32")))
}

fn read_array<R: Read, const N: usize>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}
