//! Explicitly materialized codebooks.
//!
//! These are the exponential-storage realizations: they exist as test
//! oracles and as the full-codebook baseline for storage and runtime
//! comparisons.

use num_bigint::BigUint;

use crate::enumeration::CodeParams;
use crate::error::{Error, Result};
use crate::word::{check_run_length, BitWord};

/// Default materialization limit on the information dimension.
pub const DEFAULT_SIZE_GUARD: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodebookOrder {
    /// Hamming weight first, lexicographic within each weight.
    WeightThenLex,
    /// Recursive generation order of the family, which is lexicographic.
    LexGeneration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub params: CodeParams,
    pub order: CodebookOrder,
    pub words: Vec<BitWord>,
}

impl Codebook {
    pub fn total_weight(&self) -> u64 {
        self.words.iter().map(|w| w.weight() as u64).sum()
    }
}

/// Internal words of the `(order, ∞)`-RLL family of length `len`, packed
/// MSB-first, in recursive generation order: `0 ∘ C(t − 1)` then
/// `1 0^i ∘ C(t − i − 1)`, with the short base cases listed as `0^t` followed
/// by the single 1-bit moving leftward.
pub fn generate_family(order: usize, len: usize) -> Vec<u128> {
    assert!(len <= 128, "length {len} exceeds 128 bits");
    let mut out = Vec::new();
    generate_into(order, len, 0, &mut out);
    out
}

fn generate_into(order: usize, len: usize, prefix: u128, out: &mut Vec<u128>) {
    if len == 0 {
        out.push(prefix);
        return;
    }
    if len <= order + 1 {
        let base = prefix << len;
        out.push(base);
        // 0^(t − r) 1 0^(r − 1) for r = 1, …, t: the 1 moves leftward.
        for r in 1..=len {
            out.push(base | (1u128 << (r - 1)));
        }
        return;
    }
    generate_into(order, len - 1, prefix << 1, out);
    let head = ((prefix << 1) | 1) << order;
    generate_into(order, len - order - 1, head, out);
}

/// Materializes the selected codebook under the requested ordering, refusing
/// information dimensions above [`DEFAULT_SIZE_GUARD`].
pub fn oracle_codebook(params: &CodeParams, order: CodebookOrder) -> Result<Codebook> {
    oracle_codebook_with_limit(params, order, DEFAULT_SIZE_GUARD)
}

pub fn oracle_codebook_with_limit(
    params: &CodeParams,
    order: CodebookOrder,
    limit: u32,
) -> Result<Codebook> {
    let packed = selected_packed(params, order, limit)?;
    let words = packed
        .into_iter()
        .map(|v| BitWord::from_u128(v, params.length()))
        .collect();
    Ok(Codebook {
        params: params.clone(),
        order,
        words,
    })
}

fn selected_packed(params: &CodeParams, order: CodebookOrder, limit: u32) -> Result<Vec<u128>> {
    if params.info_bits() > limit {
        return Err(Error::SizeGuard {
            info_bits: params.info_bits(),
            limit,
        });
    }
    if params.length() > 128 {
        return Err(Error::InvalidParameter(format!(
            "materialized codewords are limited to 128 bits, length is {}",
            params.length()
        )));
    }
    // The leading 0^i does not change numeric order, so internal words stand
    // in for the full codewords.
    let mut family = generate_family(params.order(), params.internal_len());
    if order == CodebookOrder::WeightThenLex {
        family.sort_by_key(|&v| (v.count_ones(), v));
    }
    let start = usize::from(params.shift());
    let end = start + (1usize << params.info_bits());
    family.truncate(end);
    family.drain(..start);
    Ok(family)
}

/// Full-codebook RLIM realization: every selected codeword is stored and
/// decoding searches the stored list.
#[derive(Debug, Clone)]
pub struct FullCodebook {
    params: CodeParams,
    /// Selected codewords in weight-then-lex order, packed MSB-first.
    words: Vec<u128>,
}

impl FullCodebook {
    pub fn build(params: CodeParams) -> Result<Self> {
        Self::build_with_limit(params, DEFAULT_SIZE_GUARD)
    }

    pub fn build_with_limit(params: CodeParams, limit: u32) -> Result<Self> {
        let words = selected_packed(&params, CodebookOrder::WeightThenLex, limit)?;
        Ok(Self { params, words })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// Storage of the codeword list, `n · 2^k` bits.
    pub fn stored_bits(&self) -> BigUint {
        full_codebook_bits(&self.params)
    }

    pub fn encode(&self, message: u128) -> Result<BitWord> {
        let word = usize::try_from(message)
            .ok()
            .and_then(|m| self.words.get(m))
            .ok_or(Error::MessageOutOfRange {
                message,
                info_bits: self.params.info_bits(),
            })?;
        Ok(BitWord::from_u128(*word, self.params.length()))
    }

    /// Position of a word in the stored list, by binary search on
    /// `(weight, value)`.
    pub fn lookup(&self, word: &BitWord) -> Option<u128> {
        let value = word.to_u128();
        let key = (value.count_ones(), value);
        self.words
            .binary_search_by_key(&key, |&v| (v.count_ones(), v))
            .ok()
            .map(|idx| idx as u128)
    }

    /// Correction followed by projection decoding, on raw detected bits.
    pub fn decode_bits(&self, detected: &[u8]) -> u128 {
        let corrected = crate::codec::correct_bits(self.params.order(), detected);
        let word = BitWord::new(corrected).expect("corrected bits are binary");
        self.project_decode(&word).expect("corrected words are admissible")
    }

    /// Projection decoding against the stored list.
    pub fn project_decode(&self, corrected: &BitWord) -> Result<u128> {
        if corrected.len() != self.params.length() {
            return Err(Error::LengthMismatch {
                expected: self.params.length(),
                actual: corrected.len(),
            });
        }
        corrected.check_admissible(self.params.order())?;
        let mut value = corrected.to_u128();
        while value != 0 {
            let key = (value.count_ones(), value);
            if let Ok(idx) = self.words.binary_search_by_key(&key, |&v| (v.count_ones(), v)) {
                return Ok(idx as u128);
            }
            // Clears the rightmost 1-bit.
            value &= value - 1;
        }
        Ok(0)
    }
}

/// `n · 2^k`, the storage of a full codebook.
pub fn full_codebook_bits(params: &CodeParams) -> BigUint {
    BigUint::from(params.length()) << params.info_bits()
}

/// True when `bits` is an admissible internal word for `order`.
pub fn is_rll(order: usize, bits: &[u8]) -> bool {
    check_run_length(bits, order).is_ok()
}
