//! Table-driven RLIM encoder and decoder.
//!
//! Codewords are `0^i ∘ u` with `u` an admissible internal word of length
//! `T`. The enhanced family is ordered by Hamming weight and then
//! lexicographically (0 before 1, leftmost bit most significant). The
//! selected codebook is the rank interval `[δ, 2^k + δ)`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::enumeration::{selection_size, CodeParams, CountingTables, PrefixState};
use crate::error::{Error, Result};
use crate::word::BitWord;

#[derive(Debug, Clone)]
pub struct RlimCodec {
    params: CodeParams,
    tables: Arc<CountingTables>,
    /// Exclusive upper end of the selected rank interval, `2^k + δ`.
    rank_end: BigUint,
}

/// One iteration of the projection decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionStep {
    pub word: BitWord,
    /// Enhanced-family rank; `None` for the all-zero word, which is never ranked.
    pub rank: Option<BigUint>,
    pub accepted: bool,
}

/// Full receiver output for one detected block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub corrected: BitWord,
    pub steps: Vec<ProjectionStep>,
    pub message: u128,
}

impl RlimCodec {
    pub fn new(params: CodeParams) -> Result<Self> {
        let tables = CountingTables::build(params.order(), params.internal_len())?;
        Self::with_tables(params, Arc::new(tables))
    }

    /// Reuses tables built (or loaded) elsewhere.
    pub fn with_tables(params: CodeParams, tables: Arc<CountingTables>) -> Result<Self> {
        if tables.order() != params.order() || tables.internal_len() != params.internal_len() {
            return Err(Error::InvalidParameter(format!(
                "tables for (i = {}, T = {}) do not match parameters (i = {}, T = {})",
                tables.order(),
                tables.internal_len(),
                params.order(),
                params.internal_len()
            )));
        }
        let rank_end = selection_size(params.info_bits(), params.mode());
        Ok(Self {
            params,
            tables,
            rank_end,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn tables(&self) -> &Arc<CountingTables> {
        &self.tables
    }

    /// Rank of `word` in the enhanced family.
    pub fn rank_word(&self, word: &BitWord) -> Result<BigUint> {
        self.check_length(word)?;
        word.check_admissible(self.params.order())?;
        Ok(self.rank_admissible(word))
    }

    fn rank_admissible(&self, word: &BitWord) -> BigUint {
        let internal = &word.bits()[self.params.order()..];
        let weight = internal.iter().filter(|&&b| b == 1).count();
        let mut state = PrefixState::new(self.params.order(), internal.len(), weight);
        let mut rank = self.tables.layer_offset(weight).clone();
        for &bit in internal {
            if bit == 1 {
                rank += self.tables.count_with_zero(&state);
                state.push_one();
            } else {
                state.push_zero();
            }
        }
        rank
    }

    /// Word of enhanced-family rank `rank`.
    pub fn unrank(&self, rank: &BigUint) -> Result<BitWord> {
        let (weight, mut within) = self.tables.locate_layer(rank)?;
        let order = self.params.order();
        let len = self.params.internal_len();
        let mut bits = vec![0u8; order + len];
        let mut state = PrefixState::new(order, len, weight);
        for bit in bits.iter_mut().skip(order) {
            let zero_branch = self.tables.count_with_zero(&state);
            if within < *zero_branch {
                state.push_zero();
            } else {
                within -= zero_branch;
                *bit = 1;
                state.push_one();
            }
        }
        debug_assert!(within.is_zero());
        Ok(BitWord::new(bits).expect("bits are binary"))
    }

    /// Codeword for message index `message`.
    pub fn encode(&self, message: u128) -> Result<BitWord> {
        if message >= self.params.codebook_size() {
            return Err(Error::MessageOutOfRange {
                message,
                info_bits: self.params.info_bits(),
            });
        }
        self.unrank(&BigUint::from(message + u128::from(self.params.shift())))
    }

    /// Message index of a selected codeword, or `None` if `rank` lies outside
    /// the selected interval.
    pub fn message_of_rank(&self, rank: &BigUint) -> Option<u128> {
        let shift = u32::from(self.params.shift());
        if *rank < BigUint::from(shift) || *rank >= self.rank_end {
            return None;
        }
        (rank - shift).to_u128()
    }

    /// Post-detection correction, see [`correct`].
    pub fn correct(&self, detected: &BitWord) -> Result<BitWord> {
        self.check_length(detected)?;
        Ok(correct(self.params.order(), detected))
    }

    /// Projection decoding of a corrected word.
    pub fn project_decode(&self, corrected: &BitWord) -> Result<u128> {
        self.project_decode_traced(corrected).map(|(m, _)| m)
    }

    /// Projection decoding that also returns every tested word.
    pub fn project_decode_traced(&self, corrected: &BitWord) -> Result<(u128, Vec<ProjectionStep>)> {
        self.check_length(corrected)?;
        corrected.check_admissible(self.params.order())?;
        let mut word = corrected.clone();
        let mut steps = Vec::new();
        loop {
            let Some(last) = word.rightmost_one() else {
                steps.push(ProjectionStep {
                    word,
                    rank: None,
                    accepted: true,
                });
                return Ok((0, steps));
            };
            let rank = self.rank_admissible(&word);
            if let Some(message) = self.message_of_rank(&rank) {
                steps.push(ProjectionStep {
                    word,
                    rank: Some(rank),
                    accepted: true,
                });
                return Ok((message, steps));
            }
            let next = {
                let mut w = word.clone();
                w.set(last, false);
                w
            };
            steps.push(ProjectionStep {
                word,
                rank: Some(rank),
                accepted: false,
            });
            word = next;
        }
    }

    /// Correction followed by projection decoding.
    pub fn decode(&self, detected: &BitWord) -> Result<Decoded> {
        let corrected = self.correct(detected)?;
        let (message, steps) = self.project_decode_traced(&corrected)?;
        Ok(Decoded {
            corrected,
            steps,
            message,
        })
    }

    /// Decodes a detected block given as raw bits, skipping the trace.
    pub fn decode_bits(&self, detected: &[u8]) -> u128 {
        debug_assert_eq!(detected.len(), self.params.length());
        let mut word = BitWord::new(correct_bits(self.params.order(), detected))
            .expect("corrected bits are binary");
        while let Some(last) = word.rightmost_one() {
            let rank = self.rank_admissible(&word);
            if let Some(message) = self.message_of_rank(&rank) {
                return message;
            }
            word.set(last, false);
        }
        0
    }

    /// Total number of 1-bits over the selected codebook, computed from the
    /// layer sizes.
    pub fn selected_codebook_weight(&self) -> BigUint {
        // Rank 0 is the all-zero word, so the non-enhanced interval [1, 2^k]
        // has the same total weight as [0, 2^k + 1).
        let mut remaining = self.rank_end.clone();
        let mut total = BigUint::zero();
        for weight in 0..=self.tables.max_weight() {
            if remaining.is_zero() {
                break;
            }
            let size = self.tables.layer_size(weight);
            let take = if remaining < *size { remaining.clone() } else { size.clone() };
            total += &take * weight;
            remaining -= take;
        }
        total
    }

    fn check_length(&self, word: &BitWord) -> Result<()> {
        if word.len() != self.params.length() {
            return Err(Error::LengthMismatch {
                expected: self.params.length(),
                actual: word.len(),
            });
        }
        Ok(())
    }
}

/// Maps a detected word onto the admissible family by forcing the leading
/// `order` zeros and keeping the earliest feasible 1-bits.
pub fn correct(order: usize, detected: &BitWord) -> BitWord {
    BitWord::new(correct_bits(order, detected.bits())).expect("corrected bits are binary")
}

pub(crate) fn correct_bits(order: usize, detected: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; detected.len()];
    let mut skip = order;
    for (z, &y) in out.iter_mut().zip(detected) {
        if skip > 0 {
            skip -= 1;
        } else if y == 1 {
            *z = 1;
            skip = order;
        }
    }
    out
}
