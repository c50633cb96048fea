//! Lexicographic `(i, ∞)`-RLL baseline.
//!
//! The codebook holds the first `2^k + δ` words `0^i ∘ u` of the family in
//! plain lexicographic (generation) order, dropping the all-zero word in
//! non-enhanced mode. It uses the same length, correction and
//! projection conventions as the RLIM code, so the two differ only in which
//! words are selected.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::codec::correct_bits;
use crate::enumeration::{selection_size, CodeParams};
use crate::error::{Error, Result};
use crate::word::BitWord;

#[derive(Debug, Clone)]
pub struct LexRllCodec {
    params: CodeParams,
    /// `G(ℓ, r)`: admissible length-`ℓ` words starting with `min(r, ℓ)` zeros.
    counts: Vec<BigUint>,
    /// `S(ℓ, r)`: total weight of the words counted by `G(ℓ, r)`.
    weight_sums: Vec<BigUint>,
    rank_end: BigUint,
}

impl LexRllCodec {
    pub fn new(params: CodeParams) -> Self {
        let order = params.order();
        let len = params.internal_len();
        let depth = order + 1;
        let mut counts = vec![BigUint::zero(); (len + 1) * depth];
        let mut weight_sums = vec![BigUint::zero(); (len + 1) * depth];
        for c in &mut counts[..depth] {
            *c = BigUint::from(1u32);
        }
        for l in 1..=len {
            let prev = (l - 1) * depth;
            let cur = l * depth;
            // Free position: a 0 keeps the state, a 1 forces the next i zeros
            // and adds one to the weight of every completion.
            counts[cur] = &counts[prev] + &counts[prev + order];
            weight_sums[cur] = &weight_sums[prev] + &weight_sums[prev + order] + &counts[prev + order];
            for r in 1..depth {
                counts[cur + r] = counts[prev + r - 1].clone();
                weight_sums[cur + r] = weight_sums[prev + r - 1].clone();
            }
        }
        let rank_end = selection_size(params.info_bits(), params.mode());
        Self {
            params,
            counts,
            weight_sums,
            rank_end,
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    fn count(&self, len: usize, forced: usize) -> &BigUint {
        &self.counts[len * (self.params.order() + 1) + forced]
    }

    fn weight_sum(&self, len: usize, forced: usize) -> &BigUint {
        &self.weight_sums[len * (self.params.order() + 1) + forced]
    }

    /// Lexicographic rank of an admissible word.
    pub fn rank_word(&self, word: &BitWord) -> Result<BigUint> {
        if word.len() != self.params.length() {
            return Err(Error::LengthMismatch {
                expected: self.params.length(),
                actual: word.len(),
            });
        }
        word.check_admissible(self.params.order())?;
        Ok(self.rank_bits(word.bits()))
    }

    fn rank_bits(&self, bits: &[u8]) -> BigUint {
        let order = self.params.order();
        let internal = &bits[order..];
        let mut rank = BigUint::zero();
        let mut forced = 0usize;
        for (j, &bit) in internal.iter().enumerate() {
            let remaining = internal.len() - j - 1;
            if bit == 1 {
                rank += self.count(remaining, forced.saturating_sub(1));
                forced = order;
            } else {
                forced = forced.saturating_sub(1);
            }
        }
        rank
    }

    pub fn unrank(&self, rank: &BigUint) -> Result<BitWord> {
        let order = self.params.order();
        let len = self.params.internal_len();
        let total = self.count(len, 0);
        if rank >= total {
            return Err(Error::RankOutOfRange {
                rank: rank.clone(),
                size: total.clone(),
            });
        }
        let mut within = rank.clone();
        let mut bits = vec![0u8; order + len];
        let mut forced = 0usize;
        for j in 0..len {
            let zero_branch = self.count(len - j - 1, forced.saturating_sub(1));
            if within < *zero_branch {
                forced = forced.saturating_sub(1);
            } else {
                within -= zero_branch;
                bits[order + j] = 1;
                forced = order;
            }
        }
        Ok(BitWord::new(bits).expect("bits are binary"))
    }

    pub fn encode(&self, message: u128) -> Result<BitWord> {
        if message >= self.params.codebook_size() {
            return Err(Error::MessageOutOfRange {
                message,
                info_bits: self.params.info_bits(),
            });
        }
        self.unrank(&BigUint::from(message + u128::from(self.params.shift())))
    }

    fn message_of_rank(&self, rank: &BigUint) -> Option<u128> {
        let shift = u32::from(self.params.shift());
        if *rank < BigUint::from(shift) || *rank >= self.rank_end {
            return None;
        }
        (rank - shift).to_u128()
    }

    /// Correction and projection decoding in lexicographic rank.
    pub fn decode_bits(&self, detected: &[u8]) -> u128 {
        debug_assert_eq!(detected.len(), self.params.length());
        let mut bits = correct_bits(self.params.order(), detected);
        while let Some(last) = bits.iter().rposition(|&b| b == 1) {
            if let Some(message) = self.message_of_rank(&self.rank_bits(&bits)) {
                return message;
            }
            bits[last] = 0;
        }
        0
    }

    /// Total number of 1-bits over the selected codebook.
    pub fn selected_codebook_weight(&self) -> BigUint {
        // Lexicographic ranks [0, 2^k + δ); rank 0 is the all-zero word.
        self.prefix_weight(&self.rank_end)
    }

    /// Total weight of the words with lexicographic rank below `end`.
    fn prefix_weight(&self, end: &BigUint) -> BigUint {
        let order = self.params.order();
        let len = self.params.internal_len();
        if end >= self.count(len, 0) {
            return self.weight_sum(len, 0).clone();
        }
        // Walk the path to the word of rank `end`; every 0-branch passed over
        // is a subtree lying wholly below it.
        let mut within = end.clone();
        let mut total = BigUint::zero();
        let mut prefix_weight = 0usize;
        let mut forced = 0usize;
        for j in 0..len {
            let rest = len - j - 1;
            let next_forced = forced.saturating_sub(1);
            let zero_branch = self.count(rest, next_forced);
            if within < *zero_branch {
                forced = next_forced;
            } else {
                total += zero_branch * prefix_weight + self.weight_sum(rest, next_forced);
                within -= zero_branch;
                prefix_weight += 1;
                forced = order;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::Mode;
    use crate::oracle::{oracle_codebook, CodebookOrder};

    #[test]
    fn matches_lex_generation_codebook() {
        for order in 1..=4 {
            for k in 1..=10 {
                for mode in [Mode::Enhanced, Mode::NonEnhanced] {
                    let p = CodeParams::new(order, k, mode).unwrap();
                    let cb = oracle_codebook(&p, CodebookOrder::LexGeneration).unwrap();
                    let codec = LexRllCodec::new(p);
                    for (m, w) in cb.words.iter().enumerate() {
                        assert_eq!(&codec.encode(m as u128).unwrap(), w);
                        assert_eq!(codec.decode_bits(w.bits()), m as u128);
                        assert_eq!(
                            codec.rank_word(w).unwrap(),
                            BigUint::from(m as u128 + u128::from(mode.shift()))
                        );
                    }
                    assert_eq!(codec.selected_codebook_weight(), BigUint::from(cb.total_weight()));
                }
            }
        }
    }

    #[test]
    fn weight_covers_whole_family_when_selection_is_full() {
        // k = 2 at i = 2 uses all four words of C_2(3).
        let p = CodeParams::new(2, 2, Mode::Enhanced).unwrap();
        let codec = LexRllCodec::new(p);
        assert_eq!(codec.selected_codebook_weight(), BigUint::from(3u32));
        assert!(codec.unrank(&BigUint::from(4u32)).is_err());
    }

    #[test]
    fn projection_lands_in_codebook() {
        let p = CodeParams::new(3, 8, Mode::NonEnhanced).unwrap();
        let codec = LexRllCodec::new(p.clone());
        for v in (0u64..1 << p.length()).step_by(37) {
            let y = BitWord::from_u128(v.into(), p.length());
            assert!(codec.decode_bits(y.bits()) < p.codebook_size());
        }
    }
}
