//! Shared inputs for the criterion benchmarks.

use rand::Rng;

use rlim_core::oracle::FullCodebook;
use rlim_core::rng::{stream_rng, streams};
use rlim_core::{BitWord, CodeParams, Mode, RlimCodec};

/// Both realizations of one code with a fixed batch of random inputs.
pub struct Fixture {
    pub params: CodeParams,
    pub codec: RlimCodec,
    /// Absent above the materialization guard.
    pub full: Option<FullCodebook>,
    pub messages: Vec<u128>,
    pub codewords: Vec<BitWord>,
    /// Codewords with one to three flipped positions.
    pub noisy: Vec<Vec<u8>>,
}

impl Fixture {
    pub fn new(order: usize, info_bits: u32, mode: Mode, blocks: usize, seed: u64) -> Self {
        let params = CodeParams::new(order, info_bits, mode).expect("valid parameters");
        let codec = RlimCodec::new(params.clone()).expect("tables build");
        let full = FullCodebook::build(params.clone()).ok();
        let mut rng = stream_rng(seed, streams::BENCH);
        let messages: Vec<u128> = (0..blocks)
            .map(|_| rng.random_range(0..params.codebook_size()))
            .collect();
        let codewords: Vec<BitWord> = messages.iter().map(|&m| codec.encode(m).unwrap()).collect();
        let noisy = codewords
            .iter()
            .map(|w| {
                let mut bits = w.bits().to_vec();
                for _ in 0..rng.random_range(1..=3) {
                    let j = rng.random_range(0..bits.len());
                    bits[j] ^= 1;
                }
                bits
            })
            .collect();
        Self { params, codec, full, messages, codewords, noisy }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_inputs_decode() {
        let f = Fixture::new(3, 12, Mode::Enhanced, 64, 1);
        let full = f.full.as_ref().unwrap();
        for (m, w) in f.messages.iter().zip(&f.codewords) {
            assert_eq!(full.lookup(w), Some(*m));
        }
        for y in &f.noisy {
            assert_eq!(f.codec.decode_bits(y), full.decode_bits(y));
        }
        assert!(Fixture::new(3, 30, Mode::Enhanced, 4, 1).full.is_none());
    }
}
