//! Fixed-length binary words.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A fixed-length binary word, stored one bit per byte, leftmost bit first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    bits: Vec<u8>,
}

impl BitWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::BitString(format!("value {} at bit {pos}", bits[pos])));
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    /// Builds a word from the low `len` bits of `value`, most significant first.
    pub fn from_u128(value: u128, len: usize) -> Self {
        assert!(len <= 128, "word length {len} exceeds 128 bits");
        let bits = (0..len)
            .map(|j| ((value >> (len - 1 - j)) & 1) as u8)
            .collect();
        Self { bits }
    }

    /// Packs the word into an integer, most significant bit first.
    pub fn to_u128(&self) -> u128 {
        assert!(self.len() <= 128, "word length {} exceeds 128 bits", self.len());
        self.bits
            .iter()
            .fold(0u128, |acc, &b| (acc << 1) | u128::from(b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn get(&self, index: usize) -> u8 {
        self.bits[index]
    }

    pub fn set(&mut self, index: usize, bit: bool) {
        self.bits[index] = u8::from(bit);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn leading_zeros(&self) -> usize {
        self.bits.iter().take_while(|&&b| b == 0).count()
    }

    pub fn rightmost_one(&self) -> Option<usize> {
        self.bits.iter().rposition(|&b| b == 1)
    }

    /// Shortest zero run strictly between two successive 1-bits, if the word
    /// has at least two 1-bits.
    pub fn min_gap(&self) -> Option<usize> {
        let mut last = None;
        let mut best: Option<usize> = None;
        for (j, &b) in self.bits.iter().enumerate() {
            if b == 1 {
                if let Some(prev) = last {
                    let gap = j - prev - 1;
                    best = Some(best.map_or(gap, |g: usize| g.min(gap)));
                }
                last = Some(j);
            }
        }
        best
    }

    pub fn hamming_distance(&self, other: &BitWord) -> usize {
        assert_eq!(self.len(), other.len(), "hamming distance of unequal lengths");
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Checks the external RLIM form: `order` leading zeros and at least
    /// `order` zeros between successive 1-bits.
    pub fn check_admissible(&self, order: usize) -> Result<()> {
        if let Some(pos) = self.bits.iter().take(order).position(|&b| b == 1) {
            return Err(Error::Inadmissible {
                position: pos,
                reason: "1-bit inside the forced leading zeros",
            });
        }
        check_run_length(&self.bits, order)
    }

    pub fn is_admissible(&self, order: usize) -> bool {
        self.check_admissible(order).is_ok()
    }

    /// Packs into bytes, first bit in the most significant position of the
    /// first byte, zero-padded at the tail.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (j, &b)| acc | (b << (7 - j)))
            })
            .collect()
    }

    pub fn from_packed_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                actual: bytes.len(),
            });
        }
        let bits = (0..len)
            .map(|j| (bytes[j / 8] >> (7 - j % 8)) & 1)
            .collect();
        Ok(Self { bits })
    }
}

/// Checks that successive 1-bits are separated by at least `order` zeros.
pub(crate) fn check_run_length(bits: &[u8], order: usize) -> Result<()> {
    let mut last: Option<usize> = None;
    for (j, &b) in bits.iter().enumerate() {
        if b == 1 {
            if let Some(prev) = last {
                if j - prev - 1 < order {
                    return Err(Error::Inadmissible {
                        position: j,
                        reason: "run-length constraint violated",
                    });
                }
            }
            last = Some(j);
        }
    }
    Ok(())
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(j, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::BitString(format!("unexpected {other:?} at position {j}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self { bits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("0101").to_string(), "0101");
        assert!("01a1".parse::<BitWord>().is_err());
        assert!(BitWord::new(vec![0, 2]).is_err());
    }

    #[test]
    fn weight_and_runs() {
        let x = w("0010001001");
        assert_eq!(x.weight(), 3);
        assert_eq!(x.leading_zeros(), 2);
        assert_eq!(x.min_gap(), Some(2));
        assert_eq!(x.rightmost_one(), Some(9));
        assert_eq!(w("0000").rightmost_one(), None);
        assert_eq!(w("0100").min_gap(), None);
    }

    #[test]
    fn admissibility_reports_position() {
        assert!(w("0101").is_admissible(1));
        match w("0110").check_admissible(1) {
            Err(Error::Inadmissible { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        match w("1001").check_admissible(1) {
            Err(Error::Inadmissible { position, .. }) => assert_eq!(position, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn packed_layout_is_msb_first() {
        let x = w("1000000011");
        assert_eq!(x.to_packed_bytes(), vec![0b1000_0000, 0b1100_0000]);
        assert!(BitWord::from_packed_bytes(&[0], 10).is_err());
    }

    proptest! {
        #[test]
        fn packed_bytes_roundtrip(bits in proptest::collection::vec(0u8..2, 0..70)) {
            let x = BitWord::new(bits).unwrap();
            let back = BitWord::from_packed_bytes(&x.to_packed_bytes(), x.len()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn integer_packing_preserves_lex_order(a in any::<u64>(), b in any::<u64>()) {
            let (x, y) = (BitWord::from_u128(a.into(), 64), BitWord::from_u128(b.into(), 64));
            prop_assert_eq!(x.cmp(&y), a.cmp(&b));
            prop_assert_eq!(x.to_u128(), u128::from(a));
        }
    }
}
