//! Static-threshold detection, threshold training and BER evaluation.

use super::scheme::{BlockCode, Scheme};

/// How the training search visits candidate thresholds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ThresholdSearch {
    /// Every integer in `0..=max count`, each through the complete receiver.
    #[default]
    Exhaustive,
    /// Every `step`-th candidate first, then every candidate within `step`
    /// of the coarse minimizers.
    CoarseToFine { step: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainedDetector {
    pub scheme: String,
    pub threshold: u64,
    pub training_errors: u64,
    /// Number of candidate thresholds evaluated.
    pub evaluated: u64,
}

/// Hard decisions: a count equal to the threshold is a 1-symbol.
pub fn threshold_detect(counts: &[u64], threshold: u64) -> Vec<u8> {
    counts.iter().map(|&c| u8::from(c >= threshold)).collect()
}

/// Runs the complete receiver: threshold detection, then per-block decoding
/// back to information bits.
pub fn receive(code: &dyn BlockCode, counts: &[u64], threshold: u64) -> Vec<u8> {
    let n = code.block_len();
    let k = code.info_bits();
    assert_eq!(counts.len() % n, 0, "count stream is not a whole number of blocks");
    let mut detected = vec![0u8; n];
    let mut out = Vec::with_capacity(counts.len() / n * k);
    for block in counts.chunks_exact(n) {
        for (d, &c) in detected.iter_mut().zip(block) {
            *d = u8::from(c >= threshold);
        }
        let message = code.decode_block(&detected);
        out.extend((0..k).rev().map(|j| ((message >> j) & 1) as u8));
    }
    out
}

pub fn count_errors(sent: &[u8], decoded: &[u8]) -> u64 {
    assert_eq!(sent.len(), decoded.len());
    sent.iter().zip(decoded).filter(|(a, b)| a != b).count() as u64
}

/// Picks among tied minimizers: with `mid = ⌊(min + max) / 2⌋`, the smallest
/// minimizer within distance 1 of `mid`, else the smallest minimizer.
pub fn select_threshold(minimizers: &[u64]) -> u64 {
    let lo = *minimizers.iter().min().expect("at least one minimizer");
    let hi = *minimizers.iter().max().unwrap();
    let mid = lo + (hi - lo) / 2;
    minimizers
        .iter()
        .copied()
        .filter(|&t| t.abs_diff(mid) <= 1)
        .min()
        .unwrap_or(lo)
}

/// Trains the static threshold on a training transmission.
pub fn train_threshold(
    scheme: &Scheme,
    counts: &[u64],
    info: &[u8],
    search: ThresholdSearch,
) -> TrainedDetector {
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let code = scheme.code.as_ref();
    let errors_at = |tau: u64| count_errors(info, &receive(code, counts, tau));

    let mut evaluated: Vec<(u64, u64)> = match search {
        ThresholdSearch::Exhaustive => (0..=max_count).map(|t| (t, errors_at(t))).collect(),
        ThresholdSearch::CoarseToFine { step } => {
            let step = step.max(1);
            let coarse: Vec<(u64, u64)> = (0..=max_count)
                .step_by(step as usize)
                .map(|t| (t, errors_at(t)))
                .collect();
            let best = coarse.iter().map(|&(_, e)| e).min().unwrap();
            let mut fine = coarse.clone();
            for &(t, _) in coarse.iter().filter(|&&(_, e)| e == best) {
                let lo = t.saturating_sub(step - 1);
                let hi = (t + step - 1).min(max_count);
                for u in lo..=hi {
                    if !fine.iter().any(|&(v, _)| v == u) {
                        fine.push((u, errors_at(u)));
                    }
                }
            }
            fine.sort_unstable();
            fine
        }
    };
    evaluated.sort_unstable();
    let best = evaluated.iter().map(|&(_, e)| e).min().unwrap();
    let minimizers: Vec<u64> = evaluated
        .iter()
        .filter(|&&(_, e)| e == best)
        .map(|&(t, _)| t)
        .collect();
    TrainedDetector {
        scheme: scheme.spec.name.clone(),
        threshold: select_threshold(&minimizers),
        training_errors: best,
        evaluated: evaluated.len() as u64,
    }
}

/// Bit errors and information bits of a test transmission decoded with a
/// trained threshold.
pub fn evaluate_ber(
    detector: &TrainedDetector,
    scheme: &Scheme,
    counts: &[u64],
    info: &[u8],
) -> (u64, u64) {
    let decoded = receive(scheme.code.as_ref(), counts, detector.threshold);
    (count_errors(info, &decoded), info.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scheme::{parse_decimal, Rounding, SchemeConfig};

    fn uncoded(k: u32) -> Scheme {
        Scheme::build(SchemeConfig::uncoded(), k, parse_decimal("0.2").unwrap(), 100, Rounding::HalfEven).unwrap()
    }

    #[test]
    fn tie_break_rule() {
        assert_eq!(select_threshold(&[3, 7]), 3);
        assert_eq!(select_threshold(&[4, 5, 6]), 4);
        assert_eq!(select_threshold(&[2, 9, 10]), 2);
        assert_eq!(select_threshold(&[0]), 0);
        // mid = 5, minimizers 4 and 6 both within 1: the smaller wins.
        assert_eq!(select_threshold(&[1, 4, 6, 9]), 4);
    }

    #[test]
    fn detection_counts_equality_as_one() {
        assert_eq!(threshold_detect(&[0, 3, 4, 9], 4), vec![0, 0, 1, 1]);
    }

    #[test]
    fn all_zero_counts_train_to_zero() {
        let s = uncoded(4);
        let info = vec![0u8; 16];
        let d = train_threshold(&s, &[0; 16], &info, ThresholdSearch::Exhaustive);
        assert_eq!((d.threshold, d.evaluated), (0, 1));
        // τ = 0 decodes everything as 1.
        assert_eq!(d.training_errors, 16);
    }

    #[test]
    fn separable_counts_train_without_errors() {
        let s = uncoded(4);
        let info: Vec<u8> = (0..64).map(|j| ((j * 5 + 1) % 3 == 0) as u8).collect();
        let counts: Vec<u64> = info.iter().map(|&b| if b == 1 { 40 } else { 2 }).collect();
        let d = train_threshold(&s, &counts, &info, ThresholdSearch::Exhaustive);
        assert_eq!(d.training_errors, 0);
        // Minimizers are 3..=40, mid = 21.
        assert_eq!(d.threshold, 20);
        assert_eq!(evaluate_ber(&d, &s, &counts, &info), (0, 64));

        let flipped: Vec<u64> = info.iter().map(|&b| if b == 1 { 0 } else { 5 }).collect();
        let inverted = TrainedDetector { threshold: 1, ..d.clone() };
        assert_eq!(evaluate_ber(&inverted, &s, &flipped, &info), (64, 64));

    }

    #[test]
    fn coarse_search_finds_a_narrow_optimum() {
        let s = uncoded(4);
        let info: Vec<u8> = (0..64).map(|j| u8::from(j % 4 == 1)).collect();
        // Zeros spread over 0..=20 and ones over 22..=202: the error count
        // falls steadily to a minimum at 21 and 22.
        let counts: Vec<u64> = info
            .iter()
            .enumerate()
            .map(|(j, &b)| if b == 1 { 22 + 12 * (j as u64 / 4) } else { 20 - (j as u64 % 21) })
            .collect();
        let exhaustive = train_threshold(&s, &counts, &info, ThresholdSearch::Exhaustive);
        assert_eq!((exhaustive.threshold, exhaustive.training_errors, exhaustive.evaluated), (21, 0, 203));
        let coarse = train_threshold(&s, &counts, &info, ThresholdSearch::CoarseToFine { step: 8 });
        assert_eq!((coarse.threshold, coarse.training_errors), (21, 0));
        assert!(coarse.evaluated < 50);
    }
}
