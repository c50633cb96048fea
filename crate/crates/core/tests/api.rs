use std::sync::Arc;

use num_bigint::BigUint;
use rlim_core::harness::storage::{storage_runtime_report, TimingPlan};
use rlim_core::harness::sweep::{sweep, OperatingPoint, RunPlan, SweptParam};
use rlim_core::harness::SchemeConfig;
use rlim_core::{BitWord, CodeParams, CountingTables, Mode, RlimCodec};

#[test]
fn loaded_tables_drive_the_codec() {
    let params = CodeParams::new(4, 24, Mode::NonEnhanced).unwrap();
    let built = CountingTables::build(4, params.internal_len()).unwrap();
    let loaded = CountingTables::read_from(built.to_bytes().as_slice()).unwrap();
    let codec = RlimCodec::with_tables(params.clone(), Arc::new(loaded)).unwrap();
    let reference = RlimCodec::new(params).unwrap();
    for m in [0u128, 1, 12_345, (1 << 24) - 1] {
        let word = codec.encode(m).unwrap();
        assert_eq!(word, reference.encode(m).unwrap());
        assert_eq!(codec.decode(&word).unwrap().message, m);
    }
}

#[test]
fn noisy_words_always_decode_into_the_codebook() {
    let params = CodeParams::new(2, 10, Mode::Enhanced).unwrap();
    let codec = RlimCodec::new(params.clone()).unwrap();
    for v in 0u128..1 << params.length() {
        let y = BitWord::from_u128(v, params.length());
        let d = codec.decode(&y).unwrap();
        assert!(d.corrected.is_admissible(2));
        assert!(d.message < 1 << 10);
        assert!(d.steps.last().unwrap().accepted);
    }
}

#[test]
fn k_sweep_covers_every_grid_point() {
    let mut plan = RunPlan::new(
        vec![SchemeConfig::rlim(3, Mode::Enhanced)],
        OperatingPoint::default(),
        vec![11],
    );
    plan.sweep = Some((SweptParam::K, ["8", "12", "16"].map(String::from).to_vec()));
    plan.train_bits = 500;
    plan.test_bits = 2_000;
    let report = sweep(&plan);
    assert!(report.failures.is_empty());
    let ks: Vec<u32> = report.results.iter().map(|r| r.info_bits).collect();
    assert_eq!(ks, [8, 12, 16]);
    assert!(report.results.iter().all(|r| r.ber() <= 1.0 && r.info_bits_tested >= 2_000));
}

#[test]
fn storage_report_at_k_40_skips_materialization() {
    let plan = TimingPlan { blocks: 20, runs: 1, ..TimingPlan::default() };
    let r = storage_runtime_report(3, 40, Mode::Enhanced, &plan, 3).unwrap();
    assert_eq!(r.n, 88);
    assert_eq!(r.full_codebook_bits, BigUint::from(88u32) << 40u32);
    // About 12.1 TB against about 12 kB.
    assert!((r.full_codebook_bits.to_string().parse::<f64>().unwrap() / 8e12 - 12.09).abs() < 0.01);
    assert!(r.table_bits / 8 < 12_000);
    assert!(r.full.is_none());
}
