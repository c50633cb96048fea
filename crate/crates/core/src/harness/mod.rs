//! Experimental protocol: normalization, threshold training, BER sweeps and
//! the storage/runtime comparison.

pub mod detector;
pub mod scheme;
pub mod storage;
pub mod sweep;

pub use detector::{evaluate_ber, train_threshold, ThresholdSearch, TrainedDetector};
pub use scheme::{BlockCode, Rounding, Scheme, SchemeConfig, SchemeKind, SchemeSpec};
pub use storage::{storage_runtime_report, StorageReport, TimingPlan};
pub use sweep::{run_point, sweep, BerResult, OperatingPoint, RunPlan, SweepReport, SweptParam};
