//! Significant interval mining in binary sequences with a categorical
//! confounder, using the Cochran-Mantel-Haenszel test and Tarone's
//! testability trick to control the family-wise error rate.

pub mod baselines;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod interval;
pub mod prune;
pub mod stats;
pub mod synth;
pub mod tarone;

pub use baselines::{bonferroni_cmh, fais_chi2, fais_cmh, fastcmh, run_method, Method, MethodParams, MethodResult};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use formats::{hits_tsv, load_dataset, summary_text, write_dataset};
pub use interval::{filter_overlaps, interval_count, interval_support, Interval, IntervalEnumerator};
pub use prune::{is_not_prunable, NoPruning, PruneBound, PruneWorkspace, VertexOracle};
pub use stats::{chi2_sf, cmh_statistic, max_attainable_statistic, min_attainable_pvalue, PatternSupport, StratifiedCounts};
pub use tarone::{mine, significant_pass, MineOutcome, SignificanceOutcome, Significant, TaroneState};
