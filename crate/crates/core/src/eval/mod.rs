//! Evaluation protocol: random query/index splits, exact gold standards,
//! recall, timed benchmarks and projection-quality analyses.

mod bench;
mod gold;
mod projection;
mod split;
mod tune;

pub use bench::{run_benchmark, summarize, BenchReport, MethodSummary};
pub use gold::{compute_gold, recall, GoldStandard};
pub use projection::{
    projection_scatter, recall_vs_fraction_curve, CurvePoint, ProjectionDistance, ScatterPoint,
    Stratum,
};
pub use split::{make_splits, Split};
pub use tune::{tune_method, TuneReport, TuneTrial, GAMMA_FRACTIONS, SW_ATTEMPTS};
