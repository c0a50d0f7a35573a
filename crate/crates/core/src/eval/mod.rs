//! Cross-validation, metrics, learning curves and timing.

pub mod cv;
pub mod folds;
pub mod metrics;

pub use cv::{bench_training, curve_csv, learning_curve, run_cv, BenchRow, CurvePoint, CurveSpec};
pub use folds::{stratified_kfold, FoldPlan};
pub use metrics::{f1, macro_f1, precision_recall, CategoryMetrics, ConfusionMatrix, MetricsReport};
