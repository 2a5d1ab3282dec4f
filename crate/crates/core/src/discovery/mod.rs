//! Learning vector fields from flow data: datasets, objectives, the training
//! loop, and the error measures that compare a trained field with the true
//! field and with its IMDE.

pub mod dataset;
pub mod loss;
pub mod metrics;
pub mod parallel;
pub mod report;
pub mod train;

pub use dataset::{make_dataset, sample_box, Dataset, DatasetKind, DatasetSpec};
pub use loss::{hnn_explicit_euler_loss, hnn_symplectic_euler_loss, lmnet_loss, odenet_loss, ModelKind, Objective};
pub use metrics::{
    convergence_order, error_between, error_metric, evaluate_on, imde_coefficients_on, truncated_values, Probe,
    MIN_DOMAIN_SAMPLES, MIN_POINTS_PER_UNIT_TIME,
};
pub use parallel::{par_map, retain_heap, worker_count, THREADS_ENV};
pub use report::{load_reports, read_curve, read_reports, save_reports, write_curve, write_reports, ErrorReport};
pub use train::{train, train_from, TrainConfig, TrainOutcome, DEFAULT_LOG_EVERY};
