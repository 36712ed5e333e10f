//! File formats, the parallel labeling and training pipeline, and the
//! command line around `qpredict-core`.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod device_file;
pub mod model_file;
pub mod pipeline;
