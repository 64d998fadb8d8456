pub mod cnn;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod features;
pub mod metrics;
pub mod num;
mod persist;
pub mod pipeline;
pub mod sentiment;
pub mod svm;
pub mod textproc;
pub mod tuning;

pub use error::{Error, Result};

pub type Real = f64;
pub type Svm = svm::SvmModel<Real>;
pub type Cnn = cnn::CnnModel<Real>;
pub type FeatureScaler = features::Scaler<Real>;
