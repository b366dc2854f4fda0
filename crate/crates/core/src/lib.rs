//! Anomaly detection in time series of graphs by fusing graph invariants.
//!
//! A series of graphs on a fixed vertex set is reduced to nine invariants per
//! time step ([`invariants`]), each standardized against its recent past
//! ([`temporal`]). The standardized features are then fused with equal or
//! adaptive weights and tested against a null sample ([`fusion`]). The
//! [`simulate`] and [`harness`] modules reproduce kidney-egg power studies;
//! [`io`] reads time-binned edge lists and writes result tables.

pub mod error;
pub mod fusion;
pub mod graph;
pub mod harness;
pub mod invariants;
pub mod io;
pub mod simulate;
pub mod temporal;

pub use error::{Error, Result};
pub use fusion::{DetectionResult, Matrix, NullReference, WeightKind, WeightScheme};
pub use graph::{Graph, GraphSeries};
pub use harness::{ExperimentSpec, PipelineConfig, PowerResult, PowerSample, SubsetMode};
pub use invariants::{Feature, FeatureMatrix, FeatureVector, InvariantConfig};
pub use simulate::{KappaParams, LatentVectors, SeededRng};
pub use temporal::{NormalizedFeatures, WindowParams};
