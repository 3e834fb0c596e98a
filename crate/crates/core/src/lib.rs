//! Pseudo-label refinement across clustering epochs.
//!
//! Each epoch's features are clustered with DBSCAN. From the second epoch
//! on, the previous epoch's clusters are mapped onto the current ones with a
//! row-normalized IoU matrix, the projected previous label of every sample
//! is blended with its current one-hot label, and the resulting soft labels
//! are clustered again with HDBSCAN to produce the refined hard labels.
//!
//! Modules:
//! * [`model`], [`io`], [`config`]: data types, file formats and settings
//! * [`clustering`]: DBSCAN, mutual reachability, MST, condensed tree, EoM
//! * [`refine`]: projection matrix, soft refinement, hardening
//! * [`supervision`]: teacher/student loss terms and the EMA update
//! * [`metrics`]: ARI, NMI, purity, pairwise consistency
//! * [`sim`]: synthetic epoch streams and paired refinement/baseline runs

pub mod clustering;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod refine;
pub mod sim;
pub mod supervision;

pub use config::{Hardening, ProjectionSource, RunConfig, SimConfig, SlrConfig};
pub use error::{Result, SlrError};
pub use model::{
    EpochRecord, FeatureMatrix, HardLabeling, ProjectionMatrix, SoftLabelMatrix, NOISE,
};
