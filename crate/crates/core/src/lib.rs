//! Non-neural core of camera-space hand and body mesh recovery.
//!
//! * [`geometry`]: meshes, pinhole cameras, joint regressors, Procrustes.
//! * [`spiral`]: k-ring topology, spiral sequences and the SpiralConv++ / ISM operators.
//! * [`cues`]: Gaussian joint heatmaps and cat / sum / group aggregation.
//! * [`silhouette`]: contour tracing, projection axes and 1D spans.
//! * [`registration`]: 2D and 1D root solvers and their adaptive fusion.
//! * [`losses`] and [`metrics`]: reference loss terms and evaluation metrics.
//! * [`synth`]: deterministic synthetic scenes for testing the pipeline.
//! * [`cli`]: the `cmr` command line.

pub mod cli;
pub mod cues;
pub mod error;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod registration;
pub mod silhouette;
pub mod spiral;
pub mod synth;

pub use error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
