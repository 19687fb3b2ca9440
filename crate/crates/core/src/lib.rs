//! Streaming binocular stereo matching.
//!
//! The crate centres on [`engine::run_r3sgm`], a single-pass, raster-order
//! variant of semi-global matching that aggregates costs from the four
//! already-visited neighbours of each pixel (left, above-left, above and
//! above-right). It keeps only one line of cost vectors per image, so its
//! memory footprint does not depend on image height.
//!
//! Around the engine sit:
//!
//! * [`image`]: PGM/PFM reading and writing.
//! * [`census`]: census features, Hamming costs and the streaming unary
//!   generator with its rolling feature buffers.
//! * [`reference`]: dense, whole-image baselines (8/4-path SGM, MGM, a naive
//!   twin of the streaming engine) and the global energy.
//! * [`postprocess`]: median filtering, left-right checking and row-wise
//!   background interpolation.
//! * [`eval`]: KITTI/Middlebury bad-pixel metrics, window sweeps and
//!   throughput measurement.
//! * [`pipeline`]: the end-to-end run used by the CLI and the demo.

pub mod census;
pub mod disparity;
pub mod engine;
pub mod error;
pub mod eval;
pub mod image;
pub mod pipeline;
pub mod postprocess;
pub mod reference;
pub mod synthetic;

pub use disparity::{DisparityMap, GtDisparity};
pub use engine::{run_r3sgm, CostVector, StereoParams};
pub use error::{Error, Result};
pub use image::GrayImage;
pub use pipeline::{run_pipeline, Algorithm, PipelineOptions, PipelineOutput};
