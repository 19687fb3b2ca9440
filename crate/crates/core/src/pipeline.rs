use std::fmt;
use std::str::FromStr;

use crate::disparity::DisparityMap;
use crate::engine::{run_r3sgm_observed, RunStats, StereoParams};
use crate::error::{param, Result};
use crate::image::GrayImage;
use crate::postprocess::{interpolate_background, lr_check, median3x3, LrThresholds};
use crate::reference::{mgm_pair, sgm_pair, DirectionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    /// Streaming single-pass aggregation.
    #[default]
    R3sgm,
    /// Dense SGM over all eight directions.
    Sgm8,
    /// Dense SGM over the four raster-causal directions.
    Sgm4,
    /// Dense MGM.
    Mgm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::R3sgm, Self::Sgm8, Self::Sgm4, Self::Mgm];

    pub fn name(self) -> &'static str {
        match self {
            Self::R3sgm => "r3sgm",
            Self::Sgm8 => "sgm8",
            Self::Sgm4 => "sgm4",
            Self::Mgm => "mgm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| param(format!("unknown algorithm {s:?} (expected r3sgm, sgm8, sgm4 or mgm)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    pub algo: Algorithm,
    pub median: bool,
    pub lr_check: bool,
    pub interpolate: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            algo: Algorithm::R3sgm,
            median: true,
            lr_check: true,
            interpolate: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// WTA disparities before any post-processing.
    pub raw_left: DisparityMap,
    pub raw_right: DisparityMap,
    /// After median filtering and the LR check, before interpolation.
    pub checked: DisparityMap,
    /// Final output (interpolated when requested).
    pub disparity: DisparityMap,
    /// Right map after median filtering.
    pub right: DisparityMap,
    /// Buffer statistics, for the streaming engine only.
    pub stats: Option<RunStats>,
}

/// Left and right WTA maps for `algo`.
pub fn disparities(
    algo: Algorithm,
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
) -> Result<(DisparityMap, DisparityMap, Option<RunStats>)> {
    match algo {
        Algorithm::R3sgm => {
            let out = run_r3sgm_observed(left, right, params, |_| {})?;
            Ok((out.left, out.right, Some(out.stats)))
        }
        Algorithm::Sgm8 => {
            let (l, r) = sgm_pair(left, right, params, &DirectionSet::all8())?;
            Ok((l, r, None))
        }
        Algorithm::Sgm4 => {
            let (l, r) = sgm_pair(left, right, params, &DirectionSet::raster4())?;
            Ok((l, r, None))
        }
        Algorithm::Mgm => {
            let (l, r) = mgm_pair(left, right, params)?;
            Ok((l, r, None))
        }
    }
}

/// WTA, then median on both maps, then the LR check, then optional
/// background interpolation.
pub fn run_pipeline(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
    opts: &PipelineOptions,
) -> Result<PipelineOutput> {
    params.validate()?;
    let thresholds = LrThresholds::new(params.lr_abs, params.lr_rel)?;
    let (raw_left, raw_right, stats) = disparities(opts.algo, left, right, params)?;
    let (l, r) = if opts.median {
        (median3x3(&raw_left), median3x3(&raw_right))
    } else {
        (raw_left.clone(), raw_right.clone())
    };
    let checked = if opts.lr_check {
        lr_check(&l, &r, &thresholds)?
    } else {
        l
    };
    let disparity = if opts.interpolate {
        interpolate_background(&checked)?
    } else {
        checked.clone()
    };
    Ok(PipelineOutput {
        raw_left,
        raw_right,
        checked,
        disparity,
        right: r,
        stats,
    })
}
