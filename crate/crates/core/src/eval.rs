//! Benchmark metrics.
//!
//! A pixel is compared only where ground truth is valid (and inside the
//! optional region mask). `bad_rate_valid` is measured over pixels the
//! estimate also covers, `density` is the covered share of the compared
//! pixels, and `bad_rate_interpolated` scores the background-interpolated
//! estimate over every compared pixel.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::disparity::{DisparityMap, GtDisparity};
use crate::engine::{run_r3sgm_observed, StereoParams};
use crate::error::{param, Error, Result};
use crate::image::{GrayImage, RegionMask};
use crate::pipeline::{run_pipeline, PipelineOptions};
use crate::postprocess::interpolate_background;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Protocol {
    /// Bad when the error exceeds `max(3, 0.05 * gt)`.
    #[default]
    Kitti,
    /// Bad when the error exceeds one pixel.
    Middlebury,
}

impl Protocol {
    pub fn threshold(self, gt: f32) -> f64 {
        match self {
            Self::Kitti => 3f64.max(0.05 * f64::from(gt)),
            Self::Middlebury => 1.0,
        }
    }

    pub fn is_bad(self, est: u16, gt: f32) -> bool {
        (f64::from(est) - f64::from(gt)).abs() > self.threshold(gt)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kitti => "kitti",
            Self::Middlebury => "middlebury",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kitti" => Ok(Self::Kitti),
            "middlebury" => Ok(Self::Middlebury),
            _ => Err(param(format!("unknown protocol {s:?} (expected kitti or middlebury)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub bad_rate_valid: f64,
    pub density: f64,
    pub bad_rate_interpolated: f64,
    /// Pixels valid in both estimate and ground truth.
    pub n_compared: usize,
    /// Ground-truth-valid pixels (inside the mask).
    pub n_gt_valid: usize,
    pub n_bad: usize,
}

/// Raw tallies; pooled across images before forming rates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub gt_valid: usize,
    pub compared: usize,
    pub bad: usize,
    pub bad_interpolated: usize,
}

impl EvalCounts {
    pub fn add(&mut self, other: &EvalCounts) {
        self.gt_valid += other.gt_valid;
        self.compared += other.compared;
        self.bad += other.bad;
        self.bad_interpolated += other.bad_interpolated;
    }

    pub fn report(&self) -> EvalReport {
        let rate = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        EvalReport {
            bad_rate_valid: rate(self.bad, self.compared),
            density: rate(self.compared, self.gt_valid),
            bad_rate_interpolated: rate(self.bad_interpolated, self.gt_valid),
            n_compared: self.compared,
            n_gt_valid: self.gt_valid,
            n_bad: self.bad,
        }
    }
}

/// Which Middlebury region to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskSelector {
    NonOcc,
    All,
    Disc,
}

impl FromStr for MaskSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonocc" => Ok(Self::NonOcc),
            "all" => Ok(Self::All),
            "disc" => Ok(Self::Disc),
            _ => Err(param(format!("unknown region {s:?} (expected nonocc, all or disc)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegionMasks {
    pub nonocc: RegionMask,
    pub all: RegionMask,
    pub disc: RegionMask,
}

impl RegionMasks {
    pub fn new(nonocc: RegionMask, all: RegionMask, disc: RegionMask) -> Result<Self> {
        if !nonocc.is_subset_of(&all) || !disc.is_subset_of(&all) {
            return Err(param("region masks must satisfy nonocc ⊆ all and disc ⊆ all"));
        }
        Ok(Self { nonocc, all, disc })
    }

    pub fn select(&self, which: MaskSelector) -> &RegionMask {
        match which {
            MaskSelector::NonOcc => &self.nonocc,
            MaskSelector::All => &self.all,
            MaskSelector::Disc => &self.disc,
        }
    }
}

pub fn eval_counts(
    est: &DisparityMap,
    gt: &GtDisparity,
    protocol: Protocol,
    mask: Option<&RegionMask>,
) -> Result<EvalCounts> {
    let (w, h) = (est.width(), est.height());
    if gt.width != w || gt.height != h {
        return Err(Error::Dimensions(format!(
            "estimate is {w}x{h}, ground truth is {}x{}",
            gt.width, gt.height
        )));
    }
    if let Some(m) = mask {
        if m.width != w || m.height != h {
            return Err(Error::Dimensions(format!(
                "estimate is {w}x{h}, mask is {}x{}",
                m.width, m.height
            )));
        }
    }
    // an estimate with nothing to interpolate from counts as wrong everywhere
    let interpolated = interpolate_background(est).ok();
    let mut c = EvalCounts::default();
    for y in 0..h {
        for x in 0..w {
            let Some(g) = gt.get(x, y) else { continue };
            if mask.is_some_and(|m| !m.contains(x, y)) {
                continue;
            }
            c.gt_valid += 1;
            if let Some(e) = est.get(x, y) {
                c.compared += 1;
                c.bad += usize::from(protocol.is_bad(e, g));
            }
            let bad_i = interpolated
                .as_ref()
                .and_then(|m| m.get(x, y))
                .is_none_or(|e| protocol.is_bad(e, g));
            c.bad_interpolated += usize::from(bad_i);
        }
    }
    Ok(c)
}

pub fn bad_pixel_rate(
    est: &DisparityMap,
    gt: &GtDisparity,
    protocol: Protocol,
    mask: Option<&RegionMask>,
) -> Result<EvalReport> {
    Ok(eval_counts(est, gt, protocol, mask)?.report())
}

/// A stereo pair with ground truth and an optional evaluation mask.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub left: GrayImage,
    pub right: GrayImage,
    pub gt: GtDisparity,
    pub mask: Option<RegionMask>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub window: usize,
    pub bad_valid: f64,
    pub density: f64,
    pub bad_interp: f64,
    /// Software throughput; `None` when timing is disabled.
    pub px_per_s: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "window,bad_valid,density,bad_interp,px_per_s";

impl SweepRow {
    pub fn csv(&self) -> String {
        let rate = self
            .px_per_s
            .map_or_else(|| "NA".to_string(), |r| format!("{r:.0}"));
        format!(
            "{},{:.4},{:.4},{:.4},{}",
            self.window, self.bad_valid, self.density, self.bad_interp, rate
        )
    }
}

/// Runs the pipeline once per census width, pooling metrics over `pairs`.
/// Interpolation in `opts` is ignored; the interpolated rate is always
/// reported.
pub fn sweep_window(
    pairs: &[EvalPair],
    widths: &[usize],
    params: &StereoParams,
    opts: &PipelineOptions,
    protocol: Protocol,
    timing: bool,
) -> Result<Vec<SweepRow>> {
    if pairs.is_empty() {
        return Err(param("sweep dataset is empty"));
    }
    if widths.is_empty() {
        return Err(param("sweep needs at least one window width"));
    }
    let opts = PipelineOptions {
        interpolate: false,
        ..*opts
    };
    let mut rows = Vec::with_capacity(widths.len());
    for &window in widths {
        let p = StereoParams {
            window,
            ..params.clone()
        };
        p.validate()?;
        let mut counts = EvalCounts::default();
        let mut pixels = 0usize;
        let mut secs = 0f64;
        for pair in pairs {
            let t0 = Instant::now();
            let out = run_pipeline(&pair.left, &pair.right, &p, &opts)?;
            secs += t0.elapsed().as_secs_f64();
            pixels += pair.left.width() * pair.left.height();
            counts.add(&eval_counts(&out.checked, &pair.gt, protocol, pair.mask.as_ref())?);
        }
        let r = counts.report();
        rows.push(SweepRow {
            window,
            bad_valid: r.bad_rate_valid,
            density: r.density,
            bad_interp: r.bad_rate_interpolated,
            px_per_s: timing.then(|| pixels as f64 / secs.max(1e-9)),
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv(mut out: impl Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub px_per_s: f64,
    pub median_secs: f64,
    pub peak_cost_entries: usize,
    pub peak_buffer_bytes: usize,
}

/// Median wall-clock of the streaming engine over `repeats` runs.
pub fn throughput(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
    repeats: usize,
) -> Result<Throughput> {
    if repeats == 0 {
        return Err(param("repeats must be at least 1"));
    }
    let mut times = Vec::with_capacity(repeats);
    let mut peak = 0;
    for _ in 0..repeats {
        let t0 = Instant::now();
        let out = run_r3sgm_observed(left, right, params, |_| {})?;
        times.push(t0.elapsed().as_secs_f64());
        peak = peak.max(out.stats.peak_cost_entries);
    }
    times.sort_by(f64::total_cmp);
    let median = times[(times.len() - 1) / 2].max(1e-9);
    Ok(Throughput {
        px_per_s: (left.width() * left.height()) as f64 / median,
        median_secs: median,
        peak_cost_entries: peak,
        peak_buffer_bytes: peak * std::mem::size_of::<u32>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{random_dot_stereogram, RdsSpec};

    fn gt_const(w: usize, h: usize, v: f32) -> GtDisparity {
        GtDisparity {
            width: w,
            height: h,
            values: vec![Some(v); w * h],
            scale: 1.0,
        }
    }

    #[test]
    fn perfect_estimate() {
        let est = DisparityMap::filled(4, 3, 10);
        let r = bad_pixel_rate(&est, &gt_const(4, 3, 10.0), Protocol::Kitti, None).unwrap();
        assert_eq!(r.bad_rate_valid, 0.0);
        assert_eq!(r.density, 1.0);
        assert_eq!(r.bad_rate_interpolated, 0.0);
        assert_eq!(r.n_compared, 12);
    }

    #[test]
    fn thresholds() {
        assert!(Protocol::Kitti.is_bad(14, 10.0));
        assert!(!Protocol::Kitti.is_bad(12, 10.0));
        assert!(Protocol::Middlebury.is_bad(12, 10.0));
        assert!(!Protocol::Middlebury.is_bad(11, 10.0));
        // 5% dominates above 60 px
        assert!(!Protocol::Kitti.is_bad(104, 100.0));
        assert!(Protocol::Kitti.is_bad(106, 100.0));
    }

    #[test]
    fn invalid_gt_and_mask_are_skipped() {
        let est = DisparityMap::from_raw(3, 1, vec![0, 50, DisparityMap::INVALID]).unwrap();
        let gt = GtDisparity {
            width: 3,
            height: 1,
            values: vec![None, Some(10.0), Some(10.0)],
            scale: 1.0,
        };
        let r = bad_pixel_rate(&est, &gt, Protocol::Kitti, None).unwrap();
        assert_eq!((r.n_gt_valid, r.n_compared, r.n_bad), (2, 1, 1));
        assert_eq!(r.density, 0.5);
        // interpolation copies 50 into the gap, so both are bad
        assert_eq!(r.bad_rate_interpolated, 1.0);
        let mask = RegionMask {
            width: 3,
            height: 1,
            inside: vec![true, false, true],
        };
        let r = bad_pixel_rate(&est, &gt, Protocol::Kitti, Some(&mask)).unwrap();
        assert_eq!((r.n_gt_valid, r.n_compared), (1, 0));
    }

    #[test]
    fn dimension_mismatch() {
        let est = DisparityMap::filled(4, 3, 1);
        assert!(bad_pixel_rate(&est, &gt_const(3, 3, 1.0), Protocol::Kitti, None).is_err());
    }

    #[test]
    fn masks_must_nest() {
        let a = RegionMask::full(2, 1);
        let b = RegionMask {
            width: 2,
            height: 1,
            inside: vec![true, false],
        };
        assert!(RegionMasks::new(b.clone(), a.clone(), b.clone()).is_ok());
        assert!(RegionMasks::new(a.clone(), b.clone(), b).is_err());
    }

    #[test]
    fn sweep_one_row_and_csv() {
        let f = random_dot_stereogram(&RdsSpec::simple(40, 24, 2, 6), 3).unwrap();
        let pair = EvalPair {
            left: f.left,
            right: f.right,
            gt: f.gt,
            mask: None,
        };
        let p = StereoParams {
            d_max: 8,
            ..StereoParams::default()
        };
        let rows = sweep_window(
            std::slice::from_ref(&pair),
            &[3],
            &p,
            &PipelineOptions::default(),
            Protocol::Kitti,
            false,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert!(lines[1].starts_with("3,0."));
        assert!(lines[1].ends_with(",NA"));

        assert!(sweep_window(&[], &[3], &p, &PipelineOptions::default(), Protocol::Kitti, false).is_err());
        assert!(sweep_window(&[pair], &[], &p, &PipelineOptions::default(), Protocol::Kitti, false).is_err());
    }

    #[test]
    fn throughput_small() {
        let f = random_dot_stereogram(&RdsSpec::simple(32, 24, 1, 4), 2).unwrap();
        let p = StereoParams {
            d_max: 7,
            window: 5,
            ..StereoParams::default()
        };
        let t = throughput(&f.left, &f.right, &p, 1).unwrap();
        assert!(t.px_per_s.is_finite() && t.px_per_s > 0.0);
        assert!(t.peak_cost_entries <= 2 * (32 + 5) * 8);
        assert!(throughput(&f.left, &f.right, &p, 0).is_err());
    }
}
