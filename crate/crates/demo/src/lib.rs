//! Browser bindings for the interactive demo page in `www/`.

use wasm_bindgen::prelude::*;

use r3sgm::engine::{run_r3sgm_observed, Side};
use r3sgm::eval::{bad_pixel_rate, Protocol};
use r3sgm::synthetic::{gt_as_map, random_dot_stereogram, RdsSpec, StereoFixture};
use r3sgm::{run_pipeline, Algorithm, DisparityMap, GrayImage, PipelineOptions, StereoParams};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn gray_rgba(img: &GrayImage) -> Vec<u8> {
    img.data().iter().flat_map(|&v| [v, v, v, 255]).collect()
}

/// Blue (near zero) through green to red (at `d_max`); invalid pixels black.
fn disparity_rgba(map: &DisparityMap, d_max: usize) -> Vec<u8> {
    let scale = d_max.max(1) as f32;
    map.iter()
        .flat_map(|d| match d {
            None => [0, 0, 0, 255],
            Some(d) => {
                let t = (f32::from(d) / scale).clamp(0.0, 1.0);
                let r = (255.0 * (2.0 * t - 1.0).clamp(0.0, 1.0)) as u8;
                let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8;
                let b = (255.0 * (1.0 - 2.0 * t).clamp(0.0, 1.0)) as u8;
                [r, g, b, 255]
            }
        })
        .collect()
}

fn params(d_max: usize, window: usize, p1: u32, p2: u32) -> Result<StereoParams, JsError> {
    let p = StereoParams { d_max, window, p1, p2, ..StereoParams::default() };
    p.validate().map_err(js_err)?;
    Ok(p)
}

/// A random-dot stereo pair with known disparity.
#[wasm_bindgen]
pub struct Scene {
    fixture: StereoFixture,
    max_disparity: usize,
}

#[wasm_bindgen]
impl Scene {
    #[wasm_bindgen(constructor)]
    pub fn new(
        width: usize,
        height: usize,
        background: u16,
        foreground: u16,
        levels: u8,
        noise: u8,
        seed: u64,
    ) -> Result<Scene, JsError> {
        let spec = RdsSpec { levels, noise, ..RdsSpec::simple(width, height, background, foreground) };
        let fixture = random_dot_stereogram(&spec, seed).map_err(js_err)?;
        Ok(Scene { fixture, max_disparity: usize::from(spec.max_disparity()) })
    }

    pub fn width(&self) -> usize {
        self.fixture.left.width()
    }

    pub fn height(&self) -> usize {
        self.fixture.left.height()
    }

    pub fn left_rgba(&self) -> Vec<u8> {
        gray_rgba(&self.fixture.left)
    }

    pub fn right_rgba(&self) -> Vec<u8> {
        gray_rgba(&self.fixture.right)
    }

    /// Ground truth coloured on the same scale as `compute` with `d_max`.
    pub fn truth_rgba(&self, d_max: usize) -> Vec<u8> {
        disparity_rgba(&gt_as_map(&self.fixture.gt), d_max)
    }

    pub fn max_disparity(&self) -> usize {
        self.max_disparity
    }

    /// Runs the full pipeline and returns the coloured disparity map with
    /// its scores.
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        &self,
        algo: &str,
        d_max: usize,
        window: usize,
        p1: u32,
        p2: u32,
        median: bool,
        lr_check: bool,
        interpolate: bool,
    ) -> Result<Disparity, JsError> {
        let p = params(d_max, window, p1, p2)?;
        let algo: Algorithm = algo.parse().map_err(js_err)?;
        let opts = PipelineOptions { algo, median, lr_check, interpolate };
        let f = &self.fixture;
        let out = run_pipeline(&f.left, &f.right, &p, &opts).map_err(js_err)?;
        let report = bad_pixel_rate(&out.disparity, &f.gt, Protocol::Middlebury, Some(&f.nonocc)).map_err(js_err)?;
        Ok(Disparity {
            rgba: disparity_rgba(&out.disparity, d_max),
            bad: report.bad_rate_valid,
            density: out.disparity.density(),
            peak_buffer: out.stats.map_or(0, |s| s.peak_cost_bytes()),
        })
    }

    /// Unary costs followed by the aggregated (4x scaled) costs of the
    /// streaming engine at left-image pixel `(x, y)`.
    pub fn cost_profile(
        &self,
        x: usize,
        y: usize,
        d_max: usize,
        window: usize,
        p1: u32,
        p2: u32,
    ) -> Result<Vec<u32>, JsError> {
        let p = params(d_max, window, p1, p2)?;
        let f = &self.fixture;
        let mut profile = Vec::new();
        run_r3sgm_observed(&f.left, &f.right, &p, |ev| {
            if ev.side == Side::Left && ev.x == x && ev.y == y {
                profile.extend(ev.unary.iter().map(|&u| u32::from(u)));
                profile.extend_from_slice(ev.costs.costs());
            }
        })
        .map_err(js_err)?;
        if profile.is_empty() {
            return Err(JsError::new("pixel outside the image"));
        }
        Ok(profile)
    }
}

#[wasm_bindgen]
pub struct Disparity {
    rgba: Vec<u8>,
    bad: f64,
    density: f64,
    peak_buffer: usize,
}

#[wasm_bindgen]
impl Disparity {
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// Bad-1 rate over non-occluded pixels the map covers.
    pub fn bad(&self) -> f64 {
        self.bad
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// Peak cost-buffer bytes (streaming engine only, else 0).
    pub fn peak_buffer(&self) -> usize {
        self.peak_buffer
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colours_cover_the_range() {
        let m = DisparityMap::from_raw(3, 1, vec![0, 10, DisparityMap::INVALID]).unwrap();
        let c = disparity_rgba(&m, 10);
        assert_eq!(&c[0..4], &[0, 0, 255, 255]);
        assert_eq!(&c[4..8], &[255, 0, 0, 255]);
        assert_eq!(&c[8..12], &[0, 0, 0, 255]);
    }

    #[test]
    fn scene_round_trip() {
        let s = Scene::new(48, 24, 2, 8, 8, 0, 1).unwrap();
        assert_eq!(s.left_rgba().len(), 48 * 24 * 4);
        let d = s.compute("r3sgm", 12, 5, 8, 96, true, true, false).unwrap();
        assert_eq!(d.rgba().len(), 48 * 24 * 4);
        assert!(d.density() > 0.5);
        assert!(d.peak_buffer() > 0);
        let prof = s.cost_profile(20, 10, 12, 5, 8, 96).unwrap();
        assert_eq!(prof.len(), 26);
    }
}
