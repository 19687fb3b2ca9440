//! Random-dot stereo fixtures with exact ground truth.
//!
//! The scene is a textured background plane plus fronto-parallel rectangles
//! drawn back to front. Each layer carries its own dot texture indexed by
//! left-image column, so the right image is rendered by looking up, for every
//! right pixel, the front-most layer that covers it after shifting by that
//! layer's disparity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disparity::{DisparityMap, GtDisparity};
use crate::error::{param, Result};
use crate::image::{GrayImage, RegionMask};

/// Axis-aligned rectangle in left-image coordinates with one disparity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plane {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub disparity: u16,
}

impl Plane {
    fn contains(&self, x: isize, y: usize) -> bool {
        x >= self.x0 as isize && x < self.x1 as isize && y >= self.y0 && y < self.y1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdsSpec {
    pub width: usize,
    pub height: usize,
    pub background: u16,
    /// Foreground rectangles, back to front.
    pub planes: Vec<Plane>,
    /// Number of distinct grey levels in the dot texture (>= 2).
    pub levels: u8,
    /// Dot edge length in pixels.
    pub dot: usize,
    /// Independent per-image noise amplitude; samples are offset by a
    /// uniform value in `-noise..=noise`.
    pub noise: u8,
}

impl RdsSpec {
    /// A centred rectangle in front of the background.
    pub fn simple(width: usize, height: usize, background: u16, foreground: u16) -> Self {
        Self {
            width,
            height,
            background,
            planes: vec![Plane {
                x0: width / 4,
                y0: height / 4,
                x1: 3 * width / 4,
                y1: 3 * height / 4,
                disparity: foreground,
            }],
            levels: 255,
            dot: 1,
            noise: 0,
        }
    }

    pub fn max_disparity(&self) -> u16 {
        self.planes
            .iter()
            .map(|p| p.disparity)
            .chain([self.background])
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct StereoFixture {
    pub left: GrayImage,
    pub right: GrayImage,
    /// Left-image ground truth, valid everywhere.
    pub gt: GtDisparity,
    /// Pixels visible in both views.
    pub nonocc: RegionMask,
}

pub fn random_dot_stereogram(spec: &RdsSpec, seed: u64) -> Result<StereoFixture> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 || spec.levels < 2 || spec.dot == 0 {
        return Err(param("stereogram needs a non-empty size, >= 2 levels and dot >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = spec.planes.len() + 1;
    let tex_w = w + spec.max_disparity() as usize;
    let cells_x = tex_w.div_ceil(spec.dot);
    let cells_y = h.div_ceil(spec.dot);
    let step = 255.0 / f64::from(spec.levels - 1);
    let textures: Vec<Vec<u8>> = (0..layers)
        .map(|_| {
            (0..cells_x * cells_y)
                .map(|_| (f64::from(rng.gen_range(0..spec.levels)) * step).round() as u8)
                .collect()
        })
        .collect();
    let texel = |layer: usize, u: usize, y: usize| {
        textures[layer][(y / spec.dot) * cells_x + (u / spec.dot).min(cells_x - 1)]
    };
    let disparity_of = |layer: usize| {
        if layer == 0 {
            spec.background
        } else {
            spec.planes[layer - 1].disparity
        }
    };
    // front-most layer covering left column x
    let layer_at = |x: isize, y: usize| {
        (1..layers)
            .rev()
            .find(|&k| spec.planes[k - 1].contains(x, y))
            .unwrap_or(0)
    };
    // front-most layer visible at right column xr
    let right_layer = |xr: usize, y: usize| {
        (1..layers)
            .rev()
            .find(|&k| spec.planes[k - 1].contains(xr as isize + disparity_of(k) as isize, y))
            .unwrap_or(0)
    };

    let noise = |v: u8, rng: &mut ChaCha8Rng| {
        if spec.noise == 0 {
            return v;
        }
        let n = i16::from(spec.noise);
        (i16::from(v) + rng.gen_range(-n..=n)).clamp(0, 255) as u8
    };

    let mut left = Vec::with_capacity(w * h);
    let mut gt = Vec::with_capacity(w * h);
    let mut nonocc = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let k = layer_at(x as isize, y);
            let d = disparity_of(k);
            left.push(noise(texel(k, x, y), &mut rng));
            gt.push(Some(f32::from(d)));
            let visible = x >= d as usize && right_layer(x - d as usize, y) == k;
            nonocc.push(visible);
        }
    }
    let mut right = Vec::with_capacity(w * h);
    for y in 0..h {
        for xr in 0..w {
            let k = right_layer(xr, y);
            let u = xr + disparity_of(k) as usize;
            right.push(noise(texel(k, u, y), &mut rng));
        }
    }

    Ok(StereoFixture {
        left: GrayImage::new(w, h, left)?,
        right: GrayImage::new(w, h, right)?,
        gt: GtDisparity {
            width: w,
            height: h,
            values: gt,
            scale: 1.0,
        },
        nonocc: RegionMask {
            width: w,
            height: h,
            inside: nonocc,
        },
    })
}

/// Ground truth as an integer map (for display and PFM output).
pub fn gt_as_map(gt: &GtDisparity) -> DisparityMap {
    let vals = gt
        .values
        .iter()
        .map(|v| v.map_or(DisparityMap::INVALID, |d| d.round() as u16))
        .collect();
    DisparityMap::from_raw(gt.width, gt.height, vals).expect("sizes agree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visible_pixels_match_exactly() {
        let spec = RdsSpec::simple(40, 20, 3, 9);
        let f = random_dot_stereogram(&spec, 1).unwrap();
        for y in 0..20 {
            for x in 0..40 {
                if f.nonocc.contains(x, y) {
                    let d = f.gt.get(x, y).unwrap() as usize;
                    assert_eq!(f.left.get(x, y), f.right.get(x - d, y), "({x},{y})");
                }
            }
        }
        // left border columns have no partner
        assert!(!f.nonocc.contains(0, 0));
        assert!(f.nonocc.count() > 40 * 20 / 2);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = RdsSpec {
            noise: 4,
            levels: 4,
            dot: 2,
            ..RdsSpec::simple(30, 12, 2, 6)
        };
        let a = random_dot_stereogram(&spec, 5).unwrap();
        let b = random_dot_stereogram(&spec, 5).unwrap();
        let c = random_dot_stereogram(&spec, 6).unwrap();
        assert_eq!(a.left, b.left);
        assert_eq!(a.right, b.right);
        assert_ne!(a.left, c.left);
    }
}
