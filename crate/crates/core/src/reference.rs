//! Dense whole-image baselines.
//!
//! Everything here materialises full cost volumes. These are the oracles and
//! comparison points for the streaming engine: classic SGM over any subset of
//! the eight scan directions, MGM with its two-predecessor recursion, a naive
//! whole-lattice twin of the streaming engine, and the global energy.

use crate::census::{census_image, CensusFeature};
use crate::disparity::DisparityMap;
use crate::engine::{penalty, wta, StereoParams};
use crate::error::{param, Error, Result};
use crate::image::GrayImage;

/// Dense `height x width x (d_max + 1)` integer lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    depth: usize,
    data: Vec<u32>,
}

impl CostVolume {
    pub fn zeros(width: usize, height: usize, depth: usize) -> Self {
        Self {
            width,
            height,
            depth,
            data: vec![0; width * height * depth],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of disparities, `d_max + 1`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> &[u32] {
        let i = (y * self.width + x) * self.depth;
        &self.data[i..i + self.depth]
    }

    #[inline]
    pub fn at_mut(&mut self, x: usize, y: usize) -> &mut [u32] {
        let i = (y * self.width + x) * self.depth;
        &mut self.data[i..i + self.depth]
    }

    pub fn get(&self, x: usize, y: usize, d: usize) -> u32 {
        self.at(x, y)[d]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    fn add_assign(&mut self, other: &CostVolume) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Per-pixel argmin with smallest-d tie-break.
    pub fn wta(&self) -> DisparityMap {
        let mut out = DisparityMap::new_invalid(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, y, Some(wta(self.at(x, y)) as u16));
            }
        }
        out
    }
}

/// A scan direction `(dx, dy)`; `p - r` is the predecessor of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Direction {
    pub dx: i8,
    pub dy: i8,
}

impl Direction {
    pub const fn new(dx: i8, dy: i8) -> Self {
        Self { dx, dy }
    }

    /// Rotation by +90 degrees: `(1, 0)` maps to `(0, 1)`, so for a
    /// horizontal scan `p - r_perp` is the pixel above `p`.
    pub fn perpendicular(self) -> Self {
        Self::new(-self.dy, self.dx)
    }

    fn is_unit(self) -> bool {
        (self.dx != 0 || self.dy != 0) && self.dx.abs() <= 1 && self.dy.abs() <= 1
    }
}

/// Non-empty set of directions drawn from the eight unit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSet(Vec<Direction>);

impl DirectionSet {
    pub const ALL: [Direction; 8] = [
        Direction::new(1, 0),
        Direction::new(1, 1),
        Direction::new(0, 1),
        Direction::new(-1, 1),
        Direction::new(-1, 0),
        Direction::new(-1, -1),
        Direction::new(0, -1),
        Direction::new(1, -1),
    ];

    pub fn new(dirs: Vec<Direction>) -> Result<Self> {
        if dirs.is_empty() {
            return Err(param("direction set is empty"));
        }
        if let Some(d) = dirs.iter().find(|d| !d.is_unit()) {
            return Err(param(format!("({}, {}) is not a scan direction", d.dx, d.dy)));
        }
        Ok(Self(dirs))
    }

    pub fn all8() -> Self {
        Self(Self::ALL.to_vec())
    }

    /// The four directions whose scan lines are complete in raster order.
    pub fn raster4() -> Self {
        Self(Self::ALL[..4].to_vec())
    }

    pub fn directions(&self) -> &[Direction] {
        &self.0
    }
}

/// A linear pixel order; row- or column-major with a sign per axis.
#[derive(Debug, Clone, Copy)]
struct Traversal {
    column_major: bool,
    sx: isize,
    sy: isize,
}

impl Traversal {
    const CANDIDATES: [Traversal; 8] = [
        Traversal { column_major: false, sx: 1, sy: 1 },
        Traversal { column_major: false, sx: -1, sy: -1 },
        Traversal { column_major: false, sx: -1, sy: 1 },
        Traversal { column_major: false, sx: 1, sy: -1 },
        Traversal { column_major: true, sx: 1, sy: 1 },
        Traversal { column_major: true, sx: -1, sy: -1 },
        Traversal { column_major: true, sx: -1, sy: 1 },
        Traversal { column_major: true, sx: 1, sy: -1 },
    ];

    fn precedes(&self, ox: isize, oy: isize) -> bool {
        let (major, minor) = if self.column_major {
            (self.sx * ox, self.sy * oy)
        } else {
            (self.sy * oy, self.sx * ox)
        };
        major < 0 || (major == 0 && minor < 0)
    }

    /// First candidate order in which every offset points to an earlier pixel.
    fn for_offsets(offsets: &[(isize, isize)]) -> Self {
        *Self::CANDIDATES
            .iter()
            .find(|t| offsets.iter().all(|&(ox, oy)| t.precedes(ox, oy)))
            .expect("unit offsets always admit a raster order")
    }

    fn pixels(self, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
        let ordered = move |n: usize, s: isize, i: usize| if s > 0 { i } else { n - 1 - i };
        (0..w * h).map(move |k| {
            if self.column_major {
                (ordered(w, self.sx, k / h), ordered(h, self.sy, k % h))
            } else {
                (ordered(w, self.sx, k % w), ordered(h, self.sy, k / w))
            }
        })
    }
}

#[inline]
fn offset(x: usize, y: usize, dx: isize, dy: isize, w: usize, h: usize) -> Option<(usize, usize)> {
    let nx = x as isize + dx;
    let ny = y as isize + dy;
    (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then_some((nx as usize, ny as usize))
}

fn check_pair(left: &GrayImage, right: &GrayImage, params: &StereoParams) -> Result<()> {
    params.validate()?;
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::Dimensions(format!(
            "left is {}x{}, right is {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    if left.width() <= params.d_max {
        return Err(param(format!(
            "image width {} must exceed d_max {}",
            left.width(),
            params.d_max
        )));
    }
    Ok(())
}

/// Full left and right unary volumes computed from whole-image census maps.
/// Out-of-range disparities cost `W^2 - 1`.
pub fn unary_volumes(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
) -> Result<(CostVolume, CostVolume)> {
    check_pair(left, right, params)?;
    let window = params.census_window()?;
    let (w, h, n) = (left.width(), left.height(), params.num_disparities());
    let fl = census_image(left, window);
    let fr = census_image(right, window);
    let cmax = params.max_unary();
    let feat = |f: &[CensusFeature], x: usize, y: usize| f[y * w + x];
    let mut vl = CostVolume::zeros(w, h, n);
    let mut vr = CostVolume::zeros(w, h, n);
    for y in 0..h {
        for x in 0..w {
            for d in 0..n {
                vl.at_mut(x, y)[d] = if d <= x {
                    u32::from(feat(&fl, x, y).distance(&feat(&fr, x - d, y)))
                } else {
                    cmax
                };
                vr.at_mut(x, y)[d] = if x + d < w {
                    u32::from(feat(&fl, x + d, y).distance(&feat(&fr, x, y)))
                } else {
                    cmax
                };
            }
        }
    }
    Ok((vl, vr))
}

/// Directional costs `L_r` for one scan direction. Pixels whose predecessor
/// lies outside the image take `L_r = C_p`.
pub fn sgm_direction(unaries: &CostVolume, r: Direction, params: &StereoParams) -> CostVolume {
    let (w, h, n) = (unaries.width, unaries.height, unaries.depth);
    let (ox, oy) = (-(r.dx as isize), -(r.dy as isize));
    let order = Traversal::for_offsets(&[(ox, oy)]);
    let mut out = CostVolume::zeros(w, h, n);
    let mut prev = vec![0u32; n];
    for (x, y) in order.pixels(w, h) {
        let c = unaries.at(x, y);
        match offset(x, y, ox, oy, w, h) {
            None => out.at_mut(x, y).copy_from_slice(c),
            Some((px, py)) => {
                prev.copy_from_slice(out.at(px, py));
                let m = *prev.iter().min().unwrap();
                let dst = out.at_mut(x, y);
                for d in 0..n {
                    let mut best = prev[d];
                    if d > 0 {
                        best = best.min(prev[d - 1] + params.p1);
                    }
                    if d + 1 < n {
                        best = best.min(prev[d + 1] + params.p1);
                    }
                    best = best.min(m + params.p2);
                    dst[d] = c[d] + best - m;
                }
            }
        }
    }
    out
}

/// Sum of the directional volumes over `dirs`.
pub fn sgm_volume(unaries: &CostVolume, params: &StereoParams, dirs: &DirectionSet) -> CostVolume {
    let mut total = CostVolume::zeros(unaries.width, unaries.height, unaries.depth);
    for &r in dirs.directions() {
        total.add_assign(&sgm_direction(unaries, r, params));
    }
    total
}

/// Classic SGM for the left image.
pub fn sgm(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
    dirs: &DirectionSet,
) -> Result<(DisparityMap, CostVolume)> {
    let (vl, _) = unary_volumes(left, right, params)?;
    let vol = sgm_volume(&vl, params, dirs);
    Ok((vol.wta(), vol))
}

/// Classic SGM disparities for both images.
pub fn sgm_pair(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
    dirs: &DirectionSet,
) -> Result<(DisparityMap, DisparityMap)> {
    let (vl, vr) = unary_volumes(left, right, params)?;
    Ok((
        sgm_volume(&vl, params, dirs).wta(),
        sgm_volume(&vr, params, dirs).wta(),
    ))
}

/// MGM costs for direction `r`, held at twice their value. The normalised
/// terms from `p - r` and `p - r_perp` are averaged over the predecessors
/// that exist (truncating), so a pixel with one predecessor follows the SGM
/// recursion exactly.
pub fn mgm_direction(unaries: &CostVolume, r: Direction, params: &StereoParams) -> CostVolume {
    let (w, h, n) = (unaries.width, unaries.height, unaries.depth);
    let rp = r.perpendicular();
    let offsets = [
        (-(r.dx as isize), -(r.dy as isize)),
        (-(rp.dx as isize), -(rp.dy as isize)),
    ];
    let order = Traversal::for_offsets(&offsets);
    let (p1, p2) = (2 * params.p1, 2 * params.p2);
    let mut out = CostVolume::zeros(w, h, n);
    let mut acc = vec![0u32; n];
    let mut prev = vec![0u32; n];
    for (x, y) in order.pixels(w, h) {
        acc.fill(0);
        let mut available = 0;
        for &(ox, oy) in &offsets {
            let Some((px, py)) = offset(x, y, ox, oy, w, h) else {
                continue;
            };
            available += 1;
            prev.copy_from_slice(out.at(px, py));
            let m = *prev.iter().min().unwrap();
            for d in 0..n {
                let mut best = prev[d];
                if d > 0 {
                    best = best.min(prev[d - 1] + p1);
                }
                if d + 1 < n {
                    best = best.min(prev[d + 1] + p1);
                }
                best = best.min(m + p2);
                acc[d] += best - m;
            }
        }
        let div = available.max(1);
        for (a, &c) in acc.iter_mut().zip(unaries.at(x, y)) {
            *a = 2 * c + *a / div;
        }
        out.at_mut(x, y).copy_from_slice(&acc);
    }
    out
}

pub fn mgm_volume(unaries: &CostVolume, params: &StereoParams) -> CostVolume {
    let mut total = CostVolume::zeros(unaries.width, unaries.height, unaries.depth);
    for r in DirectionSet::ALL {
        total.add_assign(&mgm_direction(unaries, r, params));
    }
    total
}

/// MGM over all eight directions for the left image. The returned volume is
/// twice the unscaled sum.
pub fn mgm(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
) -> Result<(DisparityMap, CostVolume)> {
    let (vl, _) = unary_volumes(left, right, params)?;
    let vol = mgm_volume(&vl, params);
    Ok((vol.wta(), vol))
}

pub fn mgm_pair(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
) -> Result<(DisparityMap, DisparityMap)> {
    let (vl, vr) = unary_volumes(left, right, params)?;
    Ok((mgm_volume(&vl, params).wta(), mgm_volume(&vr, params).wta()))
}

/// Causal neighbour offsets of the streaming recursion: left, above-left,
/// above, above-right.
const CAUSAL: [(isize, isize); 4] = [(-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Four-times-scaled single-pass costs over the whole image, evaluated with
/// an explicit min over all `d'` of `L(p - x, d') + V(d, d')` and the same
/// truncating division by four as the engine.
pub fn r3sgm_naive_volume(unaries: &CostVolume, params: &StereoParams) -> CostVolume {
    let (w, h, n) = (unaries.width, unaries.height, unaries.depth);
    let mut out = CostVolume::zeros(w, h, n);
    let mut acc = vec![0u32; n];
    let mut prev = vec![0u32; n];
    for y in 0..h {
        for x in 0..w {
            acc.fill(0);
            for &(ox, oy) in &CAUSAL {
                let Some((px, py)) = offset(x, y, ox, oy, w, h) else {
                    continue;
                };
                prev.copy_from_slice(out.at(px, py));
                let m = *prev.iter().min().unwrap();
                for (d, a) in acc.iter_mut().enumerate() {
                    let best = (0..n)
                        .map(|dp| prev[dp] + 4 * penalty(d, dp, params))
                        .min()
                        .unwrap();
                    *a += best - m;
                }
            }
            for (a, &c) in acc.iter_mut().zip(unaries.at(x, y)) {
                *a = 4 * c + *a / 4;
            }
            out.at_mut(x, y).copy_from_slice(&acc);
        }
    }
    out
}

/// Whole-image twin of the streaming engine.
pub fn r3sgm_naive(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
) -> Result<(DisparityMap, DisparityMap)> {
    let (vl, vr) = unary_volumes(left, right, params)?;
    Ok((
        r3sgm_naive_volume(&vl, params).wta(),
        r3sgm_naive_volume(&vr, params).wta(),
    ))
}

/// Global energy: unaries plus the smoothness penalty over every undirected
/// 8-connected edge.
pub fn energy(disp: &DisparityMap, unaries: &CostVolume, params: &StereoParams) -> Result<u64> {
    let (w, h) = (disp.width(), disp.height());
    if w != unaries.width || h != unaries.height {
        return Err(Error::Dimensions(format!(
            "disparity map is {w}x{h}, unaries are {}x{}",
            unaries.width, unaries.height
        )));
    }
    let value = |x: usize, y: usize| -> Result<usize> {
        disp.get(x, y)
            .map(usize::from)
            .ok_or_else(|| param(format!("pixel ({x}, {y}) is invalid")))
    };
    let mut e = 0u64;
    for y in 0..h {
        for x in 0..w {
            let d = value(x, y)?;
            if d >= unaries.depth {
                return Err(param(format!("disparity {d} at ({x}, {y}) exceeds d_max")));
            }
            e += u64::from(unaries.get(x, y, d));
            // forward half of the 8-neighbourhood, so each edge counts once
            for (ox, oy) in [(1, 0), (-1, 1), (0, 1), (1, 1)] {
                if let Some((qx, qy)) = offset(x, y, ox, oy, w, h) {
                    e += u64::from(penalty(d, value(qx, qy)?, params));
                }
            }
        }
    }
    Ok(e)
}
