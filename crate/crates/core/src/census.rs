//! Census features and Hamming matching costs.
//!
//! [`UnaryStream`] walks both images together in raster order. It keeps `W`
//! raw rows per image (the line buffers feeding the census window) and two
//! rolling buffers of the last `d_max + 1` features of the current row. At
//! column `x` it emits the left costs of `(x, y)` and, once enough left
//! features have arrived, the right costs of `(x - d_max, y)`. The last
//! `d_max` right pixels of each row are flushed after the row ends.

use crate::disparity::HasSize;
use crate::engine::StereoParams;
use crate::error::{param, Error, Result};
use crate::image::GrayImage;

pub const MIN_WINDOW: usize = 3;
pub const MAX_WINDOW: usize = 15;
const WORDS: usize = 4;

/// Validated odd census window width in `3..=15`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CensusWindow(usize);

impl CensusWindow {
    pub fn new(width: usize) -> Result<Self> {
        if width.is_multiple_of(2) || !(MIN_WINDOW..=MAX_WINDOW).contains(&width) {
            return Err(param(format!(
                "census window width must be odd and within {MIN_WINDOW}..={MAX_WINDOW}, got {width}"
            )));
        }
        Ok(Self(width))
    }

    pub fn width(self) -> usize {
        self.0
    }

    pub fn radius(self) -> usize {
        self.0 / 2
    }

    /// Number of feature bits, `W^2 - 1`.
    pub fn bits(self) -> usize {
        self.0 * self.0 - 1
    }

    /// Largest possible Hamming cost, also used for out-of-range disparities.
    pub fn max_cost(self) -> u16 {
        self.bits() as u16
    }
}

/// Census bit vector: bit `k` is set iff the `k`-th non-centre neighbour
/// (window raster order, border-clamped) is strictly darker than the centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CensusFeature {
    words: [u64; WORDS],
    len: u8,
}

impl CensusFeature {
    pub fn from_bits(bits: &[bool]) -> Self {
        assert!(bits.len() <= 64 * WORDS);
        let mut f = Self {
            words: [0; WORDS],
            len: bits.len() as u8,
        };
        for (k, &b) in bits.iter().enumerate() {
            if b {
                f.words[k / 64] |= 1 << (k % 64);
            }
        }
        f
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, k: usize) -> bool {
        assert!(k < self.len());
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|k| self.bit(k)).collect()
    }

    /// Hamming distance without the width check.
    #[inline]
    pub fn distance(&self, other: &Self) -> u16 {
        debug_assert_eq!(self.len, other.len);
        let mut n = 0;
        for i in 0..WORDS {
            n += (self.words[i] ^ other.words[i]).count_ones();
        }
        n as u16
    }
}

pub fn hamming(a: &CensusFeature, b: &CensusFeature) -> Result<u16> {
    if a.len != b.len {
        return Err(param(format!(
            "census widths differ: {} vs {} bits",
            a.len, b.len
        )));
    }
    Ok(a.distance(b))
}

#[inline]
fn clamp_coord(v: isize, len: usize) -> usize {
    v.clamp(0, len as isize - 1) as usize
}

/// Census feature of `(x, y)` with a `window`-wide square window.
pub fn census_at(img: &GrayImage, x: usize, y: usize, window: usize) -> Result<CensusFeature> {
    let window = CensusWindow::new(window)?;
    if x >= img.width() || y >= img.height() {
        return Err(param(format!(
            "pixel ({x}, {y}) outside {}x{} image",
            img.width(),
            img.height()
        )));
    }
    Ok(feature_from_rows(
        |yy| img.row(clamp_coord(yy, img.height())),
        x,
        y as isize,
        window,
    ))
}

/// Features of every pixel, row-major.
pub fn census_image(img: &GrayImage, window: CensusWindow) -> Vec<CensusFeature> {
    let mut out = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.push(feature_from_rows(
                |yy| img.row(clamp_coord(yy, img.height())),
                x,
                y as isize,
                window,
            ));
        }
    }
    out
}

#[inline]
fn feature_from_rows<'a>(
    row_at: impl Fn(isize) -> &'a [u8],
    x: usize,
    y: isize,
    window: CensusWindow,
) -> CensusFeature {
    let r = window.radius() as isize;
    let centre = row_at(y)[x];
    let mut f = CensusFeature {
        words: [0; WORDS],
        len: window.bits() as u8,
    };
    let mut k = 0usize;
    for dy in -r..=r {
        let row = row_at(y + dy);
        let w = row.len();
        for dx in -r..=r {
            if dx == 0 && dy == 0 {
                continue;
            }
            let v = row[clamp_coord(x as isize + dx, w)];
            if v < centre {
                f.words[k >> 6] |= 1 << (k & 63);
            }
            k += 1;
        }
    }
    f
}

/// Rolling store of the most recent raw rows of one image.
struct RowLines {
    width: usize,
    height: usize,
    slots: Vec<Vec<u8>>,
    loaded: usize,
}

impl RowLines {
    fn new(width: usize, height: usize, window: CensusWindow) -> Self {
        Self {
            width,
            height,
            slots: vec![Vec::new(); window.width()],
            loaded: 0,
        }
    }

    /// Ingests rows until `last` (clamped) is resident.
    fn fill_to(&mut self, img: &GrayImage, last: usize) {
        let last = last.min(self.height - 1);
        while self.loaded <= last {
            let n = self.slots.len();
            let slot = &mut self.slots[self.loaded % n];
            slot.clear();
            slot.extend_from_slice(img.row(self.loaded));
            self.loaded += 1;
        }
    }

    fn row(&self, y: isize) -> &[u8] {
        let y = clamp_coord(y, self.height);
        debug_assert!(y < self.loaded && y + self.slots.len() >= self.loaded);
        &self.slots[y % self.slots.len()]
    }

    fn resident(&self) -> usize {
        self.slots.iter().filter(|s| s.len() == self.width).count()
    }
}

/// Fixed-capacity buffer of the newest features of the current row.
#[derive(Debug)]
struct FeatureRing {
    slots: Vec<CensusFeature>,
    head: usize,
    len: usize,
}

impl FeatureRing {
    fn new(capacity: usize) -> Self {
        Self {
            slots: vec![CensusFeature::default(); capacity],
            head: 0,
            len: 0,
        }
    }

    fn clear(&mut self) {
        self.head = 0;
        self.len = 0;
    }

    fn push(&mut self, f: CensusFeature) {
        self.head = (self.head + 1) % self.slots.len();
        self.slots[self.head] = f;
        self.len = (self.len + 1).min(self.slots.len());
    }

    /// Feature pushed `age` steps ago (0 is the newest).
    #[inline]
    fn back(&self, age: usize) -> &CensusFeature {
        debug_assert!(age < self.len);
        let n = self.slots.len();
        &self.slots[(self.head + n - age) % n]
    }
}

/// Buffer occupancy observed during a stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamStats {
    /// Peak number of features held in both rolling buffers together.
    pub peak_features: usize,
    /// Peak number of raw rows resident per image.
    pub peak_rows: usize,
}

/// Which pixels an emission carries costs for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emission {
    pub row: usize,
    pub left_column: Option<usize>,
    pub right_column: Option<usize>,
}

/// Unary costs of one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelUnary {
    pub column: usize,
    pub costs: Vec<u16>,
}

/// One step of the stream: the left costs of the cursor pixel and the right
/// costs of the pixel `d_max` columns earlier (or, during a row flush, only
/// right costs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryPair {
    pub row: usize,
    pub left: Option<PixelUnary>,
    pub right: Option<PixelUnary>,
}

/// Raster-order generator of left and right unary costs.
pub struct UnaryStream<'a> {
    left: &'a GrayImage,
    right: &'a GrayImage,
    window: CensusWindow,
    d_max: usize,
    max_cost: u16,
    lines_left: RowLines,
    lines_right: RowLines,
    ring_left: FeatureRing,
    ring_right: FeatureRing,
    x: usize,
    y: usize,
    stats: StreamStats,
}

pub fn stream_unaries<'a>(
    left: &'a GrayImage,
    right: &'a GrayImage,
    params: &StereoParams,
) -> Result<UnaryStream<'a>> {
    UnaryStream::new(left, right, params)
}

impl<'a> UnaryStream<'a> {
    pub fn new(left: &'a GrayImage, right: &'a GrayImage, params: &StereoParams) -> Result<Self> {
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
        let window = params.census_window()?;
        let (w, h) = (left.width(), left.height());
        Ok(Self {
            left,
            right,
            window,
            d_max: params.d_max,
            max_cost: window.max_cost(),
            lines_left: RowLines::new(w, h, window),
            lines_right: RowLines::new(w, h, window),
            ring_left: FeatureRing::new(params.d_max + 1),
            ring_right: FeatureRing::new(params.d_max + 1),
            x: 0,
            y: 0,
            stats: StreamStats::default(),
        })
    }

    pub fn width(&self) -> usize {
        self.left.width()
    }

    pub fn height(&self) -> usize {
        self.left.height()
    }

    pub fn stats(&self) -> StreamStats {
        self.stats
    }

    /// Writes the next emission's costs into the caller's buffers (each
    /// `d_max + 1` long). Returns `None` once the image is exhausted.
    pub fn next_into(&mut self, left_costs: &mut [u16], right_costs: &mut [u16]) -> Option<Emission> {
        let (w, h, dm) = (self.width(), self.height(), self.d_max);
        debug_assert_eq!(left_costs.len(), dm + 1);
        debug_assert_eq!(right_costs.len(), dm + 1);
        if self.x == w + dm {
            self.x = 0;
            self.y += 1;
        }
        if self.y >= h {
            return None;
        }
        let (x, y) = (self.x, self.y);
        self.x += 1;

        if x == 0 {
            let last = y + self.window.radius();
            self.lines_left.fill_to(self.left, last);
            self.lines_right.fill_to(self.right, last);
            self.ring_left.clear();
            self.ring_right.clear();
            self.stats.peak_rows = self
                .stats
                .peak_rows
                .max(self.lines_left.resident())
                .max(self.lines_right.resident());
        }

        if x < w {
            let lines_l = &self.lines_left;
            let lines_r = &self.lines_right;
            let fl = feature_from_rows(|yy| lines_l.row(yy), x, y as isize, self.window);
            let fr = feature_from_rows(|yy| lines_r.row(yy), x, y as isize, self.window);
            self.ring_left.push(fl);
            self.ring_right.push(fr);
            self.stats.peak_features = self
                .stats
                .peak_features
                .max(self.ring_left.len + self.ring_right.len);

            for (d, c) in left_costs.iter_mut().enumerate() {
                *c = if d <= x {
                    fl.distance(self.ring_right.back(d))
                } else {
                    self.max_cost
                };
            }
            let right_column = if x >= dm {
                let fr_old = self.ring_right.back(dm);
                for (d, c) in right_costs.iter_mut().enumerate() {
                    *c = self.ring_left.back(dm - d).distance(fr_old);
                }
                Some(x - dm)
            } else {
                None
            };
            Some(Emission {
                row: y,
                left_column: Some(x),
                right_column,
            })
        } else {
            // flush the right pixels still waiting in the buffer
            let xr = x - dm;
            let fr = *self.ring_right.back(w - 1 - xr);
            for (d, c) in right_costs.iter_mut().enumerate() {
                *c = if xr + d < w {
                    self.ring_left.back(w - 1 - xr - d).distance(&fr)
                } else {
                    self.max_cost
                };
            }
            Some(Emission {
                row: y,
                left_column: None,
                right_column: Some(xr),
            })
        }
    }
}

impl Iterator for UnaryStream<'_> {
    type Item = UnaryPair;

    fn next(&mut self) -> Option<UnaryPair> {
        let n = self.d_max + 1;
        let mut lc = vec![0u16; n];
        let mut rc = vec![0u16; n];
        let e = self.next_into(&mut lc, &mut rc)?;
        Some(UnaryPair {
            row: e.row,
            left: e.left_column.map(|column| PixelUnary { column, costs: lc }),
            right: e.right_column.map(|column| PixelUnary { column, costs: rc }),
        })
    }
}

impl HasSize for UnaryStream<'_> {
    fn width(&self) -> usize {
        self.left.width()
    }
    fn height(&self) -> usize {
        self.left.height()
    }
}
