use crate::error::{Error, Result};

/// Integer disparity map with an explicit invalid state.
///
/// Right-image maps store non-negative magnitudes: a right pixel `p'` with
/// disparity `d` matches left pixel `p' + d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<u16>,
}

impl DisparityMap {
    pub const INVALID: u16 = u16::MAX;

    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![Self::INVALID; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, d: u16) -> Self {
        Self {
            width,
            height,
            values: vec![d; width * height],
        }
    }

    /// Builds a map from raw values, `INVALID` marking missing pixels.
    pub fn from_raw(width: usize, height: usize, values: Vec<u16>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{} values for a {width}x{height} map",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_options(width: usize, height: usize, values: &[Option<u16>]) -> Result<Self> {
        let raw = values
            .iter()
            .map(|v| v.unwrap_or(Self::INVALID))
            .collect();
        Self::from_raw(width, height, raw)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<u16> {
        let v = self.values[y * self.width + x];
        (v != Self::INVALID).then_some(v)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, d: Option<u16>) {
        self.values[y * self.width + x] = d.unwrap_or(Self::INVALID);
    }

    pub fn raw(&self) -> &[u16] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<u16>> + '_ {
        self.values
            .iter()
            .map(|&v| (v != Self::INVALID).then_some(v))
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != Self::INVALID).count()
    }

    /// Fraction of valid pixels over the whole map.
    pub fn density(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.valid_count() as f64 / self.values.len() as f64
    }

    pub fn same_size<T>(&self, other: &T) -> bool
    where
        T: HasSize,
    {
        self.width == other.width() && self.height == other.height()
    }
}

pub trait HasSize {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
}

impl HasSize for DisparityMap {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

/// Ground-truth disparities in pixels, `None` where unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct GtDisparity {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Option<f32>>,
    /// Divisor that was applied to the stored samples.
    pub scale: f64,
}

impl GtDisparity {
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        self.values[y * self.width + x]
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

impl From<&DisparityMap> for GtDisparity {
    fn from(map: &DisparityMap) -> Self {
        Self {
            width: map.width,
            height: map.height,
            values: map.iter().map(|v| v.map(f32::from)).collect(),
            scale: 1.0,
        }
    }
}

impl HasSize for GtDisparity {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}
