//! PGM (P5/P2) and PFM (Pf) codecs.
//!
//! Camera images are always reduced to 8 bits; ground truth keeps the full
//! sample depth. PFM disparity maps are written little-endian (negative
//! scale field) with rows stored bottom-to-top, and `-1.0` marking invalid
//! pixels.

use std::fs;
use std::path::Path;

use crate::disparity::{DisparityMap, GtDisparity, HasSize};
use crate::error::{Error, Result};

/// Row-major 8-bit intensity raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions(format!(
                "image must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{} samples for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Applies `f` to every intensity.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl HasSize for GrayImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

/// A decoded PGM at its native sample depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmRaster {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl PgmRaster {
    /// Reduces samples to 8 bits. Rasters with `maxval <= 255` are kept as-is;
    /// deeper ones are divided by `(maxval + 1) / 256`.
    pub fn to_gray(&self) -> GrayImage {
        let data = if self.maxval <= 255 {
            self.samples.iter().map(|&v| v as u8).collect()
        } else {
            let div = ((u32::from(self.maxval) + 1) / 256).max(1);
            self.samples
                .iter()
                .map(|&v| (u32::from(v) / div).min(255) as u8)
                .collect()
        };
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// A decoded single-channel PFM, rows top-to-bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct PfmImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn err(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            offset,
            msg: msg.into(),
        }
    }

    fn skip_space(&mut self) {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Next whitespace-delimited token, `None` at end of input.
    fn token(&mut self) -> Option<(usize, &'a str)> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .map(|s| (start, s))
    }

    fn header_uint(&mut self, what: &str) -> Result<u64> {
        let here = self.pos;
        let (offset, tok) = self
            .token()
            .ok_or_else(|| self.err(here, format!("missing {what}")))?;
        if !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.err(offset, format!("{what} is not a decimal integer: {tok:?}")));
        }
        tok.parse()
            .map_err(|_| self.err(offset, format!("{what} out of range: {tok}")))
    }

    /// Consumes the single whitespace byte that separates header and raster.
    fn raster_separator(&mut self) -> Result<()> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.err(self.pos, "expected whitespace before raster data")),
            None => Ok(()),
        }
    }
}

fn dims(c: &mut Cursor<'_>) -> Result<(usize, usize)> {
    c.skip_space();
    let w_off = c.pos;
    let w = c.header_uint("width")?;
    c.skip_space();
    let h_off = c.pos;
    let h = c.header_uint("height")?;
    if w == 0 {
        return Err(c.err(w_off, "width must be at least 1"));
    }
    if h == 0 {
        return Err(c.err(h_off, "height must be at least 1"));
    }
    let (w, h) = (w as usize, h as usize);
    if w.checked_mul(h).is_none_or(|n| n > (1 << 31)) {
        return Err(c.err(w_off, format!("image too large: {w}x{h}")));
    }
    Ok((w, h))
}

/// Decodes a binary (P5) or ASCII (P2) PGM.
pub fn decode_pgm(bytes: &[u8]) -> Result<PgmRaster> {
    let mut c = Cursor::new(bytes);
    let ascii = match bytes.get(..2) {
        Some(b"P5") => false,
        Some(b"P2") => true,
        _ => return Err(c.err(0, "expected PGM magic \"P5\" or \"P2\"")),
    };
    c.pos = 2;
    let (width, height) = dims(&mut c)?;
    c.skip_space();
    let mv_off = c.pos;
    let maxval = c.header_uint("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(c.err(mv_off, format!("maxval must be in 1..=65535, got {maxval}")));
    }
    let maxval = maxval as u16;
    let n = width * height;
    let mut samples = Vec::with_capacity(n);

    if ascii {
        for _ in 0..n {
            let Some((off, tok)) = c.token() else {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: samples.len(),
                });
            };
            let v: u32 = tok
                .parse()
                .map_err(|_| c.err(off, format!("invalid sample {tok:?}")))?;
            if v > u32::from(maxval) {
                return Err(c.err(off, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v as u16);
        }
    } else {
        c.raster_separator()?;
        let wide = maxval > 255;
        let bytes_per = if wide { 2 } else { 1 };
        let payload = &bytes[c.pos..];
        if payload.len() < n * bytes_per {
            return Err(Error::SizeMismatch {
                expected: n * bytes_per,
                found: payload.len(),
            });
        }
        for i in 0..n {
            let v = if wide {
                u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]])
            } else {
                u16::from(payload[i])
            };
            if v > maxval {
                let off = c.pos + i * bytes_per;
                return Err(c.err(off, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v);
        }
    }

    Ok(PgmRaster {
        width,
        height,
        maxval,
        samples,
    })
}

pub fn read_pgm_raw(path: impl AsRef<Path>) -> Result<PgmRaster> {
    decode_pgm(&fs::read(path)?)
}

/// Reads a PGM as a camera image (8 bits per pixel).
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    Ok(read_pgm_raw(path)?.to_gray())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Encodes a raster at its own depth (16-bit big-endian when `maxval > 255`).
pub fn encode_pgm_raster(r: &PgmRaster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", r.width, r.height, r.maxval).into_bytes();
    if r.maxval > 255 {
        for &v in &r.samples {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(r.samples.iter().map(|&v| v as u8));
    }
    out
}

pub fn write_pgm_raster(path: impl AsRef<Path>, r: &PgmRaster) -> Result<()> {
    fs::write(path, encode_pgm_raster(r))?;
    Ok(())
}

pub fn decode_pfm(bytes: &[u8]) -> Result<PfmImage> {
    let mut c = Cursor::new(bytes);
    match bytes.get(..2) {
        Some(b"Pf") => {}
        Some(b"PF") => return Err(c.err(0, "colour PFM (\"PF\") is not supported")),
        _ => return Err(c.err(0, "expected PFM magic \"Pf\"")),
    }
    c.pos = 2;
    let (width, height) = dims(&mut c)?;
    let here = c.pos;
    let (s_off, tok) = c
        .token()
        .ok_or_else(|| c.err(here, "missing scale field"))?;
    let scale: f32 = tok
        .parse()
        .map_err(|_| c.err(s_off, format!("invalid scale field {tok:?}")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(c.err(s_off, "scale field must be finite and non-zero"));
    }
    c.raster_separator()?;
    let little = scale < 0.0;
    let n = width * height;
    let payload = &bytes[c.pos..];
    if payload.len() < 4 * n {
        return Err(Error::SizeMismatch {
            expected: 4 * n,
            found: payload.len(),
        });
    }
    let mut data = vec![0f32; n];
    for (i, chunk) in payload[..4 * n].chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        // stored bottom row first
        let (row, col) = (i / width, i % width);
        data[(height - 1 - row) * width + col] = v;
    }
    Ok(PfmImage {
        width,
        height,
        data,
    })
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<PfmImage> {
    decode_pfm(&fs::read(path)?)
}

pub fn encode_pfm(disp: &DisparityMap) -> Vec<u8> {
    let (w, h) = (disp.width(), disp.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = disp.get(x, y).map_or(-1.0f32, f32::from);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_pfm(path: impl AsRef<Path>, disp: &DisparityMap) -> Result<()> {
    if disp.is_empty() {
        return Err(Error::InvalidParam("cannot write an empty disparity map".into()));
    }
    fs::write(path, encode_pfm(disp))?;
    Ok(())
}

/// Converts PFM samples to an integer disparity map. Negative or non-finite
/// samples are invalid; other samples must be integral.
pub fn pfm_to_disparity(pfm: &PfmImage) -> Result<DisparityMap> {
    let mut values = Vec::with_capacity(pfm.data.len());
    for (i, &v) in pfm.data.iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            values.push(DisparityMap::INVALID);
        } else if v.fract() != 0.0 || v >= f32::from(DisparityMap::INVALID) {
            return Err(Error::InvalidParam(format!(
                "pixel {i} holds non-integral or out-of-range disparity {v}"
            )));
        } else {
            values.push(v as u16);
        }
    }
    DisparityMap::from_raw(pfm.width, pfm.height, values)
}

pub fn read_disparity_pfm(path: impl AsRef<Path>) -> Result<DisparityMap> {
    pfm_to_disparity(&read_pfm(path)?)
}

/// Decodes ground truth from PGM (raw 0 is invalid) or PFM (negative or
/// infinite is invalid); valid samples are divided by `scale`.
pub fn decode_gt(bytes: &[u8], scale: f64) -> Result<GtDisparity> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "ground-truth scale must be positive, got {scale}"
        )));
    }
    match bytes.get(..2) {
        Some(b"Pf") | Some(b"PF") => {
            let pfm = decode_pfm(bytes)?;
            let values = pfm
                .data
                .iter()
                .map(|&v| (v >= 0.0 && v.is_finite()).then(|| (f64::from(v) / scale) as f32))
                .collect();
            Ok(GtDisparity {
                width: pfm.width,
                height: pfm.height,
                values,
                scale,
            })
        }
        _ => {
            let pgm = decode_pgm(bytes)?;
            let values = pgm
                .samples
                .iter()
                .map(|&v| (v != 0).then(|| (f64::from(v) / scale) as f32))
                .collect();
            Ok(GtDisparity {
                width: pgm.width,
                height: pgm.height,
                values,
                scale,
            })
        }
    }
}

pub fn read_gt(path: impl AsRef<Path>, scale: f64) -> Result<GtDisparity> {
    decode_gt(&fs::read(path)?, scale)
}

/// Writes ground truth as a 16-bit PGM, `scale` times the disparity, 0 for
/// unknown pixels.
pub fn write_gt_pgm(path: impl AsRef<Path>, gt: &GtDisparity, scale: f64) -> Result<()> {
    let samples = gt
        .values
        .iter()
        .map(|v| v.map_or(0, |d| (f64::from(d) * scale).round().clamp(1.0, 65535.0) as u16))
        .collect();
    let raster = PgmRaster {
        width: gt.width,
        height: gt.height,
        maxval: 65535,
        samples,
    };
    write_pgm_raster(path, &raster)
}

/// Pixel-membership mask loaded from a PGM; sample value 255 is in-region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    pub width: usize,
    pub height: usize,
    pub inside: Vec<bool>,
}

impl RegionMask {
    pub fn full(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            inside: vec![true; width * height],
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.inside[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> bool {
        self.inside.len() == other.inside.len()
            && self.inside.iter().zip(&other.inside).all(|(&a, &b)| !a || b)
    }
}

impl HasSize for RegionMask {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

pub fn decode_mask(bytes: &[u8]) -> Result<RegionMask> {
    let pgm = decode_pgm(bytes)?;
    let inside = pgm.samples.iter().map(|&v| v == 255).collect();
    Ok(RegionMask {
        width: pgm.width,
        height: pgm.height,
        inside,
    })
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<RegionMask> {
    decode_mask(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn minimal_binary_pgm() {
        let img = decode_pgm(&pgm("P5 1 1 255\n", &[0x7f])).unwrap().to_gray();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.data(), &[127]);

        let img = decode_pgm(&pgm("P5 2 1 255\n", &[0, 255])).unwrap().to_gray();
        assert_eq!(img.data(), &[0, 255]);
    }

    #[test]
    fn ascii_pgm_with_comments() {
        let r = decode_pgm(b"P2\n# made by hand\n3 1\n# depth\n9\n1 5\n9\n").unwrap();
        assert_eq!(r.samples, vec![1, 5, 9]);
        assert_eq!(r.maxval, 9);
    }

    // Decodes a 16-bit P5 file with a deliberately different route: locate the
    // raster by counting header whitespace runs, then assemble samples from
    // high and low byte planes.
    fn two_pass_decode(bytes: &[u8]) -> Vec<u16> {
        let mut fields = 0;
        let mut i = 0;
        let mut in_tok = false;
        while fields < 4 {
            let ws = bytes[i].is_ascii_whitespace();
            if !ws && !in_tok {
                in_tok = true;
            } else if ws && in_tok {
                in_tok = false;
                fields += 1;
            }
            i += 1;
        }
        let payload = &bytes[i..];
        let hi: Vec<u32> = payload.iter().step_by(2).map(|&b| b as u32).collect();
        let lo: Vec<u32> = payload.iter().skip(1).step_by(2).map(|&b| b as u32).collect();
        hi.iter().zip(&lo).map(|(h, l)| (h * 256 + l) as u16).collect()
    }

    #[test]
    fn sixteen_bit_samples_preserved() {
        let samples: Vec<u16> = vec![0, 1, 255, 256, 2560, 40000, 65535, 12345];
        let raster = PgmRaster {
            width: 4,
            height: 2,
            maxval: 65535,
            samples: samples.clone(),
        };
        let bytes = encode_pgm_raster(&raster);
        let decoded = decode_pgm(&bytes).unwrap();
        assert_eq!(decoded.samples, two_pass_decode(&bytes));
        assert_eq!(decoded.samples, samples);
        // camera view divides by 256
        assert_eq!(decoded.to_gray().data(), &[0, 0, 0, 1, 10, 156, 255, 48]);
    }

    #[test]
    fn header_errors_name_offset() {
        match decode_pgm(b"P6 1 1 255\n\0") {
            Err(Error::Parse { offset: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match decode_pgm(b"P5 1 x 255\n\0") {
            Err(Error::Parse { offset: 5, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match decode_pgm(b"P5 1 1 70000\n\0") {
            Err(Error::Parse { offset: 7, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_is_size_mismatch() {
        match decode_pgm(&pgm("P5 2 2 255\n", &[1, 2, 3])) {
            Err(Error::SizeMismatch {
                expected: 4,
                found: 3,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match decode_pgm(b"P2 2 1 9 4") {
            Err(Error::SizeMismatch {
                expected: 2,
                found: 1,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pfm_payloads() {
        let one = DisparityMap::filled(1, 1, 5);
        let bytes = encode_pfm(&one);
        assert_eq!(&bytes[..bytes.len() - 4], b"Pf\n1 1\n-1.0\n");
        assert_eq!(&bytes[bytes.len() - 4..], &5.0f32.to_le_bytes());

        let inv = DisparityMap::new_invalid(1, 1);
        let bytes = encode_pfm(&inv);
        assert_eq!(&bytes[bytes.len() - 4..], &(-1.0f32).to_le_bytes());
    }

    #[test]
    fn pfm_rows_are_bottom_to_top() {
        let map = DisparityMap::from_raw(1, 2, vec![1, 2]).unwrap();
        let bytes = encode_pfm(&map);
        let n = bytes.len();
        assert_eq!(&bytes[n - 8..n - 4], &2.0f32.to_le_bytes());
        assert_eq!(&bytes[n - 4..], &1.0f32.to_le_bytes());
        assert_eq!(pfm_to_disparity(&decode_pfm(&bytes).unwrap()).unwrap(), map);
    }

    #[test]
    fn big_endian_pfm_is_accepted() {
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&3.0f32.to_be_bytes());
        bytes.extend_from_slice(&(-1.0f32).to_be_bytes());
        let map = pfm_to_disparity(&decode_pfm(&bytes).unwrap()).unwrap();
        assert_eq!(map.get(0, 0), Some(3));
        assert_eq!(map.get(1, 0), None);
    }

    #[test]
    fn gt_from_pgm() {
        let raster = PgmRaster {
            width: 2,
            height: 1,
            maxval: 65535,
            samples: vec![2560, 0],
        };
        let gt = decode_gt(&encode_pgm_raster(&raster), 256.0).unwrap();
        assert_eq!(gt.values, vec![Some(10.0), None]);
    }

    #[test]
    fn gt_middlebury_scale_eight() {
        // three hand-decoded samples: 80/8, 4/8, 255/8
        let gt = decode_gt(&pgm("P5 3 1 255\n", &[80, 4, 255]), 8.0).unwrap();
        assert_eq!(gt.values, vec![Some(10.0), Some(0.5), Some(31.875)]);
    }

    #[test]
    fn gt_from_pfm_sentinels() {
        let mut bytes = b"Pf\n3 1\n-1\n".to_vec();
        for v in [2.5f32, -1.0, f32::INFINITY] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let gt = decode_gt(&bytes, 1.0).unwrap();
        assert_eq!(gt.values, vec![Some(2.5), None, None]);
    }

    #[test]
    fn masks_select_255() {
        let m = decode_mask(&pgm("P5 4 1 255\n", &[255, 128, 0, 255])).unwrap();
        assert_eq!(m.inside, vec![true, false, false, true]);
    }
}
