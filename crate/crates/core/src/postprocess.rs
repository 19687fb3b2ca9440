use crate::disparity::DisparityMap;
use crate::error::{param, Error, Result};

/// Left-right consistency tolerance: a match survives when the two
/// disparities differ by at most `max(abs, rel * d_left)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrThresholds {
    pub abs: f64,
    pub rel: f64,
}

impl Default for LrThresholds {
    fn default() -> Self {
        Self { abs: 1.0, rel: 0.03 }
    }
}

impl LrThresholds {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs >= 0.0 && abs.is_finite()) {
            return Err(param(format!("LR absolute threshold must be >= 0, got {abs}")));
        }
        if !(0.0..1.0).contains(&rel) {
            return Err(param(format!("LR relative threshold must be in [0, 1), got {rel}")));
        }
        Ok(Self { abs, rel })
    }

    pub fn accepts(&self, d_left: u16, d_right: u16) -> bool {
        let tol = self.abs.max(self.rel * f64::from(d_left));
        f64::from(d_left.abs_diff(d_right)) <= tol
    }
}

/// 3x3 median over the valid values of each border-clamped neighbourhood;
/// the lower median is taken for even counts.
pub fn median3x3(disp: &DisparityMap) -> DisparityMap {
    let (w, h) = (disp.width(), disp.height());
    let mut out = DisparityMap::new_invalid(w, h);
    let mut window = [0u16; 9];
    for y in 0..h {
        for x in 0..w {
            let mut n = 0;
            for dy in -1isize..=1 {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in -1isize..=1 {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    if let Some(v) = disp.get(xx, yy) {
                        window[n] = v;
                        n += 1;
                    }
                }
            }
            if n > 0 {
                let vals = &mut window[..n];
                let (_, m, _) = vals.select_nth_unstable((n - 1) / 2);
                out.set(x, y, Some(*m));
            }
        }
    }
    out
}

/// Keeps a left disparity `d` at `p` only if the right map at `p - d` holds a
/// consistent value.
pub fn lr_check(left: &DisparityMap, right: &DisparityMap, t: &LrThresholds) -> Result<DisparityMap> {
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::Dimensions(format!(
            "left map is {}x{}, right map is {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    let mut out = DisparityMap::new_invalid(left.width(), left.height());
    for y in 0..left.height() {
        for x in 0..left.width() {
            let Some(d) = left.get(x, y) else { continue };
            let Some(xr) = x.checked_sub(usize::from(d)) else {
                continue;
            };
            if let Some(dr) = right.get(xr, y) {
                if t.accepts(d, dr) {
                    out.set(x, y, Some(d));
                }
            }
        }
    }
    Ok(out)
}

/// Row-wise background fill. Interior gaps take the smaller flanking value,
/// gaps touching the image border copy their single neighbour, and rows with
/// no valid pixel copy the nearest filled row above (else below).
pub fn interpolate_background(disp: &DisparityMap) -> Result<DisparityMap> {
    let (w, h) = (disp.width(), disp.height());
    if disp.valid_count() == 0 {
        return Err(Error::NoValidPixels);
    }
    let mut out = disp.clone();
    let mut filled_row = vec![false; h];
    for (y, filled) in filled_row.iter_mut().enumerate() {
        let mut last: Option<(usize, u16)> = None;
        for x in 0..w {
            let Some(v) = disp.get(x, y) else { continue };
            let start = last.map_or(0, |(lx, _)| lx + 1);
            let fill = last.map_or(v, |(_, lv)| lv.min(v));
            for gx in start..x {
                out.set(gx, y, Some(fill));
            }
            last = Some((x, v));
        }
        if let Some((lx, lv)) = last {
            for gx in lx + 1..w {
                out.set(gx, y, Some(lv));
            }
            *filled = true;
        }
    }
    for y in 0..h {
        if filled_row[y] {
            continue;
        }
        let src = (0..y)
            .rev()
            .find(|&r| filled_row[r])
            .or_else(|| (y + 1..h).find(|&r| filled_row[r]))
            .expect("at least one row holds a valid pixel");
        for x in 0..w {
            let v = out.get(x, src);
            out.set(x, y, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const I: u16 = DisparityMap::INVALID;

    fn row(vals: &[u16]) -> DisparityMap {
        DisparityMap::from_raw(vals.len(), 1, vals.to_vec()).unwrap()
    }

    #[test]
    fn median_constant_and_impulse() {
        let m = DisparityMap::filled(5, 4, 7);
        assert_eq!(median3x3(&m), m);
        let mut m = DisparityMap::filled(5, 5, 5);
        m.set(2, 2, Some(99));
        assert_eq!(median3x3(&m), DisparityMap::filled(5, 5, 5));
    }

    #[test]
    fn median_all_invalid_stays_invalid() {
        let m = DisparityMap::new_invalid(3, 3);
        assert_eq!(median3x3(&m), m);
    }

    // Sort-based neighbourhood median.
    fn sort_median(m: &DisparityMap, x: usize, y: usize) -> Option<u16> {
        let (w, h) = (m.width() as i64, m.height() as i64);
        let mut vals = Vec::new();
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let xx = (x as i64 + dx).max(0).min(w - 1) as usize;
                let yy = (y as i64 + dy).max(0).min(h - 1) as usize;
                vals.extend(m.get(xx, yy));
            }
        }
        vals.sort();
        (!vals.is_empty()).then(|| vals[(vals.len() - 1) / 2])
    }

    #[test]
    fn median_matches_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let vals: Vec<u16> = (0..49)
                .map(|_| if rng.gen_bool(0.2) { I } else { rng.gen_range(0..64) })
                .collect();
            let m = DisparityMap::from_raw(7, 7, vals).unwrap();
            let f = median3x3(&m);
            for y in 0..7 {
                for x in 0..7 {
                    assert_eq!(f.get(x, y), sort_median(&m, x, y));
                }
            }
        }
    }

    #[test]
    fn lr_examples() {
        let t = LrThresholds::default();
        let mut l = DisparityMap::new_invalid(130, 1);
        let mut r = DisparityMap::new_invalid(130, 1);
        l.set(25, 0, Some(20));
        r.set(5, 0, Some(20));
        l.set(120, 0, Some(100));
        r.set(20, 0, Some(98));
        l.set(60, 0, Some(10));
        r.set(50, 0, Some(5));
        // points outside the right image
        l.set(3, 0, Some(9));
        let out = lr_check(&l, &r, &t).unwrap();
        assert_eq!(out.get(25, 0), Some(20));
        assert_eq!(out.get(120, 0), Some(100));
        assert_eq!(out.get(60, 0), None);
        assert_eq!(out.get(3, 0), None);
        assert_eq!(out.valid_count(), 2);
    }

    #[test]
    fn lr_thresholds_validate() {
        assert!(LrThresholds::new(-1.0, 0.0).is_err());
        assert!(LrThresholds::new(1.0, 1.0).is_err());
        assert!(LrThresholds::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn interpolation_rules() {
        let full = row(&[1, 2, 3]);
        assert_eq!(interpolate_background(&full).unwrap(), full);
        assert_eq!(interpolate_background(&row(&[5, I, I, 9])).unwrap(), row(&[5, 5, 5, 9]));
        assert_eq!(interpolate_background(&row(&[9, I, 5])).unwrap(), row(&[9, 5, 5]));
        assert_eq!(interpolate_background(&row(&[I, I, 7])).unwrap(), row(&[7, 7, 7]));
        assert_eq!(interpolate_background(&row(&[4, I])).unwrap(), row(&[4, 4]));
        assert!(matches!(
            interpolate_background(&row(&[I, I])),
            Err(Error::NoValidPixels)
        ));
    }

    #[test]
    fn empty_rows_copy_neighbours() {
        let m = DisparityMap::from_raw(2, 4, vec![I, I, 3, I, I, I, 8, 6]).unwrap();
        let f = interpolate_background(&m).unwrap();
        assert_eq!(f.raw(), &[3, 3, 3, 3, 3, 3, 8, 6]);
    }

    proptest! {
        #[test]
        fn lr_never_adds_pixels(
            l in proptest::collection::vec(prop_oneof![Just(I), 0u16..12], 48),
            r in proptest::collection::vec(prop_oneof![Just(I), 0u16..12], 48),
        ) {
            let lm = DisparityMap::from_raw(12, 4, l).unwrap();
            let rm = DisparityMap::from_raw(12, 4, r).unwrap();
            let out = lr_check(&lm, &rm, &LrThresholds::default()).unwrap();
            prop_assert!(out.valid_count() <= lm.valid_count());
            for (o, i) in out.iter().zip(lm.iter()) {
                prop_assert!(o.is_none() || o == i);
            }
        }

        #[test]
        fn interpolation_is_dense(vals in proptest::collection::vec(prop_oneof![Just(I), 0u16..40], 30)) {
            let m = DisparityMap::from_raw(6, 5, vals).unwrap();
            match interpolate_background(&m) {
                Ok(f) => {
                    prop_assert_eq!(f.valid_count(), 30);
                    for (o, i) in f.iter().zip(m.iter()) {
                        prop_assert!(i.is_none() || o == i);
                    }
                }
                Err(_) => prop_assert_eq!(m.valid_count(), 0),
            }
        }

        #[test]
        fn median_commutes_with_monotone_relabel(vals in proptest::collection::vec(0u16..50, 36)) {
            let m = DisparityMap::from_raw(6, 6, vals.clone()).unwrap();
            let relabel = |v: u16| 3 * v + 1;
            let mapped = DisparityMap::from_raw(6, 6, vals.iter().map(|&v| relabel(v)).collect()).unwrap();
            let a = median3x3(&m);
            let b = median3x3(&mapped);
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert_eq!(x.map(relabel), y);
            }
        }
    }
}
