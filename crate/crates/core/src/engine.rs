//! Single-pass raster-order cost aggregation.
//!
//! Each pixel's cost vector combines its unary with the vectors of its four
//! causal neighbours (left, above-left, above, above-right): the unary plus
//! the average of the four normalised transition terms, an absent neighbour
//! contributing zero. Costs are held at four times their value, so unaries
//! enter as `4*C` and penalties as `4*P1`/`4*P2`. The summed transition
//! terms are then divided by four with truncation (a two-bit shift), which
//! keeps two fractional bits of the average. A single step is therefore
//! `floor(4 * L)` of its exact value; over many steps the truncations can
//! accumulate.
//!
//! Per image the engine holds one line of cost vectors (the previous row to
//! the right of the cursor, the current row to its left), a three-vector
//! window over the row above and a register for the left neighbour.

use crate::census::{CensusWindow, StreamStats, UnaryStream};
use crate::disparity::DisparityMap;
use crate::error::{param, Result};
use crate::image::GrayImage;

/// Matching parameters shared by every algorithm in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoParams {
    /// Largest disparity searched; the range is `0..=d_max`.
    pub d_max: usize,
    /// Census window width (odd, 3..=15).
    pub window: usize,
    /// Penalty for a disparity change of one.
    pub p1: u32,
    /// Penalty for larger changes.
    pub p2: u32,
    /// Left-right check: absolute tolerance in disparities.
    pub lr_abs: f64,
    /// Left-right check: tolerance relative to the left disparity.
    pub lr_rel: f64,
}

impl Default for StereoParams {
    fn default() -> Self {
        Self {
            d_max: 64,
            window: 13,
            p1: 8,
            p2: 96,
            lr_abs: 1.0,
            lr_rel: 0.03,
        }
    }
}

pub const MAX_P2: u32 = 1 << 16;

impl StereoParams {
    pub fn validate(&self) -> Result<()> {
        CensusWindow::new(self.window)?;
        if self.p1 == 0 || self.p1 >= self.p2 {
            return Err(param(format!(
                "penalties must satisfy 0 < P1 < P2, got P1={} P2={}",
                self.p1, self.p2
            )));
        }
        if self.p2 > MAX_P2 {
            return Err(param(format!("P2 must not exceed {MAX_P2}, got {}", self.p2)));
        }
        if self.d_max >= usize::from(DisparityMap::INVALID) {
            return Err(param(format!("d_max too large: {}", self.d_max)));
        }
        if !(self.lr_abs >= 0.0 && self.lr_abs.is_finite()) {
            return Err(param(format!("lr_abs must be >= 0, got {}", self.lr_abs)));
        }
        if !(0.0..1.0).contains(&self.lr_rel) {
            return Err(param(format!("lr_rel must be in [0, 1), got {}", self.lr_rel)));
        }
        Ok(())
    }

    pub fn census_window(&self) -> Result<CensusWindow> {
        CensusWindow::new(self.window)
    }

    pub fn num_disparities(&self) -> usize {
        self.d_max + 1
    }

    /// `W^2 - 1`, the largest unary.
    pub fn max_unary(&self) -> u32 {
        (self.window * self.window - 1) as u32
    }
}

/// Smoothness term: 0 for equal disparities, `P1` for a step of one, `P2`
/// otherwise.
#[inline]
pub fn penalty(d: usize, d_prime: usize, params: &StereoParams) -> u32 {
    match d.abs_diff(d_prime) {
        0 => 0,
        1 => params.p1,
        _ => params.p2,
    }
}

/// Aggregated costs of one pixel with their minimum cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostVector {
    costs: Vec<u32>,
    min: u32,
}

impl CostVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            costs: vec![0; len],
            min: 0,
        }
    }

    pub fn from_costs(costs: Vec<u32>) -> Self {
        let min = costs.iter().copied().min().unwrap_or(0);
        Self { costs, min }
    }

    pub fn costs(&self) -> &[u32] {
        &self.costs
    }

    pub fn min(&self) -> u32 {
        self.min
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn wta(&self) -> usize {
        wta(&self.costs)
    }

    fn copy_from(&mut self, other: &CostVector) {
        self.costs.copy_from_slice(&other.costs);
        self.min = other.min;
    }
}

/// Index of the smallest cost; ties go to the smallest disparity.
pub fn wta(costs: &[u32]) -> usize {
    let mut best = 0;
    for (d, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = d;
        }
    }
    best
}

/// Scaled cost vector of one pixel from its unary and available causal
/// predecessors.
pub fn aggregate_step(
    unary: &[u16],
    predecessors: &[&CostVector],
    params: &StereoParams,
) -> Result<CostVector> {
    let n = params.num_disparities();
    if unary.len() != n {
        return Err(param(format!(
            "unary has {} entries, expected {n}",
            unary.len()
        )));
    }
    if predecessors.len() > 4 {
        return Err(param(format!(
            "at most 4 predecessors, got {}",
            predecessors.len()
        )));
    }
    if let Some(p) = predecessors.iter().find(|p| p.len() != n) {
        return Err(param(format!(
            "predecessor has {} entries, expected {n}",
            p.len()
        )));
    }
    let mut out = CostVector::zeros(n);
    aggregate_into(unary, predecessors, 4 * params.p1, 4 * params.p2, &mut out);
    Ok(out)
}

#[inline]
fn aggregate_into(
    unary: &[u16],
    preds: &[&CostVector],
    p1: u32,
    p2: u32,
    out: &mut CostVector,
) {
    let n = unary.len();
    // transition terms first, then the average over the four directions
    out.costs.fill(0);
    for pred in preds {
        let c = &pred.costs[..n];
        let m = pred.min;
        let jump = m + p2;
        let o = &mut out.costs[..n];
        if n == 1 {
            o[0] += c[0].min(jump) - m;
            continue;
        }
        o[0] += c[0].min(c[1] + p1).min(jump) - m;
        for d in 1..n - 1 {
            o[d] += c[d].min(c[d - 1] + p1).min(c[d + 1] + p1).min(jump) - m;
        }
        o[n - 1] += c[n - 1].min(c[n - 2] + p1).min(jump) - m;
    }
    for (o, &u) in out.costs.iter_mut().zip(unary) {
        *o = 4 * u32::from(u) + (*o >> 2);
    }
    out.min = out.costs.iter().copied().min().unwrap_or(0);
}

/// Line, window and register storage for one image's cost lattice.
pub struct CostLineBuffer {
    width: usize,
    line: Vec<CostVector>,
    line_live: usize,
    window: [CostVector; 3],
    window_live: [bool; 3],
    left: CostVector,
    left_live: bool,
    current: CostVector,
    x: usize,
    y: usize,
    peak_live: usize,
    p1: u32,
    p2: u32,
}

impl CostLineBuffer {
    pub fn new(width: usize, params: &StereoParams) -> Self {
        let n = params.num_disparities();
        Self {
            width,
            line: vec![CostVector::zeros(n); width],
            line_live: 0,
            window: [
                CostVector::zeros(n),
                CostVector::zeros(n),
                CostVector::zeros(n),
            ],
            window_live: [false; 3],
            left: CostVector::zeros(n),
            left_live: false,
            current: CostVector::zeros(n),
            x: 0,
            y: 0,
            peak_live: 0,
            p1: 4 * params.p1,
            p2: 4 * params.p2,
        }
    }

    /// Position of the next pixel to be aggregated.
    pub fn cursor(&self) -> (usize, usize) {
        (self.x, self.y)
    }

    /// Aggregates the next pixel in raster order and returns its vector.
    pub fn step(&mut self, unary: &[u16]) -> &CostVector {
        let (x, y, w) = (self.x, self.y, self.width);
        if y > 0 {
            if x == 0 {
                self.window_live[0] = false;
                self.window[1].copy_from(&self.line[0]);
                self.window_live[1] = true;
                self.window_live[2] = w > 1;
                if w > 1 {
                    self.window[2].copy_from(&self.line[1]);
                }
            } else {
                self.window.rotate_left(1);
                self.window_live.rotate_left(1);
                self.window_live[2] = x + 1 < w;
                if x + 1 < w {
                    self.window[2].copy_from(&self.line[x + 1]);
                }
            }
        }
        if x == 0 {
            self.left_live = false;
        }

        let mut preds: [&CostVector; 4] = [&self.left; 4];
        let mut n = 0;
        if self.left_live {
            preds[n] = &self.left;
            n += 1;
        }
        for (v, &live) in self.window.iter().zip(&self.window_live) {
            if live {
                preds[n] = v;
                n += 1;
            }
        }
        aggregate_into(unary, &preds[..n], self.p1, self.p2, &mut self.current);

        let live = self.line_live
            + self.window_live.iter().filter(|&&b| b).count()
            + usize::from(self.left_live)
            + 1;
        self.peak_live = self.peak_live.max(live);

        self.line[x].copy_from(&self.current);
        if y == 0 {
            self.line_live += 1;
        }
        std::mem::swap(&mut self.left, &mut self.current);
        self.left_live = true;

        self.x += 1;
        if self.x == w {
            self.x = 0;
            self.y += 1;
        }
        &self.left
    }

    /// Peak number of cost entries simultaneously holding live data.
    pub fn peak_entries(&self) -> usize {
        self.peak_live * self.left.len()
    }
}

/// Which image a cost lattice belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// One aggregated pixel, as reported to an observer.
#[derive(Debug)]
pub struct AggregateEvent<'a> {
    pub side: Side,
    pub x: usize,
    pub y: usize,
    pub unary: &'a [u16],
    pub costs: &'a CostVector,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Peak live cost entries across both lattices.
    pub peak_cost_entries: usize,
    /// Unaries consumed by the left and right lattices.
    pub unary_reads: [usize; 2],
    pub stream: StreamStats,
}

impl RunStats {
    /// Peak cost storage in bytes (32-bit entries).
    pub fn peak_cost_bytes(&self) -> usize {
        self.peak_cost_entries * std::mem::size_of::<u32>()
    }
}

#[derive(Debug, Clone)]
pub struct R3sgmOutput {
    pub left: DisparityMap,
    pub right: DisparityMap,
    pub stats: RunStats,
}

/// Left and right WTA disparity maps from one streaming pass.
pub fn run_r3sgm(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
) -> Result<(DisparityMap, DisparityMap)> {
    let out = run_r3sgm_observed(left, right, params, |_| {})?;
    Ok((out.left, out.right))
}

/// As [`run_r3sgm`], reporting every aggregated vector to `observer` and
/// returning buffer statistics.
pub fn run_r3sgm_observed(
    left: &GrayImage,
    right: &GrayImage,
    params: &StereoParams,
    mut observer: impl FnMut(AggregateEvent<'_>),
) -> Result<R3sgmOutput> {
    let mut stream = UnaryStream::new(left, right, params)?;
    let (w, h) = (left.width(), left.height());
    let n = params.num_disparities();
    let mut lattice_l = CostLineBuffer::new(w, params);
    let mut lattice_r = CostLineBuffer::new(w, params);
    let mut disp_l = DisparityMap::new_invalid(w, h);
    let mut disp_r = DisparityMap::new_invalid(w, h);
    let mut unary_l = vec![0u16; n];
    let mut unary_r = vec![0u16; n];
    let mut reads = [0usize; 2];

    while let Some(e) = stream.next_into(&mut unary_l, &mut unary_r) {
        if let Some(x) = e.left_column {
            debug_assert_eq!(lattice_l.cursor(), (x, e.row));
            reads[0] += 1;
            let cv = lattice_l.step(&unary_l);
            disp_l.set(x, e.row, Some(cv.wta() as u16));
            observer(AggregateEvent {
                side: Side::Left,
                x,
                y: e.row,
                unary: &unary_l,
                costs: cv,
            });
        }
        if let Some(x) = e.right_column {
            debug_assert_eq!(lattice_r.cursor(), (x, e.row));
            reads[1] += 1;
            let cv = lattice_r.step(&unary_r);
            disp_r.set(x, e.row, Some(cv.wta() as u16));
            observer(AggregateEvent {
                side: Side::Right,
                x,
                y: e.row,
                unary: &unary_r,
                costs: cv,
            });
        }
    }

    Ok(R3sgmOutput {
        left: disp_l,
        right: disp_r,
        stats: RunStats {
            peak_cost_entries: lattice_l.peak_entries() + lattice_r.peak_entries(),
            unary_reads: reads,
            stream: stream.stats(),
        },
    })
}
