use serde::Serialize;

use crate::cellset::CellId;
use crate::dynsys::Interval;

/// A uniform box grid with `2^depth` cells per axis. Cell indices run with
/// axis 0 fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    #[serde(serialize_with = "ser_box")]
    bounds: Vec<Interval>,
    depth: u32,
    #[serde(skip)]
    per_axis: usize,
}

fn ser_box<S: serde::Serializer>(b: &[Interval], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(b.iter().map(|iv| [iv.lo, iv.hi]))
}

impl Grid {
    /// Returns `None` when the cell count does not fit in `usize`.
    pub fn new(bounds: Vec<Interval>, depth: u32) -> Option<Self> {
        assert!(!bounds.is_empty(), "grid needs at least one axis");
        let per_axis = 1usize.checked_shl(depth)?;
        if depth >= usize::BITS {
            return None;
        }
        let mut total: usize = 1;
        for _ in 0..bounds.len() {
            total = total.checked_mul(per_axis)?;
        }
        Some(Grid {
            bounds,
            depth,
            per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn n_cells(&self) -> usize {
        self.per_axis.pow(self.dim() as u32)
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.bounds[axis].width() / self.per_axis as f64
    }

    pub fn multi_index(&self, mut c: CellId) -> Vec<usize> {
        let mut m = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            m.push(c % self.per_axis);
            c /= self.per_axis;
        }
        m
    }

    pub fn index(&self, m: &[usize]) -> CellId {
        m.iter().rev().fold(0, |acc, &i| acc * self.per_axis + i)
    }

    fn lo(&self, axis: usize, i: usize) -> f64 {
        let b = &self.bounds[axis];
        b.lo + b.width() * (i as f64 / self.per_axis as f64)
    }

    pub fn cell_box(&self, c: CellId) -> Vec<Interval> {
        self.multi_index(c)
            .into_iter()
            .enumerate()
            .map(|(a, i)| Interval::new(self.lo(a, i), self.lo(a, i + 1)))
            .collect()
    }

    pub fn center(&self, c: CellId) -> Vec<f64> {
        self.cell_box(c).iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.bounds).all(|(v, b)| b.contains(*v))
    }

    /// The cell containing `p`; points on an interior face belong to the
    /// upper cell, points on the upper boundary to the last cell.
    pub fn locate(&self, p: &[f64]) -> Option<CellId> {
        if !self.contains(p) {
            return None;
        }
        let m: Vec<usize> = p
            .iter()
            .enumerate()
            .map(|(a, &v)| {
                let b = &self.bounds[a];
                let i = ((v - b.lo) / b.width() * self.per_axis as f64).floor() as usize;
                i.min(self.per_axis - 1)
            })
            .collect();
        Some(self.index(&m))
    }

    /// Cells whose closed boxes meet the closed box `[lo, hi]`, in index order.
    pub fn cells_meeting(&self, lo: &[f64], hi: &[f64]) -> Vec<CellId> {
        let mut ranges = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let b = &self.bounds[a];
            if hi[a] < b.lo || lo[a] > b.hi {
                return Vec::new();
            }
            let scale = self.per_axis as f64 / b.width();
            let first = ((lo[a] - b.lo) * scale).ceil() - 1.0;
            let last = ((hi[a] - b.lo) * scale).floor();
            let first = first.max(0.0) as usize;
            let last = (last.max(0.0) as usize).min(self.per_axis - 1);
            ranges.push(first..=last);
        }
        let mut out = Vec::new();
        let mut m: Vec<usize> = ranges.iter().map(|r| *r.start()).collect();
        loop {
            out.push(self.index(&m));
            let mut a = 0;
            loop {
                if a == m.len() {
                    out.sort_unstable();
                    return out;
                }
                if m[a] < *ranges[a].end() {
                    m[a] += 1;
                    break;
                }
                m[a] = *ranges[a].start();
                a += 1;
            }
        }
    }

    /// The tensor pattern of `per_axis` evenly spaced points per axis on the
    /// closed cell box (corners included).
    pub fn sample_points(&self, c: CellId, per_axis: usize) -> Vec<Vec<f64>> {
        assert!(per_axis >= 2);
        let bx = self.cell_box(c);
        let axis_pts: Vec<Vec<f64>> = bx
            .iter()
            .map(|iv| {
                (0..per_axis)
                    .map(|j| iv.lo + iv.width() * (j as f64 / (per_axis - 1) as f64))
                    .collect()
            })
            .collect();
        let total = per_axis.pow(self.dim() as u32);
        (0..total)
            .map(|mut k| {
                axis_pts
                    .iter()
                    .map(|pts| {
                        let v = pts[k % per_axis];
                        k /= per_axis;
                        v
                    })
                    .collect()
            })
            .collect()
    }
}
