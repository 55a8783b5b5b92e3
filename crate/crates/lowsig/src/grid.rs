//! Dense sinogram container and window geometry.
//!
//! A [`SinogramGrid`] is a 3-D array indexed by (channel, row, view),
//! stored channel-fastest in a single buffer. The same container moves
//! through every pipeline stage; the [`Stage`] tag records which units the
//! values currently carry (raw counts, variance-stabilized values, or
//! line-integral projections).

use serde::{Deserialize, Serialize};

/// Units carried by a grid at a given pipeline stage.
///
/// The legal derivation order is Counts → Vst → Counts → Projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Counts,
    Vst,
    Projection,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::Counts => write!(f, "counts"),
            Stage::Vst => write!(f, "vst"),
            Stage::Projection => write!(f, "projection"),
        }
    }
}

/// Grid dimensions: channels, rows, views.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub channels: usize,
    pub rows: usize,
    pub views: usize,
}

impl Dims {
    pub fn new(channels: usize, rows: usize, views: usize) -> Self {
        assert!(
            channels >= 1 && rows >= 1 && views >= 1,
            "grid dimensions must be positive, got {channels}x{rows}x{views}"
        );
        Dims {
            channels,
            rows,
            views,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.channels * self.rows * self.views
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index, channel-fastest.
    #[inline]
    pub fn index(&self, c: usize, r: usize, v: usize) -> usize {
        debug_assert!(c < self.channels && r < self.rows && v < self.views);
        c + self.channels * (r + self.rows * v)
    }

    /// Inverse of [`Dims::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let c = idx % self.channels;
        let rest = idx / self.channels;
        (c, rest % self.rows, rest / self.rows)
    }
}

/// 3-D sinogram (channel × row × view), channel-fastest dense storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SinogramGrid {
    dims: Dims,
    stage: Stage,
    data: Vec<f64>,
}

impl SinogramGrid {
    /// A grid filled with a constant.
    pub fn filled(dims: Dims, stage: Stage, value: f64) -> Self {
        SinogramGrid {
            dims,
            stage,
            data: vec![value; dims.len()],
        }
    }

    /// Wrap an existing buffer. Panics unless `data.len() == C*R*V`.
    pub fn from_vec(dims: Dims, stage: Stage, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            dims.len(),
            "buffer length {} does not match dims {:?}",
            data.len(),
            dims
        );
        SinogramGrid { dims, stage, data }
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn stage(&self) -> Stage {
        self.stage
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, c: usize, r: usize, v: usize) -> f64 {
        self.data[self.dims.index(c, r, v)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, r: usize, v: usize, value: f64) {
        let i = self.dims.index(c, r, v);
        self.data[i] = value;
    }

    /// Fresh grid with the same dims, a new stage tag, and values produced
    /// by mapping each cell.
    pub fn map(&self, stage: Stage, f: impl Fn(f64) -> f64 + Sync) -> SinogramGrid {
        SinogramGrid {
            dims: self.dims,
            stage,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// True when every cell is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Index of the first non-finite cell, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|x| !x.is_finite())
    }

    /// Copy of one detector row as a (channel × view) grid with rows = 1.
    pub fn row_slice(&self, row: usize) -> SinogramGrid {
        assert!(row < self.dims.rows, "row {row} out of range");
        let d = self.dims;
        let mut data = Vec::with_capacity(d.channels * d.views);
        for v in 0..d.views {
            let start = d.index(0, row, v);
            data.extend_from_slice(&self.data[start..start + d.channels]);
        }
        SinogramGrid::from_vec(Dims::new(d.channels, 1, d.views), self.stage, data)
    }

    pub fn assert_stage(&self, expected: Stage) {
        assert_eq!(
            self.stage, expected,
            "grid stage is {}, expected {}",
            self.stage, expected
        );
    }
}

/// Odd-sized 3-D window described by per-axis half-widths.
///
/// Full size along an axis is `2*h + 1`; e.g. a 7×5×3 window is
/// half-widths (3, 2, 1) in (channel, row, view) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpec {
    pub half_channels: usize,
    pub half_rows: usize,
    pub half_views: usize,
}

impl WindowSpec {
    pub fn new(half_channels: usize, half_rows: usize, half_views: usize) -> Self {
        WindowSpec {
            half_channels,
            half_rows,
            half_views,
        }
    }

    /// Build from full odd sizes, e.g. `[7, 5, 3]`.
    pub fn from_full(full: [usize; 3]) -> crate::Result<Self> {
        for (axis, &s) in ["channel", "row", "view"].iter().zip(full.iter()) {
            if s == 0 || s % 2 == 0 {
                return Err(crate::Error::config(format!(
                    "window size along {axis} axis must be odd and positive, got {s}"
                )));
            }
        }
        Ok(WindowSpec::new(full[0] / 2, full[1] / 2, full[2] / 2))
    }

    pub fn full(&self) -> [usize; 3] {
        [
            2 * self.half_channels + 1,
            2 * self.half_rows + 1,
            2 * self.half_views + 1,
        ]
    }

    /// Number of cells in an unclipped window.
    pub fn volume(&self) -> usize {
        self.full().iter().product()
    }

    /// Per-axis in-bounds index range (inclusive) for a window centered at
    /// `center` along an axis of length `len`.
    #[inline]
    pub(crate) fn clip(center: usize, half: usize, len: usize) -> (usize, usize) {
        let lo = center.saturating_sub(half);
        let hi = (center + half).min(len - 1);
        (lo, hi)
    }
}

// Windows serialize as full sizes so config files can say `[7, 5, 3]`.
impl Serialize for WindowSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.full().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WindowSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let full = <[usize; 3]>::deserialize(d)?;
        WindowSpec::from_full(full).map_err(serde::de::Error::custom)
    }
}
