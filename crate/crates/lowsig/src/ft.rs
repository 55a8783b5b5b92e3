//! Fixed-threshold low signal correction baseline.
//!
//! Cells below a lower counts threshold are replaced by a box-car mean,
//! cells above an upper threshold by a window median; the band in between
//! passes through bit-identically. Every neighborhood reads the original
//! grid, so gated cells never cascade into each other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{SinogramGrid, Stage, WindowSpec};

/// Positivity floor applied after gating so the log step stays defined.
pub const FT_COUNTS_FLOOR: f64 = 1e-3;

/// Configuration of the fixed-threshold correction.
///
/// Serialized keys carry an `ft_` prefix so they can share a flat config
/// namespace with the adaptive-filtering keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct FtConfig {
    /// Counts below this undergo box-car filtering.
    #[serde(rename = "ft_lower_th")]
    pub lower_th: f64,
    /// Counts above this undergo median filtering.
    #[serde(rename = "ft_upper_th")]
    pub upper_th: f64,
    #[serde(rename = "ft_boxcar_window")]
    pub boxcar_window: WindowSpec,
    #[serde(rename = "ft_median_window")]
    pub median_window: WindowSpec,
    /// Sensitivity switch: disable the (surprising) high-count median
    /// branch while keeping the low-count branch.
    #[serde(rename = "ft_median_branch")]
    pub median_branch: bool,
}

impl Default for FtConfig {
    fn default() -> Self {
        FtConfig {
            lower_th: 20.0,
            upper_th: 1.0e4,
            boxcar_window: WindowSpec::new(3, 2, 1), // 7x5x3
            median_window: WindowSpec::new(1, 1, 1), // 3x3x3
            median_branch: true,
        }
    }
}

impl FtConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.upper_th <= self.lower_th {
            return Err(crate::Error::config(format!(
                "ft upper threshold ({}) must exceed lower threshold ({})",
                self.upper_th, self.lower_th
            )));
        }
        Ok(())
    }
}

/// Median of the in-bounds window values; an even-sized boundary window
/// takes the mean of the two middle order statistics.
fn window_median(scratch: &mut Vec<f64>) -> f64 {
    scratch.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = scratch.len();
    if n % 2 == 1 {
        scratch[n / 2]
    } else {
        0.5 * (scratch[n / 2 - 1] + scratch[n / 2])
    }
}

/// Fixed-threshold correction of a raw counts grid.
pub fn ft_lsc(lambda: &SinogramGrid, cfg: &FtConfig) -> SinogramGrid {
    lambda.assert_stage(Stage::Counts);
    let dims = lambda.dims();
    let src = lambda.data();
    let c_len = dims.channels;
    let bw = cfg.boxcar_window;
    let mw = cfg.median_window;

    let mut out = vec![0.0; dims.len()];
    out.par_chunks_mut(c_len).enumerate().for_each(|(slab, out_row)| {
        let r = slab % dims.rows;
        let v = slab / dims.rows;
        let mut scratch: Vec<f64> = Vec::with_capacity(mw.volume());
        for c in 0..c_len {
            let x = src[dims.index(c, r, v)];
            let value = if x < cfg.lower_th {
                let (c0, c1) = WindowSpec::clip(c, bw.half_channels, dims.channels);
                let (r0, r1) = WindowSpec::clip(r, bw.half_rows, dims.rows);
                let (v0, v1) = WindowSpec::clip(v, bw.half_views, dims.views);
                let mut sum = 0.0;
                for vj in v0..=v1 {
                    for rj in r0..=r1 {
                        let base = dims.index(0, rj, vj);
                        for xj in &src[base + c0..=base + c1] {
                            sum += xj;
                        }
                    }
                }
                let n = ((c1 - c0 + 1) * (r1 - r0 + 1) * (v1 - v0 + 1)) as f64;
                sum / n
            } else if cfg.median_branch && x > cfg.upper_th {
                let (c0, c1) = WindowSpec::clip(c, mw.half_channels, dims.channels);
                let (r0, r1) = WindowSpec::clip(r, mw.half_rows, dims.rows);
                let (v0, v1) = WindowSpec::clip(v, mw.half_views, dims.views);
                scratch.clear();
                for vj in v0..=v1 {
                    for rj in r0..=r1 {
                        let base = dims.index(0, rj, vj);
                        scratch.extend_from_slice(&src[base + c0..=base + c1]);
                    }
                }
                window_median(&mut scratch)
            } else {
                x
            };
            out_row[c] = value.max(FT_COUNTS_FLOOR);
        }
    });

    SinogramGrid::from_vec(dims, Stage::Counts, out)
}
