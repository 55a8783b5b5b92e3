//! Windowed local statistics over sinogram grids.
//!
//! Windows shrink to the grid boundary (no padding or reflection), so a
//! corner cell averages over its in-bounds block only. Standard deviations
//! are sample statistics (n − 1 denominator); a one-cell window yields 0.

use rayon::prelude::*;

use crate::grid::{SinogramGrid, WindowSpec};

/// Local mean and sample standard deviation of the same source grid,
/// computed over the same window.
#[derive(Clone, Debug)]
pub struct LocalStats {
    pub mean: SinogramGrid,
    pub std: SinogramGrid,
}

/// All in-bounds neighbor indices of the window centered at `center`.
///
/// Returns `(flat_index, (dc, dr, dv))` pairs, offsets in index units.
/// The center cell is always included. Panics if `center` is out of
/// bounds; that is a caller bug, not a data condition.
pub fn window_indices(
    dims: crate::grid::Dims,
    center: (usize, usize, usize),
    w: WindowSpec,
) -> Vec<(usize, (isize, isize, isize))> {
    let (c, r, v) = center;
    assert!(
        c < dims.channels && r < dims.rows && v < dims.views,
        "window center {center:?} out of bounds for dims {dims:?}"
    );
    let (c0, c1) = WindowSpec::clip(c, w.half_channels, dims.channels);
    let (r0, r1) = WindowSpec::clip(r, w.half_rows, dims.rows);
    let (v0, v1) = WindowSpec::clip(v, w.half_views, dims.views);
    let mut out = Vec::with_capacity((c1 - c0 + 1) * (r1 - r0 + 1) * (v1 - v0 + 1));
    for vj in v0..=v1 {
        for rj in r0..=r1 {
            for cj in c0..=c1 {
                out.push((
                    dims.index(cj, rj, vj),
                    (
                        cj as isize - c as isize,
                        rj as isize - r as isize,
                        vj as isize - v as isize,
                    ),
                ));
            }
        }
    }
    out
}

/// Shrinking-window arithmetic mean; output dims equal input dims.
pub fn local_mean(grid: &SinogramGrid, w: WindowSpec) -> SinogramGrid {
    local_stats(grid, w).mean
}

/// Shrinking-window sample standard deviation (n − 1 denominator).
pub fn local_std(grid: &SinogramGrid, w: WindowSpec) -> SinogramGrid {
    local_stats(grid, w).std
}

/// Mean and std in one pass over the windows.
pub fn local_stats(grid: &SinogramGrid, w: WindowSpec) -> LocalStats {
    let dims = grid.dims();
    let src = grid.data();
    let c_len = dims.channels;
    let mut mean = vec![0.0; dims.len()];
    let mut std = vec![0.0; dims.len()];

    // One (row, view) slab per parallel task; windows span neighboring
    // slabs read-only.
    mean.par_chunks_mut(c_len)
        .zip(std.par_chunks_mut(c_len))
        .enumerate()
        .for_each(|(slab, (mean_out, std_out))| {
            let r = slab % dims.rows;
            let v = slab / dims.rows;
            let (r0, r1) = WindowSpec::clip(r, w.half_rows, dims.rows);
            let (v0, v1) = WindowSpec::clip(v, w.half_views, dims.views);
            for c in 0..c_len {
                let (c0, c1) = WindowSpec::clip(c, w.half_channels, dims.channels);
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for vj in v0..=v1 {
                    for rj in r0..=r1 {
                        let base = dims.index(0, rj, vj);
                        for x in &src[base + c0..=base + c1] {
                            sum += x;
                            sum_sq += x * x;
                        }
                    }
                }
                let n = ((c1 - c0 + 1) * (r1 - r0 + 1) * (v1 - v0 + 1)) as f64;
                mean_out[c] = sum / n;
                std_out[c] = if n > 1.0 {
                    ((sum_sq - sum * sum / n).max(0.0) / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
            }
        });

    let stage = grid.stage();
    LocalStats {
        mean: SinogramGrid::from_vec(dims, stage, mean),
        std: SinogramGrid::from_vec(dims, stage, std),
    }
}
