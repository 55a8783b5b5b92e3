//! Adaptive-filtering low signal correction.
//!
//! The pipeline corrects a raw photon-count sinogram in five stages:
//!
//! 1. local-linear MMSE blending of very low counts toward the local mean,
//! 2. forward variance-stabilizing transform (Anscombe),
//! 3. bilateral filtering with per-cell spatial and intensity widths
//!    driven by local statistics of the raw counts,
//! 4. closed-form unbiased inverse of the transform,
//! 5. exponential positivity mapping so the output is safe for the
//!    negative-log step.
//!
//! Strong smoothing happens where counts are comparable to the electronic
//! noise floor; high-count cells pass through nearly untouched.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{SinogramGrid, Stage, WindowSpec};
use crate::stats::local_stats;

/// How the intensity width of the bilateral filter is derived from the
/// counts-domain local standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SigmaRBridge {
    /// Map the counts-domain std through the local slope of the
    /// variance-stabilizing transform before scaling by `k2`.
    #[default]
    VstSlope,
    /// Use the counts-domain std directly (no unit conversion); kept for
    /// A/B comparison.
    RawCounts,
}

/// Configuration of the adaptive-filtering correction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AfConfig {
    /// Electronic-noise standard deviation, counts.
    pub sigma_e: f64,
    /// Counts at or below which cells undergo the MMSE pre-correction.
    /// `None` selects max(10, 3·sigma_e).
    pub lambda_th: Option<f64>,
    /// Counts below which the positivity mapping applies.
    pub lambda_th_prime: f64,
    /// Spatial-width coefficient: sigma_d = k1 / local mean.
    pub k1: f64,
    /// Intensity-width coefficient: sigma_r = k2 · local std.
    pub k2: f64,
    /// Window for the local mean/std of raw counts.
    pub stats_window: WindowSpec,
    /// Window of the bilateral filter.
    pub bf_window: WindowSpec,
    /// Floor on the local mean when forming sigma_d (and the VST slope).
    pub mu_floor: f64,
    /// Floor on sigma_r, in transformed units.
    pub sigma_r_floor: f64,
    /// Unit bridge for sigma_r; see [`SigmaRBridge`].
    pub sigma_r_bridge: SigmaRBridge,
}

impl Default for AfConfig {
    fn default() -> Self {
        AfConfig {
            sigma_e: 5.0,
            lambda_th: None,
            lambda_th_prime: 1.0,
            k1: 400.0,
            k2: 5.0,
            stats_window: WindowSpec::new(3, 2, 1), // 7x5x3
            bf_window: WindowSpec::new(6, 3, 1),    // 13x7x3
            mu_floor: 1.0,
            sigma_r_floor: 0.05,
            sigma_r_bridge: SigmaRBridge::VstSlope,
        }
    }
}

impl AfConfig {
    /// Effective MMSE gate: the configured value, or max(10, 3·sigma_e).
    pub fn lambda_th(&self) -> f64 {
        self.lambda_th.unwrap_or_else(|| (3.0 * self.sigma_e).max(10.0))
    }

    pub fn validate(&self) -> crate::Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(crate::Error::config(msg.to_string()))
            }
        };
        check(self.sigma_e >= 0.0, "sigma_e must be >= 0")?;
        check(self.lambda_th_prime > 0.0, "lambda_th_prime must be > 0")?;
        check(self.k1 > 0.0, "k1 must be > 0")?;
        check(self.k2 > 0.0, "k2 must be > 0")?;
        check(self.mu_floor > 0.0, "mu_floor must be > 0")?;
        check(self.sigma_r_floor > 0.0, "sigma_r_floor must be > 0")?;
        Ok(())
    }
}

/// Per-cell bilateral filter widths: spatial (index-distance units) and
/// intensity (transformed units). Both strictly positive.
#[derive(Clone, Debug)]
pub struct AdaptiveParams {
    pub sigma_d: SinogramGrid,
    pub sigma_r: SinogramGrid,
}

/// MMSE blend of low-count cells toward their local mean.
///
/// Cells with `lambda <= lambda_th` become `eta·lambda + (1-eta)·lambda_av`
/// with `eta = lambda_av⁺ / (lambda_av⁺ + sigma_e²)`, the local mean floored
/// at zero inside `eta` so the weight stays in [0, 1]. Cells above the gate
/// pass through unchanged.
pub fn llmmse_correct(
    lambda: &SinogramGrid,
    lambda_av: &SinogramGrid,
    cfg: &AfConfig,
) -> SinogramGrid {
    lambda.assert_stage(Stage::Counts);
    assert_eq!(lambda.dims(), lambda_av.dims());
    let gate = cfg.lambda_th();
    let var_e = cfg.sigma_e * cfg.sigma_e;
    let out: Vec<f64> = lambda
        .data()
        .iter()
        .zip(lambda_av.data().iter())
        .map(|(&x, &av)| {
            if x <= gate {
                let av_pos = av.max(0.0);
                let denom = av_pos + var_e;
                // Both terms zero only for noiseless electronics over a
                // zero-mean neighborhood; keep the measurement then.
                let eta = if denom > 0.0 { av_pos / denom } else { 1.0 };
                eta * x + (1.0 - eta) * av
            } else {
                x
            }
        })
        .collect();
    SinogramGrid::from_vec(lambda.dims(), Stage::Counts, out)
}

/// Smallest value the forward transform can produce, reached at zero counts.
#[inline]
pub fn vst_floor() -> f64 {
    2.0 * (0.375f64).sqrt()
}

/// Forward variance-stabilizing transform: `2·sqrt(x + 3/8)`, clamped so
/// residual negative counts map to 0 rather than NaN.
pub fn vst_forward(lambda: &SinogramGrid) -> SinogramGrid {
    lambda.assert_stage(Stage::Counts);
    lambda.map(Stage::Vst, |x| 2.0 * (x + 0.375).max(0.0).sqrt())
}

/// Closed-form unbiased inverse of the forward transform.
///
/// For `y >= 2·sqrt(3/8)` the five-term expression applies (it cancels to
/// exactly 0 at the lower endpoint); smaller values return 0 because the
/// negative powers blow up outside the transform's range.
pub fn vst_inverse(y_grid: &SinogramGrid) -> SinogramGrid {
    y_grid.assert_stage(Stage::Vst);
    y_grid.map(Stage::Counts, |y| vst_inverse_scalar(y))
}

#[inline]
pub fn vst_inverse_scalar(y: f64) -> f64 {
    if y < vst_floor() {
        return 0.0;
    }
    let sqrt_3_2 = (1.5f64).sqrt();
    let y1 = 1.0 / y;
    let y2 = y1 * y1;
    let y3 = y2 * y1;
    0.25 * y * y + 0.25 * sqrt_3_2 * y1 - 1.375 * y2 + 0.625 * sqrt_3_2 * y3 - 0.125
}

/// Per-cell filter widths from the local statistics of raw counts:
/// `sigma_d = k1 / max(mean, mu_floor)` and `sigma_r = k2 · std` with the
/// std first mapped into transformed units (default bridge) and floored.
pub fn adaptive_params(
    mu_hat: &SinogramGrid,
    sigma_hat: &SinogramGrid,
    cfg: &AfConfig,
) -> AdaptiveParams {
    assert_eq!(mu_hat.dims(), sigma_hat.dims());
    let dims = mu_hat.dims();
    let mut sigma_d = Vec::with_capacity(dims.len());
    let mut sigma_r = Vec::with_capacity(dims.len());
    for (&mu, &sd) in mu_hat.data().iter().zip(sigma_hat.data().iter()) {
        let mu_clamped = mu.max(cfg.mu_floor);
        sigma_d.push(cfg.k1 / mu_clamped);
        let sd_bridged = match cfg.sigma_r_bridge {
            SigmaRBridge::VstSlope => sd / (mu_clamped + 0.375).sqrt(),
            SigmaRBridge::RawCounts => sd,
        };
        sigma_r.push((cfg.k2 * sd_bridged).max(cfg.sigma_r_floor));
    }
    AdaptiveParams {
        sigma_d: SinogramGrid::from_vec(dims, Stage::Counts, sigma_d),
        sigma_r: SinogramGrid::from_vec(dims, Stage::Vst, sigma_r),
    }
}

/// Bilateral filter with exponential (single-sided) kernels.
///
/// Weight of neighbor j around center i is
/// `exp(-(|i-j|/sigma_d(i) + |x_i - x_j|/sigma_r(i)))` with `|i-j|` the
/// Euclidean norm of the integer offset. The center weight is exactly 1,
/// so the normalizing denominator never vanishes and the output is a
/// convex combination of window values.
pub fn bilateral_filter(
    x: &SinogramGrid,
    params: &AdaptiveParams,
    w: WindowSpec,
) -> SinogramGrid {
    assert_eq!(x.dims(), params.sigma_d.dims());
    assert_eq!(x.dims(), params.sigma_r.dims());
    let dims = x.dims();
    let src = x.data();
    let sd_all = params.sigma_d.data();
    let sr_all = params.sigma_r.data();
    let c_len = dims.channels;

    // Euclidean offset norms for the full window, indexed
    // [dv+hv][dr+hr][dc+hc] flattened channel-fastest.
    let wc = 2 * w.half_channels + 1;
    let wr = 2 * w.half_rows + 1;
    let wv = 2 * w.half_views + 1;
    let mut dist = vec![0.0f64; wc * wr * wv];
    for dv in 0..wv {
        for dr in 0..wr {
            for dc in 0..wc {
                let oc = dc as f64 - w.half_channels as f64;
                let or = dr as f64 - w.half_rows as f64;
                let ov = dv as f64 - w.half_views as f64;
                dist[dc + wc * (dr + wr * dv)] = (oc * oc + or * or + ov * ov).sqrt();
            }
        }
    }

    let mut out = vec![0.0; dims.len()];
    out.par_chunks_mut(c_len).enumerate().for_each(|(slab, out_row)| {
        let r = slab % dims.rows;
        let v = slab / dims.rows;
        let (r0, r1) = WindowSpec::clip(r, w.half_rows, dims.rows);
        let (v0, v1) = WindowSpec::clip(v, w.half_views, dims.views);
        for c in 0..c_len {
            let i = dims.index(c, r, v);
            let (c0, c1) = WindowSpec::clip(c, w.half_channels, dims.channels);
            let center = src[i];
            let inv_sd = 1.0 / sd_all[i];
            let inv_sr = 1.0 / sr_all[i];
            let mut num = 0.0;
            let mut den = 0.0;
            for vj in v0..=v1 {
                let lut_v = (vj + w.half_views - v) * wr;
                for rj in r0..=r1 {
                    let lut_r = (lut_v + rj + w.half_rows - r) * wc;
                    let base = dims.index(0, rj, vj);
                    for cj in c0..=c1 {
                        let xj = src[base + cj];
                        let d = dist[lut_r + cj + w.half_channels - c];
                        let weight = (-(d * inv_sd + (center - xj).abs() * inv_sr)).exp();
                        num += weight * xj;
                        den += weight;
                    }
                }
            }
            out_row[c] = num / den;
        }
    });

    SinogramGrid::from_vec(dims, x.stage(), out)
}

/// Exponential positivity mapping for the counts handed to the log step.
///
/// Values below the knee map to `knee · exp(x/knee - 1)`; values at or
/// above it pass through. The map is continuous with slope 1 at the knee
/// and strictly positive everywhere.
pub fn positivity_map(lambda: &SinogramGrid, lambda_th_prime: f64) -> SinogramGrid {
    lambda.assert_stage(Stage::Counts);
    assert!(lambda_th_prime > 0.0, "positivity knee must be > 0");
    lambda.map(Stage::Counts, |x| positivity_map_scalar(x, lambda_th_prime))
}

#[inline]
pub fn positivity_map_scalar(x: f64, knee: f64) -> f64 {
    if x < knee {
        // The exponential underflows to +0 for inputs hugely below the
        // knee; keep the strict-positivity contract for any finite input.
        (knee * (x / knee - 1.0).exp()).max(f64::MIN_POSITIVE)
    } else {
        x
    }
}

/// The full adaptive-filtering correction on a raw counts grid.
pub fn af_lsc(lambda: &SinogramGrid, cfg: &AfConfig) -> SinogramGrid {
    lambda.assert_stage(Stage::Counts);
    debug_assert!(lambda.all_finite(), "input counts must be finite");
    let stats = local_stats(lambda, cfg.stats_window);
    let corrected = llmmse_correct(lambda, &stats.mean, cfg);
    let transformed = vst_forward(&corrected);
    let params = adaptive_params(&stats.mean, &stats.std, cfg);
    let filtered = bilateral_filter(&transformed, &params, cfg.bf_window);
    let back = vst_inverse(&filtered);
    positivity_map(&back, cfg.lambda_th_prime)
}
