//! Negative-log conversion and 2-D parallel-beam filtered backprojection.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::grid::{SinogramGrid, Stage};
use crate::sim::Geometry;

/// Counts floor used by the uncorrected ("none") pipeline before the log.
pub const UNCORRECTED_COUNTS_FLOOR: f64 = 1e-3;

/// Reconstructed slice: N×N attenuation values in 1/cm, origin at the
/// isocenter, stored row-major (x-fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    n: usize,
    pitch_cm: f64,
    data: Vec<f64>,
}

impl Image {
    pub fn new(n: usize, pitch_cm: f64, data: Vec<f64>) -> Self {
        assert!(n >= 1 && pitch_cm > 0.0);
        assert_eq!(data.len(), n * n);
        Image { n, pitch_cm, data }
    }

    pub fn filled(n: usize, pitch_cm: f64, value: f64) -> Self {
        Image::new(n, pitch_cm, vec![value; n * n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn pitch_cm(&self) -> f64 {
        self.pitch_cm
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[iy * self.n + ix]
    }

    /// World coordinates (cm) of a pixel center.
    #[inline]
    pub fn pixel_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let half = (self.n as f64 - 1.0) / 2.0;
        ((ix as f64 - half) * self.pitch_cm, (iy as f64 - half) * self.pitch_cm)
    }

    /// Fractional pixel coordinates of a world point (cm).
    #[inline]
    pub fn pixel_of(&self, x: f64, y: f64) -> (f64, f64) {
        let half = (self.n as f64 - 1.0) / 2.0;
        (x / self.pitch_cm + half, y / self.pitch_cm + half)
    }
}

/// Reconstruction parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconConfig {
    /// Output image side, pixels.
    pub n: usize,
    /// Pixel pitch in cm; omitted = 2·fov_radius / n so the field of view
    /// inscribes the image square.
    pub pixel_pitch_cm: Option<f64>,
    /// Apply a Hann apodization on top of the ramp filter.
    pub hann: bool,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            n: 512,
            pixel_pitch_cm: None,
            hann: false,
        }
    }
}

impl ReconConfig {
    pub fn pitch_for(&self, g: &Geometry) -> f64 {
        self.pixel_pitch_cm
            .unwrap_or(2.0 * g.fov_radius_cm / self.n as f64)
    }
}

/// Strict negative-log conversion: `-ln(counts / i0)` per cell.
///
/// Errors on the first non-positive cell; corrected pipelines guarantee
/// positivity, the uncorrected path must clamp first (see
/// [`neg_log_clamped`]).
pub fn neg_log(counts: &SinogramGrid, i0: f64) -> crate::Result<SinogramGrid> {
    counts.assert_stage(Stage::Counts);
    assert!(i0 > 0.0, "air intensity must be positive");
    if let Some(idx) = counts.data().iter().position(|&x| x <= 0.0) {
        let (c, r, v) = counts.dims().coords(idx);
        return Err(crate::Error::data(format!(
            "non-positive count {} at (channel {c}, row {r}, view {v}); \
             apply a correction or clamp before the log step",
            counts.data()[idx]
        )));
    }
    Ok(counts.map(Stage::Projection, |x| -(x / i0).ln()))
}

/// Negative-log with an industry-style floor for uncorrected data.
pub fn neg_log_clamped(counts: &SinogramGrid, i0: f64, floor: f64) -> SinogramGrid {
    counts.assert_stage(Stage::Counts);
    assert!(i0 > 0.0 && floor > 0.0);
    counts.map(Stage::Projection, |x| -(x.max(floor) / i0).ln())
}

/// Ramp-filtered backprojection of one detector row.
///
/// Views are zero-padded to at least twice the channel count (rounded up
/// to a power of two), ramp-filtered in the frequency domain, optionally
/// Hann-apodized, then backprojected with linear interpolation and scaled
/// by pi / views. Pixels outside the inscribed field-of-view circle are 0.
pub fn fbp(
    p: &SinogramGrid,
    row: usize,
    g: &Geometry,
    cfg: &ReconConfig,
) -> crate::Result<Image> {
    p.assert_stage(Stage::Projection);
    g.validate()?;
    let dims = p.dims();
    if dims.channels != g.channels || dims.views != g.views {
        return Err(crate::Error::config(format!(
            "sinogram dims {}x{}x{} do not match geometry ({} channels, {} views)",
            dims.channels, dims.rows, dims.views, g.channels, g.views
        )));
    }
    if row >= dims.rows {
        return Err(crate::Error::config(format!(
            "row {row} out of range (grid has {} rows)",
            dims.rows
        )));
    }
    if g.views < 2 {
        return Err(crate::Error::config("reconstruction needs at least 2 views"));
    }

    let c_len = g.channels;
    let padded = (2 * c_len).next_power_of_two();
    let ramp = ramp_filter(padded, g.pitch_cm, cfg.hann);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(padded);
    let inv = planner.plan_fft_inverse(padded);

    // Filter every view of the selected row.
    let filtered: Vec<Vec<f64>> = (0..g.views)
        .into_par_iter()
        .map(|v| {
            let mut buf = vec![Complex::new(0.0, 0.0); padded];
            for c in 0..c_len {
                buf[c].re = p.get(c, row, v);
            }
            fwd.process(&mut buf);
            for (b, &r) in buf.iter_mut().zip(ramp.iter()) {
                *b *= r;
            }
            inv.process(&mut buf);
            let scale = 1.0 / padded as f64;
            buf[..c_len].iter().map(|z| z.re * scale).collect()
        })
        .collect();

    let trig: Vec<(f64, f64)> = (0..g.views).map(|v| g.angle(v).sin_cos()).collect();

    let n = cfg.n;
    let pitch = cfg.pitch_for(g);
    let half = (n as f64 - 1.0) / 2.0;
    let mask_r2 = {
        let r = g.fov_radius_cm.min(n as f64 * pitch / 2.0);
        r * r
    };
    let view_scale = std::f64::consts::PI / g.views as f64;
    let t_offset = (c_len as f64 - 1.0) / 2.0;
    let inv_det_pitch = 1.0 / g.pitch_cm;

    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(iy, out_row)| {
        let y = (iy as f64 - half) * pitch;
        for (ix, out) in out_row.iter_mut().enumerate() {
            let x = (ix as f64 - half) * pitch;
            if x * x + y * y > mask_r2 {
                continue;
            }
            let mut acc = 0.0;
            for (q, &(sin_a, cos_a)) in filtered.iter().zip(trig.iter()) {
                let t = x * cos_a + y * sin_a;
                let u = t * inv_det_pitch + t_offset;
                let i0 = u.floor();
                let frac = u - i0;
                let i0 = i0 as isize;
                let lo = if i0 >= 0 && (i0 as usize) < c_len {
                    q[i0 as usize]
                } else {
                    0.0
                };
                let hi = if i0 + 1 >= 0 && ((i0 + 1) as usize) < c_len {
                    q[(i0 + 1) as usize]
                } else {
                    0.0
                };
                acc += lo + frac * (hi - lo);
            }
            *out = acc * view_scale;
        }
    });

    Ok(Image::new(n, pitch, data))
}

/// Frequency response of the Ram–Lak ramp over the padded grid, with an
/// optional Hann taper that reaches zero at the channel Nyquist rate.
///
/// The response is the DFT of the band-limited spatial ramp kernel
/// (1/(4T²) at the origin, -1/(pi n T)² at odd offsets), not a direct
/// sampling of |f|: sampling |f| zeroes the DC term and biases every
/// reconstructed level down by a constant.
fn ramp_filter(padded: usize, det_pitch: f64, hann: bool) -> Vec<f64> {
    let t2 = det_pitch * det_pitch;
    let mut kernel = vec![Complex::new(0.0, 0.0); padded];
    kernel[0].re = 1.0 / (4.0 * t2);
    for n in (1..=padded / 2).step_by(2) {
        let v = -1.0 / (std::f64::consts::PI * std::f64::consts::PI * (n * n) as f64 * t2);
        kernel[n].re = v;
        kernel[padded - n].re = v;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(padded).process(&mut kernel);

    let mut ramp = Vec::with_capacity(padded);
    for (k, z) in kernel.iter().enumerate() {
        // Symmetric real kernel: spectrum is real up to rounding.
        let mut w = z.re * det_pitch;
        if hann {
            let k_fold = k.min(padded - k) as f64;
            let ratio = k_fold / (padded as f64 / 2.0);
            w *= 0.5 * (1.0 + (std::f64::consts::PI * ratio).cos());
        }
        ramp.push(w);
    }
    ramp
}
