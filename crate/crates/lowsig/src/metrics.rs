//! Image-quality instruments: ROI statistics, radially averaged noise
//! power spectrum, and wire-based modulation transfer function.

use serde::{Deserialize, Serialize};

use crate::fft::{dft2_forward, signed_freq_index};
use crate::recon::Image;

/// Region of interest in pixel coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum RoiSpec {
    Disc { center: [f64; 2], radius: f64 },
    Rect { x0: usize, y0: usize, width: usize, height: usize },
}

/// Radially averaged spectral profile. Frequencies are bin centers in
/// cycles/cm; `counts` records how many DFT samples fell in each bin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialProfile {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RadialProfile {
    /// Integral over 2-D frequency space implied by the radial profile:
    /// sum of per-bin value × annulus sample count × (frequency step)².
    pub fn integral_2d(&self, freq_step: f64) -> f64 {
        self.values
            .iter()
            .zip(self.counts.iter())
            .map(|(v, &n)| v * n as f64)
            .sum::<f64>()
            * freq_step
            * freq_step
    }
}

/// MTF crossing frequencies in cycles/cm; `None` = response stays above
/// the level out to the Nyquist frequency.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MtfCrossings {
    pub f50: Option<f64>,
    pub f10: Option<f64>,
    pub f04: Option<f64>,
}

/// Wire MTF measurement: normalized radial profile plus the 50/10/4%
/// crossings.
#[derive(Clone, Debug)]
pub struct MtfResult {
    pub profile: RadialProfile,
    pub crossings: MtfCrossings,
}

fn roi_pixels(img: &Image, roi: &RoiSpec) -> crate::Result<Vec<f64>> {
    let n = img.n();
    let mut out = Vec::new();
    match roi {
        RoiSpec::Disc { center, radius } => {
            let [cx, cy] = *center;
            let r = *radius;
            if r < 0.0 || cx - r < -0.5 || cy - r < -0.5 || cx + r > n as f64 - 0.5 || cy + r > n as f64 - 0.5 {
                return Err(crate::Error::config(format!(
                    "disc ROI (center {cx:.1},{cy:.1}, radius {r:.1}) not inside {n}x{n} image"
                )));
            }
            let x0 = (cx - r).floor().max(0.0) as usize;
            let x1 = (cx + r).ceil().min(n as f64 - 1.0) as usize;
            let y0 = (cy - r).floor().max(0.0) as usize;
            let y1 = (cy + r).ceil().min(n as f64 - 1.0) as usize;
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    let dx = ix as f64 - cx;
                    let dy = iy as f64 - cy;
                    if dx * dx + dy * dy <= r * r {
                        out.push(img.get(ix, iy));
                    }
                }
            }
        }
        RoiSpec::Rect { x0, y0, width, height } => {
            if *width == 0 || *height == 0 || x0 + width > n || y0 + height > n {
                return Err(crate::Error::config(format!(
                    "rect ROI ({x0},{y0} {width}x{height}) not inside {n}x{n} image"
                )));
            }
            for iy in *y0..y0 + height {
                for ix in *x0..x0 + width {
                    out.push(img.get(ix, iy));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(crate::Error::config("ROI contains no pixels"));
    }
    Ok(out)
}

/// Sample mean and sample standard deviation (n−1) over the ROI pixels.
pub fn roi_stats(img: &Image, roi: &RoiSpec) -> crate::Result<(f64, f64)> {
    let px = roi_pixels(img, roi)?;
    let n = px.len() as f64;
    let mean = px.iter().sum::<f64>() / n;
    let std = if px.len() > 1 {
        (px.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok((mean, std))
}

/// Rectangular patch cut from an image, for NPS ensembles.
#[derive(Clone, Debug)]
pub struct Patch {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Patch {
    pub fn from_image(img: &Image, x0: usize, y0: usize, width: usize, height: usize) -> crate::Result<Self> {
        if width == 0 || height == 0 || x0 + width > img.n() || y0 + height > img.n() {
            return Err(crate::Error::config(format!(
                "patch ({x0},{y0} {width}x{height}) not inside {0}x{0} image",
                img.n()
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for iy in y0..y0 + height {
            for ix in x0..x0 + width {
                data.push(img.get(ix, iy));
            }
        }
        Ok(Patch { width, height, data })
    }
}

/// Radially averaged noise power spectrum of an ensemble of same-shape
/// patches.
///
/// Each patch is detrended by subtracting the ensemble-mean patch; the
/// squared 2-D DFT magnitude is scaled by pitch²/(patch area), ensemble
/// averaged, and radially binned with bin width equal to one DFT frequency
/// step. Needs at least 8 patches.
pub fn nps_radial(patches: &[Patch], pitch_cm: f64) -> crate::Result<RadialProfile> {
    if patches.len() < 8 {
        return Err(crate::Error::config(format!(
            "NPS needs at least 8 patches, got {}",
            patches.len()
        )));
    }
    let (w, h) = (patches[0].width, patches[0].height);
    if patches.iter().any(|p| p.width != w || p.height != h) {
        return Err(crate::Error::config("NPS patches must share one shape"));
    }

    // Ensemble-mean patch.
    let m = patches.len() as f64;
    let mut mean = vec![0.0f64; w * h];
    for p in patches {
        for (acc, &x) in mean.iter_mut().zip(p.data.iter()) {
            *acc += x;
        }
    }
    for acc in &mut mean {
        *acc /= m;
    }

    let area = (w * h) as f64;
    let scale = pitch_cm * pitch_cm / area;
    let mut nps2d = vec![0.0f64; w * h];
    for p in patches {
        let residual: Vec<f64> = p.data.iter().zip(mean.iter()).map(|(x, mu)| x - mu).collect();
        let spec = dft2_forward(&residual, w, h);
        for (acc, z) in nps2d.iter_mut().zip(spec.iter()) {
            *acc += z.norm_sqr() * scale;
        }
    }
    for acc in &mut nps2d {
        *acc /= m;
    }

    Ok(radial_average(&nps2d, w, h, pitch_cm))
}

/// Radially bin a 2-D spectrum with bin width = one DFT frequency step
/// (of the longer axis — i.e. the finer step).
fn radial_average(spec: &[f64], w: usize, h: usize, pitch_cm: f64) -> RadialProfile {
    let fx_step = 1.0 / (w as f64 * pitch_cm);
    let fy_step = 1.0 / (h as f64 * pitch_cm);
    let bin_width = fx_step.min(fy_step);
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for ky in 0..h {
        let fy = signed_freq_index(ky, h) as f64 * fy_step;
        for kx in 0..w {
            let fx = signed_freq_index(kx, w) as f64 * fx_step;
            let f = fx.hypot(fy);
            let bin = (f / bin_width).round() as usize;
            if bin >= sums.len() {
                sums.resize(bin + 1, 0.0);
                counts.resize(bin + 1, 0);
            }
            sums[bin] += spec[ky * w + kx];
            counts[bin] += 1;
        }
    }
    let frequencies: Vec<f64> = (0..sums.len()).map(|b| b as f64 * bin_width).collect();
    let values: Vec<f64> = sums
        .iter()
        .zip(counts.iter())
        .map(|(s, &n)| if n > 0 { s / n as f64 } else { 0.0 })
        .collect();
    RadialProfile {
        frequencies,
        values,
        counts,
    }
}

/// Side of the square patch extracted around the wire.
pub const MTF_PATCH: usize = 64;

/// Wire-based MTF: extract a 64×64 patch around the wire, subtract the
/// background-annulus mean, clamp residual negatives to zero, take the
/// radially averaged 2-D DFT magnitude and normalize the DC bin to 1.
///
/// `wire_center` is in pixel coordinates. Crossings are linear
/// interpolations between adjacent bins, reported in cycles/cm; crossings
/// that do not occur below the Nyquist frequency come back as `None`.
pub fn mtf_from_wire(img: &Image, wire_center: [f64; 2], pitch_cm: f64) -> crate::Result<MtfResult> {
    let half = (MTF_PATCH / 2) as isize;
    let cx = wire_center[0].round() as isize;
    let cy = wire_center[1].round() as isize;
    let x0 = cx - half;
    let y0 = cy - half;
    if x0 < 0
        || y0 < 0
        || x0 + MTF_PATCH as isize > img.n() as isize
        || y0 + MTF_PATCH as isize > img.n() as isize
    {
        return Err(crate::Error::config(format!(
            "wire patch around ({cx},{cy}) does not fit inside the {0}x{0} image",
            img.n()
        )));
    }
    let patch = Patch::from_image(img, x0 as usize, y0 as usize, MTF_PATCH, MTF_PATCH)?;

    // Background from an annulus well outside the point response.
    let r_in = (MTF_PATCH / 2 - 12) as f64;
    let r_out = (MTF_PATCH / 2 - 2) as f64;
    let c = (MTF_PATCH as f64 - 1.0) / 2.0;
    let mut bg_sum = 0.0;
    let mut bg_n = 0usize;
    for iy in 0..MTF_PATCH {
        for ix in 0..MTF_PATCH {
            let r = ((ix as f64 - c).powi(2) + (iy as f64 - c).powi(2)).sqrt();
            if r >= r_in && r <= r_out {
                bg_sum += patch.data[iy * MTF_PATCH + ix];
                bg_n += 1;
            }
        }
    }
    let bg = bg_sum / bg_n as f64;

    let psf: Vec<f64> = patch.data.iter().map(|&x| (x - bg).max(0.0)).collect();
    let psf_sum: f64 = psf.iter().sum();
    if psf_sum <= 0.0 {
        return Err(crate::Error::data(
            "wire not found: point-response sum is non-positive after background subtraction",
        ));
    }

    let spec = dft2_forward(&psf, MTF_PATCH, MTF_PATCH);
    let mag: Vec<f64> = spec.iter().map(|z| z.norm()).collect();
    let mut profile = radial_average(&mag, MTF_PATCH, MTF_PATCH, pitch_cm);
    let dc = profile.values[0];
    // psf_sum > 0 equals the DC magnitude, so this cannot divide by zero.
    for v in &mut profile.values {
        *v /= dc;
    }

    let nyquist = 1.0 / (2.0 * pitch_cm);
    let crossings = MtfCrossings {
        f50: find_crossing(&profile, 0.50, nyquist),
        f10: find_crossing(&profile, 0.10, nyquist),
        f04: find_crossing(&profile, 0.04, nyquist),
    };
    Ok(MtfResult { profile, crossings })
}

/// First downward crossing of `level`, searched from DC up to the Nyquist
/// frequency, linearly interpolated between bins.
fn find_crossing(profile: &RadialProfile, level: f64, nyquist: f64) -> Option<f64> {
    for k in 0..profile.values.len() - 1 {
        if profile.frequencies[k + 1] > nyquist {
            break;
        }
        let (v0, v1) = (profile.values[k], profile.values[k + 1]);
        if v0 >= level && v1 < level {
            let t = (v0 - level) / (v0 - v1);
            return Some(profile.frequencies[k] + t * (profile.frequencies[k + 1] - profile.frequencies[k]));
        }
    }
    None
}
