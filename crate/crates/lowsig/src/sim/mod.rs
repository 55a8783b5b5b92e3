//! Synthetic data generation: analytic ellipse phantoms, parallel-beam
//! forward projection, Beer–Lambert counts and Poisson + Gaussian noise.

pub mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{Dims, SinogramGrid, Stage};
use rng::CellRng;

/// One attenuating ellipse; attenuation adds where shapes overlap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ellipse {
    /// Center (x, y) in cm.
    pub center: [f64; 2],
    /// Semi-axes (a, b) in cm.
    pub semi_axes: [f64; 2],
    /// Rotation in radians.
    #[serde(default)]
    pub rotation_rad: f64,
    /// Attenuation in 1/cm.
    pub mu: f64,
}

/// Small high-attenuation disc used as a resolution target.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Wire {
    pub center: [f64; 2],
    /// Radius in cm.
    pub radius: f64,
    /// Attenuation in 1/cm.
    pub mu: f64,
}

/// Analytic scene: ellipses plus an optional wire disc.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Phantom {
    #[serde(default = "default_phantom_version")]
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub ellipses: Vec<Ellipse>,
    #[serde(default)]
    pub wire: Option<Wire>,
}

fn default_phantom_version() -> u32 {
    1
}

impl Phantom {
    pub fn validate(&self) -> crate::Result<()> {
        for (i, e) in self.ellipses.iter().enumerate() {
            if e.semi_axes[0] <= 0.0 || e.semi_axes[1] <= 0.0 {
                return Err(crate::Error::config(format!(
                    "phantom ellipse {i}: semi-axes must be positive"
                )));
            }
            if !e.mu.is_finite() || !e.rotation_rad.is_finite() {
                return Err(crate::Error::config(format!(
                    "phantom ellipse {i}: mu and rotation must be finite"
                )));
            }
        }
        if let Some(w) = &self.wire {
            if w.radius <= 0.0 {
                return Err(crate::Error::config("phantom wire: radius must be positive"));
            }
            if !w.mu.is_finite() {
                return Err(crate::Error::config("phantom wire: mu must be finite"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> crate::Result<Self> {
        let ph: Phantom = serde_json::from_str(s)
            .map_err(|e| crate::Error::config(format!("phantom schema violation: {e}")))?;
        ph.validate()?;
        Ok(ph)
    }

    /// Bundled phantom by name: `water_bone` (streak generator) or
    /// `wire` (resolution target in a low-signal bath).
    pub fn bundled(name: &str) -> crate::Result<Self> {
        let json = match name {
            "water_bone" => WATER_BONE_JSON,
            "wire" => WIRE_JSON,
            other => {
                return Err(crate::Error::config(format!(
                    "unknown bundled phantom '{other}' (available: water_bone, wire)"
                )))
            }
        };
        Phantom::from_json_str(json)
    }

    /// True attenuation at a point, summing overlapping shapes.
    pub fn mu_at(&self, x: f64, y: f64) -> f64 {
        let mut mu = 0.0;
        for e in &self.ellipses {
            let dx = x - e.center[0];
            let dy = y - e.center[1];
            let (s, c) = e.rotation_rad.sin_cos();
            let u = dx * c + dy * s;
            let w = -dx * s + dy * c;
            let na = u / e.semi_axes[0];
            let nb = w / e.semi_axes[1];
            if na * na + nb * nb <= 1.0 {
                mu += e.mu;
            }
        }
        if let Some(wire) = &self.wire {
            let dx = x - wire.center[0];
            let dy = y - wire.center[1];
            if dx * dx + dy * dy <= wire.radius * wire.radius {
                mu += wire.mu;
            }
        }
        mu
    }

    /// Largest distance from the isocenter reached by any shape.
    pub fn extent(&self) -> f64 {
        let mut ext = 0.0f64;
        for e in &self.ellipses {
            let r = e.center[0].hypot(e.center[1]) + e.semi_axes[0].max(e.semi_axes[1]);
            ext = ext.max(r);
        }
        if let Some(w) = &self.wire {
            ext = ext.max(w.center[0].hypot(w.center[1]) + w.radius);
        }
        ext
    }
}

pub const WATER_BONE_JSON: &str = include_str!("../../phantoms/water_bone.json");
pub const WIRE_JSON: &str = include_str!("../../phantoms/wire.json");

/// Parallel-beam acquisition description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Geometry {
    pub channels: usize,
    /// Detector channel pitch at isocenter, cm.
    pub pitch_cm: f64,
    pub rows: usize,
    pub views: usize,
    /// Field-of-view radius, cm.
    pub fov_radius_cm: f64,
    /// Explicit view angles in radians (strictly increasing). Omitted =
    /// uniform over [0, pi).
    pub angles: Option<Vec<f64>>,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            channels: 512,
            pitch_cm: 24.0 / 512.0,
            rows: 5,
            views: 720,
            fov_radius_cm: 12.0,
            angles: None,
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> crate::Result<()> {
        if self.channels < 1 || self.rows < 1 || self.views < 1 {
            return Err(crate::Error::config("geometry dims must be >= 1"));
        }
        if self.pitch_cm <= 0.0 || self.fov_radius_cm <= 0.0 {
            return Err(crate::Error::config("geometry pitch and fov must be > 0"));
        }
        if let Some(a) = &self.angles {
            if a.len() != self.views {
                return Err(crate::Error::config(format!(
                    "{} angles given for {} views",
                    a.len(),
                    self.views
                )));
            }
            if !a.windows(2).all(|p| p[1] > p[0]) {
                return Err(crate::Error::config("view angles must be strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.channels, self.rows, self.views)
    }

    /// Angle of view `v` in radians.
    #[inline]
    pub fn angle(&self, v: usize) -> f64 {
        match &self.angles {
            Some(a) => a[v],
            None => v as f64 * std::f64::consts::PI / self.views as f64,
        }
    }

    /// Signed detector coordinate of channel `c`, cm from the isocenter ray.
    #[inline]
    pub fn channel_t(&self, c: usize) -> f64 {
        (c as f64 - (self.channels as f64 - 1.0) / 2.0) * self.pitch_cm
    }

    pub fn uniform_angles(&self) -> bool {
        self.angles.is_none()
    }
}

/// Poisson + Gaussian measurement noise.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Air-scan intensity per channel, counts.
    pub i0: f64,
    /// Electronic-noise standard deviation, counts.
    pub sigma_e: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            i0: 2.0e4,
            sigma_e: 5.0,
            seed: 42,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> crate::Result<()> {
        if self.i0 <= 0.0 {
            return Err(crate::Error::config("noise i0 must be > 0"));
        }
        if self.sigma_e < 0.0 {
            return Err(crate::Error::config("noise sigma_e must be >= 0"));
        }
        Ok(())
    }
}

/// Line integral of one ellipse along the ray at angle `phi` (radians)
/// and signed detector coordinate `t`.
fn ellipse_line_integral(e: &Ellipse, t: f64, phi: f64) -> f64 {
    let tau = t - (e.center[0] * phi.cos() + e.center[1] * phi.sin());
    let gamma = phi - e.rotation_rad;
    let (a, b) = (e.semi_axes[0], e.semi_axes[1]);
    let (sg, cg) = gamma.sin_cos();
    let s2 = a * a * cg * cg + b * b * sg * sg;
    let rem = s2 - tau * tau;
    if rem > 0.0 {
        2.0 * a * b * rem.sqrt() / s2 * e.mu
    } else {
        0.0
    }
}

/// Exact analytic forward projection of the phantom.
///
/// Every (channel, view) cell holds the closed-form chord-weighted sum of
/// attenuations; the 2-D scene is replicated across detector rows.
pub fn forward_project(ph: &Phantom, g: &Geometry) -> crate::Result<SinogramGrid> {
    ph.validate()?;
    g.validate()?;
    let ext = ph.extent();
    if ext > g.fov_radius_cm {
        return Err(crate::Error::config(format!(
            "phantom extent {ext:.3} cm exceeds field-of-view radius {:.3} cm",
            g.fov_radius_cm
        )));
    }

    let c_len = g.channels;
    let mut slab = vec![0.0f64; c_len * g.views]; // (channel, view), channel-fastest
    slab.par_chunks_mut(c_len).enumerate().for_each(|(v, row)| {
        let phi = g.angle(v);
        for (c, out) in row.iter_mut().enumerate() {
            let t = g.channel_t(c);
            let mut p = 0.0;
            for e in &ph.ellipses {
                p += ellipse_line_integral(e, t, phi);
            }
            if let Some(w) = &ph.wire {
                let disc = Ellipse {
                    center: w.center,
                    semi_axes: [w.radius, w.radius],
                    rotation_rad: 0.0,
                    mu: w.mu,
                };
                p += ellipse_line_integral(&disc, t, phi);
            }
            *out = p;
        }
    });

    let dims = g.dims();
    let mut data = Vec::with_capacity(dims.len());
    for v in 0..g.views {
        let view = &slab[v * c_len..(v + 1) * c_len];
        for _ in 0..g.rows {
            data.extend_from_slice(view);
        }
    }
    Ok(SinogramGrid::from_vec(dims, Stage::Projection, data))
}

/// Beer–Lambert expected counts: `i0 · exp(-p)` per cell, in (0, i0].
pub fn counts_from_projection(p: &SinogramGrid, i0: f64) -> SinogramGrid {
    p.assert_stage(Stage::Projection);
    assert!(i0 > 0.0, "air intensity must be positive");
    p.map(Stage::Counts, |x| i0 * (-x).exp())
}

/// Poisson shot noise plus Gaussian electronic noise, one independent
/// counter-based stream per cell. Negative outputs are expected in deep
/// starvation.
pub fn add_noise(ideal: &SinogramGrid, nm: &NoiseModel) -> SinogramGrid {
    ideal.assert_stage(Stage::Counts);
    let dims = ideal.dims();
    let src = ideal.data();
    let mut out = vec![0.0; dims.len()];
    out.par_iter_mut().enumerate().for_each(|(i, cell)| {
        let mut rng = CellRng::from_seed(nm.seed, i as u64);
        let shot = rng.poisson(src[i]) as f64;
        *cell = shot + nm.sigma_e * rng.next_gaussian();
    });
    SinogramGrid::from_vec(dims, Stage::Counts, out)
}
