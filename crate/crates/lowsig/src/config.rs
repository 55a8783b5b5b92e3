//! Run configuration consumed via `--config`.
//!
//! Correction keys sit at the top level of the JSON document (the
//! fixed-threshold ones carry an `ft_` prefix); geometry, noise,
//! reconstruction and metrics settings are nested sections. Every key has
//! a default, so `{}` is a valid config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::af::AfConfig;
use crate::ft::FtConfig;
use crate::io::Dtype;
use crate::metrics::RoiSpec;
use crate::recon::ReconConfig;
use crate::sim::{Geometry, NoiseModel};

/// NPS measurement request: same-size square patches at the given pixel
/// centers of each input image.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NpsSpec {
    pub patch_size: usize,
    pub centers_px: Vec<[usize; 2]>,
}

/// Wire MTF measurement request; the wire position is given in world
/// centimeters and mapped through each image's pixel grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WireSpec {
    pub center_cm: [f64; 2],
}

/// What `lowsig metrics` measures.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub roi: Option<RoiSpec>,
    pub nps: Option<NpsSpec>,
    pub wire: Option<WireSpec>,
}

/// Full pipeline configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub af: AfConfig,
    #[serde(flatten)]
    pub ft: FtConfig,
    pub geometry: Geometry,
    pub noise: NoiseModel,
    pub recon: ReconConfig,
    pub metrics: MetricsConfig,
    /// On-disk element type for grids written by the commands.
    pub dtype: Dtype,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            af: AfConfig::default(),
            ft: FtConfig::default(),
            geometry: Geometry::default(),
            noise: NoiseModel::default(),
            recon: ReconConfig::default(),
            metrics: MetricsConfig::default(),
            dtype: Dtype::F32,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> crate::Result<Self> {
        let cfg: RunConfig = crate::io::read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> crate::Result<()> {
        self.af.validate()?;
        self.ft.validate()?;
        self.geometry.validate()?;
        self.noise.validate()?;
        Ok(())
    }
}
