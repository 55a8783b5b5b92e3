//! On-disk formats.
//!
//! Grids and images are raw little-endian binaries with a JSON sidecar
//! header (`<file>.json`) describing dims, axis order, dtype, stage and
//! units, so any language can parse them bit-exactly. Profiles and
//! crossings go to plain CSV with '.' decimals.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::{Dims, SinogramGrid, Stage};
use crate::metrics::{MtfCrossings, RadialProfile};
use crate::recon::Image;
use crate::{Error, Result};

/// Element type of a grid body on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dtype {
    #[serde(rename = "f32")]
    F32,
    #[serde(rename = "f64")]
    F64,
}

impl Dtype {
    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// Sidecar header of a grid file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridHeader {
    pub dims: Dims,
    pub axis_order: String,
    pub dtype: Dtype,
    pub stage: Stage,
    pub units: String,
}

fn stage_units(stage: Stage) -> &'static str {
    match stage {
        Stage::Counts => "counts",
        Stage::Vst => "vst",
        Stage::Projection => "line_integral",
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Write a grid body plus its sidecar header.
pub fn write_grid(path: &Path, grid: &SinogramGrid, dtype: Dtype) -> Result<()> {
    if let Some(idx) = grid.first_non_finite() {
        return Err(Error::data(format!(
            "refusing to write non-finite value at flat index {idx}"
        )));
    }
    let mut body = Vec::with_capacity(grid.data().len() * dtype.size());
    match dtype {
        Dtype::F32 => {
            for &x in grid.data() {
                body.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        Dtype::F64 => {
            for &x in grid.data() {
                body.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    write_file(path, &body)?;
    let header = GridHeader {
        dims: grid.dims(),
        axis_order: "channel,row,view".to_string(),
        dtype,
        stage: grid.stage(),
        units: stage_units(grid.stage()).to_string(),
    };
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    write_file(&sidecar(path), json.as_bytes())
}

/// Read a grid body validated against its sidecar header. Every value is
/// checked finite.
pub fn read_grid(path: &Path) -> Result<SinogramGrid> {
    let hdr_path = sidecar(path);
    let hdr_text = fs::read_to_string(&hdr_path).map_err(|e| Error::io(&hdr_path, e))?;
    let header: GridHeader = serde_json::from_str(&hdr_text).map_err(|e| Error::Json {
        path: hdr_path.clone(),
        source: e,
    })?;
    if header.axis_order != "channel,row,view" {
        return Err(Error::data(format!(
            "unsupported axis order '{}' in {}",
            header.axis_order,
            hdr_path.display()
        )));
    }
    let body = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expect = header.dims.len() * header.dtype.size();
    if body.len() != expect {
        return Err(Error::data(format!(
            "{}: body is {} bytes, header implies {}",
            path.display(),
            body.len(),
            expect
        )));
    }
    let data: Vec<f64> = match header.dtype {
        Dtype::F32 => body
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => body
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect(),
    };
    if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::data(format!(
            "{}: non-finite value at flat index {idx}",
            path.display()
        )));
    }
    Ok(SinogramGrid::from_vec(header.dims, header.stage, data))
}

/// Sidecar header of an image file (raw little-endian f32 body).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageHeader {
    pub n: usize,
    pub pixel_pitch_cm: f64,
    pub units: String,
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    let mut body = Vec::with_capacity(img.data().len() * 4);
    for &x in img.data() {
        body.extend_from_slice(&(x as f32).to_le_bytes());
    }
    write_file(path, &body)?;
    let header = ImageHeader {
        n: img.n(),
        pixel_pitch_cm: img.pitch_cm(),
        units: "cm^-1".to_string(),
    };
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    write_file(&sidecar(path), json.as_bytes())
}

pub fn read_image(path: &Path) -> Result<Image> {
    let hdr_path = sidecar(path);
    let hdr_text = fs::read_to_string(&hdr_path).map_err(|e| Error::io(&hdr_path, e))?;
    let header: ImageHeader = serde_json::from_str(&hdr_text).map_err(|e| Error::Json {
        path: hdr_path.clone(),
        source: e,
    })?;
    let body = fs::read(path).map_err(|e| Error::io(path, e))?;
    if body.len() != header.n * header.n * 4 {
        return Err(Error::data(format!(
            "{}: body is {} bytes, header implies {}",
            path.display(),
            body.len(),
            header.n * header.n * 4
        )));
    }
    let data: Vec<f64> = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Ok(Image::new(header.n, header.pixel_pitch_cm, data))
}

/// Radial profile as `frequency_cm_inv,value` CSV.
pub fn write_profile_csv(path: &Path, profile: &RadialProfile) -> Result<()> {
    let mut text = String::from("frequency_cm_inv,value\n");
    for (f, v) in profile.frequencies.iter().zip(profile.values.iter()) {
        text.push_str(&format!("{f},{v}\n"));
    }
    write_file(path, text.as_bytes())
}

/// MTF crossings as a 3-row CSV keyed 50/10/4.
pub fn write_crossings_csv(path: &Path, crossings: &MtfCrossings) -> Result<()> {
    let fmt = |c: Option<f64>| c.map_or("beyond_nyquist".to_string(), |f| f.to_string());
    let text = format!(
        "level_percent,frequency_cm_inv\n50,{}\n10,{}\n4,{}\n",
        fmt(crossings.f50),
        fmt(crossings.f10),
        fmt(crossings.f04)
    );
    write_file(path, text.as_bytes())
}

/// ROI statistics as `metric,value` CSV.
pub fn write_roi_csv(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    let mut text = String::from("metric,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    write_file(path, text.as_bytes())
}

/// SHA-256 of a serialized config; two configs hash alike iff their
/// serialized content is identical.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    hex::encode(hasher.finalize())
}

/// One pipeline stage entry of a run manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestStage {
    pub name: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub stages: Vec<ManifestStage>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            stages: Vec::new(),
        }
    }

    pub fn push_stage(&mut self, stage: ManifestStage) {
        self.stages.push(stage);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(path, json.as_bytes())
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("value serializes");
    write_file(path, json.as_bytes())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn grid_round_trip_f64_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.grid");
        let d = Dims::new(5, 3, 4);
        let mut rng = crate::sim::rng::CellRng::from_seed(9, 9);
        let data: Vec<f64> = (0..d.len()).map(|_| rng.next_f64() * 1e6 - 100.0).collect();
        let g = SinogramGrid::from_vec(d, Stage::Counts, data);
        write_grid(&path, &g, Dtype::F64).unwrap();
        let back = read_grid(&path).unwrap();
        assert_eq!(back.dims(), g.dims());
        assert_eq!(back.stage(), g.stage());
        assert_eq!(back.data(), g.data());
    }

    #[test]
    fn grid_round_trip_f32_is_stable() {
        // f32 storage: a second write/read cycle reproduces the first
        // bit-exactly.
        let dir = tempdir().unwrap();
        let path = dir.path().join("b.grid");
        let d = Dims::new(4, 2, 2);
        let mut rng = crate::sim::rng::CellRng::from_seed(3, 1);
        let data: Vec<f64> = (0..d.len()).map(|_| rng.next_f64() * 2e4).collect();
        let g = SinogramGrid::from_vec(d, Stage::Counts, data);
        write_grid(&path, &g, Dtype::F32).unwrap();
        let once = read_grid(&path).unwrap();
        write_grid(&path, &once, Dtype::F32).unwrap();
        let twice = read_grid(&path).unwrap();
        assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn grid_file_size_matches_dims() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.grid");
        let d = Dims::new(512, 5, 720);
        let g = SinogramGrid::filled(d, Stage::Counts, 1.0);
        write_grid(&path, &g, Dtype::F32).unwrap();
        let meta = fs::metadata(&path).unwrap();
        assert_eq!(meta.len() as usize, 512 * 5 * 720 * 4);
    }

    #[test]
    fn read_rejects_truncated_body() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.grid");
        let g = SinogramGrid::filled(Dims::new(4, 1, 1), Stage::Counts, 2.0);
        write_grid(&path, &g, Dtype::F32).unwrap();
        let body = fs::read(&path).unwrap();
        fs::write(&path, &body[..body.len() - 4]).unwrap();
        assert!(matches!(read_grid(&path), Err(Error::Data(_))));
    }

    #[test]
    fn write_rejects_non_finite() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("e.grid");
        let g = SinogramGrid::from_vec(
            Dims::new(2, 1, 1),
            Stage::Counts,
            vec![1.0, f64::NAN],
        );
        assert!(matches!(write_grid(&path, &g, Dtype::F64), Err(Error::Data(_))));
    }

    #[test]
    fn image_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("f.img");
        let mut img = Image::filled(8, 0.125, 0.0);
        for (i, x) in img.data_mut().iter_mut().enumerate() {
            *x = i as f64 / 7.0;
        }
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.n(), 8);
        assert_eq!(back.pitch_cm(), 0.125);
        for (a, b) in back.data().iter().zip(img.data().iter()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = crate::af::AfConfig::default();
        let mut b = crate::af::AfConfig::default();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.k1 = 401.0;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn crossings_csv_encodes_missing_as_beyond_nyquist() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_crossings_csv(
            &path,
            &MtfCrossings {
                f50: Some(2.0),
                f10: None,
                f04: None,
            },
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("50,2"));
        assert!(text.contains("10,beyond_nyquist"));
    }
}
