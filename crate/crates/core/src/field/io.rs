//! Binary field container with a JSON sidecar.
//!
//! Layout (little endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `HHFIELD1` |
//! | 4     | n (u32) |
//! | 4     | N (u32) |
//! | 8     | L (f64) |
//! | 1     | degree mask |
//! | 1     | boundary flavor tag (0 = whole space, 1..4 = D, N, Ht, Hn) |
//! | 4     | rows along the last axis (N, or N/2 + 1 for half-space data) |
//!
//! followed by the present components in increasing blade order, each as
//! `N^{n-1}·rows` complex64 values stored as `(re: f32, im: f32)` pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DegreeMask, FormField, Grid};
use crate::algebra::Blade;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HHFIELD1";
const HEADER_LEN: usize = 30;

/// Everything stored in a container, independent of the field type.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRecord {
    pub grid: Grid,
    pub mask: DegreeMask,
    pub flavor_tag: u8,
    pub rows: usize,
    pub components: Vec<(Blade, Vec<Complex64>)>,
}

/// Contents of the `.json` sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
    pub degrees: Vec<usize>,
    pub flavor: Option<String>,
    pub rows: usize,
    pub components: Vec<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

pub fn flavor_name(tag: u8) -> Option<&'static str> {
    match tag {
        1 => Some("D"),
        2 => Some("N"),
        3 => Some("Ht"),
        4 => Some("Hn"),
        _ => None,
    }
}

fn blade_label(b: Blade) -> String {
    if b.degree() == 0 {
        "1".into()
    } else {
        let axes: Vec<String> = b.axes().map(|a| a.to_string()).collect();
        format!("dx_{}", axes.join(""))
    }
}

/// Path of the sidecar belonging to a container path.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

impl FieldRecord {
    fn samples_per_component(&self) -> usize {
        self.grid.points().pow(self.grid.dim() as u32 - 1) * self.rows
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.components.len() * self.samples_per_component());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.grid.dim() as u32).to_le_bytes());
        out.extend_from_slice(&(self.grid.points() as u32).to_le_bytes());
        out.extend_from_slice(&self.grid.half_length().to_le_bytes());
        out.push(self.mask.0);
        out.push(self.flavor_tag);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        for (_, c) in &self.components {
            for v in c {
                out.extend_from_slice(&(v.re as f32).to_le_bytes());
                out.extend_from_slice(&(v.im as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return Err(Error::Format("missing container header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let dim = u32_at(8);
        let points = u32_at(12);
        let half_length = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let mask = DegreeMask(bytes[24]);
        let flavor_tag = bytes[25];
        let rows = u32_at(26);
        let grid = Grid::new(dim, points, half_length)?;
        if rows != points && rows != points / 2 + 1 {
            return Err(Error::Format(format!("unsupported row count {rows}")));
        }
        let blades = mask.blades(dim);
        let per = points.pow(dim as u32 - 1) * rows;
        let expected = HEADER_LEN + 8 * per * blades.len();
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "payload size {} does not match header ({expected} bytes expected)",
                bytes.len()
            )));
        }
        let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
        let components = blades
            .into_iter()
            .enumerate()
            .map(|(ci, b)| {
                let base = HEADER_LEN + 8 * per * ci;
                let samples = (0..per)
                    .map(|i| Complex64::new(f32_at(base + 8 * i), f32_at(base + 8 * i + 4)))
                    .collect();
                (b, samples)
            })
            .collect();
        Ok(Self {
            grid,
            mask,
            flavor_tag,
            rows,
            components,
        })
    }

    pub fn sidecar(&self, metadata: BTreeMap<String, serde_json::Value>) -> Sidecar {
        Sidecar {
            format: "HHFIELD1".into(),
            dim: self.grid.dim(),
            points: self.grid.points(),
            half_length: self.grid.half_length(),
            degrees: self.mask.degrees().collect(),
            flavor: flavor_name(self.flavor_tag).map(String::from),
            rows: self.rows,
            components: self.components.iter().map(|(b, _)| blade_label(*b)).collect(),
            metadata,
        }
    }

    /// Writes the container and its sidecar next to it.
    pub fn save(&self, path: &Path, metadata: BTreeMap<String, serde_json::Value>) -> Result<()> {
        fs::write(path, self.encode())?;
        fs::write(
            sidecar_path(path),
            serde_json::to_string_pretty(&self.sidecar(metadata))?,
        )?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }
}

impl FormField {
    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            grid: *self.grid(),
            mask: self.mask(),
            flavor_tag: 0,
            rows: self.grid().points(),
            components: self.components().map(|(b, c)| (b, c.to_vec())).collect(),
        }
    }

    pub fn from_record(record: FieldRecord) -> Result<Self> {
        if record.flavor_tag != 0 || record.rows != record.grid.points() {
            return Err(Error::Format("container holds half-space data".into()));
        }
        FormField::from_components(record.grid, record.components)
    }

    pub fn save(&self, path: &Path, metadata: BTreeMap<String, serde_json::Value>) -> Result<()> {
        self.to_record().save(path, metadata)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_record(FieldRecord::load(path)?)
    }
}
