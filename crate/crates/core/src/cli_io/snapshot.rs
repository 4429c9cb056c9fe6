//! Raw field snapshots with JSON sidecars.
//!
//! `<field>_<NNNN>.bin` holds little-endian `f64` values, component-major: all
//! nodes of component `(0,0)`, then `(0,1)`, … in row-major tensor order. Nodes
//! are ordered row-major over the grid (last axis fastest). `meta_<NNNN>.json`
//! records everything needed to rebuild the arrays.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::tensor_field::{GridShape, Tensor2, Tensor2Field};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub name: String,
    pub file: String,
    /// Component labels in storage order, e.g. `["00", "01", "10", "11"]`.
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub increment: usize,
    pub time: f64,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub dtype: String,
    pub layout: String,
    /// Prescribed macroscopic deformation gradient, row-major.
    pub fbar: Vec<f64>,
    pub fields: Vec<FieldMeta>,
}

impl SnapshotMeta {
    pub fn shape(&self) -> io::Result<GridShape> {
        GridShape::new(&self.points, &self.lengths).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn fbar_tensor(&self) -> Tensor2 {
        Tensor2::from_row_major(self.points.len(), &self.fbar)
    }
}

/// One field's data, either a scalar or a second-order tensor field.
pub enum FieldData<'a> {
    Scalar(&'a [f64]),
    Tensor(&'a Tensor2Field),
}

pub fn meta_file(increment: usize) -> String {
    format!("meta_{increment:04}.json")
}

pub fn field_file(name: &str, increment: usize) -> String {
    format!("{name}_{increment:04}.bin")
}

fn component_labels(dim: usize) -> Vec<String> {
    (0..dim).flat_map(|i| (0..dim).map(move |j| format!("{i}{j}"))).collect()
}

/// Writes the fields and then the sidecar. Each file is written under a
/// temporary name and renamed, so a snapshot appears only once complete.
pub fn write_snapshot(
    dir: &Path,
    increment: usize,
    time: f64,
    shape: &GridShape,
    fbar: &Tensor2,
    fields: &[(&str, FieldData<'_>)],
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut metas = Vec::new();
    for (name, data) in fields {
        let (values, components) = match data {
            FieldData::Scalar(v) => (*v, vec!["0".to_string()]),
            FieldData::Tensor(t) => (t.data(), component_labels(t.dim())),
        };
        let file = field_file(name, increment);
        let mut bytes = Vec::with_capacity(values.len() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        written.push(atomic_write(&dir.join(&file), &bytes)?);
        metas.push(FieldMeta { name: name.to_string(), file, components });
    }
    let meta = SnapshotMeta {
        increment,
        time,
        points: shape.points().to_vec(),
        lengths: shape.lengths().to_vec(),
        dtype: "f64-le".into(),
        layout: "component-major; components row-major; nodes row-major, last axis fastest".into(),
        fbar: fbar.as_slice().to_vec(),
        fields: metas,
    };
    let json = serde_json::to_vec_pretty(&meta).map_err(io::Error::other)?;
    written.push(atomic_write(&dir.join(meta_file(increment)), &json)?);
    Ok(written)
}

fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<PathBuf> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(path.to_path_buf())
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub fields: BTreeMap<String, Vec<f64>>,
}

impl Snapshot {
    pub fn shape(&self) -> io::Result<GridShape> {
        self.meta.shape()
    }

    pub fn tensor(&self, name: &str) -> Option<Tensor2Field> {
        let shape = self.shape().ok()?;
        let data = self.fields.get(name)?;
        (data.len() == shape.nodes() * shape.dim() * shape.dim()).then(|| Tensor2Field::from_vec(&shape, data.clone()))
    }
}

pub fn read_snapshot(dir: &Path, increment: usize) -> io::Result<Snapshot> {
    let meta: SnapshotMeta = serde_json::from_slice(&fs::read(dir.join(meta_file(increment)))?)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let nodes: usize = meta.points.iter().product();
    let mut fields = BTreeMap::new();
    for f in &meta.fields {
        let bytes = fs::read(dir.join(&f.file))?;
        let expected = nodes * f.components.len() * 8;
        if bytes.len() != expected {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{} has {} bytes, expected {expected}", f.file, bytes.len()),
            ));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        fields.insert(f.name.clone(), values);
    }
    Ok(Snapshot { meta, fields })
}

/// Increment numbers of all snapshots in a directory, ascending.
pub fn list_snapshots(dir: &Path) -> io::Result<Vec<usize>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(num) = name.strip_prefix("meta_").and_then(|s| s.strip_suffix(".json")) {
            if let Ok(k) = num.parse() {
                found.push(k);
            }
        }
    }
    found.sort_unstable();
    Ok(found)
}
