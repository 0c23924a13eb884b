//! Binary field files: a magic line, a one-line JSON header, then raw
//! little-endian f64 values in row-major cell order with components
//! interleaved last. Writing and reading back is a bitwise identity.

use crate::error::{Error, Result};
use crate::fields::field::{HasGrid, ScalarField, VectorField};
use crate::fields::grid::Grid;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &str = "CSCOPE1";

/// JSON header stored after the magic line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFileHeader {
    pub dim: usize,
    pub resolution: Vec<usize>,
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
    pub periodic: Vec<bool>,
    pub components: usize,
    pub time: f64,
    pub encoding: String,
}

impl FieldFileHeader {
    fn new(grid: &Grid, components: usize, time: f64) -> Self {
        let d = grid.dim();
        FieldFileHeader {
            dim: d,
            resolution: (0..d).map(|a| grid.resolution(a)).collect(),
            origin: (0..d).map(|a| grid.origin(a)).collect(),
            extent: (0..d).map(|a| grid.extent(a)).collect(),
            periodic: (0..d).map(|a| grid.periodic(a)).collect(),
            components,
            time,
            encoding: "f64le".into(),
        }
    }

    fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, &self.resolution, &self.origin, &self.extent, &self.periodic)
    }
}

/// A field loaded from disk, scalar or vector, with its time stamp.
#[derive(Debug, Clone)]
pub struct StoredField {
    pub header: FieldFileHeader,
    pub field: LoadedField,
}

/// Payload of a field file.
#[derive(Debug, Clone)]
pub enum LoadedField {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl LoadedField {
    pub fn grid(&self) -> &Grid {
        match self {
            LoadedField::Scalar(f) => f.grid(),
            LoadedField::Vector(f) => f.grid(),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            LoadedField::Scalar(f) => Ok(f),
            LoadedField::Vector(_) => {
                Err(Error::Format("expected a one-component field file".into()))
            }
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            LoadedField::Vector(f) => Ok(f),
            LoadedField::Scalar(f) => VectorField::from_components(vec![f]),
        }
    }
}

fn write_payload<W: Write>(out: &mut W, grid: &Grid, comps: Vec<&[f64]>) -> Result<()> {
    let ncells = grid.num_cells();
    let mut buf = Vec::with_capacity(ncells * comps.len() * 8);
    for lin in 0..ncells {
        for comp in &comps {
            buf.extend_from_slice(&comp[lin].to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

fn write_any(path: &Path, grid: &Grid, comps: Vec<&[f64]>, time: f64) -> Result<()> {
    let header = FieldFileHeader::new(grid, comps.len(), time);
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{MAGIC}")?;
    let header_line =
        serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out, "{header_line}")?;
    write_payload(&mut out, grid, comps)?;
    out.flush()?;
    Ok(())
}

/// Write a scalar field with a time stamp.
pub fn write_scalar(field: &ScalarField, time: f64, path: impl AsRef<Path>) -> Result<()> {
    write_any(path.as_ref(), field.grid(), vec![field.data()], time)
}

/// Write a vector field with a time stamp.
pub fn write_vector(field: &VectorField, time: f64, path: impl AsRef<Path>) -> Result<()> {
    let comps: Vec<&[f64]> = (0..field.ncomp()).map(|c| field.component(c)).collect();
    write_any(path.as_ref(), field.grid(), comps, time)
}

/// Read any field file; the header decides scalar versus vector.
pub fn read_field(path: impl AsRef<Path>) -> Result<StoredField> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut reader = BufReader::new(file);
    let mut magic = String::new();
    reader.read_line(&mut magic)?;
    if magic.trim_end() != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {MAGIC:?}",
            magic.trim_end()
        )));
    }
    let mut header_line = String::new();
    reader.read_line(&mut header_line)?;
    let header: FieldFileHeader = serde_json::from_str(header_line.trim_end())
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.encoding != "f64le" {
        return Err(Error::Format(format!("unknown encoding {:?}", header.encoding)));
    }
    if header.components == 0 {
        return Err(Error::Format("component count must be positive".into()));
    }
    let grid = header.grid()?;
    let ncells = grid.num_cells();
    let expected = ncells * header.components * 8;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let ncomp = header.components;
    let mut comps = vec![vec![0.0_f64; ncells]; ncomp];
    for lin in 0..ncells {
        for (c, comp) in comps.iter_mut().enumerate() {
            let at = (lin * ncomp + c) * 8;
            let bytes: [u8; 8] = payload[at..at + 8].try_into().unwrap();
            comp[lin] = f64::from_le_bytes(bytes);
        }
    }
    let field = if ncomp == 1 {
        LoadedField::Scalar(ScalarField::from_data(grid, comps.pop().unwrap())?)
    } else {
        let fields: Result<Vec<ScalarField>> = comps
            .into_iter()
            .map(|data| ScalarField::from_data(grid.clone(), data))
            .collect();
        LoadedField::Vector(VectorField::from_components(fields?)?)
    };
    Ok(StoredField { header, field })
}
