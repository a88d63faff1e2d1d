//! Data set files, synthetic generators and index snapshots.

mod binary;
mod generate;
mod snapshot;
mod text;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{ensure, Error, Result};
use crate::spaces::{
    CosineSpace, Histogram, L2Space, LevenshteinSpace, Sequence, Signature, SpaceKind, SparseVector,
    SqfdSpace,
};

pub use binary::{read_dense_binary, write_dense_binary, DENSE_MAGIC, DENSE_VERSION};
pub use generate::{
    dirichlet, dna, gaussian_mixture, generate, random_signatures, random_sparse, uniform,
    SyntheticKind, SyntheticParams,
};
pub use snapshot::{load_snapshot, read_snapshot_header, save_snapshot, SnapshotHeader, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use text::{
    read_dense_text, read_signature_text, read_sparse_text, read_string_lines, write_dense_text,
    write_signature_text, write_sparse_text, write_string_lines,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    DenseText,
    DenseBinary,
    SparseText,
    StringLines,
    SignatureText,
}

impl DataFormat {
    pub const ALL: [DataFormat; 5] = [
        DataFormat::DenseText,
        DataFormat::DenseBinary,
        DataFormat::SparseText,
        DataFormat::StringLines,
        DataFormat::SignatureText,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataFormat::DenseText => "dense-text",
            DataFormat::DenseBinary => "dense-binary",
            DataFormat::SparseText => "sparse-text",
            DataFormat::StringLines => "string-lines",
            DataFormat::SignatureText => "signature-text",
        }
    }

    /// Text format a space's objects are usually stored in.
    pub fn default_for(kind: SpaceKind) -> DataFormat {
        match kind {
            SpaceKind::L2 | SpaceKind::KlDiv | SpaceKind::JsDiv => DataFormat::DenseText,
            SpaceKind::CosineSparse => DataFormat::SparseText,
            SpaceKind::NormLevenshtein => DataFormat::StringLines,
            SpaceKind::Sqfd => DataFormat::SignatureText,
        }
    }

    pub fn supports(self, kind: SpaceKind) -> bool {
        match kind {
            SpaceKind::L2 | SpaceKind::KlDiv | SpaceKind::JsDiv => {
                matches!(self, DataFormat::DenseText | DataFormat::DenseBinary)
            }
            _ => self == DataFormat::default_for(kind),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DataFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown data format `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Histogram components below this value are raised to it.
    pub floor_epsilon: f64,
    /// Rescale histograms to sum 1 after flooring.
    pub normalize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            floor_epsilon: 1e-5,
            normalize: true,
        }
    }
}

/// Floors every component at `epsilon`, then optionally renormalizes.
pub fn to_histogram(mut values: Vec<f64>, options: &LoadOptions) -> Result<Histogram> {
    ensure!(
        options.floor_epsilon > 0.0 && options.floor_epsilon.is_finite(),
        "floor epsilon must be positive"
    );
    for v in values.iter_mut() {
        ensure!(*v >= 0.0 && v.is_finite(), "histogram value {v} is negative or non-finite");
        if *v < options.floor_epsilon {
            *v = options.floor_epsilon;
        }
    }
    if options.normalize {
        let sum: f64 = values.iter().sum();
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    Histogram::new(values)
}

/// A loaded data set, typed by the kind of object it holds.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedData {
    Dense(DataSet<Vec<f64>>),
    Histograms(DataSet<Histogram>),
    Sparse(DataSet<SparseVector>),
    Sequences(DataSet<Sequence>),
    Signatures(DataSet<Signature>),
}

impl LoadedData {
    pub fn len(&self) -> usize {
        match self {
            LoadedData::Dense(d) => d.len(),
            LoadedData::Histograms(d) => d.len(),
            LoadedData::Sparse(d) => d.len(),
            LoadedData::Sequences(d) => d.len(),
            LoadedData::Signatures(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn content_hash(&self) -> [u8; 32] {
        match self {
            LoadedData::Dense(d) => d.content_hash(),
            LoadedData::Histograms(d) => d.content_hash(),
            LoadedData::Sparse(d) => d.content_hash(),
            LoadedData::Sequences(d) => d.content_hash(),
            LoadedData::Signatures(d) => d.content_hash(),
        }
    }
}

/// Reads `path` as `format` and validates every record for `kind`. Ids are
/// record positions starting at 0.
pub fn load_dataset(path: &Path, format: DataFormat, kind: SpaceKind, options: &LoadOptions) -> Result<LoadedData> {
    ensure!(
        format.supports(kind),
        "format {format} cannot hold objects of space {kind}"
    );
    let dense = |path: &Path| match format {
        DataFormat::DenseBinary => read_dense_binary(path),
        _ => read_dense_text(path),
    };
    Ok(match kind {
        SpaceKind::L2 => LoadedData::Dense(DataSet::validated(&L2Space, dense(path)?)?),
        SpaceKind::KlDiv | SpaceKind::JsDiv => {
            let rows = dense(path)?;
            let hist = rows
                .into_iter()
                .enumerate()
                .map(|(id, r)| to_histogram(r, options).map_err(|e| Error::invalid(format!("object {id}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let data = DataSet::new(hist);
            if options.normalize {
                for (id, h) in data.iter().enumerate() {
                    h.check_distribution()
                        .map_err(|e| Error::invalid(format!("object {id}: {e}")))?;
                }
            }
            LoadedData::Histograms(data)
        }
        SpaceKind::CosineSparse => LoadedData::Sparse(DataSet::validated(&CosineSpace, read_sparse_text(path)?)?),
        SpaceKind::NormLevenshtein => {
            LoadedData::Sequences(DataSet::validated(&LevenshteinSpace, read_string_lines(path)?)?)
        }
        SpaceKind::Sqfd => LoadedData::Signatures(DataSet::validated(&SqfdSpace::default(), read_signature_text(path)?)?),
    })
}

/// Writes `data` in `format`; the format must match the object type.
pub fn save_dataset(path: &Path, format: DataFormat, data: &LoadedData) -> Result<()> {
    match (data, format) {
        (LoadedData::Dense(d), DataFormat::DenseText) => write_dense_text(path, d.objects()),
        (LoadedData::Dense(d), DataFormat::DenseBinary) => write_dense_binary(path, d.objects()),
        (LoadedData::Histograms(d), DataFormat::DenseText | DataFormat::DenseBinary) => {
            let rows: Vec<Vec<f64>> = d.iter().map(|h| h.values().to_vec()).collect();
            if format == DataFormat::DenseText {
                write_dense_text(path, &rows)
            } else {
                write_dense_binary(path, &rows)
            }
        }
        (LoadedData::Sparse(d), DataFormat::SparseText) => write_sparse_text(path, d.objects()),
        (LoadedData::Sequences(d), DataFormat::StringLines) => write_string_lines(path, d.objects()),
        (LoadedData::Signatures(d), DataFormat::SignatureText) => write_signature_text(path, d.objects()),
        _ => Err(Error::invalid(format!("format {format} cannot hold this data"))),
    }
}
