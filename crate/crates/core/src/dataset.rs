//! In-memory labeled datasets and CSV ingestion.
//!
//! The CSV schema is deliberately small: a header row, numeric feature
//! columns, and the class label as the **last** column (non-negative
//! integer). Generated datasets export to the same schema, so everything the
//! CLI produces can be fed back in.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A labeled dataset with a fixed feature dimension.
///
/// Features are stored row-major in one flat buffer; records are addressed by
/// index everywhere (partitions are index sets), so subsetting is explicit
/// and cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u32>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset from a flat row-major feature buffer.
    pub fn from_parts(features: Vec<f64>, dim: usize, labels: Vec<u32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("feature dimension must be >= 1".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::LengthMismatch(format!(
                "feature buffer has {} values, expected {} records x {} features",
                features.len(),
                labels.len(),
                dim
            )));
        }
        Ok(Self { features, labels, dim })
    }

    /// Builds a dataset from per-record feature vectors.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<u32>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} feature rows vs {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows.first().map_or(1, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::LengthMismatch(format!(
                    "feature row of length {} in a dataset of dimension {}",
                    row.len(),
                    dim
                )));
            }
            features.extend_from_slice(row);
        }
        Self::from_parts(features, dim, labels)
    }

    /// Number of records.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Feature vector of record `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Label of record `i`.
    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    /// All labels in record order.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Sorted, de-duplicated class ids present in the dataset.
    pub fn class_set(&self) -> Vec<u32> {
        let mut classes = self.labels.clone();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// New dataset holding the records at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset { features, labels, dim: self.dim }
    }

    /// Reads the CSV schema (header row, numeric features, integer label in
    /// the last column).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let width = csv.headers()?.len();
        if width < 2 {
            return Err(Error::InvalidConfig(
                "CSV needs at least one feature column and a label column".into(),
            ));
        }
        let dim = width - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (line, record) in csv.records().enumerate() {
            let record = record?;
            if record.len() != width {
                return Err(Error::LengthMismatch(format!(
                    "record {} has {} fields, header has {}",
                    line + 1,
                    record.len(),
                    width
                )));
            }
            for field in record.iter().take(dim) {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "record {}: non-numeric feature value {:?}",
                        line + 1,
                        field
                    ))
                })?;
                features.push(v);
            }
            let label: u32 = record[dim].trim().parse().map_err(|_| {
                Error::InvalidConfig(format!(
                    "record {}: label {:?} is not a non-negative integer",
                    line + 1,
                    &record[dim]
                ))
            })?;
            labels.push(label);
        }
        Self::from_parts(features, dim, labels)
    }

    /// Reads a dataset from a CSV file path.
    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Writes the dataset in the same CSV schema (`x1..xd,label`).
    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.push("label".into());
        csv.write_record(&header)?;
        for i in 0..self.n() {
            let mut record: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            record.push(self.labels[i].to_string());
            csv.write_record(&record)?;
        }
        csv.flush()?;
        Ok(())
    }
}
