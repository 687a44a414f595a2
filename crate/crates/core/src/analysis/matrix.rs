use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::AnalysisError;

/// M datasets × N APs of resistance values (Ω, or dimensionless after
/// normalization), one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct AESRMatrix {
    labels: Vec<String>,
    columns: Vec<String>,
    values: DMatrix<f64>,
}

impl AESRMatrix {
    /// Columns are named `AP1..APN`.
    pub fn new(labels: Vec<String>, values: DMatrix<f64>) -> Result<Self, AnalysisError> {
        let columns = (1..=values.ncols()).map(|j| format!("AP{j}")).collect();
        Self::with_columns(labels, columns, values)
    }

    pub fn with_columns(labels: Vec<String>, columns: Vec<String>, values: DMatrix<f64>) -> Result<Self, AnalysisError> {
        if labels.len() != values.nrows() {
            return Err(AnalysisError::Shape(format!("{} labels for {} rows", labels.len(), values.nrows())));
        }
        if columns.len() != values.ncols() {
            return Err(AnalysisError::Shape(format!("{} column names for {} columns", columns.len(), values.ncols())));
        }
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                let v = values[(i, j)];
                if !(v > 0.0 && v.is_finite()) {
                    return Err(AnalysisError::Domain(format!("row {} ({}) column {}: value {v} is not finite and positive", i + 1, labels[i], columns[j])));
                }
            }
        }
        Ok(Self { labels, columns, values })
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self, AnalysisError> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(AnalysisError::Shape(format!("row {} has {} values, expected {n}", i + 1, r.len())));
        }
        let values = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        Self::new(labels, values)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Keep only the rows whose index satisfies `keep`.
    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.nrows()).filter(|&i| keep(i)).collect();
        Self {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            columns: self.columns.clone(),
            values: DMatrix::from_fn(idx.len(), self.ncols(), |r, c| self.values[(idx[r], c)]),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, AnalysisError> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| AnalysisError::Csv { row: 0, message: e.to_string() })?.clone();
        if header.len() < 2 || &header[0] != "label" {
            return Err(AnalysisError::Csv { row: 0, message: "header must be `label,AP1,...,APN`".into() });
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| AnalysisError::Csv { row, message: e.to_string() })?;
            if rec.len() != columns.len() + 1 {
                return Err(AnalysisError::Csv {
                    row,
                    message: format!("expected {} fields, found {}", columns.len() + 1, rec.len()),
                });
            }
            labels.push(rec[0].to_string());
            for (j, cell) in rec.iter().skip(1).enumerate() {
                let v: f64 = cell.parse().map_err(|_| AnalysisError::Csv {
                    row,
                    message: format!("column {}: `{cell}` is not a number", columns[j]),
                })?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(AnalysisError::Csv { row, message: format!("column {}: value {v} must be finite and positive", columns[j]) });
                }
                data.push(v);
            }
        }
        if labels.is_empty() {
            return Err(AnalysisError::Csv { row: 0, message: "no data rows".into() });
        }
        let values = DMatrix::from_row_slice(labels.len(), columns.len(), &data);
        Self::with_columns(labels, columns, values)
    }

    pub fn load_csv(path: &Path) -> Result<Self, AnalysisError> {
        let file = std::fs::File::open(path).map_err(|e| AnalysisError::Io { path: path.display().to_string(), source: e })?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Dataset CSV; each entry of `comments` becomes a leading `# ` line.
    pub fn write_csv<W: Write>(&self, comments: &[String], mut w: W) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["label".to_string()];
        header.extend(self.columns.iter().cloned());
        wtr.write_record(&header)?;
        for i in 0..self.nrows() {
            let mut rec = vec![self.labels[i].clone()];
            rec.extend(self.values.row(i).iter().map(|v| format!("{v:?}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()
    }
}
