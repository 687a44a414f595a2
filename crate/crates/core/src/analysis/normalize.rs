use nalgebra::DMatrix;

use super::{AESRMatrix, AnalysisError};
use crate::acquisition::SessionRecord;

/// Divide every entry by the entry at `ref_index`.
pub fn normalize_spatial(row: &[f64], ref_index: usize) -> Result<Vec<f64>, AnalysisError> {
    if ref_index >= row.len() {
        return Err(AnalysisError::Parameter(format!("reference index {ref_index} out of range for {} APs", row.len())));
    }
    if let Some(v) = row.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(AnalysisError::Domain(format!("entry {v} is not finite and positive")));
    }
    let r = row[ref_index];
    Ok(row.iter().map(|v| v / r).collect())
}

/// Row-wise [`normalize_spatial`].
pub fn normalize_matrix_spatial(m: &AESRMatrix, ref_index: usize) -> Result<AESRMatrix, AnalysisError> {
    let mut rows = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        rows.push(normalize_spatial(&m.row(i), ref_index)?);
    }
    let values = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| rows[i][j]);
    AESRMatrix::with_columns(m.labels().to_vec(), m.columns().to_vec(), values)
}

/// Each period's AESR divided pointwise by period I.
pub fn normalize_temporal(session: &SessionRecord) -> Result<[Vec<f64>; 4], AnalysisError> {
    let base = &session.aesr[0];
    if let Some(v) = base.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(AnalysisError::Domain(format!("baseline entry {v} is not finite and positive")));
    }
    Ok(std::array::from_fn(|p| session.aesr[p].iter().zip(base).map(|(v, b)| v / b).collect()))
}
