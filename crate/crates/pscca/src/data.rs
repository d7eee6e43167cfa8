//! Observed data container.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A pair of aligned count matrices, one per view, each `features x samples`.
///
/// Columns (samples) are aligned across the two views; rows are features.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDatasetPair {
    y: [DMatrix<u64>; 2],
    feature_names: [Option<Vec<String>>; 2],
    sample_ids: Option<Vec<String>>,
}

impl CountDatasetPair {
    pub fn new(y1: DMatrix<u64>, y2: DMatrix<u64>) -> Result<Self> {
        Self::with_labels(y1, y2, None, None, None)
    }

    pub fn with_labels(
        y1: DMatrix<u64>,
        y2: DMatrix<u64>,
        feature_names_1: Option<Vec<String>>,
        feature_names_2: Option<Vec<String>>,
        sample_ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if y1.ncols() != y2.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "views have {} and {} sample columns; they must be aligned",
                y1.ncols(),
                y2.ncols()
            )));
        }
        if y1.ncols() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {}",
                y1.ncols()
            )));
        }
        if y1.nrows() == 0 || y2.nrows() == 0 {
            return Err(Error::InvalidArgument("views must have at least one feature".into()));
        }
        for (names, d, which) in [
            (&feature_names_1, y1.nrows(), "view 1"),
            (&feature_names_2, y2.nrows(), "view 2"),
        ] {
            if let Some(n) = names {
                if n.len() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "{which} has {d} features but {} feature names",
                        n.len()
                    )));
                }
            }
        }
        if let Some(ids) = &sample_ids {
            if ids.len() != y1.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "{} sample ids for {} samples",
                    ids.len(),
                    y1.ncols()
                )));
            }
        }
        Ok(Self {
            y: [y1, y2],
            feature_names: [feature_names_1, feature_names_2],
            sample_ids,
        })
    }

    /// Count matrix of view `m` (0 or 1).
    pub fn y(&self, m: usize) -> &DMatrix<u64> {
        &self.y[m]
    }

    /// Number of features in view `m`.
    pub fn n_features(&self, m: usize) -> usize {
        self.y[m].nrows()
    }

    /// Number of aligned samples.
    pub fn n_samples(&self) -> usize {
        self.y[0].ncols()
    }

    pub fn feature_names(&self, m: usize) -> Option<&[String]> {
        self.feature_names[m].as_deref()
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    /// Counts of view `m` as an `f64` matrix.
    pub fn y_f64(&self, m: usize) -> DMatrix<f64> {
        self.y[m].map(|v| v as f64)
    }

    /// The same data with the two views swapped.
    pub fn swapped(&self) -> Self {
        Self {
            y: [self.y[1].clone(), self.y[0].clone()],
            feature_names: [self.feature_names[1].clone(), self.feature_names[0].clone()],
            sample_ids: self.sample_ids.clone(),
        }
    }
}
