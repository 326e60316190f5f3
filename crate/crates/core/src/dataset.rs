use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// An n×p matrix of observations: rows are samples, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(values: Array2<f64>, column_names: Option<Vec<String>>) -> Result<Self> {
        let (n, p) = values.dim();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 2 rows, got {n}"
            )));
        }
        if p < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 2 columns, got {p}"
            )));
        }
        check_finite(&values)?;
        if let Some(names) = &column_names {
            if names.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: names.len(),
                });
            }
        }
        Ok(Self {
            values,
            column_names,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_parts(self) -> (Array2<f64>, Option<Vec<String>>) {
        (self.values, self.column_names)
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of variables.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    /// Columns copied into contiguous vectors.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.values
            .columns()
            .into_iter()
            .map(|c| c.to_vec())
            .collect()
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Header label for column `j`, falling back to its index.
    pub fn column_label(&self, j: usize) -> String {
        match &self.column_names {
            Some(names) => names[j].clone(),
            None => j.to_string(),
        }
    }

    /// Labels for every column, generated as `x0, x1, ...` when absent.
    pub fn labels_or_default(&self) -> Vec<String> {
        match &self.column_names {
            Some(names) => names.clone(),
            None => (0..self.p()).map(|j| format!("x{j}")).collect(),
        }
    }
}

fn check_finite(values: &Array2<f64>) -> Result<()> {
    for ((r, c), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {r}, column {c}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn validation() {
        assert!(Dataset::new(array![[1.0, 2.0]], None).is_err());
        assert!(Dataset::new(array![[1.0], [2.0]], None).is_err());
        assert!(Dataset::new(array![[1.0, f64::NAN], [2.0, 3.0]], None).is_err());
        assert!(Dataset::new(array![[1.0, 2.0], [2.0, 3.0]], Some(vec!["a".into()])).is_err());
        let d = Dataset::new(
            array![[1.0, 2.0], [2.0, 3.0], [0.0, 0.0]],
            Some(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.column_label(1), "b");
        assert_eq!(d.columns()[0], vec![1.0, 2.0, 0.0]);
    }
}
