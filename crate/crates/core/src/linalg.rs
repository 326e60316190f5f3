//! Dense LU factorization with partial pivoting, used for inversion and
//! log-determinants of p×p correlation-type matrices.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};

/// Pivots smaller than this, relative to the largest diagonal magnitude of
/// the input, mark the matrix as numerically singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Determinants below this magnitude are reported as singular.
pub const DET_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct Lu {
    factors: Array2<f64>,
    perm: Vec<usize>,
    sign: f64,
    smallest_pivot: f64,
    scale: f64,
    complete: bool,
}

impl Lu {
    /// Factor `PA = LU`. Stops early if a column has no nonzero pivot; the
    /// result then reports itself as singular.
    pub fn factor(m: &Array2<f64>) -> Result<Self> {
        let n = square_dim(m)?;
        if n == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if let Some(i) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let mut a = m.to_owned();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut smallest_pivot = f64::INFINITY;
        let scale = {
            let d = (0..n).map(|i| m[[i, i]].abs()).fold(0.0, f64::max);
            if d > 0.0 {
                d
            } else {
                m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
            }
        };
        let mut complete = true;

        for col in 0..n {
            let (pivot_row, pivot_abs) =
                (col..n)
                    .map(|r| (r, a[[r, col]].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            smallest_pivot = smallest_pivot.min(pivot_abs);
            if pivot_abs == 0.0 {
                complete = false;
                break;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap([col, j], [pivot_row, j]);
                }
                perm.swap(col, pivot_row);
                sign = -sign;
            }
            let pivot = a[[col, col]];
            for r in (col + 1)..n {
                let factor = a[[r, col]] / pivot;
                a[[r, col]] = factor;
                if factor != 0.0 {
                    for j in (col + 1)..n {
                        a[[r, j]] -= factor * a[[col, j]];
                    }
                }
            }
        }

        Ok(Self {
            factors: a,
            perm,
            sign,
            smallest_pivot,
            scale,
            complete,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Smallest absolute pivot encountered.
    pub fn smallest_pivot(&self) -> f64 {
        self.smallest_pivot
    }

    pub fn is_singular(&self) -> bool {
        !self.complete || self.smallest_pivot < PIVOT_TOLERANCE * self.scale
    }

    pub fn log_det(&self) -> LogDet {
        if self.is_singular() {
            return LogDet::Singular;
        }
        let n = self.dim();
        let mut ln_abs = 0.0;
        let mut negative = self.sign < 0.0;
        for i in 0..n {
            let u = self.factors[[i, i]];
            ln_abs += u.abs().ln();
            if u < 0.0 {
                negative = !negative;
            }
        }
        if ln_abs < DET_FLOOR.ln() {
            LogDet::Singular
        } else {
            LogDet::Finite {
                value: ln_abs,
                negative,
            }
        }
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        let permuted: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.factors[[i, j]] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.factors[[i, j]] * b[j];
            }
            b[i] = s / self.factors[[i, i]];
        }
    }

    /// Inverse of the factored matrix, or `None` when it is numerically singular.
    pub fn inverse(&self) -> Option<Array2<f64>> {
        if self.is_singular() {
            return None;
        }
        let n = self.dim();
        let mut inv = Array2::zeros((n, n));
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[[i, j]] = col[i];
            }
        }
        Some(inv)
    }
}

/// Natural log of |det|, or the negative-infinity marker for a numerically
/// singular matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LogDet {
    Finite { value: f64, negative: bool },
    Singular,
}

impl LogDet {
    /// `ln|det|`, with `-inf` standing in for the singular marker.
    pub fn value(&self) -> f64 {
        match *self {
            LogDet::Finite { value, .. } => value,
            LogDet::Singular => f64::NEG_INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            LogDet::Finite { value, .. } => Some(value),
            LogDet::Singular => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, LogDet::Singular)
    }
}

pub fn log_det(m: &Array2<f64>) -> Result<LogDet> {
    Ok(Lu::factor(m)?.log_det())
}

pub(crate) fn square_dim(m: &Array2<f64>) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: c,
        });
    }
    Ok(r)
}
