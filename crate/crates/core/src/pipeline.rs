//! CSV ingestion and output, price-to-return preprocessing, standardization
//! and column selection.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use ndarray::{Array2, Axis};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A rectangular numeric table as read from CSV, before any domain checks.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub values: Array2<f64>,
    pub column_names: Option<Vec<String>>,
}

impl NumericTable {
    pub fn into_dataset(self) -> Result<Dataset> {
        Dataset::new(self.values, self.column_names)
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Keep the columns picked by `selection`, in request order.
    pub fn select(&self, selection: &ColumnSelection) -> Result<NumericTable> {
        let idx = selection.resolve(self.column_names.as_deref(), self.ncols())?;
        Ok(NumericTable {
            values: self.values.select(Axis(1), &idx),
            column_names: self
                .column_names
                .as_ref()
                .map(|n| idx.iter().map(|&i| n[i].clone()).collect()),
        })
    }
}

pub fn read_csv(path: impl AsRef<Path>, has_header: bool, delimiter: u8) -> Result<NumericTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, has_header, delimiter)
}

pub fn parse_csv<R: Read>(reader: R, has_header: bool, delimiter: u8) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let column_names = if has_header {
        let h = rdr.headers()?;
        if h.is_empty() || (h.len() == 1 && h[0].is_empty()) {
            return Err(empty_file());
        }
        Some(h.iter().map(str::to_owned).collect::<Vec<_>>())
    } else {
        None
    };

    let mut width = column_names.as_ref().map(Vec::len);
    let mut data = Vec::new();
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(rows as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: line,
                column: c + 1,
                message: if field.is_empty() {
                    "missing value".to_owned()
                } else {
                    format!("not a number: {field:?}")
                },
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            data.push(v);
        }
        rows += 1;
    }
    let width = match width {
        Some(w) if rows > 0 => w,
        _ => return Err(empty_file()),
    };
    let values = Array2::from_shape_vec((rows, width), data)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(NumericTable {
        values,
        column_names,
    })
}

fn empty_file() -> Error {
    Error::Parse {
        row: 1,
        column: 1,
        message: "empty file".to_owned(),
    }
}

/// 17 significant digits, '.' decimal separator; parses back to the same bits.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Full matrix, row-major, optional header line.
pub fn format_matrix_csv(m: &Array2<f64>, header: Option<&[String]>) -> String {
    let mut s = String::new();
    if let Some(h) = header {
        s.push_str(&h.join(","));
        s.push('\n');
    }
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                s.push(',');
            }
            first = false;
            let _ = write!(s, "{}", format_number(*v));
        }
        s.push('\n');
    }
    s
}

pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    m: &Array2<f64>,
    header: Option<&[String]>,
) -> Result<()> {
    write_text(path, &format_matrix_csv(m, header))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Strictly positive prices, `T ≥ 2` rows by `p` tickers.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    values: Array2<f64>,
    column_names: Option<Vec<String>>,
}

impl PriceTable {
    pub fn new(values: Array2<f64>, column_names: Option<Vec<String>>) -> Result<Self> {
        if values.nrows() < 2 || values.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "price table needs at least 2 rows and 1 column, got {}×{}",
                values.nrows(),
                values.ncols()
            )));
        }
        for ((r, c), &v) in values.indexed_iter() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "price at row {}, column {} is not a positive finite number: {v}",
                    r + 1,
                    c + 1
                )));
            }
        }
        if let Some(n) = &column_names {
            if n.len() != values.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: values.ncols(),
                    found: n.len(),
                });
            }
        }
        Ok(Self {
            values,
            column_names,
        })
    }

    pub fn from_table(t: NumericTable) -> Result<Self> {
        Self::new(t.values, t.column_names)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn time_points(&self) -> usize {
        self.values.nrows()
    }
}

/// `out[t][j] = ln(price[t+1][j] / price[t][j])`, `T − 1` rows.
pub fn log_ratio_transform(prices: &PriceTable) -> Result<Dataset> {
    let v = &prices.values;
    let t = v.nrows();
    let out = Array2::from_shape_fn((t - 1, v.ncols()), |(r, c)| {
        (v[[r + 1, c]] / v[[r, c]]).ln()
    });
    Dataset::new(out, prices.column_names.clone())
}

/// Mean 0, variance 1 per column (`n − 1` denominator).
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    let n = data.n() as f64;
    let mut values = data.values().to_owned();
    for (j, mut col) in values.columns_mut().into_iter().enumerate() {
        let mean = col.iter().sum::<f64>() / n;
        col.mapv_inplace(|v| v - mean);
        let var = col.iter().map(|v| v * v).sum::<f64>() / (n - 1.0);
        if !(var > 0.0) {
            return Err(Error::InvalidInput(format!(
                "column {} is constant; cannot standardize",
                data.column_label(j)
            )));
        }
        let sd = var.sqrt();
        col.mapv_inplace(|v| v / sd);
    }
    Dataset::new(values, data.column_names().map(<[String]>::to_vec))
}

/// Which columns to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelection {
    /// Half-open index range `start..end`.
    Range { start: usize, end: usize },
    /// Header names or 0-based indices, in the order given.
    List(Vec<String>),
}

impl ColumnSelection {
    /// `"START..END"` for a range, otherwise a comma-separated list.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some((a, b)) = spec.split_once("..") {
            let parse = |s: &str, default: Option<usize>| match (s.trim(), default) {
                ("", Some(d)) => Ok(d),
                (s, _) => s
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("bad column range {spec:?}"))),
            };
            let start = parse(a, Some(0))?;
            let end = parse(b, None)?;
            return Ok(ColumnSelection::Range { start, end });
        }
        let items: Vec<String> = spec
            .split(',')
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty())
            .collect();
        Ok(ColumnSelection::List(items))
    }

    pub fn first(k: usize) -> Self {
        ColumnSelection::Range { start: 0, end: k }
    }

    pub fn resolve(&self, names: Option<&[String]>, p: usize) -> Result<Vec<usize>> {
        let idx: Vec<usize> = match self {
            ColumnSelection::Range { start, end } => {
                if start > end || *end > p {
                    return Err(Error::InvalidParameter(format!(
                        "column range {start}..{end} out of bounds for {p} columns"
                    )));
                }
                (*start..*end).collect()
            }
            ColumnSelection::List(items) => items
                .iter()
                .map(|item| {
                    if let Some(pos) = names.and_then(|n| n.iter().position(|x| x == item)) {
                        return Ok(pos);
                    }
                    match item.parse::<usize>() {
                        Ok(i) if i < p => Ok(i),
                        _ => Err(Error::InvalidParameter(format!("unknown column {item:?}"))),
                    }
                })
                .collect::<Result<_>>()?,
        };
        if idx.is_empty() {
            return Err(Error::InvalidParameter("empty column selection".into()));
        }
        Ok(idx)
    }
}

pub fn select_columns(data: &Dataset, selection: &ColumnSelection) -> Result<Dataset> {
    let idx = selection.resolve(data.column_names(), data.p())?;
    let values = data.values().select(Axis(1), &idx);
    let names = data
        .column_names()
        .map(|n| idx.iter().map(|&i| n[i].clone()).collect());
    Dataset::new(values, names)
}
