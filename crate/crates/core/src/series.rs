//! Time-series container, CSV ingestion and rolling-window construction.
//!
//! A [`Series`] stores `T` rows of `m` variables in row-major order, so every
//! window of consecutive rows is a contiguous slice of the backing buffer.
//! [`make_windows`] slides a fixed `(input_len, output_len)` frame over the
//! series and hands out borrowed [`SeriesView`]s; nothing is copied.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A length-`T`, `m`-variate real-valued sequence with a fixed sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    len: usize,
    dims: usize,
    name: String,
}

impl Series {
    /// Builds a series from row-major values.
    pub fn from_rows(values: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidSeries("series must have at least one variable".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidSeries("series must have at least one row".into()));
        }
        if !values.len().is_multiple_of(dims) {
            return Err(Error::InvalidSeries(format!(
                "{} values do not divide into rows of {} variables",
                values.len(),
                dims
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at row {}, column {}",
                pos / dims,
                pos % dims
            )));
        }
        Ok(Series {
            len: values.len() / dims,
            values,
            dims,
            name: String::new(),
        })
    }

    /// Builds a univariate series.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::from_rows(values, 1)
    }

    /// Builds a series from one vector per variable (all of equal length).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dims = columns.len();
        if dims == 0 {
            return Err(Error::InvalidSeries("no columns".into()));
        }
        let len = columns[0].len();
        if columns.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidSeries("columns differ in length".into()));
        }
        let mut values = Vec::with_capacity(len * dims);
        for row in 0..len {
            values.extend(columns.iter().map(|c| c[row]));
        }
        Self::from_rows(values, dims)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of rows `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of variables `m`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Row-major backing buffer.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, dim: usize) -> f64 {
        self.values[row * self.dims + dim]
    }

    /// Copies one variable out as a vector.
    pub fn column(&self, dim: usize) -> Vec<f64> {
        self.view().column(dim).collect()
    }

    pub fn view(&self) -> SeriesView<'_> {
        SeriesView {
            data: &self.values,
            rows: self.len,
            dims: self.dims,
        }
    }

    /// View of rows `[start, end)`.
    pub fn rows(&self, start: usize, end: usize) -> SeriesView<'_> {
        assert!(start <= end && end <= self.len, "row range out of bounds");
        SeriesView {
            data: &self.values[start * self.dims..end * self.dims],
            rows: end - start,
            dims: self.dims,
        }
    }

    /// Copies rows `[start, end)` into a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<Series> {
        Series::from_rows(self.rows(start, end).data.to_vec(), self.dims)
            .map(|s| s.with_name(self.name.clone()))
    }

    /// Applies `f` to every column independently and rebuilds the series.
    pub(crate) fn map_columns<F>(&self, mut f: F) -> Result<Series>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let columns: Vec<Vec<f64>> = (0..self.dims).map(|j| f(&self.column(j))).collect();
        Series::from_columns(&columns).map(|s| s.with_name(self.name.clone()))
    }
}

/// Read-only row-major view of `rows × dims` values.
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    data: &'a [f64],
    rows: usize,
    dims: usize,
}

impl<'a> SeriesView<'a> {
    /// Wraps a row-major slice. Panics if the length does not match.
    pub fn new(data: &'a [f64], rows: usize, dims: usize) -> Self {
        assert_eq!(data.len(), rows * dims, "view shape does not match data length");
        SeriesView { data, rows, dims }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn as_slice(&self) -> &'a [f64] {
        self.data
    }

    pub fn get(&self, row: usize, dim: usize) -> f64 {
        self.data[row * self.dims + dim]
    }

    pub fn row(&self, row: usize) -> &'a [f64] {
        &self.data[row * self.dims..(row + 1) * self.dims]
    }

    pub fn column(&self, dim: usize) -> impl Iterator<Item = f64> + Clone + 'a {
        assert!(dim < self.dims);
        self.data.iter().skip(dim).step_by(self.dims).copied()
    }
}

/// Input/output lengths and stride of the rolling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub input_len: usize,
    pub output_len: usize,
    pub stride: usize,
}

impl WindowSpec {
    pub fn new(input_len: usize, output_len: usize) -> Result<Self> {
        Self::with_stride(input_len, output_len, 1)
    }

    pub fn with_stride(input_len: usize, output_len: usize, stride: usize) -> Result<Self> {
        let spec = WindowSpec {
            input_len,
            output_len,
            stride,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_len < 2 || self.output_len < 2 {
            return Err(Error::InvalidWindowSpec(format!(
                "input_len and output_len must both be >= 2 (got {} and {})",
                self.input_len, self.output_len
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidWindowSpec("stride must be positive".into()));
        }
        Ok(())
    }

    /// `I + O`.
    pub fn span(&self) -> usize {
        self.input_len + self.output_len
    }

    /// Number of windows on a series of length `len`, or 0 if it is too short.
    pub fn count(&self, len: usize) -> usize {
        if len < self.span() {
            0
        } else {
            (len - self.span()) / self.stride + 1
        }
    }
}

/// One adjacent (input, output) pair with its prediction time.
#[derive(Debug, Clone, Copy)]
pub struct WindowPair<'a> {
    /// 0-based index of the first output row.
    pub t: usize,
    /// Rows `[t - I, t - 1]`.
    pub x: SeriesView<'a>,
    /// Rows `[t, t + O - 1]`.
    pub y: SeriesView<'a>,
    span: SeriesView<'a>,
}

impl<'a> WindowPair<'a> {
    /// Rows `[t - I, t + O - 1]` as one view.
    pub fn joined(&self) -> SeriesView<'a> {
        self.span
    }
}

/// All rolling windows of a series.
#[derive(Debug, Clone)]
pub struct WindowSet<'a> {
    series: &'a Series,
    spec: WindowSpec,
    count: usize,
}

impl<'a> WindowSet<'a> {
    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    pub fn series(&self) -> &'a Series {
        self.series
    }

    /// Number of windows `N`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn dims(&self) -> usize {
        self.series.dims()
    }

    /// Prediction time of window `i`.
    pub fn t(&self, i: usize) -> usize {
        self.spec.input_len + i * self.spec.stride
    }

    pub fn t_values(&self) -> Vec<usize> {
        (0..self.count).map(|i| self.t(i)).collect()
    }

    pub fn get(&self, i: usize) -> WindowPair<'a> {
        assert!(i < self.count, "window index {i} out of range");
        let t = self.t(i);
        WindowPair {
            t,
            x: self.series.rows(t - self.spec.input_len, t),
            y: self.series.rows(t, t + self.spec.output_len),
            span: self.series.rows(t - self.spec.input_len, t + self.spec.output_len),
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = WindowPair<'a>> + '_ {
        (0..self.count).map(move |i| self.get(i))
    }
}

/// Slides `spec` over `series`.
pub fn make_windows(series: &Series, spec: WindowSpec) -> Result<WindowSet<'_>> {
    spec.validate()?;
    if spec.span() > series.len() {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            input_len: spec.input_len,
            output_len: spec.output_len,
        });
    }
    Ok(WindowSet {
        series,
        spec,
        count: spec.count(series.len()),
    })
}

/// Per-dimension mean and unbiased (`k - 1`) sample variance.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

pub fn window_stats(slice: SeriesView<'_>) -> Result<WindowStats> {
    let k = slice.rows();
    if k < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: k });
    }
    let mut mean = Vec::with_capacity(slice.dims());
    let mut variance = Vec::with_capacity(slice.dims());
    for j in 0..slice.dims() {
        let (mu, var) = column_mean_var(slice.column(j), k);
        mean.push(mu);
        variance.push(var);
    }
    Ok(WindowStats { mean, variance })
}

/// Two-pass mean and unbiased variance of `k >= 2` values.
pub(crate) fn column_mean_var<I>(values: I, k: usize) -> (f64, f64)
where
    I: Iterator<Item = f64> + Clone,
{
    let n = k as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Reads a numeric CSV file.
///
/// Lines starting with `#` are comments. With `has_header`, the first row is a
/// header and a leading column named `timestamp` or `date` is dropped. Error
/// locations are 1-based file lines and 1-based columns.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Series> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut skip_first_col = false;
    let mut expected: Option<usize> = None;
    let mut values = Vec::new();
    let mut seen_header = !has_header;

    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            let first = record.get(0).unwrap_or("").to_ascii_lowercase();
            skip_first_col = first == "timestamp" || first == "date";
            let width = record.len() - usize::from(skip_first_col);
            if width == 0 {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    message: "header has no numeric columns".into(),
                });
            }
            expected = Some(width);
            continue;
        }
        let cells: Vec<&str> = record.iter().skip(usize::from(skip_first_col)).collect();
        match expected {
            None => expected = Some(cells.len()),
            Some(width) if width != cells.len() => {
                return Err(Error::RaggedRow {
                    path: path.to_path_buf(),
                    row: line,
                    expected: width,
                    found: cells.len(),
                })
            }
            _ => {}
        }
        for (c, cell) in cells.iter().enumerate() {
            let column = c + 1 + usize::from(skip_first_col);
            let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                path: path.to_path_buf(),
                row: line,
                column,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseCell {
                    path: path.to_path_buf(),
                    row: line,
                    column,
                    value: cell.to_string(),
                });
            }
            values.push(v);
        }
    }

    let dims = match expected {
        Some(d) if !values.is_empty() => d,
        _ => return Err(Error::EmptyFile { path: path.to_path_buf() }),
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Series::from_rows(values, dims)?.with_name(name))
}

/// Writes `series` as CSV with a `v1,...,vm` header, optionally preceded by a
/// `# ...` comment line.
pub fn write_csv(series: &Series, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        let header: Vec<String> = (1..=series.dims()).map(|j| format!("v{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in 0..series.len() {
            let cells: Vec<String> = series.view().row(row).iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}
