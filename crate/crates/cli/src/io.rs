//! Dense CSV and sparse svmlight loaders.
//!
//! CSV files hold one observation per line with the response in the last
//! column. A first line that does not parse as numbers is treated as a header.
//! Svmlight lines read `label idx:val idx:val ...` with 1-based, strictly
//! increasing indices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sketchpcr::linalg::{DataMatrix, DenseMatrix, DenseVector, SparseMatrix};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    Ragged {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svmlight,
}

impl Format {
    /// `.csv` is dense; everything else is read as svmlight.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Svmlight,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LoadError + '_ {
    move |source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_field(path: &Path, line: usize, column: usize, text: &str) -> Result<f64, LoadError> {
    let value: f64 = text.trim().parse().map_err(|_| LoadError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: format!("not a number: {:?}", text.trim()),
    })?;
    if !value.is_finite() {
        return Err(LoadError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: format!("non-finite value {value}"),
        });
    }
    Ok(value)
}

/// Streaming reader over the numeric rows of a CSV file.
pub struct CsvRows {
    path: PathBuf,
    records: csv::StringRecordsIntoIter<File>,
    width: Option<usize>,
    first: bool,
}

impl CsvRows {
    pub fn open(path: &Path) -> Result<Self, LoadError> {
        let file = File::open(path).map_err(io_err(path))?;
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(file);
        Ok(Self {
            path: path.to_path_buf(),
            records: reader.into_records(),
            width: None,
            first: true,
        })
    }
}

impl Iterator for CsvRows {
    /// Features and response of one line.
    type Item = Result<(Vec<f64>, f64), LoadError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let record = match self.records.next()? {
                Ok(r) => r,
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    return Some(Err(LoadError::Parse {
                        path: self.path.clone(),
                        line,
                        column: 0,
                        message: e.to_string(),
                    }));
                }
            };
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let first = std::mem::replace(&mut self.first, false);
            if first && record.iter().any(|f| f.parse::<f64>().is_err()) {
                log::info!("{}: treating line {line} as a header", self.path.display());
                self.width = Some(record.len());
                continue;
            }
            let expected = *self.width.get_or_insert(record.len());
            if record.len() != expected {
                return Some(Err(LoadError::Ragged {
                    path: self.path.clone(),
                    line,
                    expected,
                    found: record.len(),
                }));
            }
            if expected < 2 {
                return Some(Err(LoadError::Invalid {
                    path: self.path.clone(),
                    message: "need at least one feature column and a response column".into(),
                }));
            }
            let mut values = Vec::with_capacity(expected);
            for (c, field) in record.iter().enumerate() {
                match parse_field(&self.path, line, c + 1, field) {
                    Ok(v) => values.push(v),
                    Err(e) => return Some(Err(e)),
                }
            }
            let b = values.pop().expect("width checked");
            return Some(Ok((values, b)));
        }
    }
}

/// Reads `(A, b)` from a dense CSV file.
pub fn load_dense_csv(path: &Path) -> Result<(DenseMatrix, DenseVector), LoadError> {
    let mut entries = Vec::new();
    let mut b = Vec::new();
    let mut d = 0;
    for row in CsvRows::open(path)? {
        let (features, response) = row?;
        d = features.len();
        entries.extend(features);
        b.push(response);
    }
    if b.is_empty() {
        return Err(LoadError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok((
        DenseMatrix::from_row_slice(b.len(), d, &entries),
        DenseVector::from_vec(b),
    ))
}

/// One parsed svmlight line: label and `(0-based column, value)` pairs.
pub type SvmRow = (f64, Vec<(usize, f64)>);

pub fn parse_svmlight_line(path: &Path, line_no: usize, line: &str) -> Result<Option<SvmRow>, LoadError> {
    let content = line.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let parse_err = |column: usize, message: String| LoadError::Parse {
        path: path.to_path_buf(),
        line: line_no,
        column,
        message,
    };
    let mut tokens = content.split_whitespace();
    let label = parse_field(path, line_no, 1, tokens.next().expect("nonempty line"))?;
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for (pos, token) in tokens.enumerate() {
        let column = pos + 2;
        let (idx, val) = token
            .split_once(':')
            .ok_or_else(|| parse_err(column, format!("malformed pair {token:?}")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(column, format!("malformed index {idx:?}")))?;
        if idx == 0 {
            return Err(parse_err(column, "indices are 1-based; found 0".into()));
        }
        if let Some(&(prev, _)) = pairs.last() {
            if idx - 1 <= prev {
                return Err(parse_err(column, format!("index {idx} does not increase")));
            }
        }
        pairs.push((idx - 1, parse_field(path, line_no, column, val)?));
    }
    Ok(Some((label, pairs)))
}

/// Streaming reader over svmlight rows.
pub struct SvmlightRows {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
}

impl SvmlightRows {
    pub fn open(path: &Path) -> Result<Self, LoadError> {
        let file = File::open(path).map_err(io_err(path))?;
        Ok(Self {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            line_no: 0,
        })
    }
}

impl Iterator for SvmlightRows {
    type Item = Result<SvmRow, LoadError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(io_err(&self.path)(e))),
            };
            self.line_no += 1;
            match parse_svmlight_line(&self.path, self.line_no, &line) {
                Ok(Some(row)) => return Some(Ok(row)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Reads a sparse `(A, b)`; with `center`, the response mean is subtracted.
pub fn load_svmlight(path: &Path, center: bool) -> Result<(SparseMatrix, DenseVector), LoadError> {
    let mut triplets = Vec::new();
    let mut b = Vec::new();
    let mut d = 0;
    for row in SvmlightRows::open(path)? {
        let (label, pairs) = row?;
        let i = b.len();
        for (j, v) in pairs {
            d = d.max(j + 1);
            triplets.push((i, j, v));
        }
        b.push(label);
    }
    if b.is_empty() {
        return Err(LoadError::Empty {
            path: path.to_path_buf(),
        });
    }
    let a = SparseMatrix::from_triplets(b.len(), d.max(1), triplets).map_err(|e| LoadError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut b = DenseVector::from_vec(b);
    if center {
        let mean = b.mean();
        b.add_scalar_mut(-mean);
    }
    Ok((a, b))
}

/// Writes `(A, b)` in svmlight format. Values use the shortest representation
/// that parses back to the same bits.
pub fn write_svmlight(path: &Path, a: &SparseMatrix, b: &DenseVector) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for i in 0..a.nrows() {
        write!(out, "{}", b[i])?;
        for (j, v) in a.row(i) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Loads a data file, choosing the format by extension.
pub fn load_data(path: &Path, center: bool) -> Result<(DataMatrix, DenseVector), LoadError> {
    match Format::from_path(path) {
        Format::Csv => {
            let (a, mut b) = load_dense_csv(path)?;
            if center {
                let mean = b.mean();
                b.add_scalar_mut(-mean);
            }
            Ok((DataMatrix::Dense(a), b))
        }
        Format::Svmlight => {
            let (a, b) = load_svmlight(path, center)?;
            Ok((DataMatrix::Sparse(a), b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_last_column_is_response() {
        let f = file_with("1,2,5\n0,1,3\n2,0,4\n", ".csv");
        let (a, b) = load_dense_csv(f.path()).unwrap();
        assert_eq!(a, DenseMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0]));
        assert_eq!(b.as_slice(), &[5.0, 3.0, 4.0]);
    }

    #[test]
    fn csv_header_skipped() {
        let f = file_with("x1,x2,y\n1,2,5\n", ".csv");
        let (a, b) = load_dense_csv(f.path()).unwrap();
        assert_eq!(a.shape(), (1, 2));
        assert_eq!(b[0], 5.0);
    }

    #[test]
    fn csv_errors_carry_positions() {
        assert!(matches!(
            load_dense_csv(file_with("", ".csv").path()),
            Err(LoadError::Empty { .. })
        ));
        let err = load_dense_csv(file_with("1,2,3\n4,NaN,6\n", ".csv").path()).unwrap_err();
        assert!(matches!(err, LoadError::Parse { line: 2, column: 2, .. }), "{err}");
        let err = load_dense_csv(file_with("1,2,3\n4,5\n", ".csv").path()).unwrap_err();
        assert!(
            matches!(
                err,
                LoadError::Ragged {
                    line: 2,
                    expected: 3,
                    found: 2,
                    ..
                }
            ),
            "{err}"
        );
        let err = load_dense_csv(file_with("1,2,3\n4,x,6\n", ".csv").path()).unwrap_err();
        assert!(matches!(err, LoadError::Parse { line: 2, column: 2, .. }), "{err}");
    }

    #[test]
    fn svmlight_example() {
        let f = file_with("1.5 1:2 3:4\n-0.5 2:1\n", ".svm");
        let (a, b) = load_svmlight(f.path(), false).unwrap();
        assert_eq!((a.nrows(), a.ncols(), a.nnz()), (2, 3, 3));
        assert_eq!(b.as_slice(), &[1.5, -0.5]);
        let dense = a.to_dense();
        assert_eq!(dense[(0, 2)], 4.0);
        assert_eq!(dense[(1, 1)], 1.0);
    }

    #[test]
    fn svmlight_rejections() {
        for bad in [
            "1 2:1 2:3\n",
            "1 3:1 2:3\n",
            "1 0:1\n",
            "1 1-2\n",
            "1 a:2\n",
            "1 1:inf\n",
        ] {
            assert!(load_svmlight(file_with(bad, ".svm").path(), false).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn svmlight_centering() {
        let f = file_with("1 1:1\n3 1:2\n", ".svm");
        let (_, b) = load_svmlight(f.path(), true).unwrap();
        assert_eq!(b.as_slice(), &[-1.0, 1.0]);
    }
}
