//! Matrix and label file I/O.
//!
//! Data matrices follow the columns-as-samples convention: an `m x n` matrix
//! holds `n` samples living in `m`-dimensional ambient space. Two on-disk
//! formats are supported:
//!
//! * **CSV** — one matrix row per line, entries comma-separated.
//! * **MatrixMarket array** — the dense `%%MatrixMarket matrix array real
//!   general` format, values listed in column-major order.
//!
//! Values are written with the shortest decimal representation that parses
//! back to the identical `f64`, so a save/load round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense column-as-sample data matrix.
pub type DataMatrix = DMatrix<f64>;

/// On-disk matrix encodings understood by [`load_matrix`] / [`save_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    MatrixMarket,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "mm" | "matrixmarket" | "mtx" => Ok(MatrixFormat::MatrixMarket),
            other => Err(Error::Config(format!(
                "unknown matrix format {other:?} (expected \"csv\" or \"mm\")"
            ))),
        }
    }
}

/// Cluster assignments over `n` samples using consecutive ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    assignments: Vec<usize>,
    k: usize,
}

impl ClusterLabels {
    /// Wraps pre-normalized assignments. Every id must lie in `0..k`.
    pub fn new(assignments: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("label set must have k >= 1".into()));
        }
        if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
            return Err(Error::Config(format!(
                "label id {bad} out of range for k = {k}"
            )));
        }
        Ok(ClusterLabels { assignments, k })
    }

    /// Normalizes arbitrary integer labels to `0..k` in order of first
    /// appearance: the first distinct raw label becomes 0, the next 1, and
    /// so on. The induced partition is unchanged.
    pub fn from_raw(raw: &[i64]) -> Self {
        let mut order: Vec<i64> = Vec::new();
        let assignments = raw
            .iter()
            .map(|&r| match order.iter().position(|&seen| seen == r) {
                Some(idx) => idx,
                None => {
                    order.push(r);
                    order.len() - 1
                }
            })
            .collect();
        ClusterLabels {
            assignments,
            k: order.len().max(1),
        }
    }

    /// Number of labelled samples.
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Number of clusters `k`; all ids are `< k`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assignments
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn format_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Parses one finite `f64` token, rejecting `nan`/`inf` spellings.
fn parse_value(token: &str, path: &Path, line: usize) -> Result<f64> {
    let value: f64 = token
        .trim()
        .parse()
        .map_err(|_| format_err(path, line, format!("invalid number {token:?}")))?;
    if !value.is_finite() {
        return Err(format_err(
            path,
            line,
            format!("non-finite value {token:?}"),
        ));
    }
    Ok(value)
}

/// Loads a dense matrix from `path` in the given format.
///
/// Errors carry the offending 1-based line number. Ragged CSV rows, empty
/// files, and non-finite entries are all rejected.
pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    let text = read_to_string(path)?;
    match format {
        MatrixFormat::Csv => load_csv(path, &text),
        MatrixFormat::MatrixMarket => load_matrix_market(path, &text),
    }
}

fn load_csv(path: &Path, text: &str) -> Result<DataMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            // Only a trailing newline may leave an empty tail line.
            if text.lines().skip(idx + 1).any(|l| !l.trim().is_empty()) {
                return Err(format_err(path, lineno, "blank line inside matrix"));
            }
            break;
        }
        let row = line
            .split(',')
            .map(|tok| parse_value(tok, path, lineno))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(format_err(
                    path,
                    lineno,
                    format!(
                        "row has {} entries but row 1 has {}",
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format_err(path, 0, "empty matrix"));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

fn load_matrix_market(path: &Path, text: &str) -> Result<DataMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(path, 0, "empty matrix"))?;
    let header_fields: Vec<String> = header
        .split_whitespace()
        .map(|f| f.to_ascii_lowercase())
        .collect();
    let expected = ["%%matrixmarket", "matrix", "array", "real", "general"];
    if header_fields != expected {
        return Err(format_err(
            path,
            1,
            format!("unsupported MatrixMarket header {header:?} (expected \"%%MatrixMarket matrix array real general\")"),
        ));
    }

    // Skip comments, then read the "rows cols" size line.
    let mut size: Option<(usize, usize, usize)> = None;
    for (idx, line) in &mut lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(format_err(path, idx + 1, "expected size line \"rows cols\""));
        }
        let m: usize = fields[0]
            .parse()
            .map_err(|_| format_err(path, idx + 1, format!("invalid row count {:?}", fields[0])))?;
        let n: usize = fields[1]
            .parse()
            .map_err(|_| format_err(path, idx + 1, format!("invalid column count {:?}", fields[1])))?;
        if m == 0 || n == 0 {
            return Err(format_err(path, idx + 1, "matrix dimensions must be positive"));
        }
        size = Some((m, n, idx + 1));
        break;
    }
    let (m, n, _) = size.ok_or_else(|| format_err(path, 0, "missing size line"))?;

    // Entries in column-major order, one per line (extra whitespace tolerated).
    let mut values = Vec::with_capacity(m * n);
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        for tok in line.split_whitespace() {
            if values.len() == m * n {
                return Err(format_err(path, idx + 1, "more entries than rows*cols"));
            }
            values.push(parse_value(tok, path, idx + 1)?);
        }
    }
    if values.len() != m * n {
        return Err(format_err(
            path,
            0,
            format!("expected {} entries, found {}", m * n, values.len()),
        ));
    }
    Ok(DMatrix::from_column_slice(m, n, &values))
}

/// Shortest decimal that parses back to the same `f64` (`0` prints as "0").
fn fmt_value(v: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{v}");
    s
}

/// Writes `matrix` to `path` in the given format. Round trip is exact.
pub fn save_matrix(matrix: &DataMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::Dimension(
            "cannot save a matrix with a zero dimension".into(),
        ));
    }
    let mut out = String::new();
    match format {
        MatrixFormat::Csv => {
            for i in 0..matrix.nrows() {
                for j in 0..matrix.ncols() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push_str(&fmt_value(matrix[(i, j)]));
                }
                out.push('\n');
            }
        }
        MatrixFormat::MatrixMarket => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{} {}", matrix.nrows(), matrix.ncols());
            for j in 0..matrix.ncols() {
                for i in 0..matrix.nrows() {
                    let _ = writeln!(out, "{}", fmt_value(matrix[(i, j)]));
                }
            }
        }
    }
    write_string(path, &out)
}

/// Loads integer labels (one per line) and normalizes them via
/// [`ClusterLabels::from_raw`].
pub fn load_labels(path: &Path) -> Result<ClusterLabels> {
    let text = read_to_string(path)?;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            if text.lines().skip(idx + 1).any(|l| !l.trim().is_empty()) {
                return Err(format_err(path, lineno, "blank line inside label file"));
            }
            break;
        }
        let value: i64 = line
            .parse()
            .map_err(|_| format_err(path, lineno, format!("invalid label {line:?}")))?;
        raw.push(value);
    }
    if raw.is_empty() {
        return Err(format_err(path, 0, "empty label file"));
    }
    Ok(ClusterLabels::from_raw(&raw))
}

/// Writes labels one id per line.
pub fn save_labels(labels: &ClusterLabels, path: &Path) -> Result<()> {
    let mut out = String::new();
    for &a in labels.as_slice() {
        let _ = writeln!(out, "{a}");
    }
    write_string(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tmpfile(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn csv_round_trip_exact() {
        let dir = tempdir().unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 0.0, 3.25e-8]);
        let path = dir.path().join("m.csv");
        save_matrix(&m, &path, MatrixFormat::Csv).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("1.5,-2\n"), "unexpected encoding: {text:?}");
        assert!(text.contains("0,"), "integral zero must print as 0: {text:?}");
        let back = load_matrix(&path, MatrixFormat::Csv).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn matrix_market_round_trip_and_layout() {
        let dir = tempdir().unwrap();
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let path = dir.path().join("m.mtx");
        save_matrix(&m, &path, MatrixFormat::MatrixMarket).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix array real general");
        assert_eq!(lines[1], "2 3");
        // Column-major: (1,4), (2,5), (3,6).
        assert_eq!(&lines[2..], &["1", "4", "2", "5", "3", "6"]);
        let back = load_matrix(&path, MatrixFormat::MatrixMarket).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn matrix_market_comments_and_whitespace() {
        let dir = tempdir().unwrap();
        let path = tmpfile(
            &dir,
            "c.mtx",
            "%%MatrixMarket matrix array real general\n% a comment\n2 2\n1\n2\n3\n4\n",
        );
        let m = load_matrix(&path, MatrixFormat::MatrixMarket).unwrap();
        assert_eq!(m, DMatrix::from_column_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn matrix_market_rejects_bad_header_and_count() {
        let dir = tempdir().unwrap();
        let bad_header = tmpfile(&dir, "h.mtx", "%%MatrixMarket matrix coordinate real general\n2 2\n");
        assert!(matches!(
            load_matrix(&bad_header, MatrixFormat::MatrixMarket),
            Err(Error::Format { line: 1, .. })
        ));
        let short = tmpfile(
            &dir,
            "s.mtx",
            "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
        );
        assert!(matches!(
            load_matrix(&short, MatrixFormat::MatrixMarket),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn ragged_csv_reports_line() {
        let dir = tempdir().unwrap();
        let path = tmpfile(&dir, "r.csv", "1,2\n3\n");
        match load_csv(&path, &fs::read_to_string(&path).unwrap()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        let dir = tempdir().unwrap();
        for bad in ["nan", "inf", "-inf", "NaN"] {
            let path = tmpfile(&dir, "b.csv", &format!("1,{bad}\n"));
            assert!(
                load_matrix(&path, MatrixFormat::Csv).is_err(),
                "token {bad:?} must be rejected"
            );
        }
    }

    #[test]
    fn empty_matrix_rejected() {
        let dir = tempdir().unwrap();
        let path = tmpfile(&dir, "e.csv", "");
        assert!(load_matrix(&path, MatrixFormat::Csv).is_err());
    }

    #[test]
    fn labels_first_appearance_reindex() {
        let labels = ClusterLabels::from_raw(&[5, 5, 2, 7]);
        assert_eq!(labels.as_slice(), &[0, 0, 1, 2]);
        assert_eq!(labels.k(), 3);
    }

    #[test]
    fn labels_file_round_trip_preserves_partition() {
        let dir = tempdir().unwrap();
        let path = tmpfile(&dir, "l.txt", "9\n-3\n9\n0\n-3\n");
        let labels = load_labels(&path).unwrap();
        assert_eq!(labels.as_slice(), &[0, 1, 0, 2, 1]);
        assert_eq!(labels.k(), 3);
        let out = dir.path().join("l2.txt");
        save_labels(&labels, &out).unwrap();
        let again = load_labels(&out).unwrap();
        assert_eq!(labels, again);
    }

    #[test]
    fn labels_reject_junk() {
        let dir = tempdir().unwrap();
        let path = tmpfile(&dir, "bad.txt", "1\nx\n");
        assert!(matches!(
            load_labels(&path),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn cluster_labels_validation() {
        assert!(ClusterLabels::new(vec![0, 1, 2], 3).is_ok());
        assert!(ClusterLabels::new(vec![0, 3], 3).is_err());
        assert!(ClusterLabels::new(vec![], 0).is_err());
    }
}
