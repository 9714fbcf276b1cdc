//! CSV ingestion: climate series, material curves and surfaces.
//!
//! All tables are comma-separated. A first row that does not parse as
//! numbers is taken as a header and skipped (curves and climate files);
//! surfaces always carry a header row of θ breakpoints.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::assembly::{SeriesError, TimeSeries};
use crate::materials::{MaterialError, MonotoneCurve, Surface2};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: expected {expected} columns, found {found}")]
    BadColumnCount {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: time must be strictly increasing")]
    NonMonotoneTime { path: PathBuf, line: usize },
    #[error("{path}: {source}")]
    Material {
        path: PathBuf,
        source: MaterialError,
    },
}

/// Non-empty rows as trimmed cells with 1-based line numbers.
fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => TableError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => TableError::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: format!("{other:?}"),
            },
        })?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| TableError::Malformed {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let cells: Vec<String> = rec.iter().map(str::to_owned).collect();
        if cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push((line, cells));
    }
    Ok(rows)
}

fn numbers(cells: &[String]) -> Option<Vec<f64>> {
    cells.iter().map(|c| c.parse::<f64>().ok()).collect()
}

/// Numeric rows with exactly `width` columns; a leading non-numeric row is
/// treated as a header.
fn numeric_table(path: &Path, width: usize) -> Result<Vec<(usize, Vec<f64>)>, TableError> {
    let rows = read_rows(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (k, (line, cells)) in rows.into_iter().enumerate() {
        if cells.len() != width {
            return Err(TableError::BadColumnCount {
                path: path.to_path_buf(),
                line,
                expected: width,
                found: cells.len(),
            });
        }
        match numbers(&cells) {
            Some(v) => out.push((line, v)),
            None if k == 0 => {}
            None => {
                return Err(TableError::Malformed {
                    path: path.to_path_buf(),
                    line,
                    message: "non-numeric cell".into(),
                })
            }
        }
    }
    Ok(out)
}

/// Climate file with columns `t_s, sigma1, sigma2` (s, K, –).
pub fn load_climate_csv(path: &Path) -> Result<TimeSeries, TableError> {
    let rows = numeric_table(path, 3)?;
    if rows.is_empty() {
        return Err(TableError::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: "no data rows".into(),
        });
    }
    let lines: Vec<usize> = rows.iter().map(|r| r.0).collect();
    TimeSeries::new(rows.into_iter().map(|(_, v)| (v[0], [v[1], v[2]])).collect()).map_err(
        |e| match e {
            SeriesError::NonMonotoneTime { row } => TableError::NonMonotoneTime {
                path: path.to_path_buf(),
                line: lines[row],
            },
            SeriesError::NonFinite { row } => TableError::Malformed {
                path: path.to_path_buf(),
                line: lines[row],
                message: "non-finite value".into(),
            },
            SeriesError::Empty => TableError::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: "no data rows".into(),
            },
        },
    )
}

/// Two-column curve table `x, y`.
pub fn load_curve_csv(path: &Path) -> Result<MonotoneCurve, TableError> {
    let rows = numeric_table(path, 2)?;
    let pts: Vec<(f64, f64)> = rows.into_iter().map(|(_, v)| (v[0], v[1])).collect();
    MonotoneCurve::new(&pts).map_err(|source| TableError::Material {
        path: path.to_path_buf(),
        source,
    })
}

/// Surface table: the header row holds a corner label followed by the θ
/// breakpoints; every further row starts with an m breakpoint.
pub fn load_surface_csv(path: &Path) -> Result<Surface2, TableError> {
    let rows = read_rows(path)?;
    let Some((hline, header)) = rows.first() else {
        return Err(TableError::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: "empty surface table".into(),
        });
    };
    let theta = numbers(&header[1..]).ok_or_else(|| TableError::Malformed {
        path: path.to_path_buf(),
        line: *hline,
        message: "header must list numeric temperature breakpoints".into(),
    })?;
    let width = header.len();
    let mut m_axis = Vec::new();
    let mut values = Vec::new();
    for (line, cells) in &rows[1..] {
        if cells.len() != width {
            return Err(TableError::BadColumnCount {
                path: path.to_path_buf(),
                line: *line,
                expected: width,
                found: cells.len(),
            });
        }
        let v = numbers(cells).ok_or_else(|| TableError::Malformed {
            path: path.to_path_buf(),
            line: *line,
            message: "non-numeric cell".into(),
        })?;
        m_axis.push(v[0]);
        values.extend_from_slice(&v[1..]);
    }
    Surface2::new(m_axis, theta, values).map_err(|source| TableError::Material {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn climate_two_rows_interpolate() {
        let f = file("t_s,sigma1,sigma2\n0,293.15,0.5\n3600,283.15,0.8\n");
        let s = load_climate_csv(f.path()).unwrap();
        assert_eq!(s.len(), 2);
        let v = s.at(1800.0);
        assert!((v[0] - 288.15).abs() < 1e-12 && (v[1] - 0.65).abs() < 1e-12);
    }

    #[test]
    fn climate_single_row_is_constant() {
        let f = file("0,290,0.4\n");
        let s = load_climate_csv(f.path()).unwrap();
        assert_eq!(s.at(-10.0), [290.0, 0.4]);
        assert_eq!(s.at(1e9), [290.0, 0.4]);
    }

    #[test]
    fn climate_errors() {
        let f = file("0,290,0.4\n0,291,0.5\n");
        assert!(matches!(
            load_climate_csv(f.path()),
            Err(TableError::NonMonotoneTime { line: 2, .. })
        ));
        let f = file("0,290\n");
        assert!(matches!(
            load_climate_csv(f.path()),
            Err(TableError::BadColumnCount { found: 2, .. })
        ));
    }

    #[test]
    fn curve_and_surface() {
        let f = file("x,y\n0,0\n0.5,1\n1,3\n");
        let c = load_curve_csv(f.path()).unwrap();
        assert_eq!(c.eval(0.5), Some(1.0));
        let s = file("m\\theta,270,310\n0,1,2\n1,3,4\n");
        let s = load_surface_csv(s.path()).unwrap();
        assert_eq!(s.eval(1.0, 310.0), Some(4.0));
        assert!((s.eval(0.5, 290.0).unwrap() - 2.5).abs() < 1e-12);
    }
}
