//! The universal input: n observations of a scalar response and a p-vector
//! predictor, plus CSV ingestion for the command line.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// An immutable regression dataset. All entries are finite and `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vector,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::InsufficientData(
                "a dataset needs at least one observation".to_string(),
            ));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("predictor matrix".to_string()));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("response vector".to_string()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    /// Copy of the dataset with observation `i` removed.
    pub fn without_row(&self, i: usize) -> Dataset {
        let n = self.n();
        debug_assert!(i < n && n > 1);
        let keep: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let x = self.x.select_rows(keep.iter());
        let y = Vector::from_iterator(n - 1, keep.iter().map(|&r| self.y[r]));
        Dataset { x, y }
    }

    /// Load a dataset from a headered CSV file. The named response column is
    /// split off; every remaining column becomes a predictor, in file order.
    pub fn from_csv<P: AsRef<Path>>(path: P, response: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::FileNotFound {
            path: path.display().to_string(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::ParseError {
                row: 0,
                column: String::new(),
                message: e.to_string(),
            })?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        let resp_idx = headers
            .iter()
            .position(|h| h == response)
            .ok_or_else(|| Error::MissingResponse(response.to_string()))?;

        let mut y = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let row_no = r + 1;
            let record = record.map_err(|e| Error::ParseError {
                row: row_no,
                column: String::new(),
                message: e.to_string(),
            })?;
            if record.len() != headers.len() {
                return Err(Error::ParseError {
                    row: row_no,
                    column: String::new(),
                    message: format!(
                        "expected {} fields, found {}",
                        headers.len(),
                        record.len()
                    ),
                });
            }
            let mut row = Vec::with_capacity(headers.len() - 1);
            for (c, field) in record.iter().enumerate() {
                let value: f64 = match field.trim().parse() {
                    Ok(v) if f64::is_finite(v) => v,
                    _ => {
                        return Err(Error::NonNumericCell {
                            row: row_no,
                            column: headers[c].clone(),
                            value: field.trim().to_string(),
                        })
                    }
                };
                if c == resp_idx {
                    y.push(value);
                } else {
                    row.push(value);
                }
            }
            rows.push(row);
        }
        let n = rows.len();
        let p = headers.len() - 1;
        let x = Matrix::from_fn(n, p, |i, j| rows[i][j]);
        Dataset::new(x, Vector::from_vec(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!(
            "swar-dataset-test-{}-{}.csv",
            std::process::id(),
            content.len()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn parses_small_file() {
        let path = write_temp("y,x1,x2\n1.0,2.0,3.0\n4.0,5.0,6.0\n7.0,8.0,9.0\n");
        let data = Dataset::from_csv(&path, "y").unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.p(), 2);
        assert_eq!(data.y()[1], 4.0);
        assert_eq!(data.x()[(2, 1)], 9.0);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn response_column_can_sit_anywhere() {
        let path = write_temp("x1,y,x2\n2.0,1.0,3.0\n5.0,4.0,6.0\n");
        let data = Dataset::from_csv(&path, "y").unwrap();
        assert_eq!(data.y()[0], 1.0);
        assert_eq!(data.x()[(0, 0)], 2.0);
        assert_eq!(data.x()[(0, 1)], 3.0);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn nan_cell_is_rejected_with_coordinates() {
        let path = write_temp("y,x1\n1.0,2.0\n3.0,NaN\n");
        match Dataset::from_csv(&path, "y") {
            Err(Error::NonNumericCell { row, column, value }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "x1");
                assert_eq!(value, "NaN");
            }
            other => panic!("expected NonNumericCell, got {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn missing_response_and_missing_file() {
        let path = write_temp("a,b\n1,2\n");
        assert!(matches!(
            Dataset::from_csv(&path, "y"),
            Err(Error::MissingResponse(_))
        ));
        std::fs::remove_file(&path).ok();
        assert!(matches!(
            Dataset::from_csv("/no/such/file.csv", "y"),
            Err(Error::FileNotFound { .. })
        ));
    }

    #[test]
    fn ragged_row_is_a_parse_error() {
        let path = write_temp("y,x1,x2\n1.0,2.0,3.0\n4.0,5.0\n");
        assert!(matches!(
            Dataset::from_csv(&path, "y"),
            Err(Error::ParseError { row: 2, .. })
        ));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn bigmac_file_has_expected_shape() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/bigmac.csv");
        let data = Dataset::from_csv(path, "BigMac").unwrap();
        assert_eq!(data.n(), 45);
        assert_eq!(data.p(), 9);
    }

    #[test]
    fn without_row_drops_exactly_one() {
        let x = Matrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = Vector::from_vec(vec![10.0, 20.0, 30.0]);
        let data = Dataset::new(x, y).unwrap();
        let reduced = data.without_row(1);
        assert_eq!(reduced.n(), 2);
        assert_eq!(reduced.y()[0], 10.0);
        assert_eq!(reduced.y()[1], 30.0);
        assert_eq!(reduced.x()[(1, 0)], 3.0);
    }
}
