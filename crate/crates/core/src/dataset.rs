use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, SmuError};

/// `n × d` observations in `(0, ∞)^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    dim: usize,
    pub seed: Option<u64>,
    pub label: String,
}

impl Dataset {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(SmuError::InvalidArgument("dataset dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(SmuError::InvalidArgument("dataset is empty".into()));
        }
        if !points.len().is_multiple_of(dim) {
            return Err(SmuError::InvalidArgument(format!(
                "{} values do not form rows of length {dim}",
                points.len()
            )));
        }
        if let Some((i, &v)) = points
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(SmuError::NonPositiveCoordinate {
                index: i % dim,
                value: v,
            });
        }
        Ok(Self {
            points,
            dim,
            seed: None,
            label: String::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(SmuError::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        Self::new(rows.concat(), dim)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.iter().map(move |p| p[j])
    }

    /// Scales coordinate `j` of every observation by `factor`.
    pub fn scale_dimension(&self, j: usize, factor: f64) -> Result<Self> {
        let mut points = self.points.clone();
        for row in points.chunks_exact_mut(self.dim) {
            row[j] *= factor;
        }
        let mut out = Self::new(points, self.dim)?;
        out.seed = self.seed;
        out.label = self.label.clone();
        Ok(out)
    }

    pub fn read_csv<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let parse_err = |line: usize, message: String| SmuError::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let headers = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        let dim = headers.len();
        for (j, h) in headers.iter().enumerate() {
            if h.trim() != format!("x{}", j + 1) {
                return Err(parse_err(
                    1,
                    format!("header field {} must be x{}, found {h:?}", j + 1, j + 1),
                ));
            }
        }
        let mut points = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| parse_err(line, e.to_string()))?;
            if record.len() != dim {
                return Err(parse_err(
                    line,
                    format!("expected {dim} fields, found {}", record.len()),
                ));
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line, format!("x{}: {field:?} is not a number", j + 1)))?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(parse_err(
                        line,
                        format!("x{}: {v} is not strictly positive", j + 1),
                    ));
                }
                points.push(v);
            }
        }
        if points.is_empty() {
            return Err(parse_err(1, "no observations".into()));
        }
        Ok(Self::new(points, dim)?.with_label(source_name))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, &path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
