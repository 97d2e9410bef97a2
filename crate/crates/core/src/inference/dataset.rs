use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::SimplexPoint;

/// A bivariate sample on the simplex with the sufficient statistics of the
/// Dirichlet part of every log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset2D {
    points: Vec<SimplexPoint>,
    log_sums: [f64; 3],
    sum_x12: f64,
}

impl Dataset2D {
    pub fn new(points: Vec<SimplexPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("a dataset needs at least one observation"));
        }
        if let Some(i) = points.iter().position(|p| p.dim() != 2) {
            return Err(Error::domain(format!(
                "observation {} is not a bivariate point",
                i + 1
            )));
        }
        let mut log_sums = [0.0; 3];
        let mut sum_x12 = 0.0;
        for p in &points {
            let parts = p.parts();
            for (s, v) in log_sums.iter_mut().zip(&parts) {
                *s += v.ln();
            }
            sum_x12 += parts[0] + parts[1];
        }
        Ok(Dataset2D {
            points,
            log_sums,
            sum_x12,
        })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                SimplexPoint::bivariate(a, b).map_err(|e| Error::Parse {
                    row: i + 1,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset2D::new(points)
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ_i ln x_{ij}` for parts `j = 1, 2, 3`.
    pub fn log_sums(&self) -> [f64; 3] {
        self.log_sums
    }

    /// `Σ_i (x_{i1} + x_{i2})`.
    pub fn sum_x12(&self) -> f64 {
        self.sum_x12
    }
}

/// Records of a two-column numeric CSV with an optional header line and
/// `#` comments; each record carries its 1-based line number.
fn read_pairs(text: &str) -> Result<Vec<(usize, f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        let fields: Vec<&str> = rec.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 => out.push((line, v[0], v[1])),
            // a non-numeric first record is a header
            None if out.is_empty() && k == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    row: line,
                    msg: format!("expected two numeric columns, got {:?}", fields),
                })
            }
        }
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
        .read_to_string(&mut s)?;
    Ok(s)
}

/// Read simplex coordinates `(x1, x2)`. Points on or outside the boundary
/// are rejected with their line number rather than moved inside.
pub fn read_simplex_csv(path: impl AsRef<Path>) -> Result<Dataset2D> {
    parse_simplex_csv(&read_text(path.as_ref())?)
}

pub(crate) fn parse_simplex_csv(text: &str) -> Result<Dataset2D> {
    let points = read_pairs(text)?
        .into_iter()
        .map(|(line, a, b)| {
            SimplexPoint::bivariate(a, b).map_err(|e| Error::Parse {
                row: line,
                msg: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::EmptyAfterFilter { dropped: 0 });
    }
    Dataset2D::new(points)
}

/// Outcome of [`ingest_square_csv`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub data: Dataset2D,
    /// Points below or on the diagonal `x1 + x2 = 1`.
    pub dropped_lower: usize,
    /// Points on the outer edges of the square.
    pub dropped_boundary: usize,
}

/// Bounding box `# bbox xmin xmax ymin ymax` from a comment line.
fn bounding_box(text: &str) -> Result<Option<[f64; 4]>> {
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('#') else {
            continue;
        };
        let Some(nums) = rest.trim().strip_prefix("bbox") else {
            continue;
        };
        let v: Vec<f64> = nums
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                row: i + 1,
                msg: format!("bad bounding box: {e}"),
            })?;
        if v.len() != 4 || !(v[1] > v[0]) || !(v[3] > v[2]) {
            return Err(Error::Parse {
                row: i + 1,
                msg: "bounding box needs xmin xmax ymin ymax with positive extents".into(),
            });
        }
        return Ok(Some([v[0], v[1], v[2], v[3]]));
    }
    Ok(None)
}

/// Read points of the unit square (rescaled first when a bounding-box
/// comment is present). With `upper_triangle` set, only points strictly
/// above the diagonal are kept and mapped into the simplex by
/// `(x1, x2) -> (1 - x2, 1 - x1)`; otherwise the coordinates are taken as
/// simplex coordinates and every point outside the open simplex is dropped.
pub fn ingest_square_csv(path: impl AsRef<Path>, upper_triangle: bool) -> Result<Ingested> {
    ingest_square_text(&read_text(path.as_ref())?, upper_triangle)
}

pub(crate) fn ingest_square_text(text: &str, upper_triangle: bool) -> Result<Ingested> {
    let bbox = bounding_box(text)?;
    let mut points = Vec::new();
    let (mut dropped_lower, mut dropped_boundary) = (0, 0);
    for (line, a, b) in read_pairs(text)? {
        let (x, y) = match bbox {
            Some([x0, x1, y0, y1]) => ((a - x0) / (x1 - x0), (b - y0) / (y1 - y0)),
            None => (a, b),
        };
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::Parse {
                row: line,
                msg: format!("point ({a}, {b}) lies outside the unit square"),
            });
        }
        let mapped = if upper_triangle {
            if x + y <= 1.0 {
                dropped_lower += 1;
                continue;
            }
            (1.0 - y, 1.0 - x)
        } else {
            (x, y)
        };
        match SimplexPoint::bivariate(mapped.0, mapped.1) {
            Ok(p) => points.push(p),
            Err(_) if upper_triangle => dropped_boundary += 1,
            Err(_) => dropped_lower += 1,
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyAfterFilter {
            dropped: dropped_lower + dropped_boundary,
        });
    }
    Ok(Ingested {
        data: Dataset2D::new(points)?,
        dropped_lower,
        dropped_boundary,
    })
}
