//! Point set and sample ingestion and persistence.
//!
//! CSV: one point per row, one column per coordinate, optional header. A
//! header column named `weight` carries point weights. Lines starting with
//! `#` are ignored.
//!
//! JSON: `{"dim": d, "points": [[...], ...]}` or `{"matrix": [[...], ...]}`,
//! each with an optional `"weights"` array and, for points, `"metric"`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::measures::EmpiricalMeasure;
use crate::metric::{Metric, PointSet};

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PointsJson {
    Coords {
        dim: usize,
        points: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<Metric>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Matrix {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

/// Points with optional weights, as read from a file.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub points: PointSet,
    pub weights: Option<Vec<f64>>,
}

impl Loaded {
    pub fn measure(self) -> Result<EmpiricalMeasure> {
        match self.weights {
            Some(w) => EmpiricalMeasure::weighted(self.points, w),
            None => Ok(EmpiricalMeasure::uniform(self.points)),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads a CSV or JSON (by extension) point file. `metric` applies to
/// coordinate data unless the JSON names its own.
pub fn read_points(path: &Path, metric: Metric) -> Result<Loaded> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    if is_json(path) {
        parse_json(&text, metric)
    } else {
        parse_csv(&text, metric)
    }
}

pub fn parse_json(text: &str, metric: Metric) -> Result<Loaded> {
    let parsed: PointsJson = serde_json::from_str(text)?;
    Ok(match parsed {
        PointsJson::Coords {
            dim,
            points,
            metric: m,
            weights,
        } => Loaded {
            points: PointSet::from_coords(dim, points, m.unwrap_or(metric))?,
            weights,
        },
        PointsJson::Matrix { matrix, weights } => Loaded {
            points: PointSet::from_matrix(matrix)?,
            weights,
        },
    })
}

pub fn parse_csv(text: &str, metric: Metric) -> Result<Loaded> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return arg("point file has no rows");
    }
    let numeric = |r: &[String]| r.iter().all(|f| f.parse::<f64>().is_ok());
    let mut weight_col = None;
    if !numeric(&rows[0]) {
        let header = rows.remove(0);
        weight_col = header.iter().position(|h| h.eq_ignore_ascii_case("weight"));
    }
    if rows.is_empty() {
        return arg("point file has a header but no points");
    }
    let width = rows[0].len();
    let dim = width - weight_col.map_or(0, |_| 1);
    if dim == 0 {
        return arg("point file has no coordinate columns");
    }
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut weights = weight_col.map(|_| Vec::with_capacity(rows.len()));
    for (line, r) in rows.iter().enumerate() {
        if r.len() != width {
            return arg(format!("row {} has {} fields, expected {width}", line + 1, r.len()));
        }
        for (k, field) in r.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Argument(format!("row {}: bad number {field:?}", line + 1)))?;
            if Some(k) == weight_col {
                weights.as_mut().unwrap().push(v);
            } else {
                coords.push(v);
            }
        }
    }
    Ok(Loaded {
        points: PointSet::from_flat(dim, coords, metric)?,
        weights,
    })
}

/// Writes a sample as CSV with header `x0,...[,weight]`.
pub fn write_sample_csv(out: &mut dyn Write, mu: &EmpiricalMeasure) -> Result<()> {
    let s = mu.support();
    let d = s
        .dim()
        .ok_or_else(|| Error::Argument("matrix spaces have no coordinates to write".into()))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
    if !mu.is_uniform() {
        header.push("weight".into());
    }
    w.write_record(&header)?;
    for i in 0..s.len() {
        let mut row: Vec<String> = s.point(i).unwrap().iter().map(|x| format!("{x:?}")).collect();
        if !mu.is_uniform() {
            row.push(format!("{:?}", mu.weights()[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON form of a sample, in the same schema [`parse_json`] reads.
pub fn sample_json(mu: &EmpiricalMeasure) -> Result<serde_json::Value> {
    let s = mu.support();
    let weights = (!mu.is_uniform()).then(|| mu.weights().to_vec());
    let doc = match (s.dim(), s.metric()) {
        (Some(dim), Some(metric)) => PointsJson::Coords {
            dim,
            points: (0..s.len()).map(|i| s.point(i).unwrap().to_vec()).collect(),
            metric: Some(metric),
            weights,
        },
        _ => PointsJson::Matrix {
            matrix: s.matrix_rows().unwrap_or_default(),
            weights,
        },
    };
    Ok(serde_json::to_value(doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let a = parse_csv("0\n1\n2\n", Metric::Euclidean).unwrap();
        assert_eq!(a.points.len(), 3);
        assert!(a.weights.is_none());
        let b = parse_csv("# note\nx,y,weight\n0,0,0.25\n1,1,0.75\n", Metric::Euclidean).unwrap();
        assert_eq!(b.points.dim(), Some(2));
        assert_eq!(b.weights, Some(vec![0.25, 0.75]));
        assert!(parse_csv("0,1\n2\n", Metric::Euclidean).is_err());
        assert!(parse_csv("0\nabc\n", Metric::Euclidean).is_err());
    }

    #[test]
    fn json_forms() {
        let c = parse_json(r#"{"dim":2,"points":[[0,0],[3,4]]}"#, Metric::Euclidean).unwrap();
        assert_eq!(c.points.distance(0, 1).unwrap(), 5.0);
        let m = parse_json(r#"{"matrix":[[0,1],[1,0]],"weights":[0.5,0.5]}"#, Metric::Euclidean)
            .unwrap();
        assert_eq!(m.points.dim(), None);
        assert!(m.measure().is_ok());
        let bad = parse_json(r#"{"matrix":[[0,1],[2,0]]}"#, Metric::Euclidean);
        assert!(bad.is_err());
    }

    #[test]
    fn sample_round_trip() {
        let s = PointSet::from_coords(2, vec![vec![0.1, 0.2], vec![0.3, -1.0]], Metric::Chebyshev)
            .unwrap();
        let mu = EmpiricalMeasure::weighted(s, vec![0.4, 0.6]).unwrap();
        let mut buf = Vec::new();
        write_sample_csv(&mut buf, &mu).unwrap();
        let back = parse_csv(std::str::from_utf8(&buf).unwrap(), Metric::Chebyshev).unwrap();
        assert_eq!(back.weights, Some(vec![0.4, 0.6]));
        assert_eq!(back.points.point(1), Some(&[0.3, -1.0][..]));
        let j = sample_json(&mu).unwrap().to_string();
        let back = parse_json(&j, Metric::Euclidean).unwrap();
        assert_eq!(back.points.metric(), Some(Metric::Chebyshev));
    }
}
