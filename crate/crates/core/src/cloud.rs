//! Point-cloud representation, CSV ingestion, and the data-preparation
//! steps used ahead of cover construction: range filtering, rolling
//! moments of a series, and min-max normalization of the axes.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-axis cell: numeric where it parses as a finite float, text otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Number(f64),
    Text(String),
}

impl MetaValue {
    pub fn parse(field: &str) -> MetaValue {
        match field.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => MetaValue::Number(v),
            _ => MetaValue::Text(field.to_string()),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            MetaValue::Number(v) => Some(*v),
            MetaValue::Text(_) => None,
        }
    }

    /// Total order used for per-ball min/max summaries: numbers by value,
    /// numbers before text, text lexicographic.
    pub fn order(&self, other: &MetaValue) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (MetaValue::Number(a), MetaValue::Number(b)) => {
                a.partial_cmp(b).unwrap_or(Ordering::Equal)
            }
            (MetaValue::Number(_), MetaValue::Text(_)) => Ordering::Less,
            (MetaValue::Text(_), MetaValue::Number(_)) => Ordering::Greater,
            (MetaValue::Text(a), MetaValue::Text(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for MetaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaValue::Number(v) => write!(f, "{v}"),
            MetaValue::Text(s) => write!(f, "{s}"),
        }
    }
}

/// A named column of non-axis values aligned to the cloud's rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaColumn {
    pub name: String,
    pub values: Vec<MetaValue>,
}

/// An immutable point cloud: `n` rows of `d` finite axis values plus
/// optional metadata columns. `row_ids` keep the original source row
/// indices so filtered clouds stay traceable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    axis_names: Vec<String>,
    points: Vec<f64>, // row-major, n * d
    n: usize,
    d: usize,
    meta: Vec<MetaColumn>,
    row_ids: Vec<usize>,
}

impl PointCloud {
    pub fn new(
        axis_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        meta: Vec<MetaColumn>,
        row_ids: Vec<usize>,
    ) -> Result<PointCloud> {
        let d = axis_names.len();
        let n = rows.len();
        if n == 0 || d == 0 {
            return Err(Error::EmptyCloud);
        }
        let mut seen = HashSet::new();
        for name in &axis_names {
            if name.is_empty() || !seen.insert(name.clone()) {
                return Err(Error::BadAxisName(name.clone()));
            }
        }
        if row_ids.len() != n || row_ids.iter().collect::<HashSet<_>>().len() != n {
            return Err(Error::EmptyCloud);
        }
        for col in &meta {
            if col.values.len() != n {
                return Err(Error::LengthMismatch(col.values.len(), n));
            }
        }
        let mut points = Vec::with_capacity(n * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::LengthMismatch(row.len(), d));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            points.extend_from_slice(row);
        }
        Ok(PointCloud {
            axis_names,
            points,
            n,
            d,
            meta,
            row_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn axis_names(&self) -> &[String] {
        &self.axis_names
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axis_names
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn axis_values(&self, axis: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.points[i * self.d + axis]).collect()
    }

    pub fn meta_columns(&self) -> &[MetaColumn] {
        &self.meta
    }

    pub fn meta_column(&self, name: &str) -> Option<&MetaColumn> {
        self.meta.iter().find(|c| c.name == name)
    }

    /// Resolve a column by name (axis first, then meta) into per-row floats.
    /// Meta columns must be numeric in every row.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        if let Ok(idx) = self.axis_index(name) {
            return Ok(self.axis_values(idx));
        }
        let col = self
            .meta_column(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        col.values
            .iter()
            .map(|v| v.as_number().ok_or_else(|| Error::NonNumericColumn(name.to_string())))
            .collect()
    }

    /// FNV-1a over the row ids and axis names. Identifies the cloud a graph
    /// was built from so downstream commands can refuse mismatched inputs.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(&(self.d as u64).to_le_bytes());
        for name in &self.axis_names {
            eat(&(name.len() as u64).to_le_bytes());
            eat(name.as_bytes());
        }
        eat(&(self.n as u64).to_le_bytes());
        for &id in &self.row_ids {
            eat(&(id as u64).to_le_bytes());
        }
        h
    }

    /// Cloud restricted to the rows at the given positions (not row ids),
    /// preserving original row ids. Used by filtering and group-by runs.
    pub fn select(&self, keep: &[usize]) -> Result<PointCloud> {
        if keep.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let rows: Vec<Vec<f64>> = keep.iter().map(|&i| self.row(i).to_vec()).collect();
        let meta = self
            .meta
            .iter()
            .map(|c| MetaColumn {
                name: c.name.clone(),
                values: keep.iter().map(|&i| c.values[i].clone()).collect(),
            })
            .collect();
        let row_ids = keep.iter().map(|&i| self.row_ids[i]).collect();
        PointCloud::new(self.axis_names.clone(), rows, meta, row_ids)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.axis_names.iter().map(String::as_str).collect();
        header.extend(self.meta.iter().map(|c| c.name.as_str()));
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.n {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            rec.extend(self.meta.iter().map(|c| c.values[i].to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

/// Audit trail for every preparation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepReport {
    pub rows_in: usize,
    pub rows_dropped_missing: usize,
    pub rows_dropped_filter: usize,
    pub rows_out: usize,
}

impl PrepReport {
    pub fn consistent(&self) -> bool {
        self.rows_in == self.rows_out + self.rows_dropped_missing + self.rows_dropped_filter
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Load a CSV file, keeping `axis_columns` as coordinates and
/// `meta_columns` as row metadata. Rows with a missing or non-numeric
/// axis value are dropped and counted.
pub fn load_csv(
    path: &Path,
    axis_columns: &[String],
    meta_columns: &[String],
) -> Result<(PointCloud, PrepReport)> {
    let file = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    load_csv_reader(file, axis_columns, meta_columns)
}

/// Same as [`load_csv`] but from any reader (used for in-memory input).
pub fn load_csv_reader<R: Read>(
    reader: R,
    axis_columns: &[String],
    meta_columns: &[String],
) -> Result<(PointCloud, PrepReport)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col_pos = |name: &String| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.clone()))
    };
    let axis_pos: Vec<usize> = axis_columns.iter().map(col_pos).collect::<Result<_>>()?;
    let meta_pos: Vec<usize> = meta_columns.iter().map(col_pos).collect::<Result<_>>()?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut meta_vals: Vec<Vec<MetaValue>> = vec![Vec::new(); meta_columns.len()];
    let mut row_ids: Vec<usize> = Vec::new();
    let mut rows_in = 0usize;
    let mut dropped = 0usize;

    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        rows_in += 1;
        let parsed: Vec<Option<f64>> = axis_pos
            .iter()
            .map(|&p| {
                record
                    .get(p)
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
            })
            .collect();
        if parsed.iter().any(Option::is_none) {
            dropped += 1;
            continue;
        }
        rows.push(parsed.into_iter().map(|v| v.unwrap()).collect());
        for (slot, &p) in meta_vals.iter_mut().zip(&meta_pos) {
            slot.push(MetaValue::parse(record.get(p).unwrap_or("")));
        }
        row_ids.push(idx);
    }

    if rows.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let meta = meta_columns
        .iter()
        .zip(meta_vals)
        .map(|(name, values)| MetaColumn {
            name: name.clone(),
            values,
        })
        .collect();
    let cloud = PointCloud::new(axis_columns.to_vec(), rows, meta, row_ids)?;
    let report = PrepReport {
        rows_in,
        rows_dropped_missing: dropped,
        rows_dropped_filter: 0,
        rows_out: cloud.n(),
    };
    Ok((cloud, report))
}

/// Keep rows with `lo <= value <= hi` in the named numeric column.
pub fn filter_range(
    cloud: &PointCloud,
    column: &str,
    lo: f64,
    hi: f64,
) -> Result<(PointCloud, PrepReport)> {
    if lo > hi {
        return Err(Error::BadRange { lo, hi });
    }
    let values = cloud.numeric_column(column)?;
    let keep: Vec<usize> = (0..cloud.n())
        .filter(|&i| values[i] >= lo && values[i] <= hi)
        .collect();
    let out = cloud.select(&keep)?;
    let report = PrepReport {
        rows_in: cloud.n(),
        rows_dropped_missing: 0,
        rows_dropped_filter: cloud.n() - out.n(),
        rows_out: out.n(),
    };
    Ok((out, report))
}

/// Mean, sample sd, and skewness of one window. Skewness is `None` for a
/// zero-variance window (undefined, not zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
    pub skewness: Option<f64>,
}

/// Statistics over every contiguous window of the series, one triple per
/// window, aligned to the window's last observation.
///
/// Mean is arithmetic; sd uses divisor `window - 1`; skewness is
/// `m3 / m2^(3/2)` with both central moments over divisor `window`.
pub fn rolling_moments(series: &[f64], window: usize) -> Result<Vec<Moments>> {
    if window < 2 {
        return Err(Error::BadWindow(window));
    }
    if series.len() < window {
        return Err(Error::ShortSeries {
            len: series.len(),
            window,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let w = window as f64;
    let out = series
        .windows(window)
        .map(|win| {
            let mean = win.iter().sum::<f64>() / w;
            let mut m2 = 0.0;
            let mut m3 = 0.0;
            for &x in win {
                let dx = x - mean;
                m2 += dx * dx;
                m3 += dx * dx * dx;
            }
            let sd = (m2 / (w - 1.0)).sqrt();
            m2 /= w;
            m3 /= w;
            let skewness = if m2 == 0.0 { None } else { Some(m3 / m2.powf(1.5)) };
            Moments { mean, sd, skewness }
        })
        .collect();
    Ok(out)
}

/// Per-axis extremes recorded by [`normalize_minmax`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisScale {
    pub axis: String,
    pub min: f64,
    pub max: f64,
}

/// Map every axis onto [0, 1] by `(x - min) / (max - min)`. Metadata is
/// untouched. Constant axes are rejected by name.
pub fn normalize_minmax(cloud: &PointCloud) -> Result<(PointCloud, Vec<AxisScale>)> {
    let mut scales = Vec::with_capacity(cloud.d());
    for a in 0..cloud.d() {
        let values = cloud.axis_values(a);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::ConstantAxis(cloud.axis_names()[a].clone()));
        }
        scales.push(AxisScale {
            axis: cloud.axis_names()[a].clone(),
            min,
            max,
        });
    }
    let rows: Vec<Vec<f64>> = (0..cloud.n())
        .map(|i| {
            cloud
                .row(i)
                .iter()
                .zip(&scales)
                .map(|(&x, s)| (x - s.min) / (s.max - s.min))
                .collect()
        })
        .collect();
    let out = PointCloud::new(
        cloud.axis_names().to_vec(),
        rows,
        cloud.meta_columns().to_vec(),
        cloud.row_ids().to_vec(),
    )?;
    Ok((out, scales))
}
