//! Per-ball scalar colorings (outcome / axis / year means and distance to
//! a reference subset) plus the value-to-color scale.

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::graph::BMGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Palette {
    RainbowRedToPurple,
}

/// Rainbow stops, low to high. The midpoint of the scale is the middle
/// stop (green).
const RAINBOW: [[u8; 3]; 7] = [
    [255, 0, 0],    // red
    [255, 165, 0],  // orange
    [255, 255, 0],  // yellow
    [0, 255, 0],    // green
    [0, 0, 255],    // blue
    [75, 0, 130],   // indigo
    [148, 0, 211],  // violet
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

/// One finite scalar per ball plus the value scale it is drawn on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coloring {
    pub values: Vec<f64>,
    pub label: String,
    pub v_min: f64,
    pub v_max: f64,
    pub palette: Palette,
}

impl Coloring {
    fn from_values(values: Vec<f64>, label: String) -> Coloring {
        let v_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let v_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Coloring {
            values,
            label,
            v_min,
            v_max,
            palette: Palette::RainbowRedToPurple,
        }
    }

    /// CSV with columns: ball, value, color.
    pub fn to_csv_string(&self) -> String {
        let colors = scale_to_palette(self);
        let mut out = String::from("ball,value,color\n");
        for (i, (v, c)) in self.values.iter().zip(&colors).enumerate() {
            out.push_str(&format!("{i},{v},{}\n", c.hex()));
        }
        out
    }
}

/// Which rows anchor a distance coloring.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    /// Rows whose numeric column value lies in [lo, hi].
    Range { column: String, lo: f64, hi: f64 },
    /// Explicit original row ids.
    Rows(Vec<usize>),
}

impl ReferenceSpec {
    /// Resolve to row positions in the cloud. Errors if nothing matches.
    pub fn select(&self, cloud: &PointCloud) -> Result<Vec<usize>> {
        let rows: Vec<usize> = match self {
            ReferenceSpec::Range { column, lo, hi } => {
                if lo > hi {
                    return Err(Error::BadRange { lo: *lo, hi: *hi });
                }
                let values = cloud.numeric_column(column)?;
                (0..cloud.n())
                    .filter(|&i| values[i] >= *lo && values[i] <= *hi)
                    .collect()
            }
            ReferenceSpec::Rows(ids) => (0..cloud.n())
                .filter(|&i| ids.contains(&cloud.row_ids()[i]))
                .collect(),
        };
        if rows.is_empty() {
            return Err(Error::EmptyReference);
        }
        Ok(rows)
    }
}

fn ball_means(graph: &BMGraph, values: &[f64]) -> Vec<f64> {
    graph
        .nodes
        .iter()
        .map(|node| {
            node.members.iter().map(|&p| values[p]).sum::<f64>() / node.members.len() as f64
        })
        .collect()
}

/// Color each ball by the mean of a numeric outcome column over its members.
pub fn color_by_outcome(graph: &BMGraph, cloud: &PointCloud, outcome_col: &str) -> Result<Coloring> {
    graph.check_cloud(cloud)?;
    let values = cloud.numeric_column(outcome_col)?;
    Ok(Coloring::from_values(
        ball_means(graph, &values),
        format!("outcome:{outcome_col}"),
    ))
}

/// Color each ball by the mean of one input axis over its members.
pub fn color_by_axis(graph: &BMGraph, cloud: &PointCloud, axis: &str) -> Result<Coloring> {
    graph.check_cloud(cloud)?;
    let idx = cloud.axis_index(axis)?;
    let values = cloud.axis_values(idx);
    Ok(Coloring::from_values(
        ball_means(graph, &values),
        format!("axis:{axis}"),
    ))
}

/// Color each ball by the average year of observation of its members.
pub fn color_by_year(graph: &BMGraph, cloud: &PointCloud, year_col: &str) -> Result<Coloring> {
    graph.check_cloud(cloud)?;
    let values = cloud.numeric_column(year_col)?;
    Ok(Coloring::from_values(
        ball_means(graph, &values),
        format!("year:{year_col}"),
    ))
}

/// Color each ball by the L1 distance between its axis-mean vector and the
/// centroid of the reference rows (per-axis mean over the selection).
pub fn color_by_distance(
    graph: &BMGraph,
    cloud: &PointCloud,
    reference: &ReferenceSpec,
) -> Result<Coloring> {
    graph.check_cloud(cloud)?;
    let rows = reference.select(cloud)?;
    let d = cloud.d();
    let mut centroid = vec![0.0; d];
    for &r in &rows {
        for (c, &x) in centroid.iter_mut().zip(cloud.row(r)) {
            *c += x;
        }
    }
    for c in &mut centroid {
        *c /= rows.len() as f64;
    }
    let values = graph
        .nodes
        .iter()
        .map(|node| {
            let k = node.members.len() as f64;
            (0..d)
                .map(|a| {
                    let mean = node.members.iter().map(|&p| cloud.row(p)[a]).sum::<f64>() / k;
                    (mean - centroid[a]).abs()
                })
                .sum()
        })
        .collect();
    Ok(Coloring::from_values(values, "distance".to_string()))
}

/// Linear map of the coloring values onto the rainbow scale. A constant
/// coloring maps every ball to the palette midpoint.
pub fn scale_to_palette(coloring: &Coloring) -> Vec<Rgb> {
    coloring
        .values
        .iter()
        .map(|&v| {
            let t = if coloring.v_max > coloring.v_min {
                (v - coloring.v_min) / (coloring.v_max - coloring.v_min)
            } else {
                0.5
            };
            palette_at(t.clamp(0.0, 1.0))
        })
        .collect()
}

fn palette_at(t: f64) -> Rgb {
    let pos = t * (RAINBOW.len() - 1) as f64;
    let i = (pos.floor() as usize).min(RAINBOW.len() - 2);
    let frac = pos - i as f64;
    let lerp = |a: u8, b: u8| -> u8 {
        (f64::from(a) + (f64::from(b) - f64::from(a)) * frac).round() as u8
    };
    Rgb {
        r: lerp(RAINBOW[i][0], RAINBOW[i + 1][0]),
        g: lerp(RAINBOW[i][1], RAINBOW[i + 1][1]),
        b: lerp(RAINBOW[i][2], RAINBOW[i + 1][2]),
    }
}
