//! The ball-intersection graph: one vertex per ball, one edge per pair of
//! balls that share at least one point. Also the per-ball summary table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cloud::{MetaValue, PointCloud};
use crate::error::{Error, Result};
use crate::net::{BallCover, Metric};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallNode {
    pub id: usize,
    pub center_row: usize,
    pub members: Vec<usize>,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallEdge {
    pub a: usize,
    pub b: usize,
    /// Number of points in both balls; always at least 1.
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BMGraph {
    pub epsilon: f64,
    pub metric: Metric,
    pub axis_names: Vec<String>,
    pub cloud_hash: u64,
    pub nodes: Vec<BallNode>,
    pub edges: Vec<BallEdge>,
}

impl BMGraph {
    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }

    /// Refuse to pair this graph with a cloud it was not built from.
    pub fn check_cloud(&self, cloud: &PointCloud) -> Result<()> {
        if self.cloud_hash != cloud.content_hash() {
            return Err(Error::GraphCloudMismatch);
        }
        Ok(())
    }
}

/// Build the graph from a cover: for every point, every pair of balls in
/// its membership list gets an edge, counted once per shared point.
pub fn build_graph(cover: &BallCover) -> BMGraph {
    let nodes = cover
        .centers
        .iter()
        .zip(&cover.members)
        .enumerate()
        .map(|(id, (&center_row, members))| BallNode {
            id,
            center_row,
            members: members.clone(),
            count: members.len(),
        })
        .collect();

    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for balls in &cover.membership {
        for (i, &a) in balls.iter().enumerate() {
            for &b in &balls[i + 1..] {
                *shared.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    let edges = shared
        .into_iter()
        .map(|((a, b), shared)| BallEdge { a, b, shared })
        .collect();

    BMGraph {
        epsilon: cover.epsilon,
        metric: cover.metric,
        axis_names: cover.axis_names.clone(),
        cloud_hash: cover.cloud_hash,
        nodes,
        edges,
    }
}

/// Balls with no edge at all: their members are farther than the cover
/// allows from every other ball's members.
pub fn list_outliers(graph: &BMGraph) -> Vec<usize> {
    graph
        .degrees()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(id, _)| id)
        .collect()
}

/// Connected components of the ball graph, each sorted ascending, ordered
/// by smallest member id.
pub fn connected_components(graph: &BMGraph) -> Vec<Vec<usize>> {
    let n = graph.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &graph.edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    // Scanning from vertex 0 upward already yields components ordered by
    // their smallest member.
    components
}

/// One row of the per-ball summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSummaryRow {
    pub ball: usize,
    pub axis_means: Vec<f64>,
    /// (min, max) per requested meta column.
    pub meta_ranges: Vec<(MetaValue, MetaValue)>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSummary {
    pub axis_names: Vec<String>,
    pub meta_cols: Vec<String>,
    pub rows: Vec<BallSummaryRow>,
}

impl BallSummary {
    /// CSV with columns: ball, one mean per axis, min/max per meta column, n.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["ball".to_string()];
        header.extend(self.axis_names.iter().cloned());
        for m in &self.meta_cols {
            header.push(format!("{m}_min"));
            header.push(format!("{m}_max"));
        }
        header.push("n".to_string());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.ball.to_string()];
            rec.extend(row.axis_means.iter().map(|v| v.to_string()));
            for (lo, hi) in &row.meta_ranges {
                rec.push(lo.to_string());
                rec.push(hi.to_string());
            }
            rec.push(row.count.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }
}

/// Per-ball axis means plus min/max of the requested meta columns.
pub fn ball_summary(
    graph: &BMGraph,
    cloud: &PointCloud,
    meta_cols: &[String],
) -> Result<BallSummary> {
    graph.check_cloud(cloud)?;
    let meta: Vec<&crate::cloud::MetaColumn> = meta_cols
        .iter()
        .map(|name| {
            cloud
                .meta_column(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))
        })
        .collect::<Result<_>>()?;

    let rows = graph
        .nodes
        .iter()
        .map(|node| {
            let count = node.members.len();
            let mut axis_means = vec![0.0; cloud.d()];
            for &p in &node.members {
                for (mean, &x) in axis_means.iter_mut().zip(cloud.row(p)) {
                    *mean += x;
                }
            }
            for mean in &mut axis_means {
                *mean /= count as f64;
            }
            let meta_ranges = meta
                .iter()
                .map(|col| {
                    let mut lo = col.values[node.members[0]].clone();
                    let mut hi = lo.clone();
                    for &p in &node.members[1..] {
                        let v = &col.values[p];
                        if v.order(&lo).is_lt() {
                            lo = v.clone();
                        }
                        if v.order(&hi).is_gt() {
                            hi = v.clone();
                        }
                    }
                    (lo, hi)
                })
                .collect();
            BallSummaryRow {
                ball: node.id,
                axis_means,
                meta_ranges,
                count,
            }
        })
        .collect();

    Ok(BallSummary {
        axis_names: cloud.axis_names().to_vec(),
        meta_cols: meta_cols.to_vec(),
        rows,
    })
}

// --- JSON wire format -------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphJson {
    meta: GraphMetaJson,
    nodes: Vec<BallNode>,
    edges: Vec<BallEdge>,
}

#[derive(Serialize, Deserialize)]
struct GraphMetaJson {
    epsilon: f64,
    metric: String,
    axes: Vec<String>,
    cloud_hash: String,
}

impl BMGraph {
    /// Serialize with nodes ascending by id and edges ascending by (a, b).
    pub fn to_json_string(&self) -> String {
        let doc = GraphJson {
            meta: GraphMetaJson {
                epsilon: self.epsilon,
                metric: self.metric.name().to_string(),
                axes: self.axis_names.clone(),
                cloud_hash: format!("{:016x}", self.cloud_hash),
            },
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<BMGraph> {
        let doc: GraphJson =
            serde_json::from_str(s).map_err(|e| Error::BadGraphFile(e.to_string()))?;
        let metric = Metric::parse(&doc.meta.metric)?;
        let cloud_hash = u64::from_str_radix(&doc.meta.cloud_hash, 16)
            .map_err(|_| Error::BadGraphFile("bad cloud_hash".to_string()))?;
        Ok(BMGraph {
            epsilon: doc.meta.epsilon,
            metric,
            axis_names: doc.meta.axes,
            cloud_hash,
            nodes: doc.nodes,
            edges: doc.edges,
        })
    }
}
