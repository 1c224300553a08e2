//! Implementations of the map / sweep / color / stats / prep / synth
//! subcommands. All file output is atomic; all randomness is seeded.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ballmapper::cloud::{
    load_csv, normalize_minmax, rolling_moments, MetaColumn, MetaValue, PointCloud, PrepReport,
};
use ballmapper::color::{
    color_by_axis, color_by_distance, color_by_outcome, color_by_year, Coloring, ReferenceSpec,
};
use ballmapper::graph::{ball_summary, build_graph, connected_components, list_outliers, BMGraph};
use ballmapper::net::{greedy_net, Metric, NetPolicy, PickOrder};
use ballmapper::render::{export_dot, layout_graph, render_svg};
use ballmapper::synth::{
    gen_correlated, gen_grid, gen_normal_cloud, gen_outcome, pearson, standard_normal_series,
    OutcomeSpec, SyntheticSpec, GENERATOR,
};

use crate::util::{
    emit, resolve_out, sanitize_group, write_atomic, CliError, CliResult, ColorBy,
};

pub struct PipelineConfig {
    pub input: PathBuf,
    pub axes: Vec<String>,
    pub meta: Vec<String>,
    pub metric: Metric,
    pub policy: NetPolicy,
    pub normalize: bool,
    pub color_by: Option<ColorBy>,
    pub reference: Option<ReferenceSpec>,
    pub layout_seed: u64,
    pub iterations: usize,
    pub legend: bool,
    pub group_by: Option<String>,
}

impl PipelineConfig {
    /// Columns to load as metadata: the requested ones plus whatever the
    /// coloring, reference, or grouping reads that is not an axis.
    fn meta_to_load(&self) -> Vec<String> {
        let mut cols = self.meta.clone();
        let mut want = |name: &str| {
            if !self.axes.iter().any(|a| a == name) && !cols.iter().any(|c| c == name) {
                cols.push(name.to_string());
            }
        };
        if let Some(by) = &self.color_by {
            if let Some(col) = by.column() {
                want(col);
            }
        }
        if let Some(ReferenceSpec::Range { column, .. }) = &self.reference {
            want(column);
        }
        if let Some(group) = &self.group_by {
            want(group);
        }
        cols
    }

    fn load(&self) -> CliResult<(PointCloud, PrepReport)> {
        let (cloud, report) = load_csv(&self.input, &self.axes, &self.meta_to_load())?;
        if self.normalize {
            let (cloud, _) = normalize_minmax(&cloud)?;
            return Ok((cloud, report));
        }
        Ok((cloud, report))
    }
}

pub fn pick_order_from_str(s: &str) -> CliResult<PickOrder> {
    match s {
        "first" => Ok(PickOrder::FirstUncoveredByRow),
        "random" => Ok(PickOrder::RandomWithSeed),
        other => Err(CliError::Usage(format!(
            "unknown pick order {other:?} (expected first or random)"
        ))),
    }
}

fn compute_coloring(
    graph: &BMGraph,
    cloud: &PointCloud,
    by: &ColorBy,
    reference: Option<&ReferenceSpec>,
) -> CliResult<Coloring> {
    Ok(match by {
        ColorBy::Outcome(col) => color_by_outcome(graph, cloud, col)?,
        ColorBy::Axis(col) => color_by_axis(graph, cloud, col)?,
        ColorBy::Year(col) => color_by_year(graph, cloud, col)?,
        ColorBy::Distance => {
            let reference = reference.ok_or_else(|| {
                CliError::Usage("distance coloring needs --ref COL:LO..HI".to_string())
            })?;
            color_by_distance(graph, cloud, reference)?
        }
    })
}

fn partition_by_meta(cloud: &PointCloud, column: &str) -> CliResult<Vec<(String, Vec<usize>)>> {
    let col = cloud
        .meta_column(column)
        .ok_or_else(|| CliError::Data(format!("unknown group column: {column}")))?
        .clone();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, value) in col.values.iter().enumerate() {
        let key = value.to_string();
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key.clone());
                Vec::new()
            })
            .push(i);
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let rows = groups.remove(&k).expect("group present");
            (k, rows)
        })
        .collect())
}

/// Rewrite `path` into the per-group directory tree: `dir/<group>/file`.
fn group_path(path: &Path, group: &str) -> PathBuf {
    let file = path.file_name().map(PathBuf::from).unwrap_or_default();
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => {
            parent.join(sanitize_group(group)).join(file)
        }
        _ => PathBuf::from(sanitize_group(group)).join(file),
    }
}

// --- map ---------------------------------------------------------------

pub struct MapOutputs {
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
    pub dot: Option<PathBuf>,
}

pub fn cmd_map(cfg: &PipelineConfig, epsilon: f64, outputs: &MapOutputs) -> CliResult<()> {
    let (cloud, _) = cfg.load()?;
    match &cfg.group_by {
        None => map_one(cfg, &cloud, epsilon, outputs),
        Some(column) => {
            for (group, rows) in partition_by_meta(&cloud, column)? {
                let sub = cloud.select(&rows)?;
                let sub_outputs = MapOutputs {
                    out: group_path(&outputs.out, &group),
                    svg: outputs.svg.as_ref().map(|p| group_path(p, &group)),
                    dot: outputs.dot.as_ref().map(|p| group_path(p, &group)),
                };
                map_one(cfg, &sub, epsilon, &sub_outputs)?;
            }
            Ok(())
        }
    }
}

fn map_one(
    cfg: &PipelineConfig,
    cloud: &PointCloud,
    epsilon: f64,
    outputs: &MapOutputs,
) -> CliResult<()> {
    let cover = greedy_net(cloud, epsilon, cfg.metric, &cfg.policy)?;
    let graph = build_graph(&cover);
    let out = resolve_out(&outputs.out);
    write_atomic(&out, graph.to_json_string().as_bytes())?;
    eprintln!(
        "wrote {} ({} balls, {} edges)",
        out.display(),
        graph.vertex_count(),
        graph.edge_count()
    );

    if outputs.svg.is_some() || outputs.dot.is_some() {
        // Rendering needs a coloring; default to the first axis.
        let by = cfg
            .color_by
            .clone()
            .unwrap_or_else(|| ColorBy::Axis(cfg.axes[0].clone()));
        let coloring = compute_coloring(&graph, cloud, &by, cfg.reference.as_ref())?;
        if let Some(svg_path) = &outputs.svg {
            let layout = layout_graph(&graph, cfg.layout_seed, cfg.iterations)?;
            let svg = render_svg(&graph, &layout, &coloring, cfg.legend)?;
            write_atomic(&resolve_out(svg_path), svg.as_bytes())?;
        }
        if let Some(dot_path) = &outputs.dot {
            let dot = export_dot(&graph, Some(&coloring))?;
            write_atomic(&resolve_out(dot_path), dot.as_bytes())?;
        }
    }
    Ok(())
}

// --- sweep -------------------------------------------------------------

pub fn cmd_sweep(cfg: &PipelineConfig, epsilons: &[f64], out: Option<&Path>) -> CliResult<()> {
    if epsilons.is_empty() {
        return Err(CliError::Usage("sweep needs at least one epsilon".to_string()));
    }
    let (cloud, _) = cfg.load()?;
    let mut csv = String::new();
    match &cfg.group_by {
        None => {
            csv.push_str("epsilon,balls,edges,components,outliers\n");
            for &eps in epsilons {
                csv.push_str(&sweep_row(cfg, &cloud, eps, None)?);
            }
        }
        Some(column) => {
            csv.push_str("group,epsilon,balls,edges,components,outliers\n");
            for (group, rows) in partition_by_meta(&cloud, column)? {
                let sub = cloud.select(&rows)?;
                for &eps in epsilons {
                    csv.push_str(&sweep_row(cfg, &sub, eps, Some(&group))?);
                }
            }
        }
    }
    emit(out, csv.as_bytes())
}

fn sweep_row(
    cfg: &PipelineConfig,
    cloud: &PointCloud,
    epsilon: f64,
    group: Option<&str>,
) -> CliResult<String> {
    let cover = greedy_net(cloud, epsilon, cfg.metric, &cfg.policy)?;
    let graph = build_graph(&cover);
    let components = connected_components(&graph).len();
    let outliers = list_outliers(&graph).len();
    let prefix = group.map(|g| format!("{g},")).unwrap_or_default();
    Ok(format!(
        "{prefix}{epsilon},{},{},{components},{outliers}\n",
        graph.vertex_count(),
        graph.edge_count()
    ))
}

// --- color / stats -----------------------------------------------------

fn load_graph(path: &Path) -> CliResult<BMGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read graph {}: {e}", path.display())))?;
    Ok(BMGraph::from_json_str(&text)?)
}

/// Reload the cloud a graph was built from: axes come from the graph
/// itself, metadata from the caller plus referenced columns.
fn load_cloud_for_graph(
    graph: &BMGraph,
    input: &Path,
    meta: &[String],
    extra: &[&str],
) -> CliResult<PointCloud> {
    let mut cols = meta.to_vec();
    for name in extra {
        if !graph.axis_names.iter().any(|a| a == name) && !cols.iter().any(|c| c == name) {
            cols.push((*name).to_string());
        }
    }
    let (cloud, _) = load_csv(input, &graph.axis_names, &cols)?;
    Ok(cloud)
}

pub struct ColorCmd {
    pub graph: PathBuf,
    pub input: PathBuf,
    pub meta: Vec<String>,
    pub by: ColorBy,
    pub reference: Option<ReferenceSpec>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub layout_seed: u64,
    pub iterations: usize,
    pub legend: bool,
}

pub fn cmd_color(cmd: &ColorCmd) -> CliResult<()> {
    let graph = load_graph(&cmd.graph)?;
    let mut extra: Vec<&str> = Vec::new();
    if let Some(col) = cmd.by.column() {
        extra.push(col);
    }
    if let Some(ReferenceSpec::Range { column, .. }) = &cmd.reference {
        extra.push(column);
    }
    let cloud = load_cloud_for_graph(&graph, &cmd.input, &cmd.meta, &extra)?;
    let coloring = compute_coloring(&graph, &cloud, &cmd.by, cmd.reference.as_ref())?;
    emit(cmd.out.as_deref(), coloring.to_csv_string().as_bytes())?;
    if let Some(svg_path) = &cmd.svg {
        let layout = layout_graph(&graph, cmd.layout_seed, cmd.iterations)?;
        let svg = render_svg(&graph, &layout, &coloring, cmd.legend)?;
        write_atomic(&resolve_out(svg_path), svg.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_stats(
    graph_path: &Path,
    input: &Path,
    meta: &[String],
    out: Option<&Path>,
) -> CliResult<()> {
    let graph = load_graph(graph_path)?;
    let cloud = load_cloud_for_graph(&graph, input, meta, &[])?;
    let summary = ball_summary(&graph, &cloud, meta)?;
    emit(out, summary.to_csv_string().as_bytes())
}

// --- prep --------------------------------------------------------------

fn read_table(path: &Path) -> CliResult<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::from(ballmapper::Error::from(e)))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::from(ballmapper::Error::from(e)))?
        .clone();
    let rows = rdr
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from(ballmapper::Error::from(e)))?;
    Ok((headers, rows))
}

fn table_to_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

fn write_report(report_path: Option<&Path>, json: String) -> CliResult<()> {
    if let Some(path) = report_path {
        write_atomic(&resolve_out(path), json.as_bytes())?;
    }
    Ok(())
}

/// Rolling mean/sd/skewness of one column, window-aligned to each row's
/// own position; the first `window - 1` rows of each group are consumed.
pub fn cmd_prep_rolling(
    input: &Path,
    column: &str,
    window: usize,
    group_by: Option<&str>,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> CliResult<()> {
    let (headers, rows) = read_table(input)?;
    let col_idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::Data(format!("unknown column: {column}")))?;

    let groups: Vec<(String, Vec<usize>)> = match group_by {
        None => vec![(String::new(), (0..rows.len()).collect())],
        Some(g) => {
            let g_idx = headers
                .iter()
                .position(|h| h == g)
                .ok_or_else(|| CliError::Data(format!("unknown group column: {g}")))?;
            let mut order = Vec::new();
            let mut map: HashMap<String, Vec<usize>> = HashMap::new();
            for (i, row) in rows.iter().enumerate() {
                let key = row.get(g_idx).unwrap_or("").to_string();
                map.entry(key.clone())
                    .or_insert_with(|| {
                        order.push(key.clone());
                        Vec::new()
                    })
                    .push(i);
            }
            order
                .into_iter()
                .map(|k| {
                    let v = map.remove(&k).expect("group present");
                    (k, v)
                })
                .collect()
        }
    };

    let mut header: Vec<String> = headers.iter().map(String::from).collect();
    header.push(format!("{column}_mean{window}"));
    header.push(format!("{column}_sd{window}"));
    header.push(format!("{column}_skew{window}"));

    let mut out_rows: Vec<Vec<String>> = Vec::new();
    for (group, idx) in &groups {
        let series: Vec<f64> = idx
            .iter()
            .map(|&i| {
                rows[i]
                    .get(col_idx)
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        CliError::Data(format!(
                            "non-numeric value in column {column} at data row {}",
                            i + 1
                        ))
                    })
            })
            .collect::<CliResult<_>>()?;
        let moments = rolling_moments(&series, window).map_err(|e| {
            if group.is_empty() {
                CliError::from(e)
            } else {
                CliError::Data(format!("group {group}: {e}"))
            }
        })?;
        for (m, &i) in moments.iter().zip(&idx[window - 1..]) {
            let mut row: Vec<String> = rows[i].iter().map(String::from).collect();
            row.push(m.mean.to_string());
            row.push(m.sd.to_string());
            row.push(m.skewness.map(|s| s.to_string()).unwrap_or_default());
            out_rows.push(row);
        }
    }

    let report = PrepReport {
        rows_in: rows.len(),
        rows_dropped_missing: 0,
        rows_dropped_filter: rows.len() - out_rows.len(),
        rows_out: out_rows.len(),
    };
    emit(out, table_to_csv(&header, &out_rows).as_bytes())?;
    write_report(report_path, report.to_json_string())
}

pub fn cmd_prep_normalize(
    input: &Path,
    axes: &[String],
    meta: &[String],
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> CliResult<()> {
    let (cloud, load_report) = load_csv(input, axes, meta)?;
    let (normalized, scales) = normalize_minmax(&cloud)?;
    emit(out, normalized.to_csv_string().as_bytes())?;
    let mut report = serde_json::to_value(load_report).expect("report serializes");
    report["scales"] = serde_json::to_value(&scales).expect("scales serialize");
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_report(report_path, json)
}

/// Keep rows whose column lies in [lo, hi]. Rows where the column does
/// not parse as a finite number count as missing, mirroring the panel
/// workflow of removing missing values and extreme growth in one pass.
pub fn cmd_prep_filter(
    input: &Path,
    column: &str,
    lo: f64,
    hi: f64,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> CliResult<()> {
    if lo > hi {
        return Err(CliError::Data(format!("invalid range: lo {lo} > hi {hi}")));
    }
    let (headers, rows) = read_table(input)?;
    let col_idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::Data(format!("unknown column: {column}")))?;

    let mut kept: Vec<Vec<String>> = Vec::new();
    let mut dropped_missing = 0usize;
    let mut dropped_filter = 0usize;
    for row in &rows {
        match row
            .get(col_idx)
            .and_then(|f| f.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite())
        {
            None => dropped_missing += 1,
            Some(v) if v < lo || v > hi => dropped_filter += 1,
            Some(_) => kept.push(row.iter().map(String::from).collect()),
        }
    }
    if kept.is_empty() {
        return Err(CliError::Data("no rows survive the filter".to_string()));
    }
    let report = PrepReport {
        rows_in: rows.len(),
        rows_dropped_missing: dropped_missing,
        rows_dropped_filter: dropped_filter,
        rows_out: kept.len(),
    };
    let header: Vec<String> = headers.iter().map(String::from).collect();
    emit(out, table_to_csv(&header, &kept).as_bytes())?;
    write_report(report_path, report.to_json_string())
}

// --- synth -------------------------------------------------------------

fn columns_csv(names: &[&str], columns: &[&[f64]]) -> String {
    let mut out = names.join(",");
    out.push('\n');
    for i in 0..columns[0].len() {
        let row: Vec<String> = columns.iter().map(|c| c[i].to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Default sidecar path: the output CSV with a .json extension.
fn sidecar_path(out: Option<&Path>, sidecar: Option<&Path>) -> Option<PathBuf> {
    sidecar
        .map(Path::to_path_buf)
        .or_else(|| out.map(|p| p.with_extension("json")))
}

fn write_sidecar(path: Option<PathBuf>, value: serde_json::Value) -> CliResult<()> {
    if let Some(path) = path {
        let mut json = serde_json::to_string_pretty(&value).expect("sidecar serializes");
        json.push('\n');
        write_atomic(&resolve_out(&path), json.as_bytes())?;
    }
    Ok(())
}

fn rand_chacha_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

pub fn cmd_synth_correlated(
    n: usize,
    r: f64,
    seed: u64,
    out: Option<&Path>,
    sidecar: Option<&Path>,
) -> CliResult<()> {
    let mut rng = rand_chacha_rng(seed);
    let x0 = standard_normal_series(n, &mut rng);
    let y0 = standard_normal_series(n, &mut rng);
    let x1 = gen_correlated(&x0, &y0, r)?;
    let realized = pearson(&x1, &x0);
    emit(out, columns_csv(&["x_0", "x_1"], &[&x0, &x1]).as_bytes())?;
    write_sidecar(
        sidecar_path(out, sidecar),
        serde_json::json!({
            "command": "correlated",
            "generator": GENERATOR,
            "seed": seed,
            "n": n,
            "r": r,
            "realized_r": realized,
            "columns": ["x_0", "x_1"],
        }),
    )
}

pub fn cmd_synth_outcome(
    n: usize,
    seed: u64,
    spec: &OutcomeSpec,
    out: Option<&Path>,
    sidecar: Option<&Path>,
) -> CliResult<()> {
    let mut rng = rand_chacha_rng(seed);
    let x0 = standard_normal_series(n, &mut rng);
    let y0 = standard_normal_series(n, &mut rng);
    let m = gen_outcome(&x0, &y0, spec, seed)?;
    emit(out, columns_csv(&["x_0", "y_0", "m"], &[&x0, &y0, &m]).as_bytes())?;
    write_sidecar(
        sidecar_path(out, sidecar),
        serde_json::json!({
            "command": "outcome",
            "generator": GENERATOR,
            "seed": seed,
            "n": n,
            "coef_x0": spec.coef_x0,
            "coef_y0": spec.coef_y0,
            "noise_sd": spec.noise_sd,
            "columns": ["x_0", "y_0", "m"],
        }),
    )
}

pub struct SynthCloudCmd {
    pub n: usize,
    pub seed: u64,
    pub grid: bool,
    pub targets: Vec<f64>,
    pub with_outcome: bool,
    pub out: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
}

pub fn cmd_synth_cloud(cmd: &SynthCloudCmd) -> CliResult<()> {
    if cmd.grid && !cmd.targets.is_empty() {
        return Err(CliError::Usage(
            "--grid and --targets are mutually exclusive".to_string(),
        ));
    }
    let mut cloud = if cmd.grid {
        gen_grid(&SyntheticSpec::full_grid(cmd.n, cmd.seed))?
    } else if !cmd.targets.is_empty() {
        gen_normal_cloud(cmd.n, cmd.targets.len() + 1, &cmd.targets, cmd.seed)?
    } else {
        gen_normal_cloud(cmd.n, 1, &[], cmd.seed)?
    };

    if cmd.with_outcome {
        if cloud.d() < 2 {
            return Err(CliError::Usage(
                "--with-outcome needs at least two axis columns".to_string(),
            ));
        }
        let x0 = cloud.axis_values(0);
        let y0 = cloud.axis_values(1);
        let m = gen_outcome(&x0, &y0, &OutcomeSpec::default(), cmd.seed)?;
        let meta = vec![MetaColumn {
            name: "m".to_string(),
            values: m.into_iter().map(MetaValue::Number).collect(),
        }];
        let rows: Vec<Vec<f64>> = (0..cloud.n()).map(|i| cloud.row(i).to_vec()).collect();
        cloud = PointCloud::new(
            cloud.axis_names().to_vec(),
            rows,
            meta,
            cloud.row_ids().to_vec(),
        )?;
    }

    emit(cmd.out.as_deref(), cloud.to_csv_string().as_bytes())?;
    write_sidecar(
        sidecar_path(cmd.out.as_deref(), cmd.sidecar.as_deref()),
        serde_json::json!({
            "command": "cloud",
            "generator": GENERATOR,
            "seed": cmd.seed,
            "n": cmd.n,
            "grid": cmd.grid,
            "targets": cmd.targets,
            "with_outcome": cmd.with_outcome,
            "columns": cloud.axis_names(),
        }),
    )
}
