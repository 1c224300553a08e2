//! Browser bindings for the ball-mapper engine. Three operations back the
//! demo page in `www/`: map a synthetic correlated cloud to a colored SVG,
//! sweep the filtration parameter, and map user-pasted CSV. Everything is
//! strings in, strings out; the page owns the DOM.
//!
//! The `ops` module holds the plain-Rust implementations (testable on any
//! target); the `#[wasm_bindgen]` exports only translate errors at the
//! boundary.

use wasm_bindgen::prelude::*;

pub mod ops {
    use ballmapper::cloud::{load_csv_reader, MetaColumn, MetaValue, PointCloud};
    use ballmapper::color::{
        color_by_axis, color_by_distance, color_by_outcome, color_by_year, Coloring,
        ReferenceSpec,
    };
    use ballmapper::graph::{build_graph, connected_components, list_outliers, BMGraph};
    use ballmapper::net::{greedy_net, Metric, NetPolicy};
    use ballmapper::render::{layout_graph, render_svg};
    use ballmapper::synth::{gen_normal_cloud, gen_outcome, OutcomeSpec};

    type OpResult<T> = Result<T, String>;

    fn err(e: impl std::fmt::Display) -> String {
        e.to_string()
    }

    /// The demo dataset: three normal axes at fixed correlations to the
    /// base (-0.83 and -0.66), plus the outcome m = 0.3*x_0 + 0.6*x_1 + noise.
    fn demo_cloud(n: usize, seed: u64) -> OpResult<PointCloud> {
        let cloud = gen_normal_cloud(n, 3, &[-0.83, -0.66], seed).map_err(err)?;
        let x0 = cloud.axis_values(0);
        let x1 = cloud.axis_values(1);
        let m = gen_outcome(&x0, &x1, &OutcomeSpec::default(), seed).map_err(err)?;
        let rows: Vec<Vec<f64>> = (0..cloud.n()).map(|i| cloud.row(i).to_vec()).collect();
        let meta = vec![MetaColumn {
            name: "m".to_string(),
            values: m.into_iter().map(MetaValue::Number).collect(),
        }];
        PointCloud::new(
            cloud.axis_names().to_vec(),
            rows,
            meta,
            cloud.row_ids().to_vec(),
        )
        .map_err(err)
    }

    #[allow(clippy::too_many_arguments)]
    fn coloring_for(
        graph: &BMGraph,
        cloud: &PointCloud,
        kind: &str,
        column: &str,
        ref_column: &str,
        ref_lo: f64,
        ref_hi: f64,
    ) -> OpResult<Coloring> {
        match kind {
            "outcome" => color_by_outcome(graph, cloud, column).map_err(err),
            "axis" => color_by_axis(graph, cloud, column).map_err(err),
            "year" => color_by_year(graph, cloud, column).map_err(err),
            "distance" => {
                let reference = ReferenceSpec::Range {
                    column: ref_column.to_string(),
                    lo: ref_lo,
                    hi: ref_hi,
                };
                color_by_distance(graph, cloud, &reference).map_err(err)
            }
            other => Err(format!(
                "unknown coloring kind {other:?} (outcome, axis, year, distance)"
            )),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn map_to_svg(
        cloud: &PointCloud,
        epsilon: f64,
        kind: &str,
        column: &str,
        ref_column: &str,
        ref_lo: f64,
        ref_hi: f64,
        layout_seed: u64,
        iterations: usize,
    ) -> OpResult<String> {
        let cover =
            greedy_net(cloud, epsilon, Metric::Euclidean, &NetPolicy::default()).map_err(err)?;
        let graph = build_graph(&cover);
        let coloring = coloring_for(&graph, cloud, kind, column, ref_column, ref_lo, ref_hi)?;
        let layout = layout_graph(&graph, layout_seed, iterations).map_err(err)?;
        render_svg(&graph, &layout, &coloring, true).map_err(err)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn demo_svg(
        n: usize,
        seed: u64,
        epsilon: f64,
        color_kind: &str,
        color_column: &str,
        ref_lo: f64,
        ref_hi: f64,
        layout_seed: u64,
        iterations: usize,
    ) -> OpResult<String> {
        let cloud = demo_cloud(n, seed)?;
        let column = if color_kind == "outcome" { "m" } else { color_column };
        map_to_svg(
            &cloud, epsilon, color_kind, column, "m", ref_lo, ref_hi, layout_seed, iterations,
        )
    }

    pub fn demo_sweep_csv(n: usize, seed: u64, epsilons_csv: &str) -> OpResult<String> {
        let cloud = demo_cloud(n, seed)?;
        let mut out = String::from("epsilon,balls,edges,components,outliers\n");
        for part in epsilons_csv.split(',') {
            let eps: f64 = part
                .trim()
                .parse()
                .map_err(|_| format!("bad epsilon {part:?}"))?;
            let cover =
                greedy_net(&cloud, eps, Metric::Euclidean, &NetPolicy::default()).map_err(err)?;
            let graph = build_graph(&cover);
            out.push_str(&format!(
                "{eps},{},{},{},{}\n",
                graph.vertex_count(),
                graph.edge_count(),
                connected_components(&graph).len(),
                list_outliers(&graph).len()
            ));
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn map_csv_svg(
        csv_text: &str,
        axes_csv: &str,
        epsilon: f64,
        color_kind: &str,
        color_column: &str,
        ref_column: &str,
        ref_lo: f64,
        ref_hi: f64,
        layout_seed: u64,
        iterations: usize,
    ) -> OpResult<String> {
        let axes: Vec<String> = axes_csv
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if axes.is_empty() {
            return Err("at least one axis column is required".to_string());
        }
        let mut meta: Vec<String> = Vec::new();
        for name in [color_column, ref_column] {
            if !name.is_empty()
                && !axes.iter().any(|a| a == name)
                && !meta.iter().any(|m| m == name)
            {
                meta.push(name.to_string());
            }
        }
        let (cloud, _) = load_csv_reader(csv_text.as_bytes(), &axes, &meta).map_err(err)?;
        map_to_svg(
            &cloud, epsilon, color_kind, color_column, ref_column, ref_lo, ref_hi, layout_seed,
            iterations,
        )
    }
}

/// Map the built-in correlated demo cloud and return a colored SVG.
///
/// `color_kind` is `outcome`, `axis`, or `distance`; `color_column` names
/// the axis for axis coloring; distance coloring anchors on the rows whose
/// outcome lies in [ref_lo, ref_hi].
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn demo_svg(
    n: usize,
    seed: u64,
    epsilon: f64,
    color_kind: &str,
    color_column: &str,
    ref_lo: f64,
    ref_hi: f64,
    layout_seed: u64,
    iterations: usize,
) -> Result<String, JsValue> {
    ops::demo_svg(
        n, seed, epsilon, color_kind, color_column, ref_lo, ref_hi, layout_seed, iterations,
    )
    .map_err(|e| JsValue::from_str(&e))
}

/// Sweep the filtration parameter over the demo cloud; returns the CSV
/// table `epsilon,balls,edges,components,outliers`.
#[wasm_bindgen]
pub fn demo_sweep_csv(n: usize, seed: u64, epsilons_csv: &str) -> Result<String, JsValue> {
    ops::demo_sweep_csv(n, seed, epsilons_csv).map_err(|e| JsValue::from_str(&e))
}

/// Map user-supplied CSV text. `axes_csv` is a comma-separated list of
/// axis columns; coloring works as in [`demo_svg`], with `year` allowed
/// and the distance reference read from `ref_column`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn map_csv_svg(
    csv_text: &str,
    axes_csv: &str,
    epsilon: f64,
    color_kind: &str,
    color_column: &str,
    ref_column: &str,
    ref_lo: f64,
    ref_hi: f64,
    layout_seed: u64,
    iterations: usize,
) -> Result<String, JsValue> {
    ops::map_csv_svg(
        csv_text, axes_csv, epsilon, color_kind, color_column, ref_column, ref_lo, ref_hi,
        layout_seed, iterations,
    )
    .map_err(|e| JsValue::from_str(&e))
}
