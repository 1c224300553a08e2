//! Deterministic force-directed layout and SVG/DOT emission.
//!
//! The layout is a spring embedding with unit natural length, run per
//! connected component; components are then packed on a grid of bounding
//! boxes so isolated balls stay visibly separate. Ball radii grow with
//! the square root of the member count so drawn area tracks membership.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::color::{scale_to_palette, Coloring};
use crate::error::{Error, Result};
use crate::graph::{connected_components, BMGraph};

/// Natural spring length, in abstract layout units.
const SPRING_LENGTH: f64 = 1.0;
/// Largest ball radius relative to the spring length.
const MAX_RADIUS: f64 = 0.5;
const COMPONENT_PAD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub positions: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

/// Embed the graph. Deterministic for a fixed seed and iteration count.
pub fn layout_graph(graph: &BMGraph, seed: u64, iterations: usize) -> Result<Layout> {
    if iterations == 0 {
        return Err(Error::ZeroIterations);
    }
    if graph.nodes.is_empty() {
        return Err(Error::BadGraphFile("graph has no vertices".to_string()));
    }

    let max_count = graph.nodes.iter().map(|v| v.count).max().unwrap_or(1) as f64;
    let radii: Vec<f64> = graph
        .nodes
        .iter()
        .map(|v| MAX_RADIUS * (v.count as f64 / max_count).sqrt())
        .collect();

    let components = connected_components(graph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = vec![(0.0, 0.0); graph.nodes.len()];
    let mut boxes: Vec<(Vec<usize>, f64, f64, Vec<(f64, f64)>)> = Vec::new();

    for comp in &components {
        let local = layout_component(graph, comp, &mut rng, iterations);
        // Bounding box including radii, centered at the origin.
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for (&v, &(x, y)) in comp.iter().zip(&local) {
            min_x = min_x.min(x - radii[v]);
            max_x = max_x.max(x + radii[v]);
            min_y = min_y.min(y - radii[v]);
            max_y = max_y.max(y + radii[v]);
        }
        let cx = (min_x + max_x) / 2.0;
        let cy = (min_y + max_y) / 2.0;
        let centered: Vec<(f64, f64)> = local.iter().map(|&(x, y)| (x - cx, y - cy)).collect();
        boxes.push((comp.clone(), max_x - min_x, max_y - min_y, centered));
    }

    // Pack component boxes on a near-square grid.
    let cols = (boxes.len() as f64).sqrt().ceil() as usize;
    let cell_w = boxes.iter().map(|b| b.1).fold(0.0, f64::max) + COMPONENT_PAD;
    let cell_h = boxes.iter().map(|b| b.2).fold(0.0, f64::max) + COMPONENT_PAD;
    for (j, (comp, _, _, centered)) in boxes.iter().enumerate() {
        let ox = (j % cols) as f64 * cell_w;
        let oy = (j / cols) as f64 * cell_h;
        for (&v, &(x, y)) in comp.iter().zip(centered) {
            positions[v] = (x + ox, y + oy);
        }
    }

    debug_assert!(positions.iter().all(|p| p.0.is_finite() && p.1.is_finite()));
    Ok(Layout {
        positions,
        radii,
        iterations,
        seed,
    })
}

fn layout_component(
    graph: &BMGraph,
    comp: &[usize],
    rng: &mut ChaCha8Rng,
    iterations: usize,
) -> Vec<(f64, f64)> {
    let m = comp.len();
    if m == 1 {
        return vec![(0.0, 0.0)];
    }
    let side = (m as f64).sqrt() * SPRING_LENGTH;
    let mut pos: Vec<(f64, f64)> = (0..m)
        .map(|_| {
            (
                (rng.gen::<f64>() - 0.5) * side,
                (rng.gen::<f64>() - 0.5) * side,
            )
        })
        .collect();

    let index_of = |v: usize| comp.binary_search(&v).expect("vertex in component");
    let edges: Vec<(usize, usize)> = graph
        .edges
        .iter()
        .filter(|e| comp.binary_search(&e.a).is_ok() && comp.binary_search(&e.b).is_ok())
        .map(|e| (index_of(e.a), index_of(e.b)))
        .collect();

    let k = SPRING_LENGTH;
    let t0 = side / 10.0;
    let mut disp = vec![(0.0, 0.0); m];
    for it in 0..iterations {
        for d in &mut disp {
            *d = (0.0, 0.0);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (dx, dy) = separation(pos[i], pos[j], i, j);
                let dist = (dx * dx + dy * dy).sqrt();
                let f = k * k / dist / dist; // repulsion, scaled by 1/dist for the unit vector
                disp[i].0 += dx * f;
                disp[i].1 += dy * f;
                disp[j].0 -= dx * f;
                disp[j].1 -= dy * f;
            }
        }
        for &(i, j) in &edges {
            let (dx, dy) = separation(pos[i], pos[j], i, j);
            let dist = (dx * dx + dy * dy).sqrt();
            let f = dist / k; // attraction dist^2/k, divided by dist for the unit vector
            disp[i].0 -= dx * f;
            disp[i].1 -= dy * f;
            disp[j].0 += dx * f;
            disp[j].1 += dy * f;
        }
        let t = t0 * (1.0 - it as f64 / iterations as f64);
        for (p, &(dx, dy)) in pos.iter_mut().zip(&disp) {
            let len = (dx * dx + dy * dy).sqrt();
            if len > 0.0 {
                let step = len.min(t);
                p.0 += dx / len * step;
                p.1 += dy / len * step;
            }
        }
    }
    pos
}

/// Vector from `b` to `a`, nudged deterministically when coincident.
fn separation(a: (f64, f64), b: (f64, f64), i: usize, j: usize) -> (f64, f64) {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    if dx == 0.0 && dy == 0.0 {
        ((i + 1) as f64 * 1e-4, (j + 1) as f64 * 1e-4)
    } else {
        (dx, dy)
    }
}

fn fmt_val(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Render the colored graph as a standalone SVG 1.1 document.
///
/// One circle per ball (area proportional to member count), one line per
/// edge, ball ids as labels, optional value legend. Byte-stable for fixed
/// inputs.
pub fn render_svg(
    graph: &BMGraph,
    layout: &Layout,
    coloring: &Coloring,
    legend: bool,
) -> Result<String> {
    if coloring.values.len() != graph.nodes.len() {
        return Err(Error::MismatchedColoring(
            coloring.values.len(),
            graph.nodes.len(),
        ));
    }
    if layout.positions.len() != graph.nodes.len() {
        return Err(Error::LengthMismatch(
            layout.positions.len(),
            graph.nodes.len(),
        ));
    }

    let width = 900.0_f64;
    let height = 640.0_f64;
    let margin = 40.0_f64;
    let legend_w = if legend { 110.0 } else { 0.0 };

    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for (&(x, y), &r) in layout.positions.iter().zip(&layout.radii) {
        min_x = min_x.min(x - r);
        max_x = max_x.max(x + r);
        min_y = min_y.min(y - r);
        max_y = max_y.max(y + r);
    }
    let world_w = (max_x - min_x).max(1e-9);
    let world_h = (max_y - min_y).max(1e-9);
    let scale = ((width - legend_w - 2.0 * margin) / world_w)
        .min((height - 2.0 * margin) / world_h);
    let off_x = margin + ((width - legend_w - 2.0 * margin) - world_w * scale) / 2.0;
    let off_y = margin + ((height - 2.0 * margin) - world_h * scale) / 2.0;
    let px = |x: f64| off_x + (x - min_x) * scale;
    let py = |y: f64| off_y + (y - min_y) * scale;

    let colors = scale_to_palette(coloring);
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));

    for e in &graph.edges {
        let (ax, ay) = layout.positions[e.a];
        let (bx, by) = layout.positions[e.b];
        let w = (1.0 + (e.shared as f64 - 1.0) * 0.25).min(4.0);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-width=\"{:.2}\"/>\n",
            px(ax), py(ay), px(bx), py(by), w
        ));
    }
    for (node, ((&(x, y), &r), color)) in graph
        .nodes
        .iter()
        .zip(layout.positions.iter().zip(&layout.radii).zip(&colors))
    {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.85\" stroke=\"#333333\" stroke-width=\"0.75\"/>\n",
            px(x), py(y), r * scale, color.hex()
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\" dy=\"0.35em\" fill=\"#111111\">{}</text>\n",
            px(x), py(y), node.id
        ));
    }

    if legend {
        let bar_x = width - legend_w + 20.0;
        let bar_y = 60.0;
        let bar_w = 18.0;
        let bar_h = 192.0;
        let steps = 48;
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"sans-serif\" fill=\"#111111\">{}</text>\n",
            bar_x, bar_y - 24.0, coloring.label
        ));
        for s in 0..steps {
            let t = 1.0 - (s as f64 + 0.5) / steps as f64;
            let color = scale_to_palette(&Coloring {
                values: vec![t],
                label: String::new(),
                v_min: 0.0,
                v_max: 1.0,
                palette: coloring.palette,
            })[0];
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                bar_x,
                bar_y + bar_h / steps as f64 * s as f64,
                bar_w,
                bar_h / steps as f64,
                color.hex()
            ));
        }
        let label = |value: f64, frac: f64| {
            format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"sans-serif\" dy=\"0.35em\" fill=\"#111111\">{}</text>\n",
                bar_x + bar_w + 6.0,
                bar_y + bar_h * frac,
                fmt_val(value)
            )
        };
        svg.push_str(&label(coloring.v_max, 0.0));
        svg.push_str(&label((coloring.v_min + coloring.v_max) / 2.0, 0.5));
        svg.push_str(&label(coloring.v_min, 1.0));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Emit the graph in DOT, nodes ascending by id and edges ascending by
/// (a, b). Node width grows with the square root of the member count;
/// fill colors appear only when a coloring is supplied.
pub fn export_dot(graph: &BMGraph, coloring: Option<&Coloring>) -> Result<String> {
    if let Some(c) = coloring {
        if c.values.len() != graph.nodes.len() {
            return Err(Error::MismatchedColoring(c.values.len(), graph.nodes.len()));
        }
    }
    let colors = coloring.map(scale_to_palette);
    let mut dot = String::from("graph ballmapper {\n");
    dot.push_str("  node [shape=circle style=filled fixedsize=true];\n");
    for node in &graph.nodes {
        let width = 0.25 * (node.count as f64).sqrt();
        match &colors {
            Some(cs) => dot.push_str(&format!(
                "  {} [width={:.3} fillcolor=\"{}\"];\n",
                node.id,
                width,
                cs[node.id].hex()
            )),
            None => dot.push_str(&format!("  {} [width={:.3}];\n", node.id, width)),
        }
    }
    for e in &graph.edges {
        dot.push_str(&format!("  {} -- {};\n", e.a, e.b));
    }
    dot.push_str("}\n");
    Ok(dot)
}
