//! `ballmapper` — cover a CSV point cloud with an ε-net of balls, build
//! the ball-intersection graph, color it, summarize it, and render it.
//!
//! Exit codes: 0 success, 1 usage, 2 i/o, 3 data validation.

mod commands;
mod config;
mod util;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ballmapper::net::{Metric, NetPolicy, PickOrder};
use ballmapper::synth::OutcomeSpec;

use commands::{MapOutputs, PipelineConfig, SynthCloudCmd};
use config::FileConfig;
use util::{parse_reference, split_list, CliError, CliResult, ColorBy};

#[derive(Parser)]
#[command(
    name = "ballmapper",
    version,
    about = "Epsilon-net ball covers of point clouds, their intersection graphs, colorings, and renderings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cover a CSV point cloud and write the ball graph as JSON
    Map(MapArgs),
    /// Run the cover at several epsilons and tabulate the resulting graphs
    Sweep(SweepArgs),
    /// Color an existing graph by outcome, axis, year, or reference distance
    Color(ColorArgs),
    /// Per-ball summary table: axis means, meta min/max, member counts
    Stats(StatsArgs),
    /// Data preparation: rolling moments, normalization, range filtering
    Prep {
        #[command(subcommand)]
        command: PrepCommand,
    },
    /// Synthetic datasets with exact target correlations
    Synth {
        #[command(subcommand)]
        command: SynthCommand,
    },
}

#[derive(Args)]
struct MapArgs {
    /// Input CSV path
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated axis column names
    #[arg(long)]
    axes: Option<String>,
    /// Comma-separated metadata column names
    #[arg(long)]
    meta: Option<String>,
    /// Ball radius — the single algorithmic parameter
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Distance: euclidean | manhattan
    #[arg(long)]
    metric: Option<String>,
    /// Center pick order: first | random
    #[arg(long)]
    pick_order: Option<String>,
    /// Seed for the random pick order
    #[arg(long)]
    net_seed: Option<u64>,
    /// Min-max normalize the axes onto [0,1] before covering
    #[arg(long)]
    normalize: bool,
    /// Output graph JSON path (default graph.json)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also render an SVG here
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also export DOT here
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Coloring for rendering: outcome:COL | axis:COL | year:COL | distance
    #[arg(long)]
    color_by: Option<String>,
    /// Reference rows for distance coloring: COL:LO..HI or rows:ID,ID,...
    #[arg(long = "ref")]
    reference: Option<String>,
    #[arg(long)]
    layout_seed: Option<u64>,
    /// Layout iterations (default 500)
    #[arg(long)]
    iterations: Option<usize>,
    /// Drop the SVG legend
    #[arg(long)]
    no_legend: bool,
    /// Run the whole pipeline once per value of this meta column,
    /// writing into a per-group directory tree
    #[arg(long)]
    group_by: Option<String>,
    /// TOML file supplying defaults for any of the above (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    axes: Option<String>,
    #[arg(long)]
    meta: Option<String>,
    /// Comma-separated list of epsilons
    #[arg(long, allow_hyphen_values = true)]
    epsilons: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    pick_order: Option<String>,
    #[arg(long)]
    net_seed: Option<u64>,
    #[arg(long)]
    normalize: bool,
    /// Output CSV path (stdout when omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    group_by: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ColorArgs {
    /// Graph JSON produced by `map`
    #[arg(long)]
    graph: PathBuf,
    /// The CSV the graph was built from
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    meta: Option<String>,
    /// outcome:COL | axis:COL | year:COL | distance
    #[arg(long)]
    by: String,
    #[arg(long = "ref")]
    reference: Option<String>,
    /// Coloring CSV path (stdout when omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also render the colored graph as SVG
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    layout_seed: u64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long)]
    no_legend: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Meta columns to report as min/max
    #[arg(long)]
    meta: Option<String>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PrepCommand {
    /// Append rolling mean/sd/skewness columns for one numeric column
    Rolling {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        col: String,
        #[arg(long)]
        window: usize,
        /// Compute windows within each value of this column
        #[arg(long)]
        group_by: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Write the prep report JSON here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Min-max normalize axis columns onto [0,1]
    Normalize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        axes: String,
        #[arg(long)]
        meta: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Keep rows whose column lies in [lo, hi]; unparseable values count
    /// as missing
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        col: String,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// x_0 plus one column with exact target correlation r
    Correlated {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// x_0, y_0, and the linear outcome m with seeded noise
    Outcome {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        coef_x0: f64,
        #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
        coef_y0: f64,
        #[arg(long, default_value_t = 1.0)]
        sd: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Correlated normal cloud: --grid (full 0.01-step grid) or --targets
    Cloud {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit x_0 plus 198 columns at correlations -0.99..0.98
        #[arg(long)]
        grid: bool,
        /// Comma-separated target correlations for x_1, x_2, ...
        #[arg(long, allow_hyphen_values = true)]
        targets: Option<String>,
        /// Append the outcome column m built from the first two axes
        #[arg(long)]
        with_outcome: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("ballmapper: {}", e.message());
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Map(args) => {
            let file = FileConfig::load(args.config.as_ref())?;
            let epsilon = args
                .epsilon
                .or(file.epsilon)
                .ok_or_else(|| CliError::Usage("--epsilon is required".to_string()))?;
            let outputs = MapOutputs {
                out: args
                    .out
                    .or(file.out.clone())
                    .unwrap_or_else(|| PathBuf::from("graph.json")),
                svg: args.svg.or(file.svg.clone()),
                dot: args.dot.or(file.dot.clone()),
            };
            let cfg = resolve_pipeline(
                args.input,
                args.axes,
                args.meta,
                args.metric,
                args.pick_order,
                args.net_seed,
                args.normalize,
                args.color_by,
                args.reference,
                args.layout_seed,
                args.iterations,
                args.no_legend,
                args.group_by,
                &file,
            )?;
            commands::cmd_map(&cfg, epsilon, &outputs)
        }
        Command::Sweep(args) => {
            let file = FileConfig::load(args.config.as_ref())?;
            let epsilons: Vec<f64> = match args.epsilons {
                Some(list) => list
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .map_err(|_| CliError::Usage(format!("bad epsilon {p:?}")))
                    })
                    .collect::<CliResult<_>>()?,
                None => file
                    .epsilons
                    .clone()
                    .or_else(|| file.epsilon.map(|e| vec![e]))
                    .ok_or_else(|| CliError::Usage("--epsilons is required".to_string()))?,
            };
            let out = args.out.or(file.out.clone());
            let cfg = resolve_pipeline(
                args.input,
                args.axes,
                args.meta,
                args.metric,
                args.pick_order,
                args.net_seed,
                args.normalize,
                None,
                None,
                None,
                None,
                false,
                args.group_by,
                &file,
            )?;
            commands::cmd_sweep(&cfg, &epsilons, out.as_deref())
        }
        Command::Color(args) => commands::cmd_color(&commands::ColorCmd {
            graph: args.graph,
            input: args.input,
            meta: args.meta.as_deref().map(split_list).unwrap_or_default(),
            by: ColorBy::parse(&args.by)?,
            reference: args
                .reference
                .as_deref()
                .map(parse_reference)
                .transpose()?,
            out: args.out,
            svg: args.svg,
            layout_seed: args.layout_seed,
            iterations: args.iterations,
            legend: !args.no_legend,
        }),
        Command::Stats(args) => commands::cmd_stats(
            &args.graph,
            &args.input,
            &args.meta.as_deref().map(split_list).unwrap_or_default(),
            args.out.as_deref(),
        ),
        Command::Prep { command } => match command {
            PrepCommand::Rolling {
                input,
                col,
                window,
                group_by,
                out,
                report,
            } => commands::cmd_prep_rolling(
                &input,
                &col,
                window,
                group_by.as_deref(),
                out.as_deref(),
                report.as_deref(),
            ),
            PrepCommand::Normalize {
                input,
                axes,
                meta,
                out,
                report,
            } => commands::cmd_prep_normalize(
                &input,
                &split_list(&axes),
                &meta.as_deref().map(split_list).unwrap_or_default(),
                out.as_deref(),
                report.as_deref(),
            ),
            PrepCommand::Filter {
                input,
                col,
                lo,
                hi,
                out,
                report,
            } => commands::cmd_prep_filter(&input, &col, lo, hi, out.as_deref(), report.as_deref()),
        },
        Command::Synth { command } => match command {
            SynthCommand::Correlated {
                n,
                r,
                seed,
                out,
                sidecar,
            } => commands::cmd_synth_correlated(n, r, seed, out.as_deref(), sidecar.as_deref()),
            SynthCommand::Outcome {
                n,
                seed,
                coef_x0,
                coef_y0,
                sd,
                out,
                sidecar,
            } => commands::cmd_synth_outcome(
                n,
                seed,
                &OutcomeSpec {
                    coef_x0,
                    coef_y0,
                    noise_sd: sd,
                },
                out.as_deref(),
                sidecar.as_deref(),
            ),
            SynthCommand::Cloud {
                n,
                seed,
                grid,
                targets,
                with_outcome,
                out,
                sidecar,
            } => {
                let targets: Vec<f64> = match targets {
                    None => Vec::new(),
                    Some(list) => list
                        .split(',')
                        .map(|p| {
                            p.trim()
                                .parse::<f64>()
                                .map_err(|_| CliError::Usage(format!("bad target {p:?}")))
                        })
                        .collect::<CliResult<_>>()?,
                };
                commands::cmd_synth_cloud(&SynthCloudCmd {
                    n,
                    seed,
                    grid,
                    targets,
                    with_outcome,
                    out,
                    sidecar,
                })
            }
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_pipeline(
    input: Option<PathBuf>,
    axes: Option<String>,
    meta: Option<String>,
    metric: Option<String>,
    pick_order: Option<String>,
    net_seed: Option<u64>,
    normalize: bool,
    color_by: Option<String>,
    reference: Option<String>,
    layout_seed: Option<u64>,
    iterations: Option<usize>,
    no_legend: bool,
    group_by: Option<String>,
    file: &FileConfig,
) -> CliResult<PipelineConfig> {
    let input = input
        .or(file.input.clone())
        .ok_or_else(|| CliError::Usage("--input is required".to_string()))?;
    let axes = axes
        .as_deref()
        .map(split_list)
        .or_else(|| file.axes.clone())
        .filter(|a| !a.is_empty())
        .ok_or_else(|| CliError::Usage("--axes is required".to_string()))?;
    let meta = meta
        .as_deref()
        .map(split_list)
        .or_else(|| file.meta.clone())
        .unwrap_or_default();
    let metric = match metric.or(file.metric.clone()) {
        None => Metric::Euclidean,
        Some(name) => Metric::parse(&name).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let pick_order = match pick_order.or(file.pick_order.clone()) {
        None => PickOrder::FirstUncoveredByRow,
        Some(name) => commands::pick_order_from_str(&name)?,
    };
    let policy = NetPolicy {
        pick_order,
        seed: net_seed.or(file.net_seed).unwrap_or(0),
    };
    let color_by = color_by
        .or(file.color_by.clone())
        .as_deref()
        .map(ColorBy::parse)
        .transpose()?;
    let reference = reference
        .or(file.reference.clone())
        .as_deref()
        .map(parse_reference)
        .transpose()?;
    Ok(PipelineConfig {
        input,
        axes,
        meta,
        metric,
        policy,
        normalize: normalize || file.normalize.unwrap_or(false),
        color_by,
        reference,
        layout_seed: layout_seed.or(file.layout_seed).unwrap_or(0),
        iterations: iterations.or(file.iterations).unwrap_or(500),
        legend: if no_legend { false } else { file.legend.unwrap_or(true) },
        group_by: group_by.or(file.group_by.clone()),
    })
}
