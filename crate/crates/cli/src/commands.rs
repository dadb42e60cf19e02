//! Command-line surface. Every command computes all of its outputs in memory
//! first and only then writes them, so a failing run leaves no files behind.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dfdmimo::experiments::{
    default_heatmap_target, isd_sweep, run_drop_detailed, run_scenario,
    spatial_correlation_heatmap, DEFAULT_SWEEP_ISDS,
};
use dfdmimo::geometry::Point2;
use dfdmimo::report::{self, fmt_num};
use dfdmimo::ScenarioConfig;

use crate::config::{config_json, config_warnings, parse_config};
use crate::presets::{preset, preset_names};

#[derive(Debug, Parser)]
#[command(name = "dfdmimo", version, about = "Multi-cell MU-MIMO downlink simulator")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-drop simulation of the full network.
    Run(RunArgs),
    /// The first cell simulated alone.
    Isolated(RunArgs),
    /// Interference statistics of FD-MIMO and 3-sector D-FD-MIMO over ISDs.
    Sweep(SweepArgs),
    /// Spatial correlation map of a conjugate beam.
    Heatmap(HeatmapArgs),
    /// Print the preset names.
    ListPresets,
}

#[derive(Debug, Args)]
pub struct Source {
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// JSON scenario file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub drops: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Also write the drop-0 layout.
    #[arg(long)]
    pub dump_layout: bool,
    /// Also write the drop-0 channel matrix.
    #[arg(long)]
    pub dump_channel: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated ISDs in meters.
    #[arg(long, value_delimiter = ',')]
    pub isds: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 0)]
    pub sector: usize,
    /// Target position "x,y" in meters (default: the sector's first drop-0 UE).
    #[arg(long)]
    pub target: Option<String>,
    /// Grid spacing in meters.
    #[arg(long, default_value_t = 2.0)]
    pub resolution: f64,
}

/// Files produced by a command, in write order.
pub type Outputs = Vec<(String, String)>;

pub fn resolve_config(source: &Source, fallback: Option<&str>) -> Result<ScenarioConfig> {
    let mut config = match (&source.preset, &source.config) {
        (Some(name), None) => preset(name).ok_or_else(|| {
            anyhow!("unknown preset '{name}' (available: {})", preset_names().join(", "))
        })?,
        (None, Some(path)) => parse_config(path)?,
        (None, None) => match fallback {
            Some(name) => preset(name).expect("fallback preset exists"),
            None => bail!("either --preset or --config is required"),
        },
        (Some(_), Some(_)) => bail!("--preset and --config are mutually exclusive"),
    };
    if let Some(seed) = source.seed {
        config.master_seed = seed;
    }
    if let Some(drops) = source.drops {
        config.drops = drops;
    }
    config.validate()?;
    for w in config_warnings(&config) {
        log::warn!("{w}");
    }
    Ok(config)
}

fn parse_point(s: &str) -> Result<Point2> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("target must be \"x,y\", got '{s}'"))?;
    let x: f64 = x.trim().parse().with_context(|| format!("bad target x '{x}'"))?;
    let y: f64 = y.trim().parse().with_context(|| format!("bad target y '{y}'"))?;
    Ok(Point2::new(x, y))
}

fn simulation_outputs(mut config: ScenarioConfig, args: &RunArgs, isolated: bool) -> Result<Outputs> {
    if isolated {
        config.isolated = true;
    }
    let r = run_scenario(&config)?;
    let mut out: Outputs = vec![
        ("config.json".into(), config_json(&config)),
        ("summary.toml".into(), report::summary_text(&config, &r)),
        ("sinr_cdf.csv".into(), report::cdf_csv(&r.sinr_db())?),
        ("s_over_intra_cdf.csv".into(), report::cdf_csv(&r.s_over_intra_db())?),
        ("s_over_inter_cdf.csv".into(), report::cdf_csv(&r.s_over_inter_db())?),
        ("ue_samples.csv".into(), report::ue_samples_csv(&r)),
    ];
    if args.dump_layout || args.dump_channel {
        let layout = config.layout()?;
        let a = run_drop_detailed(&config, &layout, 0)?;
        if args.dump_layout {
            out.push(("layout.csv".into(), report::layout_csv(&layout, Some(&a.deployment))));
        }
        if args.dump_channel {
            out.push(("channel.csv".into(), report::channel_csv(&a.channel, &a.deployment)));
        }
    }
    Ok(out)
}

fn sweep_outputs(config: ScenarioConfig, args: &SweepArgs) -> Result<Outputs> {
    let isds = if args.isds.is_empty() {
        DEFAULT_SWEEP_ISDS.to_vec()
    } else {
        args.isds.clone()
    };
    let rows = isd_sweep(&config, &isds)?;
    Ok(vec![
        ("config.json".into(), config_json(&config)),
        ("sweep.csv".into(), report::sweep_csv(&rows)),
    ])
}

fn heatmap_outputs(config: ScenarioConfig, args: &HeatmapArgs) -> Result<Outputs> {
    let target = match &args.target {
        Some(t) => parse_point(t)?,
        None => default_heatmap_target(&config, args.sector)?,
    };
    let grid = spatial_correlation_heatmap(&config, args.sector, target, args.resolution)?;
    let summary = format!(
        "scenario_kind = \"{}\"\nsector_id = {}\ntarget_x_m = {}\ntarget_y_m = {}\nresolution_m = {}\nspatial_std_db = {}\n",
        config.scenario_kind,
        args.sector,
        fmt_num(target.x),
        fmt_num(target.y),
        fmt_num(args.resolution),
        fmt_num(grid.spatial_std_db()),
    );
    Ok(vec![
        ("config.json".into(), config_json(&config)),
        ("heatmap.csv".into(), report::heatmap_csv(&grid)),
        ("heatmap_summary.toml".into(), summary),
    ])
}

fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    outputs
        .iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
            Ok(p)
        })
        .collect()
}

fn execute_inner(command: &Command) -> Result<Vec<PathBuf>> {
    let (dir, outputs) = match command {
        Command::ListPresets => {
            for name in preset_names() {
                println!("{name}");
            }
            return Ok(Vec::new());
        }
        Command::Run(a) => (&a.source.out, simulation_outputs(resolve_config(&a.source, None)?, a, false)?),
        Command::Isolated(a) => (&a.source.out, simulation_outputs(resolve_config(&a.source, None)?, a, true)?),
        Command::Sweep(a) => (
            &a.source.out,
            sweep_outputs(resolve_config(&a.source, Some("dfd_3sector_isd200"))?, a)?,
        ),
        Command::Heatmap(a) => (&a.source.out, heatmap_outputs(resolve_config(&a.source, None)?, a)?),
    };
    write_outputs(dir, &outputs)
}

/// Runs a parsed command line and returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    match cli.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| execute_inner(&cli.command)),
        None => execute_inner(&cli.command),
    }
}
