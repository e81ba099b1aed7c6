use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ffpoly_core::asm::write_trace_csv;
use ffpoly_core::field_synthesis::{all_losses, synthesize_from_rasters, SceneRasters};
use ffpoly_core::geojson::{
    buildings_from_geojson, buildings_to_geojson, read_json, scene_from_geojson, scene_to_geojson,
    write_json,
};
use ffpoly_core::metrics::{evaluate, DEFAULT_IOU_THRESHOLDS};
use ffpoly_core::pipeline::{polygonize, run_batch};
use ffpoly_core::raster::{rasterize_edges, rasterize_interior, rasterize_tangent_angle};
use ffpoly_core::scenegen::generate;
use ffpoly_core::{
    Error, FrameFieldGrid, InitMode, PipelineConfig, RasterGrid, Result, Scene, SceneSpec,
    TangentField,
};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const Y_INT: &str = "y_int.ffpr";
const Y_EDGE: &str = "y_edge.ffpr";
const THETA: &str = "theta.ffpr";
const EFFECTIVE_CONFIG: &str = "effective_config.json";

#[derive(Parser, Debug)]
#[command(name = "ffpoly", version, about = "Frame-field guided building polygonization")]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    cmd: Command,
}

/// Config file plus per-field overrides. Flags win over the file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Pipeline configuration JSON
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Simplification tolerance in pixels
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// ASM iterations
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Probability iso-level
    #[arg(long, global = true)]
    level: Option<f64>,
    /// Initial graph: skeleton or marching_squares
    #[arg(long, global = true)]
    init: Option<InitMode>,
    /// Worker threads (defaults to the number of CPUs)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Scene generation seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic ground-truth scene
    GenScene {
        /// Scene spec JSON (default spec when omitted)
        spec: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Rasterize a scene into y_int.ffpr, y_edge.ffpr and theta.ffpr
    Rasterize {
        scene: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Synthesize a frame field from a directory of scene rasters
    SynthField {
        rasters: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Polygonize probability maps guided by a frame field
    Polygonize {
        #[arg(long)]
        y_int: PathBuf,
        #[arg(long)]
        y_edge: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Write the per-iteration energy trace as CSV
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Compare predicted buildings with a ground-truth scene
    Eval {
        pred: PathBuf,
        gt: PathBuf,
        /// Raster size, overriding the scene's own extent
        #[arg(long, num_args = 2, value_names = ["HEIGHT", "WIDTH"])]
        extent: Option<Vec<usize>>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate every training loss for a field against scene rasters
    Losses {
        rasters: PathBuf,
        #[arg(long)]
        field: PathBuf,
        /// Predicted interior map (ground truth when omitted)
        #[arg(long)]
        pred_int: Option<PathBuf>,
        /// Predicted edge map (ground truth when omitted)
        #[arg(long)]
        pred_edge: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Full pipeline on a batch of scenes, one GeoJSON and metrics file each
    Run {
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: kind=usage message={}", one_line(msg));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: kind={} message={}", e.kind(), one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}

fn effective_config(o: &Overrides) -> Result<PipelineConfig> {
    let mut cfg: PipelineConfig = match &o.config {
        Some(path) => serde_json::from_value(read_json(path)?)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
        None => PipelineConfig::default(),
    };
    if let Some(t) = o.tolerance {
        cfg.simplify.tolerance = t;
    }
    if let Some(n) = o.iterations {
        cfg.energy.iterations = n;
    }
    if let Some(l) = o.level {
        cfg.energy.level = l;
    }
    if let Some(m) = o.init {
        cfg.init = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn echo_config(dir: &Path, cfg: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(dir.join(EFFECTIVE_CONFIG), &serde_json::to_value(cfg)?)
}

fn load_rasters(dir: &Path) -> Result<SceneRasters> {
    Ok(SceneRasters {
        y_int: RasterGrid::load(dir.join(Y_INT))?,
        y_edge: RasterGrid::load(dir.join(Y_EDGE))?,
        tangent: TangentField::from_grid(&RasterGrid::load(dir.join(THETA))?)?,
    })
}

fn load_scene(path: &Path) -> Result<Scene> {
    let scene = scene_from_geojson(&read_json(path)?, None)?;
    scene.validate()?;
    Ok(scene)
}

fn metrics_json(pred: &ffpoly_core::BuildingSet, gt: &Scene) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(evaluate(pred, gt, &DEFAULT_IOU_THRESHOLDS)?)?)
}

fn run(cli: Cli) -> Result<()> {
    let workers = cli.opts.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    if workers == 0 {
        return Err(Error::InvalidInput("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;

    match cli.cmd {
        Command::GenScene { spec, out } => {
            let mut spec: SceneSpec = match spec {
                Some(path) => serde_json::from_value(read_json(&path)?)
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
                None => SceneSpec::default(),
            };
            if let Some(seed) = cli.opts.seed {
                spec.seed = seed;
            }
            let scene = generate(&spec)?;
            std::fs::create_dir_all(parent_dir(&out))?;
            write_json(&out, &scene_to_geojson(&scene))
        }
        Command::Rasterize { scene, out_dir } => {
            let cfg = effective_config(&cli.opts)?;
            let scene = load_scene(&scene)?;
            let width = cfg.synthesis.edge_width;
            echo_config(&out_dir, &cfg)?;
            rasterize_interior(&scene).save(out_dir.join(Y_INT))?;
            rasterize_edges(&scene, width)?.save(out_dir.join(Y_EDGE))?;
            rasterize_tangent_angle(&scene, width)?.to_grid().save(out_dir.join(THETA))
        }
        Command::SynthField { rasters, out } => {
            let cfg = effective_config(&cli.opts)?;
            let gt = load_rasters(&rasters)?;
            let result = pool.install(|| synthesize_from_rasters(&gt, &cfg.synthesis, &cfg.loss))?;
            echo_config(parent_dir(&out), &cfg)?;
            result.field.grid().save(&out)
        }
        Command::Polygonize {
            y_int,
            y_edge,
            field,
            out,
            trace,
        } => {
            let cfg = effective_config(&cli.opts)?;
            let y_int = RasterGrid::load(&y_int)?;
            let y_edge = RasterGrid::load(&y_edge)?;
            let field = FrameFieldGrid::new(RasterGrid::load(&field)?)?;
            let output = pool.install(|| polygonize(&y_int, &y_edge, &field, &cfg))?;
            echo_config(parent_dir(&out), &cfg)?;
            write_json(&out, &buildings_to_geojson(&output.buildings))?;
            if let Some(path) = trace {
                std::fs::create_dir_all(parent_dir(&path))?;
                write_trace_csv(&output.trace, BufWriter::new(File::create(path)?))?;
            }
            Ok(())
        }
        Command::Eval {
            pred,
            gt,
            extent,
            out,
        } => {
            let extent = extent.map(|e| (e[0], e[1]));
            let gt = scene_from_geojson(&read_json(&gt)?, extent)?;
            gt.validate()?;
            let pred = buildings_from_geojson(&read_json(&pred)?)?;
            let report = metrics_json(&pred, &gt)?;
            std::fs::create_dir_all(parent_dir(&out))?;
            write_json(&out, &report)
        }
        Command::Losses {
            rasters,
            field,
            pred_int,
            pred_edge,
            out,
        } => {
            let cfg = effective_config(&cli.opts)?;
            let gt = load_rasters(&rasters)?;
            let field = FrameFieldGrid::new(RasterGrid::load(&field)?)?;
            let yhat_int = match pred_int {
                Some(p) => RasterGrid::load(p)?,
                None => gt.y_int.clone(),
            };
            let yhat_edge = match pred_edge {
                Some(p) => RasterGrid::load(p)?,
                None => gt.y_edge.clone(),
            };
            let losses = all_losses(&gt, &yhat_int, &yhat_edge, &field, cfg.loss.alpha)?;
            let map: serde_json::Map<String, serde_json::Value> =
                losses.iter().map(|(k, v)| (k.to_string(), v.into())).collect();
            echo_config(parent_dir(&out), &cfg)?;
            write_json(&out, &serde_json::Value::Object(map))
        }
        Command::Run { scenes, out_dir } => {
            let cfg = effective_config(&cli.opts)?;
            let loaded = scenes.iter().map(|p| load_scene(p)).collect::<Result<Vec<_>>>()?;
            let results = run_batch(&loaded, &cfg, workers)?;
            echo_config(&out_dir, &cfg)?;
            for ((path, scene), result) in scenes.iter().zip(&loaded).zip(results) {
                let output = result?;
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| Error::InvalidInput(format!("bad scene path {}", path.display())))?;
                write_json(
                    out_dir.join(format!("{stem}.buildings.geojson")),
                    &buildings_to_geojson(&output.buildings),
                )?;
                write_json(
                    out_dir.join(format!("{stem}.metrics.json")),
                    &metrics_json(&output.buildings, scene)?,
                )?;
            }
            Ok(())
        }
    }
}
