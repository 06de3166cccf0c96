//! Command-line front end: `generate`, `turntable`, `validate` and `serve`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::backend::ToyServer;
use crate::camera::{viewpoint_to_camera, Viewpoint, DEFAULT_DISTANCE, DEFAULT_FOV_DEG};
use crate::geometry::obj::{mtl_diffuse_map, write_mtl, write_obj};
use crate::geometry::{bake_texel_geometry, load_mesh, normalize_mesh};
use crate::pipeline::{run_full, BackendSelector, PipelineConfig, RunReport};
use crate::raster::{rasterize, render_view};
use crate::texstate::{TextureAtlas, UNPAINTED_COLOR};

pub const TEXTURE_FILE: &str = "texture.png";
pub const OBJ_FILE: &str = "model.obj";
pub const MTL_FILE: &str = "model.mtl";
pub const REPORT_FILE: &str = "report.json";
const MATERIAL: &str = "painted";

#[derive(Debug, Parser)]
#[command(name = "meshpaint", version, about = "Text-driven progressive mesh texturing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Texture a mesh and export texture, OBJ+MTL and a run report.
    Generate(GenerateArgs),
    /// Render a textured mesh from evenly spaced azimuths.
    Turntable(TurntableArgs),
    /// Check that a mesh loads and has a usable UV atlas.
    Validate(ValidateArgs),
    /// Serve the toy backend over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Triangulated OBJ with texture coordinates.
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub prompt: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// `local` or the base URL of a remote backend.
    #[arg(long)]
    pub backend: Option<BackendSelector>,
    /// Drawn from the clock when absent, and recorded in the report.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub image_res: Option<usize>,
    #[arg(long)]
    pub tex_res: Option<usize>,
    /// Strength for regenerated pixels during generation.
    #[arg(long)]
    pub gamma_g: Option<f64>,
    /// Strength for regenerated pixels during refinement.
    #[arg(long)]
    pub gamma_r: Option<f64>,
    /// Maximum number of refinement views (out of 36 candidates).
    #[arg(long)]
    pub refine_views: Option<usize>,
    /// Diffusion steps per view.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Write per-view depth, similarity, mask and image PNGs to `<out>/debug`.
    #[arg(long)]
    pub debug_dumps: bool,
    /// Generate every covered pixel and overwrite every visible texel.
    #[arg(long)]
    pub disable_partition: bool,
    /// Treat better-seen painted texels as kept instead of regenerating them.
    #[arg(long)]
    pub disable_update: bool,
    /// Refuse to run without an explicit seed.
    #[arg(long)]
    pub deterministic: bool,
    /// TOML or JSON file with pipeline settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TurntableArgs {
    /// Directory written by `generate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "turntable")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub frames: usize,
    #[arg(long, default_value_t = 20.0)]
    pub elevation: f64,
    /// Azimuth of the first frame in degrees.
    #[arg(long, default_value_t = 0.0)]
    pub start: f64,
    #[arg(long, default_value_t = 256)]
    pub res: usize,
    #[arg(long, default_value_t = DEFAULT_DISTANCE)]
    pub distance: f64,
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    pub fov: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub tex_res: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8765")]
    pub addr: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
    #[error(transparent)]
    TexState(#[from] crate::texstate::TexStateError),
    #[error(transparent)]
    Image(#[from] crate::imageio::ImageError),
    #[error(transparent)]
    Camera(#[from] crate::camera::CameraError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a config file, TOML unless the extension is `.json`.
pub fn load_config_file(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Resolves the pipeline configuration: flags over file over defaults.
pub fn resolve_config(args: &GenerateArgs) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => load_config_file(path)?,
        None => PipelineConfig::default(),
    };
    macro_rules! overlay {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag.clone() { cfg.$field = v; })*
        };
    }
    overlay!(prompt => prompt, backend => backend, image_res => image_resolution,
        tex_res => texture_resolution, gamma_g => gamma_g, gamma_r => gamma_r,
        refine_views => n_refine_select, steps => steps);
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    cfg.disable_partition |= args.disable_partition;
    cfg.disable_update |= args.disable_update;
    if args.debug_dumps {
        cfg.debug_dir = Some(args.out.join("debug"));
    }
    if args.deterministic && cfg.seed.is_none() {
        return Err(CliError::Usage("--deterministic requires a seed (--seed or config)".into()));
    }
    if cfg.prompt.trim().is_empty() {
        return Err(CliError::Usage("a prompt is required (--prompt or config)".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(out: &Path, report: &RunReport) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    report.write_json(out.join(REPORT_FILE))?;
    Ok(())
}

fn export(out: &Path, mesh: &crate::geometry::Mesh, atlas: &TextureAtlas) -> Result<(), CliError> {
    atlas.save_png(out.join(TEXTURE_FILE))?;
    write_obj(mesh, out.join(OBJ_FILE), Some((MTL_FILE, MATERIAL)))?;
    write_mtl(out.join(MTL_FILE), MATERIAL, TEXTURE_FILE)?;
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let cfg = match resolve_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let mut report = RunReport::new(&PipelineConfig::default(), args.seed.unwrap_or(0), String::new());
            report.errors.push(e.to_string());
            write_report(&args.out, &report)?;
            return Err(e);
        }
    };
    match run_full(&args.mesh, &cfg) {
        Ok(run) => {
            write_report(&args.out, &run.report)?;
            export(&args.out, &run.mesh, &run.atlas)?;
            println!(
                "textured {} views, coverage {:.4}, outputs in {}",
                run.report.total_views,
                run.report.final_coverage,
                args.out.display()
            );
            Ok(())
        }
        Err(failure) => {
            write_report(&args.out, &failure.report)?;
            // Keep what was painted before the failure for inspection.
            if let (Some(mesh), Some(atlas)) = (&failure.mesh, &failure.atlas) {
                export(&args.out, mesh, atlas)?;
            }
            Err(failure.error.into())
        }
    }
}

/// Azimuths of `frames` evenly spaced turntable frames.
pub fn turntable_azimuths(frames: usize, start: f64) -> Vec<f64> {
    (0..frames).map(|k| start + 360.0 * k as f64 / frames as f64).collect()
}

pub fn cmd_turntable(args: &TurntableArgs) -> Result<(), CliError> {
    if args.frames == 0 {
        return Err(CliError::Usage("--frames must be at least 1".into()));
    }
    let obj = args.input.join(OBJ_FILE);
    let mesh = normalize_mesh(&load_mesh(&obj)?)?;
    let mtl = args.input.join(MTL_FILE);
    let texture_name = fs::read_to_string(&mtl)
        .ok()
        .and_then(|t| mtl_diffuse_map(&t))
        .unwrap_or_else(|| TEXTURE_FILE.to_string());
    let atlas = TextureAtlas::load_png(args.input.join(texture_name))?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    for (k, theta) in turntable_azimuths(args.frames, args.start).into_iter().enumerate() {
        let v = Viewpoint::new(theta, args.elevation, args.distance)?;
        let camera = viewpoint_to_camera(&v, args.res, args.fov)?;
        let gbuffer = rasterize(&mesh, &camera);
        render_view(&mesh, &atlas, &gbuffer, UNPAINTED_COLOR).save_png(args.out.join(format!("frame_{k:03}.png")))?;
    }
    println!("wrote {} frames to {}", args.frames, args.out.display());
    Ok(())
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&args.mesh)?;
    let normalized = normalize_mesh(&mesh)?;
    let geo = bake_texel_geometry(&normalized, args.tex_res)?;
    println!("vertices: {}", mesh.vertex_count());
    println!("faces: {}", mesh.face_count());
    println!("texture resolution: {}", args.tex_res);
    println!("valid texels: {}", geo.valid_count());
    println!("interior texels: {}", geo.interior_count());
    println!("uv coverage: {:.6}", geo.coverage());
    println!("overlapping texels: {}", geo.overlap_count());
    if geo.overlap_count() > 0 {
        println!("warning: UV charts overlap, first face wins");
    }
    Ok(())
}

pub fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let server = ToyServer::start(&args.addr).map_err(io_err(Path::new(&args.addr)))?;
    println!("toy backend listening on {}", server.url());
    server.wait();
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Turntable(a) => cmd_turntable(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

/// Parses the process arguments, runs, and maps errors to a failing exit
/// status.
pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match run(&Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
