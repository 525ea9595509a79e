use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sflight::baker::{bake_with_threads, BakeConfig};
use sflight::color::DisplayImage;
use sflight::compare::{alpha_mask, compare_display};
use sflight::dataset::{write_dataset, DatasetOptions};
use sflight::lightfield::FieldGeometry;
use sflight::render::{render_png, FrameRequest, SamplingMode};
use sflight::scene::Scene;
use sflight::ssim::SsimParams;
use sflight::tracer::PreparedScene;
use sflight::truth::render_ground_truth;
use sflight::{lplf, scenes, Vector};

#[derive(Parser)]
#[command(name = "sflight", version, about = "Bake and render spherical light fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Path trace a scene into a light-field file.
    Bake(BakeArgs),
    /// Render a frame from a baked field.
    Render(RenderArgs),
    /// Path trace a reference frame directly.
    Truth(TruthArgs),
    /// Compare two PNGs (SSIM and MAE) over a mask.
    Compare(CompareArgs),
    /// Write paired light-field and reference frames for random poses.
    Dataset(DatasetArgs),
    /// Serve frames over HTTP.
    Serve(ServeArgs),
    /// Write a built-in scene as OBJ plus material table.
    Scene(SceneArgs),
}

#[derive(Args)]
struct BakeArgs {
    /// OBJ file (materials from the `.mat` file beside it) or `builtin:desk`, `builtin:furnace`.
    #[arg(long)]
    scene: String,
    #[arg(long)]
    out: PathBuf,
    /// Origin lattice size.
    #[arg(long)]
    m: u32,
    /// Direction lattice size.
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value = "0,0,0", value_parser = parse_vec3, allow_hyphen_values = true)]
    center: Vector,
    /// Store only origins in the upper (+z) hemisphere.
    #[arg(long)]
    hemisphere: bool,
    #[arg(long, default_value_t = BakeConfig::DEFAULT_SPP)]
    spp: u32,
    #[arg(long, default_value_t = BakeConfig::DEFAULT_DEPTH)]
    depth: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ViewArgs {
    /// eye,look_at,up as nine comma-separated numbers.
    #[arg(long, value_parser = parse_pose, required_unless_present = "request", allow_hyphen_values = true)]
    pose: Option<[Vector; 3]>,
    #[arg(long, default_value_t = 40.0)]
    fov: f64,
    #[arg(long, default_value = "256x256", value_parser = parse_size)]
    size: (u32, u32),
    /// JSON pose as accepted by the server's /frame endpoint; overrides the other view flags.
    #[arg(long)]
    request: Option<PathBuf>,
}

impl ViewArgs {
    fn request(&self, mode: SamplingMode) -> Result<FrameRequest> {
        if let Some(path) = &self.request {
            let body = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            return sflight_server::parse_pose(&body).map_err(|e| anyhow::anyhow!("{}: {}", path.display(), e.message));
        }
        let [eye, look_at, up] = self.pose.expect("clap requires --pose");
        let req = FrameRequest {
            eye: eye.to_array(),
            look_at: look_at.to_array(),
            up: up.to_array(),
            fov_deg: self.fov,
            width: self.size.0,
            height: self.size.1,
            mode,
        };
        req.camera()?;
        Ok(req)
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    view: ViewArgs,
    #[arg(long, default_value = "filtered")]
    mode: SamplingMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TruthArgs {
    #[arg(long)]
    scene: String,
    #[command(flatten)]
    view: ViewArgs,
    #[arg(long, default_value_t = 1024)]
    spp: u32,
    #[arg(long, default_value_t = BakeConfig::DEFAULT_DEPTH)]
    depth: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MaskSource {
    /// Pixels where the alpha of --a is opaque.
    FromAlpha,
    /// Every pixel.
    None,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, value_enum, default_value = "from-alpha")]
    mask: MaskSource,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long)]
    scene: String,
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 10)]
    views: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Eye distance range in multiples of the field radius.
    #[arg(long, default_value = "2,3.5", value_parser = parse_range)]
    distance: (f64, f64),
    /// Eye elevation range in degrees above the horizontal plane.
    #[arg(long, default_value = "10,60", value_parser = parse_range, allow_hyphen_values = true)]
    elevation: (f64, f64),
    #[arg(long, default_value_t = 40.0)]
    fov: f64,
    #[arg(long, default_value = "256x256", value_parser = parse_size)]
    size: (u32, u32),
    /// Samples per pixel of the reference frames.
    #[arg(long, default_value_t = 1024)]
    spp: u32,
    #[arg(long, default_value_t = BakeConfig::DEFAULT_DEPTH)]
    depth: u32,
    #[arg(long, default_value = "filtered")]
    mode: SamplingMode,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Concurrent renders (default: number of cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Allowed browser origin; repeatable, `*` for any. Default: localhost only.
    #[arg(long = "allow-origin")]
    allow_origin: Vec<String>,
}

#[derive(Args)]
struct SceneArgs {
    /// `desk` or `furnace`.
    name: String,
    /// OBJ output; the material table goes beside it with a `.mat` extension.
    #[arg(long)]
    out: PathBuf,
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| f64::from_str(p.trim()).map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    if parts.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got {}", parts.len()));
    }
    if parts.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(parts)
}

fn parse_vec3(s: &str) -> Result<Vector, String> {
    let v = parse_numbers(s, 3)?;
    Ok(Vector::new(v[0], v[1], v[2]))
}

fn parse_pose(s: &str) -> Result<[Vector; 3], String> {
    let v = parse_numbers(s, 9)?;
    Ok([
        Vector::new(v[0], v[1], v[2]),
        Vector::new(v[3], v[4], v[5]),
        Vector::new(v[6], v[7], v[8]),
    ])
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: u32 = w.parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: u32 = h.parse().map_err(|_| format!("bad height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

fn load_scene(spec: &str) -> Result<Scene> {
    match spec.strip_prefix("builtin:") {
        Some("desk") => Ok(scenes::desk()),
        Some("furnace") => Ok(scenes::furnace(0.5, 1.0)),
        Some(other) => bail!("unknown built-in scene `{other}` (desk, furnace)"),
        None => Scene::load(spec).with_context(|| format!("loading scene {spec}")),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bake(a) => {
            let scene = load_scene(&a.scene)?;
            let mut cfg = BakeConfig::new(FieldGeometry::new(a.m, a.n, a.radius, a.center, a.hemisphere));
            cfg.spp = a.spp;
            cfg.max_depth = a.depth;
            cfg.seed = a.seed;
            let rows = cfg.geometry.stored_rows() as u64;
            let done = AtomicU64::new(0);
            let step = (rows / 20).max(1);
            let progress = |n: u64| {
                let d = done.fetch_add(n, Ordering::Relaxed) + n;
                if d % step == 0 || d == rows {
                    eprintln!("baked {d}/{rows} origin rows");
                }
            };
            let start = Instant::now();
            let (lf, report) = bake_with_threads(&scene, &cfg, &progress, a.threads)?;
            let bytes = lplf::save(&lf, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
            eprintln!(
                "wrote {} ({bytes} bytes, {} texels, {} degenerate, {} clamped samples) in {:.1}s",
                a.out.display(),
                report.texels,
                report.degenerate_texels,
                report.clamped_samples,
                start.elapsed().as_secs_f64()
            );
        }
        Command::Render(a) => {
            let lf = lplf::load(&a.field).with_context(|| format!("loading {}", a.field.display()))?;
            let req = a.view.request(a.mode)?;
            let (png, frame) = render_png(&lf, &req)?;
            write(&a.out, &png)?;
            eprintln!("coverage {:.2}%", frame.coverage_percent());
        }
        Command::Truth(a) => {
            let scene = PreparedScene::new(load_scene(&a.scene)?);
            let req = a.view.request(SamplingMode::Filtered)?;
            let img = render_ground_truth(&scene, &req.camera()?, a.spp, a.depth, a.seed);
            write(&a.out, &img.to_png(None)?)?;
        }
        Command::Compare(a) => {
            let ia = DisplayImage::open(&a.a).with_context(|| format!("reading {}", a.a.display()))?;
            let ib = DisplayImage::open(&a.b).with_context(|| format!("reading {}", a.b.display()))?;
            let mask = match a.mask {
                MaskSource::FromAlpha => alpha_mask(&ia),
                MaskSource::None => vec![true; ia.rgb.len()],
            };
            let report = compare_display(&ia, &ib, &mask, &SsimParams::default())?;
            let json = serde_json::to_string_pretty(&report)?;
            match a.out {
                Some(p) => write(&p, json.as_bytes())?,
                None => println!("{json}"),
            }
        }
        Command::Dataset(a) => {
            let scene = PreparedScene::new(load_scene(&a.scene)?);
            let lf = lplf::load(&a.field).with_context(|| format!("loading {}", a.field.display()))?;
            let opts = DatasetOptions {
                views: a.views,
                seed: a.seed,
                distance: a.distance,
                elevation_deg: a.elevation,
                fov_deg: a.fov,
                width: a.size.0,
                height: a.size.1,
                spp: a.spp,
                max_depth: a.depth,
                mode: a.mode,
                ..Default::default()
            };
            let views = a.views;
            write_dataset(&scene, &lf, &opts, &a.out, |k| eprintln!("view {k}/{views}"))?;
        }
        Command::Serve(a) => {
            let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let cors = if a.allow_origin.is_empty() {
                sflight_server::Cors::Localhost
            } else {
                sflight_server::Cors::Origins(a.allow_origin)
            };
            let addr = SocketAddr::new(a.host, a.port);
            tokio::runtime::Runtime::new()?.block_on(sflight_server::serve(addr, a.field, workers, cors, |bound| {
                eprintln!("listening on http://{bound}");
            }))?;
        }
        Command::Scene(a) => {
            let scene = match a.name.as_str() {
                "desk" => scenes::desk(),
                "furnace" => scenes::furnace(0.5, 1.0),
                other => bail!("unknown built-in scene `{other}` (desk, furnace)"),
            };
            scene.save(&a.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
