//! Subcommand implementations behind the `relief` binary.

use rayon::prelude::*;
use relief_core::camera::{annotate_angles, CameraConfig};
use relief_core::eval::{coverage_metrics, format_table, generate_scene, SceneSpec};
use relief_core::missionio::{read_config, read_paths, write_mission, Config};
use relief_core::pointcloud::{load_cloud, write_ply_ascii, write_ply_binary};
use relief_core::refine::{adjust_path, densify, lateral_standoff, RefineError};
use relief_core::{boustrophedon, DronePath, Origin, RefineConfig, SpatialIndex, Waypoint};
use std::fmt;
use std::io::Write;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing input: files, flags, configuration.
    Input(String),
    /// Valid input the algorithms could not process.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn input(context: impl fmt::Display, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

/// Non-fatal condition attached to a waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub drone_id: String,
    pub waypoint: usize,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "drone `{}` waypoint {}: {}", self.drone_id, self.waypoint, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutcome {
    pub warnings: Vec<Warning>,
    /// One-line human summary.
    pub summary: String,
}

/// Writes through a temporary file in the destination directory, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: &dyn fmt::Display| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("config {}", path.display()), e))?;
    read_config(&text).map_err(|e| input(format!("config {}", path.display()), e))
}

pub fn cmd_plan(config: &Path, output: &Path) -> Result<CommandOutcome, CliError> {
    let cfg = load_config(config)?;
    let Some(anchor) = cfg.origin else {
        return Err(CliError::Input("config: `origin` is required for planning".into()));
    };
    let origin = Origin::new(anchor).map_err(|e| input("config origin", e))?;
    let paths = boustrophedon(&cfg.plan, &cfg.camera_model, &origin).map_err(|e| input("plan", e))?;
    write_atomic(output, write_mission(&origin, &paths).as_bytes())?;
    let n: usize = paths.iter().map(|p| p.waypoints.len()).sum();
    Ok(CommandOutcome {
        warnings: Vec::new(),
        summary: format!("planned {} paths with {n} waypoints -> {}", paths.len(), output.display()),
    })
}

/// Altitude-adjusts, densifies, offsets and annotates every path.
pub fn refine_mission(
    paths: &[DronePath],
    index: &SpatialIndex,
    origin: &Origin,
    refine: &RefineConfig,
    camera: &CameraConfig,
    capture_on_inserted: bool,
) -> Result<(Vec<DronePath>, Vec<Warning>), RefineError> {
    let refined: Vec<Result<(DronePath, Vec<Warning>), RefineError>> = paths
        .par_iter()
        .map(|path| {
            let adjusted = adjust_path(path, index, origin, refine)?;
            let mut dense = densify(&adjusted, index, origin, refine)?;
            let mut warnings = Vec::new();
            let moved: Vec<Result<Waypoint, RefineError>> =
                dense.waypoints.par_iter().map(|wp| lateral_standoff(wp, index, origin, refine)).collect();
            for (i, (wp, result)) in dense.waypoints.iter_mut().zip(moved).enumerate() {
                match result {
                    Ok(w) => *wp = w,
                    Err(e @ RefineError::StandoffUnresolved { .. }) => {
                        warnings.push(Warning { drone_id: path.drone_id.clone(), waypoint: i, message: e.to_string() })
                    }
                    Err(e) => return Err(e),
                }
                if wp.inserted {
                    wp.capture = capture_on_inserted;
                }
            }
            Ok((dense, warnings))
        })
        .collect();
    let mut out = Vec::with_capacity(refined.len());
    let mut warnings = Vec::new();
    for r in refined {
        let (p, w) = r?;
        out.push(p);
        warnings.extend(w);
    }
    let annotated = annotate_angles(&out, index, camera);
    warnings.extend(annotated.warnings.into_iter().map(|w| Warning {
        drone_id: w.drone_id,
        waypoint: w.waypoint,
        message: w.message,
    }));
    Ok((annotated.paths, warnings))
}

pub fn cmd_refine(paths: &Path, cloud: &Path, config: &Path, output: &Path) -> Result<CommandOutcome, CliError> {
    let cfg = load_config(config)?;
    let doc = std::fs::read_to_string(paths).map_err(|e| input(format!("paths {}", paths.display()), e))?;
    let (doc_origin, mut drone_paths) = read_paths(&doc).map_err(|e| input(format!("paths {}", paths.display()), e))?;
    let origin = match cfg.origin {
        Some(anchor) => {
            let origin = Origin::new(anchor).map_err(|e| input("config origin", e))?;
            for path in &mut drone_paths {
                for wp in &mut path.waypoints {
                    let g = wp.gimbal;
                    let (capture, inserted) = (wp.capture, wp.inserted);
                    *wp = Waypoint::from_geo(&origin, wp.position).map_err(|e| input("waypoint", e))?;
                    wp.gimbal = g;
                    wp.capture = capture;
                    wp.inserted = inserted;
                }
            }
            origin
        }
        None => doc_origin,
    };
    let cloud_data = load_cloud(cloud, None).map_err(|e| input(format!("cloud {}", cloud.display()), e))?;
    let index = SpatialIndex::build(cloud_data).map_err(|e| input(format!("cloud {}", cloud.display()), e))?;
    let (refined, warnings) =
        refine_mission(&drone_paths, &index, &origin, &cfg.refine, &cfg.camera, cfg.capture_on_inserted)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(output, write_mission(&origin, &refined).as_bytes())?;
    let total: usize = refined.iter().map(|p| p.waypoints.len()).sum();
    let inserted: usize = refined.iter().flat_map(|p| &p.waypoints).filter(|w| w.inserted).count();
    Ok(CommandOutcome {
        summary: format!(
            "refined {} paths: {total} waypoints ({inserted} inserted), {} warnings -> {}",
            refined.len(),
            warnings.len(),
            output.display()
        ),
        warnings,
    })
}

pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.05, 0.10];

/// Returns the text table in `summary`; the JSON report goes to `output`, or
/// is returned as the second value when no output path is given.
pub fn cmd_eval(
    reconstructed: &Path,
    truth: &Path,
    thresholds: &[f64],
    label: &str,
    output: Option<&Path>,
) -> Result<(CommandOutcome, Option<String>), CliError> {
    let rec = load_cloud(reconstructed, None).map_err(|e| input(format!("cloud {}", reconstructed.display()), e))?;
    let gt = load_cloud(truth, None).map_err(|e| input(format!("cloud {}", truth.display()), e))?;
    let report = coverage_metrics(&rec, &gt, thresholds).map_err(|e| input("eval", e))?;
    let json = report.to_json();
    let table = format_table(&[(label, &report)]);
    let stdout = match output {
        Some(path) => {
            write_atomic(path, json.as_bytes())?;
            None
        }
        None => Some(json),
    };
    Ok((CommandOutcome { warnings: Vec::new(), summary: table }, stdout))
}

pub fn cmd_scene(spec: &SceneSpec, ascii: bool, output: &Path) -> Result<CommandOutcome, CliError> {
    let cloud = generate_scene(spec).map_err(|e| input("scene", e))?;
    let mut bytes = Vec::new();
    let written = if ascii { write_ply_ascii(&cloud, &mut bytes) } else { write_ply_binary(&cloud, &mut bytes) };
    written.map_err(|e| input("scene", e))?;
    write_atomic(output, &bytes)?;
    Ok(CommandOutcome {
        warnings: Vec::new(),
        summary: format!("wrote {} points -> {}", cloud.count(), output.display()),
    })
}

pub fn cmd_config_show(config: &Path) -> Result<String, CliError> {
    Ok(load_config(config)?.to_json())
}
