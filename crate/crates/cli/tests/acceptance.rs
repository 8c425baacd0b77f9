//! Acceptance criteria A1-A8. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relief_cli::refine_mission;
use relief_core::camera::{compute_pitch, hemisphere_target, CameraConfig, GimbalAngles};
use relief_core::eval::{
    coverage_metrics, generate_scene, surface_coverage, SceneKind, SceneSpec, SurfaceCoverage, VisibilityConfig,
};
use relief_core::pointcloud::write_ply_binary;
use relief_core::refine::terrain_column;
use relief_core::{
    boustrophedon, read_paths, write_mission, CameraModel, DronePath, GeoPoint, LocalPoint, Origin, PlanConfig,
    PointCloud, RefineConfig, SpatialIndex, Waypoint,
};
use sha2::{Digest, Sha256};
use std::process::Command;
use std::time::Instant;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn origin() -> Origin {
    Origin::new(GeoPoint { lat: 25.2, lon: 55.3, alt: 5.0 }).unwrap()
}

// A1: indexed range queries equal brute force.
fn a1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let mut mismatches = 0usize;
    let mut queries = 0usize;
    for _ in 0..100 {
        let n = rng.random_range(1..=2000);
        let extent = rng.random_range(1.0..100.0);
        let cloud = oracle::random_cloud(&mut rng, n, extent);
        let pts = cloud.points().to_vec();
        let index = SpatialIndex::build(cloud).unwrap();
        for _ in 0..100 {
            let c = LocalPoint::new(
                rng.random_range(-1.2 * extent..1.2 * extent),
                rng.random_range(-1.2 * extent..1.2 * extent),
                rng.random_range(-0.4 * extent..0.4 * extent),
            );
            let r = rng.random_range(0.001..0.5) * extent;
            mismatches +=
                (index.query_disk_xy(c.x, c.y, r).unwrap().indices != oracle::disk(&pts, c.x, c.y, r)) as usize;
            mismatches += (index.query_sphere(&c, r).unwrap().indices != oracle::sphere(&pts, &c, r)) as usize;
            queries += 2;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(mismatches == 0 && secs < 60.0, format!("{queries} queries, {mismatches} mismatches, {secs:.1} s"))
}

struct Fixture {
    pts: Vec<LocalPoint>,
    index: SpatialIndex,
    refine: RefineConfig,
    camera: CameraConfig,
    paths: Vec<DronePath>,
}

/// Twenty scenes of varied relief, each with a planned mission refined
/// through the full pipeline.
fn fixtures() -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let kinds = [SceneKind::Plane, SceneKind::Ramp, SceneKind::BoxOnPlane, SceneKind::Pile, SceneKind::Staircase];
    (0..20)
        .map(|i| {
            let mut spec =
                SceneSpec::new(kinds[i % 5], rng.random_range(30.0..60.0), rng.random_range(30.0..60.0), 0.0, 0.0);
            spec.height = rng.random_range(2.0..15.0);
            spec.density = rng.random_range(0.5..3.0);
            spec.jitter = rng.random_range(0.0..1.0);
            spec.seed = rng.random();
            spec.steps = rng.random_range(2..6);
            let cloud = generate_scene(&spec).unwrap();
            let pts = cloud.points().to_vec();
            let index = SpatialIndex::build(cloud).unwrap();
            let mut refine = RefineConfig::with_z_offset(rng.random_range(4.0..20.0));
            refine.tol0 = rng.random_range(0.1..1.0);
            refine.dtol = rng.random_range(0.1..1.0);
            refine.delta_z = rng.random_range(1.0..4.0);
            let camera =
                CameraConfig { r0: rng.random_range(0.5..3.0), dr: rng.random_range(0.25..2.0), ..Default::default() };
            let (hw, hd) = (spec.width / 2.0 - 1.0, spec.depth / 2.0 - 1.0);
            let plan = PlanConfig {
                altitude: 20.0,
                sidelap: 0.7,
                frontlap: 0.7,
                n_drones: 2,
                roi: vec![[-hw, -hd], [hw, -hd], [hw, hd], [-hw, hd]],
            };
            let planned = boustrophedon(&plan, &CameraModel::default(), &origin()).unwrap();
            let (paths, _) = refine_mission(&planned, &index, &origin(), &refine, &camera, true).unwrap();
            Fixture { pts, index, refine, camera, paths }
        })
        .collect()
}

// A2: every refined altitude equals the brute-force column mean plus offset.
fn a2(fx: &[Fixture]) -> Verdict {
    let (mut checked, mut bad) = (0usize, 0usize);
    let mut worst = 0.0f64;
    for f in fx {
        for wp in f.paths.iter().flat_map(|p| &p.waypoints) {
            let col = oracle::column(&f.pts, wp.local.x, wp.local.y, &f.refine).unwrap();
            let err = (wp.local.z - (col.mean_z + f.refine.z_offset)).abs();
            worst = worst.max(err);
            let used = terrain_column(&f.index, wp.local.x, wp.local.y, &f.refine).unwrap().tolerance;
            let minimal = used == col.tolerance
                && (used <= f.refine.tol0
                    || oracle::disk(&f.pts, wp.local.x, wp.local.y, used - f.refine.dtol).is_empty());
            bad += (err > 1e-9 || !minimal) as usize;
            checked += 1;
        }
    }
    verdict(bad == 0, format!("{checked} waypoints on 20 scenes, {bad} violations, max |dz| {worst:.2e} m"))
}

// A3: view targets and angles against the brute-force hemisphere search.
fn a3(fx: &[Fixture]) -> Verdict {
    let (mut checked, mut bad) = (0usize, 0usize);
    let mut worst = 0.0f64;
    for f in fx {
        for path in &f.paths {
            for wp in &path.waypoints {
                checked += 1;
                let g: GimbalAngles = wp.gimbal.unwrap();
                let Some(t) = oracle::target(&f.pts, &wp.local, &f.camera) else {
                    bad += (g.pitch_deg != -90.0) as usize;
                    continue;
                };
                let got = hemisphere_target(&wp.local, &f.index, &f.camera).unwrap();
                let target = f.pts[t.index];
                let h = oracle::below(&f.pts, &wp.local, t.radius);
                let closest = h.iter().all(|&j| (target.z - t.mean_z).abs() <= (f.pts[j].z - t.mean_z).abs());
                let previous_empty = t.radius - f.camera.dr < f.camera.r0
                    || oracle::below(&f.pts, &wp.local, t.radius - f.camera.dr).is_empty();
                let valid = got.index == t.index
                    && got.radius == t.radius
                    && target.z < wp.local.z
                    && target.distance(&wp.local) <= t.radius
                    && previous_empty
                    && closest
                    && (-90.0..=0.0).contains(&g.pitch_deg)
                    && g.is_valid()
                    && (g.pitch_deg - compute_pitch(&wp.local, &target)).abs() < 1e-12;
                let v = [target.x - wp.local.x, target.y - wp.local.y, target.z - wp.local.z];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let d = g.direction();
                let mut round_trip = true;
                if v[0].hypot(v[1]) >= f.camera.eps_horizontal {
                    for a in 0..3 {
                        let e = (d[a] - v[a] / n).abs();
                        worst = worst.max(e);
                        round_trip &= e <= 1e-6;
                    }
                } else {
                    // Straight down: yaw follows the path, pitch is nadir.
                    round_trip = (g.pitch_deg + 90.0).abs() < 1e-6;
                }
                bad += !(valid && round_trip) as usize;
            }
        }
    }
    verdict(bad == 0, format!("{checked} waypoints, {bad} violations, max direction error {worst:.2e}"))
}

// A4: metrics against an O(n^2) oracle, plus the rigid-shift fixture.
fn a4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let taus = [0.05, 0.10, 0.25, 0.5];
    let mut bad = 0usize;
    for _ in 0..30 {
        let (na, nb) = (rng.random_range(1..=2000), rng.random_range(1..=2000));
        let a = oracle::random_cloud(&mut rng, na, 3.0);
        let b = oracle::random_cloud(&mut rng, nb, 3.0);
        let r = coverage_metrics(&a, &b, &taus).unwrap();
        let da: Vec<f64> = a.points().iter().map(|p| oracle::nearest_distance(b.points(), p)).collect();
        let db: Vec<f64> = b.points().iter().map(|p| oracle::nearest_distance(a.points(), p)).collect();
        for (k, &t) in taus.iter().enumerate() {
            let p = da.iter().filter(|&&d| d <= t).count() as f64 / da.len() as f64;
            let q = db.iter().filter(|&&d| d <= t).count() as f64 / db.len() as f64;
            let f = if p + q > 0.0 { 2.0 * p * q / (p + q) } else { 0.0 };
            bad += (r.precision[k] != p || r.recall[k] != q || r.f1[k] != f) as usize;
        }
    }
    let truth = generate_scene(&SceneSpec::new(SceneKind::Plane, 20.0, 20.0, 0.0, 4.0)).unwrap();
    let shifted =
        PointCloud::new(truth.points().iter().map(|p| LocalPoint::new(p.x, p.y, p.z + 0.07)).collect()).unwrap();
    let r = coverage_metrics(&shifted, &truth, &[0.05, 0.10]).unwrap();
    let step = r.precision == [0.0, 1.0] && r.recall == [0.0, 1.0] && r.f1 == [0.0, 1.0];
    verdict(
        bad == 0 && step,
        format!("30 cloud pairs x 4 thresholds, {bad} mismatches; 0.07 m shift P/R/F1 {:?}", r.f1),
    )
}

/// Capturing waypoints as viewpoints. Unannotated ones look straight down,
/// yawed along the direction of travel.
fn viewpoints(paths: &[DronePath]) -> Vec<Waypoint> {
    let mut out = Vec::new();
    for path in paths {
        let n = path.waypoints.len();
        for (i, wp) in path.waypoints.iter().enumerate() {
            if !wp.capture {
                continue;
            }
            let mut v = wp.clone();
            if v.gimbal.is_none() {
                let (a, b) = if i + 1 < n { (i, i + 1) } else { (i - 1, i) };
                let (p, q) = (path.waypoints[a].local, path.waypoints[b].local);
                let yaw = (q.x - p.x).atan2(q.y - p.y).to_degrees();
                v.gimbal = Some(GimbalAngles { yaw_deg: if yaw <= -180.0 { 180.0 } else { yaw }, pitch_deg: -90.0 });
            }
            out.push(v);
        }
    }
    out
}

struct Comparison {
    baseline: SurfaceCoverage,
    refined: SurfaceCoverage,
    images: (usize, usize),
}

/// Nadir mission at a fixed altitude versus the same mission refined against
/// a sparser, independently sampled prior scan of the scene.
fn compare(kind: SceneKind, height: f64) -> Comparison {
    let altitude = 40.0;
    let truth_spec = SceneSpec { seed: 1, ..SceneSpec::new(kind, 60.0, 60.0, height, 4.0) };
    let prior_spec = SceneSpec { seed: 2, jitter: 0.5, ..SceneSpec::new(kind, 60.0, 60.0, height, 1.0) };
    let truth = generate_scene(&truth_spec).unwrap();
    let prior = SpatialIndex::build(generate_scene(&prior_spec).unwrap()).unwrap();
    let plan = PlanConfig {
        altitude,
        sidelap: 0.7,
        frontlap: 0.7,
        n_drones: 2,
        roi: vec![[-30.0, -30.0], [30.0, -30.0], [30.0, 30.0], [-30.0, 30.0]],
    };
    let camera_model = CameraModel::default();
    let planned = boustrophedon(&plan, &camera_model, &origin()).unwrap();
    // Same clearance over the highest structure as the fixed-altitude flight.
    let refine = RefineConfig::with_z_offset(altitude - height);
    let (refined, _) = refine_mission(&planned, &prior, &origin(), &refine, &CameraConfig::default(), false).unwrap();
    let (base_views, refined_views) = (viewpoints(&planned), viewpoints(&refined));
    let cfg = VisibilityConfig { camera: camera_model, ..Default::default() };
    Comparison {
        baseline: surface_coverage(&base_views, &truth, &cfg).unwrap(),
        refined: surface_coverage(&refined_views, &truth, &cfg).unwrap(),
        images: (base_views.len(), refined_views.len()),
    }
}

fn pct(x: Option<f64>) -> String {
    x.map(|v| format!("{:.1}%", 100.0 * v)).unwrap_or_else(|| "n/a".into())
}

// A5: vertical-surface observation gain on the box scene, parity on the pile.
fn a5() -> Verdict {
    let boxed = compare(SceneKind::BoxOnPlane, 15.0);
    let pile = compare(SceneKind::Pile, 5.0);
    let box_gain = boxed.refined.vertical_fraction.unwrap_or(0.0) - boxed.baseline.vertical_fraction.unwrap_or(0.0);
    // The mound has no vertical class at this height; compare what it has.
    let (pile_metric, pile_b, pile_r) = match (pile.baseline.vertical_fraction, pile.refined.vertical_fraction) {
        (Some(b), Some(r)) => ("vertical", b, r),
        _ => ("all-surface", pile.baseline.total_fraction(), pile.refined.total_fraction()),
    };
    let budget = boxed.images.0 == boxed.images.1 && pile.images.0 == pile.images.1;
    let pass = budget && box_gain >= 0.25 && (pile_r - pile_b).abs() <= 0.10;
    verdict(
        pass,
        format!(
            "box vertical {} -> {} (+{:.1} pp, horizontal {} -> {}); pile {pile_metric} {:.1}% -> {:.1}% ({:+.1} pp); images {}/{} and {}/{}",
            pct(boxed.baseline.vertical_fraction),
            pct(boxed.refined.vertical_fraction),
            100.0 * box_gain,
            pct(boxed.baseline.horizontal_fraction),
            pct(boxed.refined.horizontal_fraction),
            100.0 * pile_b,
            100.0 * pile_r,
            100.0 * (pile_r - pile_b),
            boxed.images.0,
            boxed.images.1,
            pile.images.0,
            pile.images.1,
        ),
    )
}

/// `n` waypoints in `drones` serpentine paths spread over a square of side `side`.
fn grid_paths(n: usize, drones: usize, side: f64) -> Vec<DronePath> {
    let o = origin();
    let per = n / drones;
    let cols = (per as f64).sqrt().ceil() as usize;
    let strip = side / drones as f64;
    (0..drones)
        .map(|d| {
            let rows = per.div_ceil(cols);
            let wps = (0..per)
                .map(|k| {
                    let (r, c) = (k / cols, k % cols);
                    let c = if r % 2 == 0 { c } else { cols - 1 - c };
                    let x = -side / 2.0 + (c as f64 + 0.5) * side / cols as f64;
                    let y = -side / 2.0 + d as f64 * strip + (r as f64 + 0.5) * strip / rows as f64;
                    Waypoint::from_local(&o, LocalPoint::new(x, y, 0.0)).unwrap()
                })
                .collect();
            DronePath::new(format!("drone-{}", d + 1), wps)
        })
        .collect()
}

// A6: runtime on a five-million-point cloud, and scaling with waypoint count.
fn a6() -> Verdict {
    let side = 1000.0;
    // 2237 x 2237 grid samples.
    let spec = SceneSpec { seed: 6, jitter: 0.5, ..SceneSpec::new(SceneKind::Pile, side, side, 40.0, 5.005) };
    let t0 = Instant::now();
    let cloud = generate_scene(&spec).unwrap();
    let points = cloud.count();
    let t1 = Instant::now();
    let index = SpatialIndex::build(cloud).unwrap();
    let build = t1.elapsed().as_secs_f64();
    let generate = (t1 - t0).as_secs_f64();
    let refine = RefineConfig::with_z_offset(20.0);
    let camera = CameraConfig::default();
    let run = |n: usize| {
        let paths = grid_paths(n, 10, side * 0.98);
        let t = Instant::now();
        let (out, _) = refine_mission(&paths, &index, &origin(), &refine, &camera, true).unwrap();
        let secs = t.elapsed().as_secs_f64();
        (secs, out.iter().map(|p| p.waypoints.len()).sum::<usize>())
    };
    let (full, emitted) = run(10_000);
    let median = |n: usize| {
        let mut t: Vec<f64> = (0..5).map(|_| run(n).0).collect();
        t.sort_by(f64::total_cmp);
        t[2]
    };
    let timings: Vec<(usize, f64)> = [1000, 2000, 4000].iter().map(|&n| (n, median(n))).collect();
    let end_to_end: Vec<f64> = timings.iter().map(|&(_, t)| build + t).collect();
    let e2e_ratios = [end_to_end[1] / end_to_end[0], end_to_end[2] / end_to_end[1]];
    let per_wp: Vec<f64> = timings.iter().map(|&(n, t)| t / n as f64).collect();
    let per_ratios = [per_wp[1] / per_wp[0], per_wp[2] / per_wp[1]];
    let raw = [timings[1].1 / timings[0].1, timings[2].1 / timings[1].1];
    let threads = rayon::current_num_threads();
    let pass = points >= 5_000_000 && full < 120.0 && e2e_ratios.iter().chain(&per_ratios).all(|&r| r <= 1.5);
    verdict(
        pass,
        format!(
            "{points} points ({generate:.1} s generate, {build:.1} s index); 10000 waypoints -> {emitted} refined+annotated in {full:.1} s on {threads} thread(s); \
             run-time ratio index+refine {:.2}/{:.2}, per-waypoint {:.2}/{:.2}, refine-only {:.2}/{:.2}",
            e2e_ratios[0], e2e_ratios[1], per_ratios[0], per_ratios[1], raw[0], raw[1]
        ),
    )
}

// A7: identical bytes from the refine command across runs and thread counts.
fn a7() -> Verdict {
    let dir = tempfile_dir();
    let cloud_path = dir.join("scene.ply");
    let cloud = generate_scene(&SceneSpec {
        seed: 7,
        jitter: 0.7,
        ..SceneSpec::new(SceneKind::BoxOnPlane, 80.0, 80.0, 18.0, 3.0)
    })
    .unwrap();
    write_ply_binary(&cloud, std::fs::File::create(&cloud_path).unwrap()).unwrap();
    let plan = PlanConfig {
        altitude: 30.0,
        sidelap: 0.7,
        frontlap: 0.7,
        n_drones: 3,
        roi: vec![[-38.0, -38.0], [38.0, -38.0], [38.0, 38.0], [-38.0, 38.0]],
    };
    let paths = boustrophedon(&plan, &CameraModel::default(), &origin()).unwrap();
    std::fs::write(dir.join("paths.json"), write_mission(&origin(), &paths)).unwrap();
    std::fs::write(
        dir.join("config.json"),
        r#"{"z_offset": 12, "x_offset": 3, "delta_z": 1.5, "tol0": 0.3, "dtol": 0.3}"#,
    )
    .unwrap();
    let max = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut digests = std::collections::BTreeSet::new();
    let mut runs = 0;
    for threads in [1, 4, max] {
        for run in 0..5 {
            let out = dir.join(format!("m-{threads}-{run}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_relief"))
                .args(["--threads", &threads.to_string(), "--config"])
                .arg(dir.join("config.json"))
                .args(["refine", "--paths"])
                .arg(dir.join("paths.json"))
                .arg("--cloud")
                .arg(&cloud_path)
                .arg("-o")
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                return verdict(false, format!("refine failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            digests.insert(format!("{:x}", Sha256::digest(std::fs::read(&out).unwrap())));
            runs += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    let first = digests.iter().next().cloned().unwrap_or_default();
    verdict(
        digests.len() == 1,
        format!(
            "{runs} runs over threads {{1, 4, {max}}}: {} distinct digest(s), sha256 {}",
            digests.len(),
            &first[..16]
        ),
    )
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("relief-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn random_mission(rng: &mut ChaCha8Rng) -> String {
    let anchor = GeoPoint {
        lat: rng.random_range(-80.0..80.0),
        lon: rng.random_range(-179.9..180.0),
        alt: rng.random_range(-50.0..2000.0),
    };
    let o = Origin::new(anchor).unwrap();
    let paths: Vec<DronePath> = (0..rng.random_range(1..5))
        .map(|d| {
            let wps = (0..rng.random_range(2..15))
                .map(|_| {
                    let mut wp = Waypoint::from_local(
                        &o,
                        LocalPoint::new(
                            rng.random_range(-3000.0..3000.0),
                            rng.random_range(-3000.0..3000.0),
                            rng.random_range(0.0..400.0),
                        ),
                    )
                    .unwrap();
                    if rng.random_bool(0.6) {
                        wp.gimbal = Some(GimbalAngles {
                            yaw_deg: rng.random_range(-179.99..=180.0),
                            pitch_deg: rng.random_range(-90.0..=0.0),
                        });
                    }
                    wp.capture = rng.random_bool(0.8);
                    wp.inserted = rng.random_bool(0.2);
                    wp
                })
                .collect();
            DronePath::new(format!("uav-{d}"), wps)
        })
        .collect();
    write_mission(&o, &paths)
}

/// Breaks one field of a valid document; returns the JSON path that must be reported.
fn corrupt(doc: &str, rng: &mut ChaCha8Rng) -> (String, String) {
    let mut v: serde_json::Value = serde_json::from_str(doc).unwrap();
    let nd = v["drones"].as_array().unwrap().len();
    let d = rng.random_range(0..nd);
    let nw = v["drones"][d]["waypoints"].as_array().unwrap().len();
    let w = rng.random_range(0..nw);
    let wp_path = format!("$.drones[{d}].waypoints[{w}]");
    let wp = &mut v["drones"][d]["waypoints"][w];
    let path = match rng.random_range(0..9) {
        0 => {
            wp["lat"] = serde_json::json!(91.5);
            format!("{wp_path}.lat")
        }
        1 => {
            wp.as_object_mut().unwrap().remove("lon");
            format!("{wp_path}.lon")
        }
        2 => {
            wp["alt_m"] = serde_json::json!("high");
            format!("{wp_path}.alt_m")
        }
        3 => {
            wp["yaw_deg"] = serde_json::json!(-180.0);
            wp["gimbal_pitch_deg"] = serde_json::json!(-30.0);
            format!("{wp_path}.yaw_deg")
        }
        4 => {
            wp["yaw_deg"] = serde_json::json!(10.0);
            wp["gimbal_pitch_deg"] = serde_json::json!(5.0);
            format!("{wp_path}.gimbal_pitch_deg")
        }
        5 => {
            wp["speed"] = serde_json::json!(3);
            format!("{wp_path}.speed")
        }
        6 => {
            wp["inserted"] = serde_json::json!("no");
            format!("{wp_path}.inserted")
        }
        7 => {
            v["drones"][d]["waypoints"].as_array_mut().unwrap().truncate(1);
            format!("$.drones[{d}].waypoints")
        }
        _ => {
            v["frame"] = serde_json::json!("ED50");
            "$.frame".to_string()
        }
    };
    (v.to_string(), path)
}

// A8: read-write-read fixed point and located parse errors.
fn a8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA8);
    let (mut unstable, mut unlocated) = (0usize, 0usize);
    for _ in 0..200 {
        let doc = random_mission(&mut rng);
        let (o1, p1) = read_paths(&doc).unwrap();
        let doc1 = write_mission(&o1, &p1);
        let (o2, p2) = read_paths(&doc1).unwrap();
        unstable += (o1 != o2 || p1 != p2 || doc1 != write_mission(&o2, &p2)) as usize;
        let (broken, path) = corrupt(&doc, &mut rng);
        match read_paths(&broken) {
            Err(e) if e.path == path => {}
            _ => unlocated += 1,
        }
    }
    verdict(
        unstable == 0 && unlocated == 0,
        format!("200 documents: {unstable} unstable, {unlocated} errors without the exact path"),
    )
}

fn main() {
    let start = Instant::now();
    let fx = fixtures();
    let criteria: [(&str, &str, &dyn Fn() -> Verdict); 8] = [
        ("A1", "spatial queries vs brute force", &a1),
        ("A2", "altitude adjustment fidelity", &|| a2(&fx)),
        ("A3", "view target and angle fidelity", &|| a3(&fx)),
        ("A4", "coverage metrics vs oracle", &a4),
        ("A5", "vertical-surface observation", &a5),
        ("A6", "runtime and scaling", &a6),
        ("A7", "determinism across threads", &a7),
        ("A8", "mission round trip", &a8),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let v = check();
        println!("{id} {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += (!v.pass) as usize;
    }
    println!("acceptance: {} passed, {failed} failed in {:.1} s", 8 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
