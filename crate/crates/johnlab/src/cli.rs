//! Command-line front end: generate preset grids, run condition estimators
//! and homology checks, evaluate the eta integral, merge reports.
//!
//! Every output embeds the resolved run configuration and the content hash
//! of the grid it analyzed, and identical configurations produce
//! byte-identical files (all maps are ordered, all sampling is seeded).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::conditions::{
    check_ball_separation, check_john, estimate_bounded_turning, estimate_llc1, estimate_llc2,
    estimate_uniformity, eta_from_phi, DistortionFunction, JohnVariant, Role,
};
use crate::error::{Error, Result};
use crate::generators::{
    self, rasterize, MushroomParams, PinchedTorusParams, Scene,
};
use crate::grid::{
    components, distance_transform, read_vxg, write_vxg, Adjacency, Cell, Point, VoxelDomain,
};
use crate::homology::{
    betti, build_complex, check_dd_zero, estimate_hlog_bt, estimate_hlog_joinability,
    fast_sequence_check, h1_basis, JoinMode, Ring,
};

#[derive(Parser)]
#[command(name = "johnlab", version, about = "voxel laboratory for metric and homological domain conditions", disable_help_subcommand = true)]
struct Cli {
    /// JSON file with default values for any long flag; explicit flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rasterize a preset or scene file into a .vxg grid plus metadata
    Generate(GenerateArgs),
    /// Estimate a metric condition on a grid and emit a report
    Analyze(AnalyzeArgs),
    /// Betti numbers and fast-sequence verdicts on a grid
    Homology(HomologyArgs),
    /// Tabulate the eta integral for a distortion function
    Eta(EtaArgs),
    /// Merge condition reports into a summary with a resolution trend
    Report(ReportArgs),
}

#[derive(Args, Default)]
struct GenerateArgs {
    /// cusp | cusp-profile | pinched-torus | mushroom | trumpet |
    /// trumpet-wall | mushroom-ball | disk | comb | horseshoe | slit-disk |
    /// blob
    #[arg(long)]
    preset: Option<String>,
    /// scene JSON file instead of a preset
    #[arg(long, value_name = "PATH")]
    scene: Option<PathBuf>,
    /// cells along the longest window axis (default: scene's preset value)
    #[arg(long)]
    res: Option<usize>,
    /// stage count for mushroom / trumpet
    #[arg(long)]
    k: Option<usize>,
    /// per-body stage counts for trumpet-wall / mushroom-ball
    #[arg(long, value_name = "K1,K2,...")]
    ks: Option<String>,
    /// per-body scales for mushroom-ball
    #[arg(long, value_name = "S1,S2,...")]
    scales: Option<String>,
    /// lateral spacing multiplier for trumpet-wall
    #[arg(long)]
    spacing_factor: Option<f64>,
    /// RNG seed for the blob preset
    #[arg(long)]
    seed: Option<u64>,
    /// output grid path (default: <name>.vxg)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct AnalyzeArgs {
    #[arg(long, value_name = "PATH")]
    grid: Option<PathBuf>,
    /// metadata sidecar (default: grid path with .meta.json)
    #[arg(long, value_name = "PATH")]
    meta: Option<PathBuf>,
    /// john | llc1 | llc2 | bt | ballsep | uniform | hlog-join | hlog-bt
    #[arg(long)]
    cond: Option<String>,
    /// john gauge: dist | diam | length
    #[arg(long)]
    variant: Option<String>,
    /// john center: auto | x,y,z | marker:NAME
    #[arg(long)]
    center: Option<String>,
    /// distortion gauge: id | linear:C | power:K,ALPHA
    #[arg(long)]
    phi: Option<String>,
    /// sweep centers: lattice:N | markers | random:N
    #[arg(long)]
    centers: Option<String>,
    /// sweep radii (absolute lengths)
    #[arg(long, value_name = "R1,R2,...")]
    radii: Option<String>,
    /// candidate expansion constants
    #[arg(long, value_name = "C1,C2,...")]
    c_grid: Option<String>,
    /// sampled pair count for pairwise estimators
    #[arg(long)]
    pairs: Option<usize>,
    /// sampled point count for john
    #[arg(long)]
    samples: Option<usize>,
    /// geodesic subsampling stride for ballsep
    #[arg(long)]
    z_stride: Option<usize>,
    /// hlog-join mode: outer | inner
    #[arg(long)]
    mode: Option<String>,
    /// homology degree for hlog estimators
    #[arg(long)]
    p: Option<usize>,
    /// sampled cycle count for hlog-bt
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// analyze the complement of the grid within its window
    #[arg(long)]
    complement: bool,
    /// output path (default: stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct HomologyArgs {
    #[arg(long, value_name = "PATH")]
    grid: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    meta: Option<PathBuf>,
    /// report Betti numbers of the whole grid
    #[arg(long)]
    betti: bool,
    /// run a fast-sequence check on truncation-derived regions
    #[arg(long)]
    fastseq: bool,
    /// homology degree (default 1)
    #[arg(long)]
    p: Option<usize>,
    /// truncation center: x,y,z | marker:NAME
    #[arg(long)]
    center: Option<String>,
    /// inner truncation radius for region A (number or named radius)
    #[arg(long)]
    r: Option<String>,
    /// inner truncation radius for region B; must not exceed --r
    #[arg(long = "R", value_name = "R")]
    big_r: Option<String>,
    /// half-space truncation l=A,B keeping x <= A resp. x <= B
    #[arg(long, value_name = "l=A,B")]
    slab: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct EtaArgs {
    /// id | linear:C | power:K,ALPHA | table:t1=v1;t2=v2;...
    #[arg(long)]
    phi: Option<String>,
    /// multiplicative constant C
    #[arg(long)]
    c: Option<f64>,
    /// ambient dimension (2 or 3)
    #[arg(long)]
    n: Option<usize>,
    /// evaluation lattice start:stop:steps
    #[arg(long, value_name = "A:B:STEPS")]
    t_grid: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ReportArgs {
    /// condition report files to merge
    #[arg(long, value_name = "A.json,B.json,...")]
    inputs: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// also emit a plot-ready CSV of (condition, spacing, sup) rows
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("config {}: {e}", p.display())))?;
            if !v.is_object() {
                return Err(Error::Parse(format!(
                    "config {} must hold a JSON object",
                    p.display()
                )));
            }
            v
        }
        None => json!({}),
    };
    let threads = thread_count()?;
    match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a, &cfg, threads),
        Cmd::Analyze(a) => cmd_analyze(a, &cfg, threads),
        Cmd::Homology(a) => cmd_homology(a, &cfg, threads),
        Cmd::Eta(a) => cmd_eta(a, &cfg, threads),
        Cmd::Report(a) => cmd_report(a, &cfg, threads),
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var("JOHNLAB_THREADS") {
        Ok(s) => {
            let n: usize = s
                .parse()
                .map_err(|_| Error::Parse(format!("JOHNLAB_THREADS must be a positive integer, got {s:?}")))?;
            if n == 0 {
                return Err(Error::Parse("JOHNLAB_THREADS must be positive".into()));
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// CLI value if given, else the config file's value under `key`.
fn merged<T: DeserializeOwned>(cli: Option<T>, cfg: &Value, key: &str) -> Result<Option<T>> {
    if cli.is_some() {
        return Ok(cli);
    }
    match cfg.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Error::Parse(format!("config key {key}: {e}"))),
    }
}

/// Boolean flag: set on the CLI, or true in the config file.
fn merged_flag(cli: bool, cfg: &Value, key: &str) -> bool {
    cli || cfg.get(key).and_then(Value::as_bool).unwrap_or(false)
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{what}: bad number {t:?}")))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("{what}: bad integer {t:?}")))
        })
        .collect()
}

fn parse_point(s: &str) -> Result<Point> {
    let v = parse_f64_list(s, "point")?;
    if !(2..=3).contains(&v.len()) {
        return Err(Error::Parse(format!("point needs 2 or 3 coordinates, got {s:?}")));
    }
    Ok([v[0], v[1], if v.len() == 3 { v[2] } else { 0.0 }])
}

fn parse_phi(s: &str) -> Result<DistortionFunction> {
    if s == "id" {
        return Ok(DistortionFunction::identity());
    }
    if let Some(c) = s.strip_prefix("linear:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Error::Parse(format!("phi linear constant: {c:?}")))?;
        return DistortionFunction::linear(c, Role::Up)
            .or_else(|_| DistortionFunction::linear(c, Role::Down));
    }
    if let Some(rest) = s.strip_prefix("power:") {
        let v = parse_f64_list(rest, "phi power")?;
        if v.len() != 2 {
            return Err(Error::Parse(format!("phi power needs K,ALPHA, got {rest:?}")));
        }
        // sub-linear gauges only qualify for the down role
        return DistortionFunction::power(v[0], v[1], Role::Up)
            .or_else(|_| DistortionFunction::power(v[0], v[1], Role::Down));
    }
    if let Some(rest) = s.strip_prefix("table:") {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for pair in rest.split(';') {
            let (t, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("phi table entry {pair:?} needs t=v")))?;
            ts.push(t.parse().map_err(|_| Error::Parse(format!("phi table t: {t:?}")))?);
            vs.push(v.parse().map_err(|_| Error::Parse(format!("phi table v: {v:?}")))?);
        }
        return DistortionFunction::table(ts.clone(), vs.clone(), Role::Up)
            .or_else(|_| DistortionFunction::table(ts, vs, Role::Down));
    }
    Err(Error::Parse(format!(
        "unknown phi spec {s:?} (id | linear:C | power:K,ALPHA | table:t=v;...)"
    )))
}

/// Resolved run configuration embedded into every output for reproduction.
fn run_config(subcommand: &str, options: BTreeMap<String, Value>, threads: usize) -> Value {
    json!({
        "subcommand": subcommand,
        "options": options,
        "threads": threads,
    })
}

fn file_sha256(path: &Path) -> Result<String> {
    let data = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&data);
    Ok(format!("{:x}", h.finalize()))
}

fn write_output(out: &Option<PathBuf>, doc: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match out {
        Some(p) => {
            std::fs::write(p, text)?;
            println!("{}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------- generate

fn build_preset(name: &str, a: &PresetParams) -> Result<Scene> {
    match name {
        "cusp" => Ok(generators::scene_cusp()),
        "cusp-profile" => Ok(generators::scene_cusp_profile()),
        "pinched-torus" => generators::scene_pinched_torus(&PinchedTorusParams::default()),
        "mushroom" => {
            let mut p = MushroomParams::default();
            if let Some(k) = a.k {
                p.stages = k;
            }
            generators::scene_mushroom(&p)
        }
        "trumpet" => generators::scene_trumpet(a.k.unwrap_or(3)),
        "trumpet-wall" => {
            let ks = a.ks.clone().unwrap_or_else(|| vec![2, 2]);
            generators::scene_trumpet_wall(&ks, a.spacing_factor.unwrap_or(20.0))
        }
        "mushroom-ball" => {
            let ks = a.ks.clone().unwrap_or_else(|| vec![1, 1]);
            let scales = a.scales.clone().unwrap_or_else(|| vec![0.4; ks.len()]);
            generators::scene_mushroom_ball(&ks, &scales)
        }
        "disk" => Ok(generators::scene_disk()),
        "comb" => Ok(generators::scene_comb()),
        "horseshoe" => Ok(generators::scene_horseshoe()),
        "slit-disk" => Ok(generators::scene_slit_disk()),
        "blob" => Ok(generators::scene_blob(a.seed.unwrap_or(1))),
        other => Err(Error::Precondition(format!("unknown preset {other:?}"))),
    }
}

struct PresetParams {
    k: Option<usize>,
    ks: Option<Vec<usize>>,
    scales: Option<Vec<f64>>,
    spacing_factor: Option<f64>,
    seed: Option<u64>,
}

fn cmd_generate(a: GenerateArgs, cfg: &Value, threads: usize) -> Result<()> {
    let preset = merged(a.preset, cfg, "preset")?;
    let scene_path = merged(a.scene, cfg, "scene")?;
    let res = merged(a.res, cfg, "res")?;
    let params = PresetParams {
        k: merged(a.k, cfg, "k")?,
        ks: merged(a.ks, cfg, "ks")?
            .map(|s| parse_usize_list(&s, "ks"))
            .transpose()?,
        scales: merged(a.scales, cfg, "scales")?
            .map(|s| parse_f64_list(&s, "scales"))
            .transpose()?,
        spacing_factor: merged(a.spacing_factor, cfg, "spacing_factor")?,
        seed: merged(a.seed, cfg, "seed")?,
    };
    let scene = match (&preset, &scene_path) {
        (Some(name), None) => build_preset(name, &params)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("scene {}: {e}", path.display())))?;
            Scene::from_json(&v)?
        }
        _ => {
            return Err(Error::Precondition(
                "generate needs exactly one of --preset or --scene".into(),
            ))
        }
    };
    let res = res.unwrap_or(scene.meta.default_res);
    let spec = scene.grid(res)?;
    let (domain, flags) = rasterize(&scene, &spec)?;
    let out = merged(a.out, cfg, "out")?
        .unwrap_or_else(|| PathBuf::from(format!("{}.vxg", scene.name)));
    write_vxg(&domain, &out)?;
    let hash = file_sha256(&out)?;
    let options: BTreeMap<String, Value> = [
        ("preset".to_string(), json!(preset)),
        ("scene".to_string(), json!(scene_path)),
        ("res".to_string(), json!(res)),
        ("k".to_string(), json!(params.k)),
        ("ks".to_string(), json!(params.ks)),
        ("scales".to_string(), json!(params.scales)),
        ("spacing_factor".to_string(), json!(params.spacing_factor)),
        ("seed".to_string(), json!(params.seed.unwrap_or(0))),
        ("out".to_string(), json!(out)),
    ]
    .into();
    let sidecar = json!({
        "schema": "gridmeta/1",
        "run": run_config("generate", options, threads),
        "scene": scene.name,
        "grid": {
            "dim": spec.dim,
            "shape": spec.shape,
            "spacing": spec.spacing,
            "origin": spec.origin,
            "open_faces": domain.open_faces,
            "occupied": domain.occupied_count(),
            "sha256": hash,
        },
        "markers": scene.meta.markers,
        "points": scene.meta.points,
        "radii": scene.meta.radii,
        "placements": scene.meta.placements,
        "flags": flags,
    });
    let meta_path = sidecar_path(&out);
    write_output(&Some(meta_path), &sidecar)?;
    println!("{}", out.display());
    Ok(())
}

fn sidecar_path(grid: &Path) -> PathBuf {
    grid.with_extension("meta.json")
}

// ----------------------------------------------------------------- analyze

/// Sidecar metadata, tolerated to be absent (empty maps then).
#[derive(Default, serde::Deserialize)]
struct Sidecar {
    #[serde(default)]
    markers: BTreeMap<String, Vec<Point>>,
    #[serde(default)]
    points: BTreeMap<String, Point>,
    #[serde(default)]
    radii: BTreeMap<String, f64>,
}

fn load_sidecar(grid: &Path, meta: &Option<PathBuf>) -> Result<Sidecar> {
    let path = meta.clone().unwrap_or_else(|| sidecar_path(grid));
    if !path.exists() {
        if meta.is_some() {
            return Err(Error::Precondition(format!("no metadata file {}", path.display())));
        }
        return Ok(Sidecar::default());
    }
    let text = std::fs::read_to_string(&path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("metadata {}: {e}", path.display())))
}

fn marker_barycenter(pts: &[Point]) -> Point {
    let n = pts.len().max(1) as f64;
    let mut m = [0.0; 3];
    for p in pts {
        for a in 0..3 {
            m[a] += p[a] / n;
        }
    }
    m
}

fn resolve_point(s: &str, meta: &Sidecar) -> Result<Point> {
    if let Some(name) = s.strip_prefix("marker:") {
        if let Some(p) = meta.points.get(name) {
            return Ok(*p);
        }
        if let Some(pts) = meta.markers.get(name) {
            return Ok(marker_barycenter(pts));
        }
        return Err(Error::Precondition(format!("no marker or point named {name:?}")));
    }
    parse_point(s)
}

fn resolve_radius(s: &str, meta: &Sidecar) -> Result<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    meta.radii
        .get(s)
        .copied()
        .ok_or_else(|| Error::Precondition(format!("no named radius {s:?}")))
}

fn window_extent(d: &VoxelDomain) -> f64 {
    (0..d.spec.dim)
        .map(|a| d.spec.shape[a] as f64 * d.spec.spacing)
        .fold(0.0, f64::max)
}

/// Lattice of n points per axis strictly inside the window.
fn lattice_centers(d: &VoxelDomain, n: usize) -> Vec<Point> {
    let spec = &d.spec;
    let mut out = Vec::new();
    let steps = |axis: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                spec.origin[axis]
                    + (i as f64 + 0.5) / n as f64 * spec.shape[axis] as f64 * spec.spacing
            })
            .collect()
    };
    let zs = if spec.dim == 2 { vec![spec.center([0, 0, 0])[2]] } else { steps(2) };
    for &z in &zs {
        for &y in &steps(1) {
            for &x in &steps(0) {
                out.push([x, y, z]);
            }
        }
    }
    out
}

fn random_centers(d: &VoxelDomain, n: usize, seed: u64) -> Vec<Point> {
    let occupied: Vec<usize> = (0..d.spec.cell_count()).filter(|&i| d.occ[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .filter_map(|_| {
            if occupied.is_empty() {
                None
            } else {
                let i = occupied[rng.gen_range(0..occupied.len())];
                Some(d.spec.center(d.spec.unlinear(i)))
            }
        })
        .collect()
}

fn sweep_centers(spec: &str, d: &VoxelDomain, meta: &Sidecar, seed: u64) -> Result<Vec<Point>> {
    if spec == "markers" {
        let mut out: Vec<Point> = meta.points.values().copied().collect();
        out.extend(meta.markers.values().map(|pts| marker_barycenter(pts)));
        if out.is_empty() {
            return Err(Error::Precondition("centers mode markers needs scene metadata".into()));
        }
        return Ok(out);
    }
    if let Some(n) = spec.strip_prefix("lattice:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Parse(format!("lattice center count: {n:?}")))?;
        return Ok(lattice_centers(d, n));
    }
    if let Some(n) = spec.strip_prefix("random:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Parse(format!("random center count: {n:?}")))?;
        return Ok(random_centers(d, n, seed));
    }
    Err(Error::Parse(format!(
        "unknown centers mode {spec:?} (lattice:N | markers | random:N)"
    )))
}

/// Seeded random occupied pairs drawn from the largest component.
fn sample_pairs(d: &VoxelDomain, n: usize, seed: u64) -> Result<Vec<(Cell, Cell)>> {
    let lab = components(d, Adjacency::Full);
    if lab.count == 0 {
        return Err(Error::EmptyDomain);
    }
    let mut sizes = vec![0usize; lab.count];
    for (i, &l) in lab.labels.iter().enumerate() {
        if d.occ[i] {
            sizes[l] += 1;
        }
    }
    let big = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(_, &s)| s)
        .map(|(l, _)| l)
        .unwrap();
    let cells: Vec<usize> = (0..d.spec.cell_count())
        .filter(|&i| d.occ[i] && lab.labels[i] == big)
        .collect();
    if cells.len() < 2 {
        return Err(Error::Precondition("domain too small to sample pairs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let i = cells[rng.gen_range(0..cells.len())];
        let j = cells[rng.gen_range(0..cells.len())];
        if i != j {
            out.push((d.spec.unlinear(i), d.spec.unlinear(j)));
        }
    }
    Ok(out)
}

fn john_samples(d: &VoxelDomain, x0: Cell, n: usize, seed: u64) -> Vec<Cell> {
    let lab = components(d, Adjacency::Full);
    let l0 = lab.labels[d.spec.linear(x0)];
    let cells: Vec<usize> = (0..d.spec.cell_count())
        .filter(|&i| d.occ[i] && lab.labels[i] == l0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| d.spec.unlinear(cells[rng.gen_range(0..cells.len())]))
        .collect()
}

fn deepest_cell(d: &VoxelDomain) -> Result<Cell> {
    let df = distance_transform(d)?;
    let best = (0..d.spec.cell_count())
        .filter(|&i| d.occ[i])
        .max_by(|&i, &j| df.values[i].partial_cmp(&df.values[j]).unwrap().then(j.cmp(&i)))
        .ok_or(Error::EmptyDomain)?;
    Ok(d.spec.unlinear(best))
}

fn grid_envelope(path: &Path, d: &VoxelDomain) -> Result<Value> {
    Ok(json!({
        "path": path,
        "sha256": file_sha256(path)?,
        "dim": d.spec.dim,
        "shape": d.spec.shape,
        "spacing": d.spec.spacing,
    }))
}

fn cmd_analyze(a: AnalyzeArgs, cfg: &Value, threads: usize) -> Result<()> {
    let grid_path = merged(a.grid, cfg, "grid")?
        .ok_or_else(|| Error::Precondition("analyze needs --grid".into()))?;
    let meta_path = merged(a.meta, cfg, "meta")?;
    let cond = merged(a.cond, cfg, "cond")?
        .ok_or_else(|| Error::Precondition("analyze needs --cond".into()))?;
    let meta = load_sidecar(&grid_path, &meta_path)?;
    let raw = read_vxg(&grid_path)?;
    let complement = merged_flag(a.complement, cfg, "complement");
    let domain = if complement { raw.complement_in_window() } else { raw };
    let seed = merged(a.seed, cfg, "seed")?.unwrap_or(7);
    let extent = window_extent(&domain);
    let radii = match merged(a.radii, cfg, "radii")? {
        Some(s) => parse_f64_list(&s, "radii")?,
        None => vec![0.05 * extent, 0.1 * extent, 0.2 * extent],
    };
    let c_grid = match merged(a.c_grid, cfg, "c_grid")? {
        Some(s) => parse_f64_list(&s, "c_grid")?,
        None => vec![1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0],
    };
    let centers_spec = merged(a.centers, cfg, "centers")?.unwrap_or_else(|| "lattice:4".into());
    let pair_count = merged(a.pairs, cfg, "pairs")?.unwrap_or(40);
    let sample_count = merged(a.samples, cfg, "samples")?.unwrap_or(200);
    let variant = match merged(a.variant, cfg, "variant")?.as_deref() {
        None | Some("diam") => JohnVariant::Diam,
        Some("dist") => JohnVariant::Dist,
        Some("length") => JohnVariant::Length,
        Some(v) => return Err(Error::Parse(format!("unknown john variant {v:?}"))),
    };
    let phi = merged(a.phi, cfg, "phi")?.map(|s| parse_phi(&s)).transpose()?;
    let center_spec = merged(a.center, cfg, "center")?.unwrap_or_else(|| "auto".into());
    let mode = match merged(a.mode, cfg, "mode")?.as_deref() {
        None | Some("outer") => JoinMode::Outer,
        Some("inner") => JoinMode::Inner,
        Some(m) => return Err(Error::Parse(format!("unknown mode {m:?} (outer | inner)"))),
    };
    let p = merged(a.p, cfg, "p")?.unwrap_or(1);
    let cycles = merged(a.cycles, cfg, "cycles")?.unwrap_or(50);
    let z_stride = merged(a.z_stride, cfg, "z_stride")?.unwrap_or(4);

    let report = match cond.as_str() {
        "john" => {
            let x0 = if center_spec == "auto" {
                deepest_cell(&domain)?
            } else {
                let p = resolve_point(&center_spec, &meta)?;
                domain.spec.nearest_cell(p)
            };
            let df = distance_transform(&domain)?;
            let samples = john_samples(&domain, x0, sample_count, seed);
            check_john(&domain, &df, x0, &samples, variant, phi.as_ref())?
        }
        "llc1" => {
            let centers = sweep_centers(&centers_spec, &domain, &meta, seed)?;
            estimate_llc1(&domain, &centers, &radii, &c_grid)?
        }
        "llc2" => {
            let centers = sweep_centers(&centers_spec, &domain, &meta, seed)?;
            estimate_llc2(&domain, &centers, &radii, &c_grid)?
        }
        "bt" => {
            let pairs = sample_pairs(&domain, pair_count, seed)?;
            estimate_bounded_turning(&domain, &pairs)?
        }
        "ballsep" => {
            let df = distance_transform(&domain)?;
            let pairs = sample_pairs(&domain, pair_count, seed)?;
            check_ball_separation(&domain, &df, &pairs, &c_grid, z_stride)?
        }
        "uniform" => {
            let df = distance_transform(&domain)?;
            let pairs = sample_pairs(&domain, pair_count, seed)?;
            estimate_uniformity(&domain, &df, &pairs)?
        }
        "hlog-join" => {
            let centers = sweep_centers(&centers_spec, &domain, &meta, seed)?;
            estimate_hlog_joinability(&domain, p, mode, &centers, &radii, &c_grid)?
        }
        "hlog-bt" => estimate_hlog_bt(&domain, p, cycles, seed)?,
        other => return Err(Error::Precondition(format!("unknown condition {other:?}"))),
    };

    let options: BTreeMap<String, Value> = [
        ("grid".to_string(), json!(grid_path)),
        ("meta".to_string(), json!(meta_path)),
        ("cond".to_string(), json!(cond)),
        ("variant".to_string(), json!(variant.name())),
        ("center".to_string(), json!(center_spec)),
        ("phi".to_string(), json!(phi)),
        ("centers".to_string(), json!(centers_spec)),
        ("radii".to_string(), json!(radii)),
        ("c_grid".to_string(), json!(c_grid)),
        ("pairs".to_string(), json!(pair_count)),
        ("samples".to_string(), json!(sample_count)),
        ("z_stride".to_string(), json!(z_stride)),
        ("mode".to_string(), json!(match mode { JoinMode::Outer => "outer", JoinMode::Inner => "inner" })),
        ("p".to_string(), json!(p)),
        ("cycles".to_string(), json!(cycles)),
        ("seed".to_string(), json!(seed)),
        ("complement".to_string(), json!(complement)),
    ]
    .into();
    let doc = json!({
        "schema": "condreport-envelope/1",
        "run": run_config("analyze", options, threads),
        "grid": grid_envelope(&grid_path, &domain)?,
        "report": report,
    });
    write_output(&merged(a.out, cfg, "out")?, &doc)
}

// ---------------------------------------------------------------- homology

/// Subdomain of occupied cells whose centers satisfy `keep`.
fn masked(d: &VoxelDomain, keep: impl Fn(Point) -> bool) -> VoxelDomain {
    let mut out = d.clone();
    for i in 0..d.spec.cell_count() {
        if out.occ[i] && !keep(d.spec.center(d.spec.unlinear(i))) {
            out.occ[i] = false;
        }
    }
    out
}

fn cmd_homology(a: HomologyArgs, cfg: &Value, threads: usize) -> Result<()> {
    let grid_path = merged(a.grid, cfg, "grid")?
        .ok_or_else(|| Error::Precondition("homology needs --grid".into()))?;
    let meta_path = merged(a.meta, cfg, "meta")?;
    let meta = load_sidecar(&grid_path, &meta_path)?;
    let domain = read_vxg(&grid_path)?;
    let do_betti = merged_flag(a.betti, cfg, "betti");
    let do_fastseq = merged_flag(a.fastseq, cfg, "fastseq");
    if do_betti == do_fastseq {
        return Err(Error::Precondition(
            "homology needs exactly one of --betti or --fastseq".into(),
        ));
    }
    let p = merged(a.p, cfg, "p")?.unwrap_or(1);
    let mut options: BTreeMap<String, Value> = [
        ("grid".to_string(), json!(grid_path)),
        ("meta".to_string(), json!(meta_path)),
        ("betti".to_string(), json!(do_betti)),
        ("fastseq".to_string(), json!(do_fastseq)),
        ("p".to_string(), json!(p)),
        ("seed".to_string(), json!(0)),
    ]
    .into();

    let body = if do_betti {
        let cx = build_complex(&domain);
        if !check_dd_zero(&cx) {
            return Err(Error::Invariant("boundary of boundary is nonzero".into()));
        }
        let top = if domain.spec.dim == 2 { 1 } else { 2 };
        let mut ranks = Vec::new();
        let mut torsions = Vec::new();
        for q in 0..=top {
            let (r, t) = betti(&cx, q, Ring::Integer)?;
            ranks.push(r);
            torsions.push(t);
        }
        // degree 0 is reduced (components - 1), matching the engine
        json!({
            "betti": ranks,
            "torsion": torsions,
            "euler_characteristic": cx.euler_characteristic(),
        })
    } else {
        let slab = merged(a.slab, cfg, "slab")?;
        let (a_dom, b_dom, trunc) = match slab {
            Some(s) => {
                let body = s
                    .strip_prefix("l=")
                    .ok_or_else(|| Error::Parse(format!("slab spec {s:?} needs l=A,B")))?;
                let (la, lb) = body
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("slab spec {s:?} needs two offsets")))?;
                let la = resolve_radius(la.trim(), &meta)?;
                let lb = resolve_radius(lb.trim(), &meta)?;
                if la > lb {
                    return Err(Error::Precondition(format!(
                        "slab offsets must satisfy A <= B, got {la} > {lb}"
                    )));
                }
                let a_dom = masked(&domain, |q| q[0] <= la);
                let b_dom = masked(&domain, |q| q[0] <= lb);
                (a_dom, b_dom, json!({"slab": [la, lb]}))
            }
            None => {
                let center_spec = merged(a.center, cfg, "center")?
                    .ok_or_else(|| Error::Precondition("fastseq needs --slab or --center".into()))?;
                let r_spec = merged(a.r, cfg, "r")?
                    .ok_or_else(|| Error::Precondition("fastseq needs --r".into()))?;
                let big_spec = merged(a.big_r, cfg, "R")?
                    .ok_or_else(|| Error::Precondition("fastseq needs --R".into()))?;
                let c = resolve_point(&center_spec, &meta)?;
                let r = resolve_radius(&r_spec, &meta)?;
                let big = resolve_radius(&big_spec, &meta)?;
                if r < big {
                    return Err(Error::Precondition(format!(
                        "--r {r} must be >= --R {big}: regions are ball complements, \
                         the larger removed ball gives the smaller region"
                    )));
                }
                let d2 = |q: Point| {
                    (q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2) + (q[2] - c[2]).powi(2)
                };
                let a_dom = masked(&domain, |q| d2(q) >= r * r);
                let b_dom = masked(&domain, |q| d2(q) >= big * big);
                (a_dom, b_dom, json!({"center": c, "r": r, "R": big}))
            }
        };
        options.insert("truncation".to_string(), trunc.clone());
        let a_cx = build_complex(&a_dom);
        let b_cx = build_complex(&b_dom);
        let x_cx = build_complex(&domain);
        let rep = fast_sequence_check(&a_cx, &b_cx, &x_cx, p)?;
        let rank_a = if p == 1 { h1_basis(&a_cx)?.rank } else { betti(&a_cx, p, Ring::Rational)?.0 };
        let rank_b = betti(&b_cx, p, Ring::Rational)?.0;
        let mut body = rep.to_json();
        body["truncation"] = trunc;
        body["rank_a"] = json!(rank_a);
        body["rank_b"] = json!(rank_b);
        body
    };

    let doc = json!({
        "schema": "homreport/1",
        "run": run_config("homology", options, threads),
        "grid": grid_envelope(&grid_path, &domain)?,
        "report": body,
    });
    write_output(&merged(a.out, cfg, "out")?, &doc)
}

// --------------------------------------------------------------------- eta

fn cmd_eta(a: EtaArgs, cfg: &Value, threads: usize) -> Result<()> {
    let phi_spec = merged(a.phi, cfg, "phi")?.unwrap_or_else(|| "id".into());
    let phi = parse_phi(&phi_spec)?;
    let c = merged(a.c, cfg, "c")?.unwrap_or(1.0);
    let n = merged(a.n, cfg, "n")?.unwrap_or(2);
    let t_spec = merged(a.t_grid, cfg, "t_grid")?.unwrap_or_else(|| "0.1:2.0:20".into());
    let parts: Vec<&str> = t_spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("t grid {t_spec:?} needs start:stop:steps")));
    }
    let t0: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("t grid start: {:?}", parts[0])))?;
    let t1: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("t grid stop: {:?}", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("t grid steps: {:?}", parts[2])))?;
    if steps == 0 || t1 < t0 {
        return Err(Error::Precondition(format!("empty t grid {t_spec:?}")));
    }
    let mut rows = Vec::with_capacity(steps);
    let mut any_divergent = false;
    for i in 0..steps {
        let t = if steps == 1 { t0 } else { t0 + (t1 - t0) * i as f64 / (steps - 1) as f64 };
        let (eta, divergent) = eta_from_phi(&phi, c, n, t)?;
        any_divergent |= divergent;
        rows.push(json!({
            "t": t,
            "eta": if divergent { Value::Null } else { json!(eta) },
            "divergent": divergent,
        }));
    }
    let options: BTreeMap<String, Value> = [
        ("phi".to_string(), json!(phi_spec)),
        ("c".to_string(), json!(c)),
        ("n".to_string(), json!(n)),
        ("t_grid".to_string(), json!(t_spec)),
        ("seed".to_string(), json!(0)),
    ]
    .into();
    let doc = json!({
        "schema": "etatable/1",
        "run": run_config("eta", options, threads),
        "rows": rows,
        "divergent": any_divergent,
    });
    write_output(&merged(a.out, cfg, "out")?, &doc)
}

// ------------------------------------------------------------------ report

fn cmd_report(a: ReportArgs, cfg: &Value, threads: usize) -> Result<()> {
    let inputs = merged(a.inputs, cfg, "inputs")?
        .ok_or_else(|| Error::Precondition("report needs --inputs".into()))?;
    let paths: Vec<PathBuf> = inputs
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| PathBuf::from(s.trim()))
        .collect();
    if paths.is_empty() {
        return Err(Error::Precondition("report needs at least one input".into()));
    }
    let mut rows = Vec::new();
    let mut schemas = Vec::new();
    for p in &paths {
        let text = std::fs::read_to_string(p)?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("report input {}: {e}", p.display())))?;
        let report = v
            .get("report")
            .ok_or_else(|| Error::Parse(format!("{} has no report field", p.display())))?;
        let schema = report
            .get("schema")
            .and_then(Value::as_str)
            .unwrap_or("missing")
            .to_string();
        schemas.push(schema.clone());
        let spacing = v
            .pointer("/grid/spacing")
            .and_then(Value::as_f64)
            .unwrap_or(f64::NAN);
        rows.push(json!({
            "input": p,
            "condition": report.get("condition").cloned().unwrap_or(Value::Null),
            "schema": schema,
            "spacing": spacing,
            "shape": v.pointer("/grid/shape").cloned().unwrap_or(Value::Null),
            "sup": report.get("sup").cloned().unwrap_or(Value::Null),
            "flags": report.get("flags").cloned().unwrap_or(json!([])),
            "witness": report.get("witness").cloned().unwrap_or(Value::Null),
        }));
    }
    let first = &schemas[0];
    if schemas.iter().any(|s| s != first) {
        let mut uniq: Vec<&String> = schemas.iter().collect();
        uniq.sort();
        uniq.dedup();
        return Err(Error::Parse(format!(
            "mixed report schema versions: {}",
            uniq.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    // resolution trend per condition: rows sorted coarse to fine, with the
    // ratio of consecutive sups (growth > 1 means the constant blows up)
    let mut by_cond: BTreeMap<String, Vec<&Value>> = BTreeMap::new();
    for row in &rows {
        let c = row["condition"].as_str().unwrap_or("unknown").to_string();
        by_cond.entry(c).or_default().push(row);
    }
    let mut trend = Vec::new();
    for (cond, mut group) in by_cond {
        group.sort_by(|a, b| {
            b["spacing"]
                .as_f64()
                .unwrap_or(f64::NAN)
                .partial_cmp(&a["spacing"].as_f64().unwrap_or(f64::NAN))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut steps = Vec::new();
        for w in group.windows(2) {
            let (s0, s1) = (w[0]["sup"].as_f64(), w[1]["sup"].as_f64());
            let ratio = match (s0, s1) {
                (Some(a), Some(b)) if a > 0.0 => Some(b / a),
                _ => None,
            };
            steps.push(json!({
                "from_spacing": w[0]["spacing"],
                "to_spacing": w[1]["spacing"],
                "sup_ratio": ratio,
            }));
        }
        trend.push(json!({
            "condition": cond,
            "rows": group,
            "steps": steps,
        }));
    }
    let options: BTreeMap<String, Value> = [
        ("inputs".to_string(), json!(paths)),
        ("seed".to_string(), json!(0)),
    ]
    .into();
    let doc = json!({
        "schema": "summary/1",
        "run": run_config("report", options, threads),
        "rows": rows,
        "trend": trend,
    });
    if let Some(csv_path) = merged(a.csv, cfg, "csv")? {
        let mut csv = String::from("condition,spacing,sup\n");
        for row in doc["rows"].as_array().unwrap() {
            csv.push_str(&format!(
                "{},{},{}\n",
                row["condition"].as_str().unwrap_or(""),
                row["spacing"],
                row["sup"],
            ));
        }
        std::fs::write(&csv_path, csv)?;
    }
    write_output(&merged(a.out, cfg, "out")?, &doc)
}
