//! Run configuration, prepared-mesh archives, and output writers.
//!
//! Configs are plain-text `key = value` files (`#` comments, repeatable
//! `source` / `probe` / `snapshot` keys). Prepared meshes are versioned JSON
//! archives that round-trip byte-stably. Snapshots export as CSV or legacy
//! ASCII VTK point data.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SemError};
use crate::mesh::{build_sem_mesh, RawMesh, SemMesh};
use crate::reorder::Strategy;
use crate::synth::SynthConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSpec {
    pub x: f64,
    pub y: f64,
    pub f_peak: f64,
    pub t0: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh_path: Option<PathBuf>,
    pub prepared_path: Option<PathBuf>,
    pub synth: Option<SynthConfig>,
    pub order: usize,
    pub strategy: Strategy,
    /// Explicit step size; when absent the CFL heuristic picks one.
    pub h: Option<f64>,
    pub cfl_factor: f64,
    pub n_steps: usize,
    /// Region tag -> (rho, K). Empty table means rho = K = 1 everywhere.
    pub materials: BTreeMap<i32, (f64, f64)>,
    pub sources: Vec<SourceSpec>,
    pub probes: Vec<[f64; 2]>,
    pub snapshot_times: Vec<f64>,
    pub probe_stride: usize,
    pub energy_stride: usize,
    pub threads: Option<usize>,
    pub deterministic: bool,
    pub seed: u64,
    /// Key-value pairs as read, for manifest echo.
    pub echo: Vec<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh_path: None,
            prepared_path: None,
            synth: None,
            order: 4,
            strategy: Strategy::None,
            h: None,
            cfl_factor: 0.3,
            n_steps: 100,
            materials: BTreeMap::new(),
            sources: Vec::new(),
            probes: Vec::new(),
            snapshot_times: Vec::new(),
            probe_stride: 1,
            energy_stride: 0,
            threads: None,
            deterministic: false,
            seed: 1,
            echo: Vec::new(),
        }
    }
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> SemError {
    SemError::Config(format!("line {line}: {msg}"))
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| config_err(line, format!("invalid value for {key}: {v:?}")))
}

fn parse_list(line: usize, key: &str, v: &str, want: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = v
        .split(',')
        .map(|p| parse_num(line, key, p))
        .collect::<Result<_>>()?;
    if parts.len() != want {
        return Err(config_err(line, format!("{key} expects {want} comma-separated values")));
    }
    Ok(parts)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(lineno, "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(config_err(lineno, format!("empty value for {key}")));
        }
        cfg.echo.push((key.to_string(), value.to_string()));
        match key {
            "mesh" => cfg.mesh_path = Some(PathBuf::from(value)),
            "prepared" => cfg.prepared_path = Some(PathBuf::from(value)),
            "synth" => {
                let nums = parse_list(lineno, key, value, 2)?;
                let mut s = cfg.synth.take().unwrap_or_default();
                s.nx = nums[0] as usize;
                s.ny = nums[1] as usize;
                cfg.synth = Some(s);
            }
            "synth.width" | "synth.height" | "synth.jitter" | "synth.grading" => {
                let v: f64 = parse_num(lineno, key, value)?;
                let s = cfg.synth.get_or_insert_with(Default::default);
                match key {
                    "synth.width" => s.width = v,
                    "synth.height" => s.height = v,
                    "synth.jitter" => s.jitter = v,
                    _ => s.grading = v,
                }
            }
            "synth.scramble" => {
                cfg.synth.get_or_insert_with(Default::default).scramble =
                    parse_num::<String>(lineno, key, value)? == "true";
            }
            "synth.seed" => {
                cfg.synth.get_or_insert_with(Default::default).seed =
                    parse_num(lineno, key, value)?;
            }
            "order" => cfg.order = parse_num(lineno, key, value)?,
            "strategy" => cfg.strategy = value.parse()?,
            "h" => cfg.h = Some(parse_num(lineno, key, value)?),
            "cfl" => cfg.cfl_factor = parse_num(lineno, key, value)?,
            "n_steps" => cfg.n_steps = parse_num(lineno, key, value)?,
            "source" => {
                let n = parse_list(lineno, key, value, 5)?;
                cfg.sources.push(SourceSpec { x: n[0], y: n[1], f_peak: n[2], t0: n[3], amplitude: n[4] });
            }
            "probe" => {
                let n = parse_list(lineno, key, value, 2)?;
                cfg.probes.push([n[0], n[1]]);
            }
            "snapshot" => cfg.snapshot_times.push(parse_num(lineno, key, value)?),
            "probe_stride" => cfg.probe_stride = parse_num(lineno, key, value)?,
            "energy_stride" => cfg.energy_stride = parse_num(lineno, key, value)?,
            "threads" => cfg.threads = Some(parse_num(lineno, key, value)?),
            "deterministic" => {
                cfg.deterministic = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(config_err(lineno, "deterministic expects true|false")),
                }
            }
            "seed" => cfg.seed = parse_num(lineno, key, value)?,
            _ if key.starts_with("material.") => {
                let tag: i32 = key["material.".len()..]
                    .parse()
                    .map_err(|_| config_err(lineno, format!("bad material tag in {key:?}")))?;
                let n = parse_list(lineno, key, value, 2)?;
                cfg.materials.insert(tag, (n[0], n[1]));
            }
            _ => return Err(config_err(lineno, format!("unknown key {key:?}"))),
        }
    }
    Ok(cfg)
}

/// Per-element (rho, K) vectors from the region-tag material table. An empty
/// table defaults every element to rho = K = 1.
pub fn material_vectors(mesh: &SemMesh, materials: &BTreeMap<i32, (f64, f64)>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = mesh.num_elements();
    if materials.is_empty() {
        return Ok((vec![1.0; n], vec![1.0; n]));
    }
    let mut rho = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    for &tag in &mesh.raw.region_tags {
        let &(r, kk) = materials.get(&tag).ok_or(SemError::MissingMaterial(tag))?;
        rho.push(r);
        k.push(kk);
    }
    Ok((rho, k))
}

pub const ARCHIVE_VERSION: &str = "semwave-mesh/1";

/// Self-describing prepared-mesh archive; JSON with a version header.
#[derive(Debug, Serialize, Deserialize)]
pub struct PreparedMesh {
    pub version: String,
    pub order: usize,
    pub strategy: String,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub region_tags: Vec<i32>,
    pub global_nodes: Vec<[f64; 2]>,
    pub mu: Vec<u32>,
    pub colors: Vec<u32>,
    pub num_colors: usize,
    /// SFC bucket grid (w_b, h_b), present for the sfc strategy.
    pub sfc_grid: Option<[u32; 2]>,
}

impl PreparedMesh {
    pub fn from_mesh(mesh: &SemMesh, strategy: Strategy, sfc_grid: Option<[u32; 2]>) -> PreparedMesh {
        PreparedMesh {
            version: ARCHIVE_VERSION.to_string(),
            order: mesh.order,
            strategy: strategy.token().to_string(),
            vertices: mesh.raw.vertices.clone(),
            triangles: mesh.raw.triangles.clone(),
            region_tags: mesh.raw.region_tags.clone(),
            global_nodes: mesh.global_nodes.clone(),
            mu: mesh.mu.clone(),
            colors: mesh.colors.clone(),
            num_colors: mesh.num_colors,
            sfc_grid,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SemError::Archive(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<PreparedMesh> {
        let arch: PreparedMesh =
            serde_json::from_str(text).map_err(|e| SemError::Archive(e.to_string()))?;
        if arch.version != ARCHIVE_VERSION {
            return Err(SemError::Archive(format!(
                "unsupported archive version {:?} (expected {ARCHIVE_VERSION:?})",
                arch.version
            )));
        }
        Ok(arch)
    }

    /// Rebuilds the SEM mesh and cross-checks it against the stored tables.
    /// A fresh build numbers global nodes in dedup order; when the archive
    /// was written after a node reordering, the stored numbering is restored
    /// by applying the connecting node permutation.
    pub fn into_mesh(self) -> Result<SemMesh> {
        let raw = RawMesh {
            vertices: self.vertices,
            triangles: self.triangles,
            region_tags: self.region_tags,
        };
        let mesh = build_sem_mesh(&raw, self.order)?;
        let n = mesh.num_global_nodes();
        if mesh.mu.len() != self.mu.len() || n != self.global_nodes.len() {
            return Err(SemError::Archive(
                "archive tables do not match the mesh they describe".into(),
            ));
        }
        let mesh = if mesh.mu == self.mu {
            mesh
        } else {
            let mut np = vec![u32::MAX; n];
            for (slot, &stored) in self.mu.iter().enumerate() {
                let rebuilt = mesh.mu[slot];
                let entry = &mut np[stored as usize];
                if *entry != u32::MAX && *entry != rebuilt {
                    return Err(SemError::Archive(
                        "archive node table is not a permutation of the mesh nodes".into(),
                    ));
                }
                *entry = rebuilt;
            }
            crate::reorder::validate(&np, n).map_err(|_| {
                SemError::Archive("archive node table is not a permutation of the mesh nodes".into())
            })?;
            let ep = crate::reorder::identity(mesh.num_elements());
            crate::reorder::apply_ordering(&mesh, &ep, &np)?
        };
        if mesh.mu != self.mu || mesh.colors != self.colors || mesh.global_nodes != self.global_nodes {
            return Err(SemError::Archive(
                "archive tables do not match the mesh they describe".into(),
            ));
        }
        Ok(mesh)
    }
}

/// Snapshot CSV: one row per global node, columns x0, x1, u.
pub fn snapshot_csv(mesh: &SemMesh, u: &[f64]) -> String {
    let mut s = String::from("x0,x1,u\n");
    for (p, val) in mesh.global_nodes.iter().zip(u) {
        s.push_str(&format!("{},{},{}\n", p[0], p[1], val));
    }
    s
}

/// Probe CSV: columns t, u.
pub fn probe_csv(trace: &[(f64, f64)]) -> String {
    let mut s = String::from("t,u\n");
    for (t, u) in trace {
        s.push_str(&format!("{t},{u}\n"));
    }
    s
}

/// Legacy ASCII VTK unstructured grid: global nodes as vertex cells with a
/// scalar pressure field.
pub fn snapshot_vtk(mesh: &SemMesh, u: &[f64]) -> String {
    let n = mesh.num_global_nodes();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 2.0\n");
    s.push_str("semwave pressure snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {n} double\n"));
    for p in &mesh.global_nodes {
        s.push_str(&format!("{} {} 0\n", p[0], p[1]));
    }
    s.push_str(&format!("CELLS {n} {}\n", 2 * n));
    for i in 0..n {
        s.push_str(&format!("1 {i}\n"));
    }
    s.push_str(&format!("CELL_TYPES {n}\n"));
    for _ in 0..n {
        s.push_str("1\n");
    }
    s.push_str(&format!("POINT_DATA {n}\nSCALARS u double 1\nLOOKUP_TABLE default\n"));
    for val in u {
        s.push_str(&format!("{val}\n"));
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestTimings {
    pub prep_load_s: f64,
    pub prep_sem_nodes_s: f64,
    pub prep_reorder_s: f64,
    pub step_mean_s: f64,
    pub step_min_s: f64,
    pub step_max_s: f64,
}

impl Default for ManifestTimings {
    fn default() -> Self {
        ManifestTimings {
            prep_load_s: 0.0,
            prep_sem_nodes_s: 0.0,
            prep_reorder_s: 0.0,
            step_mean_s: 0.0,
            step_min_s: 0.0,
            step_max_s: 0.0,
        }
    }
}

/// Machine-readable record of what a command did.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config_echo: Vec<(String, String)>,
    pub num_elements: usize,
    pub num_global_nodes: usize,
    pub order: usize,
    pub strategy: String,
    pub num_colors: usize,
    pub sfc_grid: Option<[u32; 2]>,
    pub timings: ManifestTimings,
}

impl RunManifest {
    pub fn new(command: &str, mesh: &SemMesh, strategy: Strategy) -> RunManifest {
        RunManifest {
            artifact_version: format!("semwave/{}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            config_echo: Vec::new(),
            num_elements: mesh.num_elements(),
            num_global_nodes: mesh.num_global_nodes(),
            order: mesh.order,
            strategy: strategy.token().to_string(),
            num_colors: mesh.num_colors,
            sfc_grid: None,
            timings: ManifestTimings::default(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SemError::Archive(e.to_string()))
    }
}
