//! Command-line front end: mesh preparation, simulation runs, ordering
//! benchmarks, locality reports, snapshot export, and curve dumps.
//!
//! Exit codes: 0 success, 2 usage error, 1 runtime error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use semwave::error::{Result, SemError};
use semwave::io::{
    material_vectors, parse_config, snapshot_csv, probe_csv, ManifestTimings,
    PreparedMesh, RunConfig, RunManifest,
};
use semwave::locality::{compare_orderings, report_csv, CacheConfig};
use semwave::mesh::{build_sem_mesh, load_msh, SemMesh};
use semwave::reorder::{order_mesh, Strategy};
use semwave::sfc::{gilbert_curve, standard_hilbert};
use semwave::solver::{
    build_acoustic_coefficients, estimate_time_step, run_simulation, PointSource, Probe,
    SolverConfig,
};
use semwave::synth::generate_mesh;

#[derive(Parser)]
#[command(name = "semwave", version, about = "SEM acoustic wave simulator with SFC mesh reordering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the solver kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Force deterministic execution (orderings and kernels are already
    /// deterministic; this pins the RNG seed paths).
    #[arg(long, global = true)]
    deterministic: bool,
    /// Seed for synthetic meshes and shuffles.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: SemError| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Load an MSH file, add SEM nodes, reorder, and write a prepared-mesh archive.
    Prepare {
        msh: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value = "none", value_parser = parse_strategy)]
        strategy: Strategy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a simulation described by a config file.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Time simulation steps across orderings and thread counts.
    Bench {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "none,sfc", value_parser = parse_strategy)]
        strategies: Vec<Strategy>,
        #[arg(long = "thread-counts", value_delimiter = ',', default_value = "1")]
        thread_counts: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
    },
    /// Compare cache behavior across orderings.
    Locality {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "none,conn,dist,sfc", value_parser = parse_strategy)]
        strategies: Vec<Strategy>,
        #[arg(long, default_value_t = 4 << 20)]
        cache_bytes: usize,
        #[arg(long, default_value_t = 64)]
        line_bytes: usize,
        #[arg(long, default_value_t = 16)]
        ways: usize,
        #[arg(long, default_value_t = 64)]
        record_bytes: usize,
    },
    /// Convert a snapshot CSV to csv or vtk.
    Export {
        snapshot: PathBuf,
        #[arg(long, value_parser = ["csv", "vtk"])]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump a space-filling curve path as x,y lines.
    Curve {
        width: u32,
        height: u32,
        /// Dump standard_hilbert(k) instead of the generalized curve.
        #[arg(long)]
        standard: Option<u32>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: failed to configure thread pool: {e}");
            std::process::exit(1);
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare { msh, order, strategy, out } => cmd_prepare(&msh, order, strategy, &out),
        Command::Simulate { config, out_dir } => cmd_simulate(&config, &out_dir, cli.seed),
        Command::Bench { config, strategies, thread_counts, repetitions } => {
            cmd_bench(&config, &strategies, &thread_counts, repetitions, cli.seed)
        }
        Command::Locality { config, strategies, cache_bytes, line_bytes, ways, record_bytes } => {
            let cache = CacheConfig { size_bytes: cache_bytes, line_bytes, ways };
            cmd_locality(&config, &strategies, &cache, record_bytes, cli.seed)
        }
        Command::Export { snapshot, format, out } => cmd_export(&snapshot, &format, &out),
        Command::Curve { width, height, standard } => cmd_curve(width, height, standard),
    }
}

/// Builds the SEM mesh a config points at (prepared archive, MSH file, or
/// synthetic spec) and applies its ordering strategy. Returns the mesh, the
/// applied strategy, the SFC grid if any, and preparation timings.
fn config_mesh(cfg: &RunConfig, seed: u64) -> Result<(SemMesh, Strategy, Option<[u32; 2]>, ManifestTimings)> {
    let mut timings = ManifestTimings::default();
    if let Some(path) = &cfg.prepared_path {
        let started = Instant::now();
        let text = std::fs::read_to_string(path)?;
        let arch = PreparedMesh::from_json(&text)?;
        let strategy: Strategy = arch.strategy.parse()?;
        let grid = arch.sfc_grid;
        let mesh = arch.into_mesh()?;
        timings.prep_load_s = started.elapsed().as_secs_f64();
        return Ok((mesh, strategy, grid, timings));
    }
    let started = Instant::now();
    let raw = if let Some(path) = &cfg.mesh_path {
        load_msh(&std::fs::read(path)?)?
    } else if let Some(synth) = &cfg.synth {
        let mut synth = synth.clone();
        // A zero config seed defers to the CLI-level --seed flag.
        if synth.seed == 0 {
            synth.seed = seed;
        }
        generate_mesh(&synth)
    } else {
        return Err(SemError::Config(
            "config must set one of: prepared, mesh, synth".into(),
        ));
    };
    timings.prep_load_s = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let mesh = build_sem_mesh(&raw, cfg.order)?;
    timings.prep_sem_nodes_s = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let (mesh, _, _, grid) = order_mesh(&mesh, cfg.strategy)?;
    timings.prep_reorder_s = started.elapsed().as_secs_f64();
    Ok((mesh, cfg.strategy, grid.map(|g| [g.w_b, g.h_b]), timings))
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::write(path, manifest.to_json()? + "\n")?;
    Ok(())
}

fn cmd_prepare(msh: &Path, order: usize, strategy: Strategy, out: &Path) -> Result<()> {
    let started = Instant::now();
    let raw = load_msh(&std::fs::read(msh)?)?;
    let load_s = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let mesh = build_sem_mesh(&raw, order)?;
    let sem_s = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let (mesh, _, _, grid) = order_mesh(&mesh, strategy)?;
    let reorder_s = started.elapsed().as_secs_f64();

    let grid = grid.map(|g| [g.w_b, g.h_b]);
    let arch = PreparedMesh::from_mesh(&mesh, strategy, grid);
    std::fs::write(out, arch.to_json()? + "\n")?;

    let mut manifest = RunManifest::new("prepare", &mesh, strategy);
    manifest.sfc_grid = grid;
    manifest.timings.prep_load_s = load_s;
    manifest.timings.prep_sem_nodes_s = sem_s;
    manifest.timings.prep_reorder_s = reorder_s;
    let manifest_path = out.with_extension("manifest.json");
    write_manifest(&manifest_path, &manifest)?;
    println!(
        "prepared {} elements, {} global nodes, {} colors -> {}",
        mesh.num_elements(),
        mesh.num_global_nodes(),
        mesh.num_colors,
        out.display()
    );
    Ok(())
}

fn cmd_simulate(config_path: &Path, out_dir: &Path, seed: u64) -> Result<()> {
    let cfg = parse_config(&std::fs::read_to_string(config_path)?)?;
    let (mesh, strategy, grid, timings) = config_mesh(&cfg, seed)?;
    let (rho, k) = material_vectors(&mesh, &cfg.materials)?;
    let coeffs = build_acoustic_coefficients(&mesh, &rho, &k)?;
    let h = cfg.h.unwrap_or_else(|| estimate_time_step(&mesh, &coeffs, cfg.cfl_factor));
    let sources: Vec<PointSource> = cfg
        .sources
        .iter()
        .map(|s| PointSource::at(&mesh, [s.x, s.y], s.f_peak, s.t0, s.amplitude))
        .collect();
    let probes: Vec<Probe> = cfg.probes.iter().map(|&p| Probe::at(&mesh, p)).collect();
    let solver_cfg = SolverConfig {
        h,
        n_steps: cfg.n_steps,
        probe_stride: cfg.probe_stride.max(1),
        snapshot_times: cfg.snapshot_times.clone(),
        energy_stride: cfg.energy_stride,
    };
    let out = run_simulation(&solver_cfg, &mesh, &coeffs, &sources, &probes, None)?;

    std::fs::create_dir_all(out_dir)?;
    for (i, trace) in out.probe_traces.iter().enumerate() {
        std::fs::write(out_dir.join(format!("probe_{i}.csv")), probe_csv(trace))?;
    }
    for (i, (t, u)) in out.snapshots.iter().enumerate() {
        let path = out_dir.join(format!("snapshot_{i}_t{t}.csv"));
        std::fs::write(path, snapshot_csv(&mesh, u))?;
    }
    if !out.energy.is_empty() {
        std::fs::write(out_dir.join("energy.csv"), probe_csv(&out.energy).replace("t,u", "t,energy"))?;
    }

    let mut manifest = RunManifest::new("simulate", &mesh, strategy);
    manifest.config_echo = cfg.echo.clone();
    manifest.sfc_grid = grid;
    manifest.timings = timings;
    if !out.step_times.is_empty() {
        let n = out.step_times.len() as f64;
        manifest.timings.step_mean_s = out.step_times.iter().sum::<f64>() / n;
        manifest.timings.step_min_s = out.step_times.iter().cloned().fold(f64::INFINITY, f64::min);
        manifest.timings.step_max_s = out.step_times.iter().cloned().fold(0.0, f64::max);
    }
    write_manifest(&out_dir.join("manifest.json"), &manifest)?;
    println!(
        "simulated {} steps (h = {h:.3e}) on {} elements; outputs in {}",
        out.steps_completed,
        mesh.num_elements(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_bench(
    config_path: &Path,
    strategies: &[Strategy],
    thread_counts: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<()> {
    let base = parse_config(&std::fs::read_to_string(config_path)?)?;
    let mut rows: Vec<(String, usize, f64, f64)> = Vec::new();
    let mut strategies = strategies.to_vec();
    strategies.sort_by_key(|s| s.token());
    let mut thread_counts = thread_counts.to_vec();
    thread_counts.sort_unstable();

    for &strategy in &strategies {
        let mut cfg = base.clone();
        cfg.strategy = strategy;
        let (mesh, _, _, _) = config_mesh(&cfg, seed)?;
        let (rho, k) = material_vectors(&mesh, &cfg.materials)?;
        let coeffs = build_acoustic_coefficients(&mesh, &rho, &k)?;
        let h = cfg.h.unwrap_or_else(|| estimate_time_step(&mesh, &coeffs, cfg.cfl_factor));
        let sources: Vec<PointSource> = cfg
            .sources
            .iter()
            .map(|s| PointSource::at(&mesh, [s.x, s.y], s.f_peak, s.t0, s.amplitude))
            .collect();
        let solver_cfg = SolverConfig {
            h,
            n_steps: cfg.n_steps,
            probe_stride: 0,
            snapshot_times: Vec::new(),
            energy_stride: 0,
        };
        for &threads in &thread_counts {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| SemError::Config(format!("thread pool: {e}")))?;
            // One warm-up repetition, then timed repetitions.
            let mut means = Vec::with_capacity(repetitions);
            for rep in 0..=repetitions {
                let out = pool.install(|| {
                    run_simulation(&solver_cfg, &mesh, &coeffs, &sources, &[], None)
                })?;
                if rep > 0 {
                    let n = out.step_times.len() as f64;
                    means.push(out.step_times.iter().sum::<f64>() / n);
                }
            }
            let mean = means.iter().sum::<f64>() / means.len() as f64;
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / means.len() as f64;
            rows.push((strategy.token().to_string(), threads, mean, var.sqrt()));
        }
    }
    println!("strategy,threads,mean_step_s,stddev_step_s");
    for (s, t, mean, sd) in rows {
        println!("{s},{t},{mean:.6e},{sd:.6e}");
    }
    Ok(())
}

fn cmd_locality(
    config_path: &Path,
    strategies: &[Strategy],
    cache: &CacheConfig,
    record_bytes: usize,
    seed: u64,
) -> Result<()> {
    let mut cfg = parse_config(&std::fs::read_to_string(config_path)?)?;
    cfg.strategy = Strategy::None;
    let (mesh, _, _, _) = config_mesh(&cfg, seed)?;
    let reports = compare_orderings(&mesh, strategies, cache, record_bytes)?;
    print!("{}", report_csv(&reports));
    Ok(())
}

fn cmd_export(snapshot: &Path, format: &str, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(snapshot)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "x0,x1,u" {
        return Err(SemError::Config(format!(
            "{}: expected snapshot CSV with header x0,x1,u",
            snapshot.display()
        )));
    }
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(SemError::Config(format!("snapshot row {}: expected 3 columns", i + 2)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| SemError::Config(format!("snapshot row {}: bad number {s:?}", i + 2)))
        };
        points.push([parse(cols[0])?, parse(cols[1])?]);
        values.push(parse(cols[2])?);
    }
    let rendered = match format {
        "csv" => {
            let mut s = String::from("x0,x1,u\n");
            for (p, v) in points.iter().zip(&values) {
                s.push_str(&format!("{},{},{}\n", p[0], p[1], v));
            }
            s
        }
        "vtk" => point_cloud_vtk(&points, &values),
        _ => unreachable!("clap restricts formats"),
    };
    std::fs::write(out, rendered)?;
    println!("exported {} points -> {}", points.len(), out.display());
    Ok(())
}

/// Legacy ASCII VTK for a bare point cloud (mirrors io::snapshot_vtk).
fn point_cloud_vtk(points: &[[f64; 2]], values: &[f64]) -> String {
    let n = points.len();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 2.0\n");
    s.push_str("semwave pressure snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {n} double\n"));
    for p in points {
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
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    s
}

fn cmd_curve(width: u32, height: u32, standard: Option<u32>) -> Result<()> {
    let path = match standard {
        Some(k) => standard_hilbert(k)?,
        None => gilbert_curve(width, height)?,
    };
    for &(x, y) in &path.cells {
        println!("{x},{y}");
    }
    Ok(())
}
