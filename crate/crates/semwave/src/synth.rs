//! Synthetic triangle meshes for tests and benchmarks.
//!
//! Produces structured triangulations of a rectangle with optional vertex
//! jitter, random diagonal flips, grading (element sizes growing along x),
//! and a seeded scramble of vertex/element numbering so the "none" ordering
//! behaves like an arbitrary mesher output rather than a raster sweep.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::RawMesh;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub nx: usize,
    pub ny: usize,
    pub width: f64,
    pub height: f64,
    /// Vertex jitter as a fraction of the local cell size, applied to
    /// interior vertices only. Keep below ~0.3 to preserve positive areas.
    pub jitter: f64,
    /// Geometric grading factor for column widths (1.0 = uniform). A value
    /// g > 1 makes the right-most columns about g times wider than the left.
    pub grading: f64,
    /// Shuffle vertex and element numbering.
    pub scramble: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            nx: 8,
            ny: 8,
            width: 1.0,
            height: 1.0,
            jitter: 0.0,
            grading: 1.0,
            scramble: false,
            seed: 1,
        }
    }
}

/// Structured nx x ny quad grid split into 2 triangles per cell.
pub fn generate_mesh(cfg: &SynthConfig) -> RawMesh {
    let (nx, ny) = (cfg.nx, cfg.ny);
    assert!(nx >= 1 && ny >= 1, "grid must be at least 1x1");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Column abscissae, geometrically graded when requested.
    let xs = graded_coords(nx, cfg.width, cfg.grading);
    let ys = graded_coords(ny, cfg.height, 1.0);

    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let mut x = xs[i];
            let mut y = ys[j];
            if cfg.jitter > 0.0 && i > 0 && i < nx && j > 0 && j < ny {
                let hx = (xs[i + 1] - xs[i - 1]) / 2.0;
                let hy = (ys[j + 1] - ys[j - 1]) / 2.0;
                x += rng.gen_range(-cfg.jitter..cfg.jitter) * hx;
                y += rng.gen_range(-cfg.jitter..cfg.jitter) * hy;
            }
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            let flip = cfg.jitter > 0.0 && rng.gen_bool(0.5);
            if flip {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    let mut region_tags = vec![1i32; triangles.len()];

    if cfg.scramble {
        // Renumber vertices with a random permutation...
        let mut vperm: Vec<usize> = (0..vertices.len()).collect();
        vperm.shuffle(&mut rng);
        let mut new_vertices = vec![[0.0; 2]; vertices.len()];
        for (old, &new) in vperm.iter().enumerate() {
            new_vertices[new] = vertices[old];
        }
        for t in &mut triangles {
            for v in t.iter_mut() {
                *v = vperm[*v];
            }
        }
        vertices = new_vertices;
        // ...and shuffle the element order.
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        order.shuffle(&mut rng);
        triangles = order.iter().map(|&e| triangles[e]).collect();
        region_tags = order.iter().map(|&e| region_tags[e]).collect();
    }

    RawMesh { vertices, triangles, region_tags }
}

fn graded_coords(n: usize, extent: f64, grading: f64) -> Vec<f64> {
    let mut widths = Vec::with_capacity(n);
    if (grading - 1.0).abs() < 1e-12 {
        widths.resize(n, 1.0);
    } else {
        let r = grading.powf(1.0 / (n.max(2) as f64 - 1.0));
        let mut w = 1.0;
        for _ in 0..n {
            widths.push(w);
            w *= r;
        }
    }
    let total: f64 = widths.iter().sum();
    let mut coords = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    coords.push(0.0);
    for w in widths {
        acc += w;
        coords.push(acc / total * extent);
    }
    coords
}
