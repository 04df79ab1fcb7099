//! Software locality model: node-access traces and a set-associative LRU
//! cache simulator.
//!
//! Hardware miss counters are replaced by a deterministic model. The trace
//! enumerates, per element in storage order, the cache lines of the
//! element-local record followed by the lines of every gathered global node
//! record; the simulator replays it through a configurable LRU cache and a
//! Fenwick-tree exact reuse-distance pass. Only relative comparisons between
//! orderings are meaningful.

use std::collections::HashMap;

use crate::error::{Result, SemError};
use crate::mesh::SemMesh;
use crate::reorder::{order_mesh, Strategy};

/// Sequence of cache-line identifiers.
#[derive(Debug, Clone, Default)]
pub struct AccessTrace {
    pub lines: Vec<u64>,
}

/// Element-local records live far above every global-node record so the two
/// regions can never alias.
const ELEMENT_REGION_BASE: u64 = 1 << 40;

fn push_record_lines(lines: &mut Vec<u64>, byte_addr: u64, record_bytes: u64, line_bytes: u64) {
    let first = byte_addr / line_bytes;
    let last = (byte_addr + record_bytes - 1) / line_bytes;
    for line in first..=last {
        lines.push(line);
    }
}

/// Builds the access trace implied by an in-order element traversal: one
/// element-local record, then the global-node record of each mu(p,e) gather.
pub fn element_access_trace(
    mesh: &SemMesh,
    node_record_bytes: usize,
    line_bytes: usize,
) -> Result<AccessTrace> {
    if node_record_bytes == 0 || line_bytes == 0 {
        return Err(SemError::InvalidCacheConfig(
            "record and line sizes must be positive".into(),
        ));
    }
    let record = node_record_bytes as u64;
    let line = line_bytes as u64;
    let npe = mesh.nodes_per_element();
    let mut trace = AccessTrace::default();
    for e in 0..mesh.num_elements() {
        push_record_lines(
            &mut trace.lines,
            ELEMENT_REGION_BASE + e as u64 * record,
            record,
            line,
        );
        for p in 0..npe {
            let nu = mesh.mu[e * npe + p] as u64;
            push_record_lines(&mut trace.lines, nu * record, record, line);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheConfig {
    pub size_bytes: usize,
    pub line_bytes: usize,
    pub ways: usize,
}

impl Default for CacheConfig {
    /// 4 MB, 64-byte lines, 16-way.
    fn default() -> Self {
        CacheConfig { size_bytes: 4 << 20, line_bytes: 64, ways: 16 }
    }
}

impl CacheConfig {
    pub fn num_sets(&self) -> Result<usize> {
        if self.size_bytes == 0 || self.line_bytes == 0 || self.ways == 0 {
            return Err(SemError::InvalidCacheConfig(
                "size, line size, and ways must be positive".into(),
            ));
        }
        let per_set = self.line_bytes * self.ways;
        if self.size_bytes % per_set != 0 {
            return Err(SemError::InvalidCacheConfig(format!(
                "size {} not divisible by line*ways = {per_set}",
                self.size_bytes
            )));
        }
        let sets = self.size_bytes / per_set;
        if !sets.is_power_of_two() {
            return Err(SemError::InvalidCacheConfig(format!(
                "set count {sets} is not a power of two"
            )));
        }
        Ok(sets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheStats {
    pub accesses: u64,
    pub misses: u64,
    pub hits: u64,
    pub miss_ratio: f64,
    pub mean_reuse_distance: f64,
}

/// Streaming set-associative LRU cache; feed it trace chunks in any split.
pub struct CacheSim {
    set_mask: u64,
    ways: usize,
    /// Per set, most-recently-used line first.
    sets: Vec<Vec<u64>>,
    pub accesses: u64,
    pub misses: u64,
}

impl CacheSim {
    pub fn new(cfg: &CacheConfig) -> Result<CacheSim> {
        let num_sets = cfg.num_sets()?;
        Ok(CacheSim {
            set_mask: num_sets as u64 - 1,
            ways: cfg.ways,
            sets: vec![Vec::new(); num_sets],
            accesses: 0,
            misses: 0,
        })
    }

    pub fn access(&mut self, line: u64) {
        self.accesses += 1;
        let set = &mut self.sets[(line & self.set_mask) as usize];
        if let Some(pos) = set.iter().position(|&l| l == line) {
            set.remove(pos);
            set.insert(0, line);
        } else {
            self.misses += 1;
            if set.len() == self.ways {
                set.pop();
            }
            set.insert(0, line);
        }
    }

    pub fn feed(&mut self, lines: &[u64]) {
        for &line in lines {
            self.access(line);
        }
    }
}

/// Exact mean reuse distance (distinct lines between consecutive uses of the
/// same line), averaged over accesses that have a prior use. Fenwick-tree
/// sweep, O(n log n).
pub fn mean_reuse_distance(lines: &[u64]) -> f64 {
    let n = lines.len();
    let mut bit = vec![0i64; n + 1];
    let add = |bit: &mut [i64], mut i: usize, delta: i64| {
        i += 1;
        while i <= n {
            bit[i] += delta;
            i += i & i.wrapping_neg();
        }
    };
    let prefix = |bit: &[i64], mut i: usize| -> i64 {
        let mut s = 0;
        while i > 0 {
            s += bit[i];
            i -= i & i.wrapping_neg();
        }
        s
    };
    let mut last_pos: HashMap<u64, usize> = HashMap::new();
    let mut total = 0u64;
    let mut reuses = 0u64;
    for (i, &line) in lines.iter().enumerate() {
        if let Some(&prev) = last_pos.get(&line) {
            // Distinct lines touched strictly between prev and i: each has
            // its latest occurrence marked in the tree.
            let distance = prefix(&bit, i) - prefix(&bit, prev + 1);
            total += distance as u64;
            reuses += 1;
            add(&mut bit, prev, -1);
        }
        add(&mut bit, i, 1);
        last_pos.insert(line, i);
    }
    if reuses == 0 {
        0.0
    } else {
        total as f64 / reuses as f64
    }
}

pub fn simulate_cache(trace: &AccessTrace, cfg: &CacheConfig) -> Result<CacheStats> {
    let mut sim = CacheSim::new(cfg)?;
    sim.feed(&trace.lines);
    let accesses = sim.accesses;
    let misses = sim.misses;
    Ok(CacheStats {
        accesses,
        misses,
        hits: accesses - misses,
        miss_ratio: if accesses == 0 { 0.0 } else { misses as f64 / accesses as f64 },
        mean_reuse_distance: mean_reuse_distance(&trace.lines),
    })
}

#[derive(Debug, Clone)]
pub struct OrderingReport {
    pub strategy: Strategy,
    pub stats: CacheStats,
}

/// Applies each ordering strategy to the mesh, replays its trace, and
/// collects per-strategy stats.
pub fn compare_orderings(
    mesh: &SemMesh,
    strategies: &[Strategy],
    cfg: &CacheConfig,
    node_record_bytes: usize,
) -> Result<Vec<OrderingReport>> {
    if strategies.is_empty() {
        return Err(SemError::Config("no ordering strategies given".into()));
    }
    let mut out = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let (ordered, _, _, _) = order_mesh(mesh, strategy)?;
        let trace = element_access_trace(&ordered, node_record_bytes, cfg.line_bytes)?;
        let stats = simulate_cache(&trace, cfg)?;
        out.push(OrderingReport { strategy, stats });
    }
    Ok(out)
}

pub fn report_csv(reports: &[OrderingReport]) -> String {
    let mut s = String::from("strategy,accesses,misses,miss_ratio,mean_reuse_distance\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{:.6},{:.3}\n",
            r.strategy.token(),
            r.stats.accesses,
            r.stats.misses,
            r.stats.miss_ratio,
            r.stats.mean_reuse_distance
        ));
    }
    s
}
