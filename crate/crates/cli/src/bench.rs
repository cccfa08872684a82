//! Benchmark runs over a directory of maps, with per-stage timings and
//! optional optimality checks.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyangle::map_io::{
    parse_scenarios, read_map_file, scenario_vertex, EndpointMapping, ScenarioEntry,
};
use anyangle::oracle::Oracle;
use anyangle::search::{audit_path, query_vg, Enlsvg, PathResult};
use anyangle::visgraph::{build_svg, build_vg_checks, build_vg_scans, InsertMode};
use anyangle::{GridMap, GridVertex, VisGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const REPORT_FORMAT: &str = "anyangle-bench";
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum, Serialize)]
pub enum Algorithm {
    /// Full visibility graph, endpoints attached by pairwise checks.
    #[value(name = "vg-c")]
    #[serde(rename = "VG_C")]
    VgC,
    /// Full visibility graph, endpoints attached by scans.
    #[value(name = "vg-s")]
    #[serde(rename = "VG_S")]
    VgS,
    #[value(name = "svg")]
    #[serde(rename = "SVG")]
    Svg,
    #[value(name = "enlsvg")]
    #[serde(rename = "ENLSVG")]
    Enlsvg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::VgC,
        Algorithm::VgS,
        Algorithm::Svg,
        Algorithm::Enlsvg,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::VgC => "VG_C",
            Algorithm::VgS => "VG_S",
            Algorithm::Svg => "SVG",
            Algorithm::Enlsvg => "ENLSVG",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    /// Query pairs per map.
    pub runs: usize,
    /// Queries run before timing starts; their results are discarded.
    pub warmup: usize,
    pub seed: u64,
    pub verify: bool,
    /// Use `<map>.scen` files when present instead of sampled pairs.
    pub scenarios: bool,
    pub mapping: EndpointMapping,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            runs: 100,
            warmup: 5,
            seed: 0,
            verify: false,
            scenarios: false,
            mapping: EndpointMapping::TopLeft,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AlgoReport {
    pub algorithm: String,
    pub build_ms: f64,
    pub vertices: usize,
    pub edges: usize,
    pub average_degree: f64,
    pub queries: usize,
    pub no_path: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub mean_insert_ms: f64,
    pub mean_mark_ms: f64,
    pub mean_search_ms: f64,
    pub mean_nodes_expanded: f64,
    pub mean_edges_relaxed: f64,
    pub mean_los_ops: f64,
    pub mean_edges_marked: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MapReport {
    pub map: String,
    pub width: i32,
    pub height: i32,
    pub blocked: usize,
    pub pairs: usize,
    pub from_scenarios: bool,
    pub algorithms: Vec<AlgoReport>,
    /// Pairs where algorithms, the oracle or the scenario bound disagree.
    pub mismatches: usize,
    pub audit_failures: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub format: &'static str,
    pub version: u32,
    pub seed: u64,
    pub runs: usize,
    pub warmup: usize,
    pub verify: bool,
    pub maps: Vec<MapReport>,
    pub skipped: Vec<String>,
}

impl BenchReport {
    pub fn failures(&self) -> usize {
        self.maps
            .iter()
            .map(|m| m.mismatches + m.audit_failures)
            .sum()
    }

    /// Fixed-width table, one row per map and algorithm.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {REPORT_FORMAT} v{REPORT_VERSION} seed={} runs={} warmup={} verify={}",
            self.seed, self.runs, self.warmup, self.verify
        );
        let _ = writeln!(
            s,
            "{:<24} {:<7} {:>6} {:>10} {:>7} {:>10} {:>10} {:>9} {:>9} {:>9} {:>10} {:>9}",
            "map",
            "algo",
            "pairs",
            "build_ms",
            "deg",
            "mean_ms",
            "median_ms",
            "insert",
            "mark",
            "search",
            "expanded",
            "los_ops"
        );
        for m in &self.maps {
            for a in &m.algorithms {
                let _ = writeln!(
                    s,
                    "{:<24} {:<7} {:>6} {:>10.3} {:>7.2} {:>10.4} {:>10.4} {:>9.4} {:>9.4} {:>9.4} {:>10.1} {:>9.1}",
                    m.map,
                    a.algorithm,
                    a.queries,
                    a.build_ms,
                    a.average_degree,
                    a.mean_ms,
                    a.median_ms,
                    a.mean_insert_ms,
                    a.mean_mark_ms,
                    a.mean_search_ms,
                    a.mean_nodes_expanded,
                    a.mean_los_ops
                );
            }
            if m.mismatches + m.audit_failures > 0 {
                let _ = writeln!(
                    s,
                    "{:<24} {} mismatches, {} audit failures",
                    m.map, m.mismatches, m.audit_failures
                );
            }
        }
        for k in &self.skipped {
            let _ = writeln!(s, "# skipped {k}");
        }
        s
    }
}

enum Built {
    Plain(VisGraph, InsertMode),
    Levelled(Enlsvg),
}

impl Built {
    fn new(alg: Algorithm, map: &GridMap) -> Self {
        match alg {
            Algorithm::VgC => Built::Plain(build_vg_checks(map), InsertMode::Checks),
            Algorithm::VgS => Built::Plain(build_vg_scans(map), InsertMode::Scans),
            Algorithm::Svg => Built::Plain(build_svg(map), InsertMode::Scans),
            Algorithm::Enlsvg => Built::Levelled(Enlsvg::build(map)),
        }
    }

    fn graph(&self) -> &VisGraph {
        match self {
            Built::Plain(g, _) => g,
            Built::Levelled(e) => &e.graph,
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Seeded reachable pairs; the stream depends only on the seed and the map
/// contents.
pub fn sample_pairs(map: &GridMap, runs: usize, seed: u64) -> Vec<(GridVertex, GridVertex)> {
    let comps = crate::reach::Components::new(map);
    let cand = comps.traversable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ map.hash64());
    let mut out = Vec::with_capacity(runs);
    if cand.len() < 2 {
        return out;
    }
    let mut attempts = 0;
    while out.len() < runs && attempts < runs.max(1) * 1000 {
        attempts += 1;
        let s = cand[rng.gen_range(0..cand.len())];
        let t = cand[rng.gen_range(0..cand.len())];
        if s != t && comps.connected(s, t) {
            out.push((s, t));
        }
    }
    out
}

struct Job {
    pair: (GridVertex, GridVertex),
    reference: Option<f64>,
}

fn jobs_for(
    map: &GridMap,
    name: &str,
    scen: Option<&[ScenarioEntry]>,
    cfg: &BenchConfig,
    notes: &mut Vec<String>,
) -> Vec<Job> {
    let Some(entries) = scen else {
        return sample_pairs(map, cfg.runs, cfg.seed)
            .into_iter()
            .map(|pair| Job {
                pair,
                reference: None,
            })
            .collect();
    };
    let mut jobs = Vec::new();
    let mut dropped = 0;
    for e in entries.iter().take(cfg.runs) {
        if (e.map_width, e.map_height) != (map.width(), map.height()) {
            dropped += 1;
            continue;
        }
        match (
            scenario_vertex(map, e.start, cfg.mapping),
            scenario_vertex(map, e.goal, cfg.mapping),
        ) {
            (Some(s), Some(t)) => jobs.push(Job {
                pair: (s, t),
                reference: Some(e.optimal),
            }),
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        notes.push(format!(
            "{name}: {dropped} scenario entries had no usable endpoints"
        ));
    }
    jobs
}

fn run_query(
    b: &Built,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
) -> anyangle::Result<Option<PathResult>> {
    match b {
        Built::Plain(g, mode) => query_vg(g, map, s, t, *mode),
        Built::Levelled(e) => e.query(map, s, t),
    }
}

pub fn bench_map(
    name: &str,
    map: &GridMap,
    scen: Option<&[ScenarioEntry]>,
    cfg: &BenchConfig,
) -> MapReport {
    let mut report = MapReport {
        map: name.to_string(),
        width: map.width(),
        height: map.height(),
        blocked: map.blocked_count(),
        from_scenarios: scen.is_some(),
        ..Default::default()
    };
    let jobs = jobs_for(map, name, scen, cfg, &mut report.notes);
    report.pairs = jobs.len();

    // lengths[alg][job]
    let mut lengths: Vec<Vec<Option<f64>>> = Vec::new();
    for &alg in &cfg.algorithms {
        let t0 = Instant::now();
        let built = Built::new(alg, map);
        let build_ms = ms(t0.elapsed());
        let g = built.graph();

        for job in jobs.iter().take(cfg.warmup) {
            let _ = run_query(&built, map, job.pair.0, job.pair.1);
        }
        let mut totals = Vec::with_capacity(jobs.len());
        let mut results = Vec::with_capacity(jobs.len());
        for job in &jobs {
            let t0 = Instant::now();
            let r = run_query(&built, map, job.pair.0, job.pair.1);
            totals.push(ms(t0.elapsed()));
            let r = r.unwrap_or(None);
            if cfg.verify {
                if let Some(p) = &r {
                    if !audit_path(map, &p.waypoints) {
                        report.audit_failures += 1;
                    }
                }
            }
            results.push(r);
        }
        let found: Vec<&PathResult> = results.iter().flatten().collect();
        let stat = |f: &dyn Fn(&PathResult) -> f64| mean(found.iter().map(|p| f(p)));
        report.algorithms.push(AlgoReport {
            algorithm: alg.label().to_string(),
            build_ms,
            vertices: g.num_vertices(),
            edges: g.num_edges(),
            average_degree: g.average_degree(),
            queries: jobs.len(),
            no_path: results.iter().filter(|r| r.is_none()).count(),
            mean_ms: mean(totals.iter().copied()),
            median_ms: median(totals),
            mean_insert_ms: stat(&|p| ms(p.stats.insert_time)),
            mean_mark_ms: stat(&|p| ms(p.stats.mark_time)),
            mean_search_ms: stat(&|p| ms(p.stats.search_time)),
            mean_nodes_expanded: stat(&|p| p.stats.nodes_expanded as f64),
            mean_edges_relaxed: stat(&|p| p.stats.edges_relaxed as f64),
            mean_los_ops: stat(&|p| p.stats.los_ops as f64),
            mean_edges_marked: stat(&|p| p.stats.edges_marked as f64),
        });
        lengths.push(results.into_iter().map(|r| r.map(|p| p.length)).collect());
    }

    let oracle = cfg.verify.then(|| Oracle::new(map));
    for (i, job) in jobs.iter().enumerate() {
        let mut want = lengths.first().and_then(|l| l[i]);
        if let Some(o) = &oracle {
            want = o.shortest(job.pair.0, job.pair.1);
        }
        let agree = lengths.iter().all(|l| match (l[i], want) {
            (Some(a), Some(b)) => close(a, b),
            (None, None) => true,
            _ => false,
        });
        // scenario references are 8-directional, so never shorter
        let bounded = match (job.reference, want) {
            (Some(r), Some(w)) => w <= r + 1e-6,
            _ => true,
        };
        if !agree || !bounded {
            report.mismatches += 1;
        }
    }
    report
}

pub fn find_scenarios(map_path: &Path) -> Option<PathBuf> {
    let a = PathBuf::from(format!("{}.scen", map_path.display()));
    let b = map_path.with_extension("scen");
    [a, b].into_iter().find(|p| p.is_file())
}

pub fn run_bench(corpus: &Path, cfg: &BenchConfig) -> anyhow::Result<BenchReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus)?
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "map"))
        .collect();
    paths.sort();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()?;
    let results: Vec<Result<MapReport, String>> = pool.install(|| {
        paths
            .par_iter()
            .map(|path| {
                let name = path
                    .file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                let map = read_map_file(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let scen = if cfg.scenarios {
                    match find_scenarios(path) {
                        Some(sp) => {
                            let text = std::fs::read_to_string(&sp)
                                .map_err(|e| format!("{}: {e}", sp.display()))?;
                            Some(
                                parse_scenarios(&text)
                                    .map_err(|e| format!("{}: {e}", sp.display()))?,
                            )
                        }
                        None => None,
                    }
                } else {
                    None
                };
                Ok(bench_map(&name, &map, scen.as_deref(), cfg))
            })
            .collect()
    });

    let mut maps = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(m) => maps.push(m),
            Err(e) => {
                eprintln!("warning: skipping {e}");
                skipped.push(e);
            }
        }
    }
    Ok(BenchReport {
        format: REPORT_FORMAT,
        version: REPORT_VERSION,
        seed: cfg.seed,
        runs: cfg.runs,
        warmup: cfg.warmup,
        verify: cfg.verify,
        maps,
        skipped,
    })
}
