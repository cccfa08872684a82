//! Subcommand implementations behind the `anyangle` binary.

pub mod bench;
pub mod reach;
pub mod render;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyangle::format::{dump_tsv, read_graph, write_graph, StoredVariant};
use anyangle::hierarchy::{EdgeHierarchy, TautNeighborTable};
use anyangle::map_io::{read_map_file, write_map};
use anyangle::mapgen::{generate, GenSpec};
use anyangle::oracle::Oracle;
use anyangle::search::{
    audit_path, query_svg, query_vg, search_tree, Enlsvg, PathResult, TreeEdge,
};
use anyangle::visgraph::{build_svg, build_vg_checks, build_vg_scans, InsertMode};
use anyangle::{Error, GridMap, GridVertex, VisGraph};
use anyhow::Context;

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Error = 1,
    NoPath = 2,
    VerifyFailed = 3,
}

/// Largest map the oracle is run on by `query --verify`.
pub const ORACLE_LIMIT: i32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BuildVariant {
    Vg,
    Svg,
    Enlsvg,
}

pub fn load_map(path: &Path) -> anyhow::Result<GridMap> {
    read_map_file(path).with_context(|| format!("reading map {}", path.display()))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// A graph file loaded against its map.
pub enum Engine {
    Vg(VisGraph),
    Svg(VisGraph),
    Enlsvg(Enlsvg),
}

impl Engine {
    pub fn load(path: &Path, map: &GridMap) -> anyhow::Result<Self> {
        let f = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
        let (header, graph, hier) = read_graph(BufReader::new(f), map)
            .with_context(|| format!("reading graph {}", path.display()))?;
        Ok(match (header.variant, hier) {
            (StoredVariant::Vg, _) => Engine::Vg(graph),
            (StoredVariant::Svg, _) => Engine::Svg(graph),
            (StoredVariant::Enlsvg, Some(h)) => Engine::Enlsvg(Enlsvg::from_parts(graph, h, map)),
            (StoredVariant::Enlsvg, None) => anyhow::bail!("graph file has no hierarchy"),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Vg(_) => "VG",
            Engine::Svg(_) => "SVG",
            Engine::Enlsvg(_) => "ENLSVG",
        }
    }

    pub fn graph(&self) -> &VisGraph {
        match self {
            Engine::Vg(g) | Engine::Svg(g) => g,
            Engine::Enlsvg(e) => &e.graph,
        }
    }

    pub fn hierarchy(&self) -> Option<&EdgeHierarchy> {
        match self {
            Engine::Enlsvg(e) => Some(&e.hierarchy),
            _ => None,
        }
    }

    pub fn query(
        &self,
        map: &GridMap,
        s: GridVertex,
        t: GridVertex,
        record_tree: bool,
    ) -> anyangle::Result<(Option<PathResult>, Vec<TreeEdge>)> {
        match self {
            Engine::Vg(g) | Engine::Svg(g) => {
                let r = match self {
                    Engine::Vg(_) => query_vg(g, map, s, t, InsertMode::Scans)?,
                    _ => query_svg(g, map, s, t)?,
                };
                let tree = if record_tree {
                    search_tree(g, map, s, t)?
                } else {
                    Vec::new()
                };
                Ok((r, tree))
            }
            Engine::Enlsvg(e) => e.query_traced(map, s, t, &mut e.new_marks(), record_tree),
        }
    }
}

pub struct BuildArgs<'a> {
    pub map: &'a Path,
    pub variant: BuildVariant,
    pub out: &'a Path,
    /// Build a full graph with pairwise checks instead of scans.
    pub checks: bool,
}

pub fn cmd_build(a: &BuildArgs) -> anyhow::Result<String> {
    let map = load_map(a.map)?;
    let t0 = Instant::now();
    let graph = match a.variant {
        BuildVariant::Vg if a.checks => build_vg_checks(&map),
        BuildVariant::Vg => build_vg_scans(&map),
        _ => build_svg(&map),
    };
    let graph_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let hierarchy = (a.variant == BuildVariant::Enlsvg).then(|| {
        let taut = TautNeighborTable::build(&graph, &map);
        EdgeHierarchy::build(&graph, &taut)
    });
    let hierarchy_ms = t1.elapsed().as_secs_f64() * 1e3;

    let f = File::create(a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_graph(BufWriter::new(f), &map, &graph, hierarchy.as_ref())
        .with_context(|| format!("writing {}", a.out.display()))?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "map {} ({}x{}, {} blocked)",
        a.map.display(),
        map.width(),
        map.height(),
        map.blocked_count()
    );
    let _ = writeln!(s, "variant {}", format!("{:?}", a.variant).to_uppercase());
    let _ = writeln!(s, "vertices {}", graph.num_vertices());
    let _ = writeln!(s, "edges {}", graph.num_edges());
    let _ = writeln!(s, "average_degree {:.4}", graph.average_degree());
    let _ = writeln!(s, "graph_ms {graph_ms:.3}");
    if let Some(h) = &hierarchy {
        let _ = writeln!(s, "hierarchy_ms {hierarchy_ms:.3}");
        let _ = writeln!(s, "max_level {}", h.max_finite_level());
        let _ = writeln!(s, "level_w_edges {}", h.num_w_edges());
        let _ = writeln!(s, "skip_vertices {}", h.skip_vertices.len());
        let _ = writeln!(s, "skip_edges {}", h.skip_edges.len());
    }
    let _ = writeln!(s, "graph_hash {}", hex(&graph.structural_hash()));
    let _ = writeln!(s, "wrote {}", a.out.display());
    Ok(s)
}

pub struct QueryArgs<'a> {
    pub graph: &'a Path,
    pub map: &'a Path,
    pub from: GridVertex,
    pub to: GridVertex,
    pub verify: bool,
    pub render: Option<&'a Path>,
    pub cell: u32,
}

pub fn cmd_query(a: &QueryArgs) -> anyhow::Result<(Status, String)> {
    let map = load_map(a.map)?;
    let engine = Engine::load(a.graph, &map)?;
    let mut s = String::new();
    let _ = writeln!(s, "variant {}", engine.name());
    let _ = writeln!(s, "start {},{}", a.from.x, a.from.y);
    let _ = writeln!(s, "goal {},{}", a.to.x, a.to.y);
    let (res, tree) = match engine.query(&map, a.from, a.to, a.render.is_some()) {
        Ok(r) => r,
        Err(Error::Unreachable(v)) => {
            let _ = writeln!(s, "no path: {v} has no traversable incident tile");
            return Ok((Status::NoPath, s));
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(out) = a.render {
        let path = res.as_ref().map_or(&[][..], |p| &p.waypoints[..]);
        let svg = render::render_svg(&render::Scene {
            map: &map,
            tree: &tree,
            path,
            start: Some(a.from),
            goal: Some(a.to),
            cell: a.cell,
        });
        std::fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    }

    let mut status = Status::Ok;
    match &res {
        Some(p) => {
            let _ = writeln!(s, "waypoints {}", p.waypoints.len());
            for v in &p.waypoints {
                let _ = writeln!(s, "  {} {}", v.x, v.y);
            }
            let _ = writeln!(s, "length {:.9}", p.length);
            let st = &p.stats;
            let _ = writeln!(s, "insert_ms {:.4}", st.insert_time.as_secs_f64() * 1e3);
            let _ = writeln!(s, "mark_ms {:.4}", st.mark_time.as_secs_f64() * 1e3);
            let _ = writeln!(s, "search_ms {:.4}", st.search_time.as_secs_f64() * 1e3);
            let _ = writeln!(s, "nodes_expanded {}", st.nodes_expanded);
            let _ = writeln!(s, "edges_marked {}", st.edges_marked);
            let _ = writeln!(s, "los_ops {}", st.los_ops);
        }
        None => {
            let _ = writeln!(s, "no path");
            status = Status::NoPath;
        }
    }

    if a.verify {
        if let Some(p) = &res {
            if audit_path(&map, &p.waypoints) {
                let _ = writeln!(s, "audit ok");
            } else {
                let _ = writeln!(s, "audit FAILED");
                status = Status::VerifyFailed;
            }
        }
        if map.width() <= ORACLE_LIMIT && map.height() <= ORACLE_LIMIT {
            let want = Oracle::new(&map).shortest(a.from, a.to);
            let got = res.as_ref().map(|p| p.length);
            match (got, want) {
                (Some(g), Some(w)) if (g - w).abs() <= 1e-9 * w.max(1.0) => {
                    let _ = writeln!(s, "OPTIMAL (oracle {w:.9})");
                }
                (None, None) => {
                    let _ = writeln!(s, "OPTIMAL (oracle finds no path either)");
                }
                _ => {
                    let _ = writeln!(s, "MISMATCH (oracle {want:?}, got {got:?})");
                    status = Status::VerifyFailed;
                }
            }
        } else {
            let _ = writeln!(
                s,
                "oracle skipped: map larger than {ORACLE_LIMIT}x{ORACLE_LIMIT}"
            );
        }
    }
    Ok((status, s))
}

pub fn cmd_dump(graph: &Path, map: &Path) -> anyhow::Result<String> {
    let map = load_map(map)?;
    let engine = Engine::load(graph, &map)?;
    Ok(dump_tsv(engine.graph(), engine.hierarchy()))
}

pub struct RenderArgs<'a> {
    pub map: &'a Path,
    pub graph: Option<&'a Path>,
    pub endpoints: Option<(GridVertex, GridVertex)>,
    pub tree: bool,
    pub out: &'a Path,
    pub cell: u32,
}

pub fn cmd_render(a: &RenderArgs) -> anyhow::Result<Status> {
    let map = load_map(a.map)?;
    let mut status = Status::Ok;
    let (mut path, mut tree) = (Vec::new(), Vec::new());
    if let Some((s, t)) = a.endpoints {
        let engine = match a.graph {
            Some(g) => Engine::load(g, &map)?,
            None => Engine::Enlsvg(Enlsvg::build(&map)),
        };
        match engine.query(&map, s, t, a.tree) {
            Ok((Some(p), tr)) => {
                path = p.waypoints;
                tree = tr;
            }
            Ok((None, tr)) => {
                status = Status::NoPath;
                tree = tr;
            }
            Err(Error::Unreachable(_)) => status = Status::NoPath,
            Err(e) => return Err(e.into()),
        }
    }
    let (start, goal) = a.endpoints.unzip();
    let svg = render::render_svg(&render::Scene {
        map: &map,
        tree: &tree,
        path: &path,
        start,
        goal,
        cell: a.cell,
    });
    std::fs::write(a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(status)
}

/// Sidecar path written next to a generated map.
pub fn sidecar_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.gen", out.display()))
}

/// Generates a map, writes it and its spec sidecar. Relative base paths in
/// the spec resolve against `base_dir`.
pub fn cmd_mapgen(spec: &GenSpec, base_dir: &Path, out: &Path) -> anyhow::Result<String> {
    let base = match &spec.source {
        Some(src) => Some(load_map(&base_dir.join(src))?),
        None => None,
    };
    let map = generate(spec, base.as_ref())?;
    std::fs::write(out, write_map(&map)).with_context(|| format!("writing {}", out.display()))?;
    let side = sidecar_path(out);
    std::fs::write(&side, spec.to_sidecar())
        .with_context(|| format!("writing {}", side.display()))?;
    Ok(format!(
        "wrote {} ({}x{}, {} blocked, hash {:016x})\n",
        out.display(),
        map.width(),
        map.height(),
        map.blocked_count(),
        map.hash64()
    ))
}

/// Parses `x,y`.
pub fn parse_vertex(s: &str) -> Result<GridVertex, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let p = |v: &str| {
        v.trim()
            .parse::<i32>()
            .map_err(|_| format!("bad coordinate `{v}`"))
    };
    Ok(GridVertex::new(p(x)?, p(y)?))
}
