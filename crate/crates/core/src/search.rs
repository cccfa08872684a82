//! Taut A* over visibility graphs, edge marking for the levelled graph,
//! and the query entry points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::grid::{GridMap, GridVertex};
use crate::hierarchy::{
    directed_from, head, undirected, EdgeHierarchy, TautNeighborTable, LEVEL_W,
};
use crate::visgraph::{
    build_svg, insert_endpoints_with, remove_endpoints, InsertMode, QueryEndpoints, VisGraph,
};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub edges_relaxed: u64,
    /// Scans or pairwise checks spent attaching the endpoints.
    pub los_ops: u64,
    pub edges_marked: u64,
    pub insert_time: Duration,
    pub mark_time: Duration,
    pub search_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub waypoints: Vec<GridVertex>,
    pub length: f64,
    pub stats: SearchStats,
}

/// One settled step of a search, for drawing search trees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeEdge {
    pub from: GridVertex,
    pub to: GridVertex,
}

/// Per-query edge marks. Stamps are compared against a generation counter,
/// so starting a new query costs nothing.
#[derive(Clone, Debug)]
pub struct MarkState {
    gen: u32,
    edge: Vec<u32>,
    visited: Vec<u32>,
    count: usize,
}

impl MarkState {
    pub fn new(num_edges: usize) -> Self {
        MarkState {
            gen: 0,
            edge: vec![0; num_edges],
            visited: vec![0; 2 * num_edges],
            count: 0,
        }
    }

    pub fn begin(&mut self) {
        self.gen = self.gen.wrapping_add(1);
        self.count = 0;
        if self.gen == 0 {
            self.edge.fill(0);
            self.visited.fill(0);
            self.gen = 1;
        }
    }

    pub fn is_marked(&self, e: u32) -> bool {
        self.gen != 0 && self.edge[e as usize] == self.gen
    }

    pub fn marked_count(&self) -> usize {
        self.count
    }
}

/// Which graph edges a search may use.
#[derive(Clone, Copy)]
pub enum EdgeFilter<'a> {
    All,
    /// Marked edges, temporary edges and skip edges only.
    Marked {
        marks: &'a MarkState,
        hierarchy: &'a EdgeHierarchy,
    },
}

/// Marks every edge reachable from `from` along taut paths of strictly
/// increasing level, then along level-W edges up to the next skip vertex.
/// Temporary edges count as level 0; the first hop is unconstrained.
pub fn mark_edges(
    graph: &VisGraph,
    map: &GridMap,
    hierarchy: &EdgeHierarchy,
    taut: &TautNeighborTable,
    q: &QueryEndpoints,
    from: u32,
    marks: &mut MarkState,
) {
    let n = graph.num_vertices() as u32;
    let gen = marks.gen;
    let mut stack: Vec<u32> = Vec::new();
    let origin = q.vertex(graph, from);
    for (w, e) in q.neighbors(graph, from) {
        if !q.is_temp_edge(e) {
            stack.push(directed_from(graph, e, from));
            continue;
        }
        if w >= n {
            continue;
        }
        let pw = graph.vertex(w);
        for &(x, xe) in graph.neighbors(w) {
            if map.is_taut(origin, pw, graph.vertex(x)) {
                stack.push(directed_from(graph, xe, w));
            }
        }
    }
    while let Some(de) = stack.pop() {
        if marks.visited[de as usize] == gen {
            continue;
        }
        marks.visited[de as usize] = gen;
        let e = undirected(de);
        if marks.edge[e as usize] != gen {
            marks.edge[e as usize] = gen;
            marks.count += 1;
        }
        let l = hierarchy.level(e);
        if l == LEVEL_W && hierarchy.is_skip_vertex(head(graph, de)) {
            continue;
        }
        for &x in taut.exits(de) {
            let lx = hierarchy.level(undirected(x));
            let ok = if l == LEVEL_W { lx == LEVEL_W } else { lx > l };
            if ok && marks.visited[x as usize] != gen {
                stack.push(x);
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    v: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: smallest f first, then largest g
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.v.cmp(&self.v))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a raw search, before timings are attached.
pub struct Search {
    pub path: Option<(Vec<GridVertex>, f64)>,
    pub nodes_expanded: u64,
    pub edges_relaxed: u64,
    pub tree: Vec<TreeEdge>,
}

/// A* from start to goal in which a vertex may only be continued in
/// directions that keep the path taut at it.
pub fn taut_astar(
    graph: &VisGraph,
    map: &GridMap,
    q: &QueryEndpoints,
    filter: EdgeFilter<'_>,
    record_tree: bool,
) -> Search {
    let nv = q.num_vertices();
    let (s, t) = (q.start_id, q.goal_id);
    let goal = q.goal;
    let mut out = Search {
        path: None,
        nodes_expanded: 0,
        edges_relaxed: 0,
        tree: Vec::new(),
    };
    if s == t {
        out.path = Some((vec![q.start], 0.0));
        return out;
    }
    let mut g = vec![f64::INFINITY; nv];
    let mut parent = vec![NONE; nv];
    let mut pred = vec![NONE; nv];
    // skip edge id * 2 + reversed, or NONE
    let mut via = vec![NONE; nv];
    let mut heap = BinaryHeap::new();
    g[s as usize] = 0.0;
    heap.push(Entry {
        f: q.start.dist(goal),
        g: 0.0,
        v: s,
    });
    let n_base = graph.num_vertices() as u32;

    while let Some(Entry { g: gv, v, .. }) = heap.pop() {
        if gv > g[v as usize] {
            continue;
        }
        out.nodes_expanded += 1;
        if record_tree && pred[v as usize] != NONE {
            out.tree.push(TreeEdge {
                from: q.vertex(graph, pred[v as usize]),
                to: q.vertex(graph, v),
            });
        }
        if v == t {
            break;
        }
        let pv = q.vertex(graph, v);
        let par = parent[v as usize];
        let ppar = (par != NONE).then(|| q.vertex(graph, par));
        let taut_ok = |w: GridVertex| ppar.is_none_or(|p| map.is_taut(p, pv, w));

        let mut relax = |w: u32, cost: f64, tp: u32, vk: u32, heap: &mut BinaryHeap<Entry>| {
            out.edges_relaxed += 1;
            let ng = gv + cost;
            if ng < g[w as usize] {
                g[w as usize] = ng;
                parent[w as usize] = tp;
                pred[w as usize] = v;
                via[w as usize] = vk;
                heap.push(Entry {
                    f: ng + q.vertex(graph, w).dist(goal),
                    g: ng,
                    v: w,
                });
            }
        };

        for (w, e) in q.neighbors(graph, v) {
            if w == par {
                continue;
            }
            if let EdgeFilter::Marked { marks, .. } = filter {
                if !q.is_temp_edge(e) && !marks.is_marked(e) {
                    continue;
                }
            }
            let pw = q.vertex(graph, w);
            if !taut_ok(pw) {
                continue;
            }
            relax(w, q.edge(graph, e).len(), v, NONE, &mut heap);
        }
        if let EdgeFilter::Marked { hierarchy, .. } = filter {
            if v < n_base && hierarchy.is_skip_vertex(v) {
                for &(k, rev) in hierarchy.skip_neighbors(v) {
                    let se = &hierarchy.skip_edges[k as usize];
                    let (first, far, last) = if rev {
                        (se.first_hop_b, se.a, se.first_hop_a)
                    } else {
                        (se.first_hop_a, se.b, se.first_hop_b)
                    };
                    if !taut_ok(graph.vertex(first)) {
                        continue;
                    }
                    relax(far, se.weight, last, 2 * k + rev as u32, &mut heap);
                }
            }
        }
    }

    if g[t as usize].is_finite() {
        let mut ids = vec![t];
        let mut cur = t;
        while cur != s {
            let p = pred[cur as usize];
            let vk = via[cur as usize];
            if vk != NONE {
                if let EdgeFilter::Marked { hierarchy, .. } = filter {
                    let se = &hierarchy.skip_edges[(vk / 2) as usize];
                    // interior vertices, walking back from cur towards p
                    let inner = &se.path[1..se.path.len() - 1];
                    if vk & 1 == 0 {
                        ids.extend(inner.iter().rev());
                    } else {
                        ids.extend(inner.iter());
                    }
                }
            }
            ids.push(p);
            cur = p;
        }
        ids.reverse();
        let waypoints: Vec<GridVertex> = ids.iter().map(|&i| q.vertex(graph, i)).collect();
        let length = path_length(&waypoints);
        out.path = Some((waypoints, length));
    }
    out
}

pub fn path_length(waypoints: &[GridVertex]) -> f64 {
    waypoints.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Every consecutive pair sees each other and every interior turn is taut.
pub fn audit_path(map: &GridMap, waypoints: &[GridVertex]) -> bool {
    waypoints.windows(2).all(|w| map.line_of_sight(w[0], w[1]))
        && waypoints.windows(3).all(|w| map.is_taut(w[0], w[1], w[2]))
}

fn finish(search: Search, mut stats: SearchStats) -> Option<PathResult> {
    stats.nodes_expanded = search.nodes_expanded;
    stats.edges_relaxed = search.edges_relaxed;
    search.path.map(|(waypoints, length)| PathResult {
        waypoints,
        length,
        stats,
    })
}

/// Taut A* over the whole graph, endpoints attached with scans.
pub fn query_svg(
    graph: &VisGraph,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
) -> Result<Option<PathResult>> {
    query_plain(graph, map, s, t, InsertMode::Scans)
}

/// Same search on a full visibility graph, with endpoints attached by
/// pairwise checks or scans.
pub fn query_vg(
    graph: &VisGraph,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
    mode: InsertMode,
) -> Result<Option<PathResult>> {
    query_plain(graph, map, s, t, mode)
}

fn query_plain(
    graph: &VisGraph,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
    mode: InsertMode,
) -> Result<Option<PathResult>> {
    let mut stats = SearchStats::default();
    let t0 = Instant::now();
    let q = insert_endpoints_with(graph, map, s, t, mode)?;
    stats.insert_time = t0.elapsed();
    stats.los_ops = q.los_ops;
    let t1 = Instant::now();
    let search = taut_astar(graph, map, &q, EdgeFilter::All, false);
    stats.search_time = t1.elapsed();
    remove_endpoints(graph, q);
    Ok(finish(search, stats))
}

/// A sparse visibility graph with its edge hierarchy.
#[derive(Clone, Debug)]
pub struct Enlsvg {
    pub graph: VisGraph,
    pub taut: TautNeighborTable,
    pub hierarchy: EdgeHierarchy,
}

impl Enlsvg {
    pub fn build(map: &GridMap) -> Self {
        Self::from_svg(build_svg(map), map)
    }

    pub fn from_svg(graph: VisGraph, map: &GridMap) -> Self {
        let taut = TautNeighborTable::build(&graph, map);
        let hierarchy = EdgeHierarchy::build(&graph, &taut);
        Enlsvg {
            graph,
            taut,
            hierarchy,
        }
    }

    pub fn from_parts(graph: VisGraph, hierarchy: EdgeHierarchy, map: &GridMap) -> Self {
        let taut = TautNeighborTable::build(&graph, map);
        Enlsvg {
            graph,
            taut,
            hierarchy,
        }
    }

    pub fn new_marks(&self) -> MarkState {
        MarkState::new(self.graph.num_edges())
    }

    pub fn query(&self, map: &GridMap, s: GridVertex, t: GridVertex) -> Result<Option<PathResult>> {
        self.query_with(map, s, t, &mut self.new_marks())
    }

    pub fn query_with(
        &self,
        map: &GridMap,
        s: GridVertex,
        t: GridVertex,
        marks: &mut MarkState,
    ) -> Result<Option<PathResult>> {
        let (res, _) = self.query_traced(map, s, t, marks, false)?;
        Ok(res)
    }

    /// Query that can also return the search tree.
    pub fn query_traced(
        &self,
        map: &GridMap,
        s: GridVertex,
        t: GridVertex,
        marks: &mut MarkState,
        record_tree: bool,
    ) -> Result<(Option<PathResult>, Vec<TreeEdge>)> {
        let g = &self.graph;
        let mut stats = SearchStats::default();
        let t0 = Instant::now();
        let q = insert_endpoints_with(g, map, s, t, InsertMode::Scans)?;
        stats.insert_time = t0.elapsed();
        stats.los_ops = q.los_ops;

        let t1 = Instant::now();
        marks.begin();
        mark_edges(g, map, &self.hierarchy, &self.taut, &q, q.start_id, marks);
        mark_edges(g, map, &self.hierarchy, &self.taut, &q, q.goal_id, marks);
        stats.mark_time = t1.elapsed();
        stats.edges_marked = marks.marked_count() as u64;

        let t2 = Instant::now();
        let filter = EdgeFilter::Marked {
            marks,
            hierarchy: &self.hierarchy,
        };
        let mut search = taut_astar(g, map, &q, filter, record_tree);
        stats.search_time = t2.elapsed();
        remove_endpoints(g, q);
        let tree = std::mem::take(&mut search.tree);
        Ok((finish(search, stats), tree))
    }
}

/// Levelled query with a fresh mark state.
pub fn query_enlsvg(
    e: &Enlsvg,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
) -> Result<Option<PathResult>> {
    e.query(map, s, t)
}

/// Search tree of a plain query, for rendering.
pub fn search_tree(
    graph: &VisGraph,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
) -> Result<Vec<TreeEdge>> {
    let q = insert_endpoints_with(graph, map, s, t, InsertMode::Scans)?;
    let search = taut_astar(graph, map, &q, EdgeFilter::All, true);
    Ok(search.tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::visgraph::build_vg_checks;

    fn v(x: i32, y: i32) -> GridVertex {
        GridVertex::new(x, y)
    }

    #[test]
    fn empty_map_is_one_segment() {
        let m = GridMap::new(8, 8);
        let g = build_svg(&m);
        let r = query_svg(&g, &m, v(0, 0), v(7, 3)).unwrap().unwrap();
        assert_eq!(r.waypoints, vec![v(0, 0), v(7, 3)]);
        assert!((r.length - (58f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn same_start_and_goal() {
        let m = GridMap::from_blocked_tiles(4, 4, &[(1, 1)]);
        let e = Enlsvg::build(&m);
        let r = e.query(&m, v(3, 3), v(3, 3)).unwrap().unwrap();
        assert_eq!(r.waypoints, vec![v(3, 3)]);
        assert_eq!(r.length, 0.0);
    }

    #[test]
    fn detour_around_one_tile() {
        let m = GridMap::from_blocked_tiles(5, 5, &[(2, 2)]);
        let vg = build_vg_checks(&m);
        let e = Enlsvg::build(&m);
        let (s, t) = (v(0, 0), v(5, 5));
        let a = query_vg(&vg, &m, s, t, InsertMode::Checks)
            .unwrap()
            .unwrap();
        let b = query_svg(&e.graph, &m, s, t).unwrap().unwrap();
        let c = e.query(&m, s, t).unwrap().unwrap();
        let want = 2.0 * (13f64).sqrt();
        for r in [&a, &b, &c] {
            assert!((r.length - want).abs() < 1e-9, "{}", r.length);
            assert!(audit_path(&m, &r.waypoints));
        }
        assert_eq!(c.waypoints.len(), 3);
    }

    #[test]
    fn sealed_room_has_no_path() {
        let m = GridMap::from_ascii(&["#####.", "#...#.", "#####.", "......"]);
        let e = Enlsvg::build(&m);
        assert!(e.query(&m, v(1, 1), v(6, 4)).unwrap().is_none());
        assert!(query_svg(&e.graph, &m, v(1, 1), v(6, 4)).unwrap().is_none());
    }

    #[test]
    fn audit_rejects_kink() {
        let m = GridMap::new(6, 6);
        assert!(audit_path(&m, &[v(0, 0), v(4, 4)]));
        assert!(!audit_path(&m, &[v(0, 0), v(2, 1), v(4, 0)]));
    }
}
