//! Visibility graphs over convex corners, and the per-query side buffer that
//! attaches start and goal vertices without touching the built graph.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{GridMap, GridVertex};
use crate::scan::{nearest_per_direction, scan_all_directions, scan_targets, scan_taut_directions};

pub const NO_VERTEX: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Vg,
    Svg,
}

/// Undirected edge, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub sq_len: i64,
}

impl Edge {
    pub fn len(&self) -> f64 {
        (self.sq_len as f64).sqrt()
    }

    pub fn other(&self, x: u32) -> u32 {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisGraph {
    variant: Variant,
    width: i32,
    height: i32,
    vertices: Vec<GridVertex>,
    index: Vec<u32>,
    edges: Vec<Edge>,
    adj_start: Vec<u32>,
    /// `(neighbour, edge id)` pairs, grouped by vertex.
    adj: Vec<(u32, u32)>,
}

impl VisGraph {
    /// Assembles a graph from vertex-pair edges. `vertices` must be sorted.
    pub fn from_parts(
        map: &GridMap,
        variant: Variant,
        vertices: Vec<GridVertex>,
        pairs: impl IntoIterator<Item = (GridVertex, GridVertex)>,
    ) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let stride = (map.width() + 1) as usize;
        let mut index = vec![NO_VERTEX; stride * (map.height() + 1) as usize];
        for (i, v) in vertices.iter().enumerate() {
            index[v.y as usize * stride + v.x as usize] = i as u32;
        }
        let id = |v: GridVertex| index[v.y as usize * stride + v.x as usize];
        let mut edges: Vec<Edge> = pairs
            .into_iter()
            .map(|(a, b)| {
                let (ia, ib) = (id(a), id(b));
                assert!(
                    ia != NO_VERTEX && ib != NO_VERTEX,
                    "edge endpoint is not a vertex"
                );
                Edge {
                    u: ia.min(ib),
                    v: ia.max(ib),
                    sq_len: a.sq_dist(b),
                }
            })
            .collect();
        edges.sort();
        edges.dedup();

        let n = vertices.len();
        let mut deg = vec![0u32; n + 1];
        for e in &edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        let mut adj_start = vec![0u32; n + 1];
        for i in 0..n {
            adj_start[i + 1] = adj_start[i] + deg[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![(0, 0); 2 * edges.len()];
        for (k, e) in edges.iter().enumerate() {
            adj[fill[e.u as usize] as usize] = (e.v, k as u32);
            fill[e.u as usize] += 1;
            adj[fill[e.v as usize] as usize] = (e.u, k as u32);
            fill[e.v as usize] += 1;
        }
        VisGraph {
            variant,
            width: map.width(),
            height: map.height(),
            vertices,
            index,
            edges,
            adj_start,
            adj,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dims(&self) -> (i32, i32) {
        (self.width, self.height)
    }

    pub fn vertices(&self) -> &[GridVertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: u32) -> GridVertex {
        self.vertices[id as usize]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: u32) -> Edge {
        self.edges[id as usize]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn id_of(&self, v: GridVertex) -> Option<u32> {
        if v.x < 0 || v.y < 0 || v.x > self.width || v.y > self.height {
            return None;
        }
        let id = self.index[v.y as usize * (self.width + 1) as usize + v.x as usize];
        (id != NO_VERTEX).then_some(id)
    }

    pub fn neighbors(&self, id: u32) -> &[(u32, u32)] {
        let i = id as usize;
        &self.adj[self.adj_start[i] as usize..self.adj_start[i + 1] as usize]
    }

    pub fn degree(&self, id: u32) -> usize {
        self.neighbors(id).len()
    }

    pub fn average_degree(&self) -> f64 {
        if self.vertices.is_empty() {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.vertices.len() as f64
        }
    }

    /// Edge set as coordinate pairs, for comparing graphs built differently.
    pub fn edge_pairs(&self) -> Vec<(GridVertex, GridVertex)> {
        self.edges
            .iter()
            .map(|e| (self.vertex(e.u), self.vertex(e.v)))
            .collect()
    }

    /// Digest of the vertex and edge tables.
    pub fn structural_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update([self.variant as u8]);
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        h.update((self.vertices.len() as u64).to_le_bytes());
        for v in &self.vertices {
            h.update(v.x.to_le_bytes());
            h.update(v.y.to_le_bytes());
        }
        h.update((self.edges.len() as u64).to_le_bytes());
        for e in &self.edges {
            h.update(e.u.to_le_bytes());
            h.update(e.v.to_le_bytes());
            h.update(e.sq_len.to_le_bytes());
        }
        h.update(
            self.adj_start
                .iter()
                .flat_map(|x| x.to_le_bytes())
                .collect::<Vec<_>>(),
        );
        for (to, e) in &self.adj {
            h.update(to.to_le_bytes());
            h.update(e.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// Visibility graph by line-of-sight checks between every pair of corners.
pub fn build_vg_checks(map: &GridMap) -> VisGraph {
    let corners = map.convex_corners();
    let mut pairs = Vec::new();
    for (i, &a) in corners.iter().enumerate() {
        for &b in &corners[i + 1..] {
            if map.line_of_sight(a, b) {
                pairs.push((a, b));
            }
        }
    }
    apply_collinear_policy(&VisGraph::from_parts(map, Variant::Vg, corners, pairs), map)
}

/// Visibility graph from an all-direction scan at every corner.
pub fn build_vg_scans(map: &GridMap) -> VisGraph {
    let corners = map.convex_corners();
    let mut pairs = Vec::new();
    for &a in &corners {
        for b in scan_all_directions(map, a).vertices() {
            if a < b {
                pairs.push((a, b));
            }
        }
    }
    VisGraph::from_parts(map, Variant::Vg, corners, pairs)
}

/// Sparse visibility graph: an edge survives only if each endpoint finds
/// the other inside its taut region.
pub fn build_svg(map: &GridMap) -> VisGraph {
    let corners = map.convex_corners();
    let mut pairs = Vec::new();
    for &a in &corners {
        let seen = scan_taut_directions(map, a).expect("corner");
        for b in seen.vertices() {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs.sort();
    let mutual: Vec<_> = pairs
        .windows(2)
        .filter(|w| w[0] == w[1])
        .map(|w| w[0])
        .collect();
    VisGraph::from_parts(map, Variant::Svg, corners, mutual)
}

/// Drops every edge that jumps over a collinear vertex it can see, so each
/// line of mutually visible vertices becomes a path.
pub fn apply_collinear_policy(graph: &VisGraph, map: &GridMap) -> VisGraph {
    let mut keep = vec![0u8; graph.num_edges()];
    for id in 0..graph.num_vertices() as u32 {
        let src = graph.vertex(id);
        let seen: Vec<GridVertex> = graph
            .neighbors(id)
            .iter()
            .map(|&(to, _)| graph.vertex(to))
            .collect();
        let nearest = nearest_per_direction(src, &seen);
        for &(to, e) in graph.neighbors(id) {
            if nearest.binary_search(&graph.vertex(to)).is_ok() {
                keep[e as usize] += 1;
            }
        }
    }
    let pairs = graph
        .edges()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k == 2)
        .map(|(e, _)| (graph.vertex(e.u), graph.vertex(e.v)));
    VisGraph::from_parts(map, graph.variant(), graph.vertices().to_vec(), pairs)
}

/// Start and goal attached to a graph for one query. The graph itself is
/// never modified; new vertices and edges live here and get ids past the
/// graph's own.
#[derive(Clone, Debug)]
pub struct QueryEndpoints {
    pub start: GridVertex,
    pub goal: GridVertex,
    pub start_id: u32,
    pub goal_id: u32,
    pub start_reused: bool,
    pub goal_reused: bool,
    pub temp_edges: Vec<Edge>,
    /// Line-of-sight scans (or pairwise checks) spent on insertion.
    pub los_ops: u64,
    base_vertices: u32,
    base_edges: u32,
    temp_adj: HashMap<u32, Vec<(u32, u32)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertMode {
    Scans,
    Checks,
}

fn check_endpoint(map: &GridMap, v: GridVertex) -> Result<()> {
    if !map.in_vertex_bounds(v) {
        return Err(Error::OutOfBounds(v));
    }
    if !map.config(v).has_free() {
        return Err(Error::Unreachable(v));
    }
    Ok(())
}

/// Attaches `s` and `t` using all-direction scans.
pub fn insert_endpoints(
    graph: &VisGraph,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
) -> Result<QueryEndpoints> {
    insert_endpoints_with(graph, map, s, t, InsertMode::Scans)
}

pub fn insert_endpoints_with(
    graph: &VisGraph,
    map: &GridMap,
    s: GridVertex,
    t: GridVertex,
    mode: InsertMode,
) -> Result<QueryEndpoints> {
    check_endpoint(map, s)?;
    check_endpoint(map, t)?;
    let n = graph.num_vertices() as u32;
    let (start_id, start_reused) = match graph.id_of(s) {
        Some(id) => (id, true),
        None => (n, false),
    };
    let (goal_id, goal_reused) = if t == s {
        (start_id, start_reused)
    } else {
        match graph.id_of(t) {
            Some(id) => (id, true),
            None => (if start_reused { n } else { n + 1 }, false),
        }
    };
    let mut q = QueryEndpoints {
        start: s,
        goal: t,
        start_id,
        goal_id,
        start_reused,
        goal_reused,
        temp_edges: Vec::new(),
        los_ops: 0,
        base_vertices: n,
        base_edges: graph.num_edges() as u32,
        temp_adj: HashMap::new(),
    };
    if s == t {
        return Ok(q);
    }
    for (v, vid) in [(s, start_id), (t, goal_id)] {
        let seen = match mode {
            InsertMode::Scans => {
                q.los_ops += 1;
                scan_targets(map, v, |w| map.is_convex_corner(w))
            }
            InsertMode::Checks => {
                let mut seen = Vec::new();
                for &c in graph.vertices() {
                    if c != v {
                        q.los_ops += 1;
                        if map.line_of_sight(v, c) {
                            seen.push(c);
                        }
                    }
                }
                nearest_per_direction(v, &seen)
            }
        };
        for c in seen {
            let cid = graph.id_of(c).expect("visible corner is a graph vertex");
            q.add_edge(graph, vid, cid, v.sq_dist(c));
        }
    }
    q.los_ops += 1;
    if map.line_of_sight(s, t) {
        q.add_edge(graph, start_id, goal_id, s.sq_dist(t));
    }
    Ok(q)
}

/// Drops the side buffer. The graph was never touched, so this is all
/// teardown takes.
pub fn remove_endpoints(_graph: &VisGraph, q: QueryEndpoints) {
    drop(q);
}

impl QueryEndpoints {
    fn has_edge(&self, graph: &VisGraph, a: u32, b: u32) -> bool {
        if a < self.base_vertices && graph.neighbors(a).iter().any(|&(to, _)| to == b) {
            return true;
        }
        self.temp_adj
            .get(&a)
            .is_some_and(|l| l.iter().any(|&(to, _)| to == b))
    }

    fn add_edge(&mut self, graph: &VisGraph, a: u32, b: u32, sq_len: i64) {
        if a == b || self.has_edge(graph, a, b) {
            return;
        }
        let id = self.base_edges + self.temp_edges.len() as u32;
        self.temp_edges.push(Edge {
            u: a.min(b),
            v: a.max(b),
            sq_len,
        });
        self.temp_adj.entry(a).or_default().push((b, id));
        self.temp_adj.entry(b).or_default().push((a, id));
    }

    pub fn num_vertices(&self) -> usize {
        let extra = [
            self.start_reused,
            self.goal_reused || self.goal_id == self.start_id,
        ]
        .iter()
        .filter(|&&r| !r)
        .count();
        self.base_vertices as usize + extra
    }

    pub fn is_temp_edge(&self, e: u32) -> bool {
        e >= self.base_edges
    }

    pub fn vertex(&self, graph: &VisGraph, id: u32) -> GridVertex {
        if id < self.base_vertices {
            graph.vertex(id)
        } else if id == self.start_id {
            self.start
        } else {
            self.goal
        }
    }

    pub fn edge(&self, graph: &VisGraph, e: u32) -> Edge {
        if e < self.base_edges {
            graph.edge(e)
        } else {
            self.temp_edges[(e - self.base_edges) as usize]
        }
    }

    /// Temporary `(neighbour, edge id)` pairs at `id`.
    pub fn temp_neighbors(&self, id: u32) -> &[(u32, u32)] {
        self.temp_adj.get(&id).map_or(&[], |l| l.as_slice())
    }

    /// Graph plus temporary neighbours of `id`.
    pub fn neighbors<'a>(
        &'a self,
        graph: &'a VisGraph,
        id: u32,
    ) -> impl Iterator<Item = (u32, u32)> + 'a {
        let base: &[(u32, u32)] = if id < self.base_vertices {
            graph.neighbors(id)
        } else {
            &[]
        };
        base.iter().chain(self.temp_neighbors(id)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: i32, y: i32) -> GridVertex {
        GridVertex::new(x, y)
    }

    #[test]
    fn empty_map_graphs() {
        let m = GridMap::new(5, 5);
        for g in [build_vg_checks(&m), build_vg_scans(&m), build_svg(&m)] {
            assert_eq!(g.num_vertices(), 0);
            assert_eq!(g.num_edges(), 0);
        }
    }

    #[test]
    fn single_tile_square() {
        let m = GridMap::from_blocked_tiles(4, 4, &[(1, 1)]);
        let vg = build_vg_checks(&m);
        assert_eq!(vg.num_vertices(), 4);
        assert_eq!(vg.num_edges(), 4);
        assert_eq!(build_vg_scans(&m), vg);
        let svg = build_svg(&m);
        assert_eq!(svg.edge_pairs(), vg.edge_pairs());
    }

    #[test]
    fn collinear_line_becomes_path() {
        // three tiles on a diagonal staircase put their corners on one line
        let m = GridMap::from_blocked_tiles(9, 9, &[(1, 1), (4, 4), (7, 7)]);
        let vg = build_vg_checks(&m);
        let on_line = |p: GridVertex| p.x == p.y;
        let diag: Vec<_> = vg
            .edge_pairs()
            .into_iter()
            .filter(|&(a, b)| on_line(a) && on_line(b))
            .collect();
        assert_eq!(diag, vec![(v(2, 2), v(4, 4)), (v(5, 5), v(7, 7))]);
    }

    #[test]
    fn endpoints_reuse_and_direct_edge() {
        let m = GridMap::from_blocked_tiles(6, 6, &[(2, 2)]);
        let g = build_svg(&m);
        let before = g.structural_hash();
        let q = insert_endpoints(&g, &m, v(0, 0), v(5, 0)).unwrap();
        assert!(!q.start_reused && !q.goal_reused);
        assert!(q
            .temp_edges
            .iter()
            .any(|e| (e.u, e.v) == (q.start_id, q.goal_id)));

        let q2 = insert_endpoints(&g, &m, v(2, 2), v(5, 5)).unwrap();
        assert!(q2.start_reused);
        assert_eq!(q2.num_vertices(), g.num_vertices() + 1);
        remove_endpoints(&g, q);
        remove_endpoints(&g, q2);
        assert_eq!(g.structural_hash(), before);
    }

    #[test]
    fn empty_map_single_temp_edge() {
        let m = GridMap::new(4, 4);
        let g = build_svg(&m);
        let q = insert_endpoints(&g, &m, v(0, 0), v(4, 3)).unwrap();
        assert_eq!(q.temp_edges.len(), 1);
    }

    #[test]
    fn endpoint_errors() {
        let m = GridMap::from_blocked_tiles(4, 4, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        let g = build_svg(&m);
        assert!(matches!(
            insert_endpoints(&g, &m, v(1, 1), v(3, 3)),
            Err(Error::Unreachable(_))
        ));
        assert!(matches!(
            insert_endpoints(&g, &m, v(3, 3), v(9, 3)),
            Err(Error::OutOfBounds(_))
        ));
    }
}
