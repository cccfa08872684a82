//! Edge levels over a sparse visibility graph, level-W edges and the
//! skip-edge network built from them.
//!
//! Directed edges are numbered `2 * e + d`: `d = 0` runs `u -> v`, `d = 1`
//! runs `v -> u` for the stored edge `(u, v)`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::grid::GridMap;
use crate::visgraph::VisGraph;

/// Level of an edge that is never pruned.
pub const LEVEL_W: u32 = u32::MAX;

#[inline]
pub fn dir_edge(e: u32, d: u32) -> u32 {
    2 * e + d
}

#[inline]
pub fn reverse(de: u32) -> u32 {
    de ^ 1
}

#[inline]
pub fn undirected(de: u32) -> u32 {
    de >> 1
}

pub fn tail(graph: &VisGraph, de: u32) -> u32 {
    let e = graph.edge(undirected(de));
    if de & 1 == 0 {
        e.u
    } else {
        e.v
    }
}

pub fn head(graph: &VisGraph, de: u32) -> u32 {
    let e = graph.edge(undirected(de));
    if de & 1 == 0 {
        e.v
    } else {
        e.u
    }
}

/// The directed edge leaving `from` along edge `e`.
pub fn directed_from(graph: &VisGraph, e: u32, from: u32) -> u32 {
    if graph.edge(e).u == from {
        dir_edge(e, 0)
    } else {
        dir_edge(e, 1)
    }
}

/// For every directed edge `u -> v`, the directed edges `v -> w` that make
/// `u, v, w` taut.
#[derive(Clone, Debug)]
pub struct TautNeighborTable {
    start: Vec<u32>,
    exits: Vec<u32>,
}

impl TautNeighborTable {
    pub fn build(graph: &VisGraph, map: &GridMap) -> Self {
        let m2 = 2 * graph.num_edges();
        let mut start = Vec::with_capacity(m2 + 1);
        let mut exits = Vec::new();
        start.push(0);
        for de in 0..m2 as u32 {
            let a = graph.vertex(tail(graph, de));
            let b_id = head(graph, de);
            let b = graph.vertex(b_id);
            for &(w, e) in graph.neighbors(b_id) {
                if map.is_taut(a, b, graph.vertex(w)) {
                    exits.push(directed_from(graph, e, b_id));
                }
            }
            start.push(exits.len() as u32);
        }
        TautNeighborTable { start, exits }
    }

    pub fn exits(&self, de: u32) -> &[u32] {
        &self.exits[self.start[de as usize] as usize..self.start[de as usize + 1] as usize]
    }

    pub fn num_directed(&self) -> usize {
        self.start.len() - 1
    }

    pub fn total_exits(&self) -> usize {
        self.exits.len()
    }
}

/// Pruning levels by peeling: at pass `l`, every unassigned edge with an
/// endpoint that has no unassigned taut exit gets level `l`. Unassigned
/// exits are counted per directed edge and decremented as levels land.
pub fn compute_edge_levels(graph: &VisGraph, taut: &TautNeighborTable) -> Vec<u32> {
    let m = graph.num_edges();
    let mut level = vec![LEVEL_W; m];
    let mut open: Vec<u32> = (0..2 * m)
        .map(|de| taut.exits(de as u32).len() as u32)
        .collect();

    // preds[x] = directed edges that list x among their exits
    let mut pred_start = vec![0u32; 2 * m + 1];
    for &x in &taut.exits {
        pred_start[x as usize + 1] += 1;
    }
    for i in 0..2 * m {
        pred_start[i + 1] += pred_start[i];
    }
    let mut fill = pred_start.clone();
    let mut preds = vec![0u32; taut.exits.len()];
    for de in 0..2 * m as u32 {
        for &x in taut.exits(de) {
            preds[fill[x as usize] as usize] = de;
            fill[x as usize] += 1;
        }
    }

    let mut current: Vec<u32> = (0..m as u32)
        .filter(|&e| open[2 * e as usize] == 0 || open[2 * e as usize + 1] == 0)
        .collect();
    let mut l = 1;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &e in &current {
            level[e as usize] = l;
        }
        for &e in &current {
            for x in [dir_edge(e, 0), dir_edge(e, 1)] {
                for &p in
                    &preds[pred_start[x as usize] as usize..pred_start[x as usize + 1] as usize]
                {
                    open[p as usize] -= 1;
                    let pe = undirected(p);
                    if open[p as usize] == 0 && level[pe as usize] == LEVEL_W {
                        next.push(pe);
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        current = next;
        l += 1;
    }
    level
}

/// The level loop exactly as a sweep over `order`, only ever touching
/// unassigned edges. Slow; used to cross-check [`compute_edge_levels`].
pub fn compute_edge_levels_in_order(
    graph: &VisGraph,
    taut: &TautNeighborTable,
    order: &[u32],
) -> Vec<u32> {
    let mut level = vec![LEVEL_W; graph.num_edges()];
    let mut l = 1;
    let mut changed = true;
    while changed {
        changed = false;
        for &e in order {
            if level[e as usize] != LEVEL_W {
                continue;
            }
            let stuck = [dir_edge(e, 0), dir_edge(e, 1)].into_iter().any(|de| {
                taut.exits(de)
                    .iter()
                    .all(|&x| level[undirected(x) as usize] < l)
            });
            if stuck {
                level[e as usize] = l;
                changed = true;
            }
        }
        l += 1;
    }
    level
}

/// Edges lying on some cycle of taut turns: a directed edge is on one iff
/// its strongly connected component in the exit relation is nontrivial.
pub fn find_taut_cycles(graph: &VisGraph, taut: &TautNeighborTable) -> Vec<bool> {
    let m2 = 2 * graph.num_edges();
    let mut g = DiGraph::<(), ()>::with_capacity(m2, taut.total_exits());
    let nodes: Vec<_> = (0..m2).map(|_| g.add_node(())).collect();
    for de in 0..m2 {
        for &x in taut.exits(de as u32) {
            g.add_edge(nodes[de], nodes[x as usize], ());
        }
    }
    let mut on_cycle = vec![false; graph.num_edges()];
    for comp in tarjan_scc(&g) {
        let cyclic = comp.len() > 1 || g.contains_edge(comp[0], comp[0]);
        if cyclic {
            for n in comp {
                on_cycle[n.index() / 2] = true;
            }
        }
    }
    on_cycle
}

/// Whether every taut pair of consecutive edges `(a, e, b)` with finite
/// `level(e)` has `min(level(a), level(b)) < level(e)`.
pub fn verify_level_peaks(graph: &VisGraph, levels: &[u32], taut: &TautNeighborTable) -> bool {
    for de in 0..2 * graph.num_edges() as u32 {
        let e = undirected(de);
        let le = levels[e as usize];
        if le == LEVEL_W {
            continue;
        }
        // incoming a: some a -> tail(de) with de among its exits, i.e.
        // reverse(a) among the exits of reverse(de)
        let ins = taut.exits(reverse(de));
        let outs = taut.exits(de);
        for &a in ins {
            for &b in outs {
                let la = levels[undirected(a) as usize];
                let lb = levels[undirected(b) as usize];
                if la.min(lb) >= le {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkipEdge {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
    /// Vertex after `a` on the underlying path.
    pub first_hop_a: u32,
    /// Vertex before `b` on the underlying path.
    pub first_hop_b: u32,
    /// Underlying vertices from `a` to `b`.
    pub path: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct EdgeHierarchy {
    pub levels: Vec<u32>,
    pub skip_vertices: Vec<u32>,
    pub skip_edges: Vec<SkipEdge>,
    is_skip: Vec<bool>,
    skip_adj: Vec<Vec<(u32, bool)>>,
}

impl EdgeHierarchy {
    pub fn build(graph: &VisGraph, taut: &TautNeighborTable) -> Self {
        let levels = compute_edge_levels(graph, taut);
        Self::from_levels(graph, levels)
    }

    pub fn from_levels(graph: &VisGraph, levels: Vec<u32>) -> Self {
        let (skip_vertices, skip_edges) = build_skip_graph(graph, &levels);
        Self::from_parts(graph.num_vertices(), levels, skip_vertices, skip_edges)
    }

    pub fn from_parts(
        n: usize,
        levels: Vec<u32>,
        skip_vertices: Vec<u32>,
        skip_edges: Vec<SkipEdge>,
    ) -> Self {
        let mut is_skip = vec![false; n];
        for &s in &skip_vertices {
            is_skip[s as usize] = true;
        }
        let mut skip_adj = vec![Vec::new(); n];
        for (k, se) in skip_edges.iter().enumerate() {
            skip_adj[se.a as usize].push((k as u32, false));
            skip_adj[se.b as usize].push((k as u32, true));
        }
        EdgeHierarchy {
            levels,
            skip_vertices,
            skip_edges,
            is_skip,
            skip_adj,
        }
    }

    pub fn level(&self, e: u32) -> u32 {
        self.levels[e as usize]
    }

    pub fn is_skip_vertex(&self, v: u32) -> bool {
        self.is_skip.get(v as usize).copied().unwrap_or(false)
    }

    /// Skip edges at `v` as `(skip edge id, traversed b -> a)`.
    pub fn skip_neighbors(&self, v: u32) -> &[(u32, bool)] {
        self.skip_adj.get(v as usize).map_or(&[], |l| l.as_slice())
    }

    pub fn max_finite_level(&self) -> u32 {
        self.levels
            .iter()
            .copied()
            .filter(|&l| l != LEVEL_W)
            .max()
            .unwrap_or(0)
    }

    pub fn num_w_edges(&self) -> usize {
        self.levels.iter().filter(|&&l| l == LEVEL_W).count()
    }
}

/// Skip vertices and skip edges over the level-W subgraph. Vertices of
/// W-degree other than 2 anchor the chains; a chain that would close on
/// itself gets its smallest interior vertex promoted, so pure cycles end up
/// anchored at their two smallest vertices.
pub fn build_skip_graph(graph: &VisGraph, levels: &[u32]) -> (Vec<u32>, Vec<SkipEdge>) {
    let n = graph.num_vertices();
    let w_adj: Vec<Vec<(u32, u32)>> = (0..n as u32)
        .map(|v| {
            graph
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&(_, e)| levels[e as usize] == LEVEL_W)
                .collect()
        })
        .collect();
    let mut is_skip: Vec<bool> = w_adj
        .iter()
        .map(|l| !l.is_empty() && l.len() != 2)
        .collect();

    loop {
        let mut used = vec![false; graph.num_edges()];
        let mut chains = Vec::new();
        let mut promote = Vec::new();
        let mut anchors: Vec<u32> = (0..n as u32).filter(|&v| is_skip[v as usize]).collect();
        // cycles with no anchor at all: seed with their smallest vertex
        let mut seen = vec![false; n];
        for &a in &anchors {
            seen[a as usize] = true;
        }
        for v in 0..n as u32 {
            if w_adj[v as usize].is_empty() || seen[v as usize] {
                continue;
            }
            let mut comp = vec![v];
            seen[v as usize] = true;
            let mut i = 0;
            let mut anchored = false;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &(y, _) in &w_adj[x as usize] {
                    anchored |= is_skip[y as usize];
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        comp.push(y);
                    }
                }
            }
            if !anchored {
                let m = *comp.iter().min().unwrap();
                is_skip[m as usize] = true;
                promote.push(m);
            }
        }
        if !promote.is_empty() {
            continue;
        }
        anchors.sort_unstable();

        for &a in &anchors {
            for &(first, e0) in &w_adj[a as usize] {
                if used[e0 as usize] {
                    continue;
                }
                used[e0 as usize] = true;
                let mut path = vec![a, first];
                let mut weight = graph.edge(e0).len();
                let (mut prev_e, mut cur) = (e0, first);
                while !is_skip[cur as usize] {
                    let &(nxt, e) = w_adj[cur as usize]
                        .iter()
                        .find(|&&(_, e)| e != prev_e)
                        .expect("chain vertex has W-degree 2");
                    used[e as usize] = true;
                    weight += graph.edge(e).len();
                    path.push(nxt);
                    prev_e = e;
                    cur = nxt;
                }
                if cur == a {
                    let m = *path[1..path.len() - 1].iter().min().unwrap();
                    promote.push(m);
                }
                chains.push(SkipEdge {
                    a,
                    b: cur,
                    weight,
                    first_hop_a: path[1],
                    first_hop_b: path[path.len() - 2],
                    path,
                });
            }
        }
        if promote.is_empty() {
            return (anchors, chains);
        }
        for m in promote {
            is_skip[m as usize] = true;
        }
    }
}
