//! Brute-force shortest any-angle path lengths: Dijkstra over every
//! line-of-sight pair of corners, with no sparsification and no tautness
//! filter. Used as ground truth.
//!
//! A vertex pinched between two diagonal blocked tiles is split in two, one
//! node per free side, so a path can touch it but never squeeze through.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::grid::{GridMap, GridVertex};

#[derive(Clone, Debug)]
pub struct Oracle {
    map: GridMap,
    corners: Vec<GridVertex>,
    /// First node of each corner; pinches own two consecutive nodes.
    first: Vec<u32>,
    adj: Vec<Vec<(u32, f64)>>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Which side of `v` a segment towards `v + d` leaves on: 0 or 1 at a
/// pinch, always 0 elsewhere.
fn side(map: &GridMap, v: GridVertex, dx: i32, dy: i32) -> u32 {
    let c = map.config(v);
    if !c.is_pinch() {
        return 0;
    }
    let first = if c.nw {
        // free tiles NE and SW
        dx > 0 || dy < 0
    } else {
        // free tiles NW and SE
        dx < 0 || dy < 0
    };
    if first {
        0
    } else {
        1
    }
}

fn sides(map: &GridMap, v: GridVertex) -> u32 {
    if map.config(v).is_pinch() {
        2
    } else {
        1
    }
}

impl Oracle {
    pub fn new(map: &GridMap) -> Self {
        let corners = map.convex_corners();
        let mut first = Vec::with_capacity(corners.len() + 1);
        let mut next = 0u32;
        for &c in &corners {
            first.push(next);
            next += sides(map, c);
        }
        first.push(next);
        let mut adj = vec![Vec::new(); next as usize];
        for (i, &a) in corners.iter().enumerate() {
            for (j, &b) in corners.iter().enumerate().skip(i + 1) {
                if map.line_of_sight(a, b) {
                    let na = first[i] + side(map, a, b.x - a.x, b.y - a.y);
                    let nb = first[j] + side(map, b, a.x - b.x, a.y - b.y);
                    let w = a.dist(b);
                    adj[na as usize].push((nb, w));
                    adj[nb as usize].push((na, w));
                }
            }
        }
        Oracle {
            map: map.clone(),
            corners,
            first,
            adj,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    /// Length of a shortest path from `s` to `t`, if one exists.
    pub fn shortest(&self, s: GridVertex, t: GridVertex) -> Option<f64> {
        let map = &self.map;
        if !map.in_vertex_bounds(s) || !map.in_vertex_bounds(t) {
            return None;
        }
        if !map.config(s).has_free() || !map.config(t).has_free() {
            return None;
        }
        if s == t {
            return Some(0.0);
        }
        let base = *self.first.last().unwrap();
        let mut extra: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
        let mut endpoint_nodes = |v: GridVertex, next_free: &mut u32| -> (u32, u32) {
            if let Ok(i) = self.corners.binary_search(&v) {
                return (self.first[i], self.first[i + 1]);
            }
            let lo = *next_free;
            *next_free += sides(map, v);
            for (j, &c) in self.corners.iter().enumerate() {
                if map.line_of_sight(v, c) {
                    let nv = lo + side(map, v, c.x - v.x, c.y - v.y);
                    let nc = self.first[j] + side(map, c, v.x - c.x, v.y - c.y);
                    let w = v.dist(c);
                    extra.entry(nv).or_default().push((nc, w));
                    extra.entry(nc).or_default().push((nv, w));
                }
            }
            (lo, *next_free)
        };
        let mut next_free = base;
        let (s0, s1) = endpoint_nodes(s, &mut next_free);
        let (t0, t1) = endpoint_nodes(t, &mut next_free);
        if map.line_of_sight(s, t) {
            let ns = s0 + side(map, s, t.x - s.x, t.y - s.y);
            let nt = t0 + side(map, t, s.x - t.x, s.y - t.y);
            let w = s.dist(t);
            extra.entry(ns).or_default().push((nt, w));
            extra.entry(nt).or_default().push((ns, w));
        }

        let total = next_free as usize;
        let mut dist = vec![f64::INFINITY; total];
        let mut heap = BinaryHeap::new();
        for n in s0..s1 {
            dist[n as usize] = 0.0;
            heap.push(Entry(0.0, n));
        }
        while let Some(Entry(d, n)) = heap.pop() {
            if d > dist[n as usize] {
                continue;
            }
            if (t0..t1).contains(&n) {
                return Some(d);
            }
            let base_adj: &[(u32, f64)] = if n < base { &self.adj[n as usize] } else { &[] };
            let more = extra.get(&n).map_or(&[][..], |l| l.as_slice());
            for &(m, w) in base_adj.iter().chain(more) {
                let nd = d + w;
                if nd < dist[m as usize] {
                    dist[m as usize] = nd;
                    heap.push(Entry(nd, m));
                }
            }
        }
        None
    }
}
