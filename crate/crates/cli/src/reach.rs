//! Connected components of traversable vertices, for sampling query pairs
//! that actually have a path.

use std::collections::VecDeque;

use anyangle::{GridMap, GridVertex};

pub struct Components {
    width: i32,
    /// Component per vertex, `u32::MAX` for blocked and pinch vertices.
    label: Vec<u32>,
    /// Labelled vertices in row-major order.
    traversable: Vec<GridVertex>,
}

impl Components {
    /// Flood fill over unit moves between traversable vertices. A unit move
    /// is allowed wherever a straight segment is, so any-angle reachability
    /// and this adjacency agree. Pinch vertices touch two regions at once;
    /// they are left unlabelled and never expanded.
    pub fn new(map: &GridMap) -> Self {
        let (w, h) = (map.width() + 1, map.height() + 1);
        let idx = |v: GridVertex| (v.y * w + v.x) as usize;
        let mut label = vec![u32::MAX; (w * h) as usize];
        let mut traversable = Vec::new();
        let mut next = 0;
        let mut queue = VecDeque::new();
        for y in 0..h {
            for x in 0..w {
                let v = GridVertex::new(x, y);
                let c = map.config(v);
                if !c.has_free() || c.is_pinch() {
                    continue;
                }
                traversable.push(v);
                if label[idx(v)] != u32::MAX {
                    continue;
                }
                label[idx(v)] = next;
                queue.push_back(v);
                while let Some(u) = queue.pop_front() {
                    for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                        let n = GridVertex::new(u.x + dx, u.y + dy);
                        if map.in_vertex_bounds(n)
                            && label[idx(n)] == u32::MAX
                            && !map.config(n).is_pinch()
                            && map.line_of_sight(u, n)
                        {
                            label[idx(n)] = next;
                            queue.push_back(n);
                        }
                    }
                }
                next += 1;
            }
        }
        Components {
            width: w,
            label,
            traversable,
        }
    }

    pub fn component(&self, v: GridVertex) -> Option<u32> {
        let l = *self.label.get((v.y * self.width + v.x) as usize)?;
        (l != u32::MAX).then_some(l)
    }

    pub fn connected(&self, a: GridVertex, b: GridVertex) -> bool {
        matches!((self.component(a), self.component(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn traversable(&self) -> &[GridVertex] {
        &self.traversable
    }
}
