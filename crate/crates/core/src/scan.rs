//! Line-of-sight scans: enumerate every visibility-graph vertex visible from
//! a source by sweeping horizontal intervals outwards row by row.
//!
//! Internally an interval is kept as a cone of inverse slopes
//! `(x - source.x) / |y - source.y|`, which is invariant along a ray, so
//! projecting to the next row is just a change of row distance. Obstacles in
//! the strip between two rows split the projection into the free tile runs
//! it crosses. All arithmetic is exact.
//!
//! Rays that pass through a convex corner are not followed any further: the
//! corner itself is reported and everything behind it on the same ray is
//! hidden by the collinear-point policy, which keeps only the nearest vertex
//! in each direction.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::grid::{gcd, GridMap, GridVertex};

/// Horizontal interval `[x_left, x_right]` on row `y`, scanning away from
/// the source in direction `dir` (`+1` towards larger `y`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanInterval {
    pub y: i32,
    pub x_left: Frac,
    pub x_right: Frac,
    pub dir: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Visible {
    pub vertex: GridVertex,
    /// The source's taut region contains this vertex.
    pub taut: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanResult {
    pub source: GridVertex,
    pub visible: Vec<Visible>,
}

impl ScanResult {
    pub fn vertices(&self) -> impl Iterator<Item = GridVertex> + '_ {
        self.visible.iter().map(|v| v.vertex)
    }
}

/// Which slopes a scan may seed on each side of the source row.
#[derive(Clone, Copy, Debug)]
enum Seeds {
    All,
    /// Only `dx * dy * sign <= 0`, the taut region of a single blocked tile.
    TautQuadrants {
        sign: i32,
    },
}

/// Cone of inverse slopes at row distance `dist`.
#[derive(Clone, Copy, Debug)]
struct Cone {
    dist: i64,
    lo: Frac,
    hi: Frac,
}

struct Scanner<'a, F: Fn(GridVertex) -> bool> {
    map: &'a GridMap,
    src: GridVertex,
    dir: i32,
    is_target: F,
    found: Vec<GridVertex>,
    trace: Option<Vec<ScanInterval>>,
}

impl<F: Fn(GridVertex) -> bool> Scanner<'_, F> {
    fn row(&self, dist: i64) -> i32 {
        self.src.y + self.dir * dist as i32
    }

    fn x_at(&self, slope: Frac, dist: i64) -> Frac {
        slope.mul_int(dist).add_int(self.src.x as i64)
    }

    fn emit(&mut self, cone: Cone) {
        let y = self.row(cone.dist);
        let x0 = self.x_at(cone.lo, cone.dist).ceil();
        let x1 = self.x_at(cone.hi, cone.dist).floor();
        for x in x0..=x1 {
            let v = GridVertex::new(x as i32, y);
            if (self.is_target)(v) {
                self.found.push(v);
            }
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.push(ScanInterval {
                y,
                x_left: slope_to_x(self.src, cone.lo, cone.dist),
                x_right: slope_to_x(self.src, cone.hi, cone.dist),
                dir: self.dir,
            });
        }
    }

    /// Seeds the row adjacent to the source and runs the interval DFS.
    fn run(&mut self, lo_limit: Option<Frac>, hi_limit: Option<Frac>) {
        let strip = if self.dir > 0 {
            self.src.y
        } else {
            self.src.y - 1
        };
        let ext = self.map.extents();
        let left = ext.left(self.src.x, strip) as i64;
        let right = ext.right(self.src.x, strip) as i64;
        if left == 0 && right == 0 {
            return;
        }
        let mut lo = Frac::int(-left);
        let mut hi = Frac::int(right);
        if let Some(l) = lo_limit {
            lo = lo.max(l);
        }
        if let Some(h) = hi_limit {
            hi = hi.min(h);
        }
        if lo > hi {
            return;
        }
        let seed = Cone { dist: 1, lo, hi };
        self.emit(seed);
        let mut stack = vec![seed];
        while let Some(cone) = stack.pop() {
            self.expand(cone, &mut stack);
        }
    }

    fn expand(&mut self, cone: Cone, stack: &mut Vec<Cone>) {
        let map = self.map;
        let y = self.row(cone.dist);
        let strip = if self.dir > 0 { y } else { y - 1 };
        if strip < 0 || strip >= map.height() {
            return;
        }
        let next = cone.dist + 1;
        let sx = self.src.x as i64;
        let xl = self.x_at(cone.lo, cone.dist).min(self.x_at(cone.lo, next));
        let xr = self.x_at(cone.hi, cone.dist).max(self.x_at(cone.hi, next));
        let c_end = (xr.ceil() + 1).min(map.width() as i64);
        let mut c = (xl.floor() - 1).max(0);
        while c < c_end {
            if map.is_blocked(c as i32, strip) {
                c += 1;
                continue;
            }
            let a = c;
            let b = c + map.extents().right(c as i32, strip) as i64;
            c = b + 1;

            let lo = cone
                .lo
                .max(Frac::new(a - sx, cone.dist))
                .max(Frac::new(a - sx, next));
            let hi = cone
                .hi
                .min(Frac::new(b - sx, cone.dist))
                .min(Frac::new(b - sx, next));
            if lo > hi {
                continue;
            }
            if lo == hi {
                // a single grazing ray; stop if it runs through a corner
                let px = self.x_at(lo, cone.dist);
                if px.is_integer() {
                    let p = GridVertex::new(px.num() as i32, y);
                    if map.config(p).is_pinch() || (self.is_target)(p) {
                        continue;
                    }
                }
            }
            let succ = Cone { dist: next, lo, hi };
            self.emit(succ);
            stack.push(succ);
        }
    }

    /// Walks the source row in direction `step` until blocked or a target.
    fn ray(&mut self, step: i32) {
        let map = self.map;
        let ext = map.extents();
        let y = self.src.y;
        let mut x = self.src.x;
        loop {
            let (above, below) = if step > 0 {
                (ext.right(x, y - 1), ext.right(x, y))
            } else {
                (ext.left(x, y - 1), ext.left(x, y))
            };
            if above == 0 && below == 0 {
                return;
            }
            // inside a run free on both sides there are no corners to meet
            let jump = if above > 0 && below > 0 {
                above.min(below)
            } else {
                1
            };
            x += step * jump as i32;
            let v = GridVertex::new(x, y);
            if (self.is_target)(v) {
                self.found.push(v);
                return;
            }
            if map.config(v).is_pinch() {
                return;
            }
        }
    }
}

fn slope_to_x(src: GridVertex, slope: Frac, dist: i64) -> Frac {
    slope.mul_int(dist).add_int(src.x as i64)
}

/// Keeps only the nearest vertex along each direction from `src`.
pub fn nearest_per_direction(src: GridVertex, found: &[GridVertex]) -> Vec<GridVertex> {
    let mut best: HashMap<(i64, i64), GridVertex> = HashMap::new();
    for &v in found {
        if v == src {
            continue;
        }
        let dx = (v.x - src.x) as i64;
        let dy = (v.y - src.y) as i64;
        let g = gcd(dx, dy);
        best.entry((dx / g, dy / g))
            .and_modify(|w| {
                if src.sq_dist(v) < src.sq_dist(*w) {
                    *w = v;
                }
            })
            .or_insert(v);
    }
    let mut out: Vec<GridVertex> = best.into_values().collect();
    out.sort();
    out
}

fn scan_with<F: Fn(GridVertex) -> bool + Copy>(
    map: &GridMap,
    source: GridVertex,
    seeds: Seeds,
    is_target: F,
    trace: bool,
) -> (Vec<GridVertex>, Vec<ScanInterval>) {
    let mut found = Vec::new();
    let mut intervals = Vec::new();
    for dir in [1, -1] {
        // slope limits for this half-plane
        let (lo, hi) = match seeds {
            Seeds::All => (None, None),
            Seeds::TautQuadrants { sign } => {
                // need dx * dir * sign <= 0
                if dir * sign > 0 {
                    (None, Some(Frac::int(0)))
                } else {
                    (Some(Frac::int(0)), None)
                }
            }
        };
        let mut s = Scanner {
            map,
            src: source,
            dir,
            is_target,
            found: Vec::new(),
            trace: trace.then(Vec::new),
        };
        s.run(lo, hi);
        found.append(&mut s.found);
        if let Some(mut t) = s.trace {
            intervals.append(&mut t);
        }
    }
    let mut s = Scanner {
        map,
        src: source,
        dir: 1,
        is_target,
        found: Vec::new(),
        trace: None,
    };
    s.ray(1);
    s.ray(-1);
    found.append(&mut s.found);
    (nearest_per_direction(source, &found), intervals)
}

/// All vertices satisfying `is_target` visible from `source`, nearest per
/// direction.
pub fn scan_targets<F: Fn(GridVertex) -> bool + Copy>(
    map: &GridMap,
    source: GridVertex,
    is_target: F,
) -> Vec<GridVertex> {
    if !map.in_vertex_bounds(source) {
        return Vec::new();
    }
    scan_with(map, source, Seeds::All, is_target, false).0
}

/// Every convex corner visible from `source`.
pub fn scan_all_directions(map: &GridMap, source: GridVertex) -> ScanResult {
    let found = scan_targets(map, source, |v| map.is_convex_corner(v));
    ScanResult {
        source,
        visible: found
            .into_iter()
            .map(|v| Visible {
                vertex: v,
                taut: map.taut_region_contains(source, v),
            })
            .collect(),
    }
}

/// Visible convex corners inside the taut region of convex corner `source`.
pub fn scan_taut_directions(map: &GridMap, source: GridVertex) -> Result<ScanResult> {
    if !map.is_convex_corner(source) {
        return Err(Error::NotConvexCorner(source));
    }
    let cfg = map.config(source);
    let visible = if cfg.is_pinch() {
        Vec::new()
    } else {
        let (qx, qy) = cfg.blocked_quadrants().next().unwrap();
        let seeds = Seeds::TautQuadrants { sign: qx * qy };
        scan_with(map, source, seeds, |v| map.is_convex_corner(v), false).0
    };
    Ok(ScanResult {
        source,
        visible: visible
            .into_iter()
            .map(|v| Visible {
                vertex: v,
                taut: true,
            })
            .collect(),
    })
}

/// Every interval generated by an all-direction scan, in generation order.
pub fn all_direction_intervals(map: &GridMap, source: GridVertex) -> Vec<ScanInterval> {
    scan_with(map, source, Seeds::All, |v| map.is_convex_corner(v), true).1
}

/// Visible successor intervals of `iv` on the next row away from `source`.
pub fn successors(map: &GridMap, iv: &ScanInterval, source: GridVertex) -> Vec<ScanInterval> {
    let dist = (iv.y - source.y) as i64 * iv.dir as i64;
    assert!(
        dist > 0,
        "interval must lie on the scanning side of the source"
    );
    let to_slope = |x: Frac| Frac::new(x.num() - source.x as i64 * x.den(), x.den() * dist);
    let cone = Cone {
        dist,
        lo: to_slope(iv.x_left),
        hi: to_slope(iv.x_right),
    };
    let mut s = Scanner {
        map,
        src: source,
        dir: iv.dir,
        is_target: |_| false,
        found: Vec::new(),
        trace: Some(Vec::new()),
    };
    let mut stack = Vec::new();
    s.expand(cone, &mut stack);
    s.trace.unwrap()
}
