//! Grid representation and the constant-time geometric predicates the rest
//! of the crate is built on.
//!
//! Tiles are addressed by `(col, row)` with `0 <= col < width` and
//! `0 <= row < height`. Grid vertices live on tile corners, so the vertex
//! space is `(width + 1) x (height + 1)` and tile `(c, r)` has corners
//! `(c, r)`, `(c + 1, r)`, `(c, r + 1)` and `(c + 1, r + 1)`. Rows grow
//! downwards; "north" means smaller `y`.
//!
//! Movement convention: a segment may touch the corner of a blocked tile or
//! slide along its edge, but it may not enter a blocked tile's interior, run
//! along an edge shared by two blocked tiles, or squeeze through a vertex
//! whose two diagonally-opposite tiles are both blocked (a "pinch").
//! Everything outside the grid is blocked.

use std::cmp::Ordering;
use std::fmt;

use sha2::{Digest, Sha256};

/// A grid vertex (tile corner).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct GridVertex {
    pub x: i32,
    pub y: i32,
}

impl GridVertex {
    pub const fn new(x: i32, y: i32) -> Self {
        GridVertex { x, y }
    }

    pub fn sq_dist(self, other: GridVertex) -> i64 {
        let dx = (other.x - self.x) as i64;
        let dy = (other.y - self.y) as i64;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: GridVertex) -> f64 {
        (self.sq_dist(other) as f64).sqrt()
    }
}

/// Vertices order row-major: by `y`, then by `x`.
impl Ord for GridVertex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for GridVertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GridVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Sign pair of a quadrant around a vertex, `(-1, -1)` being north-west.
pub type Quadrant = (i32, i32);

pub const NW: Quadrant = (-1, -1);
pub const NE: Quadrant = (1, -1);
pub const SW: Quadrant = (-1, 1);
pub const SE: Quadrant = (1, 1);

/// Blocked status of the four tiles incident to a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ObstacleConfig {
    pub nw: bool,
    pub ne: bool,
    pub sw: bool,
    pub se: bool,
}

impl ObstacleConfig {
    pub fn count(self) -> u32 {
        self.nw as u32 + self.ne as u32 + self.sw as u32 + self.se as u32
    }

    pub fn get(self, q: Quadrant) -> bool {
        match q {
            NW => self.nw,
            NE => self.ne,
            SW => self.sw,
            SE => self.se,
            _ => panic!("invalid quadrant {q:?}"),
        }
    }

    /// Exactly two diagonally-opposite tiles are blocked.
    pub fn is_pinch(self) -> bool {
        self.count() == 2 && ((self.nw && self.se) || (self.ne && self.sw))
    }

    /// Some blocked tile has both side-adjacent tiles at this vertex free.
    pub fn is_convex(self) -> bool {
        self.count() == 1 || self.is_pinch()
    }

    pub fn has_free(self) -> bool {
        self.count() < 4
    }

    pub fn blocked_quadrants(self) -> impl Iterator<Item = Quadrant> {
        [(NW, self.nw), (NE, self.ne), (SW, self.sw), (SE, self.se)]
            .into_iter()
            .filter_map(|(q, b)| b.then_some(q))
    }
}

/// Free-tile run lengths per tile row, measured from each vertex column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extents {
    stride: usize,
    right: Vec<u32>,
    left: Vec<u32>,
}

impl Extents {
    /// Number of consecutive free tiles `(x, row), (x + 1, row), ...`.
    pub fn right(&self, x: i32, row: i32) -> u32 {
        self.lookup(&self.right, x, row)
    }

    /// Number of consecutive free tiles `(x - 1, row), (x - 2, row), ...`.
    pub fn left(&self, x: i32, row: i32) -> u32 {
        self.lookup(&self.left, x, row)
    }

    fn lookup(&self, table: &[u32], x: i32, row: i32) -> u32 {
        if x < 0 || row < 0 || x as usize >= self.stride {
            return 0;
        }
        table
            .get(row as usize * self.stride + x as usize)
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct GridMap {
    width: i32,
    height: i32,
    blocked: Vec<bool>,
    extents: Extents,
}

impl PartialEq for GridMap {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.blocked == other.blocked
    }
}

impl Eq for GridMap {}

impl GridMap {
    pub fn new(width: i32, height: i32) -> Self {
        assert!(width >= 0 && height >= 0, "negative map size");
        let blocked = vec![false; (width * height) as usize];
        Self::from_raster(width, height, blocked)
    }

    /// Builds a map from a row-major raster (`blocked[row * width + col]`).
    pub fn from_raster(width: i32, height: i32, blocked: Vec<bool>) -> Self {
        assert_eq!(blocked.len(), (width as usize) * (height as usize));
        let extents = compute_extents_raw(width, height, &blocked);
        GridMap {
            width,
            height,
            blocked,
            extents,
        }
    }

    pub fn from_blocked_tiles(width: i32, height: i32, tiles: &[(i32, i32)]) -> Self {
        let mut raster = vec![false; (width * height) as usize];
        for &(c, r) in tiles {
            assert!(
                c >= 0 && r >= 0 && c < width && r < height,
                "tile out of range"
            );
            raster[(r * width + c) as usize] = true;
        }
        Self::from_raster(width, height, raster)
    }

    /// Parses an ASCII picture, `#` for blocked tiles and anything else free.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len() as i32;
        let width = rows.first().map_or(0, |r| r.chars().count()) as i32;
        let mut raster = Vec::with_capacity((width * height) as usize);
        for row in rows {
            assert_eq!(row.chars().count() as i32, width, "ragged ascii map");
            raster.extend(row.chars().map(|ch| ch == '#'));
        }
        Self::from_raster(width, height, raster)
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn raster(&self) -> &[bool] {
        &self.blocked
    }

    pub fn extents(&self) -> &Extents {
        &self.extents
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn in_vertex_bounds(&self, v: GridVertex) -> bool {
        v.x >= 0 && v.y >= 0 && v.x <= self.width && v.y <= self.height
    }

    /// Out-of-bounds tiles are blocked.
    pub fn is_blocked(&self, col: i32, row: i32) -> bool {
        if col < 0 || row < 0 || col >= self.width || row >= self.height {
            return true;
        }
        self.blocked[(row * self.width + col) as usize]
    }

    pub fn quadrant_blocked(&self, v: GridVertex, q: Quadrant) -> bool {
        self.is_blocked(v.x + (q.0 - 1) / 2, v.y + (q.1 - 1) / 2)
    }

    pub fn config(&self, v: GridVertex) -> ObstacleConfig {
        ObstacleConfig {
            nw: self.is_blocked(v.x - 1, v.y - 1),
            ne: self.is_blocked(v.x, v.y - 1),
            sw: self.is_blocked(v.x - 1, v.y),
            se: self.is_blocked(v.x, v.y),
        }
    }

    pub fn is_convex_corner(&self, v: GridVertex) -> bool {
        self.in_vertex_bounds(v) && self.config(v).is_convex()
    }

    /// A vertex an agent may stand on: inside the grid with a free incident tile.
    pub fn is_traversable(&self, v: GridVertex) -> bool {
        self.in_vertex_bounds(v) && self.config(v).has_free()
    }

    pub fn convex_corners(&self) -> Vec<GridVertex> {
        let mut out = Vec::new();
        for y in 0..=self.height {
            for x in 0..=self.width {
                let v = GridVertex::new(x, y);
                if self.config(v).is_convex() {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn compute_extents(&self) -> Extents {
        compute_extents_raw(self.width, self.height, &self.blocked)
    }

    /// Exact line-of-sight test between two vertices.
    ///
    /// Walks the columns spanned by the segment and tests every tile whose
    /// interior the open segment crosses, then checks every lattice point
    /// strictly inside the segment for a pinch. Axis-aligned segments test
    /// the pair of tiles on either side of each unit edge instead.
    pub fn line_of_sight(&self, p: GridVertex, q: GridVertex) -> bool {
        if !self.in_vertex_bounds(p) || !self.in_vertex_bounds(q) {
            return false;
        }
        if p == q {
            return true;
        }
        // canonical orientation makes the walk symmetric by construction
        let (p, q) = if q < p { (q, p) } else { (p, q) };
        let dx = q.x - p.x;
        let dy = q.y - p.y;

        if dx == 0 {
            for y in p.y..q.y {
                if self.is_blocked(p.x - 1, y) && self.is_blocked(p.x, y) {
                    return false;
                }
                if y > p.y && self.config(GridVertex::new(p.x, y)).is_pinch() {
                    return false;
                }
            }
            return true;
        }
        if dy == 0 {
            let (x0, x1) = (p.x.min(q.x), p.x.max(q.x));
            for x in x0..x1 {
                if self.is_blocked(x, p.y - 1) && self.is_blocked(x, p.y) {
                    return false;
                }
                if x > x0 && self.config(GridVertex::new(x, p.y)).is_pinch() {
                    return false;
                }
            }
            return true;
        }

        // walk left to right
        let (p, q) = if p.x < q.x { (p, q) } else { (q, p) };
        let dx = (q.x - p.x) as i64;
        let dy = (q.y - p.y) as i64;
        for c in p.x..q.x {
            // y at x = c and x = c + 1, as numerators over dx
            let ya = p.y as i64 * dx + dy * (c - p.x) as i64;
            let yb = ya + dy;
            let (lo, hi) = if ya < yb { (ya, yb) } else { (yb, ya) };
            let r0 = lo.div_euclid(dx);
            let r1 = -(-hi).div_euclid(dx); // ceil
            for r in r0..r1 {
                if self.is_blocked(c, r as i32) {
                    return false;
                }
            }
        }
        let g = gcd(dx, dy.abs());
        let (sx, sy) = (dx / g, dy / g);
        for k in 1..g {
            let v = GridVertex::new(p.x + (sx * k) as i32, p.y + (sy * k) as i32);
            if self.config(v).is_pinch() {
                return false;
            }
        }
        true
    }

    /// Whether the two-segment path `a -> b -> c` is taut at `b`.
    ///
    /// Expects `ab` and `bc` to have line of sight. A straight continuation
    /// is taut; a reversal never is. A heading change is taut iff a blocked
    /// tile incident to `b` lies inside the angle the path turns around.
    /// Turns at a pinch vertex always cut between its two blocked tiles and
    /// are rejected, as is a straight run through it.
    pub fn is_taut(&self, a: GridVertex, b: GridVertex, c: GridVertex) -> bool {
        if a == b || b == c {
            return false;
        }
        let cfg = self.config(b);
        if cfg.is_pinch() {
            return false;
        }
        let d1 = (b.x as i64 - a.x as i64, b.y as i64 - a.y as i64);
        let d2 = (c.x as i64 - b.x as i64, c.y as i64 - b.y as i64);
        let turn = cross(d1, d2);
        if turn == 0 {
            return d1.0 * d2.0 + d1.1 * d2.1 > 0;
        }
        let ra = (-d1.0, -d1.1);
        let sign = cross(ra, d2).signum();
        cfg.blocked_quadrants().any(|(qx, qy)| {
            let q = (qx as i64, qy as i64);
            cross(ra, q).signum() == sign && cross(q, d2).signum() == sign
        })
    }

    /// Whether an edge arriving at `v` from `u` has some taut continuation
    /// out of `v`, decided from `v`'s obstacle configuration alone.
    ///
    /// For a single blocked tile in quadrant `(sx, sy)` the taut region is
    /// the pair of closed quadrants adjacent to it: `dx * dy * sx * sy <= 0`.
    /// Open-space vertices accept every direction, pinches none.
    pub fn taut_region_contains(&self, v: GridVertex, u: GridVertex) -> bool {
        let cfg = self.config(v);
        let dx = (u.x - v.x) as i64;
        let dy = (u.y - v.y) as i64;
        if dx == 0 && dy == 0 {
            return false;
        }
        match cfg.count() {
            0 => true,
            1 => {
                let (sx, sy) = cfg.blocked_quadrants().next().unwrap();
                dx * dy * (sx * sy) as i64 <= 0
            }
            2 if cfg.is_pinch() => false,
            // flat wall: only straight runs along the wall continue
            2 => {
                if cfg.nw == cfg.ne {
                    dy == 0
                } else {
                    dx == 0
                }
            }
            _ => false,
        }
    }

    /// Stable 64-bit digest of the map dimensions and raster.
    pub fn hash64(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(b"gridmap");
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        let mut byte = 0u8;
        for (i, &b) in self.blocked.iter().enumerate() {
            byte |= (b as u8) << (i % 8);
            if i % 8 == 7 {
                h.update([byte]);
                byte = 0;
            }
        }
        h.update([byte]);
        let out = h.finalize();
        u64::from_le_bytes(out[..8].try_into().unwrap())
    }
}

fn compute_extents_raw(width: i32, height: i32, blocked: &[bool]) -> Extents {
    let stride = (width + 1) as usize;
    let mut right = vec![0u32; stride * height as usize];
    let mut left = vec![0u32; stride * height as usize];
    for r in 0..height as usize {
        let row = &blocked[r * width as usize..(r + 1) * width as usize];
        let base = r * stride;
        for x in (0..width as usize).rev() {
            right[base + x] = if row[x] { 0 } else { right[base + x + 1] + 1 };
        }
        for x in 1..=width as usize {
            left[base + x] = if row[x - 1] {
                0
            } else {
                left[base + x - 1] + 1
            };
        }
    }
    Extents {
        stride,
        right,
        left,
    }
}

pub(crate) fn cross(a: (i64, i64), b: (i64, i64)) -> i64 {
    a.0 * b.1 - a.1 * b.0
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
