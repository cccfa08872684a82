//! The octile map format and `version 1` scenario files used by the common
//! grid benchmark sets.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridMap, GridVertex};

fn map_err(line: usize, msg: impl Into<String>) -> Error {
    Error::MapParse {
        line,
        msg: msg.into(),
    }
}

/// Parses a map. Only `.` and `G` are passable; `@ O T S W` are blocked.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate();
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| map_err(0, format!("unexpected end of input, expected {what}")))
    };

    let (n, l) = next("`type`")?;
    if l.trim() != "type octile" {
        return Err(map_err(n, format!("expected `type octile`, got `{l}`")));
    }
    let mut width = None;
    let mut height = None;
    loop {
        let (n, l) = next("`map`")?;
        let mut parts = l.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some("map"), None, _) => break,
            (Some(k @ ("width" | "height")), Some(v), None) => {
                let v: i32 = v
                    .parse()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| map_err(n, format!("bad {k} `{v}`")))?;
                if k == "width" {
                    width = Some(v);
                } else {
                    height = Some(v);
                }
            }
            _ => return Err(map_err(n, format!("unexpected header line `{l}`"))),
        }
    }
    let width = width.ok_or_else(|| map_err(0, "missing width"))?;
    let height = height.ok_or_else(|| map_err(0, "missing height"))?;

    let mut raster = Vec::with_capacity((width * height) as usize);
    for row in 0..height {
        let (n, l) = next(&format!("map row {row}"))?;
        if l.chars().count() != width as usize {
            return Err(map_err(
                n,
                format!("row has {} cells, expected {width}", l.chars().count()),
            ));
        }
        for (col, ch) in l.chars().enumerate() {
            raster.push(match ch {
                '.' | 'G' => false,
                '@' | 'O' | 'T' | 'S' | 'W' => true,
                _ => return Err(map_err(n, format!("unknown cell `{ch}` at column {col}"))),
            });
        }
    }
    for (n, l) in lines {
        if !l.trim().is_empty() {
            return Err(map_err(n + 1, "trailing data after the last row"));
        }
    }
    Ok(GridMap::from_raster(width, height, raster))
}

pub fn parse_map_bytes(bytes: &[u8]) -> Result<GridMap> {
    let text = std::str::from_utf8(bytes).map_err(|e| map_err(0, format!("not UTF-8: {e}")))?;
    parse_map(text)
}

pub fn read_map_file(path: &Path) -> Result<GridMap> {
    parse_map_bytes(&std::fs::read(path)?)
}

/// Writes `.` and `@` with LF line ends.
pub fn write_map(map: &GridMap) -> String {
    let (w, h) = (map.width(), map.height());
    let mut s = String::with_capacity(((w + 1) * h) as usize + 40);
    let _ = write!(s, "type octile\nheight {h}\nwidth {w}\nmap\n");
    for r in 0..h {
        for c in 0..w {
            s.push(if map.is_blocked(c, r) { '@' } else { '.' });
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map: String,
    pub map_width: i32,
    pub map_height: i32,
    /// Tile coordinates `(col, row)`.
    pub start: (i32, i32),
    pub goal: (i32, i32),
    /// Reference length from the file; an 8-directional length, so an
    /// upper bound on the any-angle optimum.
    pub optimal: f64,
}

fn scen_err(line: usize, msg: impl Into<String>) -> Error {
    Error::ScenarioParse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_scenarios(text: &str) -> Result<Vec<ScenarioEntry>> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate();
    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(["version", "1"]) => {}
        Some((_, l)) if l.split_whitespace().next() == Some("version") => {
            return Err(scen_err(1, format!("unsupported `{l}`")))
        }
        _ => return Err(scen_err(1, "missing `version 1` header")),
    }
    let mut out = Vec::new();
    for (i, l) in lines {
        let n = i + 1;
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 9 {
            return Err(scen_err(n, format!("expected 9 fields, found {}", f.len())));
        }
        let int = |k: usize| -> Result<i32> {
            f[k].parse()
                .map_err(|_| scen_err(n, format!("field {} is not an integer: `{}`", k + 1, f[k])))
        };
        let e = ScenarioEntry {
            bucket: f[0]
                .parse()
                .map_err(|_| scen_err(n, format!("bad bucket `{}`", f[0])))?,
            map: f[1].to_string(),
            map_width: int(2)?,
            map_height: int(3)?,
            start: (int(4)?, int(5)?),
            goal: (int(6)?, int(7)?),
            optimal: f[8]
                .parse()
                .map_err(|_| scen_err(n, format!("bad length `{}`", f[8])))?,
        };
        let inside = |(c, r): (i32, i32)| c >= 0 && r >= 0 && c < e.map_width && r < e.map_height;
        if !inside(e.start) || !inside(e.goal) {
            return Err(scen_err(n, "coordinates outside the declared map size"));
        }
        let dx = (e.goal.0 - e.start.0) as f64;
        let dy = (e.goal.1 - e.start.1) as f64;
        if e.optimal.is_nan() || e.optimal < dx.hypot(dy) - 1e-6 {
            return Err(scen_err(
                n,
                "reference length shorter than the straight line",
            ));
        }
        out.push(e);
    }
    Ok(out)
}

pub fn write_scenarios(entries: &[ScenarioEntry]) -> String {
    let mut s = String::from("version 1\n");
    for e in entries {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.8}",
            e.bucket,
            e.map,
            e.map_width,
            e.map_height,
            e.start.0,
            e.start.1,
            e.goal.0,
            e.goal.1,
            e.optimal
        );
    }
    s
}

/// How a scenario tile becomes a grid vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EndpointMapping {
    /// The tile's top-left corner.
    #[default]
    TopLeft,
    /// The traversable vertex nearest the tile centre, ties by row then
    /// column.
    NearestTraversable,
}

pub fn scenario_vertex(
    map: &GridMap,
    tile: (i32, i32),
    mode: EndpointMapping,
) -> Option<GridVertex> {
    let top_left = GridVertex::new(tile.0, tile.1);
    match mode {
        EndpointMapping::TopLeft => {
            (map.in_vertex_bounds(top_left) && map.config(top_left).has_free()).then_some(top_left)
        }
        EndpointMapping::NearestTraversable => {
            // distances to the centre, doubled to stay integral
            let (cx, cy) = (2 * tile.0 + 1, 2 * tile.1 + 1);
            let mut best: Option<(i64, GridVertex)> = None;
            for y in 0..=map.height() {
                for x in 0..=map.width() {
                    let v = GridVertex::new(x, y);
                    if !map.config(v).has_free() {
                        continue;
                    }
                    let (dx, dy) = ((2 * x - cx) as i64, (2 * y - cy) as i64);
                    let d = dx * dx + dy * dy;
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, v));
                    }
                }
            }
            best.map(|(_, v)| v)
        }
    }
}
