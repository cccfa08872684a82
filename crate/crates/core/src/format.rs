//! Binary graph files and a TSV dump for diffing.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "AAVG" | version u32 | map hash u64 | variant u8 (0 VG, 1 SVG, 2 ENLSVG)
//! width i32 | height i32
//! n u32 | n * (x u32, y u32)
//! m u32 | m * (u u32, v u32, squared length u64)
//! ENLSVG only:
//!   m * level u32 (u32::MAX = W)
//!   k u32 | k * skip vertex u32
//!   s u32 | s * (a u32, b u32, weight f64, first hop a u32, first hop b u32,
//!               path length u32, path vertex ids u32...)
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::grid::{GridMap, GridVertex};
use crate::hierarchy::{EdgeHierarchy, SkipEdge, LEVEL_W};
use crate::visgraph::{Variant, VisGraph};

pub const MAGIC: &[u8; 4] = b"AAVG";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoredVariant {
    Vg = 0,
    Svg = 1,
    Enlsvg = 2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub version: u32,
    pub map_hash: u64,
    pub variant: StoredVariant,
    pub width: i32,
    pub height: i32,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn write_graph<W: Write>(
    mut w: W,
    map: &GridMap,
    graph: &VisGraph,
    hierarchy: Option<&EdgeHierarchy>,
) -> Result<()> {
    let variant = match (graph.variant(), hierarchy) {
        (Variant::Vg, None) => StoredVariant::Vg,
        (Variant::Svg, None) => StoredVariant::Svg,
        (Variant::Svg, Some(_)) => StoredVariant::Enlsvg,
        (Variant::Vg, Some(_)) => return Err(bad("a hierarchy needs a sparse graph")),
    };
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u64::<LE>(map.hash64())?;
    w.write_u8(variant as u8)?;
    w.write_i32::<LE>(map.width())?;
    w.write_i32::<LE>(map.height())?;
    w.write_u32::<LE>(graph.num_vertices() as u32)?;
    for v in graph.vertices() {
        w.write_u32::<LE>(v.x as u32)?;
        w.write_u32::<LE>(v.y as u32)?;
    }
    w.write_u32::<LE>(graph.num_edges() as u32)?;
    for e in graph.edges() {
        w.write_u32::<LE>(e.u)?;
        w.write_u32::<LE>(e.v)?;
        w.write_u64::<LE>(e.sq_len as u64)?;
    }
    if let Some(h) = hierarchy {
        for &l in &h.levels {
            w.write_u32::<LE>(l)?;
        }
        w.write_u32::<LE>(h.skip_vertices.len() as u32)?;
        for &s in &h.skip_vertices {
            w.write_u32::<LE>(s)?;
        }
        w.write_u32::<LE>(h.skip_edges.len() as u32)?;
        for se in &h.skip_edges {
            w.write_u32::<LE>(se.a)?;
            w.write_u32::<LE>(se.b)?;
            w.write_f64::<LE>(se.weight)?;
            w.write_u32::<LE>(se.first_hop_a)?;
            w.write_u32::<LE>(se.first_hop_b)?;
            w.write_u32::<LE>(se.path.len() as u32)?;
            for &p in &se.path {
                w.write_u32::<LE>(p)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a graph file"));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let map_hash = r.read_u64::<LE>()?;
    let variant = match r.read_u8()? {
        0 => StoredVariant::Vg,
        1 => StoredVariant::Svg,
        2 => StoredVariant::Enlsvg,
        x => return Err(bad(format!("unknown variant tag {x}"))),
    };
    let width = r.read_i32::<LE>()?;
    let height = r.read_i32::<LE>()?;
    Ok(Header {
        version,
        map_hash,
        variant,
        width,
        height,
    })
}

/// Reads a graph built for `map`; fails if the file was built for another.
pub fn read_graph<R: Read>(
    mut r: R,
    map: &GridMap,
) -> Result<(Header, VisGraph, Option<EdgeHierarchy>)> {
    let header = read_header(&mut r)?;
    if header.map_hash != map.hash64()
        || (header.width, header.height) != (map.width(), map.height())
    {
        return Err(bad("graph was built for a different map"));
    }
    let n = r.read_u32::<LE>()? as usize;
    let mut vertices = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let v = GridVertex::new(r.read_u32::<LE>()? as i32, r.read_u32::<LE>()? as i32);
        if !map.in_vertex_bounds(v) {
            return Err(bad(format!("vertex {v} out of bounds")));
        }
        vertices.push(v);
    }
    if !vertices.windows(2).all(|w| w[0] < w[1]) {
        return Err(bad("vertex table is not sorted"));
    }
    let m = r.read_u32::<LE>()? as usize;
    let mut pairs = Vec::with_capacity(m.min(1 << 24));
    for _ in 0..m {
        let (u, v) = (r.read_u32::<LE>()? as usize, r.read_u32::<LE>()? as usize);
        let sq = r.read_u64::<LE>()?;
        if u >= n || v >= n || u >= v {
            return Err(bad(format!("bad edge ({u}, {v})")));
        }
        if vertices[u].sq_dist(vertices[v]) as u64 != sq {
            return Err(bad(format!("edge ({u}, {v}) has the wrong length")));
        }
        pairs.push((vertices[u], vertices[v]));
    }
    let variant = if header.variant == StoredVariant::Vg {
        Variant::Vg
    } else {
        Variant::Svg
    };
    let graph = VisGraph::from_parts(map, variant, vertices, pairs);
    if graph.num_edges() != m {
        return Err(bad("duplicate edges"));
    }
    if header.variant != StoredVariant::Enlsvg {
        return Ok((header, graph, None));
    }

    let check = |id: u32| -> Result<u32> {
        if (id as usize) < n {
            Ok(id)
        } else {
            Err(bad(format!("vertex id {id} out of range")))
        }
    };
    let mut levels = Vec::with_capacity(m);
    for _ in 0..m {
        let l = r.read_u32::<LE>()?;
        if l == 0 || (l != LEVEL_W && l as usize > m) {
            return Err(bad(format!("bad level {l}")));
        }
        levels.push(l);
    }
    let k = r.read_u32::<LE>()? as usize;
    let mut skip_vertices = Vec::with_capacity(k.min(n));
    for _ in 0..k {
        skip_vertices.push(check(r.read_u32::<LE>()?)?);
    }
    let s = r.read_u32::<LE>()? as usize;
    let mut skip_edges = Vec::with_capacity(s.min(m));
    for _ in 0..s {
        let a = check(r.read_u32::<LE>()?)?;
        let b = check(r.read_u32::<LE>()?)?;
        let weight = r.read_f64::<LE>()?;
        let first_hop_a = check(r.read_u32::<LE>()?)?;
        let first_hop_b = check(r.read_u32::<LE>()?)?;
        let len = r.read_u32::<LE>()? as usize;
        if len < 2 || len > n + 1 {
            return Err(bad("bad skip path length"));
        }
        let mut path = Vec::with_capacity(len);
        for _ in 0..len {
            path.push(check(r.read_u32::<LE>()?)?);
        }
        skip_edges.push(SkipEdge {
            a,
            b,
            weight,
            first_hop_a,
            first_hop_b,
            path,
        });
    }
    let h = EdgeHierarchy::from_parts(n, levels, skip_vertices, skip_edges);
    Ok((header, graph, Some(h)))
}

fn level_str(l: u32) -> String {
    if l == LEVEL_W {
        "W".into()
    } else {
        l.to_string()
    }
}

/// One line per vertex, edge and skip edge, tab separated.
pub fn dump_tsv(graph: &VisGraph, hierarchy: Option<&EdgeHierarchy>) -> String {
    let mut s = String::new();
    for (i, v) in graph.vertices().iter().enumerate() {
        let skip = hierarchy.is_some_and(|h| h.is_skip_vertex(i as u32));
        let _ = writeln!(
            s,
            "vertex\t{i}\t{}\t{}{}",
            v.x,
            v.y,
            if skip { "\tskip" } else { "" }
        );
    }
    for (i, e) in graph.edges().iter().enumerate() {
        let level = hierarchy.map_or(String::new(), |h| {
            format!("\t{}", level_str(h.level(i as u32)))
        });
        let _ = writeln!(s, "edge\t{i}\t{}\t{}\t{}{level}", e.u, e.v, e.sq_len);
    }
    if let Some(h) = hierarchy {
        for (i, se) in h.skip_edges.iter().enumerate() {
            let path: Vec<String> = se.path.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                s,
                "skip\t{i}\t{}\t{}\t{:.9}\t{}",
                se.a,
                se.b,
                se.weight,
                path.join(",")
            );
        }
    }
    s
}
