//! Static SVG pictures of a map with an optional search tree and path.

use std::fmt::Write as _;

use anyangle::search::TreeEdge;
use anyangle::{GridMap, GridVertex};

pub struct Scene<'a> {
    pub map: &'a GridMap,
    pub tree: &'a [TreeEdge],
    pub path: &'a [GridVertex],
    pub start: Option<GridVertex>,
    pub goal: Option<GridVertex>,
    /// Pixels per tile.
    pub cell: u32,
}

pub fn render_svg(scene: &Scene) -> String {
    let m = scene.map;
    let k = scene.cell.max(1) as f64;
    let (w, h) = (m.width() as f64 * k, m.height() as f64 * k);
    let px = |v: GridVertex| (v.x as f64 * k, v.y as f64 * k);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);

    // one rect per horizontal run of blocked tiles
    let _ = writeln!(s, r##"<g fill="#3a3a3a">"##);
    for r in 0..m.height() {
        let mut c = 0;
        while c < m.width() {
            if !m.is_blocked(c, r) {
                c += 1;
                continue;
            }
            let start = c;
            while c < m.width() && m.is_blocked(c, r) {
                c += 1;
            }
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{k}"/>"#,
                start as f64 * k,
                r as f64 * k,
                (c - start) as f64 * k
            );
        }
    }
    let _ = writeln!(s, "</g>");

    if !scene.tree.is_empty() {
        let stroke = (k / 10.0).max(0.5);
        let _ = writeln!(s, r##"<g stroke="#7fb3e6" stroke-width="{stroke}">"##);
        for e in scene.tree {
            let ((x1, y1), (x2, y2)) = (px(e.from), px(e.to));
            let _ = writeln!(s, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#);
        }
        let _ = writeln!(s, "</g>");
    }

    if scene.path.len() > 1 {
        let pts: Vec<String> = scene
            .path
            .iter()
            .map(|&v| {
                let (x, y) = px(v);
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="{}"/>"##,
            pts.join(" "),
            (k / 4.0).max(1.0)
        );
    }
    for (v, colour) in [(scene.start, "#2ca02c"), (scene.goal, "#9467bd")] {
        if let Some(v) = v {
            let (x, y) = px(v);
            let _ = writeln!(
                s,
                r#"<circle cx="{x}" cy="{y}" r="{}" fill="{colour}"/>"#,
                (k / 3.0).max(1.5)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
