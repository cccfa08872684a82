use std::path::PathBuf;

use anyangle::map_io::{
    parse_map, parse_scenarios, read_map_file, scenario_vertex, write_map, write_scenarios,
    EndpointMapping, ScenarioEntry,
};
use anyangle::mapgen::{gen_cave, gen_tile, gen_uniform, gen_upscale, generate, GenKind, GenSpec};
use anyangle::{Enlsvg, Error, GridMap, GridVertex};
use proptest::prelude::*;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn ratio_extremes() {
    assert_eq!(
        gen_uniform(&GenSpec::uniform(20, 10, 0.0, 3)).blocked_count(),
        0
    );
    assert_eq!(
        gen_uniform(&GenSpec::uniform(20, 10, 1.0, 3)).blocked_count(),
        200
    );
}

#[test]
fn blocked_fraction_is_close_to_the_ratio() {
    for &p in &[0.1, 0.25, 0.4] {
        let m = gen_uniform(&GenSpec::uniform(200, 200, p, 11));
        let frac = m.blocked_count() as f64 / 40_000.0;
        // ~5 standard deviations at n = 40000
        assert!((frac - p).abs() < 0.012, "{p}: {frac}");
    }
}

#[test]
fn cave_with_no_passes_is_uniform() {
    let spec = GenSpec::cave(40, 30, 0.45, 0, 9);
    assert_eq!(gen_cave(&spec), gen_uniform(&spec));
}

#[test]
fn smoothing_removes_corners() {
    let mut fewer = 0;
    for seed in 0..8 {
        let raw = gen_cave(&GenSpec::cave(64, 64, 0.45, 0, seed))
            .convex_corners()
            .len();
        let smooth = gen_cave(&GenSpec::cave(64, 64, 0.45, 4, seed))
            .convex_corners()
            .len();
        fewer += usize::from(smooth < raw);
    }
    assert_eq!(fewer, 8);
}

#[test]
fn upscale_is_a_block_copy_without_smoothing() {
    let base = gen_uniform(&GenSpec::uniform(7, 5, 0.4, 2));
    let spec = GenSpec {
        kind: GenKind::Upscale,
        scale: 3,
        ..Default::default()
    };
    let up = gen_upscale(&spec, &base);
    assert_eq!((up.width(), up.height()), (21, 15));
    for r in 0..15 {
        for c in 0..21 {
            assert_eq!(up.is_blocked(c, r), base.is_blocked(c / 3, r / 3));
        }
    }
    assert_eq!(up.blocked_count(), 9 * base.blocked_count());
}

#[test]
fn tiling_leaves_free_seams() {
    let base = GridMap::new(4, 3);
    let full = gen_uniform(&GenSpec::uniform(4, 3, 1.0, 0));
    let spec = GenSpec {
        kind: GenKind::Tile,
        tiles_x: 3,
        tiles_y: 2,
        ..Default::default()
    };
    assert_eq!(gen_tile(&spec, &base).blocked_count(), 0);
    let t = gen_tile(&spec, &full);
    assert_eq!((t.width(), t.height()), (14, 7));
    assert_eq!(t.blocked_count(), 6 * 12);
    for r in 0..7 {
        assert!(!t.is_blocked(4, r) && !t.is_blocked(9, r));
    }
    for c in 0..14 {
        assert!(!t.is_blocked(c, 3));
    }
}

#[test]
fn generate_needs_a_base_for_derived_kinds() {
    let spec = GenSpec {
        kind: GenKind::Tile,
        tiles_x: 2,
        ..Default::default()
    };
    assert!(matches!(generate(&spec, None), Err(Error::GenSpec(_))));
}

#[test]
fn write_examples() {
    let one = GridMap::from_blocked_tiles(3, 2, &[(1, 0)]);
    assert_eq!(
        write_map(&one),
        "type octile\nheight 2\nwidth 3\nmap\n.@.\n...\n"
    );
    let empty = write_map(&GridMap::new(3, 2));
    assert_eq!(empty.matches('@').count(), 0);
    assert_eq!(empty.lines().skip(4).collect::<String>(), "......");
    let full = write_map(&gen_uniform(&GenSpec::uniform(3, 2, 1.0, 0)));
    assert_eq!(full.lines().skip(4).collect::<String>(), "@@@@@@");
}

#[test]
fn parse_accepts_other_terrain_and_crlf() {
    let m = parse_map("type octile\r\nheight 1\r\nwidth 5\r\nmap\r\n.GTOW\r\n").unwrap();
    assert_eq!(m.raster(), &[false, false, true, true, true]);
    assert!(matches!(
        parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n"),
        Err(Error::MapParse { .. })
    ));
    assert!(matches!(
        parse_map("type octile\nheight 1\nwidth 2\nmap\n.x\n"),
        Err(Error::MapParse { line: 5, .. })
    ));
}

#[test]
fn scenario_round_trip() {
    let e = ScenarioEntry {
        bucket: 3,
        map: "a.map".into(),
        map_width: 10,
        map_height: 8,
        start: (1, 2),
        goal: (7, 6),
        optimal: 8.0,
    };
    let text = write_scenarios(std::slice::from_ref(&e));
    assert_eq!(parse_scenarios(&text).unwrap(), vec![e]);
    assert!(parse_scenarios("version 2\n").is_err());
    assert!(parse_scenarios("version 1\n0\ta.map\t4\t4\t0\t0\t3\t3\t1.0\n").is_err());
}

#[test]
fn endpoint_mappings() {
    let m = GridMap::from_blocked_tiles(4, 4, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
    // top-left of tile (1,1) is enclosed by blocked tiles
    assert_eq!(scenario_vertex(&m, (1, 1), EndpointMapping::TopLeft), None);
    let near = scenario_vertex(&m, (1, 1), EndpointMapping::NearestTraversable).unwrap();
    assert!(m.config(near).has_free());
    assert_eq!(near, GridVertex::new(2, 1));
    assert_eq!(
        scenario_vertex(&m, (3, 3), EndpointMapping::TopLeft),
        Some(GridVertex::new(3, 3))
    );
}

#[test]
fn corpus_scenarios_stay_under_reference_lengths() {
    let dir = corpus();
    let m = read_map_file(&dir.join("cave-64.map")).unwrap();
    let text = std::fs::read_to_string(dir.join("cave-64.map.scen")).unwrap();
    let entries = parse_scenarios(&text).unwrap();
    assert!(!entries.is_empty());
    let e = Enlsvg::build(&m);
    for s in &entries {
        assert_eq!((s.map_width, s.map_height), (m.width(), m.height()));
        let a = scenario_vertex(&m, s.start, EndpointMapping::TopLeft).unwrap();
        let b = scenario_vertex(&m, s.goal, EndpointMapping::TopLeft).unwrap();
        let p = e
            .query(&m, a, b)
            .unwrap()
            .expect("scenario pairs are connected");
        assert!(
            p.length <= s.optimal + 1e-6,
            "{:?}: {} > {}",
            s,
            p.length,
            s.optimal
        );
    }
}

#[test]
fn corpus_maps_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(corpus()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "map") {
            let m = read_map_file(&path).unwrap();
            assert_eq!(parse_map(&write_map(&m)).unwrap(), m);
            n += 1;
        }
    }
    assert!(n >= 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generation_is_deterministic(w in 1..40i32, h in 1..40i32, p in 0.0..1.0f64, it in 0..4u32, seed in any::<u64>()) {
        let spec = GenSpec::cave(w, h, p, it, seed);
        let a = gen_cave(&spec);
        prop_assert_eq!(&a, &gen_cave(&spec));
        prop_assert_eq!(a.hash64(), gen_cave(&spec).hash64());
    }

    #[test]
    fn write_then_parse_is_identity(w in 1..30i32, h in 1..30i32, p in 0.0..1.0f64, seed in any::<u64>()) {
        let m = gen_uniform(&GenSpec::uniform(w, h, p, seed));
        let back = parse_map(&write_map(&m)).unwrap();
        prop_assert_eq!(back.hash64(), m.hash64());
        prop_assert_eq!(back, m);
    }

    #[test]
    fn sidecars_round_trip(w in 1..30i32, h in 1..30i32, p in 0.0..1.0f64, it in 0..5u32, seed in any::<u64>()) {
        let spec = GenSpec::cave(w, h, p, it, seed);
        prop_assert_eq!(GenSpec::parse_sidecar(&spec.to_sidecar()).unwrap(), spec);
    }
}
