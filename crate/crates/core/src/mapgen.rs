//! Seeded map generators.
//!
//! Randomness comes from ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! one Bernoulli draw per tile in row-major order. Both are value-stable
//! across platforms, so a spec always reproduces the same map.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Uniform,
    Cave,
    Upscale,
    Tile,
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GenKind::Uniform),
            "cave" => Ok(GenKind::Cave),
            "upscale" => Ok(GenKind::Upscale),
            "tile" => Ok(GenKind::Tile),
            _ => Err(Error::GenSpec(format!("unknown kind `{s}`"))),
        }
    }
}

impl GenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GenKind::Uniform => "uniform",
            GenKind::Cave => "cave",
            GenKind::Upscale => "upscale",
            GenKind::Tile => "tile",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub width: i32,
    pub height: i32,
    pub blocked_ratio: f64,
    pub seed: u64,
    pub ca_iterations: u32,
    /// A free tile becomes blocked with at least this many blocked neighbours.
    pub ca_birth: u32,
    /// A blocked tile stays blocked with at least this many.
    pub ca_survive: u32,
    pub scale: u32,
    pub tiles_x: u32,
    pub tiles_y: u32,
    /// Base map file for `upscale` and `tile`.
    pub source: Option<String>,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            kind: GenKind::Uniform,
            width: 64,
            height: 64,
            blocked_ratio: 0.2,
            seed: 0,
            ca_iterations: 0,
            ca_birth: 5,
            ca_survive: 5,
            scale: 1,
            tiles_x: 1,
            tiles_y: 1,
            source: None,
        }
    }
}

impl GenSpec {
    pub fn uniform(width: i32, height: i32, ratio: f64, seed: u64) -> Self {
        GenSpec {
            width,
            height,
            blocked_ratio: ratio,
            seed,
            ..Default::default()
        }
    }

    pub fn cave(width: i32, height: i32, ratio: f64, iterations: u32, seed: u64) -> Self {
        GenSpec {
            kind: GenKind::Cave,
            ca_iterations: iterations,
            ..Self::uniform(width, height, ratio, seed)
        }
    }

    /// `key=value` lines, one per field.
    pub fn to_sidecar(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind={}", self.kind.as_str());
        let _ = writeln!(s, "width={}", self.width);
        let _ = writeln!(s, "height={}", self.height);
        let _ = writeln!(s, "blocked_ratio={}", self.blocked_ratio);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "ca_iterations={}", self.ca_iterations);
        let _ = writeln!(s, "ca_birth={}", self.ca_birth);
        let _ = writeln!(s, "ca_survive={}", self.ca_survive);
        let _ = writeln!(s, "scale={}", self.scale);
        let _ = writeln!(s, "tiles_x={}", self.tiles_x);
        let _ = writeln!(s, "tiles_y={}", self.tiles_y);
        if let Some(src) = &self.source {
            let _ = writeln!(s, "source={src}");
        }
        s
    }

    pub fn parse_sidecar(text: &str) -> Result<Self> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::GenSpec(format!("bad value for {key}: `{v}`")))
        }
        let mut spec = GenSpec::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::GenSpec(format!("expected key=value, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "kind" => spec.kind = v.parse()?,
                "width" => spec.width = num(k, v)?,
                "height" => spec.height = num(k, v)?,
                "blocked_ratio" => spec.blocked_ratio = num(k, v)?,
                "seed" => spec.seed = num(k, v)?,
                "ca_iterations" => spec.ca_iterations = num(k, v)?,
                "ca_birth" => spec.ca_birth = num(k, v)?,
                "ca_survive" => spec.ca_survive = num(k, v)?,
                "scale" => spec.scale = num(k, v)?,
                "tiles_x" => spec.tiles_x = num(k, v)?,
                "tiles_y" => spec.tiles_y = num(k, v)?,
                "source" => spec.source = Some(v.to_string()),
                _ => return Err(Error::GenSpec(format!("unknown key `{k}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.blocked_ratio) {
            return Err(Error::GenSpec("blocked_ratio must be in [0, 1]".into()));
        }
        if self.width < 1 || self.height < 1 {
            return Err(Error::GenSpec("width and height must be positive".into()));
        }
        if self.scale < 1 || self.tiles_x < 1 || self.tiles_y < 1 {
            return Err(Error::GenSpec(
                "scale and tile counts must be at least 1".into(),
            ));
        }
        if self.ca_birth > 8 + 1 || self.ca_survive > 8 + 1 {
            return Err(Error::GenSpec("thresholds must be at most 9".into()));
        }
        Ok(())
    }
}

pub fn gen_uniform(spec: &GenSpec) -> GridMap {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = spec.blocked_ratio.clamp(0.0, 1.0);
    let raster = (0..spec.width as usize * spec.height as usize)
        .map(|_| rng.gen_bool(p))
        .collect();
    GridMap::from_raster(spec.width, spec.height, raster)
}

/// One smoothing pass over the 8-neighbourhood, outside counted blocked.
pub fn ca_step(map: &GridMap, birth: u32, survive: u32) -> GridMap {
    let (w, h) = (map.width(), map.height());
    let mut raster = Vec::with_capacity((w * h) as usize);
    for r in 0..h {
        for c in 0..w {
            let mut n = 0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if (dr, dc) != (0, 0) && map.is_blocked(c + dc, r + dr) {
                        n += 1;
                    }
                }
            }
            let blocked = if map.is_blocked(c, r) {
                n >= survive
            } else {
                n >= birth
            };
            raster.push(blocked);
        }
    }
    GridMap::from_raster(w, h, raster)
}

fn smooth(mut map: GridMap, spec: &GenSpec) -> GridMap {
    for _ in 0..spec.ca_iterations {
        map = ca_step(&map, spec.ca_birth, spec.ca_survive);
    }
    map
}

pub fn gen_cave(spec: &GenSpec) -> GridMap {
    smooth(gen_uniform(spec), spec)
}

/// Nearest-neighbour blowup by `scale`, then smoothing passes.
pub fn gen_upscale(spec: &GenSpec, base: &GridMap) -> GridMap {
    let k = spec.scale.max(1) as i32;
    let (w, h) = (base.width() * k, base.height() * k);
    let mut raster = Vec::with_capacity((w * h) as usize);
    for r in 0..h {
        for c in 0..w {
            raster.push(base.is_blocked(c / k, r / k));
        }
    }
    smooth(GridMap::from_raster(w, h, raster), spec)
}

/// `tiles_x` by `tiles_y` copies of `base` with a free one-tile seam
/// between neighbouring copies.
pub fn gen_tile(spec: &GenSpec, base: &GridMap) -> GridMap {
    let (tx, ty) = (spec.tiles_x.max(1) as i32, spec.tiles_y.max(1) as i32);
    let (bw, bh) = (base.width(), base.height());
    let (w, h) = (tx * bw + tx - 1, ty * bh + ty - 1);
    let mut raster = Vec::with_capacity((w * h) as usize);
    for r in 0..h {
        for c in 0..w {
            let (cc, rr) = (c % (bw + 1), r % (bh + 1));
            raster.push(cc < bw && rr < bh && base.is_blocked(cc, rr));
        }
    }
    GridMap::from_raster(w, h, raster)
}

/// Runs whichever generator `spec` names. `upscale` and `tile` need `base`.
pub fn generate(spec: &GenSpec, base: Option<&GridMap>) -> Result<GridMap> {
    spec.validate()?;
    let need = || Error::GenSpec(format!("`{}` needs a base map", spec.kind.as_str()));
    Ok(match spec.kind {
        GenKind::Uniform => gen_uniform(spec),
        GenKind::Cave => gen_cave(spec),
        GenKind::Upscale => gen_upscale(spec, base.ok_or_else(need)?),
        GenKind::Tile => gen_tile(spec, base.ok_or_else(need)?),
    })
}
