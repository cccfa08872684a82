use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyangle::map_io::EndpointMapping;
use anyangle::mapgen::{GenKind, GenSpec};
use anyangle::GridVertex;
use anyangle_cli::bench::{run_bench, Algorithm, BenchConfig};
use anyangle_cli::{
    cmd_build, cmd_dump, cmd_mapgen, cmd_query, cmd_render, parse_vertex, BuildArgs, BuildVariant,
    QueryArgs, RenderArgs, Status,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "anyangle",
    version,
    about = "Optimal any-angle paths on grid maps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mapping {
    TopLeft,
    Nearest,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormat {
    Tsv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Preprocess a map into a graph file.
    Build {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum, default_value = "enlsvg")]
        variant: BuildVariant,
        #[arg(long, short)]
        out: PathBuf,
        /// Build the full graph with pairwise line-of-sight checks.
        #[arg(long)]
        checks: bool,
    },
    /// Shortest path between two grid vertices.
    Query {
        #[arg(long)]
        graph: PathBuf,
        /// The map the graph was built from.
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_vertex)]
        from: GridVertex,
        #[arg(long, value_parser = parse_vertex)]
        to: GridVertex,
        /// Audit the path and compare with the brute-force oracle.
        #[arg(long)]
        verify: bool,
        /// Write an SVG of the map, search tree and path.
        #[arg(long)]
        render: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        cell: u32,
    },
    /// Time all algorithms over a directory of maps.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = Algorithm::ALL.to_vec())]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 5)]
        warmup: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        verify: bool,
        /// Take query pairs from `<map>.scen` files where present.
        #[arg(long)]
        scenarios: bool,
        #[arg(long, value_enum, default_value = "top-left")]
        mapping: Mapping,
        /// Maps benchmarked in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Machine-readable report.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Generate a map and a `.gen` sidecar describing it.
    Mapgen {
        #[arg(long, short)]
        out: PathBuf,
        /// Regenerate from an existing sidecar; other options are ignored.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value = "uniform")]
        kind: String,
        #[arg(long, default_value_t = 64)]
        width: i32,
        #[arg(long, default_value_t = 64)]
        height: i32,
        #[arg(long, default_value_t = 0.2)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        iterations: u32,
        #[arg(long, default_value_t = 5)]
        birth: u32,
        #[arg(long, default_value_t = 5)]
        survive: u32,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        #[arg(long, default_value_t = 1)]
        tiles_x: u32,
        #[arg(long, default_value_t = 1)]
        tiles_y: u32,
        /// Base map for `upscale` and `tile`.
        #[arg(long)]
        base: Option<String>,
    },
    /// Text dump of a graph file.
    Dump {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum, default_value = "tsv")]
        format: DumpFormat,
    },
    /// Draw a map, optionally with a path and its search tree.
    Render {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_parser = parse_vertex, requires = "to")]
        from: Option<GridVertex>,
        #[arg(long, value_parser = parse_vertex, requires = "from")]
        to: Option<GridVertex>,
        #[arg(long)]
        tree: bool,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        cell: u32,
    },
}

fn run(cmd: Cmd) -> anyhow::Result<Status> {
    match cmd {
        Cmd::Build {
            map,
            variant,
            out,
            checks,
        } => {
            print!(
                "{}",
                cmd_build(&BuildArgs {
                    map: &map,
                    variant,
                    out: &out,
                    checks
                })?
            );
            Ok(Status::Ok)
        }
        Cmd::Query {
            graph,
            map,
            from,
            to,
            verify,
            render,
            cell,
        } => {
            let (status, text) = cmd_query(&QueryArgs {
                graph: &graph,
                map: &map,
                from,
                to,
                verify,
                render: render.as_deref(),
                cell,
            })?;
            print!("{text}");
            Ok(status)
        }
        Cmd::Bench {
            corpus,
            algorithms,
            runs,
            warmup,
            seed,
            verify,
            scenarios,
            mapping,
            jobs,
            json,
        } => {
            let cfg = BenchConfig {
                algorithms,
                runs,
                warmup,
                seed,
                verify,
                scenarios,
                mapping: match mapping {
                    Mapping::TopLeft => EndpointMapping::TopLeft,
                    Mapping::Nearest => EndpointMapping::NearestTraversable,
                },
                jobs,
            };
            let report = run_bench(&corpus, &cfg)?;
            print!("{}", report.to_table());
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            if report.failures() > 0 {
                eprintln!("{} optimality or audit failures", report.failures());
                return Ok(Status::VerifyFailed);
            }
            Ok(Status::Ok)
        }
        Cmd::Mapgen {
            out,
            spec,
            kind,
            width,
            height,
            ratio,
            seed,
            iterations,
            birth,
            survive,
            scale,
            tiles_x,
            tiles_y,
            base,
        } => {
            let (spec, base_dir) = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)?;
                    let dir = p.parent().unwrap_or(Path::new(".")).to_path_buf();
                    (GenSpec::parse_sidecar(&text)?, dir)
                }
                None => (
                    GenSpec {
                        kind: kind.parse::<GenKind>()?,
                        width,
                        height,
                        blocked_ratio: ratio,
                        seed,
                        ca_iterations: iterations,
                        ca_birth: birth,
                        ca_survive: survive,
                        scale,
                        tiles_x,
                        tiles_y,
                        source: base,
                    },
                    PathBuf::from("."),
                ),
            };
            print!("{}", cmd_mapgen(&spec, &base_dir, &out)?);
            Ok(Status::Ok)
        }
        Cmd::Dump { graph, map, format } => {
            match format {
                DumpFormat::Tsv => print!("{}", cmd_dump(&graph, &map)?),
            }
            Ok(Status::Ok)
        }
        Cmd::Render {
            map,
            graph,
            from,
            to,
            tree,
            out,
            cell,
        } => cmd_render(&RenderArgs {
            map: &map,
            graph: graph.as_deref(),
            endpoints: from.zip(to),
            tree,
            out: &out,
            cell,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
