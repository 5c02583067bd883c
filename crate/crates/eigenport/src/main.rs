//! `eigenport` command line tool: run the spectral transport embedding
//! pipeline on one graph and write its artifacts to a directory.

use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use eigenport::pipeline::{run_pipeline, DimChoice, GraphSource, PmfKind, RunConfig, Stage};
use eigenport::spectral::LaplacianKind;
use eigenport::transport::LpObjective;

#[derive(Parser)]
#[command(
    name = "eigenport",
    version,
    about = "Embed graph Laplacian eigenvectors via ramified optimal transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline and write spectrum, distance, embedding, plot, and
    /// manifest files.
    Run(RunArgs),
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("source")
        .required(true)
        .args(["path", "cycle", "grid", "star", "graph", "swc"]),
))]
struct RunArgs {
    /// Path graph with N nodes.
    #[arg(long, value_name = "N")]
    path: Option<usize>,
    /// Cycle graph with N nodes.
    #[arg(long, value_name = "N")]
    cycle: Option<usize>,
    /// Grid graph, written as MxN.
    #[arg(long, value_name = "MxN")]
    grid: Option<String>,
    /// Starlike tree with comma-separated branch lengths.
    #[arg(long, value_name = "L1,L2,...")]
    star: Option<String>,
    /// Edge list file with `u v [length]` lines.
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Node coordinate file (`id x y [z]` lines) accompanying --graph.
    #[arg(long, value_name = "FILE", requires = "graph")]
    coords: Option<PathBuf>,
    /// SWC neuron morphology file.
    #[arg(long, value_name = "FILE")]
    swc: Option<PathBuf>,
    /// Concavity exponent of the transport cost, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Embedding dimension: `auto` or a fixed positive integer.
    #[arg(long, default_value = "auto")]
    dim: String,
    /// Laplacian variant.
    #[arg(long, value_enum, default_value_t = LaplacianArg::Raw)]
    laplacian: LaplacianArg,
    /// Eigenvector-to-pmf conversion.
    #[arg(long, value_enum, default_value_t = PmfArg::Squared)]
    pmf: PmfArg,
    /// Edge weights in the transport LP objective.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Unit)]
    lp_objective: ObjectiveArg,
    /// Output directory for all artifacts.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Stop after this stage, keeping the files written so far.
    #[arg(long, value_enum, value_name = "STAGE")]
    stop_after: Option<StageArg>,
    /// Record per-pair solver statistics in the manifest.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LaplacianArg {
    Raw,
    Sym,
}

#[derive(Clone, Copy, ValueEnum)]
enum PmfArg {
    Squared,
    L1,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Unit,
    Length,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Spectrum,
    Distance,
    Embedding,
}

fn parse_grid(text: &str) -> Result<(usize, usize), String> {
    let (m, n) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected a grid size like 7x3, got {text:?}"))?;
    let m = m
        .trim()
        .parse()
        .map_err(|e| format!("bad grid width {m:?}: {e}"))?;
    let n = n
        .trim()
        .parse()
        .map_err(|e| format!("bad grid height {n:?}: {e}"))?;
    Ok((m, n))
}

fn parse_star(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|e| format!("bad branch length {part:?}: {e}"))
        })
        .collect()
}

fn parse_dim(text: &str) -> Result<DimChoice, String> {
    if text == "auto" {
        return Ok(DimChoice::Auto);
    }
    text.parse()
        .map(DimChoice::Fixed)
        .map_err(|e| format!("expected `auto` or a positive integer, got {text:?}: {e}"))
}

fn source_of(args: &RunArgs) -> Result<GraphSource, String> {
    if let Some(n) = args.path {
        return Ok(GraphSource::Path(n));
    }
    if let Some(n) = args.cycle {
        return Ok(GraphSource::Cycle(n));
    }
    if let Some(text) = &args.grid {
        let (m, n) = parse_grid(text)?;
        return Ok(GraphSource::Grid(m, n));
    }
    if let Some(text) = &args.star {
        return Ok(GraphSource::Star(parse_star(text)?));
    }
    if let Some(edges) = &args.graph {
        return Ok(GraphSource::EdgeList {
            edges: edges.clone(),
            coords: args.coords.clone(),
        });
    }
    if let Some(path) = &args.swc {
        return Ok(GraphSource::Swc(path.clone()));
    }
    Err("exactly one of --path, --cycle, --grid, --star, --graph, --swc is required".into())
}

fn config_of(args: &RunArgs) -> Result<RunConfig, String> {
    Ok(RunConfig {
        source: source_of(args)?,
        laplacian: match args.laplacian {
            LaplacianArg::Raw => LaplacianKind::Unnormalized,
            LaplacianArg::Sym => LaplacianKind::SymmetricNormalized,
        },
        pmf: match args.pmf {
            PmfArg::Squared => PmfKind::Squared,
            PmfArg::L1 => PmfKind::L1,
        },
        alpha: args.alpha,
        dim: parse_dim(&args.dim)?,
        lp_objective: match args.lp_objective {
            ObjectiveArg::Unit => LpObjective::Unit,
            ObjectiveArg::Length => LpObjective::Length,
        },
        out_dir: args.out.clone(),
        stop_after: args.stop_after.map(|s| match s {
            StageArg::Spectrum => Stage::Spectrum,
            StageArg::Distance => Stage::Distance,
            StageArg::Embedding => Stage::Embedding,
        }),
        verbose: args.verbose,
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };
    let Command::Run(args) = cli.command;
    let cfg = match config_of(&args) {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("error: usage: {message}");
            exit(1);
        }
    };
    match run_pipeline(&cfg) {
        Ok(outcome) => {
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            match outcome.manifest {
                Some(manifest) => println!(
                    "wrote {} (n0 = {}, max asymmetry {:.3e})",
                    cfg.out_dir.display(),
                    manifest.embedding.n0,
                    manifest.transport.max_asymmetry,
                ),
                None => println!("wrote partial outputs to {}", cfg.out_dir.display()),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code());
        }
    }
}
