//! End-to-end orchestration: build a graph, decompose its Laplacian, convert
//! eigenvectors to pmfs, solve the pairwise transport problems, embed the
//! distance matrix, and export everything as CSV/SVG/JSON artifacts.
//!
//! A full run writes, in order: `spectrum.csv`, `eigenvectors.csv`,
//! `distance.csv`, `embedding.csv`, `embedding.svg`, `manifest.json`.
//! Stopping early with [`Stage`] produces a prefix of that list, so partial
//! runs stay byte-compatible with full ones. All numbers are printed with 17
//! significant digits and parse back to the identical `f64`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{
    choose_dim, classical_mds, gram_eigenvalues, reconstruction_check, Embedding, EmbeddingError,
};
use crate::graph::{
    build_cycle, build_grid, build_path, build_starlike_tree, incidence_matrices, parse_edge_list,
    parse_swc, Graph,
};
use crate::pmf::{to_pmf_l1, to_pmf_squared, Pmf};
use crate::spectral::{eigendecompose, laplacian, phase_transition_split, LaplacianKind, Spectrum};
use crate::svg::{emit_svg_scatter, SvgError};
use crate::transport::{distance_matrix, DistanceMatrix, LpObjective, TransportError};
use crate::util::fmt_f64;

/// Where the graph comes from: a synthetic builder or an input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSource {
    Path(usize),
    Cycle(usize),
    Grid(usize, usize),
    Star(Vec<usize>),
    EdgeList {
        edges: PathBuf,
        coords: Option<PathBuf>,
    },
    Swc(PathBuf),
}

impl GraphSource {
    fn describe(&self) -> String {
        match self {
            GraphSource::Path(n) => format!("path {n}"),
            GraphSource::Cycle(n) => format!("cycle {n}"),
            GraphSource::Grid(m, n) => format!("grid {m}x{n}"),
            GraphSource::Star(lengths) => {
                let parts: Vec<String> = lengths.iter().map(|l| l.to_string()).collect();
                format!("star {}", parts.join(","))
            }
            GraphSource::EdgeList { edges, coords } => match coords {
                Some(c) => format!("edge-list {} coords {}", edges.display(), c.display()),
                None => format!("edge-list {}", edges.display()),
            },
            GraphSource::Swc(path) => format!("swc {}", path.display()),
        }
    }
}

/// Embedding dimension: pick by Gram-spectrum gaps or force a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimChoice {
    Auto,
    Fixed(usize),
}

/// How eigenvectors become pmfs: squared entries (default) or normalized
/// absolute values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PmfKind {
    #[default]
    Squared,
    L1,
}

/// Pipeline stages at which a run may stop, each leaving the outputs written
/// so far on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Spectrum,
    Distance,
    Embedding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: GraphSource,
    pub laplacian: LaplacianKind,
    pub pmf: PmfKind,
    pub alpha: f64,
    pub dim: DimChoice,
    pub lp_objective: LpObjective,
    pub out_dir: PathBuf,
    pub stop_after: Option<Stage>,
    pub verbose: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Invalid configuration (bad alpha, impossible dimension, ...).
    #[error("usage: {0}")]
    Usage(String),
    /// The graph could not be built, parsed, or is disconnected.
    #[error("graph: {0}")]
    Graph(String),
    /// Spectral, transport, or embedding computation failed.
    #[error("numeric: {0}")]
    Numeric(String),
    /// Reading inputs or writing outputs failed.
    #[error("io: {0}")]
    Io(String),
}

impl PipelineError {
    /// Process exit code for the CLI: 1 usage, 2 bad graph, 3 numeric, 4 io.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 1,
            PipelineError::Graph(_) => 2,
            PipelineError::Numeric(_) => 3,
            PipelineError::Io(_) => 4,
        }
    }
}

/// Configuration echo stored in the manifest, in CLI vocabulary.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub source: String,
    pub laplacian: String,
    pub pmf: String,
    pub alpha: f64,
    pub dim: String,
    pub lp_objective: String,
    pub out_dir: String,
    pub stop_after: String,
    pub verbose: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Index of the first eigenvalue at or above the localization threshold
    /// 4, if any.
    pub phase_transition_index: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairStatsEcho {
    pub i: usize,
    pub j: usize,
    pub iterations: usize,
    pub residual: f64,
    pub objective_l1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportSummary {
    pub alpha: f64,
    pub max_asymmetry: f64,
    /// Per-pair solver statistics, recorded only on verbose runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairStatsEcho>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingSummary {
    pub gram_eigenvalues: Vec<f64>,
    pub n0: usize,
    /// True when no Gram gap ratio exceeded 2 and the dimension fell back to
    /// the default of 2.
    pub dim_fallback: bool,
    pub stress: f64,
}

/// Wall-clock seconds per stage; the only manifest fields expected to vary
/// between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub spectrum_s: f64,
    pub transport_s: f64,
    pub embedding_s: f64,
    pub export_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: ConfigEcho,
    pub graph: GraphSummary,
    pub spectrum: SpectrumSummary,
    pub transport: TransportSummary,
    pub embedding: EmbeddingSummary,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

/// What a run produced: the manifest on full runs (`None` when stopped
/// early) plus any warnings, which the caller is expected to surface.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Option<RunManifest>,
    pub warnings: Vec<String>,
}

fn read_input(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path)
        .map_err(|e| PipelineError::Io(format!("failed to read {}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents)
        .map_err(|e| PipelineError::Io(format!("failed to write {}: {e}", path.display())))
}

fn build_graph(source: &GraphSource) -> Result<Graph, PipelineError> {
    let graph_err = |e: &dyn std::fmt::Display| PipelineError::Graph(e.to_string());
    match source {
        GraphSource::Path(n) => build_path(*n).map_err(|e| graph_err(&e)),
        GraphSource::Cycle(n) => build_cycle(*n).map_err(|e| graph_err(&e)),
        GraphSource::Grid(m, n) => build_grid(*m, *n).map_err(|e| graph_err(&e)),
        GraphSource::Star(lengths) => build_starlike_tree(lengths).map_err(|e| graph_err(&e)),
        GraphSource::EdgeList { edges, coords } => {
            let edge_text = read_input(edges)?;
            let coord_text = match coords {
                Some(path) => Some(read_input(path)?),
                None => None,
            };
            parse_edge_list(&edge_text, coord_text.as_deref()).map_err(|e| graph_err(&e))
        }
        GraphSource::Swc(path) => parse_swc(&read_input(path)?).map_err(|e| graph_err(&e)),
    }
}

fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("k,lambda\n");
    for (k, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        out.push_str(&format!("{k},{}\n", fmt_f64(lambda)));
    }
    out
}

fn eigenvectors_csv(spectrum: &Spectrum) -> String {
    let n = spectrum.len();
    let mut out = String::new();
    for x in 0..n {
        let row: Vec<String> = (0..n).map(|k| fmt_f64(spectrum.eigenvector(k)[x])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn distance_csv(d: &DistanceMatrix) -> String {
    let n = d.values().nrows();
    let mut out = String::from("index");
    for j in 0..n {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&i.to_string());
        for j in 0..n {
            out.push_str(&format!(",{}", fmt_f64(d.values()[(i, j)])));
        }
        out.push('\n');
    }
    out
}

fn embedding_csv(emb: &Embedding, spectrum: &Spectrum) -> String {
    let (n, n0) = (emb.points().nrows(), emb.points().ncols());
    let mut out = String::from("k,lambda");
    for c in 0..n0 {
        out.push_str(&format!(",x{c}"));
    }
    out.push('\n');
    for k in 0..n {
        out.push_str(&format!("{k},{}", fmt_f64(spectrum.eigenvalue(k))));
        for c in 0..n0 {
            out.push_str(&format!(",{}", fmt_f64(emb.points()[(k, c)])));
        }
        out.push('\n');
    }
    out
}

fn echo_config(cfg: &RunConfig) -> ConfigEcho {
    ConfigEcho {
        source: cfg.source.describe(),
        laplacian: match cfg.laplacian {
            LaplacianKind::Unnormalized => "raw".into(),
            LaplacianKind::SymmetricNormalized => "sym".into(),
        },
        pmf: match cfg.pmf {
            PmfKind::Squared => "squared".into(),
            PmfKind::L1 => "l1".into(),
        },
        alpha: cfg.alpha,
        dim: match cfg.dim {
            DimChoice::Auto => "auto".into(),
            DimChoice::Fixed(d) => d.to_string(),
        },
        lp_objective: match cfg.lp_objective {
            LpObjective::Unit => "unit".into(),
            LpObjective::Length => "length".into(),
        },
        out_dir: cfg.out_dir.display().to_string(),
        stop_after: match cfg.stop_after {
            None => "none".into(),
            Some(Stage::Spectrum) => "spectrum".into(),
            Some(Stage::Distance) => "distance".into(),
            Some(Stage::Embedding) => "embedding".into(),
        },
        verbose: cfg.verbose,
    }
}

/// Runs the whole pipeline per `cfg`, writing artifacts into
/// `cfg.out_dir`. Stops early (without a manifest) when `stop_after` is set.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome, PipelineError> {
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return Err(PipelineError::Usage(format!(
            "alpha must lie in [0, 1], got {}",
            cfg.alpha
        )));
    }
    let mut warnings = Vec::new();

    let g = build_graph(&cfg.source)?;
    if !g.is_connected() {
        return Err(PipelineError::Graph(
            "graph is disconnected; the pipeline needs one connected component".into(),
        ));
    }
    let n = g.node_count();
    if let DimChoice::Fixed(d) = cfg.dim {
        if d == 0 || d > n.saturating_sub(1) {
            return Err(PipelineError::Usage(format!(
                "dimension {d} is outside the valid range 1..={} for {n} eigenvectors",
                n - 1
            )));
        }
    }
    fs::create_dir_all(&cfg.out_dir).map_err(|e| {
        PipelineError::Io(format!("failed to create {}: {e}", cfg.out_dir.display()))
    })?;

    // Stage 1: spectrum.
    let t_spectrum = Instant::now();
    let l = laplacian(&g, cfg.laplacian);
    let spectrum = eigendecompose(l.as_view(), cfg.laplacian)
        .map_err(|e| PipelineError::Numeric(e.to_string()))?;
    let spectrum_s = t_spectrum.elapsed().as_secs_f64();
    write_output(&cfg.out_dir.join("spectrum.csv"), &spectrum_csv(&spectrum))?;
    write_output(
        &cfg.out_dir.join("eigenvectors.csv"),
        &eigenvectors_csv(&spectrum),
    )?;
    if cfg.stop_after == Some(Stage::Spectrum) {
        return Ok(RunOutcome {
            manifest: None,
            warnings,
        });
    }

    // Stage 2: pmfs and the pairwise transport distances.
    let t_transport = Instant::now();
    let pmfs: Vec<Pmf> = (0..spectrum.len())
        .map(|k| match cfg.pmf {
            PmfKind::Squared => to_pmf_squared(spectrum.eigenvector(k)),
            PmfKind::L1 => to_pmf_l1(spectrum.eigenvector(k)),
        })
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::Numeric(e.to_string()))?;
    let inc = incidence_matrices(&g);
    let d = distance_matrix(&inc, &pmfs, cfg.alpha, cfg.lp_objective).map_err(|e| match e {
        TransportError::TooFewPmfs { .. } => PipelineError::Graph(e.to_string()),
        other => PipelineError::Numeric(other.to_string()),
    })?;
    let transport_s = t_transport.elapsed().as_secs_f64();
    write_output(&cfg.out_dir.join("distance.csv"), &distance_csv(&d))?;
    if d.values().amax() == 0.0 {
        warnings.push(
            "all pairwise transport distances are zero (the pmfs coincide); \
             the embedding collapses to the origin"
                .into(),
        );
    }
    if cfg.stop_after == Some(Stage::Distance) {
        return Ok(RunOutcome {
            manifest: None,
            warnings,
        });
    }

    // Stage 3: embedding.
    let t_embedding = Instant::now();
    let gram = gram_eigenvalues(d.values()).map_err(|e| PipelineError::Numeric(e.to_string()))?;
    let (n0, dim_fallback) = match cfg.dim {
        DimChoice::Fixed(d) => (d, false),
        DimChoice::Auto => {
            let selection = choose_dim(&gram, 3);
            if selection.fallback {
                warnings.push(format!(
                    "no Gram eigenvalue gap ratio exceeded 2; falling back to n0 = {}",
                    selection.n0.min(n - 1)
                ));
            }
            (selection.n0.min(n - 1), selection.fallback)
        }
    };
    let emb = classical_mds(d.values(), n0).map_err(|e| match e {
        EmbeddingError::DimensionOutOfRange { .. } => PipelineError::Usage(e.to_string()),
        other => PipelineError::Numeric(other.to_string()),
    })?;
    let stress = reconstruction_check(&emb, d.values());
    let embedding_s = t_embedding.elapsed().as_secs_f64();
    write_output(
        &cfg.out_dir.join("embedding.csv"),
        &embedding_csv(&emb, &spectrum),
    )?;
    if cfg.stop_after == Some(Stage::Embedding) {
        return Ok(RunOutcome {
            manifest: None,
            warnings,
        });
    }

    // Stage 4: plot and manifest.
    let t_export = Instant::now();
    emit_svg_scatter(&emb, &spectrum, &cfg.out_dir.join("embedding.svg")).map_err(
        |e| match e {
            SvgError::UnsupportedDimension { .. } => PipelineError::Usage(e.to_string()),
            SvgError::Io { .. } => PipelineError::Io(e.to_string()),
            other => PipelineError::Numeric(other.to_string()),
        },
    )?;
    let split = phase_transition_split(&spectrum);
    let manifest = RunManifest {
        config: echo_config(cfg),
        graph: GraphSummary {
            nodes: n,
            edges: g.edges().len(),
        },
        spectrum: SpectrumSummary {
            lambda_min: spectrum.eigenvalue(0),
            lambda_max: spectrum.eigenvalue(spectrum.len() - 1),
            phase_transition_index: split.first_high(),
        },
        transport: TransportSummary {
            alpha: cfg.alpha,
            max_asymmetry: d.max_asymmetry(),
            pairs: cfg.verbose.then(|| {
                d.pair_stats()
                    .iter()
                    .map(|p| PairStatsEcho {
                        i: p.i,
                        j: p.j,
                        iterations: p.iterations,
                        residual: p.residual,
                        objective_l1: p.objective_l1,
                    })
                    .collect()
            }),
        },
        embedding: EmbeddingSummary {
            gram_eigenvalues: gram,
            n0,
            dim_fallback,
            stress,
        },
        warnings: warnings.clone(),
        timings: Timings {
            spectrum_s,
            transport_s,
            embedding_s,
            export_s: t_export.elapsed().as_secs_f64(),
        },
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| PipelineError::Io(format!("failed to serialize manifest: {e}")))?;
    write_output(&cfg.out_dir.join("manifest.json"), &format!("{json}\n"))?;

    Ok(RunOutcome {
        manifest: Some(manifest),
        warnings,
    })
}
