//! Ramified transport between probability mass functions on a graph.
//!
//! For a pair of pmfs `p_i`, `p_j` the balance equation asks for nonnegative
//! arc flows `w` with net inflow `p_j - p_i` at every node; the transport
//! plan minimizing the chosen linear objective is found with a network
//! simplex (see [`simplex`](self)), so the optimal flows are always vertex
//! solutions: forest-supported, with no antiparallel arc pairs active.
//!
//! Plans are scored by the concave ramified cost
//! `M_alpha(w) = sum_{w(e) > 0} w(e)^alpha * length(e)` with `alpha` in
//! `[0, 1]` and the convention `0^alpha = 0`. Scoring all ordered pmf pairs
//! and averaging the two directions yields the distance matrix fed to the
//! embedding stage. On trees the unique cycle-free flow is available in
//! closed form ([`tree_flow_oracle`]), which doubles as an independent check
//! on the simplex.

mod simplex;

use crate::graph::{incidence_matrices, BidirectedIncidence, Graph};
use crate::pmf::Pmf;
use crate::util::{FLOW_FLOOR, TOL_BALANCE_RESIDUAL, TOL_FLOW_CLAMP};
use nalgebra::DMatrix;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use simplex::{solve_min_cost_flow, SimplexError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("pmf has {pmf_len} masses but the graph has {node_count} nodes")]
    SizeMismatch { pmf_len: usize, node_count: usize },
    #[error("balance equation is infeasible (unroutable mass {imbalance:.3e})")]
    Infeasible { imbalance: f64 },
    #[error("solver failed: {detail}")]
    Numeric { detail: String },
    #[error("alpha must lie in [0, 1], got {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("graph is not a tree")]
    NotATree,
    #[error("distance matrix needs at least 2 pmfs, got {got}")]
    TooFewPmfs { got: usize },
    #[error("transport pair ({i}, {j}) failed: {source}")]
    PairFailed {
        i: usize,
        j: usize,
        #[source]
        source: Box<TransportError>,
    },
}

/// Which per-arc costs the balance LP minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpObjective {
    /// Unit costs: the objective is the total flow `||w||_1`.
    #[default]
    Unit,
    /// Edge lengths as costs: the objective is length-weighted flow.
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    /// Simplex pivots performed (0 for closed-form tree flows).
    pub iterations: usize,
    /// Balance residual `||Q w - (p_j - p_i)||_inf` of the returned flows.
    pub residual: f64,
}

/// An optimal solution of the balance equation for one ordered pmf pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    flows: Vec<f64>,
    objective_l1: f64,
    cost_alpha: Option<f64>,
    stats: SolverStats,
}

impl TransportPlan {
    /// Arc flows, indexed like the incidence columns (first all forward
    /// arcs, then all backward arcs).
    pub fn flows(&self) -> &[f64] {
        &self.flows
    }

    pub fn flow(&self, arc: usize) -> f64 {
        self.flows[arc]
    }

    /// Total transported mass `sum_k w_k`.
    pub fn objective_l1(&self) -> f64 {
        self.objective_l1
    }

    /// Ramified cost, if this plan has been scored.
    pub fn cost_alpha(&self) -> Option<f64> {
        self.cost_alpha
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }
}

fn check_pair(
    inc: &BidirectedIncidence,
    p_i: &Pmf,
    p_j: &Pmf,
) -> Result<(), TransportError> {
    for p in [p_i, p_j] {
        if p.len() != inc.node_count() {
            return Err(TransportError::SizeMismatch {
                pmf_len: p.len(),
                node_count: inc.node_count(),
            });
        }
    }
    Ok(())
}

fn finish_plan(
    inc: &BidirectedIncidence,
    demand: &[f64],
    mut flows: Vec<f64>,
    iterations: usize,
) -> Result<TransportPlan, TransportError> {
    for w in &mut flows {
        if *w < 0.0 {
            if *w < -TOL_FLOW_CLAMP {
                return Err(TransportError::Numeric {
                    detail: format!("flow {w} below the clamp tolerance"),
                });
            }
            *w = 0.0;
        }
    }
    let inflow = inc.apply(&flows);
    let residual = inflow
        .iter()
        .zip(demand)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    if residual > TOL_BALANCE_RESIDUAL {
        return Err(TransportError::Numeric {
            detail: format!("balance residual {residual:.3e} exceeds tolerance"),
        });
    }
    Ok(TransportPlan {
        objective_l1: flows.iter().sum(),
        flows,
        cost_alpha: None,
        stats: SolverStats {
            iterations,
            residual,
        },
    })
}

/// Solves the balance equation `Q w = p_j - p_i`, `w >= 0` for the plan that
/// minimizes total flow (the default [`LpObjective::Unit`]).
pub fn solve_balance_lp(
    inc: &BidirectedIncidence,
    p_i: &Pmf,
    p_j: &Pmf,
) -> Result<TransportPlan, TransportError> {
    solve_balance_lp_with(inc, p_i, p_j, LpObjective::Unit)
}

/// Solves the balance equation under the chosen arc-cost objective.
///
/// # Errors
///
/// Fails when pmf sizes do not match the graph, when mass must cross between
/// disconnected components, or when the solver cannot reach the balance
/// residual tolerance.
pub fn solve_balance_lp_with(
    inc: &BidirectedIncidence,
    p_i: &Pmf,
    p_j: &Pmf,
    objective: LpObjective,
) -> Result<TransportPlan, TransportError> {
    check_pair(inc, p_i, p_j)?;
    let demand = p_j.sub(p_i);
    let arcs: Vec<(usize, usize)> = (0..inc.arc_count()).map(|k| inc.arc(k)).collect();
    let costs: Vec<f64> = match objective {
        LpObjective::Unit => vec![1.0; inc.arc_count()],
        LpObjective::Length => (0..inc.arc_count()).map(|k| inc.arc_length(k)).collect(),
    };
    let outcome =
        solve_min_cost_flow(inc.node_count(), &arcs, &costs, &demand).map_err(|e| match e {
            SimplexError::Infeasible { imbalance } => TransportError::Infeasible { imbalance },
            SimplexError::Numeric { detail } => TransportError::Numeric { detail },
        })?;
    finish_plan(inc, &demand, outcome.flows, outcome.iterations)
}

/// Ramified transport cost `M_alpha = sum flow^alpha * length` over arcs with
/// flow above the floor `1e-9`; `edge_lengths` holds one length per
/// undirected edge.
///
/// # Errors
///
/// `alpha` must lie in `[0, 1]`.
pub fn transport_cost(
    plan: &TransportPlan,
    edge_lengths: &[f64],
    alpha: f64,
) -> Result<f64, TransportError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TransportError::InvalidAlpha { alpha });
    }
    assert_eq!(plan.flows.len(), 2 * edge_lengths.len());
    let mut cost = 0.0;
    for (k, &w) in plan.flows.iter().enumerate() {
        if w > FLOW_FLOOR {
            cost += w.powf(alpha) * edge_lengths[k % edge_lengths.len()];
        }
    }
    Ok(cost)
}

/// The unique cycle-free flow on a tree, computed from subtree mass
/// surpluses: cutting an edge splits the tree in two, and the edge must
/// carry exactly the imbalance of either side.
///
/// # Errors
///
/// The graph must be a tree and the pmfs must match its node count.
pub fn tree_flow_oracle(
    g: &Graph,
    p_i: &Pmf,
    p_j: &Pmf,
) -> Result<TransportPlan, TransportError> {
    if !g.is_tree() {
        return Err(TransportError::NotATree);
    }
    let inc = incidence_matrices(g);
    check_pair(&inc, p_i, p_j)?;
    let demand = p_j.sub(p_i);
    let n = g.node_count();
    let m = g.edge_count();

    let adj = g.adjacency();
    let mut parent_edge = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &(y, edge) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent_edge[y] = edge;
                queue.push_back(y);
            }
        }
    }

    // Accumulate subtree demand bottom-up; each node then knows the net mass
    // its parent edge must deliver into its subtree.
    let mut subtree = demand.clone();
    let mut flows = vec![0.0; 2 * m];
    for &x in order.iter().rev().take(n - 1) {
        let edge = parent_edge[x];
        let e = &g.edges()[edge];
        let surplus = subtree[x];
        let toward_child_is_forward = e.v == x;
        if surplus >= 0.0 {
            flows[if toward_child_is_forward { edge } else { edge + m }] = surplus;
        } else {
            flows[if toward_child_is_forward { edge + m } else { edge }] = -surplus;
        }
        let other = if e.v == x { e.u } else { e.v };
        subtree[other] += surplus;
    }

    finish_plan(&inc, &demand, flows, 0)
}

/// Per-pair diagnostics recorded while assembling a distance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub i: usize,
    pub j: usize,
    pub iterations: usize,
    pub residual: f64,
    pub objective_l1: f64,
}

/// Symmetrized matrix of ramified transport costs between pmfs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: DMatrix<f64>,
    alpha: f64,
    max_asymmetry: f64,
    pair_stats: Vec<PairStats>,
}

impl DistanceMatrix {
    pub fn n_vectors(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest `|D_ij - D_ji|` observed before symmetrization.
    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    pub fn pair_stats(&self) -> &[PairStats] {
        &self.pair_stats
    }
}

fn solve_pair(
    inc: &BidirectedIncidence,
    pmfs: &[Pmf],
    alpha: f64,
    objective: LpObjective,
    lengths: &[f64],
    (i, j): (usize, usize),
) -> Result<(f64, PairStats), TransportError> {
    let wrap = |source: TransportError| TransportError::PairFailed {
        i,
        j,
        source: Box::new(source),
    };
    let plan = solve_balance_lp_with(inc, &pmfs[i], &pmfs[j], objective).map_err(wrap)?;
    let cost = transport_cost(&plan, lengths, alpha).map_err(wrap)?;
    Ok((
        cost,
        PairStats {
            i,
            j,
            iterations: plan.stats.iterations,
            residual: plan.stats.residual,
            objective_l1: plan.objective_l1,
        },
    ))
}

fn assemble(
    outcomes: Vec<(f64, PairStats)>,
    pairs: &[(usize, usize)],
    n_vectors: usize,
    alpha: f64,
) -> DistanceMatrix {
    let mut raw = DMatrix::zeros(n_vectors, n_vectors);
    let mut pair_stats = Vec::with_capacity(outcomes.len());
    for (&(i, j), (cost, stats)) in pairs.iter().zip(outcomes) {
        raw[(i, j)] = cost;
        pair_stats.push(stats);
    }
    let mut max_asymmetry = 0.0_f64;
    let mut values = DMatrix::zeros(n_vectors, n_vectors);
    for i in 0..n_vectors {
        for j in (i + 1)..n_vectors {
            max_asymmetry = max_asymmetry.max((raw[(i, j)] - raw[(j, i)]).abs());
            let d = 0.5 * (raw[(i, j)] + raw[(j, i)]);
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    DistanceMatrix {
        values,
        alpha,
        max_asymmetry,
        pair_stats,
    }
}

fn ordered_pairs(n_vectors: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_vectors * (n_vectors - 1));
    for i in 0..n_vectors {
        for j in 0..n_vectors {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn validate_matrix_inputs(
    inc: &BidirectedIncidence,
    pmfs: &[Pmf],
    alpha: f64,
) -> Result<(), TransportError> {
    if pmfs.len() < 2 {
        return Err(TransportError::TooFewPmfs { got: pmfs.len() });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TransportError::InvalidAlpha { alpha });
    }
    for p in pmfs {
        if p.len() != inc.node_count() {
            return Err(TransportError::SizeMismatch {
                pmf_len: p.len(),
                node_count: inc.node_count(),
            });
        }
    }
    Ok(())
}

/// Distance matrix over all ordered pmf pairs: `D_ij` is the ramified cost
/// of transporting `p_i` into `p_j`, averaged with the reverse direction.
///
/// With the `parallel` feature the pairs are solved on a thread pool; the
/// result is identical to the sequential assembly because every pair is an
/// independent deterministic solve written back by index.
pub fn distance_matrix(
    inc: &BidirectedIncidence,
    pmfs: &[Pmf],
    alpha: f64,
    objective: LpObjective,
) -> Result<DistanceMatrix, TransportError> {
    validate_matrix_inputs(inc, pmfs, alpha)?;
    let lengths: Vec<f64> = (0..inc.edge_count()).map(|k| inc.arc_length(k)).collect();
    let pairs = ordered_pairs(pmfs.len());

    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, PairStats), TransportError>> = pairs
        .par_iter()
        .map(|&pair| solve_pair(inc, pmfs, alpha, objective, &lengths, pair))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, PairStats), TransportError>> = pairs
        .iter()
        .map(|&pair| solve_pair(inc, pmfs, alpha, objective, &lengths, pair))
        .collect();

    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(outcomes, &pairs, pmfs.len(), alpha))
}

/// Sequential reference implementation of [`distance_matrix`]; always
/// available for comparison regardless of the `parallel` feature.
pub fn distance_matrix_serial(
    inc: &BidirectedIncidence,
    pmfs: &[Pmf],
    alpha: f64,
    objective: LpObjective,
) -> Result<DistanceMatrix, TransportError> {
    validate_matrix_inputs(inc, pmfs, alpha)?;
    let lengths: Vec<f64> = (0..inc.edge_count()).map(|k| inc.arc_length(k)).collect();
    let pairs = ordered_pairs(pmfs.len());
    let outcomes = pairs
        .iter()
        .map(|&pair| solve_pair(inc, pmfs, alpha, objective, &lengths, pair))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(outcomes, &pairs, pmfs.len(), alpha))
}
