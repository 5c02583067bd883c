//! Network simplex for the uncapacitated minimum-cost flow problem
//! `min c . w  s.t.  (net inflow at node v) = demand[v],  w >= 0`.
//!
//! The solver maintains a spanning-tree basis, so every solution it returns
//! is a vertex of the feasible polytope: flows are supported on a forest and
//! non-basic arcs carry nothing beyond ratio-test rounding residue. Pivoting
//! follows Bland's rule (lowest arc index among eligible entering arcs,
//! lowest arc index among blocking leaving arcs, with blocking flows compared
//! up to a tie tolerance), which makes the run deterministic, free of
//! cycling, and insensitive to last-digit noise in the demands.
//!
//! Feasibility starts from one artificial arc per non-root node priced at a
//! big-M cost; arcs that still carry mass at optimality certify that the
//! demand cannot be routed (the graph is disconnected with imbalanced
//! components).

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimplexOutcome {
    /// Flow per input arc (artificial arcs stripped).
    pub flows: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SimplexError {
    /// Demand cannot be routed; `imbalance` is the mass stuck on artificial
    /// arcs.
    Infeasible { imbalance: f64 },
    /// Defensive guards: pivot budget exhausted or an unblocked cycle.
    Numeric { detail: String },
}

/// Reduced-cost threshold for entering arcs, in units of the scaled costs.
const TOL_REDUCED_COST: f64 = 1e-9;
/// Artificial flow above this value at optimality means infeasible.
const TOL_FEASIBLE: f64 = 1e-9;
/// Blocking flows within this distance of the minimum ratio count as tied,
/// so the leaving arc is picked by index instead of by rounding noise and
/// near-identical problems pivot identically.
const TOL_RATIO_TIE: f64 = 1e-11;

pub(crate) fn solve_min_cost_flow(
    node_count: usize,
    arcs: &[(usize, usize)],
    costs: &[f64],
    demand: &[f64],
) -> Result<SimplexOutcome, SimplexError> {
    assert_eq!(arcs.len(), costs.len());
    assert_eq!(demand.len(), node_count);
    let real_arcs = arcs.len();
    if node_count <= 1 {
        return Ok(SimplexOutcome {
            flows: vec![0.0; real_arcs],
            iterations: 0,
        });
    }

    // Scale costs into (0, 1] so reduced-cost tolerances are scale-free.
    let cost_scale = costs.iter().fold(0.0_f64, |acc, &c| acc.max(c)).max(1e-300);
    let big_m = 10.0 * (node_count as f64 + 1.0);

    let mut all_arcs: Vec<(usize, usize)> = arcs.to_vec();
    let mut all_costs: Vec<f64> = costs.iter().map(|&c| c / cost_scale).collect();
    let mut flow = vec![0.0; real_arcs];

    // Warm start: a BFS forest over the real arcs carries the unique forest
    // flow, and only extra component roots need a big-M artificial arc. The
    // forest edge under node v must be oriented to carry its subtree demand
    // nonnegatively; when that orientation does not exist among the arcs the
    // whole init falls back to one artificial arc per node.
    let mut node_arcs: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for (a, &(t, h)) in arcs.iter().enumerate() {
        node_arcs[t].push(a);
        if h != t {
            node_arcs[h].push(a);
        }
    }
    let mut visited = vec![false; node_count];
    let mut order = Vec::with_capacity(node_count);
    let mut bfs_parent = vec![usize::MAX; node_count];
    let mut discovery = vec![usize::MAX; node_count];
    let mut roots = Vec::new();
    for start in 0..node_count {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        roots.push(start);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &a in &node_arcs[x] {
                let (t, h) = arcs[a];
                let y = if t == x { h } else { t };
                if visited[y] {
                    continue;
                }
                visited[y] = true;
                bfs_parent[y] = x;
                discovery[y] = a;
                queue.push_back(y);
            }
        }
    }
    let mut by_ends = std::collections::HashMap::new();
    for (a, &ends) in arcs.iter().enumerate() {
        by_ends.entry(ends).or_insert(a);
    }
    let mut subtree = demand.to_vec();
    let mut basis = Some(Vec::with_capacity(node_count - 1));
    for &v in order.iter().rev() {
        let p = bfs_parent[v];
        if p == usize::MAX {
            continue;
        }
        let s = subtree[v];
        subtree[p] += s;
        let (want, mag) = if s >= 0.0 { ((p, v), s) } else { ((v, p), -s) };
        let chosen = if arcs[discovery[v]] == want {
            Some(discovery[v])
        } else {
            by_ends.get(&want).copied()
        };
        basis = match (basis, chosen) {
            (Some(mut b), Some(arc)) => {
                b.push((arc, mag));
                Some(b)
            }
            _ => None,
        };
    }

    let mut in_tree;
    match basis {
        Some(b) => {
            in_tree = vec![false; real_arcs + roots.len() - 1];
            for &(a, mag) in &b {
                in_tree[a] = true;
                flow[a] = mag;
            }
            for &r in &roots[1..] {
                let s = subtree[r];
                if s > 0.0 {
                    all_arcs.push((0, r));
                } else {
                    all_arcs.push((r, 0));
                }
                all_costs.push(big_m);
                flow.push(s.abs());
                in_tree[all_arcs.len() - 1] = true;
            }
        }
        None => {
            // Artificial arc for node v: oriented so its initial flow
            // |demand[v]| is nonnegative.
            in_tree = vec![false; real_arcs + node_count - 1];
            for v in 1..node_count {
                if demand[v] > 0.0 {
                    all_arcs.push((0, v));
                } else {
                    all_arcs.push((v, 0));
                }
                all_costs.push(big_m);
                flow.push(demand[v].abs());
                in_tree[real_arcs + v - 1] = true;
            }
        }
    }

    let arc_count = all_arcs.len();
    let mut tree_adj: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for a in 0..arc_count {
        if in_tree[a] {
            let (t, h) = all_arcs[a];
            tree_adj[t].push(a);
            tree_adj[h].push(a);
        }
    }

    let mut parent = vec![usize::MAX; node_count];
    let mut parent_arc = vec![usize::MAX; node_count];
    let mut depth = vec![0usize; node_count];
    let mut potential = vec![0.0f64; node_count];

    let rebuild = |tree_adj: &Vec<Vec<usize>>,
                   parent: &mut Vec<usize>,
                   parent_arc: &mut Vec<usize>,
                   depth: &mut Vec<usize>,
                   potential: &mut Vec<f64>,
                   all_arcs: &Vec<(usize, usize)>,
                   all_costs: &Vec<f64>| {
        parent[0] = usize::MAX;
        parent_arc[0] = usize::MAX;
        depth[0] = 0;
        potential[0] = 0.0;
        let mut seen = vec![false; node_count];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &a in &tree_adj[x] {
                let (t, h) = all_arcs[a];
                let y = if t == x { h } else { t };
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                parent[y] = x;
                parent_arc[y] = a;
                depth[y] = depth[x] + 1;
                // Tree arcs have zero reduced cost: c + pi[tail] - pi[head] = 0.
                potential[y] = if t == x {
                    potential[x] + all_costs[a]
                } else {
                    potential[x] - all_costs[a]
                };
                queue.push_back(y);
            }
        }
    };
    rebuild(
        &tree_adj,
        &mut parent,
        &mut parent_arc,
        &mut depth,
        &mut potential,
        &all_arcs,
        &all_costs,
    );

    let max_pivots = 1000 + 60 * arc_count;
    let mut iterations = 0usize;
    loop {
        // Bland's rule: the lowest-index candidate enters.
        let mut entering = None;
        for a in 0..arc_count {
            if in_tree[a] {
                continue;
            }
            let (t, h) = all_arcs[a];
            let reduced = all_costs[a] + potential[t] - potential[h];
            if reduced < -TOL_REDUCED_COST {
                entering = Some(a);
                break;
            }
        }
        let Some(entering) = entering else { break };
        iterations += 1;
        if iterations > max_pivots {
            return Err(SimplexError::Numeric {
                detail: format!("pivot budget exhausted after {iterations} pivots"),
            });
        }

        // The entering arc closes one cycle with the tree path between its
        // endpoints. Pushing along the arc direction raises flow on cycle
        // arcs traversed forwards and drains arcs traversed backwards.
        let (tail, head) = all_arcs[entering];
        let mut up_from_head = Vec::new(); // traversed child -> parent
        let mut down_to_tail = Vec::new(); // traversed parent -> child
        let (mut x, mut y) = (head, tail);
        while depth[x] > depth[y] {
            up_from_head.push(parent_arc[x]);
            x = parent[x];
        }
        while depth[y] > depth[x] {
            down_to_tail.push(parent_arc[y]);
            y = parent[y];
        }
        while x != y {
            up_from_head.push(parent_arc[x]);
            x = parent[x];
            down_to_tail.push(parent_arc[y]);
            y = parent[y];
        }

        // An arc pointing child -> parent lies along the cycle on the head
        // side and against it on the tail side. Arcs traversed against the
        // push direction block it at their current flow.
        let mut blockers: Vec<usize> = Vec::new();
        let mut x = head;
        for &arc in &up_from_head {
            let points_up = all_arcs[arc].0 == x;
            if !points_up {
                blockers.push(arc);
            }
            x = parent[x];
        }
        let mut y = tail;
        for &arc in &down_to_tail {
            let points_up = all_arcs[arc].0 == y;
            if points_up {
                blockers.push(arc);
            }
            y = parent[y];
        }
        if blockers.is_empty() {
            return Err(SimplexError::Numeric {
                detail: "entering arc closed an unblocked negative cycle".into(),
            });
        }
        // Degenerate ties can leave 1-ulp negative flows on tree arcs; a
        // negative push would amplify them.
        let theta = blockers
            .iter()
            .fold(f64::INFINITY, |acc, &arc| acc.min(flow[arc]))
            .max(0.0);
        let leaving_arc = blockers
            .iter()
            .copied()
            .filter(|&arc| flow[arc] <= theta + TOL_RATIO_TIE)
            .min()
            .expect("at least the minimum-flow blocker is within the tie band");

        flow[entering] += theta;
        let mut x = head;
        for &arc in &up_from_head {
            let points_up = all_arcs[arc].0 == x;
            if points_up {
                flow[arc] += theta;
            } else {
                flow[arc] -= theta;
            }
            x = parent[x];
        }
        let mut y = tail;
        for &arc in &down_to_tail {
            let points_up = all_arcs[arc].0 == y;
            if points_up {
                flow[arc] -= theta;
            } else {
                flow[arc] += theta;
            }
            y = parent[y];
        }

        in_tree[entering] = true;
        in_tree[leaving_arc] = false;
        let (et, eh) = all_arcs[entering];
        tree_adj[et].push(entering);
        tree_adj[eh].push(entering);
        let (lt, lh) = all_arcs[leaving_arc];
        tree_adj[lt].retain(|&a| a != leaving_arc);
        tree_adj[lh].retain(|&a| a != leaving_arc);
        rebuild(
            &tree_adj,
            &mut parent,
            &mut parent_arc,
            &mut depth,
            &mut potential,
            &all_arcs,
            &all_costs,
        );
    }

    let imbalance: f64 = flow[real_arcs..].iter().sum();
    if imbalance > TOL_FEASIBLE {
        return Err(SimplexError::Infeasible { imbalance });
    }

    flow.truncate(real_arcs);
    Ok(SimplexOutcome {
        flows: flow,
        iterations,
    })
}
