//! Text parsers: whitespace-separated edge lists (with an optional
//! coordinates companion) and SWC neuron morphology files.

use super::{Graph, GraphError};
use thiserror::Error;

/// Errors produced while parsing graph files.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateId { line: usize, id: i64 },
    #[error("line {line}: parent id {id} does not appear in the file")]
    MissingParent { line: usize, id: i64 },
    #[error("morphology is not a tree: {detail}")]
    NotATree { detail: String },
    #[error("node {node} has no coordinates")]
    MissingCoords { node: usize },
    #[error("file contains no edges or nodes")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn bad_line(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Line {
        line,
        message: message.into(),
    }
}

/// Strips `#` comments and yields `(1-based line number, tokens)` for
/// non-empty lines.
fn tokenized_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            None
        } else {
            Some((i + 1, tokens))
        }
    })
}

fn parse_node(token: &str, line: usize) -> Result<usize, ParseError> {
    token
        .parse::<usize>()
        .map_err(|_| bad_line(line, format!("expected a node index, got {token:?}")))
}

fn parse_float(token: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    token
        .parse::<f64>()
        .map_err(|_| bad_line(line, format!("expected {what}, got {token:?}")))
}

/// Parses an edge list with lines `u v [length]` and `#` comments. When a
/// companion coordinates text (`id x y [z]` lines) is supplied, every node
/// must receive coordinates and edges without an explicit length get the
/// Euclidean distance of their endpoints; otherwise lengths default to 1.
///
/// Disconnected graphs parse successfully; connectivity is a pipeline
/// concern, not a format concern.
pub fn parse_edge_list(text: &str, coords_text: Option<&str>) -> Result<Graph, ParseError> {
    let mut raw_edges: Vec<(usize, usize, Option<f64>)> = Vec::new();
    let mut max_node = 0usize;
    for (line, tokens) in tokenized_lines(text) {
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(bad_line(
                line,
                format!("expected `u v [length]`, got {} fields", tokens.len()),
            ));
        }
        let u = parse_node(tokens[0], line)?;
        let v = parse_node(tokens[1], line)?;
        let length = match tokens.get(2) {
            Some(t) => Some(parse_float(t, line, "an edge length")?),
            None => None,
        };
        max_node = max_node.max(u).max(v);
        raw_edges.push((u, v, length));
    }

    let coords = match coords_text {
        Some(ct) => {
            let mut entries: Vec<(usize, [f64; 3])> = Vec::new();
            let mut dim: Option<usize> = None;
            for (line, tokens) in tokenized_lines(ct) {
                if tokens.len() < 3 || tokens.len() > 4 {
                    return Err(bad_line(
                        line,
                        format!("expected `id x y [z]`, got {} fields", tokens.len()),
                    ));
                }
                match dim {
                    None => dim = Some(tokens.len()),
                    Some(d) if d != tokens.len() => {
                        return Err(bad_line(line, "mixed 2D and 3D coordinate rows"));
                    }
                    _ => {}
                }
                let id = parse_node(tokens[0], line)?;
                let x = parse_float(tokens[1], line, "a coordinate")?;
                let y = parse_float(tokens[2], line, "a coordinate")?;
                let z = match tokens.get(3) {
                    Some(t) => parse_float(t, line, "a coordinate")?,
                    None => 0.0,
                };
                if entries.iter().any(|(seen, _)| *seen == id) {
                    return Err(ParseError::DuplicateId {
                        line,
                        id: id as i64,
                    });
                }
                max_node = max_node.max(id);
                entries.push((id, [x, y, z]));
            }
            let mut coords = vec![None; max_node + 1];
            for (id, p) in entries {
                coords[id] = Some(p);
            }
            let coords: Vec<[f64; 3]> = coords
                .into_iter()
                .enumerate()
                .map(|(node, p)| p.ok_or(ParseError::MissingCoords { node }))
                .collect::<Result<_, _>>()?;
            Some(coords)
        }
        None => None,
    };

    if raw_edges.is_empty() && coords.is_none() {
        return Err(ParseError::Empty);
    }

    let node_count = max_node + 1;
    let edges: Vec<(usize, usize, f64)> = raw_edges
        .into_iter()
        .map(|(u, v, len)| {
            let length = len.unwrap_or_else(|| match &coords {
                Some(c) => euclidean(c[u], c[v]),
                None => 1.0,
            });
            (u, v, length)
        })
        .collect();
    Ok(Graph::new(node_count, edges, coords)?)
}

/// How SWC edges are assigned lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwcLengths {
    /// Euclidean distance between the child and parent sample coordinates.
    Euclidean,
    /// Every edge gets length 1.
    Unit,
}

/// Parses an SWC morphology with [`SwcLengths::Euclidean`] edge lengths.
pub fn parse_swc(text: &str) -> Result<Graph, ParseError> {
    parse_swc_with(text, SwcLengths::Euclidean)
}

/// Parses an SWC morphology: one sample per line with seven columns
/// `id type x y z radius parent`, `#` comments, parent `-1` for the root.
/// Sample ids are remapped to contiguous 0-based ids in file order. The
/// result must be a tree: exactly one root, every parent id defined, no
/// cycles.
pub fn parse_swc_with(text: &str, lengths: SwcLengths) -> Result<Graph, ParseError> {
    struct Sample {
        line: usize,
        pos: [f64; 3],
        parent: i64,
    }

    let mut ids: Vec<i64> = Vec::new();
    let mut samples: Vec<Sample> = Vec::new();
    for (line, tokens) in tokenized_lines(text) {
        if tokens.len() != 7 {
            return Err(bad_line(
                line,
                format!("expected 7 SWC columns, got {}", tokens.len()),
            ));
        }
        let id = tokens[0]
            .parse::<i64>()
            .ok()
            .filter(|&id| id > 0)
            .ok_or_else(|| bad_line(line, format!("expected a positive id, got {:?}", tokens[0])))?;
        tokens[1]
            .parse::<i64>()
            .map_err(|_| bad_line(line, format!("expected a type code, got {:?}", tokens[1])))?;
        let x = parse_float(tokens[2], line, "a coordinate")?;
        let y = parse_float(tokens[3], line, "a coordinate")?;
        let z = parse_float(tokens[4], line, "a coordinate")?;
        parse_float(tokens[5], line, "a radius")?;
        let parent = tokens[6]
            .parse::<i64>()
            .ok()
            .filter(|&p| p == -1 || p > 0)
            .ok_or_else(|| {
                bad_line(line, format!("expected a parent id or -1, got {:?}", tokens[6]))
            })?;
        if parent == id {
            return Err(bad_line(line, format!("sample {id} is its own parent")));
        }
        if ids.contains(&id) {
            return Err(ParseError::DuplicateId { line, id });
        }
        ids.push(id);
        samples.push(Sample {
            line,
            pos: [x, y, z],
            parent,
        });
    }
    if samples.is_empty() {
        return Err(ParseError::Empty);
    }

    let index_of = |id: i64| ids.iter().position(|&seen| seen == id);
    let mut parents: Vec<Option<usize>> = Vec::with_capacity(samples.len());
    let mut roots = 0usize;
    for s in &samples {
        if s.parent == -1 {
            roots += 1;
            parents.push(None);
            continue;
        }
        let parent = index_of(s.parent).ok_or(ParseError::MissingParent {
            line: s.line,
            id: s.parent,
        })?;
        parents.push(Some(parent));
    }
    if roots != 1 {
        return Err(ParseError::NotATree {
            detail: format!("expected exactly one root sample, found {roots}"),
        });
    }

    // Walk every parent chain; re-entering a node of the chain in progress
    // means the parent links loop instead of reaching the root.
    let mut state = vec![0u8; samples.len()];
    for start in 0..samples.len() {
        let mut chain = Vec::new();
        let mut node = start;
        while state[node] == 0 {
            state[node] = 1;
            chain.push(node);
            match parents[node] {
                Some(p) => node = p,
                None => break,
            }
        }
        if state[node] == 1 && parents[node].is_some() {
            return Err(ParseError::NotATree {
                detail: "parent links contain a cycle".into(),
            });
        }
        for visited in chain {
            state[visited] = 2;
        }
    }

    let mut edges = Vec::new();
    for (child, parent) in parents.iter().enumerate() {
        let Some(parent) = *parent else { continue };
        let length = match lengths {
            SwcLengths::Euclidean => euclidean(samples[child].pos, samples[parent].pos),
            SwcLengths::Unit => 1.0,
        };
        edges.push((child, parent, length));
    }

    let coords: Vec<[f64; 3]> = samples.iter().map(|s| s.pos).collect();
    let graph = Graph::new(samples.len(), edges, Some(coords))?;
    if !graph.is_tree() {
        return Err(ParseError::NotATree {
            detail: "parent links contain a cycle".into(),
        });
    }
    Ok(graph)
}

fn euclidean(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_path, serialize_edge_list};
    use proptest::prelude::*;

    #[test]
    fn edge_list_with_comments_and_default_lengths() {
        let g = parse_edge_list("# a path\n0 1\n1 2 2.5 # long edge\n", None).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges()[0].length, 1.0);
        assert_eq!(g.edges()[1].length, 2.5);
    }

    #[test]
    fn edge_list_rejects_malformed_lines_with_line_numbers() {
        let err = parse_edge_list("0 1\nnope\n", None).unwrap_err();
        assert!(matches!(err, ParseError::Line { line: 2, .. }));
        let err = parse_edge_list("0 1 2 3\n", None).unwrap_err();
        assert!(matches!(err, ParseError::Line { line: 1, .. }));
        let err = parse_edge_list("0 0\n", None).unwrap_err();
        assert!(matches!(err, ParseError::Graph(GraphError::SelfLoop { node: 0 })));
    }

    #[test]
    fn edge_list_accepts_disconnected_graphs() {
        let g = parse_edge_list("0 1\n2 3\n", None).unwrap();
        assert_eq!(g.node_count(), 4);
        assert!(!g.is_connected());
    }

    #[test]
    fn coords_fill_in_missing_lengths() {
        let g = parse_edge_list(
            "0 1\n1 2 9.0\n",
            Some("0 0 0\n1 3 4\n2 3 5\n"),
        )
        .unwrap();
        assert_eq!(g.edges()[0].length, 5.0);
        assert_eq!(g.edges()[1].length, 9.0);
        assert_eq!(g.coords().unwrap()[1], [3.0, 4.0, 0.0]);
    }

    #[test]
    fn coords_must_cover_every_node() {
        let err = parse_edge_list("0 1\n", Some("0 0 0\n")).unwrap_err();
        assert_eq!(err, ParseError::MissingCoords { node: 1 });
    }

    #[test]
    fn serialized_edges_parse_back_exactly() {
        let g = crate::graph::Graph::new(
            4,
            vec![(0, 1, 1.0 / 3.0), (1, 2, 2.0_f64.sqrt()), (2, 3, 1e-7)],
            None,
        )
        .unwrap();
        let reparsed = parse_edge_list(&serialize_edge_list(&g), None).unwrap();
        assert_eq!(reparsed.edges(), g.edges());
    }

    #[test]
    fn swc_two_samples_three_units_apart() {
        let g = parse_swc("1 1 0 0 0 1 -1\n2 3 0 3 0 1 1\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].length, 3.0);
        assert!(g.is_tree());
    }

    #[test]
    fn swc_ids_are_compacted_in_file_order() {
        let g = parse_swc(
            "# odd ids\n10 1 0 0 0 1 -1\n30 3 1 0 0 1 10\n20 3 2 0 0 1 30\n",
        )
        .unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn swc_unit_lengths_are_available() {
        let g = parse_swc_with("1 1 0 0 0 1 -1\n2 3 0 3 0 1 1\n", SwcLengths::Unit).unwrap();
        assert_eq!(g.edges()[0].length, 1.0);
    }

    #[test]
    fn swc_missing_parent_is_a_format_error() {
        let err = parse_swc("1 1 0 0 0 1 -1\n2 3 1 0 0 1 7\n").unwrap_err();
        assert_eq!(err, ParseError::MissingParent { line: 2, id: 7 });
    }

    #[test]
    fn swc_multiple_roots_are_rejected() {
        let err = parse_swc("1 1 0 0 0 1 -1\n2 3 1 0 0 1 -1\n").unwrap_err();
        assert!(matches!(err, ParseError::NotATree { .. }));
    }

    #[test]
    fn swc_parent_cycle_is_rejected() {
        let err = parse_swc(
            "1 1 0 0 0 1 -1\n2 3 1 0 0 1 3\n3 3 2 0 0 1 2\n",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::NotATree { .. }));
    }

    #[test]
    fn swc_malformed_line_reports_its_number() {
        let err = parse_swc("1 1 0 0 0 1 -1\n2 3 0 0 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Line { line: 2, .. }));
    }

    #[test]
    fn swc_coincident_samples_are_rejected() {
        let err = parse_swc("1 1 1 2 3 1 -1\n2 3 1 2 3 1 1\n").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Graph(GraphError::NonPositiveLength { .. })
        ));
    }

    proptest! {
        #[test]
        fn random_path_lengths_round_trip(lengths in prop::collection::vec(1e-6..1e6f64, 1..20)) {
            let n = lengths.len() + 1;
            let edges: Vec<_> = lengths
                .iter()
                .enumerate()
                .map(|(i, &len)| (i, i + 1, len))
                .collect();
            let g = crate::graph::Graph::new(n, edges, None).unwrap();
            let reparsed = parse_edge_list(&serialize_edge_list(&g), None).unwrap();
            prop_assert_eq!(reparsed.edges(), g.edges());
        }

        #[test]
        fn parsing_never_panics_on_arbitrary_text(text in "\\PC*") {
            let _ = parse_edge_list(&text, None);
            let _ = parse_swc(&text);
        }

        #[test]
        fn path_text_parses_to_path(n in 2usize..30) {
            let text: String = (0..n - 1).map(|i| format!("{} {}\n", i, i + 1)).collect();
            let g = parse_edge_list(&text, None).unwrap();
            let path = build_path(n).unwrap();
            prop_assert_eq!(g.edges(), path.edges());
        }
    }
}
