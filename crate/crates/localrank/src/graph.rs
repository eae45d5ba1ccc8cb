//! Immutable directed graphs over dense node ids.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// An arc-list graph with out- and in-adjacency indexes built at
/// construction. Node ids are dense in `0..node_count`; self-loops are
/// allowed, duplicate arcs are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    node_count: usize,
    arcs: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
}

impl DirectedGraph {
    pub fn new(node_count: usize, arcs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut sorted: Vec<(NodeId, NodeId)> = arcs.into_iter().collect();
        for &(s, t) in &sorted {
            for id in [s, t] {
                if id >= node_count {
                    return Err(Error::InvalidNode { id, node_count });
                }
            }
        }
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateArc { src: w[0].0, dst: w[0].1 });
            }
        }
        let mut out_adj = vec![Vec::new(); node_count];
        let mut in_adj = vec![Vec::new(); node_count];
        for &(s, t) in &sorted {
            out_adj[s].push(t);
            in_adj[t].push(s);
        }
        for l in in_adj.iter_mut() {
            l.sort_unstable();
        }
        Ok(Self { node_count, arcs: sorted, out_adj, in_adj })
    }

    pub fn empty(node_count: usize) -> Self {
        Self::new(node_count, []).expect("no arcs to validate")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs in ascending (src, dst) order.
    pub fn arcs(&self) -> &[(NodeId, NodeId)] {
        &self.arcs
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.node_count
    }

    pub fn check_node(&self, id: NodeId) -> Result<()> {
        if id >= self.node_count {
            return Err(Error::InvalidNode { id, node_count: self.node_count });
        }
        Ok(())
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v].len()
    }

    pub fn is_dangling(&self, v: NodeId) -> bool {
        self.out_adj[v].is_empty()
    }

    pub fn has_arc(&self, src: NodeId, dst: NodeId) -> bool {
        self.out_adj[src].binary_search(&dst).is_ok()
    }

    pub fn dangling_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| self.is_dangling(v)).collect()
    }

    /// Rebuilds the graph with node `old` renamed to `perm[old]`.
    /// `perm` must be a permutation of `0..node_count`.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Self> {
        if perm.len() != self.node_count {
            return Err(Error::InvalidParameter(format!(
                "relabel permutation has length {} for a graph of {} nodes",
                perm.len(),
                self.node_count
            )));
        }
        let mut seen = vec![false; self.node_count];
        for &p in perm {
            if p >= self.node_count || seen[p] {
                return Err(Error::InvalidParameter("relabel map is not a permutation".into()));
            }
            seen[p] = true;
        }
        Self::new(self.node_count, self.arcs.iter().map(|&(s, t)| (perm[s], perm[t])))
    }

    /// Nodes from which some node of `targets` is reachable (targets
    /// themselves included).
    pub fn ancestors_of(&self, targets: &[NodeId]) -> HashSet<NodeId> {
        let mut seen: HashSet<NodeId> = targets.iter().copied().collect();
        let mut stack: Vec<NodeId> = targets.to_vec();
        while let Some(v) = stack.pop() {
            for &p in self.in_neighbors(v) {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Serializes to the shared text format: a `n <count>` header, then
    /// one `<src> <dst>` line per arc in ascending order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n {}", self.node_count);
        for &(src, dst) in &self.arcs {
            let _ = writeln!(s, "{src} {dst}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_graph_text(text, "<string>")
    }
}

fn parse_graph_text(text: &str, path: &str) -> Result<DirectedGraph> {
    let err = |line: usize, msg: String| Error::ParseFile { path: path.to_string(), line, msg };
    let mut node_count: Option<usize> = None;
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut arc_lines: Vec<usize> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match node_count {
            None => {
                let rest = line
                    .strip_prefix('n')
                    .ok_or_else(|| err(lineno, format!("expected header `n <count>`, got `{line}`")))?;
                let count: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno, format!("bad node count in header `{line}`")))?;
                node_count = Some(count);
            }
            Some(n) => {
                let mut it = line.split_whitespace();
                let src: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, format!("bad arc line `{line}`")))?;
                let dst: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(lineno, format!("bad arc line `{line}`")))?;
                if it.next().is_some() {
                    return Err(err(lineno, format!("trailing tokens on arc line `{line}`")));
                }
                for id in [src, dst] {
                    if id >= n {
                        return Err(err(lineno, format!("node id {id} out of range (n = {n})")));
                    }
                }
                arcs.push((src, dst));
                arc_lines.push(lineno);
            }
        }
    }
    let n = node_count.ok_or_else(|| err(1, "missing `n <count>` header".into()))?;
    // report duplicates with their line number
    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(arcs.len());
    for (pos, &(s, t)) in arcs.iter().enumerate() {
        if !seen.insert((s, t)) {
            return Err(err(arc_lines[pos], format!("duplicate arc ({s}, {t})")));
        }
    }
    DirectedGraph::new(n, arcs)
}

pub fn parse_graph_file(path: impl AsRef<Path>) -> Result<DirectedGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_graph_text(&text, &path.display().to_string())
}

pub fn write_graph_file(g: &DirectedGraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, g.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builds_adjacency_transposes() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0), (1, 1)]).unwrap();
        assert_eq!(g.out_neighbors(1), &[1, 2]);
        assert_eq!(g.in_neighbors(1), &[0, 1]);
        assert_eq!(g.out_degree(2), 1);
        assert!(g.has_arc(1, 1));
        assert!(!g.has_arc(0, 2));
    }

    #[test]
    fn rejects_duplicates_and_bad_ids() {
        assert!(matches!(
            DirectedGraph::new(2, [(0, 1), (0, 1)]),
            Err(Error::DuplicateArc { src: 0, dst: 1 })
        ));
        assert!(matches!(
            DirectedGraph::new(2, [(0, 2)]),
            Err(Error::InvalidNode { id: 2, .. })
        ));
    }

    #[test]
    fn parses_the_shared_format() {
        let g = DirectedGraph::from_text("# comment\nn 2\n0 1\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arcs(), &[(0, 1)]);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let e = DirectedGraph::from_text("n 2\n0 1\n0 1\n").unwrap_err();
        match e {
            Error::ParseFile { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("duplicate arc"));
            }
            other => panic!("unexpected error {other}"),
        }
        let e = DirectedGraph::from_text("n 2\n1 2\n").unwrap_err();
        match e {
            Error::ParseFile { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("out of range"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_graph_round_trips_as_header_only() {
        let g = DirectedGraph::empty(0);
        assert_eq!(g.to_text(), "n 0\n");
        assert_eq!(DirectedGraph::from_text("n 0\n").unwrap(), g);
    }

    fn arb_graph() -> impl Strategy<Value = DirectedGraph> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::hash_set((0..n, 0..n), 0..30)
                .prop_map(move |arcs| DirectedGraph::new(n, arcs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(g in arb_graph()) {
            let back = DirectedGraph::from_text(&g.to_text()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn adjacency_is_a_transpose(g in arb_graph()) {
            for v in g.nodes() {
                for &w in g.out_neighbors(v) {
                    prop_assert!(g.in_neighbors(w).contains(&v));
                }
                for &w in g.in_neighbors(v) {
                    prop_assert!(g.out_neighbors(w).contains(&v));
                }
            }
        }
    }
}
