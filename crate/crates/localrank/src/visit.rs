//! Partial views of a graph as gathered by neighborhood queries.
//!
//! A visit subgraph splits its nodes into a *kernel* (nodes whose full
//! neighborhood is known) and a *frontier* (nodes seen only as
//! neighbors of the kernel). Every frontier node touches the kernel,
//! and no arc runs between two frontier nodes — the frontier's own
//! neighborhoods are unknown territory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitSubgraph {
    kernel: BTreeSet<NodeId>,
    frontier: BTreeSet<NodeId>,
    arcs: BTreeSet<(NodeId, NodeId)>,
}

impl VisitSubgraph {
    /// Builds and validates a visit subgraph over arbitrary node ids.
    pub fn new(
        kernel: impl IntoIterator<Item = NodeId>,
        frontier: impl IntoIterator<Item = NodeId>,
        arcs: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let kernel: BTreeSet<NodeId> = kernel.into_iter().collect();
        let frontier: BTreeSet<NodeId> = frontier.into_iter().collect();
        let arcs: BTreeSet<(NodeId, NodeId)> = arcs.into_iter().collect();
        if kernel.is_empty() {
            return Err(Error::EmptyKernel);
        }
        let structural = |msg: String| Error::UnionStructure(msg);
        if let Some(&x) = kernel.intersection(&frontier).next() {
            return Err(structural(format!("node {x} is both kernel and frontier")));
        }
        let mut frontier_touched: BTreeSet<NodeId> = BTreeSet::new();
        for &(s, t) in &arcs {
            let s_kernel = kernel.contains(&s);
            let t_kernel = kernel.contains(&t);
            let s_frontier = frontier.contains(&s);
            let t_frontier = frontier.contains(&t);
            if !(s_kernel || s_frontier) || !(t_kernel || t_frontier) {
                return Err(structural(format!("arc ({s}, {t}) leaves the node set")));
            }
            if s_frontier && t_frontier {
                return Err(structural(format!("arc ({s}, {t}) connects two frontier nodes")));
            }
            if s_frontier {
                frontier_touched.insert(s);
            }
            if t_frontier {
                frontier_touched.insert(t);
            }
        }
        if let Some(&w) = frontier.difference(&frontier_touched).next() {
            return Err(structural(format!("frontier node {w} has no arc to or from the kernel")));
        }
        Ok(Self { kernel, frontier, arcs })
    }

    /// The visit subgraph obtained by querying exactly `kernel` on `g`:
    /// the frontier is every outside neighbor of the kernel and the
    /// arcs are all arcs of `g` incident to at least one kernel node.
    pub fn induced(g: &DirectedGraph, kernel: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let kernel: BTreeSet<NodeId> = kernel.into_iter().collect();
        if kernel.is_empty() {
            return Err(Error::EmptyKernel);
        }
        for &v in &kernel {
            g.check_node(v)?;
        }
        let mut frontier = BTreeSet::new();
        let mut arcs = BTreeSet::new();
        for &v in &kernel {
            for &c in g.out_neighbors(v) {
                arcs.insert((v, c));
                if !kernel.contains(&c) {
                    frontier.insert(c);
                }
            }
            for &p in g.in_neighbors(v) {
                arcs.insert((p, v));
                if !kernel.contains(&p) {
                    frontier.insert(p);
                }
            }
        }
        Ok(Self { kernel, frontier, arcs })
    }

    pub fn kernel(&self) -> &BTreeSet<NodeId> {
        &self.kernel
    }

    pub fn frontier(&self) -> &BTreeSet<NodeId> {
        &self.frontier
    }

    pub fn arcs(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.arcs
    }

    pub fn is_kernel(&self, v: NodeId) -> bool {
        self.kernel.contains(&v)
    }

    /// Total node count |H|, kernel plus frontier.
    pub fn node_count(&self) -> usize {
        self.kernel.len() + self.frontier.len()
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel.len()
    }

    pub fn contains_arc(&self, s: NodeId, t: NodeId) -> bool {
        self.arcs.contains(&(s, t))
    }

    /// Out-degree of a node counting every arc present in the view,
    /// including arcs into the frontier.
    pub fn out_degree(&self, v: NodeId) -> usize {
        self.arcs.range((v, 0)..=(v, NodeId::MAX)).count()
    }

    pub fn out_arcs(&self, v: NodeId) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.arcs.range((v, 0)..=(v, NodeId::MAX)).copied()
    }

    /// True when exploring `g` with exactly this kernel yields this
    /// view: the view's arcs are precisely the arcs of `g` incident to
    /// its kernel, and the node sets agree.
    pub fn is_compatible_with(&self, g: &DirectedGraph) -> Result<bool> {
        for &v in self.kernel.iter().chain(self.frontier.iter()) {
            if v >= g.node_count() {
                return Err(Error::NodeUniverseMismatch);
            }
        }
        let expected = VisitSubgraph::induced(g, self.kernel.iter().copied())?;
        Ok(expected == *self)
    }

    /// Union per the visit-subgraph algebra: node and arc unions with
    /// the kernels merged; whatever is not kernel stays frontier.
    pub fn union(&self, other: &VisitSubgraph) -> Result<VisitSubgraph> {
        let kernel: BTreeSet<NodeId> = self.kernel.union(&other.kernel).copied().collect();
        let mut nodes: BTreeSet<NodeId> = kernel.clone();
        nodes.extend(self.frontier.iter().copied());
        nodes.extend(other.frontier.iter().copied());
        let frontier: BTreeSet<NodeId> = nodes.difference(&kernel).copied().collect();
        let arcs: BTreeSet<(NodeId, NodeId)> = self.arcs.union(&other.arcs).copied().collect();
        VisitSubgraph::new(kernel, frontier, arcs)
    }

    /// Renames every node through `map`; ids absent from the map are
    /// rejected.
    pub fn relabel(&self, map: &BTreeMap<NodeId, NodeId>) -> Result<VisitSubgraph> {
        let get = |v: NodeId| map.get(&v).copied().ok_or(Error::NodeUniverseMismatch);
        let kernel = self.kernel.iter().map(|&v| get(v)).collect::<Result<Vec<_>>>()?;
        let frontier = self.frontier.iter().map(|&v| get(v)).collect::<Result<Vec<_>>>()?;
        let arcs = self
            .arcs
            .iter()
            .map(|&(s, t)| Ok((get(s)?, get(t)?)))
            .collect::<Result<Vec<_>>>()?;
        VisitSubgraph::new(kernel, frontier, arcs)
    }

    /// Serializes as a `kernel:` line, a `frontier:` line, then arc
    /// lines in ascending order.
    pub fn to_text(&self) -> String {
        let join = |s: &BTreeSet<NodeId>| {
            s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "kernel: {}", join(&self.kernel));
        let _ = writeln!(out, "frontier: {}", join(&self.frontier));
        for &(s, t) in &self.arcs {
            let _ = writeln!(out, "{s} {t}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_visit_text(text, "<string>")
    }
}

fn parse_visit_text(text: &str, path: &str) -> Result<VisitSubgraph> {
    let err = |line: usize, msg: String| Error::ParseFile { path: path.to_string(), line, msg };
    let mut kernel: Option<Vec<NodeId>> = None;
    let mut frontier: Option<Vec<NodeId>> = None;
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_ids = |rest: &str| -> std::result::Result<Vec<NodeId>, ()> {
            rest.split_whitespace().map(|t| t.parse().map_err(|_| ())).collect()
        };
        if let Some(rest) = line.strip_prefix("kernel:") {
            kernel = Some(parse_ids(rest).map_err(|_| err(lineno, format!("bad kernel line `{line}`")))?);
        } else if let Some(rest) = line.strip_prefix("frontier:") {
            frontier =
                Some(parse_ids(rest).map_err(|_| err(lineno, format!("bad frontier line `{line}`")))?);
        } else {
            let ids = parse_ids(line).map_err(|_| err(lineno, format!("bad arc line `{line}`")))?;
            if ids.len() != 2 {
                return Err(err(lineno, format!("expected `<src> <dst>`, got `{line}`")));
            }
            arcs.push((ids[0], ids[1]));
        }
    }
    let kernel = kernel.ok_or_else(|| err(1, "missing `kernel:` line".into()))?;
    let frontier = frontier.ok_or_else(|| err(1, "missing `frontier:` line".into()))?;
    VisitSubgraph::new(kernel, frontier, arcs)
}

pub fn parse_visit_file(path: impl AsRef<Path>) -> Result<VisitSubgraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_visit_text(&text, &path.display().to_string())
}

pub fn write_visit_file(h: &VisitSubgraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, h.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The five-node example view: kernel {u = 0, u1 = 1, v = 3} with
    /// frontier parents u2 = 2 of u and v1 = 4 of v, v self-looped.
    pub(crate) fn two_target_view() -> VisitSubgraph {
        VisitSubgraph::new([0, 1, 3], [2, 4], [(1, 0), (2, 0), (3, 3), (4, 3)]).unwrap()
    }

    /// A graph the view above is compatible with: nothing beyond the
    /// view itself.
    fn bare_completion() -> DirectedGraph {
        DirectedGraph::new(5, [(1, 0), (2, 0), (3, 3), (4, 3)]).unwrap()
    }

    /// A different completion: extra parents feeding v's frontier
    /// parent and an arc from u's frontier parent across.
    fn richer_completion() -> DirectedGraph {
        DirectedGraph::new(7, [(1, 0), (2, 0), (3, 3), (4, 3), (5, 4), (6, 4), (2, 4)]).unwrap()
    }

    #[test]
    fn induced_from_example_graph() {
        let h = VisitSubgraph::induced(&bare_completion(), [0, 1, 3]).unwrap();
        assert_eq!(h, two_target_view());
        assert_eq!(h.node_count(), 5);
        assert_eq!(h.kernel_size(), 3);
    }

    #[test]
    fn one_view_compatible_with_two_graphs() {
        let h = two_target_view();
        assert!(h.is_compatible_with(&bare_completion()).unwrap());
        assert!(h.is_compatible_with(&richer_completion()).unwrap());
    }

    #[test]
    fn removing_a_kernel_incident_arc_breaks_compatibility() {
        let h = two_target_view();
        let g = DirectedGraph::new(5, [(1, 0), (3, 3), (4, 3)]).unwrap();
        assert!(!h.is_compatible_with(&g).unwrap());
    }

    #[test]
    fn full_kernel_has_empty_frontier() {
        let g = richer_completion();
        let h = VisitSubgraph::induced(&g, g.nodes()).unwrap();
        assert!(h.frontier().is_empty());
        assert_eq!(h.arcs().len(), g.arc_count());
    }

    #[test]
    fn isolated_kernel_node() {
        let g = DirectedGraph::new(3, [(1, 2)]).unwrap();
        let h = VisitSubgraph::induced(&g, [0]).unwrap();
        assert!(h.frontier().is_empty());
        assert!(h.arcs().is_empty());
        assert_eq!(h.node_count(), 1);
    }

    #[test]
    fn rejects_frontier_to_frontier_arcs() {
        let r = VisitSubgraph::new([0], [1, 2], [(1, 0), (1, 2)]);
        assert!(matches!(r, Err(Error::UnionStructure(_))));
    }

    #[test]
    fn rejects_disconnected_frontier() {
        let r = VisitSubgraph::new([0], [1], []);
        assert!(matches!(r, Err(Error::UnionStructure(_))));
    }

    #[test]
    fn union_is_idempotent_and_merges_kernels() {
        let g = richer_completion();
        let h1 = VisitSubgraph::induced(&g, [0, 1]).unwrap();
        let h2 = VisitSubgraph::induced(&g, [3, 4]).unwrap();
        assert_eq!(h1.union(&h1).unwrap(), h1);

        let u = h1.union(&h2).unwrap();
        assert_eq!(u, VisitSubgraph::induced(&g, [0, 1, 3, 4]).unwrap());
        // a frontier node of h1 that is kernel in h2 ends up kernel
        let h3 = VisitSubgraph::induced(&g, [2]).unwrap();
        let u2 = h1.union(&h3).unwrap();
        assert!(u2.is_kernel(2));
    }

    #[test]
    fn text_round_trip() {
        let h = two_target_view();
        let back = VisitSubgraph::from_text(&h.to_text()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn relabel_keeps_structure() {
        let h = two_target_view();
        let map: BTreeMap<NodeId, NodeId> = [(0, 10), (1, 11), (2, 12), (3, 13), (4, 14)].into();
        let r = h.relabel(&map).unwrap();
        assert_eq!(r.kernel_size(), 3);
        assert!(r.contains_arc(12, 10));
    }
}
