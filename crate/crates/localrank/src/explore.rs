//! Query-metered exploration of a hidden graph.
//!
//! A session hides a graph behind three queries — full neighborhood
//! lookup, uniform random child, uniform random node — and bills one
//! unit per successful query. Callers only ever see per-session
//! external ids: node identities are shuffled when the session opens,
//! so an algorithm cannot exploit generator ordering, and querying an
//! id it has not yet been shown is an error rather than a legal move.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::visit::VisitSubgraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Links,
    Crawl,
    Jump,
}

/// The subset of queries a session allows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryModel {
    links: bool,
    crawl: bool,
    jump: bool,
}

impl QueryModel {
    pub fn new(kinds: &[QueryKind]) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidParameter("exploration model must allow some query".into()));
        }
        let mut model = Self { links: false, crawl: false, jump: false };
        for k in kinds {
            match k {
                QueryKind::Links => model.links = true,
                QueryKind::Crawl => model.crawl = true,
                QueryKind::Jump => model.jump = true,
            }
        }
        Ok(model)
    }

    pub fn links_only() -> Self {
        Self { links: true, crawl: false, jump: false }
    }

    pub fn jump_and_crawl() -> Self {
        Self { links: false, crawl: true, jump: true }
    }

    pub fn all() -> Self {
        Self { links: true, crawl: true, jump: true }
    }

    pub fn allows(&self, kind: QueryKind) -> bool {
        match kind {
            QueryKind::Links => self.links,
            QueryKind::Crawl => self.crawl,
            QueryKind::Jump => self.jump,
        }
    }
}

/// Output of a neighborhood query: every parent and child of the
/// queried node, as external ids in ascending order. The revealed arcs
/// are `(p, u)` for each parent and `(u, c)` for each child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinksResult {
    pub parents: Vec<NodeId>,
    pub children: Vec<NodeId>,
}

/// A metered query oracle over one hidden graph. Single-owner mutable
/// state; open many sessions over one shared graph for parallel runs.
pub struct ExplorationSession<'g> {
    graph: &'g DirectedGraph,
    model: QueryModel,
    ext_of_int: Vec<NodeId>,
    int_of_ext: Vec<NodeId>,
    targets_ext: Vec<NodeId>,
    discovered: BTreeSet<NodeId>,
    linked: BTreeSet<NodeId>,
    query_count: u64,
    rng: ChaCha8Rng,
}

impl<'g> ExplorationSession<'g> {
    /// Opens a session: the id shuffle is drawn from `seed`, the
    /// targets (given as hidden-graph ids) are pre-discovered, and the
    /// meter starts at zero. Equal seeds replay identically.
    pub fn open(
        graph: &'g DirectedGraph,
        targets: &[NodeId],
        model: QueryModel,
        seed: u64,
    ) -> Result<Self> {
        let n = graph.node_count();
        let mut sorted = targets.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadTargets);
        }
        for &t in targets {
            if t >= n {
                return Err(Error::UnknownTarget(t));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ext_of_int: Vec<NodeId> = (0..n).collect();
        ext_of_int.shuffle(&mut rng);
        let mut int_of_ext = vec![0; n];
        for (int, &ext) in ext_of_int.iter().enumerate() {
            int_of_ext[ext] = int;
        }
        let targets_ext: Vec<NodeId> = targets.iter().map(|&t| ext_of_int[t]).collect();
        let discovered: BTreeSet<NodeId> = targets_ext.iter().copied().collect();
        Ok(Self {
            graph,
            model,
            ext_of_int,
            int_of_ext,
            targets_ext,
            discovered,
            linked: BTreeSet::new(),
            query_count: 0,
            rng,
        })
    }

    /// The targets under this session's external ids, in input order.
    pub fn targets(&self) -> &[NodeId] {
        &self.targets_ext
    }

    /// Queries successfully executed so far.
    pub fn cost(&self) -> u64 {
        self.query_count
    }

    pub fn model(&self) -> QueryModel {
        self.model
    }

    pub fn discovered(&self) -> &BTreeSet<NodeId> {
        &self.discovered
    }

    fn gate(&self, kind: QueryKind, name: &'static str) -> Result<()> {
        if !self.model.allows(kind) {
            return Err(Error::ModelViolation { query: name });
        }
        Ok(())
    }

    fn require_discovered(&self, ext: NodeId) -> Result<NodeId> {
        if ext >= self.int_of_ext.len() || !self.discovered.contains(&ext) {
            return Err(Error::Undiscovered { id: ext });
        }
        Ok(self.int_of_ext[ext])
    }

    /// All parents and children of `ext`, billing one query. Rejected
    /// calls (model violation, undiscovered id) do not bill.
    pub fn links(&mut self, ext: NodeId) -> Result<LinksResult> {
        self.gate(QueryKind::Links, "links")?;
        let int = self.require_discovered(ext)?;
        self.query_count += 1;
        self.linked.insert(ext);
        let mut parents: Vec<NodeId> =
            self.graph.in_neighbors(int).iter().map(|&p| self.ext_of_int[p]).collect();
        let mut children: Vec<NodeId> =
            self.graph.out_neighbors(int).iter().map(|&c| self.ext_of_int[c]).collect();
        parents.sort_unstable();
        children.sort_unstable();
        self.discovered.extend(parents.iter().copied());
        self.discovered.extend(children.iter().copied());
        Ok(LinksResult { parents, children })
    }

    /// One uniformly random child of `ext` (revealing the arc to it),
    /// or `None` if the node has no children. Bills one query either
    /// way.
    pub fn crawl(&mut self, ext: NodeId) -> Result<Option<NodeId>> {
        self.gate(QueryKind::Crawl, "crawl")?;
        let int = self.require_discovered(ext)?;
        self.query_count += 1;
        let out = self.graph.out_neighbors(int);
        if out.is_empty() {
            return Ok(None);
        }
        let pick = out[self.rng.gen_range(0..out.len())];
        let child = self.ext_of_int[pick];
        self.discovered.insert(child);
        Ok(Some(child))
    }

    /// One node uniform over the whole hidden graph, independent of its
    /// arcs. Bills one query.
    pub fn jump(&mut self) -> Result<NodeId> {
        self.gate(QueryKind::Jump, "jump")?;
        self.query_count += 1;
        let int = self.rng.gen_range(0..self.graph.node_count());
        let ext = self.ext_of_int[int];
        self.discovered.insert(ext);
        Ok(ext)
    }

    /// The view collected by the neighborhood queries so far: kernel =
    /// queried nodes, arcs = everything those queries revealed,
    /// frontier = the remaining endpoints. Random-child and
    /// random-node revelations are not part of this view.
    pub fn linked_view(&self) -> Result<VisitSubgraph> {
        if self.linked.is_empty() {
            return Err(Error::EmptyKernel);
        }
        let mut arcs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        let mut nodes: BTreeSet<NodeId> = self.linked.clone();
        for &ext in &self.linked {
            let int = self.int_of_ext[ext];
            for &p in self.graph.in_neighbors(int) {
                let pe = self.ext_of_int[p];
                arcs.insert((pe, ext));
                nodes.insert(pe);
            }
            for &c in self.graph.out_neighbors(int) {
                let ce = self.ext_of_int[c];
                arcs.insert((ext, ce));
                nodes.insert(ce);
            }
        }
        let frontier: Vec<NodeId> = nodes.difference(&self.linked).copied().collect();
        VisitSubgraph::new(self.linked.iter().copied(), frontier, arcs)
    }

    /// Nodes this session has queried with `links`.
    pub fn linked(&self) -> &BTreeSet<NodeId> {
        &self.linked
    }

    // ------------------------------------------------------------------
    // Harness access: ground-truth mappings for judging runs. Algorithms
    // under measurement must not touch these.
    // ------------------------------------------------------------------

    pub fn hidden_node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn internal_of_external(&self, ext: NodeId) -> Option<NodeId> {
        self.int_of_ext.get(ext).copied()
    }

    pub fn external_of_internal(&self, int: NodeId) -> Option<NodeId> {
        self.ext_of_int.get(int).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_graph() -> DirectedGraph {
        DirectedGraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 3)]).unwrap()
    }

    #[test]
    fn same_seed_replays_identically() {
        let g = chain_graph();
        let mut a = ExplorationSession::open(&g, &[0], QueryModel::all(), 7).unwrap();
        let mut b = ExplorationSession::open(&g, &[0], QueryModel::all(), 7).unwrap();
        for _ in 0..50 {
            assert_eq!(a.jump().unwrap(), b.jump().unwrap());
        }
        let ta = a.targets()[0];
        let tb = b.targets()[0];
        assert_eq!(ta, tb);
        for _ in 0..20 {
            assert_eq!(a.crawl(ta).unwrap(), b.crawl(tb).unwrap());
        }
        assert_eq!(a.cost(), b.cost());
    }

    #[test]
    fn opening_discovers_targets_at_zero_cost() {
        let g = chain_graph();
        let s = ExplorationSession::open(&g, &[1, 3], QueryModel::all(), 3).unwrap();
        assert_eq!(s.cost(), 0);
        assert_eq!(s.discovered().len(), 2);
        for t in s.targets() {
            assert!(s.discovered().contains(t));
        }
    }

    #[test]
    fn model_gating_and_billing() {
        let g = chain_graph();
        let mut s =
            ExplorationSession::open(&g, &[0], QueryModel::new(&[QueryKind::Crawl]).unwrap(), 1)
                .unwrap();
        let t = s.targets()[0];
        assert!(matches!(s.jump(), Err(Error::ModelViolation { query: "jump" })));
        assert_eq!(s.cost(), 0);
        s.crawl(t).unwrap();
        assert_eq!(s.cost(), 1);
        // failed call on an undiscovered id does not bill
        let bogus = (0..4).map(|e| e as NodeId).find(|e| !s.discovered().contains(e)).unwrap();
        assert!(matches!(s.crawl(bogus), Err(Error::Undiscovered { .. })));
        assert_eq!(s.cost(), 1);
    }

    #[test]
    fn links_reveals_both_sides_and_discovers() {
        let g = DirectedGraph::new(3, [(1, 0), (2, 0), (0, 0)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::links_only(), 5).unwrap();
        let t = s.targets()[0];
        let r = s.links(t).unwrap();
        // self-loop shows up on both sides
        assert!(r.parents.contains(&t));
        assert_eq!(r.children, vec![t]);
        assert_eq!(r.parents.len(), 3);
        assert_eq!(s.discovered().len(), 3);
        assert_eq!(s.cost(), 1);
    }

    #[test]
    fn links_on_isolated_node_is_empty() {
        let g = DirectedGraph::new(2, [(1, 1)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::links_only(), 5).unwrap();
        let t = s.targets()[0];
        let r = s.links(t).unwrap();
        assert!(r.parents.is_empty());
        assert!(r.children.is_empty());
    }

    #[test]
    fn crawl_on_dangling_is_empty_but_bills() {
        let g = DirectedGraph::new(2, [(0, 1)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0, 1], QueryModel::jump_and_crawl(), 9).unwrap();
        let b = s.targets()[1];
        assert_eq!(s.crawl(b).unwrap(), None);
        assert_eq!(s.cost(), 1);
    }

    #[test]
    fn single_child_always_returned() {
        let g = chain_graph();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 2).unwrap();
        let t = s.targets()[0];
        let c = s.crawl(t).unwrap().unwrap();
        for _ in 0..10 {
            assert_eq!(s.crawl(t).unwrap(), Some(c));
        }
    }

    #[test]
    fn jump_frequencies_are_uniform() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 11).unwrap();
        let trials = 30_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..trials {
            *counts.entry(s.jump().unwrap()).or_insert(0usize) += 1;
        }
        // each frequency within 5 sigma of 1/3
        let p = 1.0 / 3.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (_, &c) in counts.iter() {
            let f = c as f64 / trials as f64;
            assert!((f - p).abs() < 5.0 * sigma, "frequency {f} too far from 1/3");
        }
        assert_eq!(counts.len(), 3);
    }

    #[test]
    fn crawl_frequencies_are_uniform_over_children() {
        let g = DirectedGraph::new(3, [(0, 1), (0, 2)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 13).unwrap();
        let t = s.targets()[0];
        let trials = 10_000usize;
        let mut hits = std::collections::HashMap::new();
        for _ in 0..trials {
            *hits.entry(s.crawl(t).unwrap().unwrap()).or_insert(0usize) += 1;
        }
        let sigma = (0.25 / trials as f64).sqrt();
        for (_, &c) in hits.iter() {
            let f = c as f64 / trials as f64;
            assert!((f - 0.5).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn single_node_jump_is_deterministic() {
        let g = DirectedGraph::new(1, [(0, 0)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 1).unwrap();
        let t = s.targets()[0];
        for _ in 0..5 {
            assert_eq!(s.jump().unwrap(), t);
        }
    }

    #[test]
    fn unknown_target_rejected() {
        let g = chain_graph();
        assert!(matches!(
            ExplorationSession::open(&g, &[9], QueryModel::all(), 0),
            Err(Error::UnknownTarget(9))
        ));
    }

    #[test]
    fn linked_view_matches_induced_subgraph() {
        let g = DirectedGraph::new(5, [(1, 0), (2, 0), (3, 3), (4, 3), (0, 3)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0, 3], QueryModel::links_only(), 21).unwrap();
        let (u, v) = (s.targets()[0], s.targets()[1]);
        s.links(u).unwrap();
        s.links(v).unwrap();
        let view = s.linked_view().unwrap();
        assert_eq!(view.kernel_size(), 2);
        // relabeling the view back to hidden ids reproduces the induced view
        let map: std::collections::BTreeMap<_, _> =
            (0..5).map(|e| (e, s.internal_of_external(e).unwrap())).collect();
        let hidden_view = view.relabel(&map).unwrap();
        assert_eq!(hidden_view, VisitSubgraph::induced(&g, [0, 3]).unwrap());
    }

    #[test]
    fn permutation_hides_generator_order() {
        // over many seeds, the external id of hidden node 0 among a
        // block of interchangeable nodes is uniform
        let g = DirectedGraph::new(4, [(0, 3), (1, 3), (2, 3), (3, 3)]).unwrap();
        let trials = 8_000usize;
        let mut counts = [0usize; 4];
        for seed in 0..trials as u64 {
            let s = ExplorationSession::open(&g, &[3], QueryModel::all(), seed).unwrap();
            counts[s.external_of_internal(0).unwrap()] += 1;
        }
        let p = 0.25;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for &c in &counts {
            let f = c as f64 / trials as f64;
            assert!((f - p).abs() < 5.0 * sigma);
        }
    }
}
