//! Deciding rankings from partial views.
//!
//! The kernel score of a kernel node counts only walk mass that flows
//! along kernel-internal paths, so it is a lower bound (up to the
//! common restart normalization) on the node's score in every graph
//! the view is compatible with. A view pins down `u` above `v` exactly
//! when (1) the kernel scores already satisfy the separation test and
//! (2) no frontier node feeds more kernel contribution towards `v`
//! than towards `u`. When either test fails, a compatible graph
//! reversing the pair can be constructed explicitly.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num::rational::BigRational;
use num::traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::pagerank::{exact_pagerank_with_cap, Mode, Score, SparseSystem, DEFAULT_SOLVE_CAP};
use crate::ranking::{epsilon_ranking, RankingParams};
use crate::visit::VisitSubgraph;

/// Kernel contributions of every kernel node towards the requested
/// targets, plus their sums (the kernel scores).
#[derive(Debug, Clone)]
pub struct KernelScores {
    kernel: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    targets: Vec<NodeId>,
    values: Values,
}

#[derive(Debug, Clone)]
enum Values {
    Float(Vec<Vec<f64>>),
    Rational(Vec<Vec<BigRational>>),
}

impl KernelScores {
    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    fn target_pos(&self, target: NodeId) -> Result<usize> {
        self.targets
            .iter()
            .position(|&t| t == target)
            .ok_or(Error::TargetNotInKernel(target))
    }

    /// Kernel contribution of `z` towards `target`; zero for any node
    /// outside the kernel.
    pub fn contribution(&self, z: NodeId, target: NodeId) -> Result<Score> {
        let t = self.target_pos(target)?;
        Ok(match (&self.values, self.index.get(&z)) {
            (Values::Float(v), Some(&k)) => Score::Float(v[t][k]),
            (Values::Float(_), None) => Score::Float(0.0),
            (Values::Rational(v), Some(&k)) => Score::Rational(v[t][k].clone()),
            (Values::Rational(_), None) => Score::Rational(BigRational::zero()),
        })
    }

    /// Kernel score of `target`: the sum of kernel contributions.
    pub fn score(&self, target: NodeId) -> Result<Score> {
        let t = self.target_pos(target)?;
        Ok(match &self.values {
            Values::Float(v) => Score::Float(v[t].iter().sum()),
            Values::Rational(v) => Score::Rational(v[t].iter().sum()),
        })
    }
}

/// Solves the kernel-contribution system of `h` for each target.
///
/// Out-degrees count every arc of the view, including arcs into the
/// frontier: mass sent to the frontier is lost to the kernel walk.
pub fn kernel_scores(
    h: &VisitSubgraph,
    params: &RankingParams,
    targets: &[NodeId],
    mode: Mode,
) -> Result<KernelScores> {
    for &t in targets {
        if !h.is_kernel(t) {
            return Err(Error::TargetNotInKernel(t));
        }
    }
    let kernel: Vec<NodeId> = h.kernel().iter().copied().collect();
    let index: BTreeMap<NodeId, usize> = kernel.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let size = h.node_count();
    let k = kernel.len();
    let out_deg: Vec<usize> = kernel.iter().map(|&z| h.out_degree(z)).collect();
    // kernel-to-kernel adjacency in local indexes
    let kernel_children: Vec<Vec<usize>> = kernel
        .iter()
        .map(|&z| h.out_arcs(z).filter_map(|(_, y)| index.get(&y).copied()).collect())
        .collect();

    let values = match mode {
        Mode::Rational => {
            let alpha = params.alpha().clone();
            let restart = (num::BigRational::from_integer(1.into()) - &alpha)
                / crate::numeric::from_int(size as i64);
            let mut per_target = Vec::with_capacity(targets.len());
            for &t in targets {
                let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); k];
                let mut b = vec![BigRational::zero(); k];
                b[index[&t]] = restart.clone();
                for (zi, children) in kernel_children.iter().enumerate() {
                    if children.is_empty() {
                        continue;
                    }
                    let w = &alpha / crate::numeric::from_int(out_deg[zi] as i64);
                    for &yi in children {
                        rows[zi].push((yi, w.clone()));
                    }
                }
                let sol = SparseSystem { rows, b }.solve(DEFAULT_SOLVE_CAP)?;
                per_target.push(sol);
            }
            Values::Rational(per_target)
        }
        Mode::Float { tol } => {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
            }
            let alpha = params.alpha_f64();
            let steps = Mode::float_steps(alpha, tol);
            let restart = (1.0 - alpha) / size as f64;
            let mut per_target = Vec::with_capacity(targets.len());
            for &t in targets {
                let mut base = vec![0.0; k];
                base[index[&t]] = restart;
                let mut cur = base.clone();
                let mut acc = base.clone();
                let mut next = vec![0.0; k];
                for _ in 0..steps {
                    for (zi, nx) in next.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for &yi in &kernel_children[zi] {
                            s += cur[yi];
                        }
                        *nx = if kernel_children[zi].is_empty() {
                            0.0
                        } else {
                            alpha / out_deg[zi] as f64 * s
                        };
                    }
                    std::mem::swap(&mut cur, &mut next);
                    for (a, c) in acc.iter_mut().zip(&cur) {
                        *a += c;
                    }
                }
                per_target.push(acc);
            }
            Values::Float(per_target)
        }
    };
    Ok(KernelScores { kernel, index, targets: targets.to_vec(), values })
}

/// Why a view failed the ranking-subgraph test for an ordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictFailure {
    /// The kernel scores themselves do not separate the pair the right
    /// way (condition 1).
    ScoreRatio,
    /// This frontier node feeds more kernel contribution to the lower
    /// target than to the higher one (condition 2).
    FrontierInflow { witness: NodeId },
}

/// Outcome of the two-condition test for an assumed order `higher`
/// above `lower`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankGraphVerdict {
    pub higher: NodeId,
    pub lower: NodeId,
    pub failure: Option<VerdictFailure>,
}

impl RankGraphVerdict {
    pub fn is_ranking_subgraph(&self) -> bool {
        self.failure.is_none()
    }
}

/// Tests whether `h` pins down `higher` above `lower` in every
/// compatible graph. All comparisons run in exact rational arithmetic.
pub fn verify_ranking_subgraph(
    h: &VisitSubgraph,
    higher: NodeId,
    lower: NodeId,
    params: &RankingParams,
) -> Result<RankGraphVerdict> {
    let ks = kernel_scores(h, params, &[higher, lower], Mode::Rational)?;
    let score_hi = ks.score(higher)?.rational().expect("rational mode").clone();
    let score_lo = ks.score(lower)?.rational().expect("rational mode").clone();
    // condition 1: P_H(higher) >= P_H(lower) / (1 + eps)
    if &score_hi * params.one_plus_epsilon() < score_lo {
        return Ok(RankGraphVerdict { higher, lower, failure: Some(VerdictFailure::ScoreRatio) });
    }
    // condition 2: no frontier node favors the lower target
    for &w in h.frontier() {
        let mut to_hi = BigRational::zero();
        let mut to_lo = BigRational::zero();
        for (_, z) in h.out_arcs(w) {
            to_hi += ks.contribution(z, higher)?.rational().expect("rational mode");
            to_lo += ks.contribution(z, lower)?.rational().expect("rational mode");
        }
        if to_hi < to_lo {
            return Ok(RankGraphVerdict {
                higher,
                lower,
                failure: Some(VerdictFailure::FrontierInflow { witness: w }),
            });
        }
    }
    Ok(RankGraphVerdict { higher, lower, failure: None })
}

/// A compatible graph contradicting an assumed order, with the mapping
/// from view ids to graph ids.
#[derive(Debug, Clone)]
pub struct Witness {
    pub graph: DirectedGraph,
    pub node_map: BTreeMap<NodeId, NodeId>,
    pub added_nodes: usize,
}

pub const DEFAULT_WITNESS_CAP: usize = 1 << 20;

/// Builds a graph compatible with `h` whose exact scores place the
/// verdict's lower target strictly above the higher one by more than
/// the separation factor.
///
/// For a score-ratio failure the construction floods every frontier
/// node with fresh sink children, which starves all frontier-borne
/// contributions and leaves the kernel scores in charge. For a
/// frontier-inflow failure at `w` it instead attaches fresh parents to
/// `w` (and starves every other frontier node) so that the flow
/// through `w` dominates. The group size doubles from |H| until the
/// exact scores certify the reversal; a failure margin too close to
/// equality runs into the cap instead.
pub fn adversarial_witness(
    h: &VisitSubgraph,
    verdict: &RankGraphVerdict,
    params: &RankingParams,
    cap: usize,
) -> Result<Witness> {
    let failure = verdict.failure.as_ref().ok_or(Error::NoFailingCondition)?;
    let all_nodes: Vec<NodeId> = h
        .kernel()
        .iter()
        .chain(h.frontier().iter())
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let node_map: BTreeMap<NodeId, NodeId> =
        all_nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let base = h.node_count();
    let base_arcs: Vec<(NodeId, NodeId)> =
        h.arcs().iter().map(|&(s, t)| (node_map[&s], node_map[&t])).collect();
    let frontier: Vec<NodeId> = h.frontier().iter().map(|&w| node_map[&w]).collect();
    let one_plus_eps = params.one_plus_epsilon();

    let mut group = h.node_count().max(1);
    loop {
        let mut arcs = base_arcs.clone();
        let n;
        match failure {
            VerdictFailure::ScoreRatio => {
                // `group` fresh nodes, each pointed to by every frontier node
                n = base + group;
                for new in base..n {
                    for &w in &frontier {
                        arcs.push((w, new));
                    }
                }
            }
            VerdictFailure::FrontierInflow { witness } => {
                let w = node_map[witness];
                // `group` fresh parents of w, plus `group` shared sinks
                // fed by every other frontier node
                n = base + 2 * group;
                for new in base..base + group {
                    arcs.push((new, w));
                }
                for sink in base + group..n {
                    for &y in &frontier {
                        if y != w {
                            arcs.push((y, sink));
                        }
                    }
                }
            }
        }
        let g = DirectedGraph::new(n, arcs)?;
        let scores = exact_pagerank_with_cap(&g, params, Mode::Rational, DEFAULT_SOLVE_CAP)?;
        let hi = scores.rational(node_map[&verdict.higher]).expect("rational mode");
        let lo = scores.rational(node_map[&verdict.lower]).expect("rational mode");
        if lo > &(hi * &one_plus_eps) {
            let added = n - base;
            return Ok(Witness { graph: g, node_map, added_nodes: added });
        }
        group *= 2;
        if group > cap {
            return Err(Error::WitnessCapExceeded { cap });
        }
    }
}

/// How a multi-target search orders the pairs it must certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Adjacent pairs of the exact score ranking, ties kept in the
    /// emitted order.
    TrueRanking,
    /// Adjacent pairs of the target list as given.
    AsGiven,
}

#[derive(Debug, Clone)]
pub struct MinSearchOptions {
    /// Cap on the number of searchable nodes (targets plus their
    /// ancestors); the subset enumeration is exponential in it.
    pub node_budget: usize,
    /// Stop after this kernel size and report not found; `None`
    /// searches up to every searchable node.
    pub max_kernel_size: Option<usize>,
    pub order: OrderPolicy,
}

impl Default for MinSearchOptions {
    fn default() -> Self {
        Self { node_budget: 22, max_kernel_size: None, order: OrderPolicy::TrueRanking }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalKernel {
    pub kernel: Vec<NodeId>,
    pub kernel_size: usize,
}

/// Smallest kernel containing the targets whose induced view passes the
/// ranking-subgraph test for every adjacent pair, enumerating candidate
/// sets by size then lexicographic order.
///
/// Only targets and their ancestors are searched: any other node has no
/// kernel path to a target, cannot move a kernel score, and its own
/// frontier constraints are vacuous. Subsets where some member cannot
/// reach a target inside the subset are skipped for the same reason —
/// the equivalent smaller kernel is enumerated anyway.
pub fn min_ranking_subgraph(
    g: &DirectedGraph,
    targets: &[NodeId],
    params: &RankingParams,
    opts: &MinSearchOptions,
) -> Result<Option<MinimalKernel>> {
    if targets.is_empty() {
        return Err(Error::BadTargets);
    }
    for &t in targets {
        g.check_node(t)?;
    }
    let mut tsorted = targets.to_vec();
    tsorted.sort_unstable();
    if tsorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadTargets);
    }

    let pairs: Vec<(NodeId, NodeId)> = match opts.order {
        OrderPolicy::AsGiven => targets.windows(2).map(|w| (w[0], w[1])).collect(),
        OrderPolicy::TrueRanking => {
            let scores = exact_pagerank_with_cap(g, params, Mode::Rational, DEFAULT_SOLVE_CAP)?;
            let outcome = epsilon_ranking(&scores, targets, params)?;
            outcome.adjacent_pairs()
        }
    };

    let mut candidates: Vec<NodeId> = g.ancestors_of(targets).into_iter().collect();
    candidates.sort_unstable();
    if candidates.len() > opts.node_budget {
        return Err(Error::SearchBudgetExceeded {
            size: candidates.len(),
            budget: opts.node_budget,
        });
    }
    let extras: Vec<NodeId> = candidates.iter().copied().filter(|v| !tsorted.contains(v)).collect();

    let max_size = opts.max_kernel_size.unwrap_or(candidates.len()).min(candidates.len());
    if max_size < targets.len() {
        return Ok(None);
    }

    let checker = KernelChecker::new(g, &pairs, params);
    for size in targets.len()..=max_size {
        let pick = size - targets.len();
        let mut combos = Combinations::new(extras.len(), pick);
        while let Some(combo) = combos.next() {
            let mut kernel: Vec<NodeId> = tsorted.clone();
            kernel.extend(combo.iter().map(|&i| extras[i]));
            kernel.sort_unstable();
            if !kernel_reaches_targets(g, &kernel, &tsorted) {
                continue;
            }
            if checker.passes(&kernel)? {
                return Ok(Some(MinimalKernel { kernel_size: kernel.len(), kernel }));
            }
        }
    }
    Ok(None)
}

/// Every kernel node must reach some target along kernel-internal arcs.
fn kernel_reaches_targets(g: &DirectedGraph, kernel: &[NodeId], targets: &[NodeId]) -> bool {
    let in_kernel: HashSet<NodeId> = kernel.iter().copied().collect();
    let mut reached: HashSet<NodeId> = targets.iter().copied().collect();
    let mut stack: Vec<NodeId> = targets.to_vec();
    while let Some(v) = stack.pop() {
        for &p in g.in_neighbors(v) {
            if in_kernel.contains(&p) && reached.insert(p) {
                stack.push(p);
            }
        }
    }
    kernel.iter().all(|v| reached.contains(v))
}

/// Pair verifier with a float fast path. A candidate kernel is
/// discarded without exact arithmetic only when some condition fails
/// by a margin far above f64 solve error; anything closer, and every
/// would-be pass, is settled by the exact verifier.
struct KernelChecker<'a> {
    g: &'a DirectedGraph,
    pairs: &'a [(NodeId, NodeId)],
    params: &'a RankingParams,
    margin: f64,
}

impl<'a> KernelChecker<'a> {
    fn new(g: &'a DirectedGraph, pairs: &'a [(NodeId, NodeId)], params: &'a RankingParams) -> Self {
        Self { g, pairs, params, margin: 1e-7 }
    }

    fn passes(&self, kernel: &[NodeId]) -> Result<bool> {
        match self.float_screen(kernel) {
            Screen::CertifiedFail => Ok(false),
            Screen::NeedExact => {
                let h = VisitSubgraph::induced(self.g, kernel.iter().copied())?;
                for &(hi, lo) in self.pairs {
                    if !verify_ranking_subgraph(&h, hi, lo, self.params)?.is_ranking_subgraph() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn float_screen(&self, kernel: &[NodeId]) -> Screen {
        let k = kernel.len();
        let index: BTreeMap<NodeId, usize> =
            kernel.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        // induced view data straight off the graph: a kernel node keeps
        // all its arcs, so its view out-degree is its graph out-degree
        let mut frontier: BTreeSet<NodeId> = BTreeSet::new();
        let mut kernel_children: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (zi, &z) in kernel.iter().enumerate() {
            for &y in self.g.out_neighbors(z) {
                match index.get(&y) {
                    Some(&yi) => kernel_children[zi].push(yi),
                    None => {
                        frontier.insert(y);
                    }
                }
            }
            for &p in self.g.in_neighbors(z) {
                if !index.contains_key(&p) {
                    frontier.insert(p);
                }
            }
        }
        let size = k + frontier.len();
        let alpha = self.params.alpha_f64();
        let restart = (1.0 - alpha) / size as f64;

        // dense solve of the kernel-contribution system per needed target
        let mut target_list: Vec<NodeId> = Vec::new();
        for &(hi, lo) in self.pairs {
            for t in [hi, lo] {
                if !target_list.contains(&t) {
                    target_list.push(t);
                }
            }
        }
        let mut contribs: BTreeMap<NodeId, Vec<f64>> = BTreeMap::new();
        for &t in &target_list {
            let mut a = vec![vec![0.0f64; k]; k];
            let mut b = vec![0.0f64; k];
            b[index[&t]] = restart;
            for (zi, &z) in kernel.iter().enumerate() {
                a[zi][zi] += 1.0;
                let od = self.g.out_degree(z);
                if od > 0 {
                    let w = alpha / od as f64;
                    for &yi in &kernel_children[zi] {
                        a[zi][yi] -= w;
                    }
                }
            }
            match solve_dense_f64(&mut a, &mut b) {
                Some(x) => {
                    contribs.insert(t, x);
                }
                None => return Screen::NeedExact,
            }
        }

        let one_plus_eps = 1.0 + self.params.epsilon_f64();
        for &(hi, lo) in self.pairs {
            let chi = &contribs[&hi];
            let clo = &contribs[&lo];
            let score_hi: f64 = chi.iter().sum();
            let score_lo: f64 = clo.iter().sum();
            if score_hi * one_plus_eps < score_lo - self.margin {
                return Screen::CertifiedFail;
            }
            for &w in &frontier {
                let mut to_hi = 0.0;
                let mut to_lo = 0.0;
                for &z in self.g.out_neighbors(w) {
                    if let Some(&zi) = index.get(&z) {
                        to_hi += chi[zi];
                        to_lo += clo[zi];
                    }
                }
                if to_hi < to_lo - self.margin {
                    return Screen::CertifiedFail;
                }
            }
        }
        Screen::NeedExact
    }
}

enum Screen {
    CertifiedFail,
    NeedExact,
}

fn solve_dense_f64(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = 1.0 / a[col][col];
        for c in col..n {
            a[col][c] *= inv;
        }
        b[col] *= inv;
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some(b.to_vec())
}

/// Lexicographic k-of-n index combinations.
struct Combinations {
    n: usize,
    k: usize,
    state: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let state = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, k, state }
    }

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.state.clone()?;
        // advance
        let mut next = cur.clone();
        let mut i = self.k;
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            if next[i] + (self.k - i) < self.n {
                next[i] += 1;
                for j in i + 1..self.k {
                    next[j] = next[j - 1] + 1;
                }
                self.state = Some(next);
                break;
            }
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    fn params(alpha: (i64, i64), eps: (i64, i64)) -> RankingParams {
        RankingParams::new(ratio(alpha.0, alpha.1), ratio(eps.0, eps.1)).unwrap()
    }

    /// kernel {u = 0, u1 = 1, v = 3}, frontier {u2 = 2, v1 = 4}; arcs
    /// u1 -> u, u2 -> u, v self-loop, v1 -> v.
    fn two_target_view() -> VisitSubgraph {
        VisitSubgraph::new([0, 1, 3], [2, 4], [(1, 0), (2, 0), (3, 3), (4, 3)]).unwrap()
    }

    #[test]
    fn kernel_scores_on_the_example_view() {
        let h = two_target_view();
        let p = params((3, 10), (0, 1));
        let ks = kernel_scores(&h, &p, &[0, 3], Mode::Rational).unwrap();
        // (1 - a)/5 * (1 + a) = 91/500 and 1/5
        assert_eq!(ks.score(0).unwrap().rational().unwrap(), &ratio(91, 500));
        assert_eq!(ks.score(3).unwrap().rational().unwrap(), &ratio(1, 5));
        // float mode agrees
        let kf = kernel_scores(&h, &p, &[0, 3], Mode::Float { tol: 1e-12 }).unwrap();
        assert!((kf.score(0).unwrap().to_f64() - 0.182).abs() < 1e-10);
        assert!((kf.score(3).unwrap().to_f64() - 0.2).abs() < 1e-10);
    }

    #[test]
    fn full_kernel_scores_match_exact_pagerank() {
        let g = DirectedGraph::new(4, [(0, 1), (1, 2), (2, 0), (3, 1), (2, 3)]).unwrap();
        let p = params((1, 2), (0, 1));
        let h = VisitSubgraph::induced(&g, g.nodes()).unwrap();
        let ks = kernel_scores(&h, &p, &[0, 1, 2, 3], Mode::Rational).unwrap();
        let exact = crate::pagerank::exact_pagerank(&g, &p, Mode::Rational).unwrap();
        for v in g.nodes() {
            assert_eq!(ks.score(v).unwrap().rational().unwrap(), exact.rational(v).unwrap());
        }
    }

    #[test]
    fn kernel_node_fed_only_by_frontier_keeps_restart_mass() {
        // kernel {2}, parents 0 and 1 in the frontier, no self-loop
        let g = DirectedGraph::new(3, [(0, 2), (1, 2)]).unwrap();
        let h = VisitSubgraph::induced(&g, [2]).unwrap();
        let p = params((1, 2), (0, 1));
        let ks = kernel_scores(&h, &p, &[2], Mode::Rational).unwrap();
        assert_eq!(ks.score(2).unwrap().rational().unwrap(), &ratio(1, 6));
    }

    #[test]
    fn target_outside_kernel_is_rejected() {
        let h = two_target_view();
        let p = params((3, 10), (0, 1));
        assert!(matches!(
            kernel_scores(&h, &p, &[2], Mode::Rational),
            Err(Error::TargetNotInKernel(2))
        ));
    }

    #[test]
    fn example_view_fails_both_orders() {
        let h = two_target_view();
        let p = params((3, 10), (0, 1));
        let uv = verify_ranking_subgraph(&h, 0, 3, &p).unwrap();
        assert_eq!(uv.failure, Some(VerdictFailure::ScoreRatio));
        let vu = verify_ranking_subgraph(&h, 3, 0, &p).unwrap();
        assert_eq!(vu.failure, Some(VerdictFailure::FrontierInflow { witness: 2 }));
    }

    #[test]
    fn empty_frontier_with_separated_scores_passes() {
        let g = DirectedGraph::new(3, [(0, 0), (1, 0), (2, 2)]).unwrap();
        let h = VisitSubgraph::induced(&g, [0, 1, 2]).unwrap();
        let p = params((1, 2), (1, 4));
        let verdict = verify_ranking_subgraph(&h, 0, 2, &p).unwrap();
        assert!(verdict.is_ranking_subgraph());
        // and the reverse order fails on scores alone
        let rev = verify_ranking_subgraph(&h, 2, 0, &p).unwrap();
        assert_eq!(rev.failure, Some(VerdictFailure::ScoreRatio));
    }

    #[test]
    fn boundary_ratio_passes_condition_one_in_both_orders() {
        // score ratio exactly 1 + eps: the >= of condition 1 admits
        // both orders, matching the test's closed inequality
        let g = DirectedGraph::new(3, [(0, 0), (1, 0), (2, 2)]).unwrap();
        let h = VisitSubgraph::induced(&g, [0, 1, 2]).unwrap();
        let p = params((1, 2), (1, 2));
        assert!(verify_ranking_subgraph(&h, 0, 2, &p).unwrap().is_ranking_subgraph());
        assert!(verify_ranking_subgraph(&h, 2, 0, &p).unwrap().is_ranking_subgraph());
    }

    /// Two stars: u = 0 with orphan parents 1, 2; v = 3 with orphan
    /// parent 4; both targets self-looped.
    fn two_star() -> DirectedGraph {
        DirectedGraph::new(5, [(0, 0), (1, 0), (2, 0), (3, 3), (4, 3)]).unwrap()
    }

    #[test]
    fn two_star_partial_kernel_is_a_ranking_subgraph() {
        let g = two_star();
        let p = params((1, 2), (0, 1));
        let h = VisitSubgraph::induced(&g, [0, 1, 3, 4]).unwrap();
        let verdict = verify_ranking_subgraph(&h, 0, 3, &p).unwrap();
        assert!(verdict.is_ranking_subgraph());
    }

    #[test]
    fn witness_flips_a_score_ratio_failure() {
        let h = two_target_view();
        let p = params((3, 10), (0, 1));
        let verdict = verify_ranking_subgraph(&h, 0, 3, &p).unwrap();
        let w = adversarial_witness(&h, &verdict, &p, DEFAULT_WITNESS_CAP).unwrap();
        // compatible with the view...
        let relabeled = h.relabel(&w.node_map).unwrap();
        assert!(relabeled.is_compatible_with(&w.graph).unwrap());
        // ...and the exact ranking contradicts u above v
        let scores = crate::pagerank::exact_pagerank(&w.graph, &p, Mode::Rational).unwrap();
        let u = scores.rational(w.node_map[&0]).unwrap();
        let v = scores.rational(w.node_map[&3]).unwrap();
        assert!(v > &(u * p.one_plus_epsilon()));
    }

    #[test]
    fn witness_flips_a_frontier_inflow_failure() {
        let h = two_target_view();
        let p = params((3, 10), (0, 1));
        let verdict = verify_ranking_subgraph(&h, 3, 0, &p).unwrap();
        assert_eq!(verdict.failure, Some(VerdictFailure::FrontierInflow { witness: 2 }));
        let w = adversarial_witness(&h, &verdict, &p, DEFAULT_WITNESS_CAP).unwrap();
        let relabeled = h.relabel(&w.node_map).unwrap();
        assert!(relabeled.is_compatible_with(&w.graph).unwrap());
        let scores = crate::pagerank::exact_pagerank(&w.graph, &p, Mode::Rational).unwrap();
        let u = scores.rational(w.node_map[&0]).unwrap();
        let v = scores.rational(w.node_map[&3]).unwrap();
        assert!(u > &(v * p.one_plus_epsilon()));
    }

    #[test]
    fn witness_requires_a_failure() {
        let g = two_star();
        let p = params((1, 2), (0, 1));
        let h = VisitSubgraph::induced(&g, [0, 1, 3, 4]).unwrap();
        let verdict = verify_ranking_subgraph(&h, 0, 3, &p).unwrap();
        assert!(matches!(
            adversarial_witness(&h, &verdict, &p, DEFAULT_WITNESS_CAP),
            Err(Error::NoFailingCondition)
        ));
    }

    #[test]
    fn min_search_on_the_two_star() {
        let g = two_star();
        let p = params((1, 2), (0, 1));
        let found = min_ranking_subgraph(&g, &[0, 3], &p, &MinSearchOptions::default())
            .unwrap()
            .expect("a full kernel always qualifies");
        assert_eq!(found.kernel_size, 4);
        assert_eq!(found.kernel, vec![0, 1, 3, 4]);
    }

    #[test]
    fn min_search_decision_variant_reports_not_found() {
        let g = two_star();
        let p = params((1, 2), (0, 1));
        let opts = MinSearchOptions { max_kernel_size: Some(3), ..Default::default() };
        assert_eq!(min_ranking_subgraph(&g, &[0, 3], &p, &opts).unwrap(), None);
    }

    #[test]
    fn min_search_budget_is_enforced() {
        let g = two_star();
        let p = params((1, 2), (0, 1));
        let opts = MinSearchOptions { node_budget: 3, ..Default::default() };
        assert!(matches!(
            min_ranking_subgraph(&g, &[0, 3], &p, &opts),
            Err(Error::SearchBudgetExceeded { .. })
        ));
    }

    #[test]
    fn full_kernel_always_qualifies() {
        let g = DirectedGraph::new(6, [(0, 0), (1, 0), (2, 1), (3, 3), (4, 3), (5, 2)]).unwrap();
        let p = params((2, 5), (1, 10));
        let all: Vec<NodeId> = g.nodes().collect();
        let h = VisitSubgraph::induced(&g, all).unwrap();
        let scores = crate::pagerank::exact_pagerank(&g, &p, Mode::Rational).unwrap();
        let outcome = epsilon_ranking(&scores, &[0, 3], &p).unwrap();
        let (hi, lo) = (outcome.order[0], outcome.order[1]);
        assert!(verify_ranking_subgraph(&h, hi, lo, &p).unwrap().is_ranking_subgraph());
    }

    #[test]
    fn combinations_enumerate_in_lex_order() {
        let mut c = Combinations::new(4, 2);
        let mut all = Vec::new();
        while let Some(x) = c.next() {
            all.push(x);
        }
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut empty = Combinations::new(3, 0);
        assert_eq!(empty.next(), Some(vec![]));
        assert_eq!(empty.next(), None);
    }
}
