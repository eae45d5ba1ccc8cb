//! Sampling-based local ranking over an exploration session.
//!
//! `sample_node` emulates one damped random walk with a random-node
//! query plus random-child queries, returning a node distributed as
//! the (dangling-preprocessed) PageRank law. `sample_rank` repeats it,
//! maintains exact binomial confidence intervals for the targets'
//! scores, and stops once every pair is either clearly separated or
//! clearly within the tie band.

use rand::Rng;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::explore::{ExplorationSession, QueryKind};
use crate::graph::NodeId;
use crate::pagerank::Mode;
use crate::rankgraph::kernel_scores;
use crate::ranking::RankingParams;

fn require_jump_and_crawl(s: &ExplorationSession) -> Result<()> {
    for (kind, name) in [(QueryKind::Jump, "jump"), (QueryKind::Crawl, "crawl")] {
        if !s.model().allows(kind) {
            return Err(Error::ModelViolation { query: name });
        }
    }
    Ok(())
}

/// One damped-walk sample: jump somewhere, then repeatedly return the
/// current node with probability `1 - alpha` or crawl onward, jumping
/// again whenever the walk strands on a node with no children. The
/// returned node is distributed as the hidden graph's PageRank law
/// (rescaled to a probability distribution when dangling nodes eat
/// walk mass).
pub fn sample_node(
    s: &mut ExplorationSession,
    params: &RankingParams,
    rng: &mut impl Rng,
) -> Result<NodeId> {
    require_jump_and_crawl(s)?;
    let alpha = params.alpha_f64();
    let mut current = s.jump()?;
    loop {
        if rng.gen::<f64>() >= alpha {
            return Ok(current);
        }
        current = match s.crawl(current)? {
            Some(child) => child,
            None => s.jump()?,
        };
    }
}

/// Empirical mean queries per `sample_node` call over `calls` runs.
pub fn sample_cost_check(
    s: &mut ExplorationSession,
    params: &RankingParams,
    calls: u64,
    rng: &mut impl Rng,
) -> Result<f64> {
    if calls == 0 {
        return Err(Error::InvalidParameter("need at least one call".into()));
    }
    let before = s.cost();
    for _ in 0..calls {
        sample_node(s, params, rng)?;
    }
    Ok((s.cost() - before) as f64 / calls as f64)
}

/// Two-sided binomial confidence interval for `hits` successes out of
/// `m` trials at the given level, by exact tail inversion
/// (Clopper-Pearson). The boundaries pin to 0 and 1 when `hits` is 0
/// or `m`.
pub fn confidence_interval(hits: u64, m: u64, level: f64) -> Result<(f64, f64)> {
    if m == 0 || hits > m {
        return Err(Error::InvalidParameter(format!("bad sample counts: {hits} hits of {m}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("degenerate confidence level {level}")));
    }
    let half_tail = (1.0 - level) / 2.0;
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(hits as f64, (m - hits + 1) as f64)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .inverse_cdf(half_tail)
    };
    let hi = if hits == m {
        1.0
    } else {
        Beta::new((hits + 1) as f64, (m - hits) as f64)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .inverse_cdf(1.0 - half_tail)
    };
    Ok((lo, hi))
}

/// Geometric checkpoint grid: the stopping rule is evaluated at
/// `first_checkpoint`, then every `growth` factor, rather than on
/// every sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleSchedule {
    pub first_checkpoint: u64,
    pub growth: f64,
}

impl Default for SampleSchedule {
    fn default() -> Self {
        Self { first_checkpoint: 64, growth: 1.2 }
    }
}

impl SampleSchedule {
    fn next_after(&self, m: u64) -> u64 {
        ((m as f64 * self.growth).ceil() as u64).max(m + 1)
    }
}

/// Point estimate and confidence interval for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEstimate {
    pub target: NodeId,
    pub hits: u64,
    pub samples: u64,
    pub point: f64,
    pub interval: (f64, f64),
}

/// How a pair of targets stood at the final checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairResolution {
    DisjointIntervals,
    TieBand,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Resolved,
    BudgetExceeded,
}

#[derive(Debug, Clone)]
pub struct SampleRunStats {
    pub targets: Vec<NodeId>,
    /// Walk samples drawn.
    pub samples: u64,
    /// Oracle queries billed (at least one per sample).
    pub queries: u64,
    pub estimates: Vec<ScoreEstimate>,
    /// Targets by descending point estimate; ties keep target order.
    pub ranking: Vec<NodeId>,
    pub outcome: RunOutcome,
    pub pair_stops: Vec<((NodeId, NodeId), PairResolution)>,
}

fn pair_resolution(a: &ScoreEstimate, b: &ScoreEstimate, one_plus_eps: f64) -> PairResolution {
    let (alo, ahi) = a.interval;
    let (blo, bhi) = b.interval;
    if ahi < blo || bhi < alo {
        return PairResolution::DisjointIntervals;
    }
    // either upper end within 1 + eps of the other lower end
    if ahi <= one_plus_eps * blo || bhi <= one_plus_eps * alo {
        return PairResolution::TieBand;
    }
    PairResolution::Unresolved
}

/// Repeated walk sampling with interval-based stopping.
///
/// Samples until, for every pair of targets, the confidence intervals
/// are disjoint or one upper end sits within `1 + epsilon` of the
/// other lower end; returns the point-estimate ranking. Intervals are
/// exact binomial at level `1 - eta/(2k)` — half the nominal per-target
/// budget funds the repeated looks of the checkpoint grid. A hard
/// query budget turns potential stalls (true ratio at the tie
/// boundary) into a reported outcome instead of a hang.
pub fn sample_rank(
    s: &mut ExplorationSession,
    targets: &[NodeId],
    params: &RankingParams,
    eta: f64,
    schedule: SampleSchedule,
    max_queries: u64,
    rng: &mut impl Rng,
) -> Result<SampleRunStats> {
    require_jump_and_crawl(s)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence parameter must be in (0,1), got {eta}"
        )));
    }
    if targets.is_empty() {
        return Err(Error::BadTargets);
    }
    let k = targets.len();
    let level = 1.0 - eta / (2.0 * k as f64);
    let one_plus_eps = 1.0 + params.epsilon_f64();
    let cost0 = s.cost();
    let mut hits = vec![0u64; k];
    let mut samples = 0u64;
    let mut checkpoint = schedule.first_checkpoint.max(1);

    let estimates_at = |hits: &[u64], samples: u64| -> Result<Vec<ScoreEstimate>> {
        targets
            .iter()
            .zip(hits)
            .map(|(&t, &h)| {
                let (point, interval) = if samples == 0 {
                    (0.0, (0.0, 1.0))
                } else {
                    (h as f64 / samples as f64, confidence_interval(h, samples, level)?)
                };
                Ok(ScoreEstimate { target: t, hits: h, samples, point, interval })
            })
            .collect()
    };

    let finish = |estimates: Vec<ScoreEstimate>, samples: u64, queries: u64, outcome: RunOutcome| {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            estimates[b].point.partial_cmp(&estimates[a].point).unwrap_or(std::cmp::Ordering::Equal)
        });
        let ranking: Vec<NodeId> = order.into_iter().map(|i| targets[i]).collect();
        let mut pair_stops = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                pair_stops.push((
                    (targets[i], targets[j]),
                    pair_resolution(&estimates[i], &estimates[j], one_plus_eps),
                ));
            }
        }
        SampleRunStats {
            targets: targets.to_vec(),
            samples,
            queries,
            estimates,
            ranking,
            outcome,
            pair_stops,
        }
    };

    loop {
        while samples < checkpoint {
            if s.cost() - cost0 >= max_queries {
                let estimates = estimates_at(&hits, samples)?;
                let queries = s.cost() - cost0;
                return Ok(finish(estimates, samples, queries, RunOutcome::BudgetExceeded));
            }
            let node = sample_node(s, params, rng)?;
            samples += 1;
            if let Some(i) = targets.iter().position(|&t| t == node) {
                hits[i] += 1;
            }
        }
        let estimates = estimates_at(&hits, samples)?;
        let resolved = (0..k).all(|i| {
            ((i + 1)..k).all(|j| {
                pair_resolution(&estimates[i], &estimates[j], one_plus_eps)
                    != PairResolution::Unresolved
            })
        });
        if resolved {
            let queries = s.cost() - cost0;
            return Ok(finish(estimates, samples, queries, RunOutcome::Resolved));
        }
        checkpoint = schedule.next_after(checkpoint);
    }
}

/// Queries the full ancestor closure of the targets with neighborhood
/// queries and ranks them by exact restricted scores. Touches every
/// ancestor, so the cost grows with the ancestor count; in exchange
/// the ranking is always score-correct.
pub fn explore_ancestors_and_rank(
    s: &mut ExplorationSession,
    targets: &[NodeId],
    params: &RankingParams,
) -> Result<Vec<NodeId>> {
    let mut queue: Vec<NodeId> = targets.to_vec();
    let mut seen: std::collections::BTreeSet<NodeId> = queue.iter().copied().collect();
    while let Some(v) = queue.pop() {
        let r = s.links(v)?;
        for p in r.parents {
            if seen.insert(p) {
                queue.push(p);
            }
        }
    }
    let view = s.linked_view()?;
    // all ancestors are kernel nodes, so the restricted scores carry
    // exactly the targets' full contribution mass up to the common
    // restart normalization
    let ks = kernel_scores(&view, params, targets, Mode::Rational)?;
    let mut order: Vec<NodeId> = targets.to_vec();
    order.sort_by(|&a, &b| {
        let sa = ks.score(a).expect("target in kernel");
        let sb = ks.score(b).expect("target in kernel");
        sb.rational().unwrap().cmp(sa.rational().unwrap())
    });
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EludePath {
    /// The instance looked like the two-star family and every sampled
    /// parent checked out; ranking returned without full exploration.
    Shortcut,
    /// Topology mismatch or a suspicious parent: full ancestor
    /// exploration decided the ranking exactly.
    Fallback,
}

#[derive(Debug, Clone)]
pub struct EludeOutcome {
    /// The two targets in returned rank order.
    pub ranking: Vec<NodeId>,
    pub path: EludePath,
    /// On the shortcut path, the one parent of the second target that
    /// was deliberately left unqueried.
    pub skipped_parent: Option<NodeId>,
}

fn non_self(ids: &[NodeId], me: NodeId) -> Vec<NodeId> {
    ids.iter().copied().filter(|&x| x != me).collect()
}

/// Confidence-`1 - eta` ranking of a two-target instance that, on the
/// two-star family with `m = ceil(1/eta)`, answers without ever
/// holding a view that could certify the ranking: it checks all
/// parents of `u` but deliberately skips one random parent of `v`.
/// Any deviation it notices drops to exhaustive ancestor exploration,
/// which is always correct; a deviation hiding exactly in the skipped
/// parent (probability `1/m`) goes unnoticed.
pub fn elude_rs(
    s: &mut ExplorationSession,
    u: NodeId,
    v: NodeId,
    params: &RankingParams,
    eta: f64,
    rng: &mut impl Rng,
) -> Result<EludeOutcome> {
    if !s.model().allows(QueryKind::Links) {
        return Err(Error::ModelViolation { query: "links" });
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence parameter must be in (0,1), got {eta}"
        )));
    }
    let m = (1.0 / eta).ceil() as usize;

    let lu = s.links(u)?;
    let lv = s.links(v)?;
    // self-loops count as neither parents nor children here
    let u_parents = non_self(&lu.parents, u);
    let v_parents = non_self(&lv.parents, v);
    let topology_matches = u_parents.len() == m + 1
        && non_self(&lu.children, u).is_empty()
        && v_parents.len() == m
        && non_self(&lv.children, v).is_empty();

    if topology_matches {
        let skip_idx = rng.gen_range(0..v_parents.len());
        let skipped = v_parents[skip_idx];
        let mut all_clean = true;
        'check: for (list, target) in [(&u_parents, u), (&v_parents, v)] {
            for &p in list.iter() {
                if target == v && p == skipped {
                    continue;
                }
                let lp = s.links(p)?;
                if !(lp.parents.is_empty() && lp.children == vec![target]) {
                    all_clean = false;
                    break 'check;
                }
            }
        }
        if all_clean {
            return Ok(EludeOutcome {
                ranking: vec![u, v],
                path: EludePath::Shortcut,
                skipped_parent: Some(skipped),
            });
        }
    }

    let ranking = explore_ancestors_and_rank(s, &[u, v], params)?;
    Ok(EludeOutcome { ranking, path: EludePath::Fallback, skipped_parent: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::QueryModel;
    use crate::graph::DirectedGraph;
    use crate::numeric::ratio;
    use crate::pagerank::exact_pagerank;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: (i64, i64), eps: (i64, i64)) -> RankingParams {
        RankingParams::new(ratio(alpha.0, alpha.1), ratio(eps.0, eps.1)).unwrap()
    }

    #[test]
    fn single_self_loop_always_sampled() {
        let g = DirectedGraph::new(1, [(0, 0)]).unwrap();
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = params((1, 2), (0, 1));
        for _ in 0..20 {
            assert_eq!(sample_node(&mut s, &p, &mut rng).unwrap(), s.targets()[0]);
        }
    }

    #[test]
    fn sampling_law_matches_rescaled_scores_on_dangling_pair() {
        // a -> b with b dangling at alpha = 1/2: raw scores 1/4 and
        // 3/8 rescale to 0.4 / 0.6 once the stranded walk restarts
        let g = DirectedGraph::new(2, [(0, 1)]).unwrap();
        let p = params((1, 2), (0, 1));
        let mut s =
            ExplorationSession::open(&g, &[0, 1], QueryModel::jump_and_crawl(), 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let trials = 100_000usize;
        let mut hits_b = 0usize;
        let b = s.targets()[1];
        for _ in 0..trials {
            if sample_node(&mut s, &p, &mut rng).unwrap() == b {
                hits_b += 1;
            }
        }
        let f = hits_b as f64 / trials as f64;
        let sigma = (0.6 * 0.4 / trials as f64).sqrt();
        assert!((f - 0.6).abs() < 5.0 * sigma, "frequency {f} too far from 0.6");
    }

    #[test]
    fn three_cycle_sampling_is_uniform() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let p = params((1, 2), (0, 1));
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 23).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let trials = 30_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..trials {
            *counts.entry(sample_node(&mut s, &p, &mut rng).unwrap()).or_insert(0usize) += 1;
        }
        let sigma = (2.0 / 9.0 / trials as f64).sqrt();
        for (_, &c) in &counts {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 3.0).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn cost_stays_under_the_bound() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        for (a, bound) in [((1i64, 2i64), 4.0), ((17, 20), 2.0 / 0.15)] {
            let p = params(a, (0, 1));
            let mut s =
                ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 31).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(32);
            let mean = sample_cost_check(&mut s, &p, 10_000, &mut rng).unwrap();
            assert!(mean <= bound, "mean {mean} exceeds bound {bound}");
            assert!(mean >= 1.0);
        }
    }

    #[test]
    fn interval_boundaries_and_midpoint() {
        let (lo, _) = confidence_interval(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        let (_, hi) = confidence_interval(10, 10, 0.95).unwrap();
        assert_eq!(hi, 1.0);
        let (lo, hi) = confidence_interval(50, 100, 0.95).unwrap();
        assert!((lo - 0.398).abs() < 2e-3, "lo = {lo}");
        assert!((hi - 0.602).abs() < 2e-3, "hi = {hi}");
        assert!(confidence_interval(5, 0, 0.95).is_err());
        assert!(confidence_interval(5, 10, 1.0).is_err());
    }

    #[test]
    fn intervals_shrink_with_more_samples() {
        let mut last = 1.0;
        for m in [40u64, 200, 1000] {
            let (lo, hi) = confidence_interval(m / 4, m, 0.99).unwrap();
            let width = hi - lo;
            assert!(width < last);
            last = width;
        }
    }

    #[test]
    fn single_target_resolves_immediately() {
        let g = DirectedGraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let p = params((1, 2), (1, 2));
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::jump_and_crawl(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let targets = s.targets().to_vec();
        let stats =
            sample_rank(&mut s, &targets, &p, 0.1, SampleSchedule::default(), 1 << 30, &mut rng)
                .unwrap();
        assert_eq!(stats.outcome, RunOutcome::Resolved);
        assert_eq!(stats.ranking, targets);
        assert_eq!(stats.samples, 64);
    }

    #[test]
    fn separated_pair_is_ranked_correctly_most_of_the_time() {
        // star on u with 4 parents vs lone self-loop v: clear separation
        let g = DirectedGraph::new(7, [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 5)]).unwrap();
        let p = params((1, 2), (1, 2));
        let scores = exact_pagerank(&g, &p, crate::pagerank::Mode::Rational).unwrap();
        let mut correct = 0;
        let trials = 60;
        for seed in 0..trials {
            let mut s =
                ExplorationSession::open(&g, &[0, 5], QueryModel::jump_and_crawl(), seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E3779B97F4A7C15);
            let targets = s.targets().to_vec();
            let stats = sample_rank(
                &mut s,
                &targets,
                &p,
                0.1,
                SampleSchedule::default(),
                1 << 30,
                &mut rng,
            )
            .unwrap();
            assert_eq!(stats.outcome, RunOutcome::Resolved);
            // map back to hidden ids for judging
            let hidden: Vec<NodeId> =
                stats.ranking.iter().map(|&e| s.internal_of_external(e).unwrap()).collect();
            if crate::ranking::is_valid_ranking(&scores, &hidden, &p).unwrap() {
                correct += 1;
            }
        }
        assert!(correct >= trials - 6, "only {correct}/{trials} correct");
    }

    #[test]
    fn equal_scores_stop_via_tie_band() {
        let g = DirectedGraph::new(2, [(0, 0), (1, 1)]).unwrap();
        let p = params((1, 2), (1, 2));
        let mut s =
            ExplorationSession::open(&g, &[0, 1], QueryModel::jump_and_crawl(), 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let targets = s.targets().to_vec();
        let stats =
            sample_rank(&mut s, &targets, &p, 0.1, SampleSchedule::default(), 1 << 30, &mut rng)
                .unwrap();
        assert_eq!(stats.outcome, RunOutcome::Resolved);
        assert_eq!(stats.pair_stops[0].1, PairResolution::TieBand);
    }

    #[test]
    fn budget_exhaustion_is_reported_not_crashed() {
        let g = DirectedGraph::new(2, [(0, 0), (1, 1)]).unwrap();
        let p = params((1, 2), (0, 1));
        let mut s = ExplorationSession::open(&g, &[0, 1], QueryModel::jump_and_crawl(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let targets = s.targets().to_vec();
        let stats = sample_rank(&mut s, &targets, &p, 0.1, SampleSchedule::default(), 10, &mut rng)
            .unwrap();
        assert_eq!(stats.outcome, RunOutcome::BudgetExceeded);
        assert!(stats.queries >= 10);
    }

    #[test]
    fn model_gating() {
        let g = DirectedGraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let p = params((1, 2), (0, 1));
        let mut s = ExplorationSession::open(&g, &[0], QueryModel::links_only(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(matches!(sample_node(&mut s, &p, &mut rng), Err(Error::ModelViolation { .. })));
    }

    fn eluders_graph(m: usize) -> DirectedGraph {
        // u = 0, v = 1, m+1 orphan parents of u, m orphan parents of v
        let mut arcs = vec![(0, 0), (1, 1)];
        let mut next = 2;
        for _ in 0..=m {
            arcs.push((next, 0));
            next += 1;
        }
        for _ in 0..m {
            arcs.push((next, 1));
            next += 1;
        }
        DirectedGraph::new(next, arcs).unwrap()
    }

    #[test]
    fn shortcut_taken_on_the_two_star_instance() {
        let m = 10;
        let g = eluders_graph(m);
        let p = params((1, 2), (0, 1));
        for seed in 0..50 {
            let mut s =
                ExplorationSession::open(&g, &[0, 1], QueryModel::links_only(), seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let (u, v) = (s.targets()[0], s.targets()[1]);
            let out = elude_rs(&mut s, u, v, &p, 0.1, &mut rng).unwrap();
            assert_eq!(out.path, EludePath::Shortcut);
            assert_eq!(out.ranking, vec![u, v]);
            // one parent of v stays unqueried
            let skipped = out.skipped_parent.unwrap();
            assert!(!s.linked().contains(&skipped));
        }
    }

    #[test]
    fn structurally_different_graph_falls_back_to_exact() {
        // v outranks u here: u has 2 parents, v has 6
        let mut arcs = vec![(0, 0), (1, 1)];
        for p in 2..4 {
            arcs.push((p, 0));
        }
        for p in 4..10 {
            arcs.push((p, 1));
        }
        let g = DirectedGraph::new(10, arcs).unwrap();
        let p = params((1, 2), (0, 1));
        let mut s = ExplorationSession::open(&g, &[0, 1], QueryModel::links_only(), 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (u, v) = (s.targets()[0], s.targets()[1]);
        let out = elude_rs(&mut s, u, v, &p, 0.4, &mut rng).unwrap();
        assert_eq!(out.path, EludePath::Fallback);
        assert_eq!(out.ranking, vec![v, u]);
    }

    #[test]
    fn perturbed_parent_is_missed_at_rate_one_over_m() {
        // one parent of v gains an extra child: the shortcut fires only
        // when that parent is exactly the skipped one
        let m = 5;
        let g = eluders_graph(m);
        let perturbed_parent = (2 + m + 1) as NodeId; // first parent of v
        let extra = g.node_count();
        let mut arcs: Vec<_> = g.arcs().to_vec();
        arcs.push((perturbed_parent, extra));
        let g = DirectedGraph::new(extra + 1, arcs).unwrap();
        let p = params((1, 2), (0, 1));
        let trials = 2000u64;
        let mut missed = 0u64;
        for seed in 0..trials {
            let mut s =
                ExplorationSession::open(&g, &[0, 1], QueryModel::links_only(), seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xDEADBEEF);
            let (u, v) = (s.targets()[0], s.targets()[1]);
            let out = elude_rs(&mut s, u, v, &p, 1.0 / m as f64, &mut rng).unwrap();
            match out.path {
                EludePath::Shortcut => {
                    missed += 1;
                    assert_eq!(
                        out.skipped_parent.unwrap(),
                        s.external_of_internal(perturbed_parent).unwrap()
                    );
                }
                EludePath::Fallback => {
                    assert_eq!(out.ranking, vec![u, v]);
                }
            }
        }
        let rate = missed as f64 / trials as f64;
        let expect = 1.0 / m as f64;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((rate - expect).abs() < 5.0 * sigma, "miss rate {rate} vs {expect}");
    }
}
