//! Constructors for the adversarial graph families and the reductions
//! from clique and dominating-set problems.
//!
//! Every generator performs a structural audit at construction — the
//! realized parent, chain and sink counts must match what it declares —
//! and exposes an exact score audit that recomputes the targets' scores
//! two ways: a global rational solve of the built graph against the
//! per-block closed forms implied by the declared counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::numeric::{from_int, pow, ratio, round_to_nonneg_integer, round_to_positive_integer};
use crate::pagerank::{exact_pagerank, Mode};
use crate::ranking::RankingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Disjoint blocks of bulk parents plus padding cliques; separations
    /// tuned by extra bulk parents or a fractional parent.
    DetLb,
    /// Chain-damped parent blocks whose ranking hides in one strong
    /// ancestor's parent count; defeats purely local exploration.
    McLocalLb,
    /// Wide parent blocks with sink-padded out-degrees; defeats every
    /// query mix up to the sampling cost of the rarest target.
    McGlobalLb,
    /// Two-star instance with one parent more on the first target.
    Eluders,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::DetLb => "det_lb",
            Family::McLocalLb => "mc_local_lb",
            Family::McGlobalLb => "mc_global_lb",
            Family::Eluders => "eluders",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "det_lb" => Some(Family::DetLb),
            "mc_local_lb" => Some(Family::McLocalLb),
            "mc_global_lb" => Some(Family::McGlobalLb),
            "eluders" => Some(Family::Eluders),
            _ => None,
        }
    }
}

/// Declared structure, per family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyData {
    DetLb {
        /// Bulk-parent count per block (the last one may carry the +1).
        bulk_counts: Vec<u64>,
        clique_size: u64,
        /// Fan-out of each block's fractional parent into the clique,
        /// when the block needed one.
        fractional_q: Vec<Option<u64>>,
    },
    McLocalLb {
        /// Chain length counting the target itself.
        chain_len: u64,
        bulk_parents: u64,
        /// Orphan-parent count of each block's strong ancestor.
        strong_parent_counts: Vec<u64>,
    },
    McGlobalLb {
        /// Extension chain length (zero unless the requested score is
        /// below the sampling floor).
        chain_len: u64,
        parents_per_block: u64,
        ordinary_out_degree: u64,
        strong_parent_counts: Vec<u64>,
    },
    Eluders {
        parent_count: u64,
    },
}

/// A generated graph with its targets and declared ground truth.
#[derive(Debug, Clone)]
pub struct InstanceBundle {
    pub graph: DirectedGraph,
    /// Targets in ascending declared-score order.
    pub targets: Vec<NodeId>,
    pub family: Family,
    /// Damping factor plus the declared separation.
    pub params: RankingParams,
    /// The score scale the caller asked for, when the family takes one.
    pub requested_p: Option<BigRational>,
    /// Effective base score: the exact closed-form score of the first
    /// target. Realized block scores track `declared_p * (1+eps)^(i-1)`.
    pub declared_p: BigRational,
    pub m: u64,
    pub data: FamilyData,
}

/// Exact audit outcome, for display and experiment logs.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub target_scores: Vec<f64>,
    pub adjacent_ratios: Vec<f64>,
    pub p_effective: f64,
}

impl InstanceBundle {
    pub fn k(&self) -> usize {
        self.targets.len()
    }

    /// Renames every node; audits must still pass on the result.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<InstanceBundle> {
        let graph = self.graph.relabel(perm)?;
        let targets = self.targets.iter().map(|&t| perm[t]).collect();
        Ok(InstanceBundle { graph, targets, ..self.clone() })
    }

    /// Flat key=value sidecar record.
    pub fn metadata(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("family", self.family.tag().to_string());
        put("k", self.k().to_string());
        put("m", self.m.to_string());
        put("alpha", self.params.alpha().to_string());
        put("epsilon", self.params.epsilon().to_string());
        if let Some(p) = &self.requested_p {
            put("p_requested", p.to_string());
        }
        put("p_declared", self.declared_p.to_string());
        put("n", self.graph.node_count().to_string());
        put("targets", join(&self.targets));
        match &self.data {
            FamilyData::DetLb { bulk_counts, clique_size, fractional_q } => {
                put("bulk_counts", join(bulk_counts));
                put("clique_size", clique_size.to_string());
                let q: Vec<String> = fractional_q
                    .iter()
                    .map(|q| q.map(|v| v.to_string()).unwrap_or_else(|| "-".into()))
                    .collect();
                put("fractional_q", q.join(" "));
            }
            FamilyData::McLocalLb { chain_len, bulk_parents, strong_parent_counts } => {
                put("chain_len", chain_len.to_string());
                put("bulk_parents", bulk_parents.to_string());
                put("strong_parent_counts", join(strong_parent_counts));
            }
            FamilyData::McGlobalLb {
                chain_len,
                parents_per_block,
                ordinary_out_degree,
                strong_parent_counts,
            } => {
                put("chain_len", chain_len.to_string());
                put("parents_per_block", parents_per_block.to_string());
                put("ordinary_out_degree", ordinary_out_degree.to_string());
                put("strong_parent_counts", join(strong_parent_counts));
            }
            FamilyData::Eluders { parent_count } => {
                put("parent_count", parent_count.to_string());
            }
        }
        out
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses a sidecar record back into a flat map.
pub fn parse_metadata(text: &str) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    map
}

fn check_common(k: usize, alpha: &BigRational, m: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::Infeasible(format!("need at least two targets, got k = {k}")));
    }
    if m < 2 {
        return Err(Error::Infeasible(format!("scale parameter must be at least 2, got m = {m}")));
    }
    if alpha <= &BigRational::zero() || alpha >= &BigRational::one() {
        return Err(Error::Infeasible(format!("damping factor {alpha} outside (0,1)")));
    }
    Ok(())
}

fn check_p(p: &BigRational) -> Result<()> {
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(Error::Infeasible(format!("score parameter {p} outside (0,1)")));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Deterministic lower-bound family
// ---------------------------------------------------------------------

/// Closed-form arrival weights of an m-clique (complete digraph, no
/// self-loops, out-degrees m-1 except the feeder's m) feeding one arc
/// into an absorbing target: returns (feeder_weight, other_weight).
fn clique_arrival_weights(m: u64, alpha: &BigRational) -> (BigRational, BigRational) {
    let m_rat = from_int(m as i64);
    let m1 = from_int(m as i64 - 1);
    let m2 = from_int(m as i64 - 2);
    // t = m - 1 - alpha (m - 2)
    let t = &m1 - alpha * &m2;
    // feeder = alpha t / (m t - alpha^2 (m-1)), other = alpha feeder / t
    let denom = &m_rat * &t - alpha * alpha * &m1;
    let feeder = alpha * &t / &denom;
    let other = alpha * &feeder / &t;
    (feeder, other)
}

/// Per-block closed-form score numerators (score = weight / n).
fn det_block_weights(
    k: usize,
    alpha: &BigRational,
    m: u64,
    bulk: &[u64],
    fractional_q: &[Option<u64>],
) -> Vec<BigRational> {
    let (feeder_w, other_w) = clique_arrival_weights(m, alpha);
    let clique_total = &feeder_w + &other_w * from_int(m as i64 - 1);
    (0..k)
        .map(|i| {
            let mut w = BigRational::one() + alpha * from_int(bulk[i] as i64);
            if i + 1 < k {
                w += &clique_total;
            }
            if let Some(q) = fractional_q[i] {
                let q_rat = from_int(q as i64);
                w += alpha * (BigRational::one() + &q_rat * &other_w)
                    / (BigRational::one() + &q_rat);
            }
            w
        })
        .collect()
}

/// Blocks of bulk parents with separations following powers of
/// `1 + eps`, padded by an m-clique per block except the last. When
/// rounding collapses two adjacent bulk counts, the last block gains
/// one extra bulk parent and interior blocks gain a fractional parent
/// whose clique fan-out `q` is searched in exact arithmetic until the
/// realized ratio lands in `[1 + eps/2, 1 + 2 eps]`.
pub fn gen_det_lb(
    k: usize,
    alpha: &BigRational,
    p: &BigRational,
    eps: &BigRational,
    m: u64,
) -> Result<InstanceBundle> {
    check_common(k, alpha, m)?;
    check_p(p)?;
    if eps <= &BigRational::zero() {
        return Err(Error::Infeasible("this family needs a positive separation".into()));
    }
    let params = RankingParams::new(alpha.clone(), eps.clone())
        .map_err(|e| Error::Infeasible(e.to_string()))?;
    let one_plus_eps = params.one_plus_epsilon();
    let m_rat = from_int(m as i64);

    let mut bulk: Vec<u64> = (0..k)
        .map(|i| round_to_positive_integer(&(&m_rat * p * pow(&one_plus_eps, i))))
        .collect();
    if bulk[k - 1] == bulk[k - 2] {
        bulk[k - 1] += 1;
    }
    if bulk[k - 1] > m {
        return Err(Error::Infeasible(format!(
            "largest bulk count {} exceeds the block scale m = {m}",
            bulk[k - 1]
        )));
    }

    // fractional parents for interior blocks that tie their predecessor
    let mut fractional_q: Vec<Option<u64>> = vec![None; k];
    let window_lo = BigRational::one() + eps / from_int(2);
    let window_hi = BigRational::one() + eps * from_int(2);
    for i in 1..k - 1 {
        if bulk[i] != bulk[i - 1] {
            continue;
        }
        let mut found = None;
        for q in 2..m {
            fractional_q[i] = Some(q);
            let w = det_block_weights(k, alpha, m, &bulk, &fractional_q);
            let ratio = &w[i] / &w[i - 1];
            if ratio >= window_lo && ratio <= window_hi {
                found = Some(q);
                break;
            }
        }
        match found {
            Some(q) => fractional_q[i] = Some(q),
            None => {
                return Err(Error::Infeasible(format!(
                    "no fractional fan-out in [2, {}] lands block {} in the separation window",
                    m - 1,
                    i + 1
                )))
            }
        }
    }

    // feasibility of every adjacent ratio, in exact arithmetic
    let weights = det_block_weights(k, alpha, m, &bulk, &fractional_q);
    for i in 0..k - 1 {
        let ratio = &weights[i + 1] / &weights[i];
        if ratio < window_lo || ratio > window_hi {
            return Err(Error::Infeasible(format!(
                "adjacent score ratio {} of blocks {}/{} falls outside [{}, {}]",
                ratio,
                i + 2,
                i + 1,
                window_lo,
                window_hi
            )));
        }
    }

    // build the graph
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut targets = Vec::with_capacity(k);
    let mut next = 0usize;
    for i in 0..k {
        let v = next;
        next += 1;
        targets.push(v);
        arcs.push((v, v));
        for _ in 0..bulk[i] {
            arcs.push((next, v));
            next += 1;
        }
        if i + 1 < k {
            let clique: Vec<NodeId> = (next..next + m as usize).collect();
            next += m as usize;
            for &a in &clique {
                for &b in &clique {
                    if a != b {
                        arcs.push((a, b));
                    }
                }
            }
            arcs.push((clique[0], v));
            if let Some(q) = fractional_q[i] {
                let f = next;
                next += 1;
                arcs.push((f, v));
                for &c in clique.iter().skip(1).take(q as usize) {
                    arcs.push((f, c));
                }
            }
        } else if let Some(q) = fractional_q[i] {
            // interior blocks only; the last block never carries one
            unreachable!("fractional parent {q} assigned to the last block");
        }
    }
    let graph = DirectedGraph::new(next, arcs)?;
    let n = from_int(graph.node_count() as i64);
    let declared_p = &weights[0] / &n;

    let bundle = InstanceBundle {
        graph,
        targets,
        family: Family::DetLb,
        params,
        requested_p: Some(p.clone()),
        declared_p,
        m,
        data: FamilyData::DetLb { bulk_counts: bulk, clique_size: m, fractional_q },
    };
    audit_structure(&bundle)?;
    Ok(bundle)
}

// ---------------------------------------------------------------------
// Local-queries-only Monte Carlo lower-bound family
// ---------------------------------------------------------------------

/// Per block: the target sits at the end of a chain whose length damps
/// its parents' mass down to the requested score scale; m parents feed
/// the chain head, and one of them — the strong ancestor — carries the
/// block's rank in its hidden orphan-parent count.
pub fn gen_mc_local_lb(
    k: usize,
    alpha: &BigRational,
    p: &BigRational,
    eps: &BigRational,
    m: u64,
) -> Result<InstanceBundle> {
    check_common(k, alpha, m)?;
    check_p(p)?;
    if eps < &BigRational::zero() {
        return Err(Error::Infeasible("separation must be nonnegative".into()));
    }
    let params = RankingParams::new(alpha.clone(), eps.clone())
        .map_err(|e| Error::Infeasible(e.to_string()))?;
    let one_plus_eps = params.one_plus_epsilon();

    // chain length: log_alpha p rounded, counting the target itself
    let chain_len = {
        let l = p.to_f64().unwrap().ln() / alpha.to_f64().unwrap().ln();
        round_to_positive_integer(&BigRational::from_float(l).unwrap_or_else(BigRational::one))
    };
    let strong_counts: Vec<u64> = (0..k)
        .map(|i| {
            let extra = (pow(&one_plus_eps, i) - BigRational::one()) * from_int(m as i64) / alpha;
            round_to_nonneg_integer(&extra)
        })
        .collect();
    let weights: Vec<BigRational> =
        strong_counts.iter().map(|&s| mc_local_weight(alpha, chain_len, m, s)).collect();
    check_progression_feasible(&weights, &one_plus_eps)?;

    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut targets = Vec::with_capacity(k);
    let mut next = 0usize;
    for strong_parents in strong_counts.iter() {
        let v = next;
        next += 1;
        targets.push(v);
        arcs.push((v, v));
        let mut head = v;
        for _ in 1..chain_len {
            arcs.push((next, head));
            head = next;
            next += 1;
        }
        let strong = next;
        for _ in 0..m {
            arcs.push((next, head));
            next += 1;
        }
        for _ in 0..*strong_parents {
            arcs.push((next, strong));
            next += 1;
        }
    }
    let graph = DirectedGraph::new(next, arcs)?;
    let n = from_int(graph.node_count() as i64);
    let declared_p = &mc_local_weight(alpha, chain_len, m, 0) / &n;

    let bundle = InstanceBundle {
        graph,
        targets,
        family: Family::McLocalLb,
        params,
        requested_p: Some(p.clone()),
        declared_p,
        m,
        data: FamilyData::McLocalLb {
            chain_len,
            bulk_parents: m,
            strong_parent_counts: strong_counts,
        },
    };
    audit_structure(&bundle)?;
    Ok(bundle)
}

/// The requested progression is realizable only when the block weights
/// track `w_1 * (1 + eps)^(i-1)` within 10%; the chain's constant
/// score term sinks that whenever the parent layers are too light.
fn check_progression_feasible(weights: &[BigRational], one_plus_eps: &BigRational) -> Result<()> {
    let tenth = ratio(1, 10);
    for (i, w) in weights.iter().enumerate() {
        let expected = &weights[0] * pow(one_plus_eps, i);
        if ((w / &expected) - BigRational::one()).abs() > tenth {
            return Err(Error::Infeasible(format!(
                "block {} weight {} strays more than 10% from the progression {}; \
                 raise the scale parameter or shrink the separation",
                i + 1,
                w,
                expected
            )));
        }
    }
    Ok(())
}

/// Closed-form score numerator of one block.
fn mc_local_weight(alpha: &BigRational, chain_len: u64, m: u64, strong_parents: u64) -> BigRational {
    let mut w = BigRational::zero();
    for j in 0..chain_len {
        w += pow(alpha, j as usize);
    }
    let al = pow(alpha, chain_len as usize);
    w += &al * from_int(m as i64);
    w += &al * alpha * from_int(strong_parents as i64);
    w
}

// ---------------------------------------------------------------------
// All-models Monte Carlo lower-bound family
// ---------------------------------------------------------------------

/// Per block: a wide layer of parents feeds the target, each ordinary
/// parent splitting its mass across exclusive sinks so that the layer
/// realizes the requested score scale; the strong ancestor keeps the
/// target as its sole child and hides the rank in its orphan parents.
/// Below the sampling floor `m^(-2/3)` the block is built at the floor
/// and a chain is inserted between layer and target to damp it down.
pub fn gen_mc_global_lb(
    k: usize,
    alpha: &BigRational,
    p: &BigRational,
    eps: &BigRational,
    m: u64,
) -> Result<InstanceBundle> {
    check_common(k, alpha, m)?;
    check_p(p)?;
    if eps < &BigRational::zero() {
        return Err(Error::Infeasible("separation must be nonnegative".into()));
    }
    let params = RankingParams::new(alpha.clone(), eps.clone())
        .map_err(|e| Error::Infeasible(e.to_string()))?;
    let one_plus_eps = params.one_plus_epsilon();
    let alpha_f = alpha.to_f64().unwrap();
    let p_f = p.to_f64().unwrap();
    let m_f = m as f64;

    // below the floor, build at the floor and damp with a chain
    let below_floor = {
        // p < m^(-2/3)  <=>  p^3 m^2 < 1
        let p3m2 = p * p * p * from_int((m * m) as i64);
        p3m2 < BigRational::one()
    };
    let (p0_f, chain_len) = if below_floor {
        let floor = m_f.powf(-2.0 / 3.0);
        let c = (p_f / floor).ln() / alpha_f.ln();
        let c = round_to_nonneg_integer(
            &BigRational::from_float(c).unwrap_or_else(BigRational::zero),
        );
        (floor, c)
    } else {
        (p_f, 0)
    };

    let parents = round_to_positive_integer(
        &BigRational::from_float(m_f * p0_f.sqrt() / alpha_f).ok_or_else(|| {
            Error::Infeasible("parent count overflows".into())
        })?,
    );
    if parents < 2 {
        return Err(Error::Infeasible(format!(
            "parent layer of {parents} is too thin; raise m or the score scale"
        )));
    }
    let out_degree = round_to_positive_integer(
        &BigRational::from_float(1.0 / p0_f.sqrt()).unwrap_or_else(BigRational::one),
    );
    let p0_rat = BigRational::from_float(p0_f).unwrap();
    let strong_counts: Vec<u64> = (0..k)
        .map(|i| {
            let extra = from_int(m as i64) * &p0_rat * (pow(&one_plus_eps, i) - BigRational::one())
                / (alpha * alpha);
            round_to_nonneg_integer(&extra)
        })
        .collect();
    let weights: Vec<BigRational> = strong_counts
        .iter()
        .map(|&s| mc_global_weight(alpha, chain_len, parents, out_degree, s))
        .collect();
    check_progression_feasible(&weights, &one_plus_eps)?;

    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut targets = Vec::with_capacity(k);
    let mut next = 0usize;
    for strong_parents in strong_counts.iter() {
        let v = next;
        next += 1;
        targets.push(v);
        arcs.push((v, v));
        let mut head = v;
        for _ in 0..chain_len {
            arcs.push((next, head));
            head = next;
            next += 1;
        }
        let strong = next;
        arcs.push((strong, head));
        next += 1;
        for _ in 1..parents {
            let parent = next;
            next += 1;
            arcs.push((parent, head));
            for _ in 1..out_degree {
                arcs.push((parent, next));
                next += 1;
            }
        }
        for _ in 0..*strong_parents {
            arcs.push((next, strong));
            next += 1;
        }
    }
    let graph = DirectedGraph::new(next, arcs)?;
    let n = from_int(graph.node_count() as i64);
    let declared_p = &mc_global_weight(alpha, chain_len, parents, out_degree, 0) / &n;

    let bundle = InstanceBundle {
        graph,
        targets,
        family: Family::McGlobalLb,
        params,
        requested_p: Some(p.clone()),
        declared_p,
        m,
        data: FamilyData::McGlobalLb {
            chain_len,
            parents_per_block: parents,
            ordinary_out_degree: out_degree,
            strong_parent_counts: strong_counts,
        },
    };
    audit_structure(&bundle)?;
    Ok(bundle)
}

fn mc_global_weight(
    alpha: &BigRational,
    chain_len: u64,
    parents: u64,
    out_degree: u64,
    strong_parents: u64,
) -> BigRational {
    let mut w = BigRational::zero();
    for j in 0..=chain_len {
        w += pow(alpha, j as usize);
    }
    let ac1 = pow(alpha, chain_len as usize + 1);
    w += &ac1 * from_int(parents as i64 - 1) / from_int(out_degree as i64);
    w += &ac1;
    w += &ac1 * alpha * from_int(strong_parents as i64);
    w
}

// ---------------------------------------------------------------------
// Two-star family
// ---------------------------------------------------------------------

/// `u` with `m + 1` orphan parents against `v` with `m`; the declared
/// separation is the exact realized one, `alpha / (1 + alpha m)`.
pub fn gen_eluders(m: u64, alpha: &BigRational) -> Result<InstanceBundle> {
    if m < 1 {
        return Err(Error::Infeasible("need at least one parent".into()));
    }
    if alpha <= &BigRational::zero() || alpha >= &BigRational::one() {
        return Err(Error::Infeasible(format!("damping factor {alpha} outside (0,1)")));
    }
    let eps = alpha / (BigRational::one() + alpha * from_int(m as i64));
    let params = RankingParams::new(alpha.clone(), eps).unwrap();

    let mut arcs = vec![(0, 0), (1, 1)];
    let mut next = 2usize;
    for _ in 0..=m {
        arcs.push((next, 0));
        next += 1;
    }
    for _ in 0..m {
        arcs.push((next, 1));
        next += 1;
    }
    let graph = DirectedGraph::new(next, arcs)?;
    let n = from_int(graph.node_count() as i64);
    let declared_p = (BigRational::one() + alpha * from_int(m as i64)) / n;

    let bundle = InstanceBundle {
        graph,
        targets: vec![1, 0], // ascending score order: v then u
        family: Family::Eluders,
        params,
        requested_p: None,
        declared_p,
        m,
        data: FamilyData::Eluders { parent_count: m },
    };
    audit_structure(&bundle)?;
    Ok(bundle)
}

// ---------------------------------------------------------------------
// Structural audits
// ---------------------------------------------------------------------

fn audit_err(msg: String) -> Error {
    Error::Infeasible(format!("structural audit failed: {msg}"))
}

/// Recomputes the declared counts from the topology alone.
pub fn audit_structure(b: &InstanceBundle) -> Result<()> {
    let g = &b.graph;
    for &t in &b.targets {
        g.check_node(t)?;
        if !g.has_arc(t, t) && b.family != Family::McGlobalLb {
            return Err(audit_err(format!("target {t} lacks its self-loop")));
        }
    }
    match &b.data {
        FamilyData::DetLb { bulk_counts, clique_size, fractional_q } => {
            let k = b.targets.len();
            let m = *clique_size;
            let mut accounted = 0usize;
            for (i, &v) in b.targets.iter().enumerate() {
                let mut bulk = 0u64;
                let mut feeders = Vec::new();
                let mut fractional = Vec::new();
                for &z in g.in_neighbors(v) {
                    if z == v {
                        continue;
                    }
                    if g.in_degree(z) > 0 {
                        feeders.push(z);
                    } else if g.out_degree(z) == 1 {
                        bulk += 1;
                    } else {
                        fractional.push(z);
                    }
                }
                if bulk != bulk_counts[i] {
                    return Err(audit_err(format!(
                        "block {} has {bulk} bulk parents, declared {}",
                        i + 1,
                        bulk_counts[i]
                    )));
                }
                accounted += 1 + bulk as usize;
                let wants_clique = i + 1 < k;
                if feeders.len() != usize::from(wants_clique) {
                    return Err(audit_err(format!(
                        "block {} has {} clique feeders",
                        i + 1,
                        feeders.len()
                    )));
                }
                if let Some(&feeder) = feeders.first() {
                    let mut clique: Vec<NodeId> =
                        g.out_neighbors(feeder).iter().copied().filter(|&x| x != v).collect();
                    clique.push(feeder);
                    clique.sort_unstable();
                    if clique.len() != m as usize {
                        return Err(audit_err(format!(
                            "block {} clique has {} nodes, declared {m}",
                            i + 1,
                            clique.len()
                        )));
                    }
                    for &a in &clique {
                        if g.has_arc(a, a) {
                            return Err(audit_err(format!("clique node {a} has a self-loop")));
                        }
                        for &c in &clique {
                            if a != c && !g.has_arc(a, c) {
                                return Err(audit_err(format!(
                                    "clique arc ({a}, {c}) missing in block {}",
                                    i + 1
                                )));
                            }
                        }
                        let arcs_to_target = usize::from(g.has_arc(a, v));
                        if (a == feeder) != (arcs_to_target == 1) {
                            return Err(audit_err(format!(
                                "block {} clique-to-target arcs are off at node {a}",
                                i + 1
                            )));
                        }
                    }
                    accounted += m as usize;
                }
                match (fractional_q[i], fractional.first()) {
                    (None, None) => {}
                    (Some(q), Some(&f)) => {
                        if fractional.len() != 1 || g.out_degree(f) as u64 != 1 + q {
                            return Err(audit_err(format!(
                                "block {} fractional parent fan-out mismatch",
                                i + 1
                            )));
                        }
                        for &c in g.out_neighbors(f) {
                            if c != v && g.has_arc(c, v) {
                                return Err(audit_err(format!(
                                    "fractional parent of block {} feeds a clique node that points at the target",
                                    i + 1
                                )));
                            }
                        }
                        accounted += 1;
                    }
                    _ => {
                        return Err(audit_err(format!(
                            "block {} fractional parent presence mismatch",
                            i + 1
                        )))
                    }
                }
            }
            if accounted != g.node_count() {
                return Err(audit_err(format!(
                    "{} nodes accounted for out of {}",
                    accounted,
                    g.node_count()
                )));
            }
        }
        FamilyData::McLocalLb { chain_len, bulk_parents, strong_parent_counts } => {
            let mut accounted = 0usize;
            for (i, &v) in b.targets.iter().enumerate() {
                let (head, chain_nodes) = walk_chain(g, v, *chain_len)?;
                accounted += chain_nodes;
                let layer: Vec<NodeId> =
                    g.in_neighbors(head).iter().copied().filter(|&z| z != head).collect();
                let layer: Vec<NodeId> = if *chain_len == 1 {
                    layer.into_iter().filter(|&z| z != v).collect()
                } else {
                    layer
                };
                if layer.len() as u64 != *bulk_parents {
                    return Err(audit_err(format!(
                        "block {} has {} chain-head parents, declared {bulk_parents}",
                        i + 1,
                        layer.len()
                    )));
                }
                accounted += layer.len();
                let mut strong: Vec<NodeId> = Vec::new();
                for &z in &layer {
                    if g.out_degree(z) != 1 {
                        return Err(audit_err(format!("layer node {z} fans out")));
                    }
                    if g.in_degree(z) > 0 {
                        strong.push(z);
                    }
                }
                let declared = strong_parent_counts[i];
                if declared == 0 {
                    if !strong.is_empty() {
                        return Err(audit_err(format!(
                            "block {} should have an anonymous layer",
                            i + 1
                        )));
                    }
                } else {
                    if strong.len() != 1 || g.in_degree(strong[0]) as u64 != declared {
                        return Err(audit_err(format!(
                            "block {} strong-ancestor parents mismatch",
                            i + 1
                        )));
                    }
                    for &o in g.in_neighbors(strong[0]) {
                        if g.in_degree(o) != 0 || g.out_degree(o) != 1 {
                            return Err(audit_err(format!("orphan parent {o} is not an orphan")));
                        }
                    }
                    accounted += declared as usize;
                }
            }
            if accounted != g.node_count() {
                return Err(audit_err(format!(
                    "{} nodes accounted for out of {}",
                    accounted,
                    g.node_count()
                )));
            }
        }
        FamilyData::McGlobalLb {
            chain_len,
            parents_per_block,
            ordinary_out_degree,
            strong_parent_counts,
        } => {
            let mut accounted = 0usize;
            for (i, &v) in b.targets.iter().enumerate() {
                if !g.has_arc(v, v) {
                    return Err(audit_err(format!("target {v} lacks its self-loop")));
                }
                let (head, chain_nodes) = walk_chain(g, v, chain_len + 1)?;
                accounted += chain_nodes;
                let layer: Vec<NodeId> = g
                    .in_neighbors(head)
                    .iter()
                    .copied()
                    .filter(|&z| z != head && (*chain_len > 0 || z != v))
                    .collect();
                if layer.len() as u64 != *parents_per_block {
                    return Err(audit_err(format!(
                        "block {} has {} layer parents, declared {parents_per_block}",
                        i + 1,
                        layer.len()
                    )));
                }
                let mut strong: Vec<NodeId> = Vec::new();
                let mut sinks = 0usize;
                for &z in &layer {
                    let od = g.out_degree(z) as u64;
                    if od == 1 && *ordinary_out_degree > 1 {
                        strong.push(z);
                    } else {
                        if od != *ordinary_out_degree {
                            return Err(audit_err(format!(
                                "layer node {z} has out-degree {od}, declared {ordinary_out_degree}"
                            )));
                        }
                        if g.in_degree(z) != 0 {
                            return Err(audit_err(format!("ordinary parent {z} has parents")));
                        }
                        for &c in g.out_neighbors(z) {
                            if c == head {
                                continue;
                            }
                            if g.out_degree(c) != 0 || g.in_degree(c) != 1 {
                                return Err(audit_err(format!("sink {c} is shared or non-sink")));
                            }
                            sinks += 1;
                        }
                    }
                }
                accounted += layer.len() + sinks;
                let declared = strong_parent_counts[i];
                if *ordinary_out_degree == 1 {
                    // layer is uniform; the strong ancestor only shows
                    // through its parents
                    strong =
                        layer.iter().copied().filter(|&z| g.in_degree(z) > 0).collect();
                }
                if declared == 0 {
                    if strong.iter().any(|&z| g.in_degree(z) > 0) {
                        return Err(audit_err(format!(
                            "block {} should have an anonymous layer",
                            i + 1
                        )));
                    }
                } else {
                    let with_parents: Vec<NodeId> =
                        strong.iter().copied().filter(|&z| g.in_degree(z) > 0).collect();
                    if with_parents.len() != 1 || g.in_degree(with_parents[0]) as u64 != declared {
                        return Err(audit_err(format!(
                            "block {} strong-ancestor parents mismatch",
                            i + 1
                        )));
                    }
                    accounted += declared as usize;
                }
            }
            if accounted != g.node_count() {
                return Err(audit_err(format!(
                    "{} nodes accounted for out of {}",
                    accounted,
                    g.node_count()
                )));
            }
        }
        FamilyData::Eluders { parent_count } => {
            let m = *parent_count;
            let (v, u) = (b.targets[0], b.targets[1]);
            for (t, expect) in [(u, m + 1), (v, m)] {
                let parents: Vec<NodeId> =
                    g.in_neighbors(t).iter().copied().filter(|&z| z != t).collect();
                if parents.len() as u64 != expect {
                    return Err(audit_err(format!(
                        "target {t} has {} parents, declared {expect}",
                        parents.len()
                    )));
                }
                if g.out_neighbors(t) != [t] {
                    return Err(audit_err(format!("target {t} must only self-loop")));
                }
                for &z in &parents {
                    if g.in_degree(z) != 0 || g.out_neighbors(z) != [t] {
                        return Err(audit_err(format!("parent {z} is not an orphan parent")));
                    }
                }
            }
            if g.node_count() as u64 != 2 * m + 3 {
                return Err(audit_err(format!("node count {} is off", g.node_count())));
            }
        }
    }
    Ok(())
}

/// Follows the unique single-child chain upward from the target:
/// returns the chain head and the number of chain nodes (target
/// included). `expected` is the declared chain length.
fn walk_chain(g: &DirectedGraph, target: NodeId, expected: u64) -> Result<(NodeId, usize)> {
    let mut cur = target;
    for step in 1..expected {
        let preds: Vec<NodeId> =
            g.in_neighbors(cur).iter().copied().filter(|&z| z != cur).collect();
        if preds.len() != 1 {
            return Err(audit_err(format!(
                "chain break above node {cur} at depth {step}: {} predecessors",
                preds.len()
            )));
        }
        let up = preds[0];
        if g.out_degree(up) != 1 {
            return Err(audit_err(format!("chain node {up} fans out")));
        }
        cur = up;
    }
    Ok((cur, expected as usize))
}

// ---------------------------------------------------------------------
// Exact score audits
// ---------------------------------------------------------------------

/// Recomputes the targets' exact scores on the built graph and checks
/// them against the declared closed forms: equality where the paths are
/// deterministic, the `[1 + eps/2, 1 + 2 eps]` window for adjacent
/// ratios in the bulk-parent family, and a 10% relative window around
/// `declared_p * (1 + eps)^(i-1)` for the strong-ancestor families.
pub fn audit_scores(b: &InstanceBundle) -> Result<AuditReport> {
    audit_structure(b)?;
    let scores = exact_pagerank(&b.graph, &b.params, Mode::Rational)?;
    let n = from_int(b.graph.node_count() as i64);
    let target_scores: Vec<BigRational> =
        b.targets.iter().map(|&t| scores.rational(t).unwrap().clone()).collect();
    let adjacent: Vec<BigRational> = target_scores
        .windows(2)
        .map(|w| &w[1] / &w[0])
        .collect();
    let alpha = b.params.alpha();
    let one_plus_eps = b.params.one_plus_epsilon();
    let tenth = ratio(1, 10);

    let check_weight = |i: usize, weight: BigRational| -> Result<()> {
        if target_scores[i] != &weight / &n {
            return Err(audit_err(format!(
                "target {} exact score {} differs from the closed form {}",
                i + 1,
                target_scores[i],
                &weight / &n
            )));
        }
        Ok(())
    };
    let check_progression = |i: usize| -> Result<()> {
        let expected = &b.declared_p * pow(&one_plus_eps, i);
        if ((&target_scores[i] / &expected) - BigRational::one()).abs() > tenth {
            return Err(audit_err(format!(
                "target {} score {} strays more than 10% from the declared progression {}",
                i + 1,
                target_scores[i],
                expected
            )));
        }
        Ok(())
    };

    match &b.data {
        FamilyData::DetLb { bulk_counts, clique_size, fractional_q } => {
            let weights =
                det_block_weights(b.k(), alpha, *clique_size, bulk_counts, fractional_q);
            for i in 0..b.k() {
                check_weight(i, weights[i].clone())?;
            }
            let window_lo = BigRational::one() + b.params.epsilon() / from_int(2);
            let window_hi = BigRational::one() + b.params.epsilon() * from_int(2);
            for (i, r) in adjacent.iter().enumerate() {
                if r < &window_lo || r > &window_hi {
                    return Err(audit_err(format!(
                        "adjacent ratio {} of blocks {}/{} outside the separation window",
                        r,
                        i + 2,
                        i + 1
                    )));
                }
            }
            // top-k: every non-target strictly below every target
            let min_target = target_scores.iter().min().unwrap();
            for z in b.graph.nodes() {
                if b.targets.contains(&z) {
                    continue;
                }
                if scores.rational(z).unwrap() >= min_target {
                    return Err(audit_err(format!(
                        "non-target {z} reaches the target score range"
                    )));
                }
            }
        }
        FamilyData::McLocalLb { chain_len, bulk_parents, strong_parent_counts } => {
            for i in 0..b.k() {
                check_weight(
                    i,
                    mc_local_weight(alpha, *chain_len, *bulk_parents, strong_parent_counts[i]),
                )?;
                check_progression(i)?;
            }
        }
        FamilyData::McGlobalLb {
            chain_len,
            parents_per_block,
            ordinary_out_degree,
            strong_parent_counts,
        } => {
            for i in 0..b.k() {
                check_weight(
                    i,
                    mc_global_weight(
                        alpha,
                        *chain_len,
                        *parents_per_block,
                        *ordinary_out_degree,
                        strong_parent_counts[i],
                    ),
                )?;
                check_progression(i)?;
            }
        }
        FamilyData::Eluders { parent_count } => {
            let m = from_int(*parent_count as i64);
            let w_v = BigRational::one() + alpha * &m;
            let w_u = &w_v + alpha;
            check_weight(0, w_v)?;
            check_weight(1, w_u)?;
            if adjacent[0] != one_plus_eps {
                return Err(audit_err(format!(
                    "realized separation {} differs from the declared {}",
                    adjacent[0], one_plus_eps
                )));
            }
        }
    }

    Ok(AuditReport {
        target_scores: target_scores.iter().map(|s| s.to_f64().unwrap()).collect(),
        adjacent_ratios: adjacent.iter().map(|r| r.to_f64().unwrap()).collect(),
        p_effective: b.declared_p.to_f64().unwrap(),
    })
}

// ---------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------

/// Output of a reduction: the built graph, the ordered target pair, and
/// the kernel size whose achievability encodes the source answer.
#[derive(Debug, Clone)]
pub struct ReductionArtifacts {
    pub graph: DirectedGraph,
    pub higher: NodeId,
    pub lower: NodeId,
    pub claimed_kernel_size: usize,
    /// Damping factor and the separation the claim is verified at.
    pub verify_params: RankingParams,
    /// Graph id of each source node.
    pub source_map: Vec<NodeId>,
    /// Common out-degree after normalization (clique reduction only).
    pub normalized_out_degree: Option<u64>,
    /// Extra parents of the lower target (clique reduction only).
    pub extra_parents: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortcutReason {
    /// Normalized out-degrees cannot host a clique of the requested
    /// size; the source answer is NO without building anything.
    DegreeTooSmall,
    /// The built graph already ranks the pair the wrong way, which a
    /// clique would forbid; the source answer is NO.
    ScoreOrder,
}

#[derive(Debug, Clone)]
pub enum CliqueReduction {
    ShortcutNo(ShortcutReason),
    Reduced(ReductionArtifacts),
}

/// Encodes "does `g0` contain a complete directed subgraph on `m`
/// nodes" into a minimum-certifying-view question: the built graph has
/// a view of kernel size `2(m+1)+q` certifying `u` above `v` exactly
/// when the clique exists.
pub fn reduce_clique(
    g0: &DirectedGraph,
    m: u64,
    alpha: &BigRational,
    eps: &BigRational,
) -> Result<CliqueReduction> {
    if m < 2 {
        return Err(Error::Infeasible(format!("clique size must be at least 2, got {m}")));
    }
    if g0.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let params = RankingParams::new(alpha.clone(), eps.clone())
        .map_err(|e| Error::Infeasible(e.to_string()))?;
    let n0 = g0.node_count();

    // normalized out-degree of each source node: original arcs, plus a
    // self-loop if missing, plus the arc to u
    let norm_od: Vec<u64> = (0..n0)
        .map(|z| g0.out_degree(z) as u64 + u64::from(!g0.has_arc(z, z)) + 1)
        .collect();
    let d = *norm_od.iter().max().unwrap();
    if d < m + 1 {
        return Ok(CliqueReduction::ShortcutNo(ShortcutReason::DegreeTooSmall));
    }

    // fan-out of the extra parents of v, and how many of them land the
    // kernel-score slack inside its window
    let d_rat = from_int(d as i64);
    let big_d = (&d_rat * &d_rat / (alpha * params.one_plus_epsilon())).ceil();
    let big_d_int = big_d.to_integer().to_u64().unwrap();
    let window_hi =
        params.epsilon() * &d_rat / (&d_rat - alpha * from_int(m as i64));
    let window_lo = &window_hi
        - alpha * alpha * params.one_plus_epsilon() / (&d_rat * &d_rat);
    let step = alpha / from_int(big_d_int as i64);
    let q = (&window_hi / &step).floor().to_integer().to_u64().unwrap();
    let q_val = &step * from_int(q as i64);
    if q_val < window_lo || q_val > window_hi {
        return Err(Error::Infeasible(format!(
            "no extra-parent count satisfies the separation window at d = {d}, m = {m}"
        )));
    }

    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    let u: NodeId = 0;
    arcs.push((u, u));
    let source_map: Vec<NodeId> = (1..=n0).collect();
    for z in 0..n0 {
        let zs = source_map[z];
        for &c in g0.out_neighbors(z) {
            arcs.push((zs, source_map[c]));
        }
        if !g0.has_arc(z, z) {
            arcs.push((zs, zs));
        }
        arcs.push((zs, u));
    }
    let mut next = n0 + 1;
    // shared sink pool padding every source node's out-degree up to d
    let min_od = *norm_od.iter().min().unwrap();
    let u_sinks: Vec<NodeId> = (next..next + (d - min_od) as usize).collect();
    next += u_sinks.len();
    let mut sinks: Vec<NodeId> = u_sinks.clone();
    for z in 0..n0 {
        for &s in u_sinks.iter().take((d - norm_od[z]) as usize) {
            arcs.push((source_map[z], s));
        }
    }
    let v: NodeId = next;
    next += 1;
    arcs.push((v, v));
    let clique: Vec<NodeId> = (next..next + m as usize).collect();
    next += m as usize;
    let v_sinks: Vec<NodeId> = (next..next + (d - m - 1) as usize).collect();
    next += v_sinks.len();
    sinks.extend(&v_sinks);
    for &a in &clique {
        arcs.push((a, a));
        arcs.push((a, v));
        for &c in &clique {
            if a != c {
                arcs.push((a, c));
            }
        }
        for &s in &v_sinks {
            arcs.push((a, s));
        }
    }
    if q > 0 {
        let q_sinks: Vec<NodeId> = (next..next + (big_d_int - 1) as usize).collect();
        next += q_sinks.len();
        sinks.extend(&q_sinks);
        for _ in 0..q {
            let parent = next;
            next += 1;
            arcs.push((parent, v));
            for &s in &q_sinks {
                arcs.push((parent, s));
            }
        }
    }
    for &s in &sinks {
        arcs.push((s, s));
    }
    let graph = DirectedGraph::new(next, arcs)?;

    // score shortcut: if the built graph already separates the pair the
    // wrong way, no clique can exist
    let scores = exact_pagerank(&graph, &params, Mode::Rational)?;
    let su = scores.rational(u).unwrap();
    let sv = scores.rational(v).unwrap();
    if su * params.one_plus_epsilon() < *sv {
        return Ok(CliqueReduction::ShortcutNo(ShortcutReason::ScoreOrder));
    }

    Ok(CliqueReduction::Reduced(ReductionArtifacts {
        graph,
        higher: u,
        lower: v,
        claimed_kernel_size: (2 * (m + 1) + q) as usize,
        verify_params: params,
        source_map,
        normalized_out_degree: Some(d),
        extra_parents: Some(q),
    }))
}

/// Encodes "does `g0` have a dominating set of size `m`" (every node
/// outside the set points into it): the built graph has a view of
/// kernel size `3 + m` certifying `u` above `v` exactly when the
/// dominating set exists. Verified at separation zero.
pub fn reduce_domset(g0: &DirectedGraph, m: u64, alpha: &BigRational) -> Result<ReductionArtifacts> {
    if g0.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if m < 1 {
        return Err(Error::Infeasible(format!("dominating-set size must be positive, got {m}")));
    }
    if !g0.dangling_nodes().is_empty() {
        return Err(Error::DanglingSource);
    }
    let params = RankingParams::new(alpha.clone(), BigRational::zero())
        .map_err(|e| Error::Infeasible(e.to_string()))?;
    let n0 = g0.node_count();
    let (u, v, w): (NodeId, NodeId, NodeId) = (0, 1, 2);
    let parents: Vec<NodeId> = (3..3 + n0).collect();
    let mirrors: Vec<NodeId> = (3 + n0..3 + 2 * n0).collect();
    let mut arcs = vec![(u, u), (v, v), (w, v)];
    for i in 0..n0 {
        arcs.push((parents[i], u));
        arcs.push((mirrors[i], w));
        for &j in g0.out_neighbors(i) {
            arcs.push((mirrors[i], parents[j]));
        }
    }
    let graph = DirectedGraph::new(3 + 2 * n0, arcs)?;
    Ok(ReductionArtifacts {
        graph,
        higher: u,
        lower: v,
        claimed_kernel_size: 3 + m as usize,
        verify_params: params,
        source_map: parents,
        normalized_out_degree: None,
        extra_parents: None,
    })
}

/// Splits a graph for domination purposes: nodes with no outgoing arcs
/// must sit inside any dominating set, so callers peel them off and
/// work on the induced remainder. Returns the dangling ids and the
/// remainder with its id map (remainder id -> original id).
pub fn split_dangling(g: &DirectedGraph) -> (Vec<NodeId>, DirectedGraph, Vec<NodeId>) {
    let dangling: Vec<NodeId> = g.dangling_nodes();
    let keep: Vec<NodeId> = g.nodes().filter(|v| !g.is_dangling(*v)).collect();
    let index: BTreeMap<NodeId, NodeId> =
        keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let arcs: Vec<(NodeId, NodeId)> = g
        .arcs()
        .iter()
        .filter(|(s, t)| index.contains_key(s) && index.contains_key(t))
        .map(|&(s, t)| (index[&s], index[&t]))
        .collect();
    let core = DirectedGraph::new(keep.len(), arcs).expect("filtered arcs are valid");
    (dangling, core, keep)
}
