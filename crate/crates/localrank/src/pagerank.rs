//! Exact PageRank scores and per-source contributions.
//!
//! Scores follow the damped-surfer series on the graph as given: walks
//! that reach a node with no outgoing arcs simply end there, so on
//! graphs with dangling nodes the scores sum to less than one. Adding
//! the usual dangling preprocessing only rescales scores, so rankings
//! and ratios are unaffected; callers that need the rescaled law can
//! normalize by the sum.

use num::rational::BigRational;
use num::traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::ranking::RankingParams;

/// Arithmetic mode for score computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Iterative accumulation, truncated when the geometric tail bound
    /// `alpha^(T+1) <= tol` is met.
    Float { tol: f64 },
    /// Exact fraction arithmetic.
    Rational,
}

impl Mode {
    fn check(self) -> Result<Self> {
        if let Mode::Float { tol } = self {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
            }
        }
        Ok(self)
    }

    /// Iterations needed so that `alpha^(T+1) <= tol`.
    pub(crate) fn float_steps(alpha: f64, tol: f64) -> usize {
        let mut t = 0usize;
        let mut pow = alpha;
        // alpha < 1, so this terminates; counting avoids log rounding
        // surprises near boundaries.
        while pow > tol {
            pow *= alpha;
            t += 1;
            if t > 10_000_000 {
                break;
            }
        }
        t
    }
}

/// Per-node scores in one of the two arithmetic modes.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreVector {
    Float(Vec<f64>),
    Rational(Vec<BigRational>),
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        match self {
            ScoreVector::Float(v) => v.len(),
            ScoreVector::Rational(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ScoreVector::Rational(_))
    }

    pub fn get_f64(&self, i: NodeId) -> f64 {
        match self {
            ScoreVector::Float(v) => v[i],
            ScoreVector::Rational(v) => crate::numeric::to_f64(&v[i]),
        }
    }

    pub fn rational(&self, i: NodeId) -> Option<&BigRational> {
        match self {
            ScoreVector::Float(_) => None,
            ScoreVector::Rational(v) => Some(&v[i]),
        }
    }

    pub fn sum_f64(&self) -> f64 {
        (0..self.len()).map(|i| self.get_f64(i)).sum()
    }

    pub fn sum_rational(&self) -> Option<BigRational> {
        match self {
            ScoreVector::Float(_) => None,
            ScoreVector::Rational(v) => Some(v.iter().sum()),
        }
    }

    /// The dangling-preprocessed law: scores rescaled to sum to one.
    pub fn normalized_rational(&self) -> Option<Vec<BigRational>> {
        let sum = self.sum_rational()?;
        if sum.is_zero() {
            return None;
        }
        match self {
            ScoreVector::Rational(v) => Some(v.iter().map(|x| x / &sum).collect()),
            ScoreVector::Float(_) => None,
        }
    }

    /// Exact comparison in rational mode, plain comparison in float mode.
    pub fn cmp_scores(&self, a: NodeId, b: NodeId) -> std::cmp::Ordering {
        match self {
            ScoreVector::Float(v) => v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal),
            ScoreVector::Rational(v) => v[a].cmp(&v[b]),
        }
    }
}

/// Default cap on the dense elimination blocks of the rational solver.
pub const DEFAULT_SOLVE_CAP: usize = 512;

/// Sparse linear system `x_i = b_i + sum_j w_ij x_j`, solved exactly by
/// decomposing the dependency graph into strongly connected components
/// and running fraction Gaussian elimination inside each component.
pub(crate) struct SparseSystem {
    pub rows: Vec<Vec<(usize, BigRational)>>,
    pub b: Vec<BigRational>,
}

impl SparseSystem {
    pub fn solve(self, cap: usize) -> Result<Vec<BigRational>> {
        let n = self.b.len();
        let sccs = strongly_connected_components(n, &self.rows);
        let mut x: Vec<Option<BigRational>> = vec![None; n];
        // Tarjan emits components with all dependencies already emitted.
        for comp in sccs {
            if comp.len() > cap {
                return Err(Error::SolveCapExceeded { size: comp.len(), cap });
            }
            if comp.len() == 1 {
                let i = comp[0];
                let mut rhs = self.b[i].clone();
                let mut self_coeff = BigRational::zero();
                for (j, w) in &self.rows[i] {
                    if *j == i {
                        self_coeff += w;
                    } else {
                        rhs += w * x[*j].as_ref().expect("dependency solved before dependent");
                    }
                }
                let denom = BigRational::one() - self_coeff;
                x[i] = Some(rhs / denom);
                continue;
            }
            let index_of: std::collections::HashMap<usize, usize> =
                comp.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let k = comp.len();
            let mut a = vec![vec![BigRational::zero(); k]; k];
            let mut rhs = vec![BigRational::zero(); k];
            for (r, &i) in comp.iter().enumerate() {
                a[r][r] = BigRational::one();
                rhs[r] = self.b[i].clone();
                for (j, w) in &self.rows[i] {
                    match index_of.get(j) {
                        Some(&c) => a[r][c] -= w,
                        None => {
                            rhs[r] += w * x[*j].as_ref().expect("dependency solved before dependent")
                        }
                    }
                }
            }
            let sol = gauss_rational(&mut a, &mut rhs)?;
            for (r, &i) in comp.iter().enumerate() {
                x[i] = Some(sol[r].clone());
            }
        }
        Ok(x.into_iter().map(|v| v.expect("all components solved")).collect())
    }
}

/// Exact Gaussian elimination with first-nonzero pivoting.
fn gauss_rational(a: &mut [Vec<BigRational>], b: &mut [BigRational]) -> Result<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidParameter("singular score system".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].clone();
        for c in col..n {
            a[col][c] = &a[col][c] / &inv;
        }
        b[col] = &b[col] / &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &sub;
                }
                let sub = &f * &b[col];
                b[r] = &b[r] - &sub;
            }
        }
    }
    Ok(b.to_vec())
}

/// Iterative Tarjan over the dependency arcs `i -> j` for each
/// coefficient `(j, _)` in row `i`. Components are emitted with
/// dependencies first.
fn strongly_connected_components(n: usize, rows: &[Vec<(usize, BigRational)>]) -> Vec<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut out: Vec<Vec<usize>> = Vec::new();

    // explicit DFS frames: (node, next edge position)
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != UNSET {
            continue;
        }
        frames.push((start, 0));
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut ei)) = frames.last_mut() {
            if *ei < rows[v].len() {
                let w = rows[v][*ei].0;
                *ei += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// PageRank scores of every node of `g`.
pub fn exact_pagerank(g: &DirectedGraph, params: &RankingParams, mode: Mode) -> Result<ScoreVector> {
    exact_pagerank_with_cap(g, params, mode.check()?, DEFAULT_SOLVE_CAP)
}

pub fn exact_pagerank_with_cap(
    g: &DirectedGraph,
    params: &RankingParams,
    mode: Mode,
    cap: usize,
) -> Result<ScoreVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    match mode {
        Mode::Float { tol } => {
            let alpha = params.alpha_f64();
            let steps = Mode::float_steps(alpha, tol);
            let mut cur = vec![1.0 / n as f64; n];
            let mut acc = cur.clone();
            let mut next = vec![0.0; n];
            for _ in 0..steps {
                for x in next.iter_mut() {
                    *x = 0.0;
                }
                for z in g.nodes() {
                    let od = g.out_degree(z);
                    if od == 0 || cur[z] == 0.0 {
                        continue;
                    }
                    let share = alpha * cur[z] / od as f64;
                    for &y in g.out_neighbors(z) {
                        next[y] += share;
                    }
                }
                std::mem::swap(&mut cur, &mut next);
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a += c;
                }
            }
            let scale = 1.0 - alpha;
            Ok(ScoreVector::Float(acc.into_iter().map(|x| x * scale).collect()))
        }
        Mode::Rational => {
            let alpha = params.alpha().clone();
            let n_rat = crate::numeric::from_int(n as i64);
            let restart = (BigRational::one() - &alpha) / &n_rat;
            // P(v) = (1 - alpha)/n + alpha * sum over in-arcs (z, v) of P(z)/outdeg(z)
            let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); n];
            for v in g.nodes() {
                for &z in g.in_neighbors(v) {
                    let w = &alpha / crate::numeric::from_int(g.out_degree(z) as i64);
                    rows[v].push((z, w));
                }
            }
            let sys = SparseSystem { rows, b: vec![restart; n] };
            Ok(ScoreVector::Rational(sys.solve(cap)?))
        }
    }
}

/// The vector of contributions `P(z, v)` of every node `z` to a fixed
/// target `v`; summed over `z` it equals the score of `v`.
pub fn contribution_vector(
    g: &DirectedGraph,
    params: &RankingParams,
    v: NodeId,
    mode: Mode,
) -> Result<ScoreVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    g.check_node(v)?;
    match mode.check()? {
        Mode::Float { tol } => {
            let alpha = params.alpha_f64();
            let steps = Mode::float_steps(alpha, tol);
            // u_t(z) = alpha^t * inf_t(z, v), accumulated over t
            let mut cur = vec![0.0; n];
            cur[v] = 1.0;
            let mut acc = cur.clone();
            let mut next = vec![0.0; n];
            for _ in 0..steps {
                for x in next.iter_mut() {
                    *x = 0.0;
                }
                for z in g.nodes() {
                    let od = g.out_degree(z);
                    if od == 0 {
                        continue;
                    }
                    let w = alpha / od as f64;
                    let mut s = 0.0;
                    for &y in g.out_neighbors(z) {
                        s += cur[y];
                    }
                    next[z] = w * s;
                }
                std::mem::swap(&mut cur, &mut next);
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a += c;
                }
            }
            let scale = (1.0 - alpha) / n as f64;
            Ok(ScoreVector::Float(acc.into_iter().map(|x| x * scale).collect()))
        }
        Mode::Rational => {
            let alpha = params.alpha().clone();
            let n_rat = crate::numeric::from_int(n as i64);
            let restart = (BigRational::one() - &alpha) / &n_rat;
            // c(z) = [z = v] (1 - alpha)/n + alpha/outdeg(z) * sum over (z, y) of c(y)
            let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); n];
            let mut b = vec![BigRational::zero(); n];
            b[v] = restart;
            for z in g.nodes() {
                let od = g.out_degree(z);
                if od == 0 {
                    continue;
                }
                let w = &alpha / crate::numeric::from_int(od as i64);
                for &y in g.out_neighbors(z) {
                    rows[z].push((y, w.clone()));
                }
            }
            let sys = SparseSystem { rows, b };
            Ok(ScoreVector::Rational(sys.solve(DEFAULT_SOLVE_CAP)?))
        }
    }
}

/// A single score, in whichever arithmetic mode produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum Score {
    Float(f64),
    Rational(BigRational),
}

impl Score {
    pub fn to_f64(&self) -> f64 {
        match self {
            Score::Float(x) => *x,
            Score::Rational(r) => crate::numeric::to_f64(r),
        }
    }

    pub fn rational(&self) -> Option<&BigRational> {
        match self {
            Score::Float(_) => None,
            Score::Rational(r) => Some(r),
        }
    }
}

/// Contribution `P(z, v)` of a single source.
pub fn contribution(
    g: &DirectedGraph,
    params: &RankingParams,
    z: NodeId,
    v: NodeId,
    mode: Mode,
) -> Result<Score> {
    g.check_node(z)?;
    let vec = contribution_vector(g, params, v, mode)?;
    Ok(match vec {
        ScoreVector::Float(xs) => Score::Float(xs[z]),
        ScoreVector::Rational(xs) => Score::Rational(xs[z].clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{from_int, ratio};

    fn params(alpha: (i64, i64)) -> RankingParams {
        RankingParams::new(ratio(alpha.0, alpha.1), ratio(0, 1)).unwrap()
    }

    #[test]
    fn three_cycle_scores_are_one_third_for_any_alpha() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        for a in [(1i64, 10i64), (1, 2), (17, 20)] {
            let p = params(a);
            let s = exact_pagerank(&g, &p, Mode::Rational).unwrap();
            for v in 0..3 {
                assert_eq!(s.rational(v).unwrap(), &ratio(1, 3));
            }
        }
    }

    #[test]
    fn single_self_loop_scores_one() {
        let g = DirectedGraph::new(1, [(0, 0)]).unwrap();
        let s = exact_pagerank(&g, &params((1, 2)), Mode::Rational).unwrap();
        assert_eq!(s.rational(0).unwrap(), &from_int(1));
    }

    #[test]
    fn two_node_dangling_example() {
        // a -> b with b dangling at alpha = 1/2: hand summation of the
        // damped series gives 1/4 and 3/8, total 5/8 < 1.
        let g = DirectedGraph::new(2, [(0, 1)]).unwrap();
        let p = params((1, 2));
        let s = exact_pagerank(&g, &p, Mode::Rational).unwrap();
        assert_eq!(s.rational(0).unwrap(), &ratio(1, 4));
        assert_eq!(s.rational(1).unwrap(), &ratio(3, 8));
        assert_eq!(s.sum_rational().unwrap(), ratio(5, 8));

        let f = exact_pagerank(&g, &p, Mode::Float { tol: 1e-13 }).unwrap();
        assert!((f.get_f64(0) - 0.25).abs() < 1e-12);
        assert!((f.get_f64(1) - 0.375).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = DirectedGraph::empty(0);
        assert!(matches!(
            exact_pagerank(&g, &params((1, 2)), Mode::Rational),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn contribution_examples() {
        let p = params((3, 10));
        // z = v with a self-loop and no other path back: P(v, v) = 1/n.
        let g = DirectedGraph::new(2, [(0, 0), (1, 0)]).unwrap();
        let c = contribution(&g, &p, 0, 0, Mode::Rational).unwrap();
        assert_eq!(c.rational().unwrap(), &ratio(1, 2));

        // orphan z with sole arc to v, v self-looped: P(z, v) = alpha/n.
        let c = contribution(&g, &p, 1, 0, Mode::Rational).unwrap();
        assert_eq!(c.rational().unwrap(), &ratio(3, 20));

        // no path from z to v means zero contribution.
        let g = DirectedGraph::new(2, [(0, 0), (1, 1)]).unwrap();
        let c = contribution(&g, &p, 1, 0, Mode::Rational).unwrap();
        assert_eq!(c.rational().unwrap(), &ratio(0, 1));
    }

    #[test]
    fn contributions_sum_to_the_score() {
        let g = DirectedGraph::new(5, [(0, 1), (1, 2), (2, 0), (3, 1), (3, 2), (4, 4), (2, 4)]).unwrap();
        let p = params((7, 10));
        let scores = exact_pagerank(&g, &p, Mode::Rational).unwrap();
        for v in g.nodes() {
            let c = contribution_vector(&g, &p, v, Mode::Rational).unwrap();
            assert_eq!(&c.sum_rational().unwrap(), scores.rational(v).unwrap());
        }
    }

    #[test]
    fn float_matches_rational_on_a_mixed_graph() {
        let g = DirectedGraph::new(6, [(0, 1), (1, 2), (2, 0), (3, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
        let p = params((17, 20));
        let exact = exact_pagerank(&g, &p, Mode::Rational).unwrap();
        let approx = exact_pagerank(&g, &p, Mode::Float { tol: 1e-12 }).unwrap();
        for v in g.nodes() {
            assert!((approx.get_f64(v) - exact.get_f64(v)).abs() <= 1e-11);
        }
    }

    #[test]
    fn dangling_self_loop_multiplies_score() {
        let g = DirectedGraph::new(4, [(0, 1), (2, 1), (1, 3)]).unwrap();
        let p = params((2, 5));
        let before = exact_pagerank(&g, &p, Mode::Rational).unwrap();
        let g2 = DirectedGraph::new(4, [(0, 1), (2, 1), (1, 3), (3, 3)]).unwrap();
        let after = exact_pagerank(&g2, &p, Mode::Rational).unwrap();
        let factor = from_int(1) / (from_int(1) - p.alpha());
        assert_eq!(after.rational(3).unwrap(), &(before.rational(3).unwrap() * &factor));
    }
}
