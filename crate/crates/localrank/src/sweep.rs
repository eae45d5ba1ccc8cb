//! Cost-scaling experiment harness.
//!
//! A sweep generates one instance per requested score scale, runs many
//! independent ranking trials per instance on a bounded worker pool,
//! and emits a flat CSV plus the fitted log-log slope of mean queries
//! against the reciprocal realized score. Trial seeds derive
//! deterministically from the base seed, cell index and trial index,
//! and rows are ordered by cell and trial before writing, so identical
//! configurations produce byte-identical output.

use std::fmt::Write as _;

use num::rational::BigRational;
use num::traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::explore::{ExplorationSession, QueryModel};
use crate::graph::NodeId;
use crate::instances::{gen_det_lb, gen_mc_global_lb, gen_mc_local_lb, Family, InstanceBundle};
use crate::pagerank::{exact_pagerank, Mode, ScoreVector};
use crate::ranking::is_valid_ranking;
use crate::sampler::{explore_ancestors_and_rank, sample_rank, RunOutcome, SampleSchedule};

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub family: Family,
    pub k: usize,
    pub alpha: BigRational,
    pub epsilon: BigRational,
    pub eta: f64,
    /// One cell per requested score scale.
    pub p_values: Vec<BigRational>,
    pub m: u64,
    pub trials: u32,
    pub seed_base: u64,
    pub max_queries: u64,
    /// Rank by exhaustive neighborhood exploration instead of walk
    /// sampling; exhibits cost growing with the ancestor count.
    pub baseline: bool,
    /// Emit a generation-time comment line at the top of the CSV.
    pub timestamp: bool,
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub index: usize,
    pub p_requested: BigRational,
    pub feasible: bool,
    pub p_realized: f64,
    pub n: usize,
    pub mean_samples: f64,
    pub mean_queries: f64,
    pub correct_rate: f64,
    /// Correct rate minus the chance level `1/k!`.
    pub excess_confidence: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: String,
    pub cells: Vec<CellSummary>,
    /// Log-log slope of mean queries versus the reciprocal realized
    /// score, over the feasible cells.
    pub slope: Option<f64>,
}

struct TrialRecord {
    samples: u64,
    queries: u64,
    correct: bool,
    stop_reason: &'static str,
}

const CSV_HEADER: &str = "row,family,cell,trial,seed,k,alpha,epsilon,eta,p_requested,p_realized,n,samples,queries,correct,stop_reason";

pub fn run_cost_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial per cell".into()));
    }
    if cfg.p_values.is_empty() {
        return Err(Error::InvalidParameter("the score grid must be nonempty".into()));
    }
    let chance = 1.0 / (1..=cfg.k as u64).product::<u64>() as f64;

    let mut csv = String::new();
    if cfg.timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(csv, "# generated at unix {now}");
    }
    let _ = writeln!(csv, "{CSV_HEADER}");

    let mut cells = Vec::with_capacity(cfg.p_values.len());
    for (cell, p) in cfg.p_values.iter().enumerate() {
        let cell_params = format!(
            "{},{cell},{},{},{},{:.6},{p}",
            cfg.family.tag(),
            cfg.k,
            cfg.alpha,
            cfg.epsilon,
            cfg.eta
        );
        let bundle = match build_instance(cfg, p) {
            Ok(b) => b,
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(
                    csv,
                    "summary,{},,,,,,,infeasible: {msg}",
                    with_trial(&cell_params, usize::MAX)
                );
                cells.push(CellSummary {
                    index: cell,
                    p_requested: p.clone(),
                    feasible: false,
                    p_realized: f64::NAN,
                    n: 0,
                    mean_samples: f64::NAN,
                    mean_queries: f64::NAN,
                    correct_rate: f64::NAN,
                    excess_confidence: f64::NAN,
                });
                continue;
            }
        };
        let scores = exact_pagerank(&bundle.graph, &bundle.params, Mode::Rational)?;
        let p_realized = bundle
            .targets
            .iter()
            .map(|&t| scores.rational(t).unwrap())
            .min()
            .unwrap()
            .to_f64()
            .unwrap();

        let records: Vec<(u64, TrialRecord)> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let seed =
                    cfg.seed_base.wrapping_add(cell as u64 * cfg.trials as u64 + trial as u64);
                run_trial(cfg, &bundle, &scores, seed).map(|r| (seed, r))
            })
            .collect::<Result<Vec<_>>>()?;

        let n = bundle.graph.node_count();
        for (trial, (seed, rec)) in records.iter().enumerate() {
            let _ = writeln!(
                csv,
                "trial,{cell_params_t},{seed},{p_realized:.9},{n},{},{},{},{}",
                rec.samples,
                rec.queries,
                u8::from(rec.correct),
                rec.stop_reason,
                cell_params_t = with_trial(&cell_params, trial),
            );
        }
        let mean_samples =
            records.iter().map(|(_, r)| r.samples as f64).sum::<f64>() / records.len() as f64;
        let mean_queries =
            records.iter().map(|(_, r)| r.queries as f64).sum::<f64>() / records.len() as f64;
        let correct_rate =
            records.iter().filter(|(_, r)| r.correct).count() as f64 / records.len() as f64;
        let _ = writeln!(
            csv,
            "summary,{cell_params_t},,{p_realized:.9},{n},{mean_samples:.6},{mean_queries:.6},{correct_rate:.6},",
            cell_params_t = with_trial(&cell_params, usize::MAX),
        );
        cells.push(CellSummary {
            index: cell,
            p_requested: p.clone(),
            feasible: true,
            p_realized,
            n,
            mean_samples,
            mean_queries,
            correct_rate,
            excess_confidence: correct_rate - chance,
        });
    }

    let slope = fit_slope(&cells);
    if let Some(s) = slope {
        let _ = writeln!(csv, "# slope={s:.6}");
    }
    Ok(SweepOutput { csv, cells, slope })
}

/// Splices the trial index into the `family,cell,...` prefix so every
/// row reads `row,family,cell,trial,seed,...`.
fn with_trial(cell_params: &str, trial: usize) -> String {
    let mut parts = cell_params.splitn(3, ',');
    let family = parts.next().unwrap_or_default();
    let cell = parts.next().unwrap_or_default();
    let rest = parts.next().unwrap_or_default();
    if trial == usize::MAX {
        format!("{family},{cell},,{rest}")
    } else {
        format!("{family},{cell},{trial},{rest}")
    }
}

fn build_instance(cfg: &SweepConfig, p: &BigRational) -> Result<InstanceBundle> {
    match cfg.family {
        Family::DetLb => gen_det_lb(cfg.k, &cfg.alpha, p, &cfg.epsilon, cfg.m),
        Family::McLocalLb => gen_mc_local_lb(cfg.k, &cfg.alpha, p, &cfg.epsilon, cfg.m),
        Family::McGlobalLb => gen_mc_global_lb(cfg.k, &cfg.alpha, p, &cfg.epsilon, cfg.m),
        Family::Eluders => Err(Error::InvalidParameter(
            "the two-star family has its own demo runner; sweep over the block families".into(),
        )),
    }
}

fn run_trial(
    cfg: &SweepConfig,
    bundle: &InstanceBundle,
    scores: &ScoreVector,
    seed: u64,
) -> Result<TrialRecord> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    if cfg.baseline {
        let mut session = ExplorationSession::open(
            &bundle.graph,
            &bundle.targets,
            QueryModel::links_only(),
            seed,
        )?;
        let targets = session.targets().to_vec();
        let ranking = explore_ancestors_and_rank(&mut session, &targets, &bundle.params)?;
        let hidden: Vec<NodeId> =
            ranking.iter().map(|&e| session.internal_of_external(e).unwrap()).collect();
        let correct = is_valid_ranking(scores, &hidden, &bundle.params)?;
        Ok(TrialRecord { samples: 0, queries: session.cost(), correct, stop_reason: "exhaustive" })
    } else {
        let mut session = ExplorationSession::open(
            &bundle.graph,
            &bundle.targets,
            QueryModel::jump_and_crawl(),
            seed,
        )?;
        let targets = session.targets().to_vec();
        let stats = sample_rank(
            &mut session,
            &targets,
            &bundle.params,
            cfg.eta,
            SampleSchedule::default(),
            cfg.max_queries,
            &mut rng,
        )?;
        let hidden: Vec<NodeId> =
            stats.ranking.iter().map(|&e| session.internal_of_external(e).unwrap()).collect();
        let correct = is_valid_ranking(scores, &hidden, &bundle.params)?;
        Ok(TrialRecord {
            samples: stats.samples,
            queries: stats.queries,
            correct,
            stop_reason: match stats.outcome {
                RunOutcome::Resolved => "resolved",
                RunOutcome::BudgetExceeded => "budget",
            },
        })
    }
}

/// Least-squares slope of ln(mean queries) against ln(1/p_realized).
fn fit_slope(cells: &[CellSummary]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.feasible && c.mean_queries > 0.0 && c.p_realized > 0.0)
        .map(|c| ((1.0 / c.p_realized).ln(), c.mean_queries.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(cov / var)
}
