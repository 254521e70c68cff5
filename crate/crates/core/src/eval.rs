//! Train/probe splitting, AUC and Precision metrics, repeated experiments
//! and alpha sweeps.
//!
//! A split removes a random fraction of links (the probe set) and scores the
//! remaining training graph; degrees, link counts and weights entering any
//! formula come from the training graph only. AUC is the probability that a
//! probe pair outranks a random unlinked ("nonexistent") pair, ties counted
//! half; the exact mode computes that expectation over all cross pairs with
//! midranks, the sampled mode draws comparisons at random. Precision@L is
//! the fraction of probe links among the L best-ranked candidates.
//!
//! Randomness comes from ChaCha8 seeded per run (`base_seed + run`), so
//! every result is reproducible from `(dataset, spec, runs, base_seed)`.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::indices::{score_grid, GridScores, IndexFamily, IndexSpec, ScoreTable, MAX_ALPHA_CHUNK};

/// How to split links into train and probe sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of links withheld as the probe set, in (0, 1).
    pub probe_fraction: f64,
    pub seed: u64,
}

pub const DEFAULT_PROBE_FRACTION: f64 = 0.1;

/// A withheld link, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedLink {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: f64,
}

impl WeightedLink {
    pub fn pair(&self) -> (NodeId, NodeId) {
        (self.a, self.b)
    }
}

/// Splits the links of `g` into a training graph and a probe set.
///
/// The probe holds `round(probe_fraction * |E|)` links sampled uniformly
/// without replacement. The training graph keeps every node (some may end
/// up with degree 0) and the remaining links with their original weights.
pub fn split_edges(g: &WeightedGraph, spec: &SplitSpec) -> Result<(WeightedGraph, Vec<WeightedLink>)> {
    let total = g.link_count();
    if total < 10 {
        return Err(Error::domain(format!(
            "splitting needs at least 10 links, graph has {total}"
        )));
    }
    if !(spec.probe_fraction > 0.0 && spec.probe_fraction < 1.0) {
        return Err(Error::domain("probe_fraction must lie in (0, 1)"));
    }
    let probe_count = (spec.probe_fraction * total as f64).round() as usize;
    if probe_count == 0 {
        return Err(Error::domain("probe_fraction yields an empty probe set"));
    }
    if probe_count >= total {
        return Err(Error::domain("probe_fraction yields an empty training set"));
    }

    let mut links: Vec<(NodeId, NodeId, f64)> = g.links().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Partial Fisher-Yates: the first probe_count slots become the probe.
    for i in 0..probe_count {
        let j = rng.random_range(i..links.len());
        links.swap(i, j);
    }
    let mut probe: Vec<WeightedLink> = links[..probe_count]
        .iter()
        .map(|&(a, b, weight)| WeightedLink { a, b, weight })
        .collect();
    probe.sort_unstable_by_key(|l| (l.a, l.b));
    let mut train_links = links.split_off(probe_count);
    train_links.sort_unstable_by_key(|&(a, b, _)| (a, b));
    let train = WeightedGraph::from_links(g.labels().to_vec(), &train_links)?;
    Ok((train, probe))
}

/// AUC evaluation mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AucMode {
    /// Midrank (Mann-Whitney) statistic over all probe x nonexistent pairs.
    Exact,
    /// `samples` independent random comparisons.
    Sampled { samples: u64, seed: u64 },
}

pub const DEFAULT_AUC_SAMPLES: u64 = 1_000_000;
/// Above this many cross pairs, [`AucConfig::Auto`] switches to sampling.
pub const DEFAULT_EXACT_CROSS_LIMIT: u64 = 1_000_000_000;

/// AUC policy for experiment drivers, which derive per-run seeds themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AucConfig {
    Exact,
    Sampled { samples: u64 },
    /// Exact unless the cross-pair count exceeds `max_exact_cross`.
    Auto { max_exact_cross: u64, samples: u64 },
}

impl Default for AucConfig {
    fn default() -> Self {
        AucConfig::Auto {
            max_exact_cross: DEFAULT_EXACT_CROSS_LIMIT,
            samples: DEFAULT_AUC_SAMPLES,
        }
    }
}

const AUC_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

impl AucConfig {
    fn mode_for(&self, run_seed: u64, cross_pairs: u64) -> AucMode {
        let sample_seed = run_seed.wrapping_add(AUC_SEED_SALT);
        match *self {
            AucConfig::Exact => AucMode::Exact,
            AucConfig::Sampled { samples } => AucMode::Sampled {
                samples,
                seed: sample_seed,
            },
            AucConfig::Auto {
                max_exact_cross,
                samples,
            } => {
                if cross_pairs <= max_exact_cross {
                    AucMode::Exact
                } else {
                    AucMode::Sampled {
                        samples,
                        seed: sample_seed,
                    }
                }
            }
        }
    }
}

/// Splits the table's scores into (probe, nonexistent) and maps them onto a
/// "higher is better" key.
fn partition_scores(
    table: &ScoreTable,
    probe: &[(NodeId, NodeId)],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if probe.is_empty() {
        return Err(Error::domain("probe set is empty"));
    }
    let probe_set: HashSet<(NodeId, NodeId)> =
        probe.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let flip = match table.spec().direction() {
        crate::indices::Direction::HigherIsLikelier => false,
        crate::indices::Direction::LowerIsLikelier => true,
    };
    let mut probe_scores = Vec::with_capacity(probe_set.len());
    let mut other_scores = Vec::with_capacity(table.len() - probe_set.len().min(table.len()));
    for (pair, score) in table.entries() {
        debug_assert!(!score.is_nan());
        let key = if flip { -score } else { score };
        if probe_set.contains(&pair) {
            probe_scores.push(key);
        } else {
            other_scores.push(key);
        }
    }
    if probe_scores.len() != probe_set.len() {
        return Err(Error::domain(
            "a probe pair is missing from the score table",
        ));
    }
    if other_scores.is_empty() {
        return Err(Error::domain("no nonexistent pairs to compare against"));
    }
    Ok((probe_scores, other_scores))
}

/// AUC of `table` against the withheld probe pairs.
///
/// Every probe pair and every remaining unlinked pair must be scored in the
/// table. Direction comes from the table's spec; `+inf` sentinels compare as
/// extremes.
pub fn auc(table: &ScoreTable, probe: &[(NodeId, NodeId)], mode: &AucMode) -> Result<f64> {
    let (probe_scores, other_scores) = partition_scores(table, probe)?;
    Ok(match *mode {
        AucMode::Exact => exact_auc(&probe_scores, &other_scores),
        AucMode::Sampled { samples, seed } => {
            sampled_auc(&probe_scores, &other_scores, samples, seed)?
        }
    })
}

/// Midrank statistic: rank all keys jointly, tie groups share their mean
/// rank; equals the tie-aware expectation over all cross pairs.
fn exact_auc(probe: &[f64], other: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = probe
        .iter()
        .map(|&s| (s, true))
        .chain(other.iter().map(|&s| (s, false)))
        .collect();
    all.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
    let mut probe_rank_sum = 0.0f64;
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0.total_cmp(&all[i].0).is_eq() {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0; // 1-based ranks i+1 ..= j
        for entry in &all[i..j] {
            if entry.1 {
                probe_rank_sum += midrank;
            }
        }
        i = j;
    }
    let p = probe.len() as f64;
    let q = other.len() as f64;
    (probe_rank_sum - p * (p + 1.0) / 2.0) / (p * q)
}

fn sampled_auc(probe: &[f64], other: &[f64], samples: u64, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::domain("sampled AUC needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut credit = 0.0f64;
    for _ in 0..samples {
        let x = probe[rng.random_range(0..probe.len())];
        let y = other[rng.random_range(0..other.len())];
        match x.total_cmp(&y) {
            std::cmp::Ordering::Greater => credit += 1.0,
            std::cmp::Ordering::Equal => credit += 0.5,
            std::cmp::Ordering::Less => {}
        }
    }
    Ok(credit / samples as f64)
}

/// Fraction of probe links among the `top` best-ranked candidate pairs.
///
/// Ranking follows the table direction with ties broken by pair id.
pub fn precision_at(table: &ScoreTable, probe: &[(NodeId, NodeId)], top: usize) -> Result<f64> {
    if top == 0 {
        return Err(Error::domain("precision requires top >= 1"));
    }
    if table.len() < top {
        return Err(Error::domain(format!(
            "precision@{top} needs at least {top} scored pairs, table has {}",
            table.len()
        )));
    }
    if probe.is_empty() {
        return Err(Error::domain("probe set is empty"));
    }
    let probe_set: HashSet<(NodeId, NodeId)> =
        probe.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let pairs = table.pairs();
    let hits = table
        .top_indices(top)
        .iter()
        .filter(|&&i| probe_set.contains(&pairs[i]))
        .count();
    Ok(hits as f64 / top as f64)
}

/// Knobs shared by [`run_experiment`] and [`sweep_alpha`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub probe_fraction: f64,
    pub auc: AucConfig,
    /// `L` for Precision@L.
    pub top_l: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            probe_fraction: DEFAULT_PROBE_FRACTION,
            auc: AucConfig::default(),
            top_l: 100,
        }
    }
}

/// Metrics of one split/score/evaluate cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub auc: f64,
    pub precision: f64,
}

/// Averaged metrics for one dataset x index configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub spec: IndexSpec,
    pub runs: usize,
    pub base_seed: u64,
    pub probe_fraction: f64,
    pub top_l: usize,
    pub per_run: Vec<RunOutcome>,
    pub mean_auc: f64,
    pub mean_precision: f64,
}

impl ExperimentResult {
    pub const CSV_HEADER: &'static str = "dataset,index,alpha,l,runs,mean_auc,mean_precision";

    pub fn csv_summary_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.dataset,
            self.spec.family,
            self.spec.effective_alpha(),
            self.spec.l,
            self.runs,
            self.mean_auc,
            self.mean_precision
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}

fn evaluate_table(
    table: &ScoreTable,
    probe_pairs: &[(NodeId, NodeId)],
    options: &EvalOptions,
    run_seed: u64,
) -> Result<(f64, f64)> {
    let cross = probe_pairs.len() as u64 * (table.len() - probe_pairs.len()) as u64;
    let mode = options.auc.mode_for(run_seed, cross);
    let auc_value = auc(table, probe_pairs, &mode)?;
    let precision = precision_at(table, probe_pairs, options.top_l)?;
    Ok((auc_value, precision))
}

/// Runs `runs` independent split/score/evaluate cycles and averages the
/// metrics. Run `r` splits with seed `base_seed + r`.
pub fn run_experiment(
    g: &WeightedGraph,
    dataset: &str,
    spec: &IndexSpec,
    runs: usize,
    base_seed: u64,
    options: &EvalOptions,
) -> Result<ExperimentResult> {
    spec.validate()?;
    if runs == 0 {
        return Err(Error::domain("need at least one run"));
    }
    let per_run: Vec<RunOutcome> = (0..runs as u64)
        .into_par_iter()
        .map(|r| -> Result<RunOutcome> {
            let seed = base_seed.wrapping_add(r);
            let (train, probe) = split_edges(
                g,
                &SplitSpec {
                    probe_fraction: options.probe_fraction,
                    seed,
                },
            )?;
            let table = crate::indices::score_all_pairs(&train, spec)?;
            let probe_pairs: Vec<(NodeId, NodeId)> = probe.iter().map(|l| l.pair()).collect();
            let (auc, precision) = evaluate_table(&table, &probe_pairs, options, seed)?;
            Ok(RunOutcome {
                seed,
                auc,
                precision,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentResult {
        dataset: dataset.to_string(),
        spec: *spec,
        runs,
        base_seed,
        probe_fraction: options.probe_fraction,
        top_l: options.top_l,
        mean_auc: mean(per_run.iter().map(|r| r.auc)),
        mean_precision: mean(per_run.iter().map(|r| r.precision)),
        per_run,
    })
}

/// Mean metrics at one sweep grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub mean_auc: f64,
    pub mean_precision: f64,
}

/// The grid point where a metric peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptimum {
    pub alpha: f64,
    pub value: f64,
}

/// Metric curves over an alpha grid, with identical splits at every alpha.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub dataset: String,
    pub family: IndexFamily,
    pub l: u8,
    pub epsilon: f64,
    pub runs: usize,
    pub base_seed: u64,
    pub probe_fraction: f64,
    pub top_l: usize,
    pub points: Vec<SweepPoint>,
    pub best_auc: SweepOptimum,
    pub best_precision: SweepOptimum,
}

impl SweepResult {
    pub const CSV_HEADER: &'static str = "dataset,index,l,alpha,mean_auc,mean_precision";

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.points.iter().map(move |p| {
            format!(
                "{},{},{},{},{},{}",
                self.dataset, self.family, self.l, p.alpha, p.mean_auc, p.mean_precision
            )
        })
    }
}

/// Evenly spaced grid `[lo, lo+step, ..]` up to and including `hi` (within
/// half a step). The default benchmark grid is `alpha_grid(-2.0, 2.0, 0.1)`.
pub fn alpha_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::domain("invalid alpha grid bounds"));
    }
    let count = ((hi - lo) / step).round() as usize + 1;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// Sweeps `family` over `alphas`, averaging each grid point over `runs`
/// splits. The split for run `r` is shared by every alpha, so the resulting
/// curves are comparable point for point.
#[allow(clippy::too_many_arguments)]
pub fn sweep_alpha(
    g: &WeightedGraph,
    dataset: &str,
    family: IndexFamily,
    l: u8,
    epsilon: f64,
    alphas: &[f64],
    runs: usize,
    base_seed: u64,
    options: &EvalOptions,
) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::domain("alpha grid is empty"));
    }
    if runs == 0 {
        return Err(Error::domain("need at least one run"));
    }
    let spec = IndexSpec::new(family).with_l(l).with_epsilon(epsilon);
    spec.validate()?;

    let mut auc_sums = vec![0.0f64; alphas.len()];
    let mut precision_sums = vec![0.0f64; alphas.len()];

    for r in 0..runs as u64 {
        let seed = base_seed.wrapping_add(r);
        let (train, probe) = split_edges(
            g,
            &SplitSpec {
                probe_fraction: options.probe_fraction,
                seed,
            },
        )?;
        let probe_pairs: Vec<(NodeId, NodeId)> = probe.iter().map(|l| l.pair()).collect();
        let pairs = std::sync::Arc::new(train.unlinked_pairs());

        // Unweighted families give a flat curve: evaluate once, replicate.
        let chunk_size = if family.uses_alpha() {
            MAX_ALPHA_CHUNK
        } else {
            alphas.len()
        };
        for (chunk_idx, chunk) in alphas.chunks(chunk_size).enumerate() {
            let grid: GridScores = score_grid(&train, &spec, chunk, pairs.clone())?;
            for (t, _) in chunk.iter().enumerate() {
                let table = grid.table(t, spec);
                let (auc_value, precision) = evaluate_table(&table, &probe_pairs, options, seed)?;
                let global = chunk_idx * chunk_size + t;
                auc_sums[global] += auc_value;
                precision_sums[global] += precision;
            }
        }
    }

    let points: Vec<SweepPoint> = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| SweepPoint {
            alpha,
            mean_auc: auc_sums[i] / runs as f64,
            mean_precision: precision_sums[i] / runs as f64,
        })
        .collect();
    let best = |metric: fn(&SweepPoint) -> f64| -> SweepOptimum {
        let mut best = SweepOptimum {
            alpha: points[0].alpha,
            value: metric(&points[0]),
        };
        for p in &points[1..] {
            if metric(p) > best.value {
                best = SweepOptimum {
                    alpha: p.alpha,
                    value: metric(p),
                };
            }
        }
        best
    };
    Ok(SweepResult {
        dataset: dataset.to_string(),
        family,
        l,
        epsilon,
        runs,
        base_seed,
        probe_fraction: options.probe_fraction,
        top_l: options.top_l,
        best_auc: best(|p| p.mean_auc),
        best_precision: best(|p| p.mean_precision),
        points,
    })
}
