//! Weight learning: online hard EM, batch soft EM and projected gradient
//! ascent, plus the pruning step that turns a dense trained network into a
//! sparse one.
//!
//! Count-based modes keep a [`CountTable`] of per-edge sufficient
//! statistics and derive weights from it with additive smoothing. Within a
//! mini-batch the E-steps run in parallel against the unchanged network;
//! their results are merged in instance order, so a run is reproducible
//! bit for bit from its seed.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SpnError};
use crate::graph::{validate, Node, NodeId, Spn};
use crate::inference::{
    marginals_with, mpe_with, Evidence, MpeMode, PassState, Selection, UpRule,
};

/// Accumulated per-edge counts with additive smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    counts: Vec<Vec<f64>>,
    alpha: f64,
}

impl CountTable {
    /// Zero counts for every sum edge of `spn`.
    pub fn new(spn: &Spn, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "smoothing pseudo-count must be non-negative");
        let counts = spn
            .nodes()
            .iter()
            .map(|n| match n {
                Node::Sum { children } => vec![0.0; children.len()],
                _ => Vec::new(),
            })
            .collect();
        Self { counts, alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn count(&self, node: NodeId, edge: usize) -> f64 {
        self.counts[node][edge]
    }

    pub fn node_counts(&self, node: NodeId) -> &[f64] {
        &self.counts[node]
    }

    pub fn add(&mut self, node: NodeId, edge: usize, amount: f64) {
        let c = &mut self.counts[node][edge];
        *c = (*c + amount).max(0.0);
    }

    /// Adds another table's counts, e.g. a worker's partial table.
    pub fn merge(&mut self, other: &CountTable) {
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().flatten().for_each(|c| *c = 0.0);
    }

    /// `(c_ij + α) / (Σ_j c_ij + α·|Ch(i)|)`; uniform when both the counts
    /// and `α` are zero.
    pub fn weights(&self, node: NodeId) -> Vec<f64> {
        let counts = &self.counts[node];
        let denom = counts.iter().sum::<f64>() + self.alpha * counts.len() as f64;
        if denom <= 0.0 {
            return vec![1.0 / counts.len() as f64; counts.len()];
        }
        counts.iter().map(|c| (c + self.alpha) / denom).collect()
    }

    /// Writes the derived weights into every sum node of `spn`.
    pub fn apply(&self, spn: &mut Spn) {
        for (id, counts) in self.counts.iter().enumerate() {
            if !counts.is_empty() {
                spn.set_weights(id, &self.weights(id)).expect("count table matches network");
            }
        }
    }
}

/// Hard EM E-step: the sum-node choices of the MPE explanation of `e`.
///
/// With `l0 > 0`, choosing an edge whose count is still zero costs `l0`
/// nats, which is the sparsity prior on non-zero weights applied while
/// searching for the MAP state. With a `tie_seed`, exact ties between
/// children are broken at random instead of by lowest id.
pub fn hard_em_selections(
    spn: &Spn,
    counts: &CountTable,
    e: &Evidence,
    mode: MpeMode,
    l0: f64,
    tie_seed: Option<u64>,
    pass: &mut PassState,
) -> Result<Vec<Selection>> {
    let penalty = |node: NodeId, edge: usize| {
        let prior = if l0 > 0.0 && counts.count(node, edge) == 0.0 { l0 } else { 0.0 };
        let jitter = tie_seed.map_or(0.0, |seed| TIE_JITTER * unit_hash(seed, node, edge));
        prior + jitter
    };
    Ok(mpe_with(spn, e, mode, pass, penalty)?.selections)
}

const TIE_JITTER: f64 = 1e-9;

fn unit_hash(seed: u64, node: NodeId, edge: usize) -> f64 {
    let mut z = seed ^ (node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (edge as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// One online hard EM step: increments the winning child's count at every
/// sum node the MPE selection reaches. Returns the number of increments.
pub fn hard_em_update(
    spn: &Spn,
    counts: &mut CountTable,
    e: &Evidence,
    mode: MpeMode,
) -> Result<usize> {
    let selections = hard_em_selections(spn, counts, e, mode, 0.0, None, &mut PassState::new(spn))?;
    for s in &selections {
        counts.add(s.sum, s.edge, 1.0);
    }
    Ok(selections.len())
}

/// Soft EM E-step: expected use of every sum edge given `e`.
pub fn soft_em_flows(spn: &Spn, e: &Evidence, pass: &mut PassState) -> Result<Vec<Option<Vec<f64>>>> {
    Ok(marginals_with(spn, e, pass)?.flows)
}

/// Adds the posterior edge usage of `e` to `counts`.
pub fn soft_em_update(spn: &Spn, counts: &mut CountTable, e: &Evidence) -> Result<()> {
    let flows = soft_em_flows(spn, e, &mut PassState::new(spn))?;
    add_flows(counts, &flows);
    Ok(())
}

fn add_flows(counts: &mut CountTable, flows: &[Option<Vec<f64>>]) {
    for (id, f) in flows.iter().enumerate() {
        if let Some(f) = f {
            for (k, &v) in f.iter().enumerate() {
                counts.add(id, k, v);
            }
        }
    }
}

/// Per-edge `∂ log S(x)/∂w` summed over a batch, with the instances that
/// had zero probability.
#[derive(Debug, Clone)]
pub struct BatchGradient {
    pub gradient: Vec<Vec<f64>>,
    pub used: usize,
    pub skipped: usize,
}

pub fn log_likelihood_gradient(spn: &Spn, batch: &[Evidence]) -> Result<BatchGradient> {
    let per_instance: Vec<Result<Option<Vec<Vec<f64>>>>> = batch
        .par_iter()
        .map_init(
            || PassState::new(spn),
            |pass, e| {
                let log_s = pass.upward(spn, e, UpRule::Sum)?;
                if !log_s.is_finite() {
                    return Ok(None);
                }
                pass.downward(spn);
                Ok(Some(
                    spn.nodes()
                        .iter()
                        .enumerate()
                        .map(|(id, n)| match n {
                            Node::Sum { children } => pass
                                .log_weight_gradients(id, children.len())
                                .iter()
                                .map(|g| (g - log_s).exp())
                                .collect(),
                            _ => Vec::new(),
                        })
                        .collect(),
                ))
            },
        )
        .collect();

    let mut gradient: Vec<Vec<f64>> = spn
        .nodes()
        .iter()
        .map(|n| match n {
            Node::Sum { children } => vec![0.0; children.len()],
            _ => Vec::new(),
        })
        .collect();
    let (mut used, mut skipped) = (0, 0);
    for r in per_instance {
        match r? {
            Some(g) => {
                used += 1;
                for (acc, gi) in gradient.iter_mut().zip(g) {
                    for (a, b) in acc.iter_mut().zip(gi) {
                        *a += b;
                    }
                }
            }
            None => skipped += 1,
        }
    }
    Ok(BatchGradient { gradient, used, skipped })
}

/// One projected gradient-ascent step on the mean log-likelihood of
/// `batch`. The gradient is projected onto the sum-to-one constraint of
/// each sum node, weights are clamped at zero and renormalized. `l1`
/// subtracts a constant from the gradient of every positive weight.
pub fn gradient_update(spn: &mut Spn, batch: &[Evidence], eta: f64, l1: f64) -> Result<BatchGradient> {
    let grad = log_likelihood_gradient(spn, batch)?;
    if grad.used == 0 {
        return Ok(grad);
    }
    let scale = 1.0 / grad.used as f64;
    let sums: Vec<(NodeId, Vec<f64>)> =
        spn.sum_nodes().map(|(id, ch)| (id, ch.iter().map(|&(_, w)| w).collect())).collect();
    for (id, weights) in sums {
        let mut g: Vec<f64> = grad.gradient[id]
            .iter()
            .zip(&weights)
            .map(|(g, &w)| g * scale - if w > 0.0 { l1 } else { 0.0 })
            .collect();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter_mut().for_each(|x| *x -= mean);
        let mut next: Vec<f64> = weights.iter().zip(&g).map(|(w, g)| (w + eta * g).max(0.0)).collect();
        let total: f64 = next.iter().sum();
        if total > 0.0 && total.is_finite() {
            next.iter_mut().for_each(|w| *w /= total);
            spn.set_weights(id, &next)?;
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneStats {
    pub edges_removed: usize,
    pub nodes_removed: usize,
}

/// Drops zero-weight sum edges, nodes that can only evaluate to zero, and
/// everything no longer reachable from the root. Ids are compacted with
/// their relative order kept. Network values are unchanged.
pub fn prune_zero_weights(spn: &Spn) -> Result<(Spn, PruneStats)> {
    let n = spn.len();
    let mut alive = vec![false; n];
    for (id, node) in spn.nodes().iter().enumerate() {
        alive[id] = match node {
            Node::Sum { children } => children.iter().any(|&(c, w)| w > 0.0 && alive[c]),
            Node::Product { children } => children.iter().all(|&c| alive[c]),
            _ => true,
        };
    }
    if !alive[spn.root()] {
        return Err(SpnError::DegenerateModel);
    }

    let mut edges_removed = 0;
    let mut filtered: Vec<Node> = spn
        .nodes()
        .iter()
        .map(|node| match node {
            Node::Sum { children } => {
                let kept: Vec<(NodeId, f64)> =
                    children.iter().copied().filter(|&(c, w)| w > 0.0 && alive[c]).collect();
                edges_removed += children.len() - kept.len();
                Node::Sum { children: kept }
            }
            other => other.clone(),
        })
        .collect();

    let mut keep = vec![false; n];
    keep[spn.root()] = true;
    for id in (0..=spn.root()).rev() {
        if keep[id] {
            for c in filtered[id].child_ids() {
                keep[c] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for id in 0..n {
        if keep[id] {
            remap[id] = next;
            next += 1;
        }
    }
    for (id, node) in filtered.iter_mut().enumerate() {
        if !keep[id] {
            continue;
        }
        match node {
            Node::Sum { children } => children.iter_mut().for_each(|(c, _)| *c = remap[*c]),
            Node::Product { children } => children.iter_mut().for_each(|c| *c = remap[*c]),
            _ => {}
        }
    }
    let nodes: Vec<Node> =
        filtered.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(node, _)| node).collect();
    let nodes_removed = n - nodes.len();
    let pruned = Spn::from_parts(spn.vars().clone(), nodes, remap[spn.root()])?;
    Ok((pruned, PruneStats { edges_removed, nodes_removed }))
}

/// Zeroes every edge no instance selected (keeping at least one edge per
/// node), rederives the remaining weights from the counts and prunes.
pub fn prune_unused_edges(spn: &Spn, counts: &CountTable) -> Result<(Spn, PruneStats)> {
    let mut sparse = spn.clone();
    for (id, _) in spn.sum_nodes() {
        let c = counts.node_counts(id);
        if c.iter().all(|&x| x == 0.0) {
            continue;
        }
        let kept = c.iter().filter(|&&x| x > 0.0).count() as f64;
        let denom = c.iter().sum::<f64>() + counts.alpha() * kept;
        let w: Vec<f64> =
            c.iter().map(|&x| if x > 0.0 { (x + counts.alpha()) / denom } else { 0.0 }).collect();
        sparse.set_weights(id, &w)?;
    }
    prune_zero_weights(&sparse)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    #[default]
    HardEm,
    SoftEm,
    Gradient,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub mode: TrainMode,
    /// Gradient step size.
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Stop once the average log-likelihood improves by less than this.
    pub threshold: f64,
    pub max_epochs: usize,
    /// L0 penalty on non-zero weights (hard EM).
    pub l0: f64,
    /// L1 penalty on weights (gradient mode).
    pub l1: f64,
    /// Additive smoothing pseudo-count (EM modes).
    pub alpha: f64,
    pub mpe_mode: MpeMode,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: TrainMode::HardEm,
            learning_rate: 0.1,
            batch_size: 50,
            threshold: 0.1,
            max_epochs: 50,
            l0: 1.0,
            l1: 0.0,
            alpha: 1.0,
            mpe_mode: MpeMode::SumUpMaxDown,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(SpnError::Input(format!("invalid training config: {what}")));
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.threshold > 0.0) {
            return bad("convergence threshold must be positive");
        }
        if !(self.l0 >= 0.0 && self.l1 >= 0.0 && self.alpha >= 0.0) {
            return bad("penalties and smoothing must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub avg_ll: f64,
    pub seconds: f64,
    pub batch_seconds: Vec<f64>,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "epoch={} avg_ll={} seconds={:.6}", self.epoch, self.avg_ll, self.seconds)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub initial_ll: f64,
    pub epochs: Vec<EpochRecord>,
    pub converged: bool,
    /// Instance visits skipped because the instance had zero probability.
    pub skipped: usize,
    pub prune: PruneStats,
}

impl fmt::Display for TrainLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.epochs {
            writeln!(f, "{e}")?;
        }
        write!(
            f,
            "converged={} skipped={} pruned_edges={} pruned_nodes={}",
            self.converged, self.skipped, self.prune.edges_removed, self.prune.nodes_removed
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub spn: Spn,
    pub log: TrainLog,
}

fn instance_seed(seed: u64, epoch: usize, instance: usize) -> u64 {
    seed.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ ((epoch as u64) << 40) ^ instance as u64
}

/// Mean `log S(x)` over `data`, evaluated in parallel and summed in order.
pub fn average_log_likelihood(spn: &Spn, data: &[Evidence]) -> Result<f64> {
    let values: Vec<Result<f64>> = data
        .par_iter()
        .map_init(|| PassState::new(spn), |pass, e| pass.upward(spn, e, UpRule::Sum))
        .collect();
    let mut total = 0.0;
    for v in values {
        total += v?;
    }
    Ok(total / data.len() as f64)
}

/// Trains the weights of `spn` on `data` and prunes the result.
///
/// Count-based modes start from zero counts (uniform smoothed weights);
/// gradient mode starts from uniform weights. Epochs visit the data in a
/// seeded random order, in mini-batches of `batch_size`.
pub fn train(mut spn: Spn, data: &[Evidence], config: &TrainConfig) -> Result<TrainOutcome> {
    config.check()?;
    if data.is_empty() {
        return Err(SpnError::Input("training set is empty".into()));
    }
    let report = validate(&spn);
    if !report.is_valid() {
        return Err(SpnError::InvalidNetwork(report.to_string()));
    }
    for e in data {
        e.check(spn.vars())?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts = CountTable::new(&spn, config.alpha);
    counts.apply(&mut spn);
    let mut log = TrainLog { initial_ll: average_log_likelihood(&spn, data)?, ..Default::default() };
    let mut previous = log.initial_ll;
    let mut assignments: Vec<Option<Vec<Selection>>> = vec![None; data.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        let mut batch_seconds = Vec::new();
        order.shuffle(&mut rng);
        if config.mode == TrainMode::SoftEm {
            counts.clear();
        }
        for batch in order.chunks(config.batch_size) {
            let batch_start = Instant::now();
            match config.mode {
                TrainMode::HardEm => {
                    let results: Vec<Result<Vec<Selection>>> = batch
                        .par_iter()
                        .map_init(
                            || PassState::new(&spn),
                            |pass, &i| {
                                hard_em_selections(
                                    &spn,
                                    &counts,
                                    &data[i],
                                    config.mpe_mode,
                                    config.l0,
                                    Some(instance_seed(config.seed, epoch, i)),
                                    pass,
                                )
                            },
                        )
                        .collect();
                    for (&i, r) in batch.iter().zip(results) {
                        match r {
                            Ok(selections) => {
                                if let Some(old) = assignments[i].take() {
                                    for s in old {
                                        counts.add(s.sum, s.edge, -1.0);
                                    }
                                }
                                for s in &selections {
                                    counts.add(s.sum, s.edge, 1.0);
                                }
                                assignments[i] = Some(selections);
                            }
                            Err(SpnError::ZeroEvidence) => log.skipped += 1,
                            Err(e) => return Err(e),
                        }
                    }
                    counts.apply(&mut spn);
                }
                TrainMode::SoftEm => {
                    let results: Vec<Result<Vec<Option<Vec<f64>>>>> = batch
                        .par_iter()
                        .map_init(|| PassState::new(&spn), |pass, &i| soft_em_flows(&spn, &data[i], pass))
                        .collect();
                    for r in results {
                        match r {
                            Ok(flows) => add_flows(&mut counts, &flows),
                            Err(SpnError::ZeroEvidence) => log.skipped += 1,
                            Err(e) => return Err(e),
                        }
                    }
                }
                TrainMode::Gradient => {
                    let instances: Vec<Evidence> = batch.iter().map(|&i| data[i].clone()).collect();
                    let g = gradient_update(&mut spn, &instances, config.learning_rate, config.l1)?;
                    log.skipped += g.skipped;
                }
            }
            batch_seconds.push(batch_start.elapsed().as_secs_f64());
        }
        if config.mode == TrainMode::SoftEm {
            counts.apply(&mut spn);
        }

        let avg_ll = average_log_likelihood(&spn, data)?;
        if avg_ll.is_nan() {
            return Err(SpnError::Diverged { epoch });
        }
        log.epochs.push(EpochRecord {
            epoch,
            avg_ll,
            seconds: started.elapsed().as_secs_f64(),
            batch_seconds,
        });
        let improved = avg_ll - previous;
        previous = avg_ll;
        if !(improved >= config.threshold) {
            log.converged = true;
            break;
        }
    }

    let (pruned, stats) = if config.mode == TrainMode::HardEm && config.l0 > 0.0 {
        prune_unused_edges(&spn, &counts)?
    } else {
        prune_zero_weights(&spn)?
    };
    log.prune = stats;
    Ok(TrainOutcome { spn: pruned, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{SpnBuilder, VariableTable, FALSE, TRUE};
    use crate::inference::{evaluate, mpe, Obs};
    use crate::oracle::{build_fig1_mixture, linear_value, StateTable};

    fn single_sum() -> (Spn, NodeId) {
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let nx = b.indicator(0, FALSE).unwrap();
        let root = b.sum(vec![(x, 0.5), (nx, 0.5)]).unwrap();
        (b.build(root).unwrap(), root)
    }

    #[test]
    fn three_wins_with_add_one_smoothing() {
        let (spn, root) = single_sum();
        let mut counts = CountTable::new(&spn, 1.0);
        for _ in 0..3 {
            counts.add(root, 0, 1.0);
        }
        assert_eq!(counts.weights(root), vec![0.8, 0.2]);
    }

    #[test]
    fn no_data_means_uniform_weights() {
        let (spn, root) = single_sum();
        assert_eq!(CountTable::new(&spn, 1.0).weights(root), vec![0.5, 0.5]);
    }

    #[test]
    fn hard_em_increments_the_observed_child() {
        let (spn, root) = single_sum();
        let mut counts = CountTable::new(&spn, 1.0);
        for _ in 0..3 {
            let n = hard_em_update(&spn, &mut counts, &Evidence::from_values(&[TRUE]), MpeMode::MaxMax)
                .unwrap();
            assert_eq!(n, 1);
        }
        assert_eq!(counts.node_counts(root), &[3.0, 0.0]);
        assert_eq!(counts.weights(root), vec![0.8, 0.2]);
    }

    #[test]
    fn soft_em_observed_child_gets_full_posterior() {
        let (spn, root) = single_sum();
        let mut counts = CountTable::new(&spn, 1.0);
        soft_em_update(&spn, &mut counts, &Evidence::from_values(&[TRUE])).unwrap();
        assert!((counts.count(root, 0) - 1.0).abs() < 1e-12);
        assert!(counts.count(root, 1).abs() < 1e-12);
    }

    #[test]
    fn soft_em_without_evidence_adds_the_prior() {
        let spn = build_fig1_mixture();
        let mut counts = CountTable::new(&spn, 1.0);
        soft_em_update(&spn, &mut counts, &Evidence::marginal(2)).unwrap();
        let got = counts.node_counts(spn.root());
        for (g, w) in got.iter().zip([0.5, 0.2, 0.3]) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn single_sum_gradient() {
        let (spn, root) = single_sum();
        let g = crate::inference::weight_gradients(&spn, &Evidence::from_values(&[TRUE])).unwrap();
        assert_eq!(g[root], vec![1.0, 0.0]);
    }

    #[test]
    fn fig1_gradient_matches_finite_differences() {
        let spn = build_fig1_mixture();
        let h = 1e-5;
        for state in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let e = Evidence::from_values(&state);
            let analytic = crate::inference::weight_gradients(&spn, &e).unwrap();
            for (id, children) in spn.sum_nodes() {
                for k in 0..children.len() {
                    let mut w: Vec<f64> = children.iter().map(|&(_, w)| w).collect();
                    let base = w[k];
                    let mut plus = spn.clone();
                    w[k] = base + h;
                    plus.set_weights(id, &w).unwrap();
                    let mut minus = spn.clone();
                    w[k] = base - h;
                    minus.set_weights(id, &w).unwrap();
                    let fd = (linear_value(&plus, &e) - linear_value(&minus, &e)) / (2.0 * h);
                    let a = analytic[id][k];
                    assert!((a - fd).abs() <= 1e-5 * a.abs().max(fd.abs()) + 1e-12, "{a} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn marginalized_gradient_projects_to_zero() {
        let spn = build_fig1_mixture();
        let mut stepped = spn.clone();
        gradient_update(&mut stepped, &[Evidence::marginal(2)], 0.5, 0.0).unwrap();
        for ((_, a), (_, b)) in spn.sum_nodes().zip(stepped.sum_nodes()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x.1 - y.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prune_without_zeros_is_a_no_op() {
        let spn = build_fig1_mixture();
        let (pruned, stats) = prune_zero_weights(&spn).unwrap();
        assert_eq!(pruned, spn);
        assert_eq!(stats, PruneStats::default());
    }

    #[test]
    fn prune_removes_zero_edge_and_detached_subtree() {
        let mut b = SpnBuilder::new(VariableTable::boolean(2).unwrap());
        let leaves: Vec<NodeId> =
            (0..2).flat_map(|v| [TRUE, FALSE].map(|t| (v, t))).map(|(v, t)| b.indicator(v, t).unwrap()).collect();
        let s0 = b.sum(vec![(leaves[0], 0.5), (leaves[1], 0.5)]).unwrap();
        let s1 = b.sum(vec![(leaves[2], 0.5), (leaves[3], 0.5)]).unwrap();
        let s2 = b.sum(vec![(leaves[2], 0.1), (leaves[3], 0.9)]).unwrap();
        let p0 = b.product(vec![s0, s1]).unwrap();
        let p1 = b.product(vec![s0, s1]).unwrap();
        let p2 = b.product(vec![s0, s2]).unwrap();
        let root = b.sum(vec![(p0, 0.7), (p1, 0.3), (p2, 0.0)]).unwrap();
        let spn = b.build(root).unwrap();
        let (pruned, stats) = prune_zero_weights(&spn).unwrap();
        let Node::Sum { children } = pruned.node(pruned.root()) else { unreachable!() };
        assert_eq!(children.len(), 2);
        assert_eq!(stats.edges_removed, 1);
        // p2 and s2 are gone.
        assert_eq!(stats.nodes_removed, 2);
        let table = StateTable::new(&spn).unwrap();
        for e in table.all_evidence() {
            let a = evaluate(&spn, &e).unwrap();
            let b = evaluate(&pruned, &e).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn prune_rejects_an_all_zero_root() {
        let (mut spn, root) = single_sum();
        spn.set_weights(root, &[0.0, 0.0]).unwrap();
        assert!(matches!(prune_zero_weights(&spn), Err(SpnError::DegenerateModel)));
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let spn = build_fig1_mixture();
        let table = StateTable::new(&spn).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<Evidence> =
            (0..200).map(|_| Evidence::from_values(&table.sample(&mut rng))).collect();
        for mode in [TrainMode::HardEm, TrainMode::SoftEm, TrainMode::Gradient] {
            let cfg = TrainConfig { mode, seed: 5, batch_size: 16, ..Default::default() };
            let a = train(spn.clone(), &data, &cfg).unwrap();
            let b = train(spn.clone(), &data, &cfg).unwrap();
            assert_eq!(a.spn, b.spn, "{mode:?}");
        }
    }

    #[test]
    fn single_instance_is_memorized() {
        let spn = build_fig1_mixture();
        let data = vec![Evidence::from_values(&[0, 1])];
        let out = train(spn, &data, &TrainConfig::default()).unwrap();
        for var in 0..2 {
            let partial = data[0].clone().with(var, Obs::Missing);
            let r = mpe(&out.spn, &partial, MpeMode::SumUpMaxDown).unwrap();
            assert_eq!(r.discrete_state(), vec![0, 1]);
        }
    }

    #[test]
    fn training_rejects_bad_input() {
        let spn = build_fig1_mixture();
        assert!(train(spn.clone(), &[], &TrainConfig::default()).is_err());
        let cfg = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(train(spn.clone(), &[Evidence::marginal(2)], &cfg).is_err());
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let p = b.product(vec![x, b.len() - 1]).unwrap();
        let nx = b.indicator(0, FALSE).unwrap();
        let bad = b.product(vec![p, nx]).unwrap();
        let invalid = b.build(bad).unwrap();
        assert!(matches!(
            train(invalid, &[Evidence::marginal(1)], &TrainConfig::default()),
            Err(SpnError::InvalidNetwork(_))
        ));
    }

    #[test]
    fn epoch_record_format() {
        let r = EpochRecord { epoch: 3, avg_ll: -1.25, seconds: 0.5, batch_seconds: vec![] };
        assert_eq!(r.to_string(), "epoch=3 avg_ll=-1.25 seconds=0.500000");
    }
}
