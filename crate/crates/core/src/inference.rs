//! Exact inference by circuit evaluation.
//!
//! Everything runs in log space: products add, sums use log-sum-exp and an
//! exact zero is `-inf`. An upward pass computes `log S_n(e)` for every
//! node, a downward pass computes `log ∂S(e)/∂S_n(e)`, and MPE replaces the
//! sums of the downward selection with maximizations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Result, SpnError};
use crate::graph::{Node, NodeId, Spn, VarKind, VariableTable};

/// Observation state of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obs {
    /// Summed out: every indicator of the variable is set to 1.
    Missing,
    /// Discrete variable observed at a value index.
    Value(usize),
    /// Continuous variable observed at a real value.
    Real(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    obs: Vec<Obs>,
}

impl Evidence {
    /// Evidence with every variable marginalized.
    pub fn marginal(var_count: usize) -> Self {
        Self { obs: vec![Obs::Missing; var_count] }
    }

    /// A complete state of discrete variables.
    pub fn from_values(values: &[usize]) -> Self {
        Self { obs: values.iter().map(|&v| Obs::Value(v)).collect() }
    }

    pub fn from_obs(obs: Vec<Obs>) -> Self {
        Self { obs }
    }

    pub fn with(mut self, var: usize, obs: Obs) -> Self {
        self.obs[var] = obs;
        self
    }

    pub fn set(&mut self, var: usize, obs: Obs) {
        self.obs[var] = obs;
    }

    pub fn get(&self, var: usize) -> Obs {
        self.obs[var]
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn as_slice(&self) -> &[Obs] {
        &self.obs
    }

    pub fn is_observed(&self, var: usize) -> bool {
        !matches!(self.obs[var], Obs::Missing)
    }

    pub fn check(&self, vars: &VariableTable) -> Result<()> {
        if self.obs.len() != vars.len() {
            return Err(SpnError::EvidenceLength { expected: vars.len(), found: self.obs.len() });
        }
        for (var, (obs, kind)) in self.obs.iter().zip(vars.kinds()).enumerate() {
            let bad = |reason: String| Err(SpnError::InvalidObservation { var, reason });
            match (obs, kind) {
                (Obs::Missing, _) => {}
                (Obs::Value(v), VarKind::Discrete { arity }) => {
                    if v >= arity {
                        return bad(format!("value {v} out of range for arity {arity}"));
                    }
                }
                (Obs::Real(x), VarKind::Continuous) => {
                    if !x.is_finite() {
                        return bad(format!("non-finite observation {x}"));
                    }
                }
                (Obs::Value(_), VarKind::Continuous) => {
                    return bad("discrete observation on a continuous variable".into())
                }
                (Obs::Real(_), VarKind::Discrete { .. }) => {
                    return bad("real observation on a discrete variable".into())
                }
            }
        }
        Ok(())
    }
}

/// `log(exp(a) + exp(b))` without overflow; `-inf` is the additive identity.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn gaussian_log_density(x: f64, mean: f64, variance: f64) -> f64 {
    let diff = x - mean;
    -0.5 * (2.0 * PI * variance).ln() - diff * diff / (2.0 * variance)
}

/// How sum nodes combine their children during the upward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpRule {
    Sum,
    Max,
}

/// Log value of a leaf under the evidence.
fn leaf_log_value(node: &Node, e: &Evidence, rule: UpRule) -> f64 {
    match *node {
        Node::Indicator { var, value } => match e.get(var) {
            Obs::Value(v) if v != value => f64::NEG_INFINITY,
            _ => 0.0,
        },
        Node::Gaussian { var, mean, variance } => match e.get(var) {
            Obs::Real(x) => gaussian_log_density(x, mean, variance),
            // Integrating the density gives 1; maximizing it gives its peak.
            _ => match rule {
                UpRule::Sum => 0.0,
                UpRule::Max => gaussian_log_density(mean, mean, variance),
            },
        },
        _ => unreachable!("not a leaf"),
    }
}

/// Per-node scratch for the upward and downward passes. Reusable across
/// evidence for the same network.
#[derive(Debug, Clone)]
pub struct PassState {
    up: Vec<f64>,
    down: Vec<f64>,
    edge_offsets: Vec<usize>,
    edge_grad: Vec<f64>,
    root: NodeId,
}

impl PassState {
    pub fn new(spn: &Spn) -> Self {
        let mut edge_offsets = Vec::with_capacity(spn.len());
        let mut total = 0;
        for node in spn.nodes() {
            edge_offsets.push(total);
            if let Node::Sum { children } = node {
                total += children.len();
            }
        }
        Self {
            up: vec![f64::NEG_INFINITY; spn.len()],
            down: vec![f64::NEG_INFINITY; spn.len()],
            edge_offsets,
            edge_grad: vec![f64::NEG_INFINITY; total],
            root: spn.root(),
        }
    }

    /// Log values of every node under `e`; returns the root's.
    pub fn upward(&mut self, spn: &Spn, e: &Evidence, rule: UpRule) -> Result<f64> {
        e.check(spn.vars())?;
        debug_assert_eq!(self.up.len(), spn.len());
        for (id, node) in spn.nodes().iter().enumerate() {
            let v = match node {
                Node::Sum { children } => {
                    let terms = children
                        .iter()
                        .filter(|&&(c, w)| w > 0.0 && self.up[c] > f64::NEG_INFINITY)
                        .map(|&(c, w)| w.ln() + self.up[c]);
                    match rule {
                        UpRule::Max => terms.fold(f64::NEG_INFINITY, f64::max),
                        UpRule::Sum => {
                            let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
                            if max == f64::NEG_INFINITY {
                                max
                            } else {
                                max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
                            }
                        }
                    }
                }
                Node::Product { children } => children.iter().map(|&c| self.up[c]).sum(),
                leaf => leaf_log_value(leaf, e, rule),
            };
            self.up[id] = v;
        }
        Ok(self.up[self.root])
    }

    /// Log derivatives of the root with respect to every node and every
    /// sum-edge weight. Requires a preceding upward pass.
    pub fn downward(&mut self, spn: &Spn) {
        self.down.iter_mut().for_each(|d| *d = f64::NEG_INFINITY);
        self.edge_grad.iter_mut().for_each(|g| *g = f64::NEG_INFINITY);
        self.down[self.root] = 0.0;
        let mut prefix = Vec::new();
        for id in (0..=self.root).rev() {
            let d = self.down[id];
            if d == f64::NEG_INFINITY {
                continue;
            }
            match spn.node(id) {
                Node::Sum { children } => {
                    let off = self.edge_offsets[id];
                    for (k, &(c, w)) in children.iter().enumerate() {
                        self.edge_grad[off + k] = d + self.up[c];
                        if w > 0.0 {
                            self.down[c] = log_add(self.down[c], d + w.ln());
                        }
                    }
                }
                Node::Product { children } => {
                    // Product of the siblings at each position via prefix and
                    // suffix sums, which stays exact when a sibling is zero.
                    prefix.clear();
                    prefix.push(0.0);
                    for &c in children {
                        let last = *prefix.last().unwrap();
                        prefix.push(last + self.up[c]);
                    }
                    let mut suffix = 0.0;
                    for (k, &c) in children.iter().enumerate().rev() {
                        let others = prefix[k] + suffix;
                        self.down[c] = log_add(self.down[c], d + others);
                        suffix += self.up[c];
                    }
                }
                _ => {}
            }
        }
    }

    pub fn up(&self) -> &[f64] {
        &self.up
    }

    pub fn down(&self) -> &[f64] {
        &self.down
    }

    pub fn root_value(&self) -> f64 {
        self.up[self.root]
    }

    /// `log ∂S/∂w` for edge `edge` of sum node `node`.
    pub fn log_weight_gradient(&self, node: NodeId, edge: usize) -> f64 {
        self.edge_grad[self.edge_offsets[node] + edge]
    }

    /// All per-edge log gradients of sum node `node`.
    pub fn log_weight_gradients(&self, node: NodeId, edges: usize) -> &[f64] {
        let off = self.edge_offsets[node];
        &self.edge_grad[off..off + edges]
    }
}

/// `log S(e)`. With every variable marginalized this is `log Z`.
///
/// The value is the exact network polynomial only for complete and
/// consistent networks; other networks are still evaluated, which the
/// bound checks rely on.
pub fn evaluate(spn: &Spn, e: &Evidence) -> Result<f64> {
    PassState::new(spn).upward(spn, e, UpRule::Sum)
}

pub fn log_partition(spn: &Spn) -> f64 {
    evaluate(spn, &Evidence::marginal(spn.vars().len())).expect("marginal evidence always fits")
}

/// Linear-space `∂S(e)/∂w` for every sum edge, indexed `[node][edge]`;
/// empty for non-sum nodes.
pub fn weight_gradients(spn: &Spn, e: &Evidence) -> Result<Vec<Vec<f64>>> {
    let mut pass = PassState::new(spn);
    pass.upward(spn, e, UpRule::Sum)?;
    pass.downward(spn);
    Ok(spn
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| match node {
            Node::Sum { children } => {
                pass.log_weight_gradients(id, children.len()).iter().map(|g| g.exp()).collect()
            }
            _ => Vec::new(),
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Marginals {
    pub log_evidence: f64,
    /// `P(X_s = t | e)` per discrete variable; `None` for continuous
    /// variables and variables without indicators.
    pub variables: Vec<Option<Vec<f64>>>,
    /// `P(Y_k = i | e)` per sum node and child position, conditioned on the
    /// node being active; `None` for other nodes.
    pub hidden: Vec<Option<Vec<f64>>>,
    /// Expected use of each sum edge, `w_ki · S_i(e) · ∂S/∂S_k / S(e)`; the
    /// E-step statistic of soft EM.
    pub flows: Vec<Option<Vec<f64>>>,
}

/// Marginals of every variable, visible and hidden, from one upward and one
/// downward pass.
///
/// Indicator marginals come from `λ · ∂S/∂λ` and are exact for decomposable
/// networks. A consistent but non-decomposable product that repeats an
/// indicator makes the root polynomial non-multilinear in it, and the
/// derivative then counts the repetition.
pub fn marginals(spn: &Spn, e: &Evidence) -> Result<Marginals> {
    let mut pass = PassState::new(spn);
    marginals_with(spn, e, &mut pass)
}

pub fn marginals_with(spn: &Spn, e: &Evidence, pass: &mut PassState) -> Result<Marginals> {
    let log_s = pass.upward(spn, e, UpRule::Sum)?;
    if log_s == f64::NEG_INFINITY {
        return Err(SpnError::ZeroEvidence);
    }
    pass.downward(spn);
    let vars = spn.vars();

    let mut acc: Vec<Option<Vec<f64>>> = vars
        .kinds()
        .iter()
        .map(|k| match k {
            VarKind::Discrete { arity } => Some(vec![f64::NEG_INFINITY; *arity]),
            VarKind::Continuous => None,
        })
        .collect();
    let mut seen = vec![false; vars.len()];
    let mut hidden = vec![None; spn.len()];
    let mut flows = vec![None; spn.len()];

    for (id, node) in spn.nodes().iter().enumerate() {
        match node {
            Node::Indicator { var, value } => {
                seen[*var] = true;
                let slot = &mut acc[*var].as_mut().expect("indicator on discrete var")[*value];
                *slot = log_add(*slot, pass.up[id] + pass.down[id]);
            }
            Node::Sum { children } => {
                let d = pass.down[id];
                let here = pass.up[id];
                let flow: Vec<f64> = children
                    .iter()
                    .map(|&(c, w)| {
                        if w > 0.0 {
                            (w.ln() + pass.up[c] + d - log_s).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let local: Vec<f64> = if here > f64::NEG_INFINITY {
                    children
                        .iter()
                        .map(|&(c, w)| if w > 0.0 { (w.ln() + pass.up[c] - here).exp() } else { 0.0 })
                        .collect()
                } else {
                    let total: f64 = children.iter().map(|&(_, w)| w).sum();
                    children.iter().map(|&(_, w)| if total > 0.0 { w / total } else { 0.0 }).collect()
                };
                hidden[id] = Some(local);
                flows[id] = Some(flow);
            }
            _ => {}
        }
    }

    let variables = acc
        .into_iter()
        .zip(seen)
        .map(|(slot, seen)| {
            let logs = slot.filter(|_| seen)?;
            let total = logs.iter().copied().fold(f64::NEG_INFINITY, log_add);
            if total == f64::NEG_INFINITY {
                return None;
            }
            Some(logs.iter().map(|l| (l - total).exp()).collect())
        })
        .collect();

    Ok(Marginals { log_evidence: log_s, variables, hidden, flows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpeMode {
    /// Maximizations on both passes: the exact MPE for decomposable networks.
    MaxMax,
    /// Sums upward, maximizations on the downward selection.
    #[default]
    SumUpMaxDown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Discrete(usize),
    Continuous(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Discrete(v) => v as f64,
            Value::Continuous(x) => x,
        }
    }
}

/// One hidden-variable assignment: sum node `sum` selected its child at
/// position `edge`, node `child`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub sum: NodeId,
    pub edge: usize,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpeResult {
    /// Assignment of every variable. Observed variables keep their
    /// evidence; unobserved variables outside the root scope get value 0.
    pub state: Vec<Value>,
    /// Choices of the sum nodes reached by the selection, by ascending id.
    pub selections: Vec<Selection>,
    /// Log value of the selected sub-network at `state`: the selected
    /// weights times the selected leaves.
    pub log_score: f64,
}

impl MpeResult {
    pub fn hidden(&self) -> BTreeMap<NodeId, NodeId> {
        self.selections.iter().map(|s| (s.sum, s.child)).collect()
    }

    pub fn discrete_state(&self) -> Vec<usize> {
        self.state
            .iter()
            .map(|v| match v {
                Value::Discrete(d) => *d,
                Value::Continuous(_) => panic!("continuous variable in discrete_state"),
            })
            .collect()
    }
}

pub fn mpe(spn: &Spn, e: &Evidence, mode: MpeMode) -> Result<MpeResult> {
    mpe_with(spn, e, mode, &mut PassState::new(spn), |_, _| 0.0)
}

/// MPE with a caller-supplied penalty (in log units) subtracted from each
/// candidate during the downward selection at sum nodes.
pub fn mpe_with(
    spn: &Spn,
    e: &Evidence,
    mode: MpeMode,
    pass: &mut PassState,
    penalty: impl Fn(NodeId, usize) -> f64,
) -> Result<MpeResult> {
    let rule = match mode {
        MpeMode::MaxMax => UpRule::Max,
        MpeMode::SumUpMaxDown => UpRule::Sum,
    };
    let root_value = pass.upward(spn, e, rule)?;
    if root_value == f64::NEG_INFINITY {
        return Err(SpnError::ZeroEvidence);
    }

    let mut selected = vec![false; spn.len()];
    selected[spn.root()] = true;
    let mut selections = Vec::new();
    let mut assigned: Vec<Option<Value>> = e
        .as_slice()
        .iter()
        .map(|o| match *o {
            Obs::Missing => None,
            Obs::Value(v) => Some(Value::Discrete(v)),
            Obs::Real(x) => Some(Value::Continuous(x)),
        })
        .collect();
    let mut log_score = 0.0;

    for id in (0..=spn.root()).rev() {
        if !selected[id] {
            continue;
        }
        match spn.node(id) {
            Node::Sum { children } => {
                let mut best: Option<(f64, NodeId, usize)> = None;
                for (k, &(c, w)) in children.iter().enumerate() {
                    if w <= 0.0 || pass.up[c] == f64::NEG_INFINITY {
                        continue;
                    }
                    let score = w.ln() + pass.up[c] - penalty(id, k);
                    let better = match best {
                        None => true,
                        Some((s, bc, _)) => score > s || (score == s && c < bc),
                    };
                    if better {
                        best = Some((score, c, k));
                    }
                }
                let (_, child, edge) = best.ok_or(SpnError::ZeroEvidence)?;
                selected[child] = true;
                log_score += children[edge].1.ln();
                selections.push(Selection { sum: id, edge, child });
            }
            Node::Product { children } => {
                for &c in children {
                    selected[c] = true;
                }
            }
            Node::Indicator { var, value } => {
                assigned[*var].get_or_insert(Value::Discrete(*value));
            }
            Node::Gaussian { var, mean, .. } => {
                assigned[*var].get_or_insert(Value::Continuous(*mean));
            }
        }
    }

    let state: Vec<Value> = assigned
        .into_iter()
        .zip(spn.vars().kinds())
        .map(|(v, kind)| {
            v.unwrap_or(match kind {
                VarKind::Discrete { .. } => Value::Discrete(0),
                VarKind::Continuous => Value::Continuous(0.0),
            })
        })
        .collect();

    for (id, node) in spn.nodes().iter().enumerate() {
        if !selected[id] {
            continue;
        }
        match *node {
            Node::Gaussian { var, mean, variance } => {
                log_score += gaussian_log_density(state[var].as_f64(), mean, variance);
            }
            Node::Indicator { var, value } => {
                if state[var] != Value::Discrete(value) {
                    log_score = f64::NEG_INFINITY;
                }
            }
            _ => {}
        }
    }

    selections.reverse();
    Ok(MpeResult { state, selections, log_score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{SpnBuilder, FALSE, TRUE};
    use crate::oracle::build_fig1_mixture;

    fn bernoulli(p: f64) -> Spn {
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let nx = b.indicator(0, FALSE).unwrap();
        let root = b.sum(vec![(x, p), (nx, 1.0 - p)]).unwrap();
        b.build(root).unwrap()
    }

    #[test]
    fn fig1_evidence_values() {
        let spn = build_fig1_mixture();
        let s10 = evaluate(&spn, &Evidence::from_values(&[1, 0])).unwrap().exp();
        assert!((s10 - 0.522).abs() < 1e-12);
        let s11 = evaluate(&spn, &Evidence::from_values(&[1, 1])).unwrap().exp();
        assert!((s11 - 0.168).abs() < 1e-12);
        assert!(log_partition(&spn).abs() < 1e-12);
    }

    #[test]
    fn evidence_length_mismatch_is_an_input_error() {
        let spn = build_fig1_mixture();
        assert!(matches!(
            evaluate(&spn, &Evidence::marginal(3)),
            Err(SpnError::EvidenceLength { expected: 2, found: 3 })
        ));
        assert!(matches!(
            evaluate(&spn, &Evidence::from_values(&[0, 2])),
            Err(SpnError::InvalidObservation { var: 1, .. })
        ));
    }

    #[test]
    fn log_add_handles_infinities() {
        assert_eq!(log_add(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_add(f64::NEG_INFINITY, -3.0), -3.0);
        assert!((log_add(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_add(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_marginal_is_its_weight() {
        let m = marginals(&bernoulli(0.3), &Evidence::marginal(1)).unwrap();
        let p = m.variables[0].as_ref().unwrap();
        assert!((p[TRUE] - 0.3).abs() < 1e-12);
        assert!((p[FALSE] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn fig1_marginal_of_x1() {
        let m = marginals(&build_fig1_mixture(), &Evidence::marginal(2)).unwrap();
        let p = m.variables[0].as_ref().unwrap();
        assert!((p[TRUE] - 0.69).abs() < 1e-12);
    }

    #[test]
    fn observed_variables_get_point_marginals() {
        let spn = build_fig1_mixture();
        for state in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let m = marginals(&spn, &Evidence::from_values(&state)).unwrap();
            for (var, &v) in state.iter().enumerate() {
                assert!((m.variables[var].as_ref().unwrap()[v] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginals_reject_zero_evidence() {
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let spn = b.build(x).unwrap();
        assert!(matches!(
            marginals(&spn, &Evidence::from_values(&[0])),
            Err(SpnError::ZeroEvidence)
        ));
    }

    #[test]
    fn fig1_mpe_without_evidence() {
        let spn = build_fig1_mixture();
        let r = mpe(&spn, &Evidence::marginal(2), MpeMode::MaxMax).unwrap();
        assert_eq!(r.discrete_state(), vec![1, 0]);
        assert!((r.log_score.exp() - 0.216).abs() < 1e-12);
        let Node::Sum { children } = spn.node(spn.root()) else { unreachable!() };
        assert_eq!(r.hidden()[&spn.root()], children[2].0);
    }

    #[test]
    fn fig1_mpe_with_x1_false() {
        let spn = build_fig1_mixture();
        let e = Evidence::marginal(2).with(0, Obs::Value(0));
        let r = mpe(&spn, &e, MpeMode::MaxMax).unwrap();
        assert_eq!(r.discrete_state(), vec![0, 0]);
        assert!((r.log_score.exp() - 0.14).abs() < 1e-12);
        let Node::Sum { children } = spn.node(spn.root()) else { unreachable!() };
        assert_eq!(r.hidden()[&spn.root()], children[0].0);
    }

    #[test]
    fn mpe_keeps_full_evidence() {
        let spn = build_fig1_mixture();
        for mode in [MpeMode::MaxMax, MpeMode::SumUpMaxDown] {
            for state in [[0, 0], [0, 1], [1, 0], [1, 1]] {
                let r = mpe(&spn, &Evidence::from_values(&state), mode).unwrap();
                assert_eq!(r.discrete_state(), state.to_vec());
            }
        }
    }

    #[test]
    fn mpe_ties_pick_lowest_child_id() {
        let r = mpe(&bernoulli(0.5), &Evidence::marginal(1), MpeMode::MaxMax).unwrap();
        // The TRUE indicator was added first, so it has the lower id.
        assert_eq!(r.discrete_state(), vec![TRUE]);
    }

    #[test]
    fn gaussian_leaves_take_the_component_mean() {
        let mut b = SpnBuilder::new(VariableTable::continuous(1).unwrap());
        let g0 = b.gaussian(0, -2.0, 1.0).unwrap();
        let g1 = b.gaussian(0, 3.0, 1.0).unwrap();
        let root = b.sum(vec![(g0, 0.3), (g1, 0.7)]).unwrap();
        let spn = b.build(root).unwrap();
        for mode in [MpeMode::MaxMax, MpeMode::SumUpMaxDown] {
            let r = mpe(&spn, &Evidence::marginal(1), mode).unwrap();
            assert_eq!(r.state, vec![Value::Continuous(3.0)]);
        }
        // Observed density value.
        let e = Evidence::from_obs(vec![Obs::Real(0.5)]);
        let expected = 0.3 * gaussian_log_density(0.5, -2.0, 1.0).exp()
            + 0.7 * gaussian_log_density(0.5, 3.0, 1.0).exp();
        assert!((evaluate(&spn, &e).unwrap().exp() - expected).abs() < 1e-15);
        assert!(log_partition(&spn).abs() < 1e-15);
    }

    #[test]
    fn deep_chain_does_not_underflow() {
        // 2000 nested single-child sums with weight 0.5: linear space would
        // underflow to zero long before the root.
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let mut top = b.indicator(0, TRUE).unwrap();
        for _ in 0..2000 {
            top = b.sum(vec![(top, 0.5)]).unwrap();
        }
        let spn = b.build(top).unwrap();
        let v = evaluate(&spn, &Evidence::from_values(&[1])).unwrap();
        assert!((v - 2000.0 * 0.5f64.ln()).abs() < 1e-9);
    }
}
