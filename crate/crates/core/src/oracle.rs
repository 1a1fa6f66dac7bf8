//! Brute-force ground truth for small networks.
//!
//! Nothing here calls into [`crate::inference`]: state values come from a
//! plain linear-space evaluator, evidence probabilities from enumerating
//! complete states, and the expansion from applying the distributive law
//! node by node. The fixtures are the reference networks the rest of the
//! crate is tested against.

use std::collections::{BTreeMap, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpnError};
use crate::graph::{Node, NodeId, Spn, SpnBuilder, VarKind, VariableTable, FALSE, TRUE};
use crate::inference::{gaussian_log_density, Evidence, Obs};

/// Largest number of monomials any single node may expand to.
pub const MAX_MONOMIALS: usize = 1 << 20;
/// Largest number of complete states the enumerators will visit.
pub const MAX_STATES: usize = 1 << 16;

/// Value of every node in linear space. Indicators compatible with the
/// evidence are 1, the rest 0; observed continuous variables contribute
/// their density and missing ones 1.
pub fn linear_values(spn: &Spn, e: &Evidence) -> Vec<f64> {
    let mut v = vec![0.0; spn.len()];
    for (id, node) in spn.nodes().iter().enumerate() {
        v[id] = match *node {
            Node::Indicator { var, value } => match e.get(var) {
                Obs::Value(x) if x != value => 0.0,
                _ => 1.0,
            },
            Node::Gaussian { var, mean, variance } => match e.get(var) {
                Obs::Real(x) => gaussian_log_density(x, mean, variance).exp(),
                _ => 1.0,
            },
            Node::Sum { ref children } => children.iter().map(|&(c, w)| w * v[c]).sum(),
            Node::Product { ref children } => children.iter().map(|&c| v[c]).product(),
        };
    }
    v
}

pub fn linear_value(spn: &Spn, e: &Evidence) -> f64 {
    linear_values(spn, e)[spn.root()]
}

/// One term of an expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    /// `(variable, bitmask of value indices)`, sorted by variable.
    pub indicators: Vec<(usize, u64)>,
    /// Sum-node choices `(node, edge)` that produced this term.
    pub selections: Vec<(NodeId, usize)>,
}

impl Monomial {
    /// Contains two different indicators of one variable, so it vanishes on
    /// every complete state.
    pub fn is_contradictory(&self) -> bool {
        self.indicators.iter().any(|&(_, mask)| mask.count_ones() > 1)
    }

    /// Product of this monomial's indicators under `e` (0 or 1).
    pub fn indicator_value(&self, e: &Evidence) -> f64 {
        let ok = self.indicators.iter().all(|&(var, mask)| match e.get(var) {
            Obs::Value(v) => mask == 1u64 << v,
            _ => true,
        });
        if ok {
            1.0
        } else {
            0.0
        }
    }

    pub fn value(&self, e: &Evidence) -> f64 {
        self.coefficient * self.indicator_value(e)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut indicators = Vec::with_capacity(self.indicators.len() + other.indicators.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.indicators, &other.indicators);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                indicators.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                indicators.push(b[j]);
                j += 1;
            } else {
                indicators.push((a[i].0, a[i].1 | b[j].1));
                i += 1;
                j += 1;
            }
        }
        let mut selections = self.selections.clone();
        selections.extend_from_slice(&other.selections);
        selections.sort_unstable();
        selections.dedup();
        Monomial { coefficient: self.coefficient * other.coefficient, indicators, selections }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub monomials: Vec<Monomial>,
}

impl Expansion {
    /// `Σ_k s_k Π_k(e)`.
    pub fn value(&self, e: &Evidence) -> f64 {
        self.monomials.iter().map(|m| m.value(e)).sum()
    }

    /// Combines monomials with identical indicator sets, which turns the
    /// expansion of a valid network into its network polynomial.
    pub fn merged(&self) -> Expansion {
        let mut by_key: BTreeMap<Vec<(usize, u64)>, f64> = BTreeMap::new();
        for m in &self.monomials {
            *by_key.entry(m.indicators.clone()).or_insert(0.0) += m.coefficient;
        }
        Expansion {
            monomials: by_key
                .into_iter()
                .map(|(indicators, coefficient)| Monomial {
                    coefficient,
                    indicators,
                    selections: Vec::new(),
                })
                .collect(),
        }
    }

    /// The largest-coefficient monomial that is non-zero under `e`.
    pub fn best_compatible(&self, e: &Evidence) -> Option<&Monomial> {
        self.monomials
            .iter()
            .filter(|m| m.indicator_value(e) > 0.0)
            .max_by(|a, b| a.coefficient.total_cmp(&b.coefficient))
    }
}

/// Distributive-law expansion. Zero-coefficient monomials are dropped;
/// contradictory ones are kept.
pub fn expand(spn: &Spn) -> Result<Expansion> {
    for (var, kind) in spn.vars().kinds().iter().enumerate() {
        match kind {
            VarKind::Continuous => {
                return Err(SpnError::Input(format!("cannot expand continuous variable {var}")))
            }
            VarKind::Discrete { arity } if *arity > 64 => {
                return Err(SpnError::Input(format!("arity of variable {var} exceeds 64")))
            }
            _ => {}
        }
    }
    let reachable = spn.reachable();
    let mut table: Vec<Vec<Monomial>> = vec![Vec::new(); spn.len()];
    for (id, node) in spn.nodes().iter().enumerate() {
        if !reachable[id] {
            continue;
        }
        let terms = match node {
            Node::Indicator { var, value } => vec![Monomial {
                coefficient: 1.0,
                indicators: vec![(*var, 1u64 << value)],
                selections: Vec::new(),
            }],
            Node::Gaussian { .. } => unreachable!("rejected above"),
            Node::Sum { children } => {
                let mut out = Vec::new();
                for (k, &(c, w)) in children.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    if out.len() + table[c].len() > MAX_MONOMIALS {
                        return Err(SpnError::OracleCapacity { limit: MAX_MONOMIALS });
                    }
                    out.extend(table[c].iter().map(|m| {
                        let mut selections = m.selections.clone();
                        selections.push((id, k));
                        selections.sort_unstable();
                        Monomial {
                            coefficient: w * m.coefficient,
                            indicators: m.indicators.clone(),
                            selections,
                        }
                    }));
                }
                out
            }
            Node::Product { children } => {
                let mut acc = vec![Monomial {
                    coefficient: 1.0,
                    indicators: Vec::new(),
                    selections: Vec::new(),
                }];
                for &c in children {
                    if acc.len().saturating_mul(table[c].len()) > MAX_MONOMIALS {
                        return Err(SpnError::OracleCapacity { limit: MAX_MONOMIALS });
                    }
                    acc = acc.iter().flat_map(|a| table[c].iter().map(move |b| a.times(b))).collect();
                }
                acc
            }
        };
        table[id] = terms;
    }
    let mut monomials = std::mem::take(&mut table[spn.root()]);
    monomials.retain(|m| m.coefficient != 0.0);
    Ok(Expansion { monomials })
}

fn discrete_arities(vars: &VariableTable) -> Result<Vec<usize>> {
    vars.kinds()
        .iter()
        .enumerate()
        .map(|(var, k)| match k {
            VarKind::Discrete { arity } => Ok(*arity),
            VarKind::Continuous => {
                Err(SpnError::Input(format!("variable {var} is continuous; cannot enumerate")))
            }
        })
        .collect()
}

/// Calls `f` on every complete assignment (mixed radix, variable 0 fastest).
fn for_each_state(arities: &[usize], mut f: impl FnMut(&[usize])) {
    let mut state = vec![0usize; arities.len()];
    loop {
        f(&state);
        let mut i = 0;
        loop {
            if i == arities.len() {
                return;
            }
            state[i] += 1;
            if state[i] < arities[i] {
                break;
            }
            state[i] = 0;
            i += 1;
        }
    }
}

/// `S(x)` for every complete state of an all-discrete network.
#[derive(Debug, Clone)]
pub struct StateTable {
    arities: Vec<usize>,
    states: Vec<Vec<usize>>,
    values: Vec<f64>,
}

impl StateTable {
    pub fn new(spn: &Spn) -> Result<Self> {
        let arities = discrete_arities(spn.vars())?;
        let count = spn.vars().state_count().unwrap_or(usize::MAX);
        if count > MAX_STATES {
            return Err(SpnError::OracleCapacity { limit: MAX_STATES });
        }
        let mut states = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        for_each_state(&arities, |s| {
            values.push(linear_value(spn, &Evidence::from_values(s)));
            states.push(s.to_vec());
        });
        Ok(Self { arities, states, values })
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Φ(e) = Σ_{x ∈ e} S(x)`.
    pub fn phi(&self, e: &Evidence) -> f64 {
        self.states
            .iter()
            .zip(&self.values)
            .filter(|(s, _)| consistent_with(s, e))
            .map(|(_, v)| v)
            .sum()
    }

    /// `Φ(e ∧ X_var = value) / Φ(e)`.
    pub fn conditional(&self, e: &Evidence, var: usize, value: usize) -> f64 {
        let joint = self.phi(&e.clone().with(var, Obs::Value(value)));
        joint / self.phi(e)
    }

    pub fn partition(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Draws a complete state with probability `S(x)/Z`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let z = self.partition();
        let mut u = rng.random::<f64>() * z;
        for (s, &v) in self.states.iter().zip(&self.values) {
            if u < v {
                return s.clone();
            }
            u -= v;
        }
        self.states[self.values.iter().rposition(|&v| v > 0.0).unwrap_or(0)].clone()
    }

    /// Every evidence vector over the variables: each variable missing or at
    /// one of its values.
    pub fn all_evidence(&self) -> Vec<Evidence> {
        let radix: Vec<usize> = self.arities.iter().map(|a| a + 1).collect();
        let mut out = Vec::new();
        for_each_state(&radix, |s| {
            out.push(Evidence::from_obs(
                s.iter()
                    .zip(&self.arities)
                    .map(|(&v, &a)| if v == a { Obs::Missing } else { Obs::Value(v) })
                    .collect(),
            ));
        });
        out
    }
}

fn consistent_with(state: &[usize], e: &Evidence) -> bool {
    state.iter().enumerate().all(|(var, &v)| match e.get(var) {
        Obs::Value(o) => o == v,
        _ => true,
    })
}

/// `Φ_S(e)` by enumerating the discrete completions of `e`. Continuous
/// variables must be observed.
pub fn brute_phi(spn: &Spn, e: &Evidence) -> Result<f64> {
    e.check(spn.vars())?;
    let mut free = Vec::new();
    let mut count = 1usize;
    for (var, kind) in spn.vars().kinds().iter().enumerate() {
        match (kind, e.get(var)) {
            (VarKind::Discrete { arity }, Obs::Missing) => {
                free.push((var, *arity));
                count = count.saturating_mul(*arity);
            }
            (VarKind::Continuous, Obs::Missing) => {
                return Err(SpnError::Input(format!(
                    "continuous variable {var} must be observed for enumeration"
                )))
            }
            _ => {}
        }
    }
    if count > MAX_STATES {
        return Err(SpnError::OracleCapacity { limit: MAX_STATES });
    }
    let arities: Vec<usize> = free.iter().map(|&(_, a)| a).collect();
    let mut total = 0.0;
    let mut full = e.clone();
    for_each_state(&arities, |s| {
        for (&(var, _), &v) in free.iter().zip(s) {
            full.set(var, Obs::Value(v));
        }
        total += linear_value(spn, &full);
    });
    Ok(total)
}

/// The naive Bayes mixture over two Boolean variables with three
/// components. Components one and two share the `X_1` distribution,
/// components two and three share the `X_2` distribution.
pub fn build_fig1_mixture() -> Spn {
    let mut b = SpnBuilder::new(VariableTable::boolean(2).unwrap());
    let x1 = b.indicator(0, TRUE).unwrap();
    let nx1 = b.indicator(0, FALSE).unwrap();
    let x2 = b.indicator(1, TRUE).unwrap();
    let nx2 = b.indicator(1, FALSE).unwrap();
    let a = b.sum(vec![(x1, 0.6), (nx1, 0.4)]).unwrap();
    let bb = b.sum(vec![(x1, 0.9), (nx1, 0.1)]).unwrap();
    let c = b.sum(vec![(x2, 0.3), (nx2, 0.7)]).unwrap();
    let d = b.sum(vec![(x2, 0.2), (nx2, 0.8)]).unwrap();
    let p1 = b.product(vec![a, c]).unwrap();
    let p2 = b.product(vec![a, d]).unwrap();
    let p3 = b.product(vec![bb, d]).unwrap();
    let root = b.sum(vec![(p1, 0.5), (p2, 0.2), (p3, 0.3)]).unwrap();
    b.build(root).unwrap()
}

/// Uniform distribution over the states of `n` Boolean variables with an
/// even number of ones, in size linear in `n`.
///
/// Two nodes track each prefix `X_1..X_i`: one for even parity, one for
/// odd. Each extends the previous pair by one variable.
pub fn build_even_parity(n: usize) -> Spn {
    assert!(n >= 1, "parity network needs at least one variable");
    let mut b = SpnBuilder::new(VariableTable::boolean(n).unwrap());
    let mut even = b.indicator(0, FALSE).unwrap();
    let mut odd = b.indicator(0, TRUE).unwrap();
    for var in 1..n {
        let on = b.indicator(var, TRUE).unwrap();
        let off = b.indicator(var, FALSE).unwrap();
        let e_off = b.product(vec![even, off]).unwrap();
        let o_on = b.product(vec![odd, on]).unwrap();
        let e_on = b.product(vec![even, on]).unwrap();
        let o_off = b.product(vec![odd, off]).unwrap();
        even = b.sum(vec![(e_off, 0.5), (o_on, 0.5)]).unwrap();
        odd = b.sum(vec![(e_on, 0.5), (o_off, 0.5)]).unwrap();
    }
    b.build(even).unwrap()
}

/// Defect deliberately planted in a generated network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Defect {
    #[default]
    None,
    /// Extra product children that mention a variable already in scope.
    Inconsistent,
    /// Extra sum children over a strict subset of the scope.
    Incomplete,
}

#[derive(Debug, Clone)]
pub struct RandomSpnConfig {
    pub seed: u64,
    pub vars: usize,
    pub depth: usize,
    pub decomposable: bool,
    pub max_arity: usize,
    pub max_children: usize,
    /// Probability of reusing an existing node with the same scope, which
    /// turns the tree into a DAG.
    pub share_prob: f64,
    pub defect: Defect,
}

impl RandomSpnConfig {
    pub fn new(seed: u64, vars: usize, depth: usize, decomposable: bool) -> Self {
        Self {
            seed,
            vars,
            depth,
            decomposable,
            max_arity: 2,
            max_children: 3,
            share_prob: 0.3,
            defect: Defect::None,
        }
    }
}

/// A random complete and consistent network (decomposable on request) with
/// normalized weights over `d` Boolean variables.
pub fn random_valid_spn(seed: u64, d: usize, depth: usize, decomposable: bool) -> Spn {
    random_spn(&RandomSpnConfig::new(seed, d, depth, decomposable))
}

/// Generates a network from random variable partitions. With no defect the
/// result is complete and consistent by construction: sums only mix
/// children over one scope, and products either split the scope or share a
/// variable that every sharing child pins to the same value.
pub fn random_spn(cfg: &RandomSpnConfig) -> Spn {
    assert!(cfg.vars >= 1 && cfg.max_arity >= 2 && cfg.max_children >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let kinds = (0..cfg.vars)
        .map(|_| VarKind::Discrete { arity: rng.random_range(2..=cfg.max_arity) })
        .collect();
    let vars = VariableTable::new(kinds).unwrap();
    let mut g = Generator { cfg, rng, b: SpnBuilder::new(vars), cache: HashMap::new(), planted: 0 };
    let scope: Vec<usize> = (0..cfg.vars).collect();
    let root = g.sum_node(&scope, &BTreeMap::new(), cfg.depth, true);
    g.b.build(root).unwrap()
}

type Pins = BTreeMap<usize, usize>;

struct Generator<'a> {
    cfg: &'a RandomSpnConfig,
    rng: ChaCha8Rng,
    b: SpnBuilder,
    cache: HashMap<(Vec<usize>, Vec<(usize, usize)>), Vec<NodeId>>,
    planted: usize,
}

impl Generator<'_> {
    fn arity(&self, var: usize) -> usize {
        match self.b.vars().kind(var) {
            VarKind::Discrete { arity } => arity,
            VarKind::Continuous => unreachable!(),
        }
    }

    fn random_weights(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| self.rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn leaf(&mut self, var: usize, pins: &Pins) -> NodeId {
        if let Some(&value) = pins.get(&var) {
            return self.b.indicator(var, value).unwrap();
        }
        let arity = self.arity(var);
        let leaves: Vec<NodeId> = (0..arity).map(|v| self.b.indicator(var, v).unwrap()).collect();
        let weights = self.random_weights(arity);
        self.b.sum(leaves.into_iter().zip(weights).collect()).unwrap()
    }

    fn sum_node(&mut self, scope: &[usize], pins: &Pins, depth: usize, is_root: bool) -> NodeId {
        let key_pins: Vec<(usize, usize)> =
            pins.iter().filter(|(v, _)| scope.contains(v)).map(|(&v, &a)| (v, a)).collect();
        let key = (scope.to_vec(), key_pins);
        if !is_root {
            if let Some(existing) = self.cache.get(&key) {
                if self.rng.random_bool(self.cfg.share_prob) {
                    return existing[self.rng.random_range(0..existing.len())];
                }
            }
        }
        let id = if scope.len() == 1 {
            self.leaf(scope[0], pins)
        } else {
            let n = self.rng.random_range(1..=self.cfg.max_children);
            let mut children: Vec<NodeId> =
                (0..n).map(|_| self.product_node(scope, pins, depth.saturating_sub(1))).collect();
            if self.cfg.defect == Defect::Incomplete && self.rng.random_bool(0.5) {
                let mut sub = scope.to_vec();
                sub.shuffle(&mut self.rng);
                sub.truncate(self.rng.random_range(1..scope.len()));
                sub.sort_unstable();
                children.push(self.sum_node(&sub, pins, depth.saturating_sub(1), false));
                self.planted += 1;
            }
            let weights = self.random_weights(children.len());
            self.b.sum(children.into_iter().zip(weights).collect()).unwrap()
        };
        self.cache.entry(key).or_default().push(id);
        id
    }

    fn product_node(&mut self, scope: &[usize], pins: &Pins, depth: usize) -> NodeId {
        debug_assert!(scope.len() >= 2);
        let mut parts: Vec<Vec<usize>> = if depth == 0 {
            scope.iter().map(|&v| vec![v]).collect()
        } else {
            let k = self.rng.random_range(2..=scope.len().min(3));
            let mut shuffled = scope.to_vec();
            shuffled.shuffle(&mut self.rng);
            let mut cuts: Vec<usize> = (1..scope.len()).collect();
            cuts.shuffle(&mut self.rng);
            let mut cuts: Vec<usize> = cuts[..k - 1].to_vec();
            cuts.sort_unstable();
            let mut parts = Vec::new();
            let mut start = 0;
            for cut in cuts.into_iter().chain(std::iter::once(scope.len())) {
                let mut p = shuffled[start..cut].to_vec();
                p.sort_unstable();
                parts.push(p);
                start = cut;
            }
            parts
        };

        let mut child_pins = pins.clone();
        if !self.cfg.decomposable && self.rng.random_bool(0.5) {
            let free: Vec<usize> = scope.iter().copied().filter(|v| !pins.contains_key(v)).collect();
            if let Some(&var) = free.choose(&mut self.rng) {
                let value = self.rng.random_range(0..self.arity(var));
                child_pins.insert(var, value);
                let home = parts.iter().position(|p| p.contains(&var)).unwrap();
                let others: Vec<usize> = (0..parts.len()).filter(|&i| i != home).collect();
                let guest = others[self.rng.random_range(0..others.len())];
                parts[guest].push(var);
                parts[guest].sort_unstable();
            }
        }

        let mut children: Vec<NodeId> =
            parts.iter().map(|p| self.sum_node(p, &child_pins, depth, false)).collect();
        if self.cfg.defect == Defect::Inconsistent && self.rng.random_bool(0.5) {
            let free: Vec<usize> = scope.iter().copied().filter(|v| !pins.contains_key(v)).collect();
            if let Some(&var) = free.choose(&mut self.rng) {
                children.push(self.leaf(var, &Pins::new()));
                self.planted += 1;
            }
        }
        self.b.product(children).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn fig1_hand_values() {
        let spn = build_fig1_mixture();
        let s = |x1, x2| linear_value(&spn, &Evidence::from_values(&[x1, x2]));
        // 0.5·0.6·0.7 + 0.2·0.6·0.8 + 0.3·0.9·0.8
        assert!(approx(s(1, 0), 0.522));
        // 0.5·0.6·0.3 + 0.2·0.6·0.2 + 0.3·0.9·0.2
        assert!(approx(s(1, 1), 0.168));
        let phi = brute_phi(&spn, &Evidence::marginal(2).with(0, Obs::Value(1))).unwrap();
        assert!(approx(phi, 0.69));
        assert!(approx(brute_phi(&spn, &Evidence::marginal(2)).unwrap(), 1.0));
    }

    #[test]
    fn bernoulli_expansion() {
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let nx = b.indicator(0, FALSE).unwrap();
        let root = b.sum(vec![(x, 0.3), (nx, 0.7)]).unwrap();
        let exp = expand(&b.build(root).unwrap()).unwrap();
        assert_eq!(exp.monomials.len(), 2);
        assert_eq!(exp.monomials[0].coefficient, 0.3);
        assert_eq!(exp.monomials[0].indicators, vec![(0, 1 << TRUE)]);
        assert_eq!(exp.monomials[1].coefficient, 0.7);
        assert_eq!(exp.monomials[1].indicators, vec![(0, 1 << FALSE)]);
    }

    #[test]
    fn fig1_expansion() {
        let exp = expand(&build_fig1_mixture()).unwrap();
        // One monomial per (component, X1, X2).
        assert_eq!(exp.monomials.len(), 12);
        let x1x2: f64 = exp
            .monomials
            .iter()
            .filter(|m| m.indicators == vec![(0, 1 << TRUE), (1, 1 << TRUE)])
            .map(|m| m.coefficient)
            .sum();
        assert!(approx(x1x2, 0.168));
        assert_eq!(exp.merged().monomials.len(), 4);
    }

    #[test]
    fn contradictory_product_is_flagged() {
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let nx = b.indicator(0, FALSE).unwrap();
        let p = b.product(vec![x, nx]).unwrap();
        let exp = expand(&b.build(p).unwrap()).unwrap();
        assert_eq!(exp.monomials.len(), 1);
        assert!(exp.monomials[0].is_contradictory());
        assert_eq!(exp.monomials[0].indicators, vec![(0, 0b11)]);
    }

    #[test]
    fn complete_state_phi_is_state_value() {
        let spn = build_fig1_mixture();
        let e = Evidence::from_values(&[0, 1]);
        assert_eq!(brute_phi(&spn, &e).unwrap(), linear_value(&spn, &e));
    }

    #[test]
    fn parity_two_variables() {
        let table = StateTable::new(&build_even_parity(2)).unwrap();
        // States enumerate with variable 0 fastest: 00, 10, 01, 11.
        assert_eq!(table.values(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn parity_five_variables_is_uniform_on_even_states() {
        let table = StateTable::new(&build_even_parity(5)).unwrap();
        for (s, &v) in table.states().iter().zip(table.values()) {
            let ones: usize = s.iter().sum();
            let expected = if ones.is_multiple_of(2) { 1.0 / 16.0 } else { 0.0 };
            assert!(approx(v, expected), "{s:?} -> {v}");
        }
    }

    #[test]
    fn random_generators_produce_requested_validity() {
        for seed in 0..40 {
            let r = validate(&random_valid_spn(seed, 8, 3, true));
            assert!(r.complete && r.consistent && r.decomposable, "seed {seed}: {r:?}");
            let r = validate(&random_valid_spn(seed, 6, 3, false));
            assert!(r.complete && r.consistent, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn non_decomposable_generator_shares_variables() {
        let shared = (0..40).any(|seed| !validate(&random_valid_spn(seed, 6, 3, false)).decomposable);
        assert!(shared);
    }

    #[test]
    fn capacity_is_reported() {
        // A chain of products over shared three-way sums multiplies the
        // monomial count at every level.
        let mut b = SpnBuilder::new(VariableTable::boolean(1).unwrap());
        let x = b.indicator(0, TRUE).unwrap();
        let mut top = b.sum(vec![(x, 0.5), (x, 0.5)]).unwrap();
        for _ in 0..25 {
            top = b.product(vec![top, top]).unwrap();
            top = b.sum(vec![(top, 1.0)]).unwrap();
        }
        assert!(matches!(
            expand(&b.build(top).unwrap()),
            Err(SpnError::OracleCapacity { .. })
        ));
    }

    #[test]
    fn sampling_follows_the_distribution() {
        let table = StateTable::new(&build_fig1_mixture()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let hits = (0..n).filter(|_| table.sample(&mut rng) == vec![1, 0]).count();
        assert!((hits as f64 / n as f64 - 0.522).abs() < 0.02);
    }
}
