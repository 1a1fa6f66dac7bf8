//! The network data model: variables, nodes, scopes and structural validity.
//!
//! Nodes live in a flat table whose order is topological (every child id is
//! strictly smaller than its parent's id). The ordering is checked when a
//! network is assembled, so every pass over the graph is a plain loop over
//! the table and acyclicity never has to be verified by traversal.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Result, SpnError};

pub type NodeId = usize;

/// Value index of the "true" indicator `x_i` of a Boolean variable.
pub const TRUE: usize = 1;
/// Value index of the negated indicator `x̄_i` of a Boolean variable.
pub const FALSE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Discrete { arity: usize },
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableTable {
    kinds: Vec<VarKind>,
}

impl VariableTable {
    pub fn new(kinds: Vec<VarKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(SpnError::Input("a network needs at least one variable".into()));
        }
        for (var, kind) in kinds.iter().enumerate() {
            if let VarKind::Discrete { arity } = kind {
                if *arity < 2 {
                    return Err(SpnError::InvalidObservation {
                        var,
                        reason: format!("discrete arity must be at least 2, got {arity}"),
                    });
                }
            }
        }
        Ok(Self { kinds })
    }

    pub fn boolean(count: usize) -> Result<Self> {
        Self::new(vec![VarKind::Discrete { arity: 2 }; count])
    }

    pub fn continuous(count: usize) -> Result<Self> {
        Self::new(vec![VarKind::Continuous; count])
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, var: usize) -> VarKind {
        self.kinds[var]
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    /// Number of complete states, or `None` if a variable is continuous or
    /// the count overflows.
    pub fn state_count(&self) -> Option<usize> {
        self.kinds.iter().try_fold(1usize, |acc, kind| match kind {
            VarKind::Discrete { arity } => acc.checked_mul(*arity),
            VarKind::Continuous => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Sum { children: Vec<(NodeId, f64)> },
    Product { children: Vec<NodeId> },
    Indicator { var: usize, value: usize },
    Gaussian { var: usize, mean: f64, variance: f64 },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Indicator { .. } | Node::Gaussian { .. })
    }

    pub fn child_ids(&self) -> Box<dyn Iterator<Item = NodeId> + '_> {
        match self {
            Node::Sum { children } => Box::new(children.iter().map(|&(c, _)| c)),
            Node::Product { children } => Box::new(children.iter().copied()),
            _ => Box::new(std::iter::empty()),
        }
    }
}

/// A single-rooted sum-product network.
#[derive(Debug, Clone, PartialEq)]
pub struct Spn {
    nodes: Vec<Node>,
    root: NodeId,
    vars: VariableTable,
}

impl Spn {
    /// Assembles a network from a raw node table, checking every structural
    /// invariant the rest of the crate relies on.
    pub fn from_parts(vars: VariableTable, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        for (id, node) in nodes.iter().enumerate() {
            check_node(&vars, id, node)?;
        }
        if root >= nodes.len() {
            return Err(SpnError::MalformedGraph {
                node: root,
                reason: format!("root id out of range (table has {} nodes)", nodes.len()),
            });
        }
        Ok(Self { nodes, root, vars })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn vars(&self) -> &VariableTable {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.child_ids().count()).sum()
    }

    pub fn sum_nodes(&self) -> impl Iterator<Item = (NodeId, &[(NodeId, f64)])> + '_ {
        self.nodes.iter().enumerate().filter_map(|(id, n)| match n {
            Node::Sum { children } => Some((id, children.as_slice())),
            _ => None,
        })
    }

    /// Replaces the weights of sum node `id`. The new weights must match the
    /// node's child list in length and be finite and non-negative.
    pub fn set_weights(&mut self, id: NodeId, weights: &[f64]) -> Result<()> {
        let Node::Sum { children } = &mut self.nodes[id] else {
            return Err(SpnError::MalformedGraph { node: id, reason: "not a sum node".into() });
        };
        if children.len() != weights.len() {
            return Err(SpnError::MalformedGraph {
                node: id,
                reason: format!("expected {} weights, got {}", children.len(), weights.len()),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(SpnError::MalformedGraph { node: id, reason: format!("invalid weight {w}") });
        }
        for ((_, w), &new) in children.iter_mut().zip(weights) {
            *w = new;
        }
        Ok(())
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }

    /// Marks every node reachable from the root.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        seen[self.root] = true;
        for id in (0..=self.root).rev() {
            if seen[id] {
                for c in self.nodes[id].child_ids() {
                    seen[c] = true;
                }
            }
        }
        seen
    }

    /// Longest root-to-leaf path measured in product nodes. Each product on a
    /// path sits below a sum, so this is the number of sum/product layer
    /// pairs between the root and the input.
    pub fn product_depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            let below = node.child_ids().map(|c| depth[c]).max().unwrap_or(0);
            depth[id] = below + usize::from(matches!(node, Node::Product { .. }));
        }
        depth[self.root]
    }
}

fn check_node(vars: &VariableTable, id: NodeId, node: &Node) -> Result<()> {
    let malformed = |reason: String| Err(SpnError::MalformedGraph { node: id, reason });
    match node {
        Node::Sum { children } => {
            if children.is_empty() {
                return malformed("sum node without children".into());
            }
            for &(c, w) in children {
                if c >= id {
                    return malformed(format!("child {c} does not precede its parent"));
                }
                if !(w.is_finite() && w >= 0.0) {
                    return malformed(format!("invalid weight {w} on edge to {c}"));
                }
            }
        }
        Node::Product { children } => {
            if children.is_empty() {
                return malformed("product node without children".into());
            }
            if let Some(c) = children.iter().find(|&&c| c >= id) {
                return malformed(format!("child {c} does not precede its parent"));
            }
        }
        Node::Indicator { var, value } => match vars.kinds.get(*var) {
            Some(VarKind::Discrete { arity }) if value < arity => {}
            Some(VarKind::Discrete { arity }) => {
                return malformed(format!("value {value} out of range for arity {arity}"))
            }
            Some(VarKind::Continuous) => {
                return malformed(format!("indicator on continuous variable {var}"))
            }
            None => return malformed(format!("unknown variable {var}")),
        },
        Node::Gaussian { var, mean, variance } => {
            match vars.kinds.get(*var) {
                Some(VarKind::Continuous) => {}
                Some(_) => return malformed(format!("gaussian leaf on discrete variable {var}")),
                None => return malformed(format!("unknown variable {var}")),
            }
            if !mean.is_finite() || !(variance.is_finite() && *variance > 0.0) {
                return malformed(format!("invalid gaussian parameters ({mean}, {variance})"));
            }
        }
    }
    Ok(())
}

/// Incremental construction helper. Node ids are handed out in insertion
/// order, so a child must always be added before its parents.
#[derive(Debug, Clone)]
pub struct SpnBuilder {
    vars: VariableTable,
    nodes: Vec<Node>,
}

impl SpnBuilder {
    pub fn new(vars: VariableTable) -> Self {
        Self { vars, nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vars(&self) -> &VariableTable {
        &self.vars
    }

    pub fn add(&mut self, node: Node) -> Result<NodeId> {
        let id = self.nodes.len();
        check_node(&self.vars, id, &node)?;
        self.nodes.push(node);
        Ok(id)
    }

    pub fn indicator(&mut self, var: usize, value: usize) -> Result<NodeId> {
        self.add(Node::Indicator { var, value })
    }

    pub fn gaussian(&mut self, var: usize, mean: f64, variance: f64) -> Result<NodeId> {
        self.add(Node::Gaussian { var, mean, variance })
    }

    pub fn sum(&mut self, children: Vec<(NodeId, f64)>) -> Result<NodeId> {
        self.add(Node::Sum { children })
    }

    pub fn product(&mut self, children: Vec<NodeId>) -> Result<NodeId> {
        self.add(Node::Product { children })
    }

    pub fn build(self, root: NodeId) -> Result<Spn> {
        Spn::from_parts(self.vars, self.nodes, root)
    }
}

/// Set of variable ids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scope(FixedBitSet);

impl Scope {
    pub fn empty(var_count: usize) -> Self {
        Self(FixedBitSet::with_capacity(var_count))
    }

    pub fn singleton(var_count: usize, var: usize) -> Self {
        let mut s = Self::empty(var_count);
        s.0.insert(var);
        s
    }

    pub fn from_vars(var_count: usize, vars: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(var_count);
        s.0.extend(vars);
        s
    }

    pub fn contains(&self, var: usize) -> bool {
        self.0.contains(var)
    }

    pub fn union_with(&mut self, other: &Scope) {
        self.0.union_with(&other.0);
    }

    pub fn is_disjoint(&self, other: &Scope) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn intersection(&self, other: &Scope) -> Vec<usize> {
        self.0.intersection(&other.0).collect()
    }

    pub fn symmetric_difference(&self, other: &Scope) -> Vec<usize> {
        self.0.symmetric_difference(&other.0).collect()
    }
}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vars()).finish()
    }
}

/// Scope of every node, indexed by node id.
#[derive(Debug, Clone)]
pub struct Scopes(Vec<Scope>);

impl Scopes {
    pub fn get(&self, id: NodeId) -> &Scope {
        &self.0[id]
    }

    pub fn as_slice(&self) -> &[Scope] {
        &self.0
    }
}

pub fn compute_scopes(spn: &Spn) -> Scopes {
    let d = spn.vars().len();
    let mut scopes: Vec<Scope> = Vec::with_capacity(spn.len());
    for node in spn.nodes() {
        let scope = match node {
            Node::Indicator { var, .. } | Node::Gaussian { var, .. } => Scope::singleton(d, *var),
            _ => {
                let mut s = Scope::empty(d);
                for c in node.child_ids() {
                    s.union_with(&scopes[c]);
                }
                s
            }
        };
        scopes.push(scope);
    }
    Scopes(scopes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// Children of a sum node with different scopes.
    Incomplete,
    /// A variable constrained to different values by different children of a
    /// product node.
    Inconsistent,
    /// A variable shared by several children of a product node.
    NotDecomposable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
    pub variables: Vec<usize>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub complete: bool,
    pub consistent: bool,
    pub decomposable: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    /// Complete and consistent, hence guaranteed to compute evidence
    /// probabilities exactly.
    pub fn is_valid(&self) -> bool {
        self.complete && self.consistent
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "complete={} consistent={} decomposable={}",
            self.complete, self.consistent, self.decomposable
        )
    }
}

/// Which values of one variable a sub-network's indicators mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Usage {
    Unused,
    Single(usize),
    Many,
}

impl Usage {
    fn join(self, other: Usage) -> Usage {
        match (self, other) {
            (Usage::Unused, u) | (u, Usage::Unused) => u,
            (Usage::Single(a), Usage::Single(b)) if a == b => Usage::Single(a),
            _ => Usage::Many,
        }
    }
}

/// Per-node usage of one variable, computed bottom-up over the nodes whose
/// scope contains it. A gaussian leaf integrates over every value, so it
/// counts as using many.
fn variable_usage(spn: &Spn, scopes: &Scopes, var: usize) -> Vec<Usage> {
    let mut usage = vec![Usage::Unused; spn.len()];
    for (id, node) in spn.nodes().iter().enumerate() {
        if !scopes.get(id).contains(var) {
            continue;
        }
        usage[id] = match node {
            Node::Indicator { value, .. } => Usage::Single(*value),
            Node::Gaussian { .. } => Usage::Many,
            _ => node.child_ids().fold(Usage::Unused, |acc, c| acc.join(usage[c])),
        };
    }
    usage
}

pub fn check_validity(spn: &Spn, scopes: &Scopes) -> ValidityReport {
    let mut violations = Vec::new();
    let mut usage_cache: HashMap<usize, Vec<Usage>> = HashMap::new();

    for (id, node) in spn.nodes().iter().enumerate() {
        match node {
            Node::Sum { children } => {
                let first = scopes.get(children[0].0);
                let mut odd_children = Vec::new();
                let mut vars = Vec::new();
                for &(c, _) in &children[1..] {
                    if scopes.get(c) != first {
                        odd_children.push(c);
                        vars.extend(first.symmetric_difference(scopes.get(c)));
                    }
                }
                if !odd_children.is_empty() {
                    vars.sort_unstable();
                    vars.dedup();
                    odd_children.insert(0, children[0].0);
                    violations.push(Violation {
                        node: id,
                        kind: ViolationKind::Incomplete,
                        variables: vars,
                        children: odd_children,
                    });
                }
            }
            Node::Product { children } => {
                // Variables shared between at least two children.
                let mut shared = Vec::new();
                let mut involved = Vec::new();
                for (i, &a) in children.iter().enumerate() {
                    for &b in &children[i + 1..] {
                        let common = scopes.get(a).intersection(scopes.get(b));
                        if !common.is_empty() {
                            shared.extend(common);
                            involved.push(a);
                            involved.push(b);
                        }
                    }
                }
                if shared.is_empty() {
                    continue;
                }
                shared.sort_unstable();
                shared.dedup();
                involved.sort_unstable();
                involved.dedup();
                violations.push(Violation {
                    node: id,
                    kind: ViolationKind::NotDecomposable,
                    variables: shared.clone(),
                    children: involved,
                });

                let mut bad_vars = Vec::new();
                let mut bad_children = Vec::new();
                for &var in &shared {
                    let usage = usage_cache
                        .entry(var)
                        .or_insert_with(|| variable_usage(spn, scopes, var));
                    let users: Vec<NodeId> =
                        children.iter().copied().filter(|&c| usage[c] != Usage::Unused).collect();
                    let combined = users.iter().fold(Usage::Unused, |acc, &c| acc.join(usage[c]));
                    if users.len() > 1 && combined == Usage::Many {
                        bad_vars.push(var);
                        bad_children.extend(users);
                    }
                }
                if !bad_vars.is_empty() {
                    bad_children.sort_unstable();
                    bad_children.dedup();
                    violations.push(Violation {
                        node: id,
                        kind: ViolationKind::Inconsistent,
                        variables: bad_vars,
                        children: bad_children,
                    });
                }
            }
            _ => {}
        }
    }

    let has = |kind| violations.iter().any(|v: &Violation| v.kind == kind);
    ValidityReport {
        complete: !has(ViolationKind::Incomplete),
        consistent: !has(ViolationKind::Inconsistent),
        decomposable: !has(ViolationKind::NotDecomposable),
        violations,
    }
}

/// Convenience wrapper: scopes plus validity in one call.
pub fn validate(spn: &Spn) -> ValidityReport {
    check_validity(spn, &compute_scopes(spn))
}

/// Rescales every sum node's weights to sum to one.
pub fn normalize_weights(spn: &Spn) -> Result<Spn> {
    let mut out = spn.clone();
    for node in out.nodes_mut().iter_mut() {
        if let Node::Sum { children } = node {
            let total: f64 = children.iter().map(|&(_, w)| w).sum();
            if !(total > 0.0) {
                continue;
            }
            for (_, w) in children.iter_mut() {
                *w /= total;
            }
        }
    }
    if let Some((id, _)) = out.sum_nodes().find(|(_, ch)| ch.iter().all(|&(_, w)| w <= 0.0)) {
        return Err(SpnError::DegenerateNode { node: id });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_even_parity, build_fig1_mixture};

    fn bool_vars(d: usize) -> VariableTable {
        VariableTable::boolean(d).unwrap()
    }

    #[test]
    fn leaf_scope_is_its_variable() {
        let mut b = SpnBuilder::new(bool_vars(3));
        let x = b.indicator(1, TRUE).unwrap();
        let spn = b.build(x).unwrap();
        let scopes = compute_scopes(&spn);
        assert_eq!(scopes.get(x).vars().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn fig1_scopes() {
        let spn = build_fig1_mixture();
        let scopes = compute_scopes(&spn);
        for (id, node) in spn.nodes().iter().enumerate() {
            if matches!(node, Node::Product { .. }) {
                assert_eq!(scopes.get(id).vars().collect::<Vec<_>>(), vec![0, 1]);
            }
        }
        assert_eq!(scopes.get(spn.root()).vars().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn parity_root_scope_covers_all_variables() {
        let spn = build_even_parity(5);
        let scopes = compute_scopes(&spn);
        assert_eq!(scopes.get(spn.root()).vars().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn fig1_is_valid_and_decomposable() {
        let report = validate(&build_fig1_mixture());
        assert!(report.complete && report.consistent && report.decomposable);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn half_x1x2nx2_plus_half_x1_is_incomplete_and_inconsistent() {
        // S = ½·x1·x2·x̄2 + ½·x1
        let mut b = SpnBuilder::new(bool_vars(2));
        let x1 = b.indicator(0, TRUE).unwrap();
        let x2 = b.indicator(1, TRUE).unwrap();
        let nx2 = b.indicator(1, FALSE).unwrap();
        let p = b.product(vec![x1, x2, nx2]).unwrap();
        let root = b.sum(vec![(p, 0.5), (x1, 0.5)]).unwrap();
        let report = validate(&b.build(root).unwrap());
        assert!(!report.complete);
        assert!(!report.consistent);
        let inconsistent = report
            .violations
            .iter()
            .find(|v| v.kind == ViolationKind::Inconsistent)
            .unwrap();
        assert_eq!(inconsistent.node, p);
        assert_eq!(inconsistent.variables, vec![1]);
    }

    #[test]
    fn x1_times_x1_is_consistent_but_not_decomposable() {
        let mut b = SpnBuilder::new(bool_vars(1));
        let x1 = b.indicator(0, TRUE).unwrap();
        let p = b.product(vec![x1, x1]).unwrap();
        let report = validate(&b.build(p).unwrap());
        assert!(report.consistent);
        assert!(!report.decomposable);
    }

    #[test]
    fn multi_valued_product_with_conflicting_values_is_inconsistent() {
        let vars = VariableTable::new(vec![VarKind::Discrete { arity: 3 }]).unwrap();
        let mut b = SpnBuilder::new(vars);
        let a = b.indicator(0, 0).unwrap();
        let c = b.indicator(0, 2).unwrap();
        let p = b.product(vec![a, c]).unwrap();
        let report = validate(&b.build(p).unwrap());
        assert!(!report.consistent);

        // A sum mentioning two values shared with a child that mentions one.
        let vars = VariableTable::new(vec![VarKind::Discrete { arity: 3 }]).unwrap();
        let mut b = SpnBuilder::new(vars);
        let a = b.indicator(0, 0).unwrap();
        let c = b.indicator(0, 2).unwrap();
        let s = b.sum(vec![(a, 0.5), (c, 0.5)]).unwrap();
        let p = b.product(vec![s, a]).unwrap();
        assert!(!validate(&b.build(p).unwrap()).consistent);
    }

    #[test]
    fn shared_gaussian_variable_is_inconsistent() {
        let mut b = SpnBuilder::new(VariableTable::continuous(1).unwrap());
        let g1 = b.gaussian(0, 0.0, 1.0).unwrap();
        let g2 = b.gaussian(0, 1.0, 1.0).unwrap();
        let p = b.product(vec![g1, g2]).unwrap();
        assert!(!validate(&b.build(p).unwrap()).consistent);
    }

    #[test]
    fn construction_rejects_forward_references() {
        let vars = bool_vars(1);
        let nodes = vec![Node::Product { children: vec![1] }, Node::Indicator { var: 0, value: 1 }];
        assert!(matches!(
            Spn::from_parts(vars, nodes, 0),
            Err(SpnError::MalformedGraph { node: 0, .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_leaves_and_weights() {
        let mut b = SpnBuilder::new(bool_vars(1));
        assert!(b.indicator(0, 2).is_err());
        assert!(b.indicator(3, 0).is_err());
        assert!(b.gaussian(0, 0.0, 1.0).is_err());
        let x = b.indicator(0, 1).unwrap();
        assert!(b.sum(vec![(x, -1.0)]).is_err());
        assert!(b.sum(vec![(x, f64::NAN)]).is_err());
        assert!(b.sum(vec![]).is_err());
        assert!(b.product(vec![]).is_err());
    }

    #[test]
    fn normalize_scales_proportionally() {
        let mut b = SpnBuilder::new(VariableTable::new(vec![VarKind::Discrete { arity: 3 }]).unwrap());
        let l: Vec<_> = (0..3).map(|v| b.indicator(0, v).unwrap()).collect();
        let root = b.sum(vec![(l[0], 2.0), (l[1], 2.0), (l[2], 4.0)]).unwrap();
        let spn = normalize_weights(&b.build(root).unwrap()).unwrap();
        let Node::Sum { children } = spn.node(root) else { unreachable!() };
        let w: Vec<f64> = children.iter().map(|&(_, w)| w).collect();
        assert_eq!(w, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn normalize_leaves_fig1_unchanged() {
        let spn = build_fig1_mixture();
        assert_eq!(normalize_weights(&spn).unwrap(), spn);
    }

    #[test]
    fn normalize_rejects_all_zero_node() {
        let mut b = SpnBuilder::new(bool_vars(1));
        let x = b.indicator(0, 1).unwrap();
        let nx = b.indicator(0, 0).unwrap();
        let root = b.sum(vec![(x, 0.0), (nx, 0.0)]).unwrap();
        assert!(matches!(
            normalize_weights(&b.build(root).unwrap()),
            Err(SpnError::DegenerateNode { node }) if node == root
        ));
    }

    #[test]
    fn product_depth_counts_product_layers() {
        assert_eq!(build_fig1_mixture().product_depth(), 1);
        assert_eq!(build_even_parity(5).product_depth(), 4);
    }
}
