//! Dense initial architectures.
//!
//! Both generators work from a region graph: every region owns a group of
//! nodes, and every binary decomposition `R -> (R1, R2)` contributes one
//! product for each pair of nodes drawn from the groups of `R1` and `R2`.
//! Each product is shared by all sum nodes of `R`. Atomic regions (one pixel
//! or one variable) use their leaves as their group, and the root region
//! has a single sum node.

use std::collections::HashMap;

use crate::error::{Result, SpnError};
use crate::graph::{NodeId, Spn, SpnBuilder, VarKind, VariableTable};

/// Half-open pixel box `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Region {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        assert!(x0 < x1 && y0 < y1, "empty region");
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_pixel(&self) -> bool {
        self.area() == 1
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y0..self.y1).flat_map(move |y| (self.x0..self.x1).map(move |x| (x, y)))
    }

    fn within_one_block(&self, m: usize) -> bool {
        self.x0 / m == (self.x1 - 1) / m && self.y0 / m == (self.y1 - 1) / m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageArchConfig {
    pub width: usize,
    pub height: usize,
    /// Coarse block size. `1` gives single-resolution decompositions.
    pub m: usize,
    pub k_sums: usize,
    pub k_components: usize,
    /// Upper bound on the edge count of the generated network.
    pub max_edges: usize,
}

impl ImageArchConfig {
    pub const DEFAULT_MAX_EDGES: usize = 10_000_000;

    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            m: 4,
            k_sums: 20,
            k_components: 4,
            max_edges: Self::DEFAULT_MAX_EDGES,
        }
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn check(&self) -> Result<()> {
        let bad = |what: String| Err(SpnError::Input(format!("invalid architecture: {what}")));
        if self.width == 0 || self.height == 0 {
            return bad(format!("image size {}x{}", self.width, self.height));
        }
        if self.m == 0 || self.k_sums == 0 || self.k_components == 0 {
            return bad("m, k_sums and k_components must be at least 1".into());
        }
        if self.m > 1 && (!self.width.is_multiple_of(self.m) || !self.height.is_multiple_of(self.m)) {
            return bad(format!("block size {} does not divide {}x{}", self.m, self.width, self.height));
        }
        Ok(())
    }

    pub fn full_region(&self) -> Region {
        Region::new(0, 0, self.width, self.height)
    }
}

/// All two-way straight-line splits of `r`. Regions inside a single
/// `m × m` block split at every pixel line; larger regions split only on
/// the block grid.
pub fn enumerate_decompositions(r: &Region, m: usize) -> Vec<(Region, Region)> {
    let m = m.max(1);
    let step = if r.within_one_block(m) { 1 } else { m };
    let mut out = Vec::new();
    for x in (r.x0 + 1..r.x1).filter(|x| x % step == 0) {
        out.push((Region::new(r.x0, r.y0, x, r.y1), Region::new(x, r.y0, r.x1, r.y1)));
    }
    for y in (r.y0 + 1..r.y1).filter(|y| y % step == 0) {
        out.push((Region::new(r.x0, r.y0, r.x1, y), Region::new(r.x0, y, r.x1, r.y1)));
    }
    out
}

/// Node and edge counts of a generated architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArchitectureSize {
    pub regions: usize,
    pub decompositions: usize,
    pub leaves: usize,
    pub sums: usize,
    pub products: usize,
    pub edges: usize,
}

impl ArchitectureSize {
    pub fn nodes(&self) -> usize {
        self.leaves + self.sums + self.products
    }
}

/// Regions reachable from the full image by repeated decomposition, sorted
/// so that every region comes after its parts.
#[derive(Debug, Clone)]
pub struct RegionGraph {
    regions: Vec<Region>,
    index: HashMap<Region, usize>,
    decompositions: Vec<Vec<(usize, usize)>>,
}

impl RegionGraph {
    pub fn new(cfg: &ImageArchConfig) -> Result<Self> {
        cfg.check()?;
        let root = cfg.full_region();
        let mut seen = vec![root];
        let mut known: HashMap<Region, ()> = HashMap::from([(root, ())]);
        let mut i = 0;
        while i < seen.len() {
            let r = seen[i];
            for (a, b) in enumerate_decompositions(&r, cfg.m) {
                for part in [a, b] {
                    if known.insert(part, ()).is_none() {
                        seen.push(part);
                    }
                }
            }
            i += 1;
        }
        seen.sort_by_key(|r| (r.area(), r.y0, r.x0, r.height(), r.width()));
        let index: HashMap<Region, usize> = seen.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let decompositions = seen
            .iter()
            .map(|r| {
                enumerate_decompositions(r, cfg.m)
                    .into_iter()
                    .map(|(a, b)| (index[&a], index[&b]))
                    .collect()
            })
            .collect();
        Ok(Self { regions: seen, index, decompositions })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn id(&self, r: &Region) -> Option<usize> {
        self.index.get(r).copied()
    }

    /// Decompositions of region `id` as pairs of region ids.
    pub fn decompositions(&self, id: usize) -> &[(usize, usize)] {
        &self.decompositions[id]
    }

    pub fn root(&self) -> usize {
        self.regions.len() - 1
    }

    pub fn size(&self, cfg: &ImageArchConfig) -> ArchitectureSize {
        let atomic: Vec<bool> = self.regions.iter().map(Region::is_pixel).collect();
        layout_size(&atomic, &self.decompositions, self.root(), cfg.k_components, cfg.k_sums)
    }
}

fn group_size(atomic: bool, is_root: bool, leaves: usize, k_sums: usize) -> usize {
    if is_root {
        1
    } else if atomic {
        leaves
    } else {
        k_sums
    }
}

fn layout_size(
    atomic: &[bool],
    decompositions: &[Vec<(usize, usize)>],
    root: usize,
    leaves_per_atom: usize,
    k_sums: usize,
) -> ArchitectureSize {
    let group = |r: usize| group_size(atomic[r], false, leaves_per_atom, k_sums);
    let mut size = ArchitectureSize { regions: atomic.len(), ..Default::default() };
    for r in 0..atomic.len() {
        if atomic[r] {
            size.leaves += leaves_per_atom;
        }
        let products: usize = decompositions[r].iter().map(|&(a, b)| group(a) * group(b)).sum();
        size.decompositions += decompositions[r].len();
        size.products += products;
        size.edges += 2 * products;
        if !atomic[r] || r == root {
            let sums = group_size(atomic[r], r == root, leaves_per_atom, k_sums);
            size.sums += sums;
            size.edges += sums * if atomic[r] { leaves_per_atom } else { products };
        }
    }
    size
}

/// Builds the network for a region layout in region order. `leaf_group`
/// adds the leaves of an atomic region and returns their ids.
fn build_layout(
    vars: VariableTable,
    atomic: &[bool],
    decompositions: &[Vec<(usize, usize)>],
    root: usize,
    k_sums: usize,
    mut leaf_group: impl FnMut(usize, &mut SpnBuilder) -> Result<Vec<NodeId>>,
) -> Result<Spn> {
    let mut b = SpnBuilder::new(vars);
    let mut groups: Vec<Vec<NodeId>> = Vec::with_capacity(atomic.len());
    for r in 0..atomic.len() {
        let children: Vec<NodeId> = if atomic[r] {
            leaf_group(r, &mut b)?
        } else {
            let mut products = Vec::new();
            for &(p, q) in &decompositions[r] {
                for &i in &groups[p] {
                    for &j in &groups[q] {
                        products.push(b.product(vec![i, j])?);
                    }
                }
            }
            products
        };
        let group = if r == root {
            vec![uniform_sum(&mut b, &children)?]
        } else if atomic[r] {
            children
        } else {
            (0..k_sums).map(|_| uniform_sum(&mut b, &children)).collect::<Result<_>>()?
        };
        groups.push(group);
    }
    let root_id = groups[root][0];
    b.build(root_id)
}

fn uniform_sum(b: &mut SpnBuilder, children: &[NodeId]) -> Result<NodeId> {
    let w = 1.0 / children.len() as f64;
    b.sum(children.iter().map(|&c| (c, w)).collect())
}

/// Per-pixel Gaussian components, indexed `[pixel][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafParams {
    pub means: Vec<Vec<f64>>,
    pub variance: f64,
}

impl LeafParams {
    /// Data-free placeholder: means spread evenly over `[-1.5, 1.5]`.
    pub fn spread(pixels: usize, k: usize) -> Self {
        let row: Vec<f64> = (0..k)
            .map(|j| if k == 1 { 0.0 } else { -1.5 + 3.0 * j as f64 / (k - 1) as f64 })
            .collect();
        Self { means: vec![row; pixels], variance: 1.0 }
    }
}

/// Means of `k` equal-count quantiles of `samples`. A quantile with no
/// samples (fewer samples than `k`) takes the nearest sample.
pub fn quantile_means(samples: &[f64], k: usize) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(SpnError::Input("no samples to initialize leaves from".into()));
    }
    if k == 0 {
        return Err(SpnError::Input("need at least one component".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok((0..k)
        .map(|j| {
            let (lo, hi) = (j * n / k, (j + 1) * n / k);
            if lo == hi {
                sorted[lo.min(n - 1)]
            } else {
                sorted[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            }
        })
        .collect())
}

/// Unit-variance leaves whose means are the quantile means of each pixel's
/// training intensities. `images` are flattened row-major.
pub fn init_gaussian_leaves(images: &[Vec<f64>], pixels: usize, k: usize) -> Result<LeafParams> {
    if images.is_empty() {
        return Err(SpnError::Input("no training images to initialize leaves from".into()));
    }
    if let Some(img) = images.iter().find(|img| img.len() != pixels) {
        return Err(SpnError::Input(format!("image has {} pixels, expected {pixels}", img.len())));
    }
    let means = (0..pixels)
        .map(|p| quantile_means(&images.iter().map(|img| img[p]).collect::<Vec<_>>(), k))
        .collect::<Result<_>>()?;
    Ok(LeafParams { means, variance: 1.0 })
}

/// Dense image architecture over `width × height` continuous variables,
/// pixel `(x, y)` being variable `y * width + x`.
pub fn generate_image_spn(cfg: &ImageArchConfig, leaves: &LeafParams) -> Result<Spn> {
    let graph = RegionGraph::new(cfg)?;
    if leaves.means.len() != cfg.pixels() || leaves.means.iter().any(|m| m.len() != cfg.k_components) {
        return Err(SpnError::Input(format!(
            "leaf table must have {} pixels with {} components each",
            cfg.pixels(),
            cfg.k_components
        )));
    }
    let size = graph.size(cfg);
    if size.edges > cfg.max_edges {
        return Err(SpnError::Capacity { estimated: size.edges, limit: cfg.max_edges });
    }
    let atomic: Vec<bool> = graph.regions.iter().map(Region::is_pixel).collect();
    build_layout(
        VariableTable::continuous(cfg.pixels())?,
        &atomic,
        &graph.decompositions,
        graph.root(),
        cfg.k_sums,
        |r, b| {
            let px = graph.regions[r];
            let var = px.y0 * cfg.width + px.x0;
            leaves.means[var].iter().map(|&mean| b.gaussian(var, mean, leaves.variance)).collect()
        },
    )
}

/// Dense architecture over discrete variables, laid out along `order`:
/// regions are contiguous runs of that order, each run is split at every
/// interior point, and single variables use their indicators as leaves.
pub fn generate_dense_spn(
    vars: &VariableTable,
    order: &[usize],
    k_sums: usize,
    max_edges: usize,
) -> Result<Spn> {
    let d = vars.len();
    let mut check = order.to_vec();
    check.sort_unstable();
    if check != (0..d).collect::<Vec<_>>() {
        return Err(SpnError::Input("order must be a permutation of the variables".into()));
    }
    if k_sums == 0 {
        return Err(SpnError::Input("k_sums must be at least 1".into()));
    }
    if vars.kinds().contains(&VarKind::Continuous) {
        return Err(SpnError::Input("dense generator expects discrete variables".into()));
    }
    let arity = |v: usize| match vars.kind(v) {
        VarKind::Discrete { arity } => arity,
        VarKind::Continuous => unreachable!(),
    };

    let mut intervals: Vec<(usize, usize)> =
        (1..=d).flat_map(|len| (0..=d - len).map(move |s| (s, s + len))).collect();
    intervals.sort_by_key(|&(s, e)| (e - s, s));
    let index: HashMap<(usize, usize), usize> =
        intervals.iter().enumerate().map(|(i, &iv)| (iv, i)).collect();
    let atomic: Vec<bool> = intervals.iter().map(|&(s, e)| e - s == 1).collect();
    let decompositions: Vec<Vec<(usize, usize)>> = intervals
        .iter()
        .map(|&(s, e)| (s + 1..e).map(|c| (index[&(s, c)], index[&(c, e)])).collect())
        .collect();
    let root = intervals.len() - 1;

    // Leaf groups differ in size per variable, so estimate with the largest.
    let max_arity = order.iter().map(|&v| arity(v)).max().unwrap_or(2);
    let size = layout_size(&atomic, &decompositions, root, max_arity, k_sums);
    if size.edges > max_edges {
        return Err(SpnError::Capacity { estimated: size.edges, limit: max_edges });
    }
    build_layout(vars.clone(), &atomic, &decompositions, root, k_sums, |r, b| {
        let var = order[intervals[r].0];
        (0..arity(var)).map(|value| b.indicator(var, value)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, Node};
    use crate::inference::{log_partition, Evidence, Obs};

    fn single_res(d: usize, k: usize) -> ImageArchConfig {
        ImageArchConfig { m: 1, k_sums: k, k_components: 2, ..ImageArchConfig::new(d, d) }
    }

    #[test]
    fn decomposition_counts() {
        assert_eq!(enumerate_decompositions(&Region::new(0, 0, 2, 1), 1).len(), 1);
        assert_eq!(enumerate_decompositions(&Region::new(0, 0, 5, 3), 1).len(), 4 + 2);
        let coarse = enumerate_decompositions(&Region::new(0, 0, 8, 8), 4);
        assert_eq!(coarse.len(), 2);
        assert_eq!(coarse[0].0, Region::new(0, 0, 4, 8));
        assert_eq!(coarse[1].1, Region::new(0, 4, 8, 8));
        assert!(enumerate_decompositions(&Region::new(3, 3, 4, 4), 4).is_empty());
        assert_eq!(enumerate_decompositions(&Region::new(4, 0, 8, 4), 4).len(), 6);
    }

    #[test]
    fn parts_tile_their_parent() {
        let r = Region::new(1, 2, 6, 5);
        for (a, b) in enumerate_decompositions(&r, 1) {
            assert_eq!(a.area() + b.area(), r.area());
            let mut px: Vec<_> = a.pixels().chain(b.pixels()).collect();
            px.sort_unstable();
            let mut expected: Vec<_> = r.pixels().collect();
            expected.sort_unstable();
            assert_eq!(px, expected);
        }
    }

    #[test]
    fn four_by_four_has_100_regions() {
        assert_eq!(RegionGraph::new(&single_res(4, 2)).unwrap().len(), 100);
    }

    #[test]
    fn image_spn_is_valid_and_normalized() {
        let cfg = single_res(3, 2);
        let spn = generate_image_spn(&cfg, &LeafParams::spread(9, 2)).unwrap();
        let report = validate(&spn);
        assert!(report.complete && report.decomposable && report.consistent);
        assert!(log_partition(&spn).abs() < 1e-9);
        let size = RegionGraph::new(&cfg).unwrap().size(&cfg);
        assert_eq!(spn.len(), size.nodes());
        assert_eq!(spn.edge_count(), size.edges);
    }

    #[test]
    fn depth_is_twice_side_minus_one() {
        for d in [2, 3, 4] {
            let spn = generate_image_spn(&single_res(d, 1), &LeafParams::spread(d * d, 2)).unwrap();
            assert_eq!(spn.product_depth(), 2 * (d - 1));
        }
    }

    #[test]
    fn one_pixel_image_is_a_mixture() {
        let cfg = ImageArchConfig { m: 1, k_components: 3, ..ImageArchConfig::new(1, 1) };
        let spn = generate_image_spn(&cfg, &LeafParams::spread(1, 3)).unwrap();
        assert_eq!(spn.len(), 4);
        let Node::Sum { children } = spn.node(spn.root()) else { panic!("root is not a sum") };
        assert_eq!(children.len(), 3);
    }

    #[test]
    fn capacity_is_checked_before_building() {
        let cfg = ImageArchConfig { max_edges: 1000, ..ImageArchConfig::new(8, 8) };
        assert!(matches!(
            generate_image_spn(&cfg, &LeafParams::spread(64, 4)),
            Err(SpnError::Capacity { .. })
        ));
    }

    #[test]
    fn bad_block_size_is_rejected() {
        let cfg = ImageArchConfig { m: 3, ..ImageArchConfig::new(8, 8) };
        assert!(RegionGraph::new(&cfg).is_err());
    }

    #[test]
    fn quantile_means_by_hand() {
        assert_eq!(quantile_means(&[0.4, 0.1, 0.3, 0.2], 2).unwrap(), vec![0.15000000000000002, 0.35]);
        assert_eq!(quantile_means(&[0.7; 5], 3).unwrap(), vec![0.7; 3]);
        assert_eq!(quantile_means(&[1.0, 2.0], 4).unwrap(), vec![1.0, 1.0, 2.0, 2.0]);
        assert!(quantile_means(&[], 2).is_err());
    }

    #[test]
    fn leaves_use_per_pixel_samples() {
        let images = vec![vec![0.0, 10.0], vec![1.0, 20.0]];
        let p = init_gaussian_leaves(&images, 2, 2).unwrap();
        assert_eq!(p.means, vec![vec![0.0, 1.0], vec![10.0, 20.0]]);
        assert_eq!(p.variance, 1.0);
    }

    #[test]
    fn dense_generator_is_valid() {
        let vars = VariableTable::boolean(4).unwrap();
        let spn = generate_dense_spn(&vars, &[2, 0, 3, 1], 2, usize::MAX).unwrap();
        assert!(validate(&spn).is_valid());
        assert!(validate(&spn).decomposable);
        assert!(log_partition(&spn).abs() < 1e-9);
        let e = Evidence::marginal(4).with(1, Obs::Value(1));
        assert!(crate::inference::evaluate(&spn, &e).unwrap() < 0.0);
        assert!(generate_dense_spn(&vars, &[0, 1, 2], 2, usize::MAX).is_err());
    }
}
