//! Hierarchical density-based clustering.
//!
//! Exact O(n²) implementation: core distances, a Prim minimum spanning tree
//! of the mutual-reachability graph, a single-linkage dendrogram condensed by
//! minimum cluster size, and excess-of-mass or leaf cluster selection.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lambda assigned to zero-distance merges.
pub const MAX_LAMBDA: f64 = 1e200;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// One minus cosine similarity.
    Cosine,
}

/// How clusters are picked from the condensed tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSelection {
    /// Excess of mass: a parent wins when it is more stable than its subtree.
    #[default]
    Eom,
    /// Every cluster without child clusters.
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Neighbour rank for core distances; defaults to `min_cluster_size`.
    pub min_samples: Option<usize>,
    pub metric: Metric,
    /// Let the root be selected when it never splits into two clusters.
    pub allow_single_cluster: bool,
    pub selection: ClusterSelection,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams {
            min_cluster_size: 5,
            min_samples: None,
            metric: Metric::Euclidean,
            allow_single_cluster: true,
            selection: ClusterSelection::Eom,
        }
    }
}

impl HdbscanParams {
    pub fn new(min_cluster_size: usize, min_samples: usize) -> Self {
        HdbscanParams {
            min_cluster_size,
            min_samples: Some(min_samples),
            ..HdbscanParams::default()
        }
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples.unwrap_or(self.min_cluster_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::InvalidConfig("min_cluster_size must be at least 2".into()));
        }
        if self.min_samples() < 1 {
            return Err(Error::InvalidConfig("min_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-point cluster labels; `-1` marks noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
    pub probabilities: Vec<f64>,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn all_noise(n: usize) -> Self {
        ClusterAssignment {
            labels: vec![-1; n],
            probabilities: vec![0.0; n],
            n_clusters: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    /// Point indices of each cluster, in cluster-id order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= 0 {
                out[l as usize].push(i);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub child_size: usize,
}

/// Condensed cluster hierarchy. Node ids below `n_points` are points; the
/// root cluster is `n_points` and later clusters follow in creation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    pub n_points: usize,
    pub edges: Vec<CondensedEdge>,
    pub stabilities: BTreeMap<usize, f64>,
    /// Cluster nodes chosen by excess of mass, ascending.
    pub selected: Vec<usize>,
}

impl CondensedTree {
    pub fn root(&self) -> usize {
        self.n_points
    }

    /// `parent,child,lambda,child_size` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parent,child,lambda,child_size\n");
        for e in &self.edges {
            out.push_str(&format!("{},{},{},{}\n", e.parent, e.child, e.lambda, e.child_size));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl MstEdge {
    fn key(&self) -> (f64, usize, usize) {
        (self.weight, self.a.min(self.b), self.a.max(self.b))
    }
}

pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Metric::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                return if na == nb { 0.0 } else { 1.0 };
            }
            (1.0 - dot / (na * nb)).max(0.0)
        }
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<()> {
    if let Some(first) = points.first() {
        if let Some(p) = points.iter().find(|p| p.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: p.len(),
            });
        }
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("points must be finite".into()));
    }
    Ok(())
}

/// Distance from each point to its `k`-th nearest other point.
pub fn core_distances(points: &[Vec<f64>], k: usize, metric: Metric) -> Result<Vec<f64>> {
    let n = points.len();
    if k == 0 || n <= k {
        return Err(Error::Parameter(format!("core distance rank k={k} needs n > k points, got n={n}")));
    }
    check_points(points)?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| distance(&points[i], &points[j], metric))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// Prim's algorithm over the complete mutual-reachability graph. Ties are
/// broken by the smaller (min index, max index) pair.
pub fn mutual_reachability_mst(points: &[Vec<f64>], core: &[f64], metric: Metric) -> Vec<MstEdge> {
    let n = points.len();
    assert_eq!(core.len(), n, "one core distance per point");
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    // Cheapest known connection of each outside vertex: (weight, tree vertex).
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let pc = &points[current];
        let cc = core[current];
        let updates: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|&j| !in_tree[j])
            .map(|j| (j, distance(pc, &points[j], metric).max(cc).max(core[j])))
            .collect();
        for (j, w) in updates {
            let candidate = MstEdge { a: current, b: j, weight: w };
            let (bw, bu) = best[j];
            let replace = bu == usize::MAX || candidate.key() < (MstEdge { a: bu, b: j, weight: bw }).key();
            if replace {
                best[j] = (w, current);
            }
        }
        let mut next: Option<MstEdge> = None;
        for j in (0..n).filter(|&j| !in_tree[j]) {
            let (w, u) = best[j];
            let e = MstEdge { a: u, b: j, weight: w };
            if next.is_none_or(|cur| e.key() < cur.key()) {
                next = Some(e);
            }
        }
        let edge = next.expect("an outside vertex remains");
        in_tree[edge.b] = true;
        current = edge.b;
        edges.push(MstEdge {
            a: edge.a.min(edge.b),
            b: edge.a.max(edge.b),
            weight: edge.weight,
        });
    }
    edges
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merges: node `n + i` joins `children[i]` at `distances[i]`.
struct Dendrogram {
    n: usize,
    children: Vec<(usize, usize)>,
    distances: Vec<f64>,
    sizes: Vec<usize>,
}

impl Dendrogram {
    fn from_mst(n: usize, mst: &[MstEdge]) -> Self {
        let mut edges = mst.to_vec();
        edges.sort_by(|x, y| x.key().partial_cmp(&y.key()).expect("finite weights"));
        let mut uf = UnionFind::new(2 * n);
        // Dendrogram node currently representing each union-find root.
        let mut node_of: Vec<usize> = (0..2 * n).collect();
        let mut sizes = vec![1; n];
        let mut children = Vec::with_capacity(n.saturating_sub(1));
        let mut distances = Vec::with_capacity(n.saturating_sub(1));
        for e in edges {
            let ra = uf.find(e.a);
            let rb = uf.find(e.b);
            assert_ne!(ra, rb, "MST edges must not form a cycle");
            let (na, nb) = (node_of[ra], node_of[rb]);
            let new = n + children.len();
            children.push((na, nb));
            distances.push(e.weight);
            sizes.push(sizes[na] + sizes[nb]);
            uf.parent[ra] = rb;
            node_of[rb] = new;
        }
        Dendrogram {
            n,
            children,
            distances,
            sizes,
        }
    }

    fn leaves(&self, node: usize, out: &mut Vec<usize>) {
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < self.n {
                out.push(x);
            } else {
                let (l, r) = self.children[x - self.n];
                stack.push(r);
                stack.push(l);
            }
        }
    }
}

fn lambda_of(distance: f64) -> f64 {
    if distance > 0.0 {
        (1.0 / distance).min(MAX_LAMBDA)
    } else {
        MAX_LAMBDA
    }
}

/// Condense the MST's single-linkage hierarchy and select clusters by excess
/// of mass.
pub fn condense_extract(n: usize, mst: &[MstEdge], params: &HdbscanParams) -> (CondensedTree, ClusterAssignment) {
    let mcs = params.min_cluster_size;
    let empty_tree = CondensedTree {
        n_points: n,
        edges: Vec::new(),
        stabilities: BTreeMap::new(),
        selected: Vec::new(),
    };
    if n < mcs || n < 2 {
        return (empty_tree, ClusterAssignment::all_noise(n));
    }
    assert_eq!(mst.len(), n - 1, "an MST over n points has n - 1 edges");
    let dendro = Dendrogram::from_mst(n, mst);

    // Breadth-first condensation from the dendrogram root.
    let root = 2 * n - 2;
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    relabel.insert(root, n);
    let mut next_label = n + 1;
    let mut edges: Vec<CondensedEdge> = Vec::new();
    let mut queue = std::collections::VecDeque::from([root]);
    let mut leaves = Vec::new();
    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        let parent = relabel[&node];
        let (left, right) = dendro.children[node - n];
        let lambda = lambda_of(dendro.distances[node - n]);
        let (ls, rs) = (dendro.sizes[left], dendro.sizes[right]);
        let mut fall_out = |sub: usize, edges: &mut Vec<CondensedEdge>| {
            leaves.clear();
            dendro.leaves(sub, &mut leaves);
            for &p in &leaves {
                edges.push(CondensedEdge {
                    parent,
                    child: p,
                    lambda,
                    child_size: 1,
                });
            }
        };
        match (ls >= mcs, rs >= mcs) {
            (true, true) => {
                for (sub, size) in [(left, ls), (right, rs)] {
                    relabel.insert(sub, next_label);
                    edges.push(CondensedEdge {
                        parent,
                        child: next_label,
                        lambda,
                        child_size: size,
                    });
                    next_label += 1;
                    queue.push_back(sub);
                }
            }
            (false, false) => {
                fall_out(left, &mut edges);
                fall_out(right, &mut edges);
            }
            (true, false) => {
                fall_out(right, &mut edges);
                relabel.insert(left, parent);
                queue.push_back(left);
            }
            (false, true) => {
                fall_out(left, &mut edges);
                relabel.insert(right, parent);
                queue.push_back(right);
            }
        }
    }

    let n_nodes = next_label - n;
    let mut birth = vec![0.0; n_nodes];
    let mut cluster_parent = vec![None; n_nodes];
    let mut child_clusters: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for e in edges.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
        cluster_parent[e.child - n] = Some(e.parent);
        child_clusters[e.parent - n].push(e.child);
    }
    let mut stability = vec![0.0; n_nodes];
    for e in &edges {
        let p = e.parent - n;
        stability[p] += (e.lambda - birth[p]) * e.child_size as f64;
    }
    let stabilities: BTreeMap<usize, f64> = stability.iter().enumerate().map(|(i, &s)| (n + i, s)).collect();

    // Excess of mass, children before parents. The root is selected only
    // when it never splits into two large clusters, and only if allowed.
    let mut is_selected = vec![false; n_nodes];
    let mut subtree = stability.clone();
    if n_nodes == 1 {
        is_selected[0] = params.allow_single_cluster;
    } else if params.selection == ClusterSelection::Leaf {
        for c in 1..n_nodes {
            is_selected[c] = child_clusters[c].is_empty();
        }
    } else {
        for c in (1..n_nodes).rev() {
            let kids = &child_clusters[c];
            let below: f64 = kids.iter().map(|&k| subtree[k - n]).sum();
            if kids.is_empty() || stability[c] > below {
                is_selected[c] = true;
                subtree[c] = stability[c];
                let mut stack: Vec<usize> = kids.clone();
                while let Some(k) = stack.pop() {
                    is_selected[k - n] = false;
                    stack.extend(child_clusters[k - n].iter().copied());
                }
            } else {
                subtree[c] = below;
            }
        }
    }
    let selected: Vec<usize> = (0..n_nodes).filter(|&i| is_selected[i]).map(|i| n + i).collect();
    let dense: BTreeMap<usize, i64> = selected.iter().enumerate().map(|(i, &c)| (c, i as i64)).collect();

    let mut labels = vec![-1i64; n];
    let mut point_lambda = vec![0.0; n];
    for e in edges.iter().filter(|e| e.child < n) {
        point_lambda[e.child] = e.lambda;
        let mut node = Some(e.parent);
        while let Some(c) = node {
            if let Some(&id) = dense.get(&c) {
                labels[e.child] = id;
                break;
            }
            node = cluster_parent[c - n];
        }
    }
    if selected == [n] {
        shed_root_outliers(n, mst, &edges, &mut labels);
    }

    let mut max_lambda = vec![0.0f64; selected.len()];
    for (p, &l) in labels.iter().enumerate() {
        if l >= 0 {
            max_lambda[l as usize] = max_lambda[l as usize].max(point_lambda[p]);
        }
    }
    let probabilities = labels
        .iter()
        .enumerate()
        .map(|(p, &l)| {
            if l < 0 {
                0.0
            } else {
                let m = max_lambda[l as usize];
                if m > 0.0 {
                    (point_lambda[p] / m).min(1.0)
                } else {
                    1.0
                }
            }
        })
        .collect();

    let tree = CondensedTree {
        n_points: n,
        edges,
        stabilities,
        selected: selected.clone(),
    };
    let assignment = ClusterAssignment {
        labels,
        probabilities,
        n_clusters: selected.len(),
    };
    (tree, assignment)
}

/// How far beyond the sparsest remaining point a shed point must lie to be
/// treated as an outlier of a root-only clustering.
const OUTLIER_GAP: f64 = 2.0;

/// When the root is the only cluster, every point hangs off it. Points shed
/// while their separating distance exceeds [`OUTLIER_GAP`] times the sparsest
/// remaining point's nearest mutual-reachability link are outliers.
fn shed_root_outliers(n: usize, mst: &[MstEdge], edges: &[CondensedEdge], labels: &mut [i64]) {
    let mut nearest = vec![f64::INFINITY; n];
    for e in mst {
        nearest[e.a] = nearest[e.a].min(e.weight);
        nearest[e.b] = nearest[e.b].min(e.weight);
    }
    // Shedding events in order of increasing lambda (decreasing distance).
    let mut events: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for e in edges.iter().filter(|e| e.child < n) {
        events.entry(e.lambda.to_bits()).or_default().push(e.child);
    }
    let mut remaining: Vec<bool> = vec![true; n];
    for (bits, points) in events {
        let distance = 1.0 / f64::from_bits(bits);
        points.iter().for_each(|&p| remaining[p] = false);
        let sparsest = (0..n).filter(|&q| remaining[q]).map(|q| nearest[q]).fold(0.0, f64::max);
        if remaining.iter().all(|r| !r) || distance <= OUTLIER_GAP * sparsest {
            break;
        }
        for &p in &points {
            labels[p] = -1;
        }
    }
}

/// Full pipeline: core distances, MST, condensation and selection.
pub fn cluster(points: &[Vec<f64>], params: &HdbscanParams) -> Result<ClusterAssignment> {
    cluster_with_tree(points, params).map(|(_, a)| a)
}

pub fn cluster_with_tree(points: &[Vec<f64>], params: &HdbscanParams) -> Result<(CondensedTree, ClusterAssignment)> {
    params.validate()?;
    check_points(points)?;
    let n = points.len();
    if n < params.min_cluster_size || n < 2 {
        return Ok(condense_extract(n, &[], params));
    }
    let core = core_distances(points, params.min_samples(), params.metric)?;
    let mst = mutual_reachability_mst(points, &core, params.metric);
    Ok(condense_extract(n, &mst, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::adjusted_rand_index;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(centres: &[(f64, f64)], per: usize, sigma: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<i64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::new();
        let mut truth = Vec::new();
        for (c, &(x, y)) in centres.iter().enumerate() {
            for _ in 0..per {
                points.push(vec![x + sigma * gauss(&mut rng), y + sigma * gauss(&mut rng)]);
                truth.push(c as i64);
            }
        }
        (points, truth)
    }

    fn gauss(rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random_range(f64::EPSILON..1.0);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    fn line(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn core_distance_on_a_line() {
        let core = core_distances(&line(&[0.0, 1.0, 2.0, 3.0]), 2, Metric::Euclidean).unwrap();
        assert_eq!(core, vec![2.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn core_distance_duplicates_and_simplex() {
        let core = core_distances(&line(&[5.0, 5.0]), 1, Metric::Euclidean).unwrap();
        assert_eq!(core, vec![0.0, 0.0]);
        let simplex = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let core = core_distances(&simplex, 2, Metric::Euclidean).unwrap();
        assert!(core.iter().all(|&c| c == core[0]));
        assert!(matches!(core_distances(&line(&[0.0, 1.0]), 2, Metric::Euclidean), Err(Error::Parameter(_))));
    }

    #[test]
    fn three_point_mst() {
        // A=0, B=1, C=3 on a line: d(AB)=1, d(BC)=2, d(AC)=3.
        let mst = mutual_reachability_mst(&line(&[0.0, 1.0, 3.0]), &[0.0; 3], Metric::Euclidean);
        let mut pairs: Vec<(usize, usize)> = mst.iter().map(|e| (e.a, e.b)).collect();
        pairs.sort();
        assert_eq!(pairs, [(0, 1), (1, 2)]);
        assert_eq!(mst.iter().map(|e| e.weight).sum::<f64>(), 3.0);
    }

    #[test]
    fn duplicate_points_give_zero_edge() {
        let mst = mutual_reachability_mst(&line(&[1.0, 1.0, 4.0]), &[0.0; 3], Metric::Euclidean);
        assert!(mst.iter().any(|e| e.weight == 0.0));
    }

    #[test]
    fn too_few_points_is_noise() {
        let points = line(&[0.0, 0.1, 0.2, 0.3]);
        let a = cluster(&points, &HdbscanParams::new(5, 3)).unwrap();
        assert_eq!(a.n_clusters, 0);
        assert!(a.labels.iter().all(|&l| l == -1));
    }

    #[test]
    fn two_far_blobs() {
        let (points, truth) = blobs(&[(0.0, 0.0), (100.0, 0.0)], 20, 1.0, 7);
        let a = cluster(&points, &HdbscanParams::new(5, 5)).unwrap();
        assert_eq!(a.n_clusters, 2);
        assert_eq!(a.noise_count(), 0);
        assert_eq!(adjusted_rand_index(&a.labels, &truth), 1.0);
    }

    #[test]
    fn blob_with_outlier() {
        let (mut points, _) = blobs(&[(0.0, 0.0)], 20, 1.0, 3);
        points.push(vec![500.0, 500.0]);
        let a = cluster(&points, &HdbscanParams::new(5, 5)).unwrap();
        assert_eq!(a.n_clusters, 1);
        assert_eq!(a.labels[20], -1);
        assert!(a.labels[..20].iter().filter(|&&l| l == 0).count() >= 18);
    }

    #[test]
    fn three_blobs_recovered() {
        let (points, truth) = blobs(&[(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)], 50, 1.0, 11);
        let a = cluster(&points, &HdbscanParams::new(5, 5)).unwrap();
        assert_eq!(a.n_clusters, 3);
        assert!(adjusted_rand_index(&a.labels, &truth) >= 0.95);
        assert_eq!(cluster(&points, &HdbscanParams::new(5, 5)).unwrap(), a);
    }

    #[test]
    fn leaf_selection_splits_nested_blobs() {
        let (points, _) = blobs(&[(0.0, 0.0), (4.0, 0.0), (100.0, 0.0)], 20, 0.3, 2);
        let eom = cluster(&points, &HdbscanParams::new(5, 5)).unwrap();
        let leaf = HdbscanParams {
            selection: ClusterSelection::Leaf,
            ..HdbscanParams::new(5, 5)
        };
        let a = cluster(&points, &leaf).unwrap();
        assert_eq!(a.n_clusters, 3);
        assert!(a.n_clusters >= eom.n_clusters);
        assert_ne!(a.labels[0], a.labels[20]);
    }

    #[test]
    fn condensed_tree_lambdas_grow_downward() {
        let (points, _) = blobs(&[(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)], 30, 1.0, 5);
        let (tree, a) = cluster_with_tree(&points, &HdbscanParams::default()).unwrap();
        let birth: BTreeMap<usize, f64> = tree.edges.iter().filter(|e| e.child >= tree.n_points).map(|e| (e.child, e.lambda)).collect();
        for e in &tree.edges {
            assert!(e.lambda >= 0.0 && e.child_size >= 1);
            assert!(e.lambda >= birth.get(&e.parent).copied().unwrap_or(0.0));
        }
        assert!(tree.stabilities.values().all(|&s| s >= 0.0));
        assert_eq!(tree.selected.len(), a.n_clusters);
        assert!(tree.to_csv().starts_with("parent,child,lambda,child_size\n"));
    }

    #[test]
    fn monotone_in_min_cluster_size() {
        let (points, _) = blobs(&[(0.0, 0.0), (15.0, 0.0), (0.0, 15.0), (40.0, 40.0)], 25, 1.5, 9);
        let mut last = usize::MAX;
        for mcs in [2, 3, 5, 8, 12, 20, 30, 60, 120] {
            let a = cluster(&points, &HdbscanParams::new(mcs, 5)).unwrap();
            assert!(a.n_clusters <= last, "mcs={mcs}: {} > {last}", a.n_clusters);
            last = a.n_clusters;
        }
    }

    #[test]
    fn uniform_points_large_min_size_are_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let points: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.random(), rng.random()]).collect();
        let a = cluster(&points, &HdbscanParams::new(10, 3)).unwrap();
        assert_eq!(a.n_clusters, 0);
    }

    #[test]
    fn cosine_metric_separates_directions() {
        let mut points = Vec::new();
        for i in 0..10 {
            let t = i as f64 * 0.01;
            points.push(vec![1.0 + t, t]);
            points.push(vec![t, 1.0 + t]);
        }
        let params = HdbscanParams {
            metric: Metric::Cosine,
            ..HdbscanParams::new(5, 3)
        };
        let a = cluster(&points, &params).unwrap();
        assert_eq!(a.n_clusters, 2);
        assert_ne!(a.labels[0], a.labels[1]);
    }

    fn check_assignment(a: &ClusterAssignment, mcs: usize) -> std::result::Result<(), TestCaseError> {
        let members = a.members();
        prop_assert_eq!(members.len(), a.n_clusters);
        for m in &members {
            prop_assert!(m.len() >= mcs);
            prop_assert!(m.iter().any(|&p| a.probabilities[p] == 1.0));
        }
        for (l, p) in a.labels.iter().zip(&a.probabilities) {
            prop_assert!((0.0..=1.0).contains(p));
            if *l < 0 {
                prop_assert_eq!(*p, 0.0);
            }
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn assignment_invariants(n in 2usize..60, mcs in 2usize..8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
                .collect();
            let ms = mcs.min(n - 1).max(1);
            let a = cluster(&points, &HdbscanParams::new(mcs, ms)).unwrap();
            check_assignment(&a, mcs)?;
        }

        #[test]
        fn scale_invariant(seed in any::<u64>(), scale in prop_oneof![Just(0.5), Just(2.0), Just(3.7), Just(1000.0)]) {
            let (points, _) = blobs(&[(0.0, 0.0), (10.0, 3.0), (4.0, 12.0)], 15, 1.0, seed);
            let scaled: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|x| x * scale).collect()).collect();
            let params = HdbscanParams::new(5, 4);
            prop_assert_eq!(cluster(&points, &params).unwrap().labels, cluster(&scaled, &params).unwrap().labels);
        }
    }
}
