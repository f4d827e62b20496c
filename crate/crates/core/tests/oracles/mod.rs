//! Independent reference implementations used to cross-check the crate.
//! Each favours the most direct formulation over speed.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Sample covariance (divisor n−1) of the rows of `x`.
pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| x.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance to the `k`-th nearest other point, by full sort.
pub fn brute_core_distances(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    (0..points.len())
        .map(|i| {
            let mut d: Vec<f64> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| euclidean(&points[i], &points[j]))
                .collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect()
}

/// Edge weights of a minimum spanning tree of the mutual-reachability
/// graph by Kruskal's algorithm, ascending.
pub fn kruskal_mst_weights(points: &[Vec<f64>], core: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = euclidean(&points[i], &points[j]).max(core[i]).max(core[j]);
            edges.push((w, i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut out = Vec::new();
    for (w, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            out.push(w);
        }
    }
    out
}

/// Pair-counting AUC: positive-negative pairs ordered correctly, ties ½.
pub fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut twice = 0u64;
    let mut pairs = 0u64;
    for (i, &yi) in labels.iter().enumerate() {
        if !yi {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                twice += 2;
            } else if scores[i] == scores[j] {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pairs) as f64
}

/// Adjusted Rand index from pair agreements.
pub fn pair_counting_ari(a: &[i64], b: &[i64]) -> f64 {
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let num = 2.0 * (both * neither - only_a * only_b);
    let den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Harmonic mean of precision and recall.
pub fn harmonic_f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Standard normal draw by the Box–Muller transform.
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `per_blob` points around each centre with standard deviation `sigma`,
/// with the planted blob index of every point.
pub fn blobs(rng: &mut impl Rng, centres: &[Vec<f64>], per_blob: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<i64>) {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (b, c) in centres.iter().enumerate() {
        for _ in 0..per_blob {
            points.push(c.iter().map(|x| x + sigma * gaussian(rng)).collect());
            labels.push(b as i64);
        }
    }
    (points, labels)
}

/// Precision and recall rows of the published classification results:
/// (model, P, R, F1) as fractions. Rule-based rows are single pooled
/// evaluations; the others are means over ten folds.
pub const PUBLISHED_POOLED: &[(&str, f64, f64, f64)] = &[
    ("rule full text, with diagnosis, W", 0.7018, 0.8705, 0.7770),
    ("rule full text, with diagnosis, G", 0.6557, 0.6876, 0.6713),
    ("rule diagnosis, with diagnosis, W", 0.7388, 0.8638, 0.7964),
    ("rule diagnosis, with diagnosis, G", 0.7461, 0.6742, 0.7083),
    ("rule full text, without diagnosis, W", 0.6554, 0.7916, 0.7169),
    ("rule full text, without diagnosis, G", 0.6233, 0.6005, 0.6110),
];

pub const PUBLISHED_FOLD_MEANS: &[(&str, f64, f64, f64)] = &[
    ("Umberto-E3C, with diagnosis, W", 0.8230, 0.7546, 0.7733),
    ("Umberto-E3C, with diagnosis, G", 0.7275, 0.8459, 0.7506),
    ("Umberto, with diagnosis, W", 0.8067, 0.7348, 0.7691),
    ("Umberto, with diagnosis, G", 0.6229, 0.7599, 0.6846),
    ("LSTM, with diagnosis, W", 0.6857, 0.6497, 0.6554),
    ("LSTM, with diagnosis, G", 0.5739, 0.6086, 0.5508),
    ("Umberto-E3C supervised, with diagnosis, G", 0.8030, 0.8152, 0.8091),
    ("Umberto-E3C, without diagnosis, W", 0.8434, 0.7304, 0.7515),
    ("Umberto-E3C, without diagnosis, G", 0.7015, 0.7900, 0.7428),
    ("Umberto, without diagnosis, W", 0.8001, 0.6868, 0.7390),
    ("Umberto, without diagnosis, G", 0.6141, 0.7669, 0.6818),
    ("LSTM, without diagnosis, W", 0.6498, 0.5621, 0.5880),
    ("LSTM, without diagnosis, G", 0.5014, 0.6397, 0.5303),
    ("Umberto-E3C supervised, without diagnosis, G", 0.7556, 0.8255, 0.7890),
];

/// Predictions and labels whose confusion counts give precision `p` and
/// recall `r` to within about 1e-6.
pub fn confusion_for(p: f64, r: f64) -> (Vec<bool>, Vec<bool>) {
    let tp = 1_000_000usize;
    let fp = (tp as f64 * (1.0 - p) / p).round() as usize;
    let fn_ = (tp as f64 * (1.0 - r) / r).round() as usize;
    let mut pred = Vec::with_capacity(tp + fp + fn_ + 1);
    let mut gold = Vec::with_capacity(tp + fp + fn_ + 1);
    for (n, pv, gv) in [(tp, true, true), (fp, true, false), (fn_, false, true), (1, false, false)] {
        pred.extend(std::iter::repeat_n(pv, n));
        gold.extend(std::iter::repeat_n(gv, n));
    }
    (pred, gold)
}
