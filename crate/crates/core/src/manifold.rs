//! ISOMAP (k-NN graph geodesics + classical MDS) and PCA for joint
//! embeddings.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ssm::TimeOrderedPointCloud;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicDistanceMatrix {
    size: usize,
    values: Vec<f64>,
    pub connected: bool,
}

impl GeodesicDistanceMatrix {
    /// Wraps an arbitrary symmetric distance matrix (e.g. exact Euclidean
    /// distances) for use with [`classical_mds`].
    pub fn from_distances(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::SizeMismatch(size * size, values.len()));
        }
        let connected = values.iter().all(|v| v.is_finite());
        Ok(Self {
            size,
            values,
            connected,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `max(5, round(N / 20))`.
pub fn default_neighbors(n: usize) -> usize {
    5.max((n as f64 / 20.0).round() as usize)
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Undirected k-NN graph (union of neighbor relations) with Euclidean edge
/// weights, followed by all-pairs shortest paths.
pub fn knn_geodesics(topc: &TimeOrderedPointCloud, k: usize) -> Result<GeodesicDistanceMatrix> {
    let n = topc.len();
    if k < 1 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k < N, got k = {k}, N = {n}"
        )));
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclidean(topc.point(i), topc.point(j)), j))
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(d, j) in &cand[..k] {
            adjacency[i].push((j, d));
            adjacency[j].push((i, d));
        }
    }
    for edges in &mut adjacency {
        edges.sort_by_key(|e| e.0);
        edges.dedup_by_key(|e| e.0);
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|src| {
            let mut dist = vec![f64::INFINITY; n];
            dist[src] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Frontier { dist: 0.0, node: src });
            while let Some(Frontier { dist: d, node }) = heap.pop() {
                if d > dist[node] {
                    continue;
                }
                for &(next, w) in &adjacency[node] {
                    let nd = d + w;
                    if nd < dist[next] {
                        dist[next] = nd;
                        heap.push(Frontier { dist: nd, node: next });
                    }
                }
            }
            dist
        })
        .collect();

    let mut values: Vec<f64> = rows.into_iter().flatten().collect();
    // Dijkstra from opposite ends can differ in the last ulp.
    for i in 0..n {
        for j in i + 1..n {
            let v = values[i * n + j].min(values[j * n + i]);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    let connected = values.iter().all(|v| v.is_finite());
    Ok(GeodesicDistanceMatrix {
        size: n,
        values,
        connected,
    })
}

/// Top eigenpairs of a symmetric matrix, largest first, with each eigenvector's
/// largest-magnitude entry made positive.
fn top_eigen(m: DMatrix<f64>, count: usize) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .into_iter()
        .take(count)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let pivot = v
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[k], v)
        })
        .collect()
}

/// Classical (Torgerson) MDS. Negative eigenvalues are clamped to zero.
/// The result is time-stamped by sample index.
pub fn classical_mds(distances: &GeodesicDistanceMatrix, target_dim: usize) -> Result<TimeOrderedPointCloud> {
    if !distances.connected {
        return Err(Error::Disconnected);
    }
    let n = distances.size();
    if target_dim < 1 || target_dim > n {
        return Err(Error::InvalidArgument(format!(
            "target dimension {target_dim} outside [1, {n}]"
        )));
    }
    let sq = DMatrix::from_fn(n, n, |i, j| {
        let d = distances.get(i, j);
        d * d
    });
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let pairs = top_eigen(gram, target_dim);
    let mut coords = vec![0.0; n * target_dim];
    for (axis, (lambda, v)) in pairs.iter().enumerate() {
        let scale = lambda.max(0.0).sqrt();
        for i in 0..n {
            coords[i * target_dim + axis] = v[i] * scale;
        }
    }
    TimeOrderedPointCloud::from_flat(target_dim, coords, TimeOrderedPointCloud::index_times(n))
}

/// ISOMAP embedding. If the k-NN graph is disconnected, `k` is raised one at
/// a time until it connects.
pub fn isomap_embed(topc: &TimeOrderedPointCloud, target_dim: usize, k: usize) -> Result<TimeOrderedPointCloud> {
    let n = topc.len();
    let mut k = k.clamp(1, n - 1);
    let geo = loop {
        let geo = knn_geodesics(topc, k)?;
        if geo.connected || k == n - 1 {
            break geo;
        }
        log::debug!("isomap: k = {k} leaves the graph disconnected, retrying");
        k += 1;
    };
    let embedded = classical_mds(&geo, target_dim)?;
    TimeOrderedPointCloud::from_flat(target_dim, embedded.coords().to_vec(), topc.timestamps().to_vec())
}

/// Mean-centered projection onto the top principal directions.
pub fn pca_project(topc: &TimeOrderedPointCloud, target_dim: usize) -> Result<TimeOrderedPointCloud> {
    let d = topc.dim();
    let n = topc.len();
    if target_dim < 1 || target_dim > d {
        return Err(Error::InvalidArgument(format!(
            "target dimension {target_dim} outside [1, {d}]"
        )));
    }
    let mut mean = vec![0.0; d];
    for p in topc.points() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, d, |i, j| topc.point(i)[j] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let axes = top_eigen(cov, target_dim);
    let mut coords = vec![0.0; n * target_dim];
    for i in 0..n {
        for (a, (_, v)) in axes.iter().enumerate() {
            coords[i * target_dim + a] = (0..d).map(|j| centered[(i, j)] * v[j]).sum();
        }
    }
    TimeOrderedPointCloud::from_flat(target_dim, coords, topc.timestamps().to_vec())
}

/// `n` evenly spaced samples of the trefoil knot
/// `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)` over one period.
pub fn trefoil_knot(n: usize) -> Result<TimeOrderedPointCloud> {
    let ts: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect();
    let points: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| vec![t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -(3.0 * t).sin()])
        .collect();
    TimeOrderedPointCloud::new(&points, ts)
}
