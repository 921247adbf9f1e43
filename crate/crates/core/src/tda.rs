//! Zero-dimensional persistence of signals and images under sublevel and
//! superlevel filtrations, and Wasserstein / bottleneck distances between
//! the resulting diagrams.

use std::fmt;

use crate::error::{Error, Result};
use crate::ssm::{gaussian_smooth, SelfSimilarityMatrix};

/// Smoothing applied to SSMs before their diagrams are compared.
pub const DEFAULT_SMOOTHING_SIGMA: f64 = 3.0;
pub const DEFAULT_WASSERSTEIN_ORDER: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filtration {
    Sublevel,
    Superlevel,
}

impl fmt::Display for Filtration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Filtration::Sublevel => "sublevel",
            Filtration::Superlevel => "superlevel",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        (self.death - self.birth).abs()
    }
}

/// Multiset of (birth, death) pairs.
///
/// Values are reported in the sign convention of the input: sublevel pairs
/// have `death >= birth`, superlevel pairs `death <= birth`. The essential
/// class is (global min, global max) for sublevel diagrams and the reverse
/// for superlevel ones. Zero-persistence finite pairs are not recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub filtration: Filtration,
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(filtration: Filtration, pairs: Vec<PersistencePair>) -> Self {
        Self { filtration, pairs }
    }

    pub fn finite(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(|p| !p.essential)
    }

    pub fn essential(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(|p| p.essential)
    }

    /// Pairs sorted by (essential, birth, death), for order-insensitive comparison.
    pub fn sorted_pairs(&self) -> Vec<(bool, f64, f64)> {
        let mut v: Vec<(bool, f64, f64)> = self.pairs.iter().map(|p| (p.essential, p.birth, p.death)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        v
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }
}

/// Sublevel sweep over a graph whose vertices carry `values`.
///
/// Vertices enter in (value, index) order; a vertex with no processed
/// neighbor starts a component, and when components meet the one born later
/// in that order dies at the current value. Returns finite (birth, death)
/// pairs with positive persistence.
fn sweep(values: &[f64], mut neighbors: impl FnMut(usize, &mut Vec<usize>)) -> Vec<(f64, f64)> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let mut uf = UnionFind::new(n);
    // birth vertex of each root
    let mut birth = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut nbrs = Vec::with_capacity(8);
    let mut roots = Vec::with_capacity(8);
    let mut pairs = Vec::new();

    for &v in &order {
        nbrs.clear();
        neighbors(v, &mut nbrs);
        roots.clear();
        for &u in &nbrs {
            if seen[u] {
                let r = uf.find(u);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        seen[v] = true;
        let Some(&elder) = roots.iter().min_by_key(|&&r| rank[birth[r]]) else {
            birth[v] = v;
            continue;
        };
        let level = values[v];
        for &r in &roots {
            if r != elder {
                let b = values[birth[r]];
                if level > b {
                    pairs.push((b, level));
                }
                uf.parent[r] = elder;
            }
        }
        uf.parent[v] = elder;
    }
    pairs
}

fn diagram_from_sweep(values: &[f64], filtration: Filtration, neighbors: impl FnMut(usize, &mut Vec<usize>)) -> PersistenceDiagram {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    match filtration {
        Filtration::Sublevel => {
            let mut pairs: Vec<PersistencePair> = sweep(values, neighbors)
                .into_iter()
                .map(|(birth, death)| PersistencePair {
                    birth,
                    death,
                    essential: false,
                })
                .collect();
            pairs.push(PersistencePair {
                birth: lo,
                death: hi,
                essential: true,
            });
            PersistenceDiagram::new(filtration, pairs)
        }
        Filtration::Superlevel => {
            let negated: Vec<f64> = values.iter().map(|v| -v).collect();
            let mut pairs: Vec<PersistencePair> = sweep(&negated, neighbors)
                .into_iter()
                .map(|(b, d)| PersistencePair {
                    birth: -b,
                    death: -d,
                    essential: false,
                })
                .collect();
            pairs.push(PersistencePair {
                birth: hi,
                death: lo,
                essential: true,
            });
            PersistenceDiagram::new(filtration, pairs)
        }
    }
}

/// Sublevel persistence of a 1-D signal.
pub fn sublevel_persistence_1d(signal: &[f64]) -> Result<PersistenceDiagram> {
    level_persistence_1d(signal, Filtration::Sublevel)
}

pub fn level_persistence_1d(signal: &[f64], filtration: Filtration) -> Result<PersistenceDiagram> {
    if signal.is_empty() {
        return Err(Error::InvalidArgument("signal must be nonempty".into()));
    }
    let n = signal.len();
    Ok(diagram_from_sweep(signal, filtration, |v, out| {
        if v > 0 {
            out.push(v - 1);
        }
        if v + 1 < n {
            out.push(v + 1);
        }
    }))
}

/// Persistence of a row-major `rows x cols` image with 8-connectivity.
pub fn grid_persistence(rows: usize, cols: usize, values: &[f64], filtration: Filtration) -> Result<PersistenceDiagram> {
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(Error::SizeMismatch(rows * cols, values.len()));
    }
    Ok(diagram_from_sweep(values, filtration, |v, out| {
        let (r, c) = ((v / cols) as isize, (v % cols) as isize);
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (rr, cc) = (r + dr, c + dc);
                if rr >= 0 && cc >= 0 && (rr as usize) < rows && (cc as usize) < cols {
                    out.push(rr as usize * cols + cc as usize);
                }
            }
        }
    }))
}

/// Persistence of an SSM viewed as an image.
pub fn image_persistence(image: &SelfSimilarityMatrix, filtration: Filtration) -> PersistenceDiagram {
    let n = image.size();
    grid_persistence(n, n, image.values(), filtration).expect("square image")
}

/// L-infinity ground distance between diagram points.
fn point_distance(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// L-infinity distance to the nearest diagonal point `((b+d)/2, (b+d)/2)`.
fn diagonal_distance(a: &PersistencePair) -> f64 {
    0.5 * (a.death - a.birth).abs()
}

/// Minimum-cost perfect assignment on an `n x n` cost matrix (row-major).
/// Returns the column assigned to each row.
pub fn hungarian(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    // potentials, 1-based with a virtual row/column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            let crow = &cost[(r0 - 1) * n..r0 * n];
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = crow[col - 1] - u[r0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Augmented cost matrix: rows are `a` points then diagonal slots for `b`,
/// columns are `b` points then diagonal slots for `a`.
fn augmented_costs(a: &[PersistencePair], b: &[PersistencePair], f: impl Fn(f64) -> f64) -> (usize, Vec<f64>) {
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let mut cost = vec![0.0; n * n];
    for (i, pa) in a.iter().enumerate() {
        let diag = f(diagonal_distance(pa));
        for (j, pb) in b.iter().enumerate() {
            cost[i * n + j] = f(point_distance(pa, pb));
        }
        for k in 0..na {
            cost[i * n + nb + k] = diag;
        }
    }
    for k in 0..nb {
        for (j, pb) in b.iter().enumerate() {
            cost[(na + k) * n + j] = f(diagonal_distance(pb));
        }
    }
    (n, cost)
}

/// Minimum of `sum cost^p` over matchings of `a` and `b` where unmatched
/// points go to the diagonal.
fn matching_power_sum(a: &[PersistencePair], b: &[PersistencePair], p: f64) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let (n, cost) = augmented_costs(a, b, |d| d.powf(p));
    hungarian(n, &cost)
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[r * n + c])
        .sum()
}

/// Perfect matching using only edges allowed by `allowed`, via augmenting paths.
fn has_perfect_matching(n: usize, allowed: &[bool]) -> bool {
    fn augment(r: usize, n: usize, allowed: &[bool], seen: &mut [bool], owner: &mut [usize]) -> bool {
        for c in 0..n {
            if allowed[r * n + c] && !seen[c] {
                seen[c] = true;
                if owner[c] == usize::MAX || augment(owner[c], n, allowed, seen, owner) {
                    owner[c] = r;
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for r in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        if !augment(r, n, allowed, &mut seen, &mut owner) {
            return false;
        }
    }
    true
}

/// Smallest achievable maximum matching cost.
fn matching_bottleneck(a: &[PersistencePair], b: &[PersistencePair]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let (n, cost) = augmented_costs(a, b, |d| d);
    let mut levels = cost.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let allowed: Vec<bool> = cost.iter().map(|&c| c <= levels[mid]).collect();
        if has_perfect_matching(n, &allowed) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

/// p-Wasserstein distance with L-infinity ground metric; `p = inf` gives the
/// bottleneck distance. Essential classes are matched among themselves and
/// finite classes among finite points and the diagonal.
pub fn wasserstein_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Wasserstein order must be >= 1, got {p}")));
    }
    let split = |d: &PersistenceDiagram| -> (Vec<PersistencePair>, Vec<PersistencePair>) {
        (d.finite().copied().collect(), d.essential().copied().collect())
    };
    let (f1, e1) = split(d1);
    let (f2, e2) = split(d2);
    if p.is_infinite() {
        return Ok(matching_bottleneck(&f1, &f2).max(matching_bottleneck(&e1, &e2)));
    }
    let total = matching_power_sum(&f1, &f2, p) + matching_power_sum(&e1, &e2, p);
    Ok(total.powf(1.0 / p))
}

/// Sublevel and superlevel diagrams of an SSM after Gaussian smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmDiagrams {
    pub sublevel: PersistenceDiagram,
    pub superlevel: PersistenceDiagram,
}

pub fn ssm_diagrams(ssm: &SelfSimilarityMatrix, sigma: f64) -> Result<SsmDiagrams> {
    let smooth = gaussian_smooth(ssm, sigma)?;
    Ok(SsmDiagrams {
        sublevel: image_persistence(&smooth, Filtration::Sublevel),
        superlevel: image_persistence(&smooth, Filtration::Superlevel),
    })
}

/// Sum of the sublevel and superlevel Wasserstein distances.
pub fn diagrams_distance(a: &SsmDiagrams, b: &SsmDiagrams, p: f64) -> Result<f64> {
    Ok(wasserstein_distance(&a.sublevel, &b.sublevel, p)? + wasserstein_distance(&a.superlevel, &b.superlevel, p)?)
}

/// Persistence-based SSM distance with the default smoothing.
pub fn tda_ssm_distance(ssm_a: &SelfSimilarityMatrix, ssm_b: &SelfSimilarityMatrix, p: f64) -> Result<f64> {
    diagrams_distance(
        &ssm_diagrams(ssm_a, DEFAULT_SMOOTHING_SIGMA)?,
        &ssm_diagrams(ssm_b, DEFAULT_SMOOTHING_SIGMA)?,
        p,
    )
}
