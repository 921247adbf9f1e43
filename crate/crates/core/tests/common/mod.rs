//! Brute-force reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::Rng;
use ssmx_core::tda::{Filtration, PersistenceDiagram, PersistencePair};

/// Minimum over every anchored monotone path of the summed `|a_i - b_j|`,
/// enumerated recursively.
pub fn brute_dtw(a: &[f64], b: &[f64]) -> f64 {
    fn go(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if i == a.len() - 1 && j == b.len() - 1 {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            go(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            go(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            go(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Every corner-to-corner monotone path through an `m x n` grid with its
/// node-sum cost (accumulated from the start).
pub fn all_paths(m: usize, n: usize, cost: &[f64]) -> Vec<(f64, Vec<(usize, usize)>)> {
    fn go(
        m: usize,
        n: usize,
        cost: &[f64],
        i: usize,
        j: usize,
        acc: f64,
        path: &mut Vec<(usize, usize)>,
        out: &mut Vec<(f64, Vec<(usize, usize)>)>,
    ) {
        let acc = acc + cost[i * n + j];
        path.push((i, j));
        if i == m - 1 && j == n - 1 {
            out.push((acc, path.clone()));
        } else {
            if i + 1 < m && j + 1 < n {
                go(m, n, cost, i + 1, j + 1, acc, path, out);
            }
            if i + 1 < m {
                go(m, n, cost, i + 1, j, acc, path, out);
            }
            if j + 1 < n {
                go(m, n, cost, i, j + 1, acc, path, out);
            }
        }
        path.pop();
    }
    let mut out = Vec::new();
    go(m, n, cost, 0, 0, 0.0, &mut Vec::new(), &mut out);
    out
}

/// Components of `{v <= t}` under 8-connectivity, labelled by BFS.
fn label_components(rows: usize, cols: usize, values: &[f64], t: f64) -> Vec<Option<usize>> {
    let mut label = vec![None; rows * cols];
    let mut next = 0;
    for start in 0..rows * cols {
        if values[start] > t || label[start].is_some() {
            continue;
        }
        label[start] = Some(next);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let (r, c) = ((v / cols) as isize, (v % cols) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
                        continue;
                    }
                    let u = rr as usize * cols + cc as usize;
                    if values[u] <= t && label[u].is_none() {
                        label[u] = Some(next);
                        queue.push_back(u);
                    }
                }
            }
        }
        next += 1;
    }
    label
}

/// Sublevel pairs by recomputing the thresholded components at every distinct
/// level and tracking which earlier components merge. Sorted (birth, death).
fn sweep_pairs(rows: usize, cols: usize, values: &[f64]) -> (Vec<(f64, f64)>, f64, f64) {
    let mut levels: Vec<f64> = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    // each live component: (representative pixel, birth value)
    let mut live: Vec<(usize, f64)> = Vec::new();
    let mut pairs = Vec::new();
    for &t in &levels {
        let label = label_components(rows, cols, values, t);
        let count = label.iter().flatten().max().map_or(0, |m| m + 1);
        let mut groups: Vec<Vec<(usize, f64)>> = vec![Vec::new(); count];
        for &(rep, b) in &live {
            groups[label[rep].unwrap()].push((rep, b));
        }
        let mut next_live = Vec::new();
        for (g, members) in groups.into_iter().enumerate() {
            if members.is_empty() {
                let rep = label.iter().position(|&l| l == Some(g)).unwrap();
                next_live.push((rep, t));
                continue;
            }
            let elder = members
                .iter()
                .copied()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            // all but the oldest die here; the multiset does not depend on
            // how equal births are ordered
            let mut dying: Vec<f64> = members.iter().map(|m| m.1).collect();
            dying.sort_by(f64::total_cmp);
            for &b in &dying[1..] {
                if t > b {
                    pairs.push((b, t));
                }
            }
            next_live.push(elder);
        }
        live = next_live;
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    (pairs, levels[0], *levels.last().unwrap())
}

/// Diagram of a row-major image by the threshold-sweep oracle, as sorted
/// `(essential, birth, death)` triples in the library's sign convention.
pub fn oracle_diagram(rows: usize, cols: usize, values: &[f64], filtration: Filtration) -> Vec<(bool, f64, f64)> {
    let mut out: Vec<(bool, f64, f64)> = match filtration {
        Filtration::Sublevel => {
            let (pairs, lo, hi) = sweep_pairs(rows, cols, values);
            pairs
                .into_iter()
                .map(|(b, d)| (false, b, d))
                .chain([(true, lo, hi)])
                .collect()
        }
        Filtration::Superlevel => {
            let neg: Vec<f64> = values.iter().map(|v| -v).collect();
            let (pairs, lo, hi) = sweep_pairs(rows, cols, &neg);
            pairs
                .into_iter()
                .map(|(b, d)| (false, -b, -d))
                .chain([(true, -lo, -hi)])
                .collect()
        }
    };
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    out
}

fn linf(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn to_diag(a: &PersistencePair) -> f64 {
    (a.death - a.birth).abs() / 2.0
}

/// Costs of every matching of `a` into `b` plus the diagonal.
fn all_matchings(a: &[PersistencePair], b: &[PersistencePair]) -> Vec<Vec<f64>> {
    fn go(a: &[PersistencePair], b: &[PersistencePair], i: usize, used: &mut Vec<bool>, costs: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if i == a.len() {
            let mut all = costs.clone();
            for (j, pb) in b.iter().enumerate() {
                if !used[j] {
                    all.push(to_diag(pb));
                }
            }
            out.push(all);
            return;
        }
        costs.push(to_diag(&a[i]));
        go(a, b, i + 1, used, costs, out);
        costs.pop();
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                costs.push(linf(&a[i], &b[j]));
                go(a, b, i + 1, used, costs, out);
                costs.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(a, b, 0, &mut vec![false; b.len()], &mut Vec::new(), &mut out);
    out
}

/// Wasserstein distance by exhaustive enumeration of matchings, with finite
/// and essential classes matched separately.
pub fn brute_wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> f64 {
    let split = |d: &PersistenceDiagram| -> (Vec<PersistencePair>, Vec<PersistencePair>) {
        (d.finite().copied().collect(), d.essential().copied().collect())
    };
    let (f1, e1) = split(d1);
    let (f2, e2) = split(d2);
    let agg = |costs: &Vec<f64>| -> f64 {
        if p.is_infinite() {
            costs.iter().copied().fold(0.0, f64::max)
        } else {
            costs.iter().map(|c| c.powf(p)).sum()
        }
    };
    let best = |a: &[PersistencePair], b: &[PersistencePair]| -> f64 {
        all_matchings(a, b).iter().map(agg).fold(f64::INFINITY, f64::min)
    };
    let (f, e) = (best(&f1, &f2), best(&e1, &e2));
    if p.is_infinite() {
        f.max(e)
    } else {
        (f + e).powf(1.0 / p)
    }
}

/// Random diagram with up to `max_finite` finite pairs and one essential pair.
pub fn random_diagram<R: Rng>(rng: &mut R, max_finite: usize) -> PersistenceDiagram {
    let n = rng.random_range(0..=max_finite);
    let mut pairs: Vec<PersistencePair> = (0..n)
        .map(|_| {
            let birth: f64 = rng.random_range(-5.0..5.0);
            PersistencePair {
                birth,
                death: birth + rng.random_range(0.01..4.0),
                essential: false,
            }
        })
        .collect();
    let lo: f64 = rng.random_range(-8.0..-5.0);
    pairs.push(PersistencePair {
        birth: lo,
        death: rng.random_range(5.0..9.0),
        essential: true,
    });
    PersistenceDiagram::new(Filtration::Sublevel, pairs)
}

/// Random integer-valued image with sides in `2..=max_side`.
pub fn random_integer_image<R: Rng>(rng: &mut R, max_side: usize) -> (usize, usize, Vec<f64>) {
    let rows = rng.random_range(2..=max_side);
    let cols = rng.random_range(2..=max_side);
    let top = rng.random_range(1..=12);
    let values = (0..rows * cols).map(|_| rng.random_range(0..=top) as f64).collect();
    (rows, cols, values)
}
