//! Isometry-blind dynamic time warping.
//!
//! Every row of one SSM is aligned against every row of the other with
//! classic DTW; the resulting cross-similarity warp matrix (CSWM) is then
//! traversed by a second DTW-style shortest path whose cost is the score.

use std::array;

use rayon::prelude::*;

use crate::ssm::SelfSimilarityMatrix;

/// Optimal cumulative cost of aligning two sequences with local cost
/// `|a_i - b_j|`, steps `(1,0)`, `(0,1)`, `(1,1)`, anchored at both ends.
///
/// Returns `+inf` if either sequence is empty.
pub fn dtw_row_cost(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let n = b.len();
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let mut acc = 0.0;
    for (q, &bq) in b.iter().enumerate() {
        acc = if q == 0 { (a[0] - bq).abs() } else { acc + (a[0] - bq).abs() };
        prev[q] = acc;
    }
    for &ap in &a[1..] {
        let mut left = prev[0] + (ap - b[0]).abs();
        cur[0] = left;
        for q in 1..n {
            let m = prev[q - 1].min(prev[q]).min(left);
            left = (ap - b[q]).abs() + m;
            cur[q] = left;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n - 1]
}

const LANES: usize = 8;
type Lane = [f64; LANES];

#[inline(always)]
fn lane_min(x: Lane, y: Lane) -> Lane {
    // same result as f64::min for non-NaN inputs
    array::from_fn(|k| if y[k] < x[k] { y[k] } else { x[k] })
}

#[inline(always)]
fn lane_cost(a: f64, b: &Lane) -> Lane {
    array::from_fn(|k| (a - b[k]).abs())
}

#[inline(always)]
fn lane_add(x: Lane, y: Lane) -> Lane {
    array::from_fn(|k| x[k] + y[k])
}

/// [`dtw_row_cost`] of `a` against `LANES` sequences at once; `bt[q][k]` is
/// sample `q` of sequence `k`. Bit-identical to the scalar routine.
fn dtw_row_cost_lanes(a: &[f64], bt: &[Lane], prev: &mut Vec<Lane>, cur: &mut Vec<Lane>) -> Lane {
    let n = bt.len();
    prev.clear();
    prev.resize(n, [0.0; LANES]);
    cur.clear();
    cur.resize(n, [0.0; LANES]);
    let mut acc = lane_cost(a[0], &bt[0]);
    prev[0] = acc;
    for q in 1..n {
        acc = lane_add(acc, lane_cost(a[0], &bt[q]));
        prev[q] = acc;
    }
    for &ap in &a[1..] {
        let mut left = lane_add(prev[0], lane_cost(ap, &bt[0]));
        cur[0] = left;
        for q in 1..n {
            let m = lane_min(lane_min(prev[q - 1], prev[q]), left);
            left = lane_add(lane_cost(ap, &bt[q]), m);
            cur[q] = left;
        }
        std::mem::swap(prev, cur);
    }
    prev[n - 1]
}

/// `values[i * cols + j]` is the DTW cost between row `i` of the first SSM and
/// row `j` of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSimilarityWarpMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl CrossSimilarityWarpMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[j * self.rows + i] = self.get(i, j);
            }
        }
        Self::new(self.cols, self.rows, values)
    }
}

pub fn build_cswm(ssm_a: &SelfSimilarityMatrix, ssm_b: &SelfSimilarityMatrix) -> CrossSimilarityWarpMatrix {
    let (m, n) = (ssm_a.size(), ssm_b.size());
    // transpose B's rows into lane blocks, padding the last block
    let blocks: Vec<Vec<Lane>> = (0..n)
        .step_by(LANES)
        .map(|j0| {
            (0..n)
                .map(|q| array::from_fn(|k| ssm_b.get((j0 + k).min(n - 1), q)))
                .collect()
        })
        .collect();

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(prev, cur), i| {
                let a = ssm_a.row(i);
                let mut out = Vec::with_capacity(n);
                for (b, block) in blocks.iter().enumerate() {
                    let costs = dtw_row_cost_lanes(a, block, prev, cur);
                    let take = LANES.min(n - b * LANES);
                    out.extend_from_slice(&costs[..take]);
                }
                out
            },
        )
        .collect();
    CrossSimilarityWarpMatrix::new(m, n, rows.into_iter().flatten().collect())
}

/// Monotone corner-to-corner correspondence through a CSWM.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingPath {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
    pub normalized_cost: f64,
}

#[derive(Clone, Copy)]
enum Step {
    Start,
    Diagonal,
    Down,
    Right,
}

/// Minimum node-sum path from `(0, 0)` to `(M-1, N-1)`.
///
/// Among paths of equal cost the shortest is taken; remaining ties prefer the
/// diagonal step, then the down (row-advancing) step.
pub fn extract_warping_path(cswm: &CrossSimilarityWarpMatrix) -> WarpingPath {
    let (m, n) = (cswm.rows, cswm.cols);
    assert!(m > 0 && n > 0, "empty CSWM");
    let mut cost = vec![0.0; m * n];
    let mut len = vec![0usize; m * n];
    let mut step = vec![Step::Start; m * n];
    for i in 0..m {
        for j in 0..n {
            let idx = i * n + j;
            let here = cswm.get(i, j);
            if i == 0 && j == 0 {
                cost[idx] = here;
                len[idx] = 1;
                continue;
            }
            let mut best: Option<(f64, usize, Step)> = None;
            let candidates = [
                (i > 0 && j > 0, idx.wrapping_sub(n + 1), Step::Diagonal),
                (i > 0, idx.wrapping_sub(n), Step::Down),
                (j > 0, idx.wrapping_sub(1), Step::Right),
            ];
            for (ok, from, s) in candidates {
                if !ok {
                    continue;
                }
                let key = (cost[from], len[from]);
                let better = match best {
                    None => true,
                    Some((c, l, _)) => key.0 < c || (key.0 == c && key.1 < l),
                };
                if better {
                    best = Some((key.0, key.1, s));
                }
            }
            let (c, l, s) = best.expect("interior cell has a predecessor");
            cost[idx] = here + c;
            len[idx] = l + 1;
            step[idx] = s;
        }
    }

    let mut pairs = Vec::with_capacity(len[m * n - 1]);
    let (mut i, mut j) = (m - 1, n - 1);
    loop {
        pairs.push((i, j));
        match step[i * n + j] {
            Step::Start => break,
            Step::Diagonal => {
                i -= 1;
                j -= 1;
            }
            Step::Down => i -= 1,
            Step::Right => j -= 1,
        }
    }
    pairs.reverse();
    let total_cost = cost[m * n - 1];
    WarpingPath {
        normalized_cost: total_cost / pairs.len() as f64,
        total_cost,
        pairs,
    }
}

/// CSWM and warping path for a pair of SSMs.
pub fn ibdtw_align(ssm_a: &SelfSimilarityMatrix, ssm_b: &SelfSimilarityMatrix) -> (CrossSimilarityWarpMatrix, WarpingPath) {
    let cswm = build_cswm(ssm_a, ssm_b);
    let path = extract_warping_path(&cswm);
    (cswm, path)
}

/// Length-normalized warping-path cost between two SSMs.
pub fn ibdtw_distance(ssm_a: &SelfSimilarityMatrix, ssm_b: &SelfSimilarityMatrix) -> f64 {
    ibdtw_align(ssm_a, ssm_b).1.normalized_cost
}
