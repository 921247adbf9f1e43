mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssmx_core::ibdtw::{build_cswm, dtw_row_cost, extract_warping_path, CrossSimilarityWarpMatrix};
use ssmx_core::ssm::{build_ssm, TimeOrderedPointCloud};
use ssmx_core::tda::{
    grid_persistence, sublevel_persistence_1d, wasserstein_distance, Filtration, PersistenceDiagram, PersistencePair,
};

fn random_row(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
}

#[test]
fn dtw_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let a = random_row(&mut rng, 6);
        let b = random_row(&mut rng, 6);
        assert_eq!(dtw_row_cost(&a, &b), brute_dtw(&a, &b), "a={a:?} b={b:?}");
    }
}

fn ssm_of(xs: &[f64]) -> ssmx_core::SelfSimilarityMatrix {
    build_ssm(&TimeOrderedPointCloud::from_series(xs.to_vec(), TimeOrderedPointCloud::index_times(xs.len())).unwrap())
}

#[test]
fn cswm_entries_are_row_dtw_costs() {
    let a = ssm_of(&[0.0, 1.5, 0.2]);
    let b = ssm_of(&[3.0, -1.0, 0.5, 2.0]);
    let c = build_cswm(&a, &b);
    assert_eq!((c.rows, c.cols), (3, 4));
    for i in 0..3 {
        for j in 0..4 {
            assert_eq!(c.get(i, j), dtw_row_cost(a.row(i), b.row(j)));
        }
    }
    assert_eq!(build_cswm(&b, &a), c.transpose());
}

/// The library path must be a minimum-cost path, and the shortest among those.
fn check_path(m: usize, n: usize, values: Vec<f64>) {
    let paths = all_paths(m, n, &values);
    let best = paths.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let shortest = paths.iter().filter(|p| p.0 == best).map(|p| p.1.len()).min().unwrap();
    let got = extract_warping_path(&CrossSimilarityWarpMatrix::new(m, n, values));
    assert_eq!(got.total_cost, best);
    assert_eq!(got.pairs.len(), shortest);
    assert!(paths.iter().any(|(c, p)| *c == best && *p == got.pairs));
}

#[test]
fn warping_path_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let (m, n) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let values = (0..m * n).map(|_| rng.random_range(0.0..10.0)).collect();
        check_path(m, n, values);
    }
    // integer costs produce many ties
    for _ in 0..60 {
        let (m, n) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let values = (0..m * n).map(|_| rng.random_range(0..3) as f64).collect();
        check_path(m, n, values);
    }
}

#[test]
fn path_follows_a_cheap_valley() {
    // free along the first row and the last column, expensive elsewhere
    let (m, n) = (5, 5);
    let values: Vec<f64> = (0..m * n)
        .map(|k| if k / n == 0 || k % n == n - 1 { 0.0 } else { 5.0 })
        .collect();
    let got = extract_warping_path(&CrossSimilarityWarpMatrix::new(m, n, values.clone()));
    // equal cost, so the corner is cut by one diagonal step
    let valley: Vec<(usize, usize)> = (0..n - 1).map(|j| (0, j)).chain((1..m).map(|i| (i, n - 1))).collect();
    assert_eq!(got.pairs, valley);
    assert_eq!(got.total_cost, 0.0);
    check_path(m, n, values);
}

#[test]
fn one_dimensional_examples() {
    let d = sublevel_persistence_1d(&[0.0, 2.0, 1.0, 3.0]).unwrap();
    assert_eq!(d.sorted_pairs(), vec![(false, 1.0, 2.0), (true, 0.0, 3.0)]);
    let d = sublevel_persistence_1d(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(d.sorted_pairs(), vec![(true, 1.0, 4.0)]);
    assert_eq!(oracle_diagram(1, 4, &[0.0, 2.0, 1.0, 3.0], Filtration::Sublevel), vec![(false, 1.0, 2.0), (true, 0.0, 3.0)]);
}

#[test]
fn diagonal_neighbors_connect() {
    let d = grid_persistence(2, 2, &[0.0, 1.0, 1.0, 0.0], Filtration::Sublevel).unwrap();
    assert_eq!(d.sorted_pairs(), vec![(true, 0.0, 1.0)]);
}

#[test]
fn image_persistence_matches_threshold_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..60 {
        let (rows, cols, values) = random_integer_image(&mut rng, 9);
        for f in [Filtration::Sublevel, Filtration::Superlevel] {
            let got = grid_persistence(rows, cols, &values, f).unwrap().sorted_pairs();
            assert_eq!(got, oracle_diagram(rows, cols, &values, f), "{rows}x{cols} {f}: {values:?}");
        }
    }
}

#[test]
fn wasserstein_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..60 {
        let a = random_diagram(&mut rng, 4);
        let b = random_diagram(&mut rng, 4);
        for p in [1.0, 2.0, f64::INFINITY] {
            let got = wasserstein_distance(&a, &b, p).unwrap();
            let want = brute_wasserstein(&a, &b, p);
            assert!((got - want).abs() <= 1e-9, "p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn lone_point_goes_to_the_diagonal() {
    let ess = PersistencePair {
        birth: -1.0,
        death: 5.0,
        essential: true,
    };
    let a = PersistenceDiagram::new(
        Filtration::Sublevel,
        vec![
            PersistencePair {
                birth: 0.0,
                death: 2.0,
                essential: false,
            },
            ess,
        ],
    );
    let b = PersistenceDiagram::new(Filtration::Sublevel, vec![ess]);
    for p in [1.0, 2.0, 3.5, f64::INFINITY] {
        assert!((wasserstein_distance(&a, &b, p).unwrap() - 1.0).abs() < 1e-12);
        assert!((brute_wasserstein(&a, &b, p) - 1.0).abs() < 1e-12);
    }
}
