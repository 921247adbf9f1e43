use std::f64::consts::TAU;

use proptest::collection::vec;
use proptest::prelude::*;
use ssmx_core::eval::{precision_recall_curve, ComparisonRecord, MethodConfig};
use ssmx_core::ibdtw::{build_cswm, dtw_row_cost, ibdtw_distance};
use ssmx_core::manifold::knn_geodesics;
use ssmx_core::rf::{build_joint_topc, DopplerTrace};
use ssmx_core::scene::{apply_rigid_transform, generate_trajectory, speed_profile, MotionClass, RigidTransform};
use ssmx_core::ssm::{
    average_ssms, build_ssm, gaussian_smooth, histogram_match, resize_ssm, znorm_ssm, SelfSimilarityMatrix,
    TimeOrderedPointCloud,
};
use ssmx_core::tda::{grid_persistence, sublevel_persistence_1d, wasserstein_distance, Filtration};

fn cloud(dim: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = TimeOrderedPointCloud> {
    vec(vec(-10.0..10.0f64, dim), n).prop_map(|pts| {
        let t = TimeOrderedPointCloud::index_times(pts.len());
        TimeOrderedPointCloud::new(&pts, t).unwrap()
    })
}

fn series(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    vec(-5.0..5.0f64, n)
}

fn ssm_of(xs: &[f64]) -> SelfSimilarityMatrix {
    build_ssm(&TimeOrderedPointCloud::from_series(xs.to_vec(), TimeOrderedPointCloud::index_times(xs.len())).unwrap())
}

/// A random orthogonal map of the plane or of 3-space, with translation.
fn isometry(dim: usize, angles: (f64, f64, f64), flip: bool, shift: [f64; 3], p: &[f64]) -> Vec<f64> {
    let (a, b, c) = angles;
    let mut q: Vec<f64> = if dim == 2 {
        vec![a.cos() * p[0] - a.sin() * p[1], a.sin() * p[0] + a.cos() * p[1]]
    } else {
        // z, then y, then x rotations
        let (x, y, z) = (p[0], p[1], p[2]);
        let (x, y) = (a.cos() * x - a.sin() * y, a.sin() * x + a.cos() * y);
        let (x, z) = (b.cos() * x + b.sin() * z, -b.sin() * x + b.cos() * z);
        let (y, z) = (c.cos() * y - c.sin() * z, c.sin() * y + c.cos() * z);
        vec![x, y, z]
    };
    if flip {
        q[0] = -q[0];
    }
    q.iter().zip(shift).map(|(v, s)| v + s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ssm_is_isometry_invariant(
        dim in 2usize..=3,
        pts in vec(vec(-10.0..10.0f64, 3), 2..30),
        angles in (0.0..TAU, 0.0..TAU, 0.0..TAU),
        flip in any::<bool>(),
        shift in prop::array::uniform3(-100.0..100.0f64),
    ) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p[..dim].to_vec()).collect();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| isometry(dim, angles, flip, shift, p)).collect();
        let t = TimeOrderedPointCloud::index_times(pts.len());
        let a = build_ssm(&TimeOrderedPointCloud::new(&pts, t.clone()).unwrap());
        let b = build_ssm(&TimeOrderedPointCloud::new(&moved, t).unwrap());
        prop_assert!(a.max_abs_diff(&b) <= 1e-9);
    }

    #[test]
    fn ssm_is_symmetric_nonnegative_zero_diagonal(c in cloud(3, 2..25)) {
        let s = build_ssm(&c);
        for i in 0..s.size() {
            prop_assert_eq!(s.get(i, i), 0.0);
            for j in 0..s.size() {
                prop_assert_eq!(s.get(i, j), s.get(j, i));
                prop_assert!(s.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn znorm_is_idempotent(xs in series(2..30)) {
        let s = ssm_of(&xs);
        prop_assume!(s.std() > 1e-9);
        let z = znorm_ssm(&s).unwrap();
        prop_assert!((z.std() - 1.0).abs() <= 1e-12);
        prop_assert!(znorm_ssm(&z).unwrap().max_abs_diff(&z) <= 1e-12);
    }

    #[test]
    fn histogram_match_is_monotone_and_symmetric(a in series(3..25), b in series(3..25)) {
        let (sa, sb) = (ssm_of(&a), ssm_of(&b));
        let (lo, hi) = sb.min_max();
        prop_assume!(hi > lo);
        let out = histogram_match(&sa, &sb, 64).unwrap().ssm;
        let (src, dst) = (sa.values(), out.values());
        for i in 0..src.len() {
            for j in 0..src.len() {
                if src[i] <= src[j] {
                    prop_assert!(dst[i] <= dst[j]);
                }
            }
        }
        for i in 0..out.size() {
            for j in 0..out.size() {
                prop_assert_eq!(out.get(i, j), out.get(j, i));
            }
        }
    }

    #[test]
    fn smoothing_and_resizing_keep_symmetry(xs in series(3..30), side in 2usize..40, sigma in 0.3..4.0f64) {
        let s = ssm_of(&xs);
        let g = gaussian_smooth(&s, sigma).unwrap();
        let r = resize_ssm(&s, side).unwrap();
        for i in 0..g.size() {
            for j in 0..g.size() {
                prop_assert_eq!(g.get(i, j), g.get(j, i));
                prop_assert!(g.get(i, j) >= 0.0);
            }
        }
        for i in 0..side {
            prop_assert_eq!(r.get(i, i), 0.0);
            for j in 0..side {
                prop_assert_eq!(r.get(i, j), r.get(j, i));
                prop_assert!(r.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn average_ignores_list_order(a in series(8..9), b in series(8..9), c in series(8..9)) {
        let (sa, sb, sc) = (ssm_of(&a), ssm_of(&b), ssm_of(&c));
        let x = average_ssms(&[sa.clone(), sb.clone(), sc.clone()]).unwrap();
        let y = average_ssms(&[sc, sa, sb]).unwrap();
        prop_assert!(x.max_abs_diff(&y) <= 1e-12);
    }

    #[test]
    fn dtw_is_symmetric_and_reflexive(a in series(1..12), b in series(1..12)) {
        prop_assert_eq!(dtw_row_cost(&a, &b), dtw_row_cost(&b, &a));
        prop_assert_eq!(dtw_row_cost(&a, &a), 0.0);
    }

    #[test]
    fn ibdtw_is_symmetric(a in series(2..14), b in series(2..14)) {
        let (sa, sb) = (ssm_of(&a), ssm_of(&b));
        prop_assert_eq!(build_cswm(&sa, &sb), build_cswm(&sb, &sa).transpose());
        prop_assert!((ibdtw_distance(&sa, &sb) - ibdtw_distance(&sb, &sa)).abs() <= 1e-9);
        prop_assert_eq!(ibdtw_distance(&sa, &sa), 0.0);
    }

    #[test]
    fn bottleneck_is_stable(
        (rows, cols, f, g) in (2usize..10, 2usize..10).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), vec(-5.0..5.0f64, r * c), vec(-0.5..0.5f64, r * c))
        })
    ) {
        let g: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let sup = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        for filt in [Filtration::Sublevel, Filtration::Superlevel] {
            let d = wasserstein_distance(
                &grid_persistence(rows, cols, &f, filt).unwrap(),
                &grid_persistence(rows, cols, &g, filt).unwrap(),
                f64::INFINITY,
            ).unwrap();
            prop_assert!(d <= sup + 1e-9, "{} > {}", d, sup);
        }
    }

    #[test]
    fn diagram_ignores_time_warping(xs in series(2..20), extra in vec((0usize..19, 0.01..0.99f64), 0..15)) {
        // insert points on the linear segments between samples
        let mut warped = Vec::new();
        for i in 0..xs.len() {
            warped.push(xs[i]);
            if i + 1 < xs.len() {
                let mut ts: Vec<f64> = extra.iter().filter(|e| e.0 == i).map(|e| e.1).collect();
                ts.sort_by(f64::total_cmp);
                warped.extend(ts.iter().map(|t| xs[i] + t * (xs[i + 1] - xs[i])));
            }
        }
        let a = sublevel_persistence_1d(&xs).unwrap().sorted_pairs();
        let b = sublevel_persistence_1d(&warped).unwrap().sorted_pairs();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn wasserstein_is_symmetric(a in series(2..12), b in series(2..12), p in prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)]) {
        let (da, db) = (sublevel_persistence_1d(&a).unwrap(), sublevel_persistence_1d(&b).unwrap());
        let x = wasserstein_distance(&da, &db, p).unwrap();
        let y = wasserstein_distance(&db, &da, p).unwrap();
        prop_assert!((x - y).abs() <= 1e-9);
        prop_assert_eq!(wasserstein_distance(&da, &da, p).unwrap(), 0.0);
    }

    #[test]
    fn geodesics_dominate_euclidean(c in cloud(2, 6..30), k in 2usize..5) {
        let g = knn_geodesics(&c, k).unwrap();
        let e = build_ssm(&c);
        for i in 0..c.len() {
            for j in 0..c.len() {
                prop_assert!(g.get(i, j) >= e.get(i, j) - 1e-9);
            }
        }
    }

    #[test]
    fn joint_embedding_ignores_receiver_order(traces in vec(vec(-50.0..50.0f64, 12), 2..5), rot in 0usize..4) {
        let mk = |i: usize, shifts: &Vec<f64>| DopplerTrace {
            timestamps: (0..shifts.len()).map(|t| t as f64).collect(),
            frequencies: shifts.iter().map(|s| 2e9 + s).collect(),
            receiver_id: format!("rx{i}"),
            carrier: 2e9,
        };
        let a: Vec<DopplerTrace> = traces.iter().enumerate().map(|(i, s)| mk(i, s)).collect();
        let mut b = a.clone();
        b.rotate_left(rot % a.len());
        b.swap(0, a.len() - 1);
        let sa = build_ssm(&build_joint_topc(&a).unwrap());
        let sb = build_ssm(&build_joint_topc(&b).unwrap());
        prop_assert!(sa.max_abs_diff(&sb) <= 1e-12);
    }

    #[test]
    fn speed_profile_survives_rigid_motion(
        class in prop_oneof![Just(MotionClass::Straight), Just(MotionClass::TakeExit), Just(MotionClass::UTurn)],
        seed in any::<u64>(),
        rotation in 0.0..TAU,
        tx in -1000.0..1000.0f64,
        ty in -1000.0..1000.0f64,
        reflect in any::<bool>(),
    ) {
        let traj = generate_trajectory(class, 10.0, 5.0, seed).unwrap();
        let moved = apply_rigid_transform(&traj, &RigidTransform::new(rotation, [tx, ty], reflect).unwrap());
        let a = build_ssm(&speed_profile(&traj).unwrap());
        let b = build_ssm(&speed_profile(&moved).unwrap());
        prop_assert!(a.max_abs_diff(&b) <= 1e-9);
        let pa = TimeOrderedPointCloud::new(
            &traj.positions.iter().map(|p| p.to_vec()).collect::<Vec<_>>(), traj.timestamps.clone()).unwrap();
        let pb = TimeOrderedPointCloud::new(
            &moved.positions.iter().map(|p| p.to_vec()).collect::<Vec<_>>(), moved.timestamps.clone()).unwrap();
        prop_assert!(build_ssm(&pa).max_abs_diff(&build_ssm(&pb)) <= 1e-9);
    }

    #[test]
    fn average_precision_ignores_monotone_rescoring(scores in vec(0.0..10.0f64, 9), scale in 0.1..10.0f64) {
        let method = MethodConfig::all()[0];
        let classes = MotionClass::ALL;
        let recs = |f: &dyn Fn(f64) -> f64| -> Vec<ComparisonRecord> {
            scores.iter().enumerate().map(|(k, &s)| ComparisonRecord {
                method,
                query_class: MotionClass::Straight,
                target_class: classes[k % 3],
                draw_id: k / 3,
                score: f(s),
                hist_direction: None,
            }).collect()
        };
        let a = recs(&|s| s);
        let b = recs(&|s| (scale * s).exp());
        let ca = precision_recall_curve(&a.iter().collect::<Vec<_>>()).unwrap();
        let cb = precision_recall_curve(&b.iter().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(ca.average_precision, cb.average_precision);
        prop_assert!(ca.recall.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((0.0..=1.0).contains(&ca.average_precision));
    }
}
