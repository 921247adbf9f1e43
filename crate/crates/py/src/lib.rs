//! Python bindings. Matrices cross the boundary as lists of rows, point
//! clouds as lists of points, diagrams as lists of `(birth, death, essential)`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use ssmx_core::eval::{run_experiment as run_core_experiment, summarize, ExperimentConfig, MethodConfig};
use ssmx_core::manifold::default_neighbors;
use ssmx_core::rf::{Receiver, DEFAULT_CARRIER};
use ssmx_core::scene::{MotionClass, Trajectory};
use ssmx_core::ssm::{SelfSimilarityMatrix, TimeOrderedPointCloud};
use ssmx_core::tda::{Filtration, PersistenceDiagram, PersistencePair};
use ssmx_core::{ibdtw, manifold, rf, scene, ssm, tda, Error};

type Rows = Vec<Vec<f64>>;
type Pairs = Vec<(f64, f64, bool)>;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cloud(points: &[Vec<f64>], timestamps: Option<Vec<f64>>) -> Result<TimeOrderedPointCloud, Error> {
    let times = timestamps.unwrap_or_else(|| TimeOrderedPointCloud::index_times(points.len()));
    TimeOrderedPointCloud::new(points, times)
}

fn cloud_rows(c: &TimeOrderedPointCloud) -> Rows {
    c.points().map(<[f64]>::to_vec).collect()
}

fn matrix(rows: &[Vec<f64>]) -> Result<SelfSimilarityMatrix, Error> {
    SelfSimilarityMatrix::from_rows(rows)
}

fn diagram(pairs: &[(f64, f64, bool)], filtration: Filtration) -> PersistenceDiagram {
    let pairs = pairs
        .iter()
        .map(|&(birth, death, essential)| PersistencePair { birth, death, essential })
        .collect();
    PersistenceDiagram::new(filtration, pairs)
}

fn pairs_of(d: &PersistenceDiagram) -> Pairs {
    d.sorted_pairs().into_iter().map(|(e, b, d)| (b, d, e)).collect()
}

fn filtration(name: &str) -> Result<Filtration, Error> {
    match name {
        "sublevel" => Ok(Filtration::Sublevel),
        "superlevel" => Ok(Filtration::Superlevel),
        other => Err(Error::InvalidArgument(format!("filtration {other:?} is not sublevel or superlevel"))),
    }
}

/// Pairwise Euclidean distances of a time-ordered point cloud.
#[pyfunction]
#[pyo3(signature = (points, timestamps=None))]
fn build_ssm(points: Rows, timestamps: Option<Vec<f64>>) -> PyResult<Rows> {
    Ok(ssm::build_ssm(&cloud(&points, timestamps).map_err(py_err)?).to_rows())
}

#[pyfunction]
fn znorm_ssm(ssm: Rows) -> PyResult<Rows> {
    Ok(ssm::znorm_ssm(&matrix(&ssm).map_err(py_err)?).map_err(py_err)?.to_rows())
}

/// Remaps `source` so its value histogram follows `target`'s.
#[pyfunction]
#[pyo3(signature = (source, target, bins=64))]
fn histogram_match(source: Rows, target: Rows, bins: usize) -> PyResult<Rows> {
    let (s, t) = (matrix(&source).map_err(py_err)?, matrix(&target).map_err(py_err)?);
    Ok(ssm::histogram_match(&s, &t, bins).map_err(py_err)?.ssm.to_rows())
}

#[pyfunction]
#[pyo3(signature = (ssm, sigma=3.0))]
fn gaussian_smooth(ssm: Rows, sigma: f64) -> PyResult<Rows> {
    Ok(ssm::gaussian_smooth(&matrix(&ssm).map_err(py_err)?, sigma).map_err(py_err)?.to_rows())
}

#[pyfunction]
fn resize_ssm(ssm: Rows, size: usize) -> PyResult<Rows> {
    Ok(ssm::resize_ssm(&matrix(&ssm).map_err(py_err)?, size).map_err(py_err)?.to_rows())
}

#[pyfunction]
fn average_ssms(ssms: Vec<Rows>) -> PyResult<Rows> {
    let ms = ssms.iter().map(|s| matrix(s)).collect::<Result<Vec<_>, _>>().map_err(py_err)?;
    Ok(ssm::average_ssms(&ms).map_err(py_err)?.to_rows())
}

/// Returns `(normalized_cost, path)` for the isometry-blind alignment.
#[pyfunction]
fn ibdtw_align(a: Rows, b: Rows) -> PyResult<(f64, Vec<(usize, usize)>)> {
    let (_, warp) = ibdtw::ibdtw_align(&matrix(&a).map_err(py_err)?, &matrix(&b).map_err(py_err)?);
    Ok((warp.normalized_cost, warp.pairs))
}

#[pyfunction]
fn ibdtw_distance(a: Rows, b: Rows) -> PyResult<f64> {
    Ok(ibdtw::ibdtw_distance(&matrix(&a).map_err(py_err)?, &matrix(&b).map_err(py_err)?))
}

/// 0-dimensional persistence of an image given as rows.
#[pyfunction]
#[pyo3(signature = (image, filtration="sublevel"))]
fn image_persistence(image: Rows, filtration: &str) -> PyResult<Pairs> {
    let rows = image.len();
    let cols = image.first().map_or(0, Vec::len);
    if image.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("image rows differ in length"));
    }
    let flat: Vec<f64> = image.concat();
    let f = self::filtration(filtration).map_err(py_err)?;
    Ok(pairs_of(&tda::grid_persistence(rows, cols, &flat, f).map_err(py_err)?))
}

/// Sublevel and superlevel diagrams of an SSM after smoothing.
#[pyfunction]
#[pyo3(signature = (ssm, sigma=3.0))]
fn ssm_diagrams(ssm: Rows, sigma: f64) -> PyResult<(Pairs, Pairs)> {
    let d = tda::ssm_diagrams(&matrix(&ssm).map_err(py_err)?, sigma).map_err(py_err)?;
    Ok((pairs_of(&d.sublevel), pairs_of(&d.superlevel)))
}

/// Wasserstein distance of order `p`; `p = inf` gives the bottleneck distance.
#[pyfunction]
#[pyo3(signature = (d1, d2, p=2.0))]
fn wasserstein_distance(d1: Pairs, d2: Pairs, p: f64) -> PyResult<f64> {
    tda::wasserstein_distance(&diagram(&d1, Filtration::Sublevel), &diagram(&d2, Filtration::Sublevel), p).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (a, b, p=2.0))]
fn tda_distance(a: Rows, b: Rows, p: f64) -> PyResult<f64> {
    tda::tda_ssm_distance(&matrix(&a).map_err(py_err)?, &matrix(&b).map_err(py_err)?, p).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (points, target_dim, k=None))]
fn isomap_embed(points: Rows, target_dim: usize, k: Option<usize>) -> PyResult<Rows> {
    let c = cloud(&points, None).map_err(py_err)?;
    let k = k.unwrap_or_else(|| default_neighbors(c.len()));
    Ok(cloud_rows(&manifold::isomap_embed(&c, target_dim, k).map_err(py_err)?))
}

#[pyfunction]
fn pca_project(points: Rows, target_dim: usize) -> PyResult<Rows> {
    Ok(cloud_rows(&manifold::pca_project(&cloud(&points, None).map_err(py_err)?, target_dim).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (n=200))]
fn trefoil_knot(n: usize) -> PyResult<Rows> {
    Ok(cloud_rows(&manifold::trefoil_knot(n).map_err(py_err)?))
}

/// Returns `(timestamps, positions)` of a simulated vehicle.
#[pyfunction]
#[pyo3(signature = (motion_class, seed=0, duration=40.0, sample_rate=5.0))]
fn generate_trajectory(motion_class: &str, seed: u64, duration: f64, sample_rate: f64) -> PyResult<(Vec<f64>, Vec<[f64; 2]>)> {
    let class: MotionClass = motion_class.parse().map_err(py_err)?;
    let t = scene::generate_trajectory(class, duration, sample_rate, seed).map_err(py_err)?;
    Ok((t.timestamps, t.positions))
}

/// Received frequencies at `receiver` for a trajectory.
#[pyfunction]
#[pyo3(signature = (timestamps, positions, receiver, carrier=DEFAULT_CARRIER, apply_delay=true))]
fn simulate_doppler(
    timestamps: Vec<f64>,
    positions: Vec<[f64; 2]>,
    receiver: [f64; 2],
    carrier: f64,
    apply_delay: bool,
) -> PyResult<Vec<f64>> {
    if timestamps.len() != positions.len() {
        return Err(PyValueError::new_err("timestamps and positions differ in length"));
    }
    let traj = Trajectory {
        positions,
        timestamps,
        motion_class: MotionClass::Straight,
    };
    let rx = Receiver::new("rx", receiver).map_err(py_err)?;
    Ok(rf::simulate_doppler(&traj, &rx, carrier, apply_delay).map_err(py_err)?.frequencies)
}

/// Runs the retrieval experiment and returns `(mean_psnr, [(method, map)])`.
#[pyfunction]
#[pyo3(signature = (draws_per_action=20, master_seed=0, resize=Some(100), methods=None))]
fn run_experiment(
    py: Python<'_>,
    draws_per_action: usize,
    master_seed: u64,
    resize: Option<usize>,
    methods: Option<Vec<String>>,
) -> PyResult<(f64, Vec<(String, f64)>)> {
    let methods = match methods {
        Some(m) => m.iter().map(|s| s.parse::<MethodConfig>()).collect::<Result<_, _>>().map_err(py_err)?,
        None => MethodConfig::all(),
    };
    let config = ExperimentConfig {
        draws_per_action,
        master_seed,
        resize,
        methods,
        ..Default::default()
    };
    let exp = py.detach(|| run_core_experiment(&config)).map_err(py_err)?;
    let maps = summarize(&exp.records).map_err(py_err)?;
    Ok((exp.mean_psnr(), maps.into_iter().map(|s| (s.method.label(), s.map)).collect()))
}

#[pymodule]
fn ssmx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(build_ssm, m)?)?;
    m.add_function(wrap_pyfunction!(znorm_ssm, m)?)?;
    m.add_function(wrap_pyfunction!(histogram_match, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_smooth, m)?)?;
    m.add_function(wrap_pyfunction!(resize_ssm, m)?)?;
    m.add_function(wrap_pyfunction!(average_ssms, m)?)?;
    m.add_function(wrap_pyfunction!(ibdtw_align, m)?)?;
    m.add_function(wrap_pyfunction!(ibdtw_distance, m)?)?;
    m.add_function(wrap_pyfunction!(image_persistence, m)?)?;
    m.add_function(wrap_pyfunction!(ssm_diagrams, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein_distance, m)?)?;
    m.add_function(wrap_pyfunction!(tda_distance, m)?)?;
    m.add_function(wrap_pyfunction!(isomap_embed, m)?)?;
    m.add_function(wrap_pyfunction!(pca_project, m)?)?;
    m.add_function(wrap_pyfunction!(trefoil_knot, m)?)?;
    m.add_function(wrap_pyfunction!(generate_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_doppler, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_survive_the_conversions() {
        let pts = vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![6.0, 8.0]];
        let s = build_ssm(pts.clone(), None).unwrap();
        assert_eq!(s, vec![vec![0.0, 5.0, 10.0], vec![5.0, 0.0, 5.0], vec![10.0, 5.0, 0.0]]);
        assert_eq!(cloud_rows(&cloud(&pts, None).unwrap()), pts);
        assert!(matrix(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn diagrams_keep_their_points() {
        let pairs = vec![(0.0, 2.0, false), (-1.0, 5.0, true)];
        let d = diagram(&pairs, Filtration::Sublevel);
        assert_eq!(pairs_of(&d), vec![(0.0, 2.0, false), (-1.0, 5.0, true)]);
        assert_eq!(image_persistence(vec![vec![0.0, 1.0], vec![1.0, 0.0]], "sublevel").unwrap(), vec![(0.0, 1.0, true)]);
        let lone = vec![(-1.0, 5.0, true)];
        assert!((wasserstein_distance(pairs, lone, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alignment_of_identical_inputs_is_free() {
        let s = build_ssm(vec![vec![0.0], vec![1.0], vec![4.0], vec![2.0]], None).unwrap();
        let (cost, path) = ibdtw_align(s.clone(), s.clone()).unwrap();
        assert_eq!(cost, 0.0);
        assert_eq!(path, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(tda_distance(s.clone(), s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn bad_names_are_reported() {
        assert!(filtration("sideways").is_err());
        assert!("Bicycle".parse::<MotionClass>().is_err());
        let (t, p) = generate_trajectory("UTurn", 1, 40.0, 5.0).unwrap();
        assert_eq!(simulate_doppler(t, p, [4000.0, 0.0], DEFAULT_CARRIER, true).unwrap().len(), 200);
    }
}
