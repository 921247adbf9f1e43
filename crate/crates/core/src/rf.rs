//! Doppler-shifted received frequency at fixed receivers, receiver noise, and
//! multi-receiver joint embeddings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scene::Trajectory;
use crate::ssm::{population_std, TimeOrderedPointCloud};

/// Propagation speed (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
pub const DEFAULT_CARRIER: f64 = 2.0e9;
/// Speed of the head-on reference vehicle defining the PSNR peak (m/s).
pub const PSNR_REFERENCE_SPEED: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Receiver {
    pub id: String,
    pub position: [f64; 2],
}

impl Receiver {
    pub fn new(id: impl Into<String>, position: [f64; 2]) -> Result<Self> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("receiver position must be finite".into()));
        }
        Ok(Self {
            id: id.into(),
            position,
        })
    }
}

/// Four receivers at the corners of a square of the given side, centered on
/// the origin.
pub fn square_corners(side: f64) -> Vec<Receiver> {
    let h = side / 2.0;
    [[-h, -h], [h, -h], [h, h], [-h, h]]
        .into_iter()
        .enumerate()
        .map(|(i, p)| Receiver {
            id: format!("rx{i}"),
            position: p,
        })
        .collect()
}

/// Received frequency over the transmit time grid at one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerTrace {
    pub timestamps: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub receiver_id: String,
    pub carrier: f64,
}

impl DopplerTrace {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `f_recvd - carrier` per sample.
    pub fn shifts(&self) -> Vec<f64> {
        self.frequencies.iter().map(|f| f - self.carrier).collect()
    }

    pub fn max_abs_shift(&self) -> f64 {
        self.frequencies
            .iter()
            .map(|f| (f - self.carrier).abs())
            .fold(0.0, f64::max)
    }
}

/// Non-relativistic Doppler: `f = (1 - rdot / c) * carrier`, with `rdot` the
/// range rate (positive when receding).
///
/// With `apply_delay`, sample `i` arrives at `t_i + r(t_i) / c` and the trace
/// is linearly resampled back onto the transmit grid.
pub fn simulate_doppler(
    traj: &Trajectory,
    rx: &Receiver,
    carrier: f64,
    apply_delay: bool,
) -> Result<DopplerTrace> {
    if !(carrier > 0.0) {
        return Err(Error::InvalidArgument(format!("carrier must be > 0, got {carrier}")));
    }
    if traj.len() < 2 {
        return Err(Error::TooFewPoints(traj.len()));
    }
    let velocities = traj.velocities();
    let mut ranges = Vec::with_capacity(traj.len());
    let mut freqs = Vec::with_capacity(traj.len());
    for (p, v) in traj.positions.iter().zip(&velocities) {
        let rel = [p[0] - rx.position[0], p[1] - rx.position[1]];
        let r = rel[0].hypot(rel[1]);
        if r == 0.0 {
            return Err(Error::ThroughReceiver(rx.id.clone()));
        }
        let range_rate = (rel[0] * v[0] + rel[1] * v[1]) / r;
        ranges.push(r);
        freqs.push((1.0 - range_rate / SPEED_OF_LIGHT) * carrier);
    }

    let frequencies = if apply_delay {
        let arrivals: Vec<f64> = traj
            .timestamps
            .iter()
            .zip(&ranges)
            .map(|(t, r)| t + r / SPEED_OF_LIGHT)
            .collect();
        resample_linear(&arrivals, &freqs, &traj.timestamps)
    } else {
        freqs
    };

    Ok(DopplerTrace {
        timestamps: traj.timestamps.clone(),
        frequencies,
        receiver_id: rx.id.clone(),
        carrier,
    })
}

/// Piecewise-linear interpolation of `(xs, ys)` at `at`, clamped at both ends.
/// `xs` must be increasing.
fn resample_linear(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    let last = xs.len() - 1;
    at.iter()
        .map(|&t| {
            if t <= xs[0] {
                return ys[0];
            }
            if t >= xs[last] {
                return ys[last];
            }
            let k = xs.partition_point(|&x| x <= t);
            let (x0, x1) = (xs[k - 1], xs[k]);
            let w = (t - x0) / (x1 - x0);
            ys[k - 1] * (1.0 - w) + ys[k] * w
        })
        .collect()
}

/// Base against which the relative noise level is scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseScale {
    /// The largest `|shift|` of the trace being perturbed.
    PerTrace,
    /// The shift of a vehicle approaching head-on at `speed` m/s.
    Reference { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub relative_std: f64,
    pub seed: u64,
    pub scale: NoiseScale,
}

impl NoiseSpec {
    pub fn per_trace(relative_std: f64, seed: u64) -> Self {
        Self {
            relative_std,
            seed,
            scale: NoiseScale::PerTrace,
        }
    }
}

/// Adds i.i.d. Gaussian noise to the Doppler shift of a trace.
pub fn add_receiver_noise(trace: &DopplerTrace, spec: &NoiseSpec) -> Result<DopplerTrace> {
    if !(spec.relative_std >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "relative noise std must be >= 0, got {}",
            spec.relative_std
        )));
    }
    if spec.relative_std == 0.0 {
        return Ok(trace.clone());
    }
    let base = match spec.scale {
        NoiseScale::PerTrace => trace.max_abs_shift(),
        NoiseScale::Reference { speed } => trace.carrier * speed / SPEED_OF_LIGHT,
    };
    if !(base > 0.0) {
        return Err(Error::NoShift);
    }
    let normal = Normal::new(0.0, spec.relative_std * base)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frequencies = trace
        .frequencies
        .iter()
        .map(|f| f + normal.sample(&mut rng))
        .collect();
    Ok(DopplerTrace {
        frequencies,
        ..trace.clone()
    })
}

/// `10 log10(MAX^2 / MSE)` with `MAX` the shift of a head-on approach at
/// `reference_speed`. Returns `+inf` when the traces are identical.
pub fn compute_psnr(clean: &DopplerTrace, noisy: &DopplerTrace, reference_speed: f64) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(Error::SizeMismatch(clean.len(), noisy.len()));
    }
    if clean.carrier != noisy.carrier {
        return Err(Error::InvalidArgument("traces have different carriers".into()));
    }
    if clean.is_empty() {
        return Err(Error::TooFewPoints(0));
    }
    let peak = clean.carrier * reference_speed / SPEED_OF_LIGHT;
    let mse = clean
        .frequencies
        .iter()
        .zip(&noisy.frequencies)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / clean.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Shift series divided by its own population standard deviation.
pub fn normalized_shifts(trace: &DopplerTrace) -> Result<Vec<f64>> {
    let shifts = trace.shifts();
    let std = population_std(&shifts);
    if !(std > 0.0) {
        return Err(Error::DegenerateTrace(trace.receiver_id.clone()));
    }
    Ok(shifts.into_iter().map(|s| s / std).collect())
}

/// Stacks per-trace normalized shifts so that sample `i` becomes a point with
/// one coordinate per receiver, in the order given.
pub fn build_joint_topc(traces: &[DopplerTrace]) -> Result<TimeOrderedPointCloud> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one trace".into()))?;
    let n = first.len();
    let columns = traces
        .iter()
        .map(|t| {
            if t.len() != n {
                return Err(Error::SizeMismatch(n, t.len()));
            }
            normalized_shifts(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = columns.len();
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        coords.extend(columns.iter().map(|c| c[i]));
    }
    TimeOrderedPointCloud::from_flat(d, coords, first.timestamps.clone())
}
