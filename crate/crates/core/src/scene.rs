//! Canonical vehicle trajectories, random rigid motions, and speed profiles.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ssm::TimeOrderedPointCloud;

pub const DEFAULT_DURATION: f64 = 40.0;
pub const DEFAULT_SAMPLE_RATE: f64 = 5.0;

/// Speeds above this would exceed the PSNR reference speed.
pub const MAX_SPEED: f64 = 50.0;

/// Bound on the seeded per-step relative speed jitter.
const SPEED_JITTER: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotionClass {
    Straight,
    TakeExit,
    UTurn,
}

impl MotionClass {
    pub const ALL: [MotionClass; 3] = [MotionClass::Straight, MotionClass::TakeExit, MotionClass::UTurn];

    pub fn name(self) -> &'static str {
        match self {
            MotionClass::Straight => "Straight",
            MotionClass::TakeExit => "TakeExit",
            MotionClass::UTurn => "UTurn",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Nominal speed (m/s) at normalized time `tau` in `[0, 1]`.
    fn nominal_speed(self, tau: f64) -> f64 {
        match self {
            MotionClass::Straight => 20.0,
            MotionClass::TakeExit => 20.0 + (8.0 - 20.0) * cosine_ramp(tau, 0.35, 0.65),
            MotionClass::UTurn => {
                15.0 + (2.0 - 15.0) * (cosine_ramp(tau, 0.3, 0.5) - cosine_ramp(tau, 0.5, 0.7))
            }
        }
    }

    /// Heading (radians) at normalized time `tau`.
    fn heading(self, tau: f64) -> f64 {
        match self {
            MotionClass::Straight => 0.0,
            MotionClass::TakeExit => {
                // lane change to the right, then the exit ramp bends away
                let lane = if (0.1..0.3).contains(&tau) {
                    -0.07 * (TAU * (tau - 0.1) / 0.2).sin()
                } else {
                    0.0
                };
                lane - 25f64.to_radians() * cosine_ramp(tau, 0.35, 0.65)
            }
            MotionClass::UTurn => PI * cosine_ramp(tau, 0.42, 0.58),
        }
    }
}

impl fmt::Display for MotionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "straight" => Ok(MotionClass::Straight),
            "takeexit" | "exit" => Ok(MotionClass::TakeExit),
            "uturn" => Ok(MotionClass::UTurn),
            _ => Err(Error::UnknownClass(s.to_string())),
        }
    }
}

/// 0 before `start`, 1 after `end`, half-cosine in between.
fn cosine_ramp(tau: f64, start: f64, end: f64) -> f64 {
    if tau <= start {
        0.0
    } else if tau >= end {
        1.0
    } else {
        0.5 - 0.5 * (PI * (tau - start) / (end - start)).cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<[f64; 2]>,
    pub timestamps: Vec<f64>,
    pub motion_class: MotionClass,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Finite-difference velocity vectors (central inside, one-sided at the ends).
    pub fn velocities(&self) -> Vec<[f64; 2]> {
        let p = &self.positions;
        let t = &self.timestamps;
        let n = p.len();
        (0..n)
            .map(|i| {
                let (a, b) = match i {
                    0 => (0, 1),
                    i if i == n - 1 => (n - 2, n - 1),
                    i => (i - 1, i + 1),
                };
                let dt = t[b] - t[a];
                [(p[b][0] - p[a][0]) / dt, (p[b][1] - p[a][1]) / dt]
            })
            .collect()
    }
}

/// Generates one trajectory of the given class, centered on the origin.
///
/// The seed drives an independent per-step speed jitter of at most 0.2%, so
/// even the constant-speed class has a non-degenerate speed SSM.
pub fn generate_trajectory(
    motion_class: MotionClass,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<Trajectory> {
    if !(duration > 0.0) || !(sample_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "duration ({duration}) and sample rate ({sample_rate}) must be positive"
        )));
    }
    let n = (duration * sample_rate).round() as usize;
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let dt = 1.0 / sample_rate;
    let timestamps: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = timestamps[n - 1].max(dt);
    let mut positions = Vec::with_capacity(n);
    let mut pos = [0.0, 0.0];
    positions.push(pos);
    for i in 1..n {
        let tm = 0.5 * (timestamps[i - 1] + timestamps[i]);
        let jitter = SPEED_JITTER * rng.random_range(-1.0..1.0);
        let v = motion_class.nominal_speed(tm / span) * (1.0 + jitter);
        let h = motion_class.heading(tm / span);
        pos = [pos[0] + v * dt * h.cos(), pos[1] + v * dt * h.sin()];
        positions.push(pos);
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &positions {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    for p in &mut positions {
        p[0] -= center[0];
        p[1] -= center[1];
    }

    Ok(Trajectory {
        positions,
        timestamps,
        motion_class,
    })
}

/// Reflection (across the x axis), then rotation, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: f64,
    pub translation: [f64; 2],
    pub reflect: bool,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: 0.0,
        translation: [0.0, 0.0],
        reflect: false,
    };

    pub fn new(rotation: f64, translation: [f64; 2], reflect: bool) -> Result<Self> {
        if !(0.0..TAU).contains(&rotation) {
            return Err(Error::InvalidArgument(format!(
                "rotation {rotation} outside [0, 2pi)"
            )));
        }
        Ok(Self {
            rotation,
            translation,
            reflect,
        })
    }

    /// Uniform rotation, translation uniform in `[-half_extent, half_extent]^2`,
    /// fair-coin reflection.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, half_extent: f64) -> Self {
        Self {
            rotation: rng.random_range(0.0..TAU),
            translation: [
                rng.random_range(-half_extent..=half_extent),
                rng.random_range(-half_extent..=half_extent),
            ],
            reflect: rng.random_bool(0.5),
        }
    }

    pub fn apply_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = if self.reflect { (p[0], -p[1]) } else { (p[0], p[1]) };
        let (s, c) = self.rotation.sin_cos();
        [
            c * x - s * y + self.translation[0],
            s * x + c * y + self.translation[1],
        ]
    }
}

pub fn apply_rigid_transform(traj: &Trajectory, xf: &RigidTransform) -> Trajectory {
    Trajectory {
        positions: traj.positions.iter().map(|&p| xf.apply_point(p)).collect(),
        timestamps: traj.timestamps.clone(),
        motion_class: traj.motion_class,
    }
}

/// Magnitude of the finite-difference velocity, as a 1-D point cloud.
pub fn speed_profile(traj: &Trajectory) -> Result<TimeOrderedPointCloud> {
    let speeds = traj
        .velocities()
        .into_iter()
        .map(|v| v[0].hypot(v[1]))
        .collect();
    TimeOrderedPointCloud::from_series(speeds, traj.timestamps.clone())
}
