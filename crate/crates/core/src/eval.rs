//! Cross-modal retrieval experiment: noise-free speed-profile SSMs are used as
//! queries against SSMs built from simulated multi-receiver Doppler draws, and
//! the rankings are scored with precision-recall curves and MAP.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ibdtw::ibdtw_distance;
use crate::manifold::{default_neighbors, isomap_embed};
use crate::rf::{
    add_receiver_noise, build_joint_topc, compute_psnr, simulate_doppler, square_corners, DopplerTrace, NoiseScale,
    NoiseSpec, Receiver, DEFAULT_CARRIER, PSNR_REFERENCE_SPEED,
};
use crate::scene::{
    apply_rigid_transform, generate_trajectory, speed_profile, MotionClass, RigidTransform, Trajectory,
    DEFAULT_DURATION, DEFAULT_SAMPLE_RATE,
};
use crate::ssm::{average_ssms, build_ssm, histogram_match, resize_ssm, znorm_ssm, SelfSimilarityMatrix};
use crate::tda::{diagrams_distance, ssm_diagrams, SsmDiagrams, DEFAULT_SMOOTHING_SIGMA, DEFAULT_WASSERSTEIN_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fusion {
    /// Each receiver on its own.
    Ind,
    /// Mean of the per-receiver SSMs.
    IndAvg,
    /// SSM of the stacked multi-receiver embedding.
    Joint,
    /// SSM of the 1-D ISOMAP of the joint embedding.
    Isomap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Normalization {
    Std,
    HistMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Ibdtw,
    Tda,
}

impl Fusion {
    pub const ALL: [Fusion; 4] = [Fusion::Ind, Fusion::IndAvg, Fusion::Joint, Fusion::Isomap];
    pub fn name(self) -> &'static str {
        match self {
            Fusion::Ind => "Ind",
            Fusion::IndAvg => "IndAvg",
            Fusion::Joint => "Joint",
            Fusion::Isomap => "Isomap",
        }
    }
}

impl Normalization {
    pub const ALL: [Normalization; 2] = [Normalization::Std, Normalization::HistMatch];
    pub fn name(self) -> &'static str {
        match self {
            Normalization::Std => "Std",
            Normalization::HistMatch => "HistMatch",
        }
    }
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Ibdtw, Metric::Tda];
    pub fn name(self) -> &'static str {
        match self {
            Metric::Ibdtw => "IBDTW",
            Metric::Tda => "TDA",
        }
    }
}

macro_rules! name_parsing {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                <$ty>::ALL
                    .into_iter()
                    .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown {} {s:?}", stringify!($ty))))
            }
        }
    };
}

name_parsing!(Fusion);
name_parsing!(Normalization);
name_parsing!(Metric);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodConfig {
    pub fusion: Fusion,
    pub normalization: Normalization,
    pub metric: Metric,
}

impl MethodConfig {
    pub fn new(fusion: Fusion, normalization: Normalization, metric: Metric) -> Self {
        Self {
            fusion,
            normalization,
            metric,
        }
    }

    /// All 16 combinations, metric-major.
    pub fn all() -> Vec<MethodConfig> {
        let mut out = Vec::with_capacity(16);
        for metric in Metric::ALL {
            for normalization in Normalization::ALL {
                for fusion in Fusion::ALL {
                    out.push(Self::new(fusion, normalization, metric));
                }
            }
        }
        out
    }

    /// `Fusion-Norm-Metric`, e.g. `Joint-Std-IBDTW`.
    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.fusion, self.normalization, self.metric)
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MethodConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!("method {s:?} is not Fusion-Norm-Metric")));
        }
        Ok(Self::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
    }
}

/// Which side was remapped when histogram matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistDirection {
    /// The measured SSM was matched to the template's histogram.
    MeasuredToTemplate,
    /// The template was matched to the measured SSM's histogram.
    TemplateToMeasured,
}

impl HistDirection {
    pub fn name(self) -> &'static str {
        match self {
            HistDirection::MeasuredToTemplate => "measured_to_template",
            HistDirection::TemplateToMeasured => "template_to_measured",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub method: MethodConfig,
    pub query_class: MotionClass,
    pub target_class: MotionClass,
    pub draw_id: usize,
    /// Lower is more similar.
    pub score: f64,
    /// Kept direction for single-SSM histogram-matched comparisons.
    pub hist_direction: Option<HistDirection>,
}

/// One receiver's contribution to an `Ind` record.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverRecord {
    pub method: MethodConfig,
    pub receiver_id: String,
    pub query_class: MotionClass,
    pub target_class: MotionClass,
    pub draw_id: usize,
    pub score: f64,
    pub hist_direction: Option<HistDirection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub draws_per_action: usize,
    pub receivers: Vec<Receiver>,
    pub carrier: f64,
    pub noise_relative_std: f64,
    pub noise_scale: NoiseScale,
    pub apply_delay: bool,
    pub duration: f64,
    pub sample_rate: f64,
    /// Half-width of the square from which random translations are drawn.
    pub translation_half_extent: f64,
    /// Common SSM side before comparison; `None` keeps the native size.
    pub resize: Option<usize>,
    /// ISOMAP neighbor count; `None` uses [`default_neighbors`].
    pub isomap_k: Option<usize>,
    pub wasserstein_p: f64,
    pub hist_bins: usize,
    pub smoothing_sigma: f64,
    pub methods: Vec<MethodConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            draws_per_action: 100,
            receivers: square_corners(4000.0),
            carrier: DEFAULT_CARRIER,
            noise_relative_std: 0.03,
            noise_scale: NoiseScale::PerTrace,
            apply_delay: true,
            duration: DEFAULT_DURATION,
            sample_rate: DEFAULT_SAMPLE_RATE,
            translation_half_extent: 1000.0,
            resize: Some(100),
            isomap_k: None,
            wasserstein_p: DEFAULT_WASSERSTEIN_ORDER,
            hist_bins: 64,
            smoothing_sigma: DEFAULT_SMOOTHING_SIGMA,
            methods: MethodConfig::all(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.draws_per_action == 0 {
            return bad("draws_per_action must be positive".into());
        }
        if self.receivers.is_empty() {
            return bad("at least one receiver is required".into());
        }
        if !(self.carrier > 0.0) {
            return bad(format!("carrier must be positive, got {}", self.carrier));
        }
        if !(self.noise_relative_std >= 0.0) {
            return bad(format!("noise must be >= 0, got {}", self.noise_relative_std));
        }
        if !(self.duration > 0.0 && self.sample_rate > 0.0) {
            return bad("duration and sample_rate must be positive".into());
        }
        if matches!(self.resize, Some(l) if l < 2) {
            return bad("resize must be >= 2".into());
        }
        if matches!(self.isomap_k, Some(0)) {
            return bad("isomap_k must be positive".into());
        }
        if !(self.wasserstein_p >= 1.0) {
            return bad(format!("wasserstein_p must be >= 1, got {}", self.wasserstein_p));
        }
        if self.hist_bins < 2 {
            return bad("hist_bins must be >= 2".into());
        }
        if !(self.smoothing_sigma > 0.0) {
            return bad("smoothing_sigma must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("method list is empty".into());
        }
        Ok(())
    }
}

/// SplitMix64 mixing of a master seed with a path of tags.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(master), |acc, &t| mix(acc ^ mix(t)))
}

const TAG_TEMPLATE: u64 = 0;
const TAG_TRAJECTORY: u64 = 1;
const TAG_TRANSFORM: u64 = 2;
const TAG_NOISE: u64 = 3;

/// One simulated measurement run.
#[derive(Debug, Clone)]
pub struct Draw {
    pub action: MotionClass,
    pub draw_id: usize,
    pub transform: RigidTransform,
    pub trajectory: Trajectory,
    pub clean: Vec<DopplerTrace>,
    pub noisy: Vec<DopplerTrace>,
}

impl Draw {
    /// PSNR of each noisy receiver trace against its clean version.
    pub fn psnr(&self) -> Result<Vec<f64>> {
        self.clean
            .iter()
            .zip(&self.noisy)
            .map(|(c, n)| compute_psnr(c, n, PSNR_REFERENCE_SPEED))
            .collect()
    }
}

pub fn simulate_draw(config: &ExperimentConfig, action: MotionClass, draw_id: usize) -> Result<Draw> {
    let (a, k) = (action.index() as u64, draw_id as u64);
    let base = generate_trajectory(
        action,
        config.duration,
        config.sample_rate,
        derive_seed(config.master_seed, &[TAG_TRAJECTORY, a, k]),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, &[TAG_TRANSFORM, a, k]));
    let transform = RigidTransform::random(&mut rng, config.translation_half_extent);
    let trajectory = apply_rigid_transform(&base, &transform);
    let mut clean = Vec::with_capacity(config.receivers.len());
    let mut noisy = Vec::with_capacity(config.receivers.len());
    for (r, rx) in config.receivers.iter().enumerate() {
        let trace = simulate_doppler(&trajectory, rx, config.carrier, config.apply_delay)?;
        let spec = NoiseSpec {
            relative_std: config.noise_relative_std,
            seed: derive_seed(config.master_seed, &[TAG_NOISE, a, k, r as u64]),
            scale: config.noise_scale,
        };
        noisy.push(add_receiver_noise(&trace, &spec)?);
        clean.push(trace);
    }
    Ok(Draw {
        action,
        draw_id,
        transform,
        trajectory,
        clean,
        noisy,
    })
}

/// SSMs of one draw under every fusion scheme, at the comparison size.
#[derive(Debug, Clone)]
pub struct DrawSsms {
    pub ind: Vec<SelfSimilarityMatrix>,
    pub ind_avg: SelfSimilarityMatrix,
    pub joint: SelfSimilarityMatrix,
    pub isomap: SelfSimilarityMatrix,
}

fn maybe_resize(ssm: SelfSimilarityMatrix, size: Option<usize>) -> Result<SelfSimilarityMatrix> {
    match size {
        Some(l) => resize_ssm(&ssm, l),
        None => Ok(ssm),
    }
}

pub fn draw_ssms(config: &ExperimentConfig, traces: &[DopplerTrace]) -> Result<DrawSsms> {
    let ind_native = traces
        .iter()
        .map(|t| build_joint_topc(std::slice::from_ref(t)).map(|c| build_ssm(&c)))
        .collect::<Result<Vec<_>>>()?;
    let ind_avg = average_ssms(&ind_native)?;
    let joint_topc = build_joint_topc(traces)?;
    let joint = build_ssm(&joint_topc);
    let k = config.isomap_k.unwrap_or_else(|| default_neighbors(joint_topc.len()));
    let isomap = build_ssm(&isomap_embed(&joint_topc, 1, k)?);
    Ok(DrawSsms {
        ind: ind_native
            .into_iter()
            .map(|s| maybe_resize(s, config.resize))
            .collect::<Result<_>>()?,
        ind_avg: maybe_resize(ind_avg, config.resize)?,
        joint: maybe_resize(joint, config.resize)?,
        isomap: maybe_resize(isomap, config.resize)?,
    })
}

/// Noise-free speed-profile SSM of each class, indexed by [`MotionClass::index`].
pub fn template_ssms(config: &ExperimentConfig) -> Result<Vec<SelfSimilarityMatrix>> {
    MotionClass::ALL
        .iter()
        .map(|&c| {
            let seed = derive_seed(config.master_seed, &[TAG_TEMPLATE, c.index() as u64]);
            let traj = generate_trajectory(c, config.duration, config.sample_rate, seed)?;
            maybe_resize(build_ssm(&speed_profile(&traj)?), config.resize)
        })
        .collect()
}

/// An SSM with the derived data reused across comparisons.
struct Prepared {
    raw: SelfSimilarityMatrix,
    std: SelfSimilarityMatrix,
    std_diagrams: Option<SsmDiagrams>,
}

impl Prepared {
    fn new(raw: SelfSimilarityMatrix, with_diagrams: bool, sigma: f64) -> Result<Self> {
        let std = znorm_ssm(&raw)?;
        let std_diagrams = if with_diagrams { Some(ssm_diagrams(&std, sigma)?) } else { None };
        Ok(Self { raw, std, std_diagrams })
    }
}

struct Scorer<'a> {
    config: &'a ExperimentConfig,
}

impl Scorer<'_> {
    fn metric(&self, metric: Metric, a: &SelfSimilarityMatrix, b: &SelfSimilarityMatrix) -> Result<f64> {
        match metric {
            Metric::Ibdtw => Ok(ibdtw_distance(a, b)),
            Metric::Tda => diagrams_distance(
                &ssm_diagrams(a, self.config.smoothing_sigma)?,
                &ssm_diagrams(b, self.config.smoothing_sigma)?,
                self.config.wasserstein_p,
            ),
        }
    }

    fn score(
        &self,
        method: MethodConfig,
        template: &Prepared,
        measured: &Prepared,
    ) -> Result<(f64, Option<HistDirection>)> {
        match method.normalization {
            Normalization::Std => {
                let s = match (method.metric, &template.std_diagrams, &measured.std_diagrams) {
                    (Metric::Tda, Some(a), Some(b)) => diagrams_distance(a, b, self.config.wasserstein_p)?,
                    _ => self.metric(method.metric, &template.std, &measured.std)?,
                };
                Ok((s, None))
            }
            Normalization::HistMatch => {
                let bins = self.config.hist_bins;
                let fwd = histogram_match(&measured.raw, &template.raw, bins)?;
                let a = self.metric(method.metric, &template.raw, &fwd.ssm)?;
                let back = histogram_match(&template.raw, &measured.raw, bins)?;
                let b = self.metric(method.metric, &back.ssm, &measured.raw)?;
                Ok(if b < a {
                    (b, Some(HistDirection::TemplateToMeasured))
                } else {
                    (a, Some(HistDirection::MeasuredToTemplate))
                })
            }
        }
    }
}

struct PreparedDraw {
    action: MotionClass,
    draw_id: usize,
    ind: Vec<Prepared>,
    ind_avg: Prepared,
    joint: Prepared,
    isomap: Prepared,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<ComparisonRecord>,
    pub receiver_records: Vec<ReceiverRecord>,
    /// PSNR of every (draw, receiver) trace, in draw order.
    pub psnr: Vec<f64>,
}

impl Experiment {
    /// Mean of the finite PSNR values.
    pub fn mean_psnr(&self) -> f64 {
        let finite: Vec<f64> = self.psnr.iter().copied().filter(|v| v.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len().max(1) as f64
    }
}

/// Runs the full retrieval experiment on the current rayon pool.
///
/// Records are ordered by method (as configured), query class, target class
/// and draw, independent of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let sigma = config.smoothing_sigma;
    let want_diagrams = config.methods.iter().any(|m| m.metric == Metric::Tda);

    let templates = template_ssms(config)?
        .into_iter()
        .map(|s| Prepared::new(s, want_diagrams, sigma))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.context("speed templates"))?;

    let draw_keys: Vec<(MotionClass, usize)> = MotionClass::ALL
        .iter()
        .flat_map(|&a| (0..config.draws_per_action).map(move |k| (a, k)))
        .collect();

    let simulated: Vec<(PreparedDraw, Vec<f64>)> = draw_keys
        .par_iter()
        .map(|&(action, k)| {
            let ctx = || format!("action {action}, draw {k}");
            let draw = simulate_draw(config, action, k).map_err(|e| e.context(ctx()))?;
            let psnr = draw.psnr()?;
            let ssms = draw_ssms(config, &draw.noisy).map_err(|e| e.context(ctx()))?;
            let prep = |s| Prepared::new(s, want_diagrams, sigma).map_err(|e| e.context(ctx()));
            let prepared = PreparedDraw {
                action,
                draw_id: k,
                ind: ssms.ind.into_iter().map(prep).collect::<Result<_>>()?,
                ind_avg: prep(ssms.ind_avg)?,
                joint: prep(ssms.joint)?,
                isomap: prep(ssms.isomap)?,
            };
            Ok((prepared, psnr))
        })
        .collect::<Result<_>>()?;
    let psnr = simulated.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let draws: Vec<PreparedDraw> = simulated.into_iter().map(|(d, _)| d).collect();

    let n_draws = draws.len();
    let jobs: Vec<(MethodConfig, MotionClass, usize)> = config
        .methods
        .iter()
        .flat_map(|&m| MotionClass::ALL.iter().flat_map(move |&q| (0..n_draws).map(move |d| (m, q, d))))
        .collect();

    let scorer = Scorer { config };
    let results: Vec<(ComparisonRecord, Vec<ReceiverRecord>)> = jobs
        .par_iter()
        .map(|&(method, query, d)| {
            let draw = &draws[d];
            let template = &templates[query.index()];
            let ctx = || format!("{method}, query {query}, action {}, draw {}", draw.action, draw.draw_id);
            let (score, hist_direction, per_rx) = match method.fusion {
                Fusion::Ind => {
                    let mut per_rx = Vec::with_capacity(draw.ind.len());
                    for (r, ssm) in draw.ind.iter().enumerate() {
                        let (s, dir) = scorer.score(method, template, ssm).map_err(|e| e.context(ctx()))?;
                        per_rx.push(ReceiverRecord {
                            method,
                            receiver_id: config.receivers[r].id.clone(),
                            query_class: query,
                            target_class: draw.action,
                            draw_id: draw.draw_id,
                            score: s,
                            hist_direction: dir,
                        });
                    }
                    let mean = per_rx.iter().map(|r| r.score).sum::<f64>() / per_rx.len() as f64;
                    (mean, None, per_rx)
                }
                fusion => {
                    let ssm = match fusion {
                        Fusion::IndAvg => &draw.ind_avg,
                        Fusion::Joint => &draw.joint,
                        _ => &draw.isomap,
                    };
                    let (s, dir) = scorer.score(method, template, ssm).map_err(|e| e.context(ctx()))?;
                    (s, dir, Vec::new())
                }
            };
            if !score.is_finite() || score < 0.0 {
                return Err(Error::InvalidArgument(format!("score {score} is not finite and nonnegative")).context(ctx()));
            }
            Ok((
                ComparisonRecord {
                    method,
                    query_class: query,
                    target_class: draw.action,
                    draw_id: draw.draw_id,
                    score,
                    hist_direction,
                },
                per_rx,
            ))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(results.len());
    let mut receiver_records = Vec::new();
    for (rec, per_rx) in results {
        records.push(rec);
        receiver_records.extend(per_rx);
    }
    Ok(Experiment {
        records,
        receiver_records,
        psnr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub average_precision: f64,
}

impl PrCurve {
    /// Curve for a ranked list of relevance flags (best first).
    pub fn from_ranking(relevant: &[bool]) -> Result<Self> {
        let total_relevant = relevant.iter().filter(|&&r| r).count();
        if total_relevant == 0 || total_relevant == relevant.len() {
            return Err(Error::InvalidArgument(
                "need at least one relevant and one irrelevant item".into(),
            ));
        }
        let mut hits = 0usize;
        let mut recall = Vec::with_capacity(relevant.len());
        let mut precision = Vec::with_capacity(relevant.len());
        let mut ap = 0.0;
        for (rank, &rel) in relevant.iter().enumerate() {
            if rel {
                hits += 1;
            }
            let p = hits as f64 / (rank + 1) as f64;
            if rel {
                ap += p;
            }
            recall.push(hits as f64 / total_relevant as f64);
            precision.push(p);
        }
        Ok(Self {
            recall,
            precision,
            average_precision: ap / total_relevant as f64,
        })
    }
}

/// Ranks records of one query ascending by score (ties by draw, then target
/// class) and evaluates precision and recall at every rank.
pub fn precision_recall_curve(records: &[&ComparisonRecord]) -> Result<PrCurve> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no records".into()))?;
    if records.iter().any(|r| r.query_class != first.query_class) {
        return Err(Error::InvalidArgument("records span several query classes".into()));
    }
    let mut ranked: Vec<&&ComparisonRecord> = records.iter().collect();
    ranked.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then(a.draw_id.cmp(&b.draw_id))
            .then(a.target_class.cmp(&b.target_class))
    });
    let flags: Vec<bool> = ranked.iter().map(|r| r.target_class == r.query_class).collect();
    PrCurve::from_ranking(&flags)
}

pub fn mean_average_precision(curves: &[PrCurve]) -> Result<f64> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("no curves".into()));
    }
    Ok(curves.iter().map(|c| c.average_precision).sum::<f64>() / curves.len() as f64)
}

#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: MethodConfig,
    pub curves: Vec<(MotionClass, PrCurve)>,
    pub map: f64,
}

/// Per-query PR curves and MAP for each method, in first-seen method order.
pub fn summarize(records: &[ComparisonRecord]) -> Result<Vec<MethodSummary>> {
    let mut methods: Vec<MethodConfig> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let curves = MotionClass::ALL
                .iter()
                .filter_map(|&q| {
                    let subset: Vec<&ComparisonRecord> =
                        records.iter().filter(|r| r.method == method && r.query_class == q).collect();
                    (!subset.is_empty()).then(|| precision_recall_curve(&subset).map(|c| (q, c)))
                })
                .collect::<Result<Vec<_>>>()?;
            let map = mean_average_precision(&curves.iter().map(|(_, c)| c.clone()).collect::<Vec<_>>())?;
            Ok(MethodSummary { method, curves, map })
        })
        .collect()
}

pub const RECORDS_HEADER: &str = "method,fusion,norm,metric,query_class,target_class,draw,score";

pub fn write_records_csv<W: Write>(mut w: W, records: &[ComparisonRecord]) -> Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.method, r.method.fusion, r.method.normalization, r.method.metric, r.query_class, r.target_class, r.draw_id, r.score
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_receiver_records_csv<W: Write>(mut w: W, records: &[ReceiverRecord]) -> Result<()> {
    writeln!(w, "method,receiver,query_class,target_class,draw,score,hist_direction")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.method,
            r.receiver_id,
            r.query_class,
            r.target_class,
            r.draw_id,
            r.score,
            r.hist_direction.map_or("", HistDirection::name)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_hist_directions_csv<W: Write>(mut w: W, records: &[ComparisonRecord]) -> Result<()> {
    writeln!(w, "method,query_class,target_class,draw,direction")?;
    for r in records {
        if let Some(d) = r.hist_direction {
            writeln!(w, "{},{},{},{},{}", r.method, r.query_class, r.target_class, r.draw_id, d.name())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_pr_csv<W: Write>(mut w: W, summaries: &[MethodSummary]) -> Result<()> {
    writeln!(w, "method,query_class,recall,precision")?;
    for s in summaries {
        for (q, c) in &s.curves {
            for (r, p) in c.recall.iter().zip(&c.precision) {
                writeln!(w, "{},{},{},{}", s.method, q, r, p)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_map_csv<W: Write>(mut w: W, summaries: &[MethodSummary]) -> Result<()> {
    writeln!(w, "method,map")?;
    for s in summaries {
        writeln!(w, "{},{}", s.method, s.map)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `records.csv`, `records_ind_receivers.csv`,
/// `histmatch_directions.csv`, `pr.csv` and `map.csv` into `dir`.
pub fn write_experiment(dir: &Path, experiment: &Experiment) -> Result<Vec<MethodSummary>> {
    use std::fs::File;
    use std::io::BufWriter;
    let summaries = summarize(&experiment.records)?;
    let open = |name: &str| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(dir.join(name))?)) };
    write_records_csv(open("records.csv")?, &experiment.records)?;
    write_receiver_records_csv(open("records_ind_receivers.csv")?, &experiment.receiver_records)?;
    write_hist_directions_csv(open("histmatch_directions.csv")?, &experiment.records)?;
    write_pr_csv(open("pr.csv")?, &summaries)?;
    write_map_csv(open("map.csv")?, &summaries)?;
    Ok(summaries)
}
