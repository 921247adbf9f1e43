//! JSON run configuration with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use ssmx_core::eval::{ExperimentConfig, MethodConfig};
use ssmx_core::io::read_receivers_csv;
use ssmx_core::rf::{square_corners, NoiseScale, DEFAULT_CARRIER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub draws_per_action: usize,
    /// Side of the square whose corners hold the receivers.
    pub receiver_side: f64,
    /// CSV of `id,x,y` rows; replaces the square layout when set.
    pub receivers_file: Option<PathBuf>,
    pub carrier: f64,
    pub noise: f64,
    /// Comparison SSM side; `null` keeps native sizes.
    pub resize: Option<usize>,
    pub isomap_k: Option<usize>,
    pub wasserstein_p: f64,
    pub hist_bins: usize,
    pub methods: Vec<String>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = ExperimentConfig::default();
        Self {
            master_seed: base.master_seed,
            draws_per_action: base.draws_per_action,
            receiver_side: 4000.0,
            receivers_file: None,
            carrier: DEFAULT_CARRIER,
            noise: base.noise_relative_std,
            resize: base.resize,
            isomap_k: base.isomap_k,
            wasserstein_p: base.wasserstein_p,
            hist_bins: base.hist_bins,
            methods: base.methods.iter().map(MethodConfig::label).collect(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Flags sharing the config field names. Set flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; fields left out take their defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "SSMX_SEED")]
    pub master_seed: Option<u64>,
    #[arg(long, global = true)]
    pub draws_per_action: Option<usize>,
    #[arg(long, global = true)]
    pub receiver_side: Option<f64>,
    #[arg(long, global = true)]
    pub receivers_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub carrier: Option<f64>,
    #[arg(long, global = true)]
    pub noise: Option<f64>,
    /// 0 keeps native sizes
    #[arg(long, global = true)]
    pub resize: Option<usize>,
    #[arg(long, global = true)]
    pub isomap_k: Option<usize>,
    /// A number >= 1, or `inf` for the bottleneck distance
    #[arg(long, global = true)]
    pub wasserstein_p: Option<f64>,
    #[arg(long, global = true)]
    pub hist_bins: Option<usize>,
    /// Comma-separated `Fusion-Norm-Metric` labels
    #[arg(long, global = true, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// An unreadable file is a data error, unparsable contents a config error.
    pub fn load(path: &Path) -> Result<Self, ConfigOrData> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(ConfigOrData::Data)?;
        Self::from_json(&text)
            .with_context(|| format!("malformed config {}", path.display()))
            .map_err(ConfigOrData::Config)
    }

    pub fn resolve(o: &Overrides) -> Result<Self, ConfigOrData> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = o.$f.clone() { c.$f = v; })*};
        }
        take!(master_seed, draws_per_action, receiver_side, carrier, noise, wasserstein_p, hist_bins, methods, output_dir);
        if let Some(r) = o.resize {
            c.resize = (r > 0).then_some(r);
        }
        if o.isomap_k.is_some() {
            c.isomap_k = o.isomap_k;
        }
        if o.receivers_file.is_some() {
            c.receivers_file = o.receivers_file.clone();
        }
        c.check().map_err(ConfigOrData::Config)?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if self.draws_per_action == 0 {
            bail!("draws_per_action must be positive");
        }
        for (name, v) in [("receiver_side", self.receiver_side), ("carrier", self.carrier), ("wasserstein_p", self.wasserstein_p)] {
            if !(v > 0.0) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if !(self.noise >= 0.0) {
            bail!("noise must be >= 0, got {}", self.noise);
        }
        if self.methods.is_empty() {
            bail!("method list is empty");
        }
        self.parsed_methods()?;
        Ok(())
    }

    fn parsed_methods(&self) -> Result<Vec<MethodConfig>> {
        self.methods
            .iter()
            .map(|m| m.parse::<MethodConfig>().with_context(|| format!("bad method {m:?}")))
            .collect()
    }

    /// Library configuration. Reading the receiver file is a data step, so
    /// its failure is reported separately from config validation.
    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigOrData> {
        let receivers = match &self.receivers_file {
            Some(p) => read_receivers_csv(p).map_err(|e| ConfigOrData::Data(anyhow::Error::new(e).context(format!("receivers file {}", p.display()))))?,
            None => square_corners(self.receiver_side),
        };
        let config = ExperimentConfig {
            master_seed: self.master_seed,
            draws_per_action: self.draws_per_action,
            receivers,
            carrier: self.carrier,
            noise_relative_std: self.noise,
            noise_scale: NoiseScale::PerTrace,
            resize: self.resize,
            isomap_k: self.isomap_k,
            wasserstein_p: self.wasserstein_p,
            hist_bins: self.hist_bins,
            methods: self.parsed_methods().map_err(ConfigOrData::Config)?,
            ..Default::default()
        };
        config.validate().map_err(|e| ConfigOrData::Config(e.into()))?;
        Ok(config)
    }
}

#[derive(Debug)]
pub enum ConfigOrData {
    Config(anyhow::Error),
    Data(anyhow::Error),
}
