mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::{ConfigOrData, Overrides, RunConfig};
use ssmx_core::eval::{draw_ssms, run_experiment, simulate_draw, template_ssms, write_experiment, ExperimentConfig};
use ssmx_core::ibdtw::ibdtw_align;
use ssmx_core::io::{
    read_ssm, write_cswm_binary, write_diagram_csv, write_path_csv, write_receivers_csv, write_ssm_binary, write_ssm_csv,
    write_topc_csv, write_trace_csv, write_trajectory_csv,
};
use ssmx_core::manifold::{default_neighbors, isomap_embed, pca_project, trefoil_knot};
use ssmx_core::scene::MotionClass;
use ssmx_core::ssm::{build_ssm, histogram_match, znorm_ssm, SelfSimilarityMatrix};
use ssmx_core::tda::{diagrams_distance, ssm_diagrams, DEFAULT_SMOOTHING_SIGMA};

#[derive(Parser)]
#[command(name = "ssmx", version, about = "Compare speed profiles and Doppler traces through self-similarity matrices")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and clean and noisy receiver traces
    Simulate,
    /// Write every SSM variant of every draw plus the speed templates
    Ssm {
        #[arg(long, value_enum, default_value_t = SsmFormat::Csv)]
        format: SsmFormat,
    },
    /// Score one pair of SSM files with both metrics
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Norm::Std)]
        norm: Norm,
    },
    /// Run the retrieval experiment and write records, PR curves and MAP
    Evaluate,
    /// ISOMAP of a trefoil knot
    DemoTrefoil {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SsmFormat {
    Csv,
    Bin,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Norm {
    /// Divide each SSM by its standard deviation
    Std,
    /// Map the second SSM's histogram onto the first's
    Histmatch,
    None,
}

/// Failures sorted by exit status.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<ssmx_core::Error> for Failure {
    fn from(e: ssmx_core::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn data<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Data)
}

impl From<ConfigOrData> for Failure {
    fn from(e: ConfigOrData) -> Self {
        match e {
            ConfigOrData::Config(e) => Failure::Config(e),
            ConfigOrData::Data(e) => Failure::Data(e),
        }
    }
}

fn out_dir(run: &RunConfig, sub: &str) -> Result<PathBuf> {
    let dir = run.output_dir.join(sub);
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn draw_name(action: MotionClass, k: usize) -> String {
    format!("{action}_{k:03}")
}

fn simulate(run: &RunConfig, config: &ExperimentConfig) -> Result<(), Failure> {
    let dir = out_dir(run, "simulate")?;
    write_receivers_csv(&dir.join("receivers.csv"), &config.receivers)?;
    for action in MotionClass::ALL {
        for k in 0..config.draws_per_action {
            let draw = simulate_draw(config, action, k)?;
            let name = draw_name(action, k);
            write_trajectory_csv(&dir.join(format!("{name}_trajectory.csv")), &draw.trajectory)?;
            for (clean, noisy) in draw.clean.iter().zip(&draw.noisy) {
                write_trace_csv(&dir.join(format!("{name}_{}_clean.csv", clean.receiver_id)), clean)?;
                write_trace_csv(&dir.join(format!("{name}_{}.csv", noisy.receiver_id)), noisy)?;
            }
        }
    }
    println!("wrote {} draws to {}", 3 * config.draws_per_action, dir.display());
    Ok(())
}

fn write_ssm(dir: &Path, stem: &str, ssm: &SelfSimilarityMatrix, format: SsmFormat) -> Result<()> {
    match format {
        SsmFormat::Csv => write_ssm_csv(&dir.join(format!("{stem}.csv")), ssm)?,
        SsmFormat::Bin => write_ssm_binary(&dir.join(format!("{stem}.bin")), ssm)?,
    }
    Ok(())
}

fn ssms(run: &RunConfig, config: &ExperimentConfig, format: SsmFormat) -> Result<(), Failure> {
    let dir = out_dir(run, "ssm")?;
    for (class, t) in MotionClass::ALL.iter().zip(template_ssms(config)?) {
        write_ssm(&dir, &format!("template_{class}"), &t, format)?;
    }
    for action in MotionClass::ALL {
        for k in 0..config.draws_per_action {
            let draw = simulate_draw(config, action, k)?;
            let s = draw_ssms(config, &draw.noisy)?;
            let name = draw_name(action, k);
            for (rx, m) in config.receivers.iter().zip(&s.ind) {
                write_ssm(&dir, &format!("{name}_ind_{}", rx.id), m, format)?;
            }
            write_ssm(&dir, &format!("{name}_indavg"), &s.ind_avg, format)?;
            write_ssm(&dir, &format!("{name}_joint"), &s.joint, format)?;
            write_ssm(&dir, &format!("{name}_isomap"), &s.isomap, format)?;
        }
    }
    println!("wrote SSMs to {}", dir.display());
    Ok(())
}

fn compare(run: &RunConfig, a: &Path, b: &Path, norm: Norm) -> Result<(), Failure> {
    let load = |p: &Path| read_ssm(p).map_err(anyhow::Error::from);
    let (a, b) = (data(load(a))?, data(load(b))?);
    let (a, b) = match norm {
        Norm::Std => (data(znorm_ssm(&a).context("first SSM"))?, data(znorm_ssm(&b).context("second SSM"))?),
        Norm::Histmatch => {
            let matched = histogram_match(&b, &a, run.hist_bins).context("histogram matching")?;
            (a, matched.ssm)
        }
        Norm::None => (a, b),
    };
    let (cswm, path) = ibdtw_align(&a, &b);
    let da = ssm_diagrams(&a, DEFAULT_SMOOTHING_SIGMA)?;
    let db = ssm_diagrams(&b, DEFAULT_SMOOTHING_SIGMA)?;
    let tda = diagrams_distance(&da, &db, run.wasserstein_p)?;

    let dir = out_dir(run, "compare")?;
    write_path_csv(&dir.join("path.csv"), &path)?;
    write_cswm_binary(&dir.join("cswm.bin"), &cswm)?;
    for (tag, d) in [("a", &da), ("b", &db)] {
        write_diagram_csv(&dir.join(format!("diagram_{tag}_sublevel.csv")), &d.sublevel)?;
        write_diagram_csv(&dir.join(format!("diagram_{tag}_superlevel.csv")), &d.superlevel)?;
    }
    println!("ibdtw {}", path.normalized_cost);
    println!("tda {tda}");
    Ok(())
}

fn evaluate(run: &RunConfig, config: &ExperimentConfig) -> Result<(), Failure> {
    let exp = run_experiment(config)?;
    let dir = out_dir(run, "evaluate")?;
    let summaries = write_experiment(&dir, &exp)?;
    for s in &summaries {
        println!("{:<24} MAP {:.4}", s.method.label(), s.map);
    }
    println!("mean pSNR {:.2} dB", exp.mean_psnr());
    println!("wrote results to {}", dir.display());
    Ok(())
}

fn demo_trefoil(run: &RunConfig, samples: usize) -> Result<(), Failure> {
    if samples < 8 {
        return Err(Failure::Config(anyhow::anyhow!("--samples must be at least 8")));
    }
    let knot = trefoil_knot(samples)?;
    let k = run.isomap_k.unwrap_or_else(|| default_neighbors(samples));
    let iso = isomap_embed(&knot, 2, k)?;
    let pca = pca_project(&knot, 2)?;
    let dir = out_dir(run, "trefoil")?;
    write_topc_csv(&dir.join("knot.csv"), &knot)?;
    write_topc_csv(&dir.join("isomap.csv"), &iso)?;
    write_topc_csv(&dir.join("pca.csv"), &pca)?;
    write_ssm_csv(&dir.join("knot_ssm.csv"), &build_ssm(&knot))?;
    write_ssm_csv(&dir.join("isomap_ssm.csv"), &build_ssm(&iso))?;
    println!("trefoil: {samples} samples, k = {k}; wrote {}", dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let run = RunConfig::resolve(&cli.overrides)?;
    // resolve everything that can fail as a config error before writing
    let config = match cli.command {
        Command::Compare { .. } | Command::DemoTrefoil { .. } => None,
        _ => Some(run.experiment()?),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .context("cannot start worker pool")?;
    log::info!("{} worker thread(s)", pool.current_num_threads());
    pool.install(|| match cli.command {
        Command::Simulate => simulate(&run, config.as_ref().unwrap()),
        Command::Ssm { format } => ssms(&run, config.as_ref().unwrap(), format),
        Command::Compare { a, b, norm } => compare(&run, &a, &b, norm),
        Command::Evaluate => evaluate(&run, config.as_ref().unwrap()),
        Command::DemoTrefoil { samples } => demo_trefoil(&run, samples),
    })?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("data error: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
