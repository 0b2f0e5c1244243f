//! `mtv`: trajectory-video synthesis and mask-matching evaluation pipelines.
//!
//! Exit codes: 0 success, 1 check failure, 2 input or configuration error,
//! 3 render/runtime error.

pub mod commands;
pub mod config;
pub mod error;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mtv_core::evalcore::{display_percent, ReportFormat};
use mtv_core::trajvideo::ArmId;

use crate::commands::{
    cmd_eval, cmd_fk, cmd_latent_check, cmd_project, cmd_report, cmd_synth_scene, cmd_synth_traj, json_output,
    EvalOptions, PredTree, TrajInputs, TrajSource,
};
use crate::config::RunConfig;
pub use crate::error::{CliError, CliResult, ExitKind};
use crate::error::Context;

#[derive(Debug, Parser)]
#[command(name = "mtv", version, about = "Trajectory-video control signals and mask-matching evaluation")]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// End-effector positions for a joint trajectory.
    Fk(FkArgs),
    /// Pixel coordinates of world points in one view.
    Project(ProjectArgs),
    /// Render per-view trajectory videos.
    SynthTraj(SynthTrajArgs),
    /// Generate synthetic episodes with analytic ground truth.
    SynthScene(SynthSceneArgs),
    /// Score predicted masks against ground truth.
    Eval(EvalArgs),
    /// Rebuild reports and rankings from a score dump.
    Report(ReportArgs),
    /// Latent token-grid bookkeeping round trip.
    LatentCheck(LatentCheckArgs),
}

#[derive(Debug, Args)]
pub struct FkArgs {
    #[arg(long)]
    pub chain: PathBuf,
    /// JSON list of joint vectors, or a single joint vector.
    #[arg(long)]
    pub joints: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub calib: PathBuf,
    /// JSON list of `[x, y, z]` world points.
    #[arg(long)]
    pub points: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthTrajArgs {
    /// Episode tree to render (in place unless --out is given).
    #[arg(long)]
    pub episodes: Option<PathBuf>,
    /// DH chain per arm, as `left=chain.json`.
    #[arg(long = "chain", value_parser = parse_chain)]
    pub chains: Vec<(ArmId, PathBuf)>,
    #[arg(long)]
    pub joints: Option<PathBuf>,
    /// Calibration per view, in view order.
    #[arg(long = "calib")]
    pub calibs: Vec<PathBuf>,
    /// Initial-frame mask per view, in view order.
    #[arg(long = "mask")]
    pub masks: Vec<PathBuf>,
}

fn parse_chain(s: &str) -> Result<(ArmId, PathBuf), String> {
    let (arm, path) = s.split_once('=').ok_or("expected <arm>=<file>")?;
    Ok((arm.parse::<ArmId>().map_err(|e| e.to_string())?, PathBuf::from(path)))
}

#[derive(Debug, Args)]
pub struct SynthSceneArgs {
    /// Template file holding one template or a list.
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long = "episodes", short = 'n')]
    pub n_episodes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a prediction tree with every mask shifted by (dx, dy).
    #[arg(long)]
    pub pred_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub shift_dx: i64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub shift_dy: i64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    /// Rollout-progress bins for the progress curve.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub views: Option<usize>,
    /// Segment RGB frames with the remote VLM/RVOS backends.
    #[arg(long)]
    pub remote: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LatentCheckArgs {
    #[arg(long)]
    pub views: usize,
    #[arg(long)]
    pub frames: usize,
    #[arg(long, hide = true)]
    pub inject_corruption: bool,
}

fn format_of(flag: Option<&str>, config: &RunConfig) -> CliResult<ReportFormat> {
    flag.or(config.format.as_deref())
        .unwrap_or("md")
        .parse()
        .input_err("--format")
}

fn required<'a>(value: Option<&'a Path>, name: &str) -> CliResult<&'a Path> {
    value.ok_or_else(|| CliError::input(format!("missing {name}")))
}

fn emit(text: Option<String>) {
    if let Some(t) = text {
        println!("{t}");
    }
}

/// Runs a parsed command line inside a worker pool of the requested size.
pub fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let jobs = cli.jobs.or(config.jobs);
    if jobs == Some(0) {
        return Err(CliError::input("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .runtime_err("thread pool")?;
    pool.install(|| dispatch(&cli, &config))
}

fn dispatch(cli: &Cli, config: &RunConfig) -> CliResult<()> {
    let out = cli.out.as_deref().or(config.out.as_deref());
    match &cli.command {
        Command::Fk(a) => {
            let positions = cmd_fk(&a.chain, &a.joints)?;
            emit(json_output(&positions, out)?);
        }
        Command::Project(a) => {
            let pixels = cmd_project(&a.calib, &a.points)?;
            emit(json_output(&pixels, out)?);
        }
        Command::SynthTraj(a) => {
            let trail = config.trail.clone().unwrap_or_default();
            let source = match a.episodes.as_deref().or(config.episode_root.as_deref()) {
                Some(root) => TrajSource::Episodes(root.to_path_buf()),
                None => {
                    let chains = if a.chains.is_empty() {
                        config.chains.clone()
                    } else {
                        a.chains.iter().cloned().collect()
                    };
                    let joints = a
                        .joints
                        .clone()
                        .or_else(|| config.joints.clone())
                        .ok_or_else(|| CliError::input("missing --episodes or --joints"))?;
                    let pick = |flag: &Vec<PathBuf>, cfg: &Vec<PathBuf>| {
                        if flag.is_empty() {
                            cfg.clone()
                        } else {
                            flag.clone()
                        }
                    };
                    TrajSource::Explicit(TrajInputs {
                        chains,
                        joints,
                        calibs: pick(&a.calibs, &config.calibs),
                        masks: pick(&a.masks, &config.masks),
                    })
                }
            };
            for o in cmd_synth_traj(&source, out, &trail)? {
                let prefix = o.episode.map(|e| format!("{e} ")).unwrap_or_default();
                println!("{prefix}{}: {} frames -> {}", o.view, o.frames, o.dir.display());
            }
        }
        Command::SynthScene(a) => {
            let n = a.n_episodes.or(config.n_episodes).unwrap_or(1);
            let template = a.template.as_deref().or(config.template.as_deref());
            let seed = a.seed.or(config.seed);
            let out = required(out, "--out")?;
            let pred = a.pred_out.as_ref().map(|root| PredTree {
                root: root.clone(),
                dx: a.shift_dx,
                dy: a.shift_dy,
            });
            let manifests = cmd_synth_scene(template, n, seed, out, pred.as_ref())?;
            for m in &manifests {
                println!(
                    "{} task {} ({}) {}",
                    m.episode_id,
                    m.task_id,
                    m.task_label,
                    if m.success { "success" } else { "failure" }
                );
            }
        }
        Command::Eval(a) => {
            let opts = EvalOptions {
                pred: required(a.pred.as_deref().or(config.pred.as_deref()), "--pred")?.to_path_buf(),
                gt: required(a.gt.as_deref().or(config.gt.as_deref()), "--gt")?.to_path_buf(),
                out: required(out, "--out")?.to_path_buf(),
                format: format_of(a.format.as_deref(), config)?,
                bins: a.bins.or(config.bins),
                views: a.views.or(config.views),
                remote: a.remote.then(|| config.remote_config()),
            };
            let result = cmd_eval(&opts)?;
            for view in result.report.views() {
                if let Some(j) = result.report.overall(&view) {
                    println!("{view} overall {}", display_percent(j));
                }
            }
        }
        Command::Report(a) => {
            let out = required(out, "--out")?;
            let (report, _) = cmd_report(&a.scores, out, format_of(a.format.as_deref(), config)?, a.bins.or(config.bins))?;
            for view in report.views() {
                if let Some(j) = report.overall(&view) {
                    println!("{view} overall {}", display_percent(j));
                }
            }
        }
        Command::LatentCheck(a) => {
            let report = cmd_latent_check(a.views, a.frames, a.inject_corruption)?;
            if report.passed() {
                println!("PASS latent round trip V={} T={}", a.views, a.frames);
            } else {
                println!("FAIL latent round trip V={} T={}", a.views, a.frames);
                return Err(CliError::check(report.detail.unwrap_or_else(|| "round trip failed".into())));
            }
        }
    }
    Ok(())
}

