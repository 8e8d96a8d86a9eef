//! Flags, config files and the effective run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use urbent_core::dbscan::Params;
use urbent_core::geo::BoundingBox;
use urbent_core::quality::DEFAULT_SAMPLE_CAP;
use urbent_core::refine::{MinPtsPolicy, RefinePolicy, DEFAULT_PARAMS};
use urbent_core::characterize::{DEFAULT_TOP_K, DEFAULT_TZ_OFFSET_MINUTES};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "urbent", version, about = "Discover and profile city entities from geotagged photos and POIs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster, refine and profile; writes entities.geojson, profiles.json,
    /// tree.json and summary.json.
    Mine(MineArgs),
    /// Generate photos.csv, pois.csv and ground_truth.csv from a TOML spec.
    Synth(SynthArgs),
    /// Parse inputs only and print the ingest report as JSON.
    Validate(ValidateArgs),
}

#[derive(Debug, Default, Args)]
pub struct MineArgs {
    /// Start from a config file: either a bare config or a previous
    /// summary.json. Flags given alongside override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub photos: Option<PathBuf>,
    #[arg(long)]
    pub pois: Option<PathBuf>,
    /// minLat,minLon,maxLat,maxLon
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<BoundingBox>,
    /// Depth-0 neighbourhood radius in meters.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Neighbours (self included) needed for a core point.
    #[arg(long)]
    pub min_pts: Option<usize>,
    #[arg(long)]
    pub eps_shrink: Option<f64>,
    #[arg(long)]
    pub max_fraction: Option<f64>,
    /// Meters.
    #[arg(long)]
    pub max_radius: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    /// Shrink min_pts with eps on re-clustering, never below this floor.
    #[arg(long)]
    pub scale_min_pts_floor: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub tz_offset_minutes: Option<i32>,
    /// Extra stop-word list; repeatable.
    #[arg(long = "stoplist")]
    pub stoplists: Vec<PathBuf>,
    #[arg(long)]
    pub sample_cap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Add per-stage wall-clock times to summary.json (makes it differ
    /// between otherwise identical runs).
    #[arg(long)]
    pub record_timings: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub photos: PathBuf,
    #[arg(long)]
    pub pois: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: BoundingBox,
}

/// Everything that determines a mining run's outputs. Echoed into
/// summary.json; feeding that file back via `--config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub photos: PathBuf,
    pub pois: Option<PathBuf>,
    pub bbox: BoundingBox,
    pub params: Params<f64>,
    pub policy: RefinePolicy,
    pub tz_offset_minutes: i32,
    pub stoplists: Vec<PathBuf>,
    pub top_k: usize,
    pub sample_cap: usize,
    pub seed: u64,
}

fn config_err(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

fn load_config_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    if let Some(echo) = value.get_mut("config") {
        value = echo.take();
    }
    serde_json::from_value(value).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over an optional config file, fills defaults and checks
    /// the result. Does not touch the output directory.
    pub fn resolve(args: &MineArgs) -> Result<Self, CliError> {
        let base = args.config.as_deref().map(load_config_file).transpose()?;
        let missing = |flag: &str| config_err(format!("--{flag} is required"));

        let photos = args.photos.clone().or(base.as_ref().map(|b| b.photos.clone())).ok_or_else(|| missing("photos"))?;
        let bbox = args.bbox.or(base.as_ref().map(|b| b.bbox)).ok_or_else(|| missing("bbox"))?;
        let seed = args.seed.or(base.as_ref().map(|b| b.seed)).ok_or_else(|| missing("seed"))?;
        let pois = args.pois.clone().or(base.as_ref().and_then(|b| b.pois.clone()));

        let params0 = base.as_ref().map_or(DEFAULT_PARAMS, |b| b.params);
        let params = Params {
            eps: args.eps.unwrap_or(params0.eps),
            min_pts: args.min_pts.unwrap_or(params0.min_pts),
        };
        let p0 = base.as_ref().map_or_else(RefinePolicy::default, |b| b.policy);
        let policy = RefinePolicy {
            max_fraction: args.max_fraction.unwrap_or(p0.max_fraction),
            max_radius: args.max_radius.unwrap_or(p0.max_radius),
            eps_shrink: args.eps_shrink.unwrap_or(p0.eps_shrink),
            min_pts_policy: args
                .scale_min_pts_floor
                .map_or(p0.min_pts_policy, |floor| MinPtsPolicy::Scale { floor }),
            max_depth: args.max_depth.unwrap_or(p0.max_depth),
            min_cluster_size: args.min_cluster_size.unwrap_or(p0.min_cluster_size),
        };
        let mut stoplists = base.as_ref().map_or_else(Vec::new, |b| b.stoplists.clone());
        stoplists.extend(args.stoplists.iter().cloned());

        let config = RunConfig {
            photos,
            pois,
            bbox,
            params,
            policy,
            tz_offset_minutes: args
                .tz_offset_minutes
                .or(base.as_ref().map(|b| b.tz_offset_minutes))
                .unwrap_or(DEFAULT_TZ_OFFSET_MINUTES),
            stoplists,
            top_k: args.top_k.or(base.as_ref().map(|b| b.top_k)).unwrap_or(DEFAULT_TOP_K),
            sample_cap: args
                .sample_cap
                .or(base.as_ref().map(|b| b.sample_cap))
                .unwrap_or(DEFAULT_SAMPLE_CAP),
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| config_err(e.to_string()))?;
        self.policy.validate(&self.params).map_err(|e| config_err(e.to_string()))?;
        if self.top_k == 0 {
            return Err(config_err("--top-k must be at least 1"));
        }
        if self.sample_cap == 0 {
            return Err(config_err("--sample-cap must be at least 1"));
        }
        if self.tz_offset_minutes.abs() >= 24 * 60 {
            return Err(config_err("--tz-offset-minutes must lie strictly within +-1440"));
        }
        let inputs = std::iter::once(&self.photos).chain(&self.pois).chain(&self.stoplists);
        for path in inputs {
            if !path.is_file() {
                return Err(config_err(format!("{} is not a readable file", path.display())));
            }
        }
        Ok(())
    }
}
