use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use mtv_core::maskio::{RemoteConfig, RetryPolicy};
use mtv_core::trajvideo::{ArmId, TrajVideoSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Context};

/// Run configuration file. Every field is optional; command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub views: Option<usize>,
    pub bins: Option<usize>,
    pub format: Option<String>,
    /// Scene template file for `synth-scene`.
    pub template: Option<PathBuf>,
    pub n_episodes: Option<usize>,
    /// Episode tree read by `synth-traj`.
    pub episode_root: Option<PathBuf>,
    /// Explicit `synth-traj` inputs: DH chain per arm, joints file, calibs and
    /// optional initial-frame masks, one per view.
    pub chains: BTreeMap<ArmId, PathBuf>,
    pub joints: Option<PathBuf>,
    pub calibs: Vec<PathBuf>,
    pub masks: Vec<PathBuf>,
    pub pred: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    /// Trail overrides; missing keys keep their defaults.
    pub trail: Option<TrajVideoSpec>,
    pub remote: Option<RemoteSettings>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteSettings {
    pub vlm_url: Option<String>,
    pub rvos_url: Option<String>,
    pub prompt: Option<String>,
    pub attempts: Option<u32>,
    pub backoff_ms: Option<u64>,
    pub timeout_s: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).input_err(format!("config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text).input_err(format!("config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks the fields that can be checked without knowing the subcommand.
    pub fn validate(&self) -> CliResult<()> {
        if self.jobs == Some(0) {
            return Err(CliError::input("config field `jobs` must be at least 1"));
        }
        if self.views == Some(0) {
            return Err(CliError::input("config field `views` must be at least 1"));
        }
        let mut files: Vec<(String, &PathBuf)> = Vec::new();
        files.extend(self.template.iter().map(|p| ("template".to_string(), p)));
        files.extend(self.episode_root.iter().map(|p| ("episode_root".to_string(), p)));
        files.extend(self.joints.iter().map(|p| ("joints".to_string(), p)));
        files.extend(self.pred.iter().map(|p| ("pred".to_string(), p)));
        files.extend(self.gt.iter().map(|p| ("gt".to_string(), p)));
        files.extend(self.chains.iter().map(|(arm, p)| (format!("chains.{arm}"), p)));
        files.extend(self.calibs.iter().enumerate().map(|(i, p)| (format!("calibs[{i}]"), p)));
        files.extend(self.masks.iter().enumerate().map(|(i, p)| (format!("masks[{i}]"), p)));
        for (field, path) in files {
            if !path.exists() {
                return Err(CliError::input(format!(
                    "config field `{field}`: {} does not exist",
                    path.display()
                )));
            }
        }
        if let Some(trail) = &self.trail {
            trail.validate().input_err("config field `trail`")?;
        }
        Ok(())
    }

    /// Remote endpoints: environment variables first, then the config file.
    pub fn remote_config(&self) -> RemoteConfig {
        let mut cfg = RemoteConfig::from_env();
        if let Some(r) = &self.remote {
            if cfg.vlm_url.is_none() {
                cfg.vlm_url = r.vlm_url.clone();
            }
            if cfg.rvos_url.is_none() {
                cfg.rvos_url = r.rvos_url.clone();
            }
            cfg.prompt = r.prompt.clone();
            cfg.retry = RetryPolicy {
                attempts: r.attempts.unwrap_or(cfg.retry.attempts),
                initial_backoff: r.backoff_ms.map(Duration::from_millis).unwrap_or(cfg.retry.initial_backoff),
            };
            cfg.timeout = r.timeout_s.map(Duration::from_secs);
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn missing_paths_name_their_field() {
        let c = RunConfig {
            calibs: vec![std::env::temp_dir(), PathBuf::from("/nonexistent/calib.json")],
            ..RunConfig::default()
        };
        let err = c.validate().unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.to_string().contains("`calibs[1]`"), "{err}");
    }

    #[test]
    fn bad_trail_is_rejected() {
        let c: RunConfig = serde_json::from_str(r#"{"trail": {"trail_length": 0}}"#).unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("trail"));
    }
}
