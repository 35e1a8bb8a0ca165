use std::fs;
use std::path::{Path, PathBuf};

use super::config::ScenarioConfig;
use super::run::ScenarioResult;
use crate::error::{Error, Result};
use crate::model::{load_snapshot, Snapshot, Trajectory};

pub const SUMMARY_FILE: &str = "summary.json";
pub(crate) const CONFIG_FILE: &str = "config.toml";
pub(crate) const SNAPSHOT_DIR: &str = "snapshots";

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Replaces `dest` with the fully written `staging` directory.
pub(crate) fn publish_dir(staging: &Path, dest: &Path) -> Result<()> {
    if dest.exists() {
        fs::remove_dir_all(dest).map_err(|e| Error::io(dest, e))?;
    }
    fs::rename(staging, dest).map_err(|e| Error::io(dest, e))
}

pub fn load_result(dir: impl AsRef<Path>) -> Result<ScenarioResult> {
    let path = dir.as_ref().join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Config echo and saved snapshots of a result directory, in file-name
/// order.
pub fn load_trajectory_dir(dir: impl AsRef<Path>) -> Result<(ScenarioConfig, Trajectory)> {
    let dir = dir.as_ref();
    let config = ScenarioConfig::load(dir.join(CONFIG_FILE))?;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let mut files: Vec<PathBuf> = fs::read_dir(&snap_dir)
        .map_err(|e| Error::io(&snap_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bin"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Format(format!(
            "no snapshot files in {}",
            snap_dir.display()
        )));
    }
    let snapshots = files
        .iter()
        .map(|p| Snapshot::new(load_snapshot(p)?.state))
        .collect::<Result<Vec<_>>>()?;
    let traj = Trajectory {
        config: config.sim_config()?,
        snapshots,
        steps: 0,
    };
    Ok((config, traj))
}
