use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Files written by one command. Unless [`Outputs::commit`] is called they
/// are removed again when the guard drops, so a failed command leaves no
/// partial results behind.
pub struct Outputs {
    files: Vec<PathBuf>,
    created_dir: Option<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn new() -> Self {
        Self { files: Vec::new(), created_dir: None, committed: false }
    }

    /// Creates `dir` if needed.
    pub fn in_dir(dir: &Path) -> anyhow::Result<Self> {
        let mut out = Self::new();
        if !dir.exists() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            out.created_dir = Some(dir.to_path_buf());
        } else if !dir.is_dir() {
            anyhow::bail!("{} is not a directory", dir.display());
        }
        Ok(out)
    }

    /// Registers `path` before it is written.
    pub fn track(&mut self, path: PathBuf) -> PathBuf {
        self.files.push(path.clone());
        path
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if let Some(d) = &self.created_dir {
            let _ = fs::remove_dir(d);
        }
    }
}
