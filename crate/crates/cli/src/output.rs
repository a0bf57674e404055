//! Where CSV and SVG output goes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::UsageError;

/// CSV to `<prefix>.csv` or stdout; SVG to `<prefix>.svg` when requested.
pub struct Sink {
    prefix: Option<PathBuf>,
    svg: bool,
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

impl Sink {
    pub fn new(prefix: Option<PathBuf>, svg: bool) -> Result<Self> {
        if svg && prefix.is_none() {
            return Err(UsageError("--svg needs --out PREFIX".into()).into());
        }
        Ok(Sink { prefix, svg })
    }

    /// True when CSV goes to a file, leaving stdout for summaries.
    pub fn to_file(&self) -> bool {
        self.prefix.is_some()
    }

    pub fn csv(&self, text: &str) -> Result<()> {
        match &self.prefix {
            Some(p) => {
                let path = with_ext(p, "csv");
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let mut out = std::io::stdout().lock();
                match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                    // A closed pipe (e.g. `| head`) is not an error.
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => Ok(r?),
                }
            }
        }
    }

    /// Writes `<prefix>.csv` only when an output prefix was given.
    pub fn csv_if_file(&self, text: &str) -> Result<()> {
        if self.to_file() {
            self.csv(text)?;
        }
        Ok(())
    }

    pub fn svg(&self, render: impl FnOnce() -> String) -> Result<()> {
        if let (true, Some(p)) = (self.svg, &self.prefix) {
            let path = with_ext(p, "svg");
            fs::write(&path, render()).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}
