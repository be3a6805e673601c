//! File outputs: CSV tables and metadata, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use olfw_core::trace::fmt_f64;

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "T",
    "seed",
    "algorithm",
    "cumulative_utility",
    "regret",
    "violation",
    "positive_violation",
];

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A CSV table built in memory.
#[derive(Debug, Clone)]
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            text: format!("{}\n", columns.join(",")),
            width: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        write_atomic(path, self.text.as_bytes())
    }
}

pub fn num(v: f64) -> String {
    fmt_f64(v)
}

/// Writes pretty-printed JSON.
pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_and_atomic_write() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&["1".into(), num(0.5)]);
        assert_eq!(t.as_str().lines().count(), 2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.csv");
        t.write(&p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), t.as_str());
        assert!(!dir.path().join("sub/x.csv.tmp").exists());
    }
}
