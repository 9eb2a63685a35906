use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// In-memory CSV table written with a leading `# ` metadata line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses column `name` of every row as `f64`.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(idx) = self.column(name) else { return Vec::new() };
        self.rows.iter().filter_map(|r| r[idx].parse().ok()).collect()
    }

    pub fn write(&self, path: &Path, metadata: &str) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut file = fs::File::create(path)?;
        writeln!(file, "# {}", metadata.replace('\n', " "))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip formatting, so reruns are byte-identical.
pub(crate) fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Files produced by one experiment run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    pub(crate) fn save(&mut self, dir: &Path, name: &str, table: &CsvTable, metadata: &str) -> Result<()> {
        let path = dir.join(name);
        table.write(&path, metadata)?;
        self.files.push(path);
        Ok(())
    }

    pub(crate) fn save_text(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }
}
