//! Deterministic JSON and CSV emission. Identical configurations must give
//! byte-identical artifacts, so everything is serialized in fixed field
//! order and floats are printed in a fixed format.

use std::fs;
use std::path::PathBuf;

use cantilever_core::error::{Error, Result};

pub struct Emitter {
    dir: PathBuf,
    json: bool,
    csv: bool,
    digits: usize,
    pub written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &str, json: bool, csv: bool, digits: usize) -> Result<Self> {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            json,
            csv,
            digits: digits.clamp(1, 17),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if !self.json {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Config(format!("serialize: {e}")))?;
        text.push('\n');
        self.write(&format!("{name}.json"), &text)?;
        Ok(())
    }

    /// One decimal float cell with the configured number of significant
    /// digits (scientific notation round-trips exactly at 17).
    pub fn cell(&self, x: f64) -> String {
        format!("{:.*e}", self.digits.saturating_sub(1), x)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        if !self.csv {
            return Ok(());
        }
        let mut text = String::new();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&x| self.cell(x)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.write(&format!("{name}.csv"), &text)?;
        Ok(())
    }
}
