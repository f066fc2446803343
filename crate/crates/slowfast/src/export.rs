//! Deterministic report rendering and atomic file output.
//!
//! Files are written whole via a temp file + rename, so a report is either
//! fully present or absent. Float formatting uses Rust's shortest round-trip
//! representation, which is deterministic across runs and platforms.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Write `bytes` to `path` atomically (temp file in the same directory, then
/// rename over the target).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Plain-text key/value summary builder (`key = value` lines, section headers
/// in brackets).
#[derive(Debug, Default)]
pub struct Summary {
    lines: Vec<String>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        if !self.lines.is_empty() {
            self.lines.push(String::new());
        }
        self.lines.push(format!("[{name}]"));
        self
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn kv_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, fmt_f64(value))
    }

    pub fn raw(&mut self, line: impl Into<String>) -> &mut Self {
        self.lines.push(line.into());
        self
    }

    pub fn render(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// Minimal CSV builder; fields here never contain commas or quotes.
#[derive(Debug, Default)]
pub struct Csv {
    rows: Vec<String>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            rows: vec![header.join(",")],
        }
    }

    pub fn row(&mut self, fields: &[String]) -> &mut Self {
        self.rows.push(fields.join(","));
        self
    }

    pub fn render(&self) -> String {
        let mut s = self.rows.join("\n");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_roundtrip() {
        let dir = std::env::temp_dir().join(format!("slowfast-test-{}", std::process::id()));
        let path = dir.join("out.txt");
        atomic_write(&path, b"hello\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"hello\n");
        atomic_write(&path, b"replaced\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"replaced\n");
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn float_formatting_roundtrips() {
        for &x in &[0.1, 1e-12, 123456.789, 2.0 / 3.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn summary_layout() {
        let mut s = Summary::new();
        s.section("run").kv("seed", 42).kv_f64("t", 1.5);
        assert_eq!(s.render(), "[run]\nseed = 42\nt = 1.5\n");
    }
}
