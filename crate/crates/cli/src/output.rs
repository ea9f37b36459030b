use std::path::{Path, PathBuf};

use gibbsgap_core::report::{render, ReportHeader};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Writes `<command>.toml` and `<command>_<name>.csv` into one directory.
pub struct Output {
    dir: PathBuf,
    command: String,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, command: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        Ok(Output { dir: dir.to_path_buf(), command: command.into(), written: Vec::new() })
    }

    fn write(&mut self, name: String, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, contents: &str) -> Result<()> {
        self.write(format!("{}_{name}.csv", self.command), contents)
    }

    pub fn report<T: Serialize>(&mut self, header: &ReportHeader, body: &T) -> Result<String> {
        let text = render(header, body)?;
        self.write(format!("{}.toml", self.command), &text)?;
        Ok(text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// CSV with a header row; numbers use Rust's shortest round-trip form.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}
