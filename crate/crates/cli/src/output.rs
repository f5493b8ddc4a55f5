use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Output directory for one run. Each file starts with the resolved config.
pub struct OutputDir {
    root: PathBuf,
    comments: Vec<String>,
    config_json: serde_json::Value,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(config: &ExperimentConfig, command: &str) -> Result<Self, CliError> {
        let root = config.output_dir.clone();
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(root.display(), e))?;
        let config_json = serde_json::to_value(config).expect("config is serializable");
        Ok(Self {
            root,
            comments: vec![
                format!("sqkd {} {command}", env!("CARGO_PKG_VERSION")),
                format!("seed: {}", config.seed),
                format!("config: {config_json}"),
            ],
            config_json,
            written: Vec::new(),
        })
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes `name` with `body`, mapping failures to I/O errors.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>, &[String]) -> Result<(), CliError>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
        let mut w = BufWriter::new(file);
        body(&mut w, &self.comments)?;
        w.flush().map_err(|e| CliError::io(path.display(), e))?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `{"config": ..., key: value}` as pretty JSON.
    pub fn write_json<T: Serialize>(&mut self, name: &str, key: &str, value: &T) -> Result<(), CliError> {
        let mut doc = serde_json::Map::new();
        doc.insert("config".into(), self.config_json.clone());
        doc.insert(key.into(), serde_json::to_value(value).map_err(|e| CliError::Model(e.to_string()))?);
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("json value");
        self.write(name, |w, _| {
            writeln!(w, "{text}").map_err(|e| CliError::io(name, e))
        })
    }
}

/// Writes comment lines, a header and rows.
pub fn write_table<W: Write>(
    w: &mut W,
    comments: &[String],
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let io = |e| CliError::io("csv", e);
    for c in comments {
        writeln!(w, "# {c}").map_err(io)?;
    }
    writeln!(w, "{}", columns.join(",")).map_err(io)?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}
