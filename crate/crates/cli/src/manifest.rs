use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Provenance record written next to every output file as `<output>.manifest`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    /// Fully resolved configuration, `key = value` lines.
    pub config: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            ..Default::default()
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "tool_version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "argv = {}", self.argv.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        for p in &self.inputs {
            let _ = writeln!(s, "input = {}", p.display());
        }
        for p in &self.outputs {
            let _ = writeln!(s, "output = {}", p.display());
        }
        if !self.config.is_empty() {
            s.push_str("# resolved configuration\n");
            s.push_str(&self.config);
        }
        s
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_os_string();
        name.push(".manifest");
        PathBuf::from(name)
    }

    /// Written beside the first output.
    pub fn write(&self) -> std::io::Result<PathBuf> {
        let first = self.outputs.first().expect("manifest needs an output");
        let path = Self::path_for(first);
        std::fs::write(&path, self.to_text())?;
        Ok(path)
    }
}
