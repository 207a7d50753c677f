//! Run manifests: what went in, what came out, and with which settings.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file
            .read(&mut buf)
            .with_context(|| format!("cannot read {}", path.display()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Collected while a command runs, written once its outputs exist.
/// Contains no timestamps, so equal runs give equal manifests.
pub struct Manifest {
    command: String,
    settings: Vec<(String, String)>,
    inputs: Vec<(String, PathBuf)>,
    outputs: Vec<(String, PathBuf)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            settings: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.push((key.to_string(), value.to_string()));
        self
    }

    pub fn input(&mut self, role: &str, path: &Path) -> &mut Self {
        self.inputs.push((role.to_string(), path.to_path_buf()));
        self
    }

    pub fn output(&mut self, role: &str, path: &Path) -> &mut Self {
        self.outputs.push((role.to_string(), path.to_path_buf()));
        self
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tool = mimic {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "command = {}", self.command)?;
        for (k, v) in &self.settings {
            writeln!(w, "setting.{k} = {v}")?;
        }
        for (kind, files) in [("input", &self.inputs), ("output", &self.outputs)] {
            for (role, path) in files {
                writeln!(w, "{kind}.{role} = {}", path.display())?;
                writeln!(w, "{kind}.{role}.sha256 = {}", sha256_file(path)?)?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(io::Error::into)
    }
}

/// `<output>.manifest`
pub fn beside(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}
