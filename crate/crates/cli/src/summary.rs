use std::fmt;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use sha2::{Digest, Sha256};

/// The one line every run prints: command, seed, input digests, counts.
#[derive(Debug)]
pub struct Summary {
    command: &'static str,
    seed: u64,
    inputs: Vec<(String, String)>,
    fields: Vec<(String, String)>,
}

impl Summary {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Summary {
            command,
            seed,
            inputs: Vec::new(),
            fields: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> io::Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.push((path.display().to_string(), digest));
        Ok(())
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.fields.push((key.into(), value.to_string()));
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "capkit {} seed={}", self.command, self.seed)?;
        for (path, digest) in &self.inputs {
            write!(f, " input={path}:sha256={digest}")?;
        }
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
