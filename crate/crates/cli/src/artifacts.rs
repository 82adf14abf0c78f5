//! Output staging. Everything a run produces is held in memory and only
//! written, together with `manifest.csv`, once the run has succeeded.

use std::path::Path;

use anyhow::{Context, Result};
use itfmap_core::{cfld, Field};
use sha2::{Digest, Sha256};

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Extra per-file parameters appended to the run parameters.
    pub extra: String,
}

#[derive(Default)]
pub struct Artifacts {
    items: Vec<Artifact>,
}

impl Artifacts {
    pub fn text(&mut self, name: &str, lines: &[String], extra: &str) {
        let mut body = lines.join("\n");
        body.push('\n');
        self.items.push(Artifact {
            name: name.to_string(),
            bytes: body.into_bytes(),
            extra: extra.to_string(),
        });
    }

    pub fn field(&mut self, name: &str, field: &Field, extra: &str) -> Result<()> {
        let mut bytes = Vec::new();
        cfld::write_to(field, &mut bytes)?;
        self.items.push(Artifact {
            name: name.to_string(),
            bytes,
            extra: extra.to_string(),
        });
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Write every artifact and the manifest. `params` is the canonical run
    /// configuration, seed included.
    pub fn commit(self, out: &Path, params: &str) -> Result<()> {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let mut manifest = vec!["file,bytes,sha256,parameters".to_string()];
        for a in &self.items {
            let path = out.join(&a.name);
            std::fs::write(&path, &a.bytes)
                .with_context(|| format!("writing {}", path.display()))?;
            let hash = hex::encode(Sha256::digest(&a.bytes));
            let p = if a.extra.is_empty() {
                params.to_string()
            } else {
                format!("{params};{}", a.extra)
            };
            manifest.push(format!("{},{},{hash},{}", a.name, a.bytes.len(), quote(&p)));
        }
        let mut body = manifest.join("\n");
        body.push('\n');
        std::fs::write(out.join("manifest.csv"), body).context("writing manifest.csv")?;
        Ok(())
    }
}

/// CSV quoting for a single field.
pub fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Split one CSV line, honouring double quotes.
pub fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}
