//! Line-oriented `key=value` run manifests.
//!
//! Every artifact-producing command writes one next to its outputs with
//! the full resolved parameter set, then appends `result.*` entries
//! (residual histories, metrics). Re-running a manifest replays the
//! parameter keys and reproduces the outputs byte for byte; `result.*`
//! keys are informational and ignored on replay. Manifests carry no
//! timestamps or machine identifiers, so they are themselves
//! reproducible.

use std::fmt::Display;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.push("command", command);
        m.push("tool", concat!("varidiff ", env!("CARGO_PKG_VERSION")));
        m
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        debug_assert!(!key.contains('=') && !key.contains('\n'));
        debug_assert!(!value.contains('\n'));
        self.entries.push((key.to_string(), value));
    }

    /// First value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key)
            .ok_or_else(|| format!("manifest is missing key '{key}'"))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", line_no + 1))?;
            entries.push((k.to_string(), v.to_string()));
        }
        if entries.is_empty() {
            return Err("manifest has no entries".to_string());
        }
        Ok(Self { entries })
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.render().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut m = RunManifest::new("restore");
        m.push("k", 0.05);
        m.push("t", "1,10,50");
        m.push("result.psnr_t1", 31.25);
        let text = m.render();
        let back = RunManifest::parse(&text).unwrap();
        assert_eq!(back.get("command"), Some("restore"));
        assert_eq!(back.get("k"), Some("0.05"));
        assert_eq!(back.get("result.psnr_t1"), Some("31.25"));
        assert_eq!(back.render(), text);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(RunManifest::parse("no separator here").is_err());
        assert!(RunManifest::parse("").is_err());
    }

    #[test]
    fn floats_roundtrip_shortest() {
        let mut m = RunManifest::new("surface");
        m.push("t", 0.1f64);
        m.push("eps", 1e-8f64);
        let back = RunManifest::parse(&m.render()).unwrap();
        assert_eq!(back.get("t").unwrap().parse::<f64>().unwrap(), 0.1);
        assert_eq!(back.get("eps").unwrap().parse::<f64>().unwrap(), 1e-8);
    }
}
