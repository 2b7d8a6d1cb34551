//! Map files: `f1 = <expr>`, `f2 = <expr>`, `option.<name> = <value>` and
//! `#` comments, one entry per line.

use std::collections::BTreeMap;

use plane_escape::infinity::PlaneMap;
use plane_escape::orbit::BoxParams;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const OPTIONS: &[&str] = &["precision_bits", "seed", "eps", "r_scale", "grid_n"];

#[derive(Debug, Error)]
pub enum MapFileError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {0}: unknown key `{1}`")]
    UnknownKey(usize, String),
    #[error("line {0}: unknown option `{1}` (known: {known})", known = OPTIONS.join(", "))]
    UnknownOption(usize, String),
    #[error("line {0}: `{1}` given twice")]
    Duplicate(usize, String),
    #[error("option.{0}: cannot parse `{1}`")]
    BadOption(String, String),
    #[error("missing `{0} = ...` line")]
    Missing(&'static str),
    #[error(transparent)]
    Map(#[from] plane_escape::infinity::MapError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub f1_text: String,
    pub f2_text: String,
    pub options: BTreeMap<String, String>,
    /// `sha256:<hex>` of the file contents.
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    let h = Sha256::digest(bytes);
    let hex: String = h.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl MapFile {
    pub fn parse(text: &str) -> Result<Self, MapFileError> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(MapFileError::Syntax(n))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(MapFileError::Syntax(n));
            }
            match k.strip_prefix("option.") {
                Some(name) if !OPTIONS.contains(&name) => return Err(MapFileError::UnknownOption(n, name.into())),
                None if k != "f1" && k != "f2" => return Err(MapFileError::UnknownKey(n, k.into())),
                _ => {}
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(MapFileError::Duplicate(n, k.into()));
            }
        }
        let f1_text = entries.remove("f1").ok_or(MapFileError::Missing("f1"))?;
        let f2_text = entries.remove("f2").ok_or(MapFileError::Missing("f2"))?;
        let options = entries.into_iter().map(|(k, v)| (k["option.".len()..].to_string(), v)).collect();
        let mf = MapFile { f1_text, f2_text, options, digest: digest(text.as_bytes()) };
        mf.box_params()?;
        mf.option::<u32>("precision_bits")?;
        mf.option::<u64>("seed")?;
        Ok(mf)
    }

    pub fn map(&self) -> Result<PlaneMap, MapFileError> {
        Ok(PlaneMap::parse(&self.f1_text, &self.f2_text)?)
    }

    pub fn option<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, MapFileError> {
        self.options
            .get(name)
            .map(|v| v.parse().map_err(|_| MapFileError::BadOption(name.into(), v.clone())))
            .transpose()
    }

    pub fn box_params(&self) -> Result<BoxParams, MapFileError> {
        let d = BoxParams::default();
        Ok(BoxParams {
            r_scale: self.option("r_scale")?.unwrap_or(d.r_scale),
            grid_n: self.option("grid_n")?.unwrap_or(d.grid_n),
            eps: self.option("eps")?.unwrap_or(d.eps),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_and_comments() {
        let mf = MapFile::parse("# example\nf1 = z^2*(w - z)^2  # top\n\nf2 = w^2 + z^3\noption.r_scale = 0.5\n").unwrap();
        assert_eq!(mf.f1_text, "z^2*(w - z)^2");
        assert_eq!(mf.box_params().unwrap().r_scale, 0.5);
        assert!(mf.digest.starts_with("sha256:") && mf.digest.len() == 71);
        assert_eq!(mf.map().unwrap().d, 4);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(MapFile::parse("f2 = w"), Err(MapFileError::Missing("f1"))));
        assert!(matches!(MapFile::parse("f1 = z\nf1 = z\nf2 = w"), Err(MapFileError::Duplicate(2, _))));
        assert!(matches!(MapFile::parse("f1 z"), Err(MapFileError::Syntax(1))));
        assert!(matches!(MapFile::parse("g = z"), Err(MapFileError::UnknownKey(1, _))));
        assert!(matches!(MapFile::parse("option.foo = 1"), Err(MapFileError::UnknownOption(1, _))));
        assert!(matches!(MapFile::parse("f1 = z\nf2 = w\noption.eps = x"), Err(MapFileError::BadOption(..))));
        let e = MapFile::parse("f1 = z^2\nf2 = w^2").unwrap().map().unwrap_err();
        assert!(e.to_string().contains("deg f1 must exceed deg f2"));
    }

    #[test]
    fn digest_is_content_hash() {
        assert_eq!(digest(b""), "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
