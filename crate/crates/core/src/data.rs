//! Embedded reference data and the directory override.
//!
//! Every file ships inside the binary. Setting `PALEODEMOG_DATA` (or calling
//! [`DataSource::with_dir`]) points lookups at a directory with the same
//! layout (`mortality/<family>_<sex>.csv`, `fertility/<pattern>.csv`,
//! `census/<name>.csv`); files missing there fall back to the embedded copy.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::census::{read_series, CensusSnapshot};
use crate::error::{Error, Result};
use crate::fertility::FertilityPattern;
use crate::lifetable::{AgeGrid, MortalityFamily};

pub const DATA_ENV: &str = "PALEODEMOG_DATA";

pub const FAMILIES: [&str; 2] = ["west", "south"];
pub const PATTERNS: [&str; 2] = ["booth", "maori1962"];
pub const SAMPLE_CENSUS: &str = "census/maori_1874_1901.csv";

const EMBEDDED: &[(&str, &str)] = &[
    (
        "mortality/west_female.csv",
        include_str!("../data/mortality/west_female.csv"),
    ),
    (
        "mortality/west_male.csv",
        include_str!("../data/mortality/west_male.csv"),
    ),
    (
        "mortality/south_female.csv",
        include_str!("../data/mortality/south_female.csv"),
    ),
    (
        "mortality/south_male.csv",
        include_str!("../data/mortality/south_male.csv"),
    ),
    (
        "fertility/booth.csv",
        include_str!("../data/fertility/booth.csv"),
    ),
    (
        "fertility/maori1962.csv",
        include_str!("../data/fertility/maori1962.csv"),
    ),
    (
        SAMPLE_CENSUS,
        include_str!("../data/census/maori_1874_1901.csv"),
    ),
];

/// Resolves family, pattern and census names to parsed data.
#[derive(Debug, Clone)]
pub struct DataSource {
    dir: Option<PathBuf>,
    terminal: u32,
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::embedded()
    }
}

impl DataSource {
    pub fn embedded() -> Self {
        DataSource {
            dir: None,
            terminal: AgeGrid::DEFAULT_TERMINAL,
        }
    }

    /// Embedded data, overridden by `PALEODEMOG_DATA` when it is set.
    pub fn from_env() -> Self {
        match std::env::var_os(DATA_ENV) {
            Some(dir) if !dir.is_empty() => DataSource::embedded().with_dir(dir),
            _ => DataSource::embedded(),
        }
    }

    pub fn with_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dir = Some(dir.into());
        self
    }

    /// Terminal open age group applied to every loaded life table.
    pub fn with_terminal(mut self, terminal: u32) -> Self {
        self.terminal = terminal;
        self
    }

    /// The override directory, when one is set.
    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn terminal(&self) -> u32 {
        self.terminal
    }

    /// Text of a data file given its path relative to the data root.
    pub fn read(&self, relative: &str) -> Result<String> {
        if let Some(dir) = &self.dir {
            let path = dir.join(relative);
            if path.is_file() {
                return Ok(fs::read_to_string(path)?);
            }
        }
        EMBEDDED
            .iter()
            .find(|(p, _)| *p == relative)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| Error::data(relative, "no such data file"))
    }

    fn has(&self, relative: &str) -> bool {
        self.dir
            .as_ref()
            .is_some_and(|d| d.join(relative).is_file())
            || EMBEDDED.iter().any(|(p, _)| *p == relative)
    }

    /// A named family (`west`, `south`, or any `<name>_female.csv` /
    /// `<name>_male.csv` pair in the data directory), or a path prefix
    /// `<prefix>_female.csv` / `<prefix>_male.csv` for a custom family.
    pub fn family(&self, name: &str) -> Result<MortalityFamily> {
        let key = name.to_ascii_lowercase();
        let female_rel = format!("mortality/{key}_female.csv");
        let male_rel = format!("mortality/{key}_male.csv");
        let (label, female, male) = if self.has(&female_rel) && self.has(&male_rel) {
            (key, self.read(&female_rel)?, self.read(&male_rel)?)
        } else {
            let read = |suffix: &str| -> Result<String> {
                let path = format!("{name}_{suffix}.csv");
                fs::read_to_string(&path).map_err(|e| {
                    Error::data(&path, format!("unknown mortality family '{name}' ({e})"))
                })
            };
            let label = Path::new(name)
                .file_name()
                .map_or_else(|| name.to_string(), |s| s.to_string_lossy().into_owned());
            (label, read("female")?, read("male")?)
        };
        MortalityFamily::from_csv(label, female.as_bytes(), male.as_bytes(), self.terminal)
    }

    /// A named pattern (`booth`, `maori1962`) or a path to a pattern CSV.
    pub fn pattern(&self, name: &str) -> Result<FertilityPattern> {
        let key = name.to_ascii_lowercase();
        let rel = format!("fertility/{key}.csv");
        if self.has(&rel) {
            return FertilityPattern::from_csv(key, self.read(&rel)?.as_bytes());
        }
        let text = fs::read_to_string(name)
            .map_err(|e| Error::data(name, format!("unknown fertility pattern '{name}' ({e})")))?;
        let label = Path::new(name)
            .file_stem()
            .map_or_else(|| name.to_string(), |s| s.to_string_lossy().into_owned());
        FertilityPattern::from_csv(label, text.as_bytes())
    }

    /// The shipped census series.
    pub fn sample_census(&self) -> Result<Vec<CensusSnapshot>> {
        read_series(self.read(SAMPLE_CENSUS)?.as_bytes())
    }

    /// `(relative path, sha256)` for every data file as this source resolves it.
    pub fn provenance(&self) -> Result<Vec<(String, String)>> {
        EMBEDDED
            .iter()
            .map(|(p, _)| {
                let digest = Sha256::digest(self.read(p)?.as_bytes());
                Ok((p.to_string(), format!("{digest:x}")))
            })
            .collect()
    }
}
