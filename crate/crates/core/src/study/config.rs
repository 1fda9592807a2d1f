use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer};

use crate::boundary::AbcFamily;
use crate::femcore::MAX_DEGREE;

use super::StudyError;

/// Finest mesh level a study may request.
pub const MAX_STUDY_LEVEL: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    DiskRobin,
    DiskAbc2,
    DiskDtn,
}

impl Example {
    pub fn as_str(self) -> &'static str {
        match self {
            Example::DiskRobin => "disk_robin",
            Example::DiskAbc2 => "disk_abc2",
            Example::DiskDtn => "disk_dtn",
        }
    }
}

impl FromStr for Example {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Self, StudyError> {
        match s {
            "disk_robin" => Ok(Example::DiskRobin),
            "disk_abc2" => Ok(Example::DiskAbc2),
            "disk_dtn" => Ok(Example::DiskDtn),
            other => Err(StudyError::Config(format!("unknown example `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_svg")]
    pub svg: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), csv: default_csv(), svg: default_svg() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpConfig {
    pub c1: f64,
    pub c2: f64,
    /// Overrides the `p ~ c2 log k` rule.
    #[serde(default)]
    pub fixed_p: Option<usize>,
}

impl Default for HpConfig {
    fn default() -> Self {
        Self { c1: 1.5, c2: 1.0, fixed_p: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub example: Example,
    pub p: Vec<usize>,
    pub levels: Vec<usize>,
    pub k: Vec<f64>,
    #[serde(default = "default_family", deserialize_with = "family_from_str")]
    pub abc_family: AbcFamily,
    /// `None` selects `ceil(2k) + 10` per wavenumber.
    #[serde(default)]
    pub dtn_cutoff: Option<usize>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_n_lambda")]
    pub n_lambda_target: f64,
    #[serde(default)]
    pub hp: HpConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_csv() -> String {
    "convergence.csv".into()
}

fn default_svg() -> String {
    "convergence.svg".into()
}

fn default_family() -> AbcFamily {
    AbcFamily::Feng
}

fn default_eta() -> f64 {
    crate::filters::DEFAULT_ETA
}

fn default_n_lambda() -> f64 {
    12.0
}

fn family_from_str<'de, D: Deserializer<'de>>(d: D) -> Result<AbcFamily, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

impl StudyConfig {
    /// Config with default options for one example.
    pub fn new(example: Example, p: Vec<usize>, levels: Vec<usize>, k: Vec<f64>) -> Self {
        Self {
            example,
            p,
            levels,
            k,
            abc_family: default_family(),
            dtn_cutoff: None,
            eta: default_eta(),
            n_lambda_target: default_n_lambda(),
            hp: HpConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, StudyError> {
        let cfg: Self = toml::from_str(text).map_err(|e| StudyError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, StudyError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: &str| Err(StudyError::Config(m.to_string()));
        if self.p.is_empty() || self.levels.is_empty() || self.k.is_empty() {
            return bad("p, levels and k must be nonempty");
        }
        if self.p.iter().any(|&p| p == 0 || p > MAX_DEGREE) {
            return bad("p must lie in 1..=8");
        }
        if self.levels.iter().any(|&l| l > MAX_STUDY_LEVEL) {
            return bad("levels must not exceed 6");
        }
        if self.k.iter().any(|&k| !(k >= crate::femcore::assembly::MIN_WAVENUMBER && k.is_finite())) {
            return bad("wavenumbers must be finite and at least 0.5");
        }
        if !(self.eta > 1.0) {
            return bad("eta must exceed 1");
        }
        if !(self.n_lambda_target > 0.0) {
            return bad("n_lambda_target must be positive");
        }
        if !(self.hp.c1 > 0.0 && self.hp.c1 <= 4.0 && self.hp.c2 > 0.0) {
            return bad("hp requires c1 in (0, 4] and c2 > 0");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
example = "disk_abc2"
p = [1, 2]
levels = [1, 2, 3]
k = [4.0, 8.0]
abc_family = "bgt"
dtn_cutoff = 20
eta = 1.25

[hp]
c1 = 2.0
c2 = 0.5

[output]
dir = "results"
"#;

    #[test]
    fn parses_all_fields() {
        let c = StudyConfig::from_toml(FULL).unwrap();
        assert_eq!(c.example, Example::DiskAbc2);
        assert_eq!(c.abc_family, AbcFamily::Bgt);
        assert_eq!(c.dtn_cutoff, Some(20));
        assert_eq!(c.hp.c1, 2.0);
        assert_eq!(c.output.dir, PathBuf::from("results"));
        assert_eq!(c.output.csv, "convergence.csv");
    }

    #[test]
    fn rejects_invalid() {
        let base = "example = \"disk_robin\"\np = [1]\nlevels = [1]\nk = [4.0]\n";
        assert!(StudyConfig::from_toml(base).is_ok());
        assert!(StudyConfig::from_toml(&base.replace("[1]\nk", "[7]\nk")).is_err());
        assert!(StudyConfig::from_toml(&base.replace("p = [1]", "p = [9]")).is_err());
        assert!(StudyConfig::from_toml(&base.replace("p = [1]", "p = []")).is_err());
        assert!(StudyConfig::from_toml(&base.replace("disk_robin", "square")).is_err());
        assert!(StudyConfig::from_toml(&format!("{base}abc_family = \"x\"\n")).is_err());
        assert!(StudyConfig::from_toml(&format!("{base}bogus = 1\n")).is_err());
    }
}
