//! Experiment configuration, read from TOML.
//!
//! ```toml
//! output = "runs/h6"
//!
//! [fixtures]
//! manifest = "../fixtures/manifest.json"   # relative to this file
//! molecule = "h6"
//! r = [0.9, 2.0]                           # omit for the whole grid
//! # files = ["h6_r2.0000.fcidump"]         # alternative to manifest
//!
//! [ansatz]
//! kind = "uccsd"            # or "kupccgsd" with k = 2
//! form = "trotterized"      # or "untrotterized"
//! trotter_n = 1
//!
//! [ordering]
//! strategy = "random_shuffle"   # singles_first, doubles_first, as_generated
//! seed = 0                      # member i uses seed + i
//! members = 20
//!
//! [optimizer]                   # VqeOptions; all keys optional
//! fd_step = 1e-5
//! untrotterized_gradient = "quadrature"
//! [optimizer.bfgs]
//! gtol = 1e-8
//! max_iter = 10000
//!
//! [restarts]                    # every optimization; best of `count`
//! count = 1
//! seed = 0
//! init = { kind = "zeros" }     # or { kind = "uniform", low = -0.5, high = 0.5 }
//!
//! [scan]
//! untrotterized = true
//! sgo = false
//!
//! [sgo]
//! reoptimize = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ucc_ordering::{Form, InitSpec, OrderingStrategy, VqeOptions};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fixtures: FixtureSpec,
    pub ansatz: AnsatzSpec,
    #[serde(default)]
    pub ordering: OrderingSpec,
    #[serde(default)]
    pub optimizer: VqeOptions,
    #[serde(default)]
    pub restarts: RestartSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub sgo: SgoSpec,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub manifest: Option<PathBuf>,
    pub molecule: Option<String>,
    pub r: Option<Vec<f64>>,
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Uccsd,
    Kupccgsd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    /// Block count for k-UpCCGSD.
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "trotterized")]
    pub form: Form,
    #[serde(default = "one")]
    pub trotter_n: usize,
}

fn one() -> usize {
    1
}

fn trotterized() -> Form {
    Form::Trotterized
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    AsGenerated,
    RandomShuffle,
    SinglesFirst,
    DoublesFirst,
}

impl StrategyKind {
    pub fn with_seed(self, seed: u64) -> OrderingStrategy {
        match self {
            StrategyKind::AsGenerated => OrderingStrategy::AsGenerated,
            StrategyKind::RandomShuffle => OrderingStrategy::RandomShuffle { seed },
            StrategyKind::SinglesFirst => OrderingStrategy::SinglesFirst { seed },
            StrategyKind::DoublesFirst => OrderingStrategy::DoublesFirst { seed },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingSpec {
    #[serde(default = "random_shuffle")]
    pub strategy: StrategyKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_members")]
    pub members: usize,
}

fn random_shuffle() -> StrategyKind {
    StrategyKind::RandomShuffle
}

fn default_members() -> usize {
    20
}

impl Default for OrderingSpec {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::RandomShuffle,
            seed: 0,
            members: default_members(),
        }
    }
}

impl OrderingSpec {
    pub fn member_seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.members as u64).map(|i| self.seed.wrapping_add(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestartSpec {
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "zeros")]
    pub init: InitSpec,
}

fn zeros() -> InitSpec {
    InitSpec::Zeros
}

impl Default for RestartSpec {
    fn default() -> Self {
        Self {
            count: 1,
            seed: 0,
            init: InitSpec::Zeros,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default = "yes")]
    pub untrotterized: bool,
    #[serde(default)]
    pub sgo: bool,
}

fn yes() -> bool {
    true
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            untrotterized: true,
            sgo: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgoSpec {
    #[serde(default = "yes")]
    pub reoptimize: bool,
}

impl Default for SgoSpec {
    fn default() -> Self {
        Self { reoptimize: true }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = self.fixtures.manifest.as_mut() {
            fix(m);
        }
        self.fixtures.files.iter_mut().for_each(fix);
        fix(&mut self.output);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        let f = &self.fixtures;
        match (&f.manifest, &f.molecule, f.files.is_empty()) {
            (Some(_), Some(_), true) | (None, None, false) => {}
            _ => return bad("fixtures need either manifest + molecule or a files list"),
        }
        if f.r.is_some() && f.manifest.is_none() {
            return bad("fixtures.r selects manifest grid points; it needs a manifest");
        }
        if self.ansatz.k == 0 {
            return bad("ansatz.k must be at least 1");
        }
        if self.ansatz.kind == AnsatzKind::Uccsd && self.ansatz.k != 1 {
            return bad("ansatz.k applies to kupccgsd only");
        }
        if self.ansatz.trotter_n == 0 {
            return bad("ansatz.trotter_n must be at least 1");
        }
        if self.ansatz.form == Form::Untrotterized && self.ansatz.trotter_n != 1 {
            return bad("ansatz.trotter_n applies to the trotterized form only");
        }
        if self.ordering.members == 0 {
            return bad("ordering.members must be at least 1");
        }
        if self.restarts.count == 0 {
            return bad("restarts.count must be at least 1");
        }
        if let InitSpec::Uniform { low, high } = self.restarts.init {
            if !(low < high) || !low.is_finite() || !high.is_finite() {
                return bad("restarts.init needs finite low < high");
            }
        }
        if self.scan.sgo && self.ansatz.kind != AnsatzKind::Uccsd {
            return bad("sequential gradient ordering needs a uccsd ansatz");
        }
        if !(self.optimizer.fd_step > 0.0) {
            return bad("optimizer.fd_step must be positive");
        }
        self.optimizer.bfgs.validate().map_err(|e| LabError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[fixtures]
files = ["a.fcidump"]
[ansatz]
kind = "uccsd"
"#;

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.ordering.members, 20);
        assert_eq!(cfg.ansatz.form, Form::Trotterized);
        assert_eq!(cfg.optimizer.bfgs.gtol, 1e-8);
        assert_eq!(cfg.restarts.init, InitSpec::Zeros);
        assert!(cfg.sgo.reoptimize);
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for extra in [
            "[ordering]\nmembers = 0",
            "[restarts]\ncount = 0",
            "[optimizer.bfgs]\nc1 = 0.95",
            "[scan]\nbogus = 1",
        ] {
            assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}{extra}")).is_err(), "{extra}");
        }
        let k_on_uccsd = MINIMAL.replace("kind = \"uccsd\"", "kind = \"uccsd\"\nk = 2");
        assert!(ExperimentConfig::from_toml(&k_on_uccsd).is_err());
        let no_fixtures = "[fixtures]\n[ansatz]\nkind = \"uccsd\"";
        assert!(ExperimentConfig::from_toml(no_fixtures).is_err());
    }

    #[test]
    fn member_seeds_are_consecutive() {
        let spec = OrderingSpec {
            seed: 7,
            members: 3,
            ..Default::default()
        };
        assert_eq!(spec.member_seeds().collect::<Vec<_>>(), vec![7, 8, 9]);
    }
}
