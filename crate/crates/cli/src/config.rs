use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::fixtures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CountRegions,
    EnumerateCells,
    Bounds,
    VerifyRedundancy,
    Zonotope,
    Scaling,
    EffectiveCapacity,
    Resilience,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CountRegions => "count-regions",
            Command::EnumerateCells => "enumerate-cells",
            Command::Bounds => "bounds",
            Command::VerifyRedundancy => "verify-redundancy",
            Command::Zonotope => "zonotope",
            Command::Scaling => "scaling",
            Command::EffectiveCapacity => "effective-capacity",
            Command::Resilience => "resilience",
            Command::VerifyAll => "verify-all",
        }
    }
}

/// Where a spec comes from: a file, a bundled fixture, or inline JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecSource {
    File { file: PathBuf },
    Fixture { fixture: String },
    Inline(Value),
}

impl SpecSource {
    /// `fixture:<name>` or a path.
    pub fn parse_arg(s: &str) -> SpecSource {
        match s.strip_prefix("fixture:") {
            Some(name) => SpecSource::Fixture { fixture: name.to_string() },
            None => SpecSource::File { file: PathBuf::from(s) },
        }
    }

    pub fn resolve(&self, base: &Path) -> Result<Value> {
        match self {
            SpecSource::Inline(v) => Ok(v.clone()),
            SpecSource::Fixture { fixture } => {
                let text = fixtures::get(fixture)
                    .ok_or_else(|| CliError::Config(format!("unknown fixture {fixture:?}; known: {}", fixtures::NAMES.join(", "))))?;
                serde_json::from_str(text).map_err(|e| CliError::Config(format!("fixture {fixture}: {e}")))
            }
            SpecSource::File { file } => {
                let path = if file.is_absolute() { file.clone() } else { base.join(file) };
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_coalitions")]
    pub coalitions: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_n_max() -> usize {
    tropcap_core::arrangement::DEFAULT_N_MAX
}

fn default_coalitions() -> u64 {
    tropcap_core::routing::DEFAULT_COALITION_BUDGET as u64
}

fn default_samples() -> usize {
    1_000_000
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { n_max: default_n_max(), coalitions: default_coalitions(), samples: default_samples() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<SpecSource>,
    /// Command-specific parameters.
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative spec paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            seed: 0,
            spec: None,
            manifold: None,
            params: Map::new(),
            budgets: Budgets::default(),
            output: OutputSpec::default(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.budgets;
        if b.n_max == 0 || b.coalitions == 0 || b.samples == 0 {
            return Err(CliError::Config("budgets must be positive".into()));
        }
        for src in [&self.spec, &self.manifold].into_iter().flatten() {
            if let SpecSource::File { file } = src {
                let path = if file.is_absolute() { file.clone() } else { self.base_dir.join(file) };
                if !path.exists() {
                    return Err(CliError::Config(format!("referenced file {} does not exist", path.display())));
                }
            }
        }
        Ok(())
    }

    pub fn spec_value(&self) -> Result<Value> {
        self.spec
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} needs a spec", self.command.name())))?
            .resolve(&self.base_dir)
    }

    pub fn manifold_value(&self) -> Result<Value> {
        self.manifold
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} needs a manifold", self.command.name())))?
            .resolve(&self.base_dir)
    }

    /// Parameters deserialized into `P`, missing fields taking `P`'s defaults.
    pub fn params<P: serde::de::DeserializeOwned>(&self) -> Result<P> {
        serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| CliError::Config(format!("{} params: {e}", self.command.name())))
    }

    /// The configuration with specs inlined and output settings dropped:
    /// what determines the report.
    pub fn resolved(&self) -> Result<Value> {
        let mut v = serde_json::to_value(self).map_err(|e| CliError::Config(e.to_string()))?;
        let obj = v.as_object_mut().expect("struct serializes to object");
        obj.remove("output");
        if self.spec.is_some() {
            obj.insert("spec".into(), self.spec_value()?);
        }
        if self.manifold.is_some() {
            obj.insert("manifold".into(), self.manifold_value()?);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_configs() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"command":"bounds"}"#).unwrap();
        assert_eq!(c.command, Command::Bounds);
        assert_eq!(c.budgets, Budgets::default());
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"command":"count-regions","seed":7,"spec":{"fixture":"five_lines"},
                "budgets":{"n_max":10,"samples":5},"output":{"path":"r.csv","format":"csv"}}"#,
        )
        .unwrap();
        assert_eq!(c.spec, Some(SpecSource::Fixture { fixture: "five_lines".into() }));
        assert_eq!(c.budgets.coalitions, default_coalitions());
        assert_eq!(c.output.format, Format::Csv);
        assert!(c.spec_value().unwrap().get("W").is_some());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"command":"nope"}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"command":"bounds","extra":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::new(Command::CountRegions);
        c.spec = Some(SpecSource::File { file: "/nonexistent/spec.json".into() });
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Command::Bounds);
        c.budgets.samples = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn resolved_config_ignores_output() {
        let mut a = ExperimentConfig::new(Command::CountRegions);
        a.spec = Some(SpecSource::parse_arg("fixture:five_lines"));
        let mut b = a.clone();
        b.output.path = Some("elsewhere.json".into());
        assert_eq!(a.resolved().unwrap(), b.resolved().unwrap());
        let mut inline = a.clone();
        inline.spec = Some(SpecSource::Inline(a.spec_value().unwrap()));
        assert_eq!(a.resolved().unwrap(), inline.resolved().unwrap());
    }
}
