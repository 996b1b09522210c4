//! Resolving `--model`, `--file` and `--set` into a model and bindings.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use quadham::catalog::{Model, ModelId};
use quadham::hamparse::ParamBindings;
use serde::{Deserialize, Serialize};

/// User model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
    pub hamiltonian: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl ModelFile {
    pub fn into_model(self) -> anyhow::Result<Model> {
        if self.k == 0 {
            bail!("model `{}`: K must be at least 1", self.name);
        }
        let mut defaults = ParamBindings::new();
        for (name, v) in &self.parameters {
            defaults
                .set(name, *v)
                .with_context(|| format!("model `{}`: bad parameter `{name}`", self.name))?;
        }
        Ok(Model {
            name: self.name,
            k: self.k,
            expression: self.hamiltonian,
            defaults,
            catalog: None,
        })
    }
}

pub fn load_model_file(path: &Path) -> anyhow::Result<Model> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ModelFile = serde_json::from_str(&src).with_context(|| format!("parsing model file {}", path.display()))?;
    file.into_model()
}

pub fn resolve(model: Option<&str>, file: Option<&Path>) -> anyhow::Result<Model> {
    match (model, file) {
        (Some(id), None) => Ok(id.parse::<ModelId>()?.spec().to_model()),
        (None, Some(path)) => load_model_file(path),
        _ => bail!("exactly one of --model or --file is required"),
    }
}

/// Parses repeated `name=value` overrides.
pub fn parse_overrides(sets: &[String]) -> anyhow::Result<ParamBindings> {
    let mut out = ParamBindings::new();
    for s in sets {
        let (name, val) = s
            .split_once('=')
            .with_context(|| format!("bad --set `{s}`: expected name=value"))?;
        let v: f64 = val
            .trim()
            .parse()
            .with_context(|| format!("bad --set `{s}`: `{}` is not a number", val.trim()))?;
        out.set(name.trim(), v).with_context(|| format!("bad --set `{s}`"))?;
    }
    Ok(out)
}
