//! Run manifests: a TOML or JSON file mirroring the command-line flags.
//! Values given on the command line win over values from the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use omwu_core::dynamics::Algorithm;
use omwu_core::{InstanceFamily, InstanceParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Ndjson,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Ndjson => "ndjson",
        }
    }
}

/// How the starting strategy is chosen when no explicit `init_p`/`init_q`
/// is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    /// The initialization the instance family prescribes.
    Instance,
    Uniform,
    /// Log-weights drawn uniformly from [−2, 2] with the run seed.
    Random,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub command: Option<String>,
    pub family: Option<String>,
    pub delta_p: Option<f64>,
    pub delta_q: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub horizon: Option<usize>,
    pub stride: Option<usize>,
    pub seed: Option<u64>,
    pub algorithm: Option<Algorithm>,
    pub init: Option<InitKind>,
    pub init_p: Option<Vec<f64>>,
    pub init_q: Option<Vec<f64>>,
    pub enforce_stepsize: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            _ => bail!("manifest {} must end in .toml or .json", path.display()),
        };
        Ok(parsed)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: RunManifest) -> RunManifest {
        macro_rules! pick {
            ($($f:ident),*) => { RunManifest { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, family, delta_p, delta_q, delta, epsilon, eta, horizon, stride, seed, algorithm, init, init_p,
            init_q, enforce_stepsize, out, format
        )
    }

    pub fn instance_params(&self) -> InstanceParams {
        InstanceParams {
            delta_p: self.delta_p,
            delta_q: self.delta_q,
            delta: self.delta,
            epsilon: self.epsilon,
            horizon: self.horizon,
        }
    }

    pub fn family(&self) -> anyhow::Result<InstanceFamily> {
        let tag = self.family.as_deref().unwrap_or("canonical2x2");
        let mut params = self.instance_params();
        if tag == "canonical2x2" && params.delta_p.is_none() && params.delta_q.is_none() && params.delta.is_none() {
            params.delta = Some(0.5);
        }
        Ok(InstanceFamily::from_tag(tag, &params)?)
    }
}
