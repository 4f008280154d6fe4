use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmuError};
use crate::minimax::Coding;
use crate::npmle::FitOptions;
use crate::simulate::TruthSpec;

pub const SCHEMA: &str = "smu-experiment/1";
pub const THREADS_ENV: &str = "SMU_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Rate,
    Adaptation,
    Lowerbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase", deny_unknown_fields)]
pub enum MetricMode {
    #[default]
    Exact,
    #[serde(rename_all = "camelCase")]
    Mc { n_samples: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    /// Defaults to the CSV path with extension `.dat`.
    pub plot: Option<PathBuf>,
    /// Defaults to the CSV path with extension `.summary.json`.
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LowerBoundSpec {
    pub d: usize,
    pub k: u32,
    /// Number of Varshamov–Gilbert codewords; the default scales with the bit count.
    #[serde(default)]
    pub members: Option<usize>,
    #[serde(default)]
    pub coding: Coding,
    #[serde(default)]
    pub point_mass: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub study: StudyKind,
    #[serde(default)]
    pub truth: Option<TruthSpec>,
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "one")]
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub solver: FitOptions,
    #[serde(default)]
    pub metric: MetricMode,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Record per-replication wall time. Off by default so result files
    /// stay byte-identical across runs.
    #[serde(default)]
    pub record_timing: bool,
    /// Skip sampling and fitting; every row gets `h² = n^{−2/3}`.
    #[serde(default)]
    pub synthetic: bool,
    #[serde(default)]
    pub lowerbound: Option<LowerBoundSpec>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str, source_name: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SmuError::Parse {
            source_name: source_name.to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SmuError::InvalidArgument(m));
        if self.schema != SCHEMA {
            return bad(format!("schema must be {SCHEMA:?}, got {:?}", self.schema));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        match self.study {
            StudyKind::Rate | StudyKind::Adaptation => {
                if self.sample_sizes.is_empty() {
                    return bad("sampleSizes is empty".into());
                }
                if self.sample_sizes.windows(2).any(|w| w[1] <= w[0]) || self.sample_sizes[0] == 0 {
                    return bad("sampleSizes must be positive and strictly increasing".into());
                }
                if self.sample_sizes.last().is_some_and(|&n| n as u64 > u32::MAX as u64) {
                    return bad("sample sizes must fit in 32 bits".into());
                }
                if self.replications as u64 > u32::MAX as u64 {
                    return bad("replications must fit in 32 bits".into());
                }
                if !self.synthetic && self.truth.is_none() {
                    return bad("truth is required".into());
                }
                if self.study == StudyKind::Adaptation
                    && !self.synthetic
                    && !matches!(self.truth, Some(TruthSpec::PiecewiseRect { .. }))
                {
                    return bad("the adaptation study needs a PiecewiseRect truth".into());
                }
            }
            StudyKind::Lowerbound => {
                if self.lowerbound.is_none() {
                    return bad("lowerbound block is required".into());
                }
            }
        }
        if let MetricMode::Mc { n_samples } = self.metric {
            if n_samples == 0 {
                return bad("nSamples must be positive".into());
            }
        }
        Ok(())
    }

    /// Explicit setting, then `SMU_THREADS`, then available parallelism.
    pub fn resolved_threads(&self) -> usize {
        self.threads
            .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
            .filter(|&t| t > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"schema":"smu-experiment/1","study":"rate","masterSeed":7,
        "sampleSizes":[50,100],"replications":2,
        "truth":{"kind":"UniformBox","m":1.0,"d":2}}"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_json(BASE, "cfg").unwrap();
        assert_eq!(cfg.metric, MetricMode::Exact);
        assert_eq!(cfg.solver.cert_tol, 1e-6);
        let mc = BASE.replace("\"replications\":2", "\"replications\":2,\"metric\":{\"mode\":\"mc\",\"nSamples\":1000}");
        assert_eq!(
            ExperimentConfig::from_json(&mc, "cfg").unwrap().metric,
            MetricMode::Mc { n_samples: 1000 }
        );
    }

    #[test]
    fn rejects_typos_and_bad_values() {
        let typo = BASE.replace("replications", "replicates");
        assert!(matches!(ExperimentConfig::from_json(&typo, "c"), Err(SmuError::Parse { .. })));
        let unordered = BASE.replace("[50,100]", "[100,50]");
        assert!(ExperimentConfig::from_json(&unordered, "c").is_err());
        let schema = BASE.replace("smu-experiment/1", "smu-experiment/0");
        assert!(ExperimentConfig::from_json(&schema, "c").is_err());
        let adapt = BASE.replace("\"rate\"", "\"adaptation\"");
        assert!(ExperimentConfig::from_json(&adapt, "c").is_err());
    }
}
