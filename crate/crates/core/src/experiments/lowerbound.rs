use std::fs::File;
use std::io::BufWriter;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, StudyKind};
use crate::error::{Result, SmuError};
use crate::minimax::{
    default_point_mass, format_codeword, packing_report, varshamov_gilbert, FAlphaFamily, FamilyIndex,
    PackingReport,
};
use crate::rng::{RngSpec, RNG_ALGORITHM};

const MAX_D: usize = 2;
const MAX_M: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSummary {
    pub d: usize,
    pub k: u32,
    pub m: u32,
    pub num_bits: usize,
    pub members: usize,
    pub min_hamming: usize,
    pub achieved_c: f64,
    /// `2^{−2m} m^{−(d−1)}`.
    pub rate_proxy: f64,
    /// `n = 2^{3m} m^{2(d−1)}`.
    pub calibrated_n: f64,
    /// `n^{−2/3} (log n)^{(d−1)/3}` at the calibrated `n`.
    pub target_rate: f64,
    pub family: FAlphaFamily,
    pub report: PackingReport,
    pub rng_algorithm: String,
}

pub fn rate_proxy(m: u32, d: usize) -> f64 {
    (-2.0 * m as f64).exp2() * (m as f64).powi(-(d as i32 - 1))
}

pub fn calibrated_n(m: u32, d: usize) -> f64 {
    (3.0 * m as f64).exp2() * (m as f64).powi(2 * (d as i32 - 1))
}

pub fn target_rate(n: f64, d: usize) -> f64 {
    n.powf(-2.0 / 3.0) * n.ln().powf((d - 1) as f64 / 3.0)
}

pub fn run_lowerbound_report(cfg: &ExperimentConfig) -> Result<LowerBoundSummary> {
    cfg.validate()?;
    if cfg.study != StudyKind::Lowerbound {
        return Err(SmuError::InvalidArgument("config is not a lowerbound study".into()));
    }
    let spec = cfg.lowerbound.as_ref().expect("validated");
    let index = FamilyIndex::new(spec.d, spec.k)?;
    let m = index.m();
    if spec.d > MAX_D || m > MAX_M {
        return Err(SmuError::InvalidArgument(format!(
            "family too large: d = {}, m = {m} (limits d ≤ {MAX_D}, m ≤ {MAX_M})",
            spec.d
        )));
    }
    let codes = varshamov_gilbert(index.num_bits(), spec.members, &RngSpec::new(cfg.master_seed, 0))?;
    let family = FAlphaFamily {
        d: spec.d,
        k: spec.k,
        point_mass: spec.point_mass.unwrap_or_else(|| default_point_mass(spec.d)),
        coding: spec.coding,
        members: codes.codewords.iter().map(|c| format_codeword(c)).collect(),
    };
    let report = packing_report(&family)?;
    let n = calibrated_n(m, spec.d);
    let summary = LowerBoundSummary {
        rng_algorithm: RNG_ALGORITHM.to_string(),
        d: spec.d,
        k: spec.k,
        m,
        num_bits: codes.num_bits,
        members: family.members.len(),
        min_hamming: codes.min_hamming,
        achieved_c: codes.achieved_c,
        rate_proxy: rate_proxy(m, spec.d),
        calibrated_n: n,
        target_rate: target_rate(n, spec.d),
        family,
        report,
    };
    if let Some(csv) = &cfg.output.csv {
        summary.report.write_csv(BufWriter::new(File::create(csv)?))?;
        let json = cfg
            .output
            .summary
            .clone()
            .unwrap_or_else(|| csv.with_extension("summary.json"));
        std::fs::write(json, serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    Ok(summary)
}
