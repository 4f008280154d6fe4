use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MetricMode, StudyKind};
use super::stats::{fit_loglog_slope, quantile, SlopeFit};
use crate::density::SmuDensity;
use crate::error::{Result, SmuError};
use crate::metrics::{hellinger_sq_exact, hellinger_sq_mc, McProposal};
use crate::npmle::fit_npmle;
use crate::rng::{RngSpec, RNG_ALGORITHM};
use crate::simulate::{make_truth, Truth, TruthSpec};

pub const CSV_HEADER: &str = "n,rep,seed,hellinger_sq,loglik,cert_gap,support_size,runtime_ms,converged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub rep: usize,
    /// Stream id `(n << 32) | rep` under the study's master seed.
    pub seed: u64,
    pub hellinger_sq: f64,
    pub loglik: f64,
    pub cert_gap: f64,
    pub support_size: usize,
    pub runtime_ms: Option<f64>,
    pub converged: bool,
}

impl RateRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:?},{:?},{:?},{},{},{}",
            self.n,
            self.rep,
            self.seed,
            self.hellinger_sq,
            self.loglik,
            self.cert_gap,
            self.support_size,
            self.runtime_ms.map(|t| format!("{t:?}")).unwrap_or_default(),
            self.converged
        )
    }

    fn from_record(r: &csv::StringRecord, line: usize, source: &str) -> Result<Self> {
        let err = |m: String| SmuError::Parse {
            source_name: source.to_string(),
            line,
            message: m,
        };
        if r.len() != 9 {
            return Err(err(format!("expected 9 fields, found {}", r.len())));
        }
        fn field<T: std::str::FromStr>(r: &csv::StringRecord, i: usize) -> std::result::Result<T, String> {
            r[i].trim()
                .parse()
                .map_err(|_| format!("column {}: cannot parse {:?}", i + 1, &r[i]))
        }
        let runtime_ms = if r[7].trim().is_empty() {
            None
        } else {
            Some(field(r, 7).map_err(err)?)
        };
        Ok(Self {
            n: field(r, 0).map_err(err)?,
            rep: field(r, 1).map_err(err)?,
            seed: field(r, 2).map_err(err)?,
            hellinger_sq: field(r, 3).map_err(err)?,
            loglik: field(r, 4).map_err(err)?,
            cert_gap: field(r, 5).map_err(err)?,
            support_size: field(r, 6).map_err(err)?,
            runtime_ms,
            converged: field(r, 8).map_err(err)?,
        })
    }
}

pub fn replication_stream(n: usize, rep: usize) -> u64 {
    ((n as u64) << 32) | rep as u64
}

pub fn read_rows<R: Read>(reader: R, source: &str) -> Result<Vec<RateRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| SmuError::Parse {
            source_name: source.to_string(),
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(SmuError::Parse {
            source_name: source.to_string(),
            line: 1,
            message: format!("expected header {CSV_HEADER:?}"),
        });
    }
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| SmuError::Parse {
                source_name: source.to_string(),
                line: i + 2,
                message: e.to_string(),
            })?;
            RateRow::from_record(&rec, i + 2, source)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    /// Converged replications entering the statistics.
    pub count: usize,
    pub excluded: usize,
    pub mean: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    /// `mean h² · n / (m (log n)^{(8/3)(2d−1)})`, adaptation study only.
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub study: StudyKind,
    pub d: usize,
    /// Number of rectangles of a piecewise truth.
    pub pieces: Option<usize>,
    pub sizes: Vec<SizeSummary>,
    pub slope: Option<SlopeFit>,
    pub excluded: usize,
    /// `max / min` of the normalized statistic over `n`.
    pub normalized_spread: Option<f64>,
    pub rng_algorithm: String,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub rows: Vec<RateRow>,
    pub summary: StudySummary,
}

/// Shape of the study's `d` and rectangle count, read from the truth.
fn truth_shape(spec: Option<&TruthSpec>) -> (usize, Option<usize>) {
    match spec {
        Some(TruthSpec::UniformBox { d, .. })
        | Some(TruthSpec::BoundedBelow { d, .. })
        | Some(TruthSpec::LowerBoundFamily { d, .. }) => (*d, None),
        Some(TruthSpec::PiecewiseRect { pieces }) => (pieces.first().map_or(1, |p| p.lower.len()), Some(pieces.len())),
        Some(TruthSpec::ProductMixture { marginals }) => (marginals.len(), None),
        None => (1, None),
    }
}

pub fn summarize_rows(rows: &[RateRow], study: StudyKind, d: usize, pieces: Option<usize>) -> StudySummary {
    let mut by_n: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for r in rows {
        let e = by_n.entry(r.n).or_default();
        if r.converged {
            e.0.push(r.hellinger_sq);
        } else {
            e.1 += 1;
        }
    }
    let sizes: Vec<SizeSummary> = by_n
        .into_iter()
        .filter_map(|(n, (mut h, excluded))| {
            if h.is_empty() {
                return None;
            }
            h.sort_by(f64::total_cmp);
            let mean = h.iter().sum::<f64>() / h.len() as f64;
            let normalized = (study == StudyKind::Adaptation).then(|| {
                let nf = n as f64;
                mean * nf / (pieces.unwrap_or(1) as f64 * nf.ln().powf(8.0 / 3.0 * (2 * d - 1) as f64))
            });
            Some(SizeSummary {
                n,
                count: h.len(),
                excluded,
                mean,
                median: quantile(&h, 0.5),
                p10: quantile(&h, 0.1),
                p90: quantile(&h, 0.9),
                normalized,
            })
        })
        .collect();
    let points: Vec<(f64, f64)> = sizes.iter().map(|s| (s.n as f64, s.mean)).collect();
    let normalized: Vec<f64> = sizes.iter().filter_map(|s| s.normalized).collect();
    let normalized_spread = (!normalized.is_empty()).then(|| {
        let hi = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    });
    StudySummary {
        study,
        d,
        pieces,
        slope: fit_loglog_slope(&points).ok(),
        excluded: rows.iter().filter(|r| !r.converged).count(),
        normalized_spread,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        sizes,
    }
}

/// Recomputes the summary of a results file.
pub fn summarize_csv(path: &Path, cfg: &ExperimentConfig) -> Result<StudySummary> {
    let rows = read_rows(File::open(path)?, &path.display().to_string())?;
    let (d, pieces) = truth_shape(cfg.truth.as_ref());
    Ok(summarize_rows(&rows, cfg.study, d, pieces))
}

fn theory_curve(study: StudyKind, n: f64, d: usize, pieces: usize) -> f64 {
    let l = n.ln();
    match study {
        StudyKind::Adaptation => pieces as f64 / n * l.powf(8.0 / 3.0 * (2 * d - 1) as f64),
        _ => n.powf(-2.0 / 3.0) * l.powi(4 * d as i32 - 2),
    }
}

/// Whitespace-separated `n mean p10 p90 theory`, the theory curve scaled to
/// agree with the first mean.
pub fn write_plot_data<W: Write>(summary: &StudySummary, mut w: W) -> Result<()> {
    let pieces = summary.pieces.unwrap_or(1);
    let scale = summary
        .sizes
        .first()
        .map_or(1.0, |s| s.mean / theory_curve(summary.study, s.n as f64, summary.d, pieces));
    writeln!(w, "# n mean p10 p90 theory")?;
    for s in &summary.sizes {
        let t = scale * theory_curve(summary.study, s.n as f64, summary.d, pieces);
        writeln!(w, "{} {:?} {:?} {:?} {:?}", s.n, s.mean, s.p10, s.p90, t)?;
    }
    Ok(())
}

fn replicate(cfg: &ExperimentConfig, truth: Option<&Truth>, n: usize, rep: usize) -> Result<RateRow> {
    let seed = replication_stream(n, rep);
    let mut row = RateRow {
        n,
        rep,
        seed,
        hellinger_sq: 0.0,
        loglik: 0.0,
        cert_gap: 0.0,
        support_size: 0,
        runtime_ms: None,
        converged: true,
    };
    let Some(truth) = truth.filter(|_| !cfg.synthetic) else {
        row.hellinger_sq = (n as f64).powf(-2.0 / 3.0);
        return Ok(row);
    };
    let start = Instant::now();
    let rng = RngSpec::new(cfg.master_seed, seed);
    let data = truth.sample(n, &rng)?;
    let fit = fit_npmle(&data, &cfg.solver)?;
    let fitted = SmuDensity::Discrete(fit.mixture.clone());
    row.hellinger_sq = match cfg.metric {
        MetricMode::Exact => match &truth.piecewise {
            Some(pc) => hellinger_sq_exact(&fitted, &SmuDensity::PiecewiseConstant(pc.clone()))?,
            None => {
                return Err(SmuError::InvalidArgument(
                    "truth has no step form; use the mc metric".into(),
                ))
            }
        },
        MetricMode::Mc { n_samples } => {
            let mc_seed = rng.child(1).rng().next_u64();
            hellinger_sq_mc(&fitted, &truth.density, n_samples, mc_seed, McProposal::UniformBox)?.estimate
        }
    };
    row.loglik = fit.log_likelihood;
    row.cert_gap = fit.certificate.gap;
    row.support_size = fit.support_size();
    row.converged = fit.converged;
    if cfg.record_timing {
        row.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(row)
}

fn default_sibling(csv: &Path, ext: &str) -> PathBuf {
    csv.with_extension(ext)
}

/// Opens the results file, returning rows already present when resuming.
fn open_results(path: &Path, resume: bool) -> Result<(BufWriter<File>, Vec<RateRow>)> {
    if resume && path.exists() {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        // drop a partially written final line
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        let rows = if keep == 0 {
            Vec::new()
        } else {
            read_rows(&text.as_bytes()[..keep], &path.display().to_string())?
        };
        let mut file = OpenOptions::new().read(true).write(true).open(path)?;
        file.set_len(keep as u64)?;
        file.seek(SeekFrom::End(0))?;
        let mut w = BufWriter::new(file);
        if keep == 0 {
            writeln!(w, "{CSV_HEADER}")?;
            w.flush()?;
        }
        Ok((w, rows))
    } else {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{CSV_HEADER}")?;
        w.flush()?;
        Ok((w, Vec::new()))
    }
}

/// Runs a rate or adaptation study. Rows are appended to the results CSV in
/// `(n, rep)` order as they complete, so an interrupted file is always a
/// prefix of the full one and `resume` can skip what is already there.
pub fn run_study(cfg: &ExperimentConfig, resume: bool) -> Result<StudyOutput> {
    cfg.validate()?;
    if cfg.study == StudyKind::Lowerbound {
        return Err(SmuError::InvalidArgument("use run_lowerbound_report for this study".into()));
    }
    let truth = match (&cfg.truth, cfg.synthetic) {
        (Some(spec), false) => Some(make_truth(spec)?),
        _ => None,
    };
    let (d, pieces) = truth_shape(cfg.truth.as_ref());

    let (mut writer, existing) = match &cfg.output.csv {
        Some(p) => {
            let (w, rows) = open_results(p, resume)?;
            (Some(w), rows)
        }
        None => (None, Vec::new()),
    };
    let done: HashSet<(usize, usize)> = existing.iter().map(|r| (r.n, r.rep)).collect();
    let tasks: Vec<(usize, usize)> = cfg
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |rep| (n, rep)))
        .filter(|t| !done.contains(t))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.resolved_threads())
        .build()
        .map_err(|e| SmuError::InvalidArgument(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(usize, RateRow)>();
    let mut rows = existing;
    let result = std::thread::scope(|scope| {
        let rows = &mut rows;
        let writer = &mut writer;
        let sink = scope.spawn(move || -> Result<()> {
            let mut pending = BTreeMap::new();
            let mut next = 0usize;
            for (i, row) in rx {
                pending.insert(i, row);
                while let Some(row) = pending.remove(&next) {
                    if let Some(w) = writer.as_mut() {
                        writeln!(w, "{}", row.csv_line())?;
                        w.flush()?;
                    }
                    rows.push(row);
                    next += 1;
                }
            }
            Ok(())
        });
        let work = pool.install(|| {
            tasks.par_iter().enumerate().try_for_each_with(tx, |tx, (i, &(n, rep))| {
                let row = replicate(cfg, truth.as_ref(), n, rep)?;
                tx.send((i, row)).expect("writer outlives workers");
                Ok::<(), SmuError>(())
            })
        });
        let written = sink.join().expect("writer thread panicked");
        work.and(written)
    });
    result?;

    let summary = summarize_rows(&rows, cfg.study, d, pieces);
    if let Some(csv) = &cfg.output.csv {
        let plot = cfg.output.plot.clone().unwrap_or_else(|| default_sibling(csv, "dat"));
        write_plot_data(&summary, BufWriter::new(File::create(plot)?))?;
        let json = cfg
            .output
            .summary
            .clone()
            .unwrap_or_else(|| default_sibling(csv, "summary.json"));
        std::fs::write(json, serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    Ok(StudyOutput { rows, summary })
}

pub fn run_rate_study(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    if cfg.study != StudyKind::Rate {
        return Err(SmuError::InvalidArgument("config is not a rate study".into()));
    }
    run_study(cfg, false)
}

pub fn run_adaptation_study(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    if cfg.study != StudyKind::Adaptation {
        return Err(SmuError::InvalidArgument("config is not an adaptation study".into()));
    }
    run_study(cfg, false)
}
