//! Divergences between SMU densities.
//!
//! Exact values are computed on the common refinement of two step densities.
//! Total variation is the unnormalized `∫|p − q|`, twice the probabilistic
//! convention. Logarithms are natural.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::SmuDensity;
use crate::error::{Result, SmuError};
use crate::measure::{MixingAtom, MixingMeasure};
use crate::piecewise::{
    check_grid_size, for_each_index, interval_left_open, PiecewiseConstantDensity, RectPartition,
};
use crate::rng::RngSpec;
use crate::simulate::draw_point;

/// Two step densities expressed on one partition.
#[derive(Debug, Clone)]
pub struct CommonRefinement {
    pub partition: RectPartition,
    pub values_p: Vec<f64>,
    pub values_q: Vec<f64>,
}

impl CommonRefinement {
    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.partition
            .cell_volumes()
            .into_iter()
            .zip(self.values_p.iter().zip(&self.values_q))
            .map(|(v, (&a, &b))| (v, a, b))
    }
}

/// Maps each union interval of one axis to the interval of `own` containing
/// it, or `None` beyond `own`'s extent.
fn axis_map(union: &[f64], own: &[f64]) -> Vec<Option<usize>> {
    union
        .windows(2)
        .map(|w| interval_left_open(own, w[1]))
        .collect()
}

pub fn refine_common(
    p: &PiecewiseConstantDensity,
    q: &PiecewiseConstantDensity,
) -> Result<CommonRefinement> {
    if p.dim() != q.dim() {
        return Err(SmuError::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let d = p.dim();
    let mut union = Vec::with_capacity(d);
    for j in 0..d {
        let mut b: Vec<f64> = p.partition().breakpoints()[j]
            .iter()
            .chain(&q.partition().breakpoints()[j])
            .copied()
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        union.push(b);
    }
    let cells: u128 = union.iter().map(|b| (b.len() - 1) as u128).product();
    check_grid_size("common refinement (use hellinger_sq_mc)", d, cells)?;

    let maps = |own: &RectPartition| -> Vec<Vec<Option<usize>>> {
        union
            .iter()
            .zip(own.breakpoints())
            .map(|(u, o)| axis_map(u, o))
            .collect()
    };
    let (mp, mq) = (maps(p.partition()), maps(q.partition()));
    let shape: Vec<usize> = union.iter().map(|b| b.len() - 1).collect();
    let mut values_p = Vec::with_capacity(cells as usize);
    let mut values_q = Vec::with_capacity(cells as usize);
    let mut ip = vec![0usize; d];
    let mut iq = vec![0usize; d];
    let lookup = |dens: &PiecewiseConstantDensity,
                  map: &[Vec<Option<usize>>],
                  idx: &[usize],
                  buf: &mut [usize]|
     -> f64 {
        for j in 0..idx.len() {
            match map[j][idx[j]] {
                Some(k) => buf[j] = k,
                None => return 0.0,
            }
        }
        dens.value_at(buf)
    };
    for_each_index(&shape, |idx| {
        values_p.push(lookup(p, &mp, idx, &mut ip));
        values_q.push(lookup(q, &mq, idx, &mut iq));
    });
    Ok(CommonRefinement {
        partition: RectPartition::new(union)?,
        values_p,
        values_q,
    })
}

pub fn hellinger_sq(p: &PiecewiseConstantDensity, q: &PiecewiseConstantDensity) -> Result<f64> {
    let r = refine_common(p, q)?;
    Ok(r.cells()
        .map(|(v, a, b)| (a.sqrt() - b.sqrt()).powi(2) * v)
        .sum::<f64>()
        .clamp(0.0, 2.0))
}

pub fn tv(p: &PiecewiseConstantDensity, q: &PiecewiseConstantDensity) -> Result<f64> {
    let r = refine_common(p, q)?;
    Ok(r.cells().map(|(v, a, b)| (a - b).abs() * v).sum())
}

pub fn l2_sq(p: &PiecewiseConstantDensity, q: &PiecewiseConstantDensity) -> Result<f64> {
    let r = refine_common(p, q)?;
    Ok(r.cells().map(|(v, a, b)| (a - b).powi(2) * v).sum())
}

pub fn kl(p: &PiecewiseConstantDensity, q: &PiecewiseConstantDensity) -> Result<f64> {
    let r = refine_common(p, q)?;
    let mut total = 0.0;
    for (k, (v, a, b)) in r.cells().enumerate() {
        if a == 0.0 || v == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(SmuError::AbsoluteContinuity {
                cell: r.partition.unravel(k),
                p_value: a,
            });
        }
        total += a * (a / b).ln() * v;
    }
    Ok(total.max(0.0))
}

/// Squared Hellinger distance restricted to the box `rect`: `∫_R (√p − √q)²`.
pub fn hellinger_sq_on_rect(
    p: &PiecewiseConstantDensity,
    q: &PiecewiseConstantDensity,
    rect: &crate::piecewise::Rect,
) -> Result<f64> {
    let r = refine_common(p, q)?;
    let b = r.partition.breakpoints();
    let mut total = 0.0;
    for (k, (_, a, c)) in r.cells().enumerate() {
        if a == c {
            continue;
        }
        let idx = r.partition.unravel(k);
        let mut vol = 1.0;
        for j in 0..idx.len() {
            let lo = b[j][idx[j]].max(rect.lower[j]);
            let hi = b[j][idx[j] + 1].min(rect.upper[j]);
            vol *= (hi - lo).max(0.0);
        }
        total += (a.sqrt() - c.sqrt()).powi(2) * vol;
    }
    Ok(total)
}

/// Squared Hellinger distance of two densities that are either discrete
/// mixtures or step densities.
pub fn hellinger_sq_exact(p: &SmuDensity, q: &SmuDensity) -> Result<f64> {
    let to_pc = |s: &SmuDensity| {
        s.to_piecewise().unwrap_or_else(|| {
            Err(SmuError::InvalidArgument(
                "analytic densities need hellinger_sq_mc".into(),
            ))
        })
    };
    hellinger_sq(&to_pc(p)?, &to_pc(q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum McProposal {
    /// Uniform on the smallest box `(0, M]` containing both supports.
    #[default]
    UniformBox,
    /// The equal mixture `(p + q)/2`; both densities must be discrete.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub const MC_BLOCK: usize = 1 << 16;
pub const MC_MIN_SAMPLES: usize = 100;

/// Running mean and sum of squared deviations, merged in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Importance-sampling estimate of `∫(√p − √q)²`.
///
/// Draws are split into fixed blocks of [`MC_BLOCK`] samples, each on its own
/// child stream of `RngSpec::new(seed, 0)`, so the result does not depend on
/// the thread count.
pub fn hellinger_sq_mc(
    p: &SmuDensity,
    q: &SmuDensity,
    n_samples: usize,
    seed: u64,
    proposal: McProposal,
) -> Result<McEstimate> {
    if n_samples < MC_MIN_SAMPLES {
        return Err(SmuError::InvalidArgument(format!(
            "Monte Carlo needs at least {MC_MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    if p.dim() != q.dim() {
        return Err(SmuError::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let d = p.dim();
    let base = RngSpec::new(seed, 0);
    let blocks = n_samples.div_ceil(MC_BLOCK);

    let integrand: Box<dyn Fn(&mut rand_chacha::ChaCha20Rng, &mut [f64]) -> f64 + Sync> =
        match proposal {
            McProposal::UniformBox => {
                let extent: Vec<f64> = p
                    .extent()
                    .iter()
                    .zip(q.extent())
                    .map(|(a, b)| a.max(b))
                    .collect();
                let vol: f64 = extent.iter().product();
                Box::new(move |rng, x| {
                    for (xj, m) in x.iter_mut().zip(&extent) {
                        *xj = m * (1.0 - rng.random::<f64>());
                    }
                    (p.eval(x).sqrt() - q.eval(x).sqrt()).powi(2) * vol
                })
            }
            McProposal::Mixture => {
                let (SmuDensity::Discrete(gp), SmuDensity::Discrete(gq)) = (p, q) else {
                    return Err(SmuError::InvalidArgument(
                        "mixture proposal needs two discrete densities".into(),
                    ));
                };
                let atoms: Vec<MixingAtom> = gp
                    .atoms()
                    .iter()
                    .chain(gq.atoms())
                    .map(|a| MixingAtom::new(a.theta.clone(), 0.5 * a.weight))
                    .collect();
                let mix = MixingMeasure::probability(d, atoms)?;
                let cumulative: Vec<f64> = mix
                    .atoms()
                    .iter()
                    .scan(0.0, |acc, a| {
                        *acc += a.weight;
                        Some(*acc)
                    })
                    .collect();
                Box::new(move |rng, x| {
                    draw_point(&mix, &cumulative, rng, x);
                    let (a, b) = (p.eval(x), q.eval(x));
                    (a.sqrt() - b.sqrt()).powi(2) / (0.5 * (a + b))
                })
            }
        };

    let per_block: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = base.child(b as u64).rng();
            let count = MC_BLOCK.min(n_samples - b * MC_BLOCK);
            let mut x = vec![0.0; d];
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(integrand(&mut rng, &mut x));
            }
            m
        })
        .collect();
    let total = per_block
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.count - 1.0);
    Ok(McEstimate {
        estimate: total.mean,
        std_error: (var / total.count).sqrt(),
        samples: n_samples,
    })
}
